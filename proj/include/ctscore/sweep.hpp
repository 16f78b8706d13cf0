#ifndef CTSCORE_SWEEP_HPP
#define CTSCORE_SWEEP_HPP

#include <cfenv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctscore/scoring.hpp"
#include "ctscore/structure.hpp"

namespace ctscore {

enum class OutputFormat { kCsv, kJson };

inline OutputFormat parse_output_format(const std::string& name) {
  if (name == "csv") return OutputFormat::kCsv;
  if (name == "json") return OutputFormat::kJson;
  throw UsageError("unknown output format '" + name + "' (expected csv or json)");
}

struct SweepConfig {
  std::vector<double> horizons;
  std::vector<Criterion> criteria{Criterion::kVcs, Criterion::kAecs};
  ScoreOptions options;
  OutputFormat format = OutputFormat::kCsv;
  int decimals = 4;

  void validate() const {
    if (horizons.empty()) throw InputError("sweep: no horizons");
    for (std::size_t i = 0; i < horizons.size(); ++i) {
      Horizon{horizons[i]};
      if (i > 0 && !(horizons[i] > horizons[i - 1])) {
        throw InputError("sweep: horizons must be strictly ascending");
      }
    }
    if (criteria.empty()) throw InputError("sweep: no criteria");
    if (decimals < 0 || decimals > 17) throw InputError("sweep: decimals must lie in 0..17");
  }
};

struct SweepCell {
  Criterion criterion;
  double horizon;
  // Empty when the solver stalled; `error` then holds the message.
  std::optional<ScoreResult> result;
  std::string error;
};

struct BoundRow {
  Index node;  // 0-based
  double horizon;
  double ell;
  double omega;
  // 1 / (p_i omega_i(T)) at the AECS scores of this horizon, if computed.
  std::optional<double> aecs_bound;
};

struct SweepTable {
  std::vector<std::string> labels;
  std::vector<SweepCell> cells;  // criterion-major, horizons ascending
  std::vector<BoundRow> bounds;
};

/// Scores every criterion x horizon cell. Solver stalls are recorded per
/// cell and do not abort the sweep.
inline SweepTable run_sweep(const NetworkSystem& system, const SweepConfig& config) {
  config.validate();
  SweepTable table;
  table.labels = system.labels();
  std::vector<GramianBasis> bases;
  for (double t : config.horizons) {
    bases.push_back(gramian_basis(system, Horizon(t), config.options.gramian));
  }
  for (Criterion c : config.criteria) {
    for (std::size_t h = 0; h < config.horizons.size(); ++h) {
      SweepCell cell{c, config.horizons[h], std::nullopt, {}};
      try {
        cell.result = compute_score(bases[h], c, config.options);
      } catch (const SolverStallError& e) {
        cell.error = e.what();
      }
      table.cells.push_back(std::move(cell));
    }
  }
  const auto sources = detect_source_nodes(system);
  for (double t : config.horizons) {
    const SweepCell* aecs = nullptr;
    for (const auto& cell : table.cells) {
      if (cell.criterion == Criterion::kAecs && cell.horizon == t && cell.result) aecs = &cell;
    }
    for (const auto& s : sources) {
      BoundRow row{s.index, t, s.ell, omega(s.ell, Horizon(t)), std::nullopt};
      if (aecs) row.aecs_bound = aecs_lower_bound(aecs->result->scores[s.index], s.ell, Horizon(t));
      table.bounds.push_back(row);
    }
  }
  return table;
}

/// Rounds to `decimals` fractional digits, ties to even, and prints exactly
/// that many digits.
inline std::string format_fixed(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  const int saved = std::fegetround();
  std::fesetround(FE_TONEAREST);
  double rounded = std::nearbyint(value * scale) / scale;
  std::fesetround(saved);
  if (rounded == 0.0) rounded = 0.0;  // no "-0.0000"
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, rounded);
  return buf;
}

inline std::string format_horizon(double t) {
  std::ostringstream out;
  out << t;
  return out.str();
}

/// Header `node,<crit>@T=<value>,...`, then one row per node. Stalled cells
/// are left empty.
inline std::string format_csv(const SweepTable& table, int decimals) {
  std::ostringstream out;
  out << "node";
  for (const auto& cell : table.cells) {
    out << "," << to_string(cell.criterion) << "@T=" << format_horizon(cell.horizon);
  }
  out << "\n";
  for (std::size_t i = 0; i < table.labels.size(); ++i) {
    out << table.labels[i];
    for (const auto& cell : table.cells) {
      out << ",";
      if (cell.result) out << format_fixed(cell.result->scores[static_cast<Index>(i)], decimals);
    }
    out << "\n";
  }
  return out.str();
}

inline nlohmann::json sweep_to_json(const SweepTable& table) {
  using nlohmann::json;
  json results = json::array();
  for (const auto& cell : table.cells) {
    json entry = {{"criterion", to_string(cell.criterion)}, {"T", cell.horizon}};
    if (cell.result) {
      const ScoreResult& r = *cell.result;
      std::vector<double> scores(r.scores.values().data(),
                                 r.scores.values().data() + r.scores.size());
      entry["scores"] = scores;
      entry["objective"] = r.objective_value;
      entry["converged"] = r.report.converged;
      entry["iterations"] = r.report.iterations;
      entry["residual"] = r.report.residual;
      entry["multistart_spread"] = r.multistart_spread;
      entry["gramian_method"] = to_string(r.method);
      entry["condition_number"] = r.condition_number;
      entry["warnings"] = r.warnings;
    } else {
      entry["scores"] = nullptr;
      entry["converged"] = false;
      entry["error"] = cell.error;
    }
    results.push_back(std::move(entry));
  }
  json bounds = json::array();
  for (const auto& b : table.bounds) {
    json entry = {{"node", table.labels[static_cast<std::size_t>(b.node)]},
                  {"T", b.horizon},
                  {"ell", b.ell},
                  {"omega", b.omega}};
    entry["aecs_bound"] = b.aecs_bound ? json(*b.aecs_bound) : json(nullptr);
    bounds.push_back(std::move(entry));
  }
  return json{{"system", {{"n", table.labels.size()}, {"labels", table.labels}}},
              {"results", std::move(results)},
              {"bounds", std::move(bounds)}};
}

inline std::string format_json(const SweepTable& table) { return sweep_to_json(table).dump(2) + "\n"; }

inline std::string emit_output(const SweepTable& table, OutputFormat format, int decimals) {
  return format == OutputFormat::kCsv ? format_csv(table, decimals) : format_json(table);
}

inline void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << content;
  if (!out.flush()) throw IoError("write to '" + path + "' failed");
}

}  // namespace ctscore

#endif  // CTSCORE_SWEEP_HPP
