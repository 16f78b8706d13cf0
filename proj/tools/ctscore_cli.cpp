// Command-line front end: controllability scores, horizon sweeps, source-node
// bounds, optimal designs and coordinate-change checks.
#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctscore/ctscore.hpp"

namespace {

using ctscore::Index;
using ctscore::MatrixXd;
using ctscore::VectorXd;
using nlohmann::json;

constexpr int kExitInput = 1;
constexpr int kExitNotConverged = 2;

struct GlobalFlags {
  double tol = ctscore::SolveOptions{}.grad_tol;
  std::uint64_t seed = ctscore::SolveOptions{}.seed;
  int max_iters = ctscore::SolveOptions{}.max_iters;
  int starts = ctscore::ScoreOptions{}.random_starts;
  std::string output;
  std::string format = "csv";
  int decimals = 4;
  bool strict = false;

  ctscore::ScoreOptions score_options() const {
    ctscore::ScoreOptions o;
    o.solve.grad_tol = tol;
    o.solve.seed = seed;
    o.solve.max_iters = max_iters;
    o.random_starts = starts;
    o.solve.validate();
    return o;
  }
  ctscore::OutputFormat output_format() const { return ctscore::parse_output_format(format); }
};

struct SystemFlags {
  std::string network;
  std::string edges;

  void attach(CLI::App* cmd) {
    auto* n = cmd->add_option("--network", network, "builtin network (fig1, fig1-selfloop9, twonode-diag)");
    auto* e = cmd->add_option("--edges", edges, "edge-list file (`src dst weight` per line)");
    n->excludes(e);
    e->excludes(n);
  }

  ctscore::NetworkSystem load() const {
    if (network.empty() == edges.empty()) {
      throw ctscore::UsageError("give exactly one of --network or --edges");
    }
    return ctscore::build_laplacian_dynamics(network.empty() ? ctscore::read_edge_list(edges)
                                                             : ctscore::builtin_network(network));
  }
};

void emit(const GlobalFlags& g, const std::string& content) {
  if (g.output.empty()) {
    std::cout << content;
  } else {
    ctscore::write_text(g.output, content);
  }
}

void warn(const std::string& message) { std::cerr << "warning: " << message << "\n"; }

std::string number(double v, int decimals) { return ctscore::format_fixed(v, decimals); }

std::vector<double> to_std(const VectorXd& v) { return {v.data(), v.data() + v.size()}; }

int finish_sweep(const GlobalFlags& g, const ctscore::SweepTable& table) {
  bool all_converged = true;
  for (const auto& cell : table.cells) {
    const std::string where = std::string(ctscore::to_string(cell.criterion)) +
                              " at T=" + ctscore::format_horizon(cell.horizon);
    if (!cell.result) {
      warn(where + ": " + cell.error);
      all_converged = false;
      continue;
    }
    for (const auto& w : cell.result->warnings) warn(where + ": " + w);
    all_converged = all_converged && cell.result->report.converged;
  }
  emit(g, ctscore::emit_output(table, g.output_format(), g.decimals));
  return g.strict && !all_converged ? kExitNotConverged : 0;
}

// ---------------------------------------------------------------------------

int run_score(const GlobalFlags& g, const SystemFlags& s, double horizon,
              const std::string& criterion) {
  ctscore::SweepConfig config;
  config.horizons = {horizon};
  config.criteria = {ctscore::parse_criterion(criterion)};
  config.options = g.score_options();
  config.format = g.output_format();
  config.decimals = g.decimals;
  return finish_sweep(g, ctscore::run_sweep(s.load(), config));
}

int run_sweep(const GlobalFlags& g, const SystemFlags& s, const std::vector<double>& horizons,
              const std::vector<std::string>& criteria) {
  ctscore::SweepConfig config;
  config.horizons = horizons;
  config.criteria.clear();
  for (const auto& c : criteria) config.criteria.push_back(ctscore::parse_criterion(c));
  config.options = g.score_options();
  config.format = g.output_format();
  config.decimals = g.decimals;
  return finish_sweep(g, ctscore::run_sweep(s.load(), config));
}

int run_bounds(const GlobalFlags& g, const SystemFlags& s, double horizon, const std::string& at) {
  const auto system = s.load();
  const ctscore::Horizon t(horizon);
  const auto basis = ctscore::gramian_basis(system, t);
  std::optional<ctscore::ScoreResult> solved;
  ctscore::Allocation p = ctscore::Allocation::uniform(system.size());
  if (at != "uniform") {
    solved = ctscore::compute_score(basis, ctscore::parse_criterion(at), g.score_options());
    p = solved->scores;
  }
  const auto report = ctscore::source_node_report(system, t, p);
  for (const auto& w : report.warnings) warn(w);

  std::vector<double> vcs_bounds;
  for (const auto& e : report.entries) {
    vcs_bounds.push_back(ctscore::feasibility(basis, p)
                             ? ctscore::vcs_lower_bound(system, basis, p, e.index)
                             : std::numeric_limits<double>::quiet_NaN());
  }
  const bool feasible = ctscore::feasibility(basis, p);
  const double f = feasible ? ctscore::vcs_objective(basis, p) : NAN;
  const double gt = feasible ? ctscore::aecs_objective(basis, p) : NAN;

  std::ostringstream out;
  const auto& labels = system.labels();
  if (g.output_format() == ctscore::OutputFormat::kCsv) {
    out << "node,ell,regime,omega,p,aecs_bound,aecs_bound_limit,vcs_bound\n";
    for (std::size_t k = 0; k < report.entries.size(); ++k) {
      const auto& e = report.entries[k];
      out << labels[static_cast<std::size_t>(e.index)] << "," << ctscore::format_horizon(e.ell) << ","
          << ctscore::to_string(e.regime) << "," << number(e.omega, g.decimals) << ","
          << number(p[e.index], g.decimals) << "," << number(e.aecs_bound, g.decimals) << ","
          << number(e.aecs_bound_limit, g.decimals) << "," << number(vcs_bounds[k], g.decimals)
          << "\n";
    }
  } else {
    json entries = json::array();
    for (std::size_t k = 0; k < report.entries.size(); ++k) {
      const auto& e = report.entries[k];
      entries.push_back({{"node", labels[static_cast<std::size_t>(e.index)]},
                         {"ell", e.ell},
                         {"regime", ctscore::to_string(e.regime)},
                         {"omega", e.omega},
                         {"p", p[e.index]},
                         {"aecs_bound", e.aecs_bound},
                         {"aecs_bound_limit", e.aecs_bound_limit},
                         {"vcs_bound", vcs_bounds[k]}});
    }
    json doc = {{"T", horizon},
                {"allocation", at},
                {"p", to_std(p.values())},
                {"vcs_objective", f},
                {"aecs_objective", gt},
                {"bounds", entries}};
    out << doc.dump(2) << "\n";
  }
  emit(g, out.str());
  if (solved && !solved->report.converged) {
    warn("solver did not converge");
    if (g.strict) return kExitNotConverged;
  }
  return 0;
}

int run_oed(const GlobalFlags& g, const std::string& path, const std::string& criterion,
            double scale, int probe_starts) {
  std::ifstream in(path);
  if (!in) throw ctscore::IoError("cannot open design file '" + path + "'");
  const ctscore::DesignProblem problem(ctscore::parse_design_vectors(in), scale);
  const auto c = ctscore::parse_design_criterion(criterion);
  ctscore::SolveOptions opts = g.score_options().solve;
  const auto result = ctscore::solve_design(problem, c, opts);
  std::optional<ctscore::ProbeResult> probe;
  if (probe_starts > 0) probe = ctscore::uniqueness_probe(problem, c, opts, probe_starts);

  std::ostringstream out;
  if (g.output_format() == ctscore::OutputFormat::kCsv) {
    out << "point,weight\n";
    for (Index i = 0; i < problem.count(); ++i) {
      out << i + 1 << "," << number(result.weights[i], g.decimals) << "\n";
    }
  } else {
    json doc = {{"criterion", ctscore::to_string(c)},
                {"weights", to_std(result.weights.values())},
                {"objective", result.objective_value},
                {"optimality_gap", result.kw_gap},
                {"converged", result.report.converged},
                {"iterations", result.report.iterations},
                {"residual", result.report.residual}};
    if (probe) {
      json optimizers = json::array();
      for (const auto& w : probe->optimizers) optimizers.push_back(to_std(w.values()));
      doc["probe"] = {{"spread", probe->spread},
                      {"best_objective", probe->best_objective},
                      {"objectives", probe->objectives},
                      {"optimizers", optimizers}};
    }
    out << doc.dump(2) << "\n";
  }
  emit(g, out.str());
  if (g.output_format() == ctscore::OutputFormat::kCsv) {
    std::cerr << "objective " << result.objective_value << ", optimality gap " << result.kw_gap;
    if (probe) std::cerr << ", probe spread " << probe->spread;
    std::cerr << "\n";
  }
  if (!result.report.converged) {
    warn("design solver did not converge");
    if (g.strict) return kExitNotConverged;
  }
  return 0;
}

MatrixXd read_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ctscore::IoError("cannot open matrix file '" + path + "'");
  const auto rows = ctscore::parse_design_vectors(in);
  if (rows.empty()) throw ctscore::ParseError("empty matrix file", 0);
  MatrixXd m(static_cast<Index>(rows.size()), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) m.row(static_cast<Index>(i)) = rows[i];
  return m;
}

int run_invariance(const GlobalFlags& g, const SystemFlags& s, double horizon,
                   const std::string& matrix_path, int random, double max_cond,
                   const std::vector<double>& aecs_scaling) {
  const auto opts = g.score_options();
  std::ostringstream out;
  if (!aecs_scaling.empty()) {
    if (aecs_scaling.size() != 2) throw ctscore::UsageError("--aecs-scaling takes two values");
    const auto r = ctscore::check_aecs_coordinate_dependence(aecs_scaling[0], aecs_scaling[1],
                                                             ctscore::Horizon(horizon), opts);
    if (g.output_format() == ctscore::OutputFormat::kCsv) {
      out << "case,p1,p2,closed_p1,closed_p2,error\n";
      out << "unscaled," << number(r.unscaled[0], g.decimals) << "," << number(r.unscaled[1], g.decimals)
          << "," << number(r.unscaled_closed_form(0), g.decimals) << ","
          << number(r.unscaled_closed_form(1), g.decimals) << "," << r.unscaled_error << "\n";
      out << "scaled," << number(r.scaled[0], g.decimals) << "," << number(r.scaled[1], g.decimals)
          << "," << number(r.scaled_closed_form(0), g.decimals) << ","
          << number(r.scaled_closed_form(1), g.decimals) << "," << r.scaled_error << "\n";
    } else {
      json doc = {{"s", aecs_scaling},
                  {"T", horizon},
                  {"unscaled", to_std(r.unscaled.values())},
                  {"scaled", to_std(r.scaled.values())},
                  {"unscaled_closed_form", to_std(r.unscaled_closed_form)},
                  {"scaled_closed_form", to_std(r.scaled_closed_form)},
                  {"matches", r.matches}};
      out << doc.dump(2) << "\n";
    }
    emit(g, out.str());
    return 0;
  }

  const auto system = s.load();
  std::vector<MatrixXd> transforms;
  if (!matrix_path.empty()) transforms.push_back(read_matrix(matrix_path));
  if (random < 0) throw ctscore::UsageError("--random must be non-negative");
  if (!(max_cond > 1.0)) throw ctscore::UsageError("--max-cond must exceed 1");
  std::mt19937_64 rng(g.seed);
  while (static_cast<int>(transforms.size()) < random + (matrix_path.empty() ? 0 : 1)) {
    // U diag(s) V^T with random orthogonal U, V and log-uniform singular
    // values in (1/max_cond, 1].
    std::normal_distribution<double> normal;
    const Index n = system.size();
    MatrixXd m(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) m(i, j) = normal(rng);
    const MatrixXd u = Eigen::HouseholderQR<MatrixXd>(m).householderQ();
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) m(i, j) = normal(rng);
    const MatrixXd v = Eigen::HouseholderQR<MatrixXd>(m).householderQ();
    std::uniform_real_distribution<double> exponent(0.0, std::log(max_cond) * (1.0 - 1e-9));
    VectorXd sv(n);
    for (Index i = 0; i < n; ++i) sv(i) = std::exp(-exponent(rng));
    sv(0) = 1.0;
    transforms.push_back(u * sv.asDiagonal() * v.transpose());
  }
  if (transforms.empty()) throw ctscore::UsageError("give --matrix FILE or --random K");

  json rows = json::array();
  if (g.output_format() == ctscore::OutputFormat::kCsv) {
    out << "trial,condition,spread,offset,offset_error\n";
  }
  for (std::size_t k = 0; k < transforms.size(); ++k) {
    const ctscore::CoordinateChange change(transforms[k]);
    for (const auto& w : change.warnings()) warn(w);
    const auto r =
        ctscore::check_vcs_invariance(system, ctscore::Horizon(horizon), transforms[k], opts);
    if (g.output_format() == ctscore::OutputFormat::kCsv) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "%zu,%.6g,%.3e,%.12g,%.3e\n", k + 1, change.condition_number(),
                    r.spread, r.expected_offset, r.max_offset_error);
      out << buf;
    } else {
      rows.push_back({{"trial", k + 1},
                      {"condition", change.condition_number()},
                      {"spread", r.spread},
                      {"offset", r.expected_offset},
                      {"offset_error", r.max_offset_error},
                      {"original", to_std(r.original.values())},
                      {"transformed", to_std(r.transformed.values())}});
    }
  }
  if (g.output_format() == ctscore::OutputFormat::kJson) {
    out << json{{"T", horizon}, {"trials", rows}}.dump(2) << "\n";
  }
  emit(g, out.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Controllability scores (VCS/AECS) of networked linear systems"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalFlags g;
  app.add_option("--tol", g.tol, "projected-gradient residual threshold")->capture_default_str();
  app.add_option("--seed", g.seed, "seed for multistart points")->capture_default_str();
  app.add_option("--max-iters", g.max_iters, "iteration cap per solver run")->capture_default_str();
  app.add_option("--starts", g.starts, "random starts besides the uniform one")->capture_default_str();
  app.add_option("-o,--output", g.output, "write to this file instead of stdout");
  app.add_option("--format", g.format, "csv or json")->capture_default_str();
  app.add_option("--decimals", g.decimals, "fractional digits in csv output")->capture_default_str();
  app.add_flag("--strict", g.strict, "exit with status 2 when a solver run does not converge");

  SystemFlags system;
  double horizon = 1.0;
  std::string criterion = "VCS";

  auto* score = app.add_subcommand("score", "score one system at one horizon");
  system.attach(score);
  score->add_option("-T,--horizon", horizon, "horizon T > 0")->required();
  score->add_option("-c,--criterion", criterion, "VCS or AECS")->capture_default_str();

  std::vector<double> horizons{0.01, 1.0, 1000.0, 10000.0};
  std::vector<std::string> criteria{"VCS", "AECS"};
  auto* sweep = app.add_subcommand("sweep", "score table over horizons and criteria");
  system.attach(sweep);
  sweep->add_option("--horizons", horizons, "ascending horizons")->delimiter(',')->capture_default_str();
  sweep->add_option("--criteria", criteria, "criteria")->delimiter(',')->capture_default_str();

  std::string at = "uniform";
  auto* bounds = app.add_subcommand("bounds", "source-node report and lower bounds");
  system.attach(bounds);
  bounds->add_option("-T,--horizon", horizon, "horizon T > 0")->required();
  bounds->add_option("--at", at, "allocation: uniform, VCS or AECS (solved scores)")
      ->capture_default_str();

  std::string vectors;
  std::string design = "D";
  double scale = 1.0;
  int probe = 0;
  auto* oed = app.add_subcommand("oed", "optimal approximate design from regression vectors");
  oed->add_option("--vectors", vectors, "file with one regression vector per line")->required();
  oed->add_option("-c,--criterion", design, "D or A")->capture_default_str();
  oed->add_option("--scale", scale, "N / sigma^2")->capture_default_str();
  oed->add_option("--probe", probe, "uniqueness probe with this many random starts (0 = off)")
      ->capture_default_str();

  std::string matrix;
  int random = 0;
  double max_cond = 100.0;
  std::vector<double> aecs_scaling;
  auto* inv = app.add_subcommand("invariance", "coordinate-change checks");
  system.attach(inv);
  inv->add_option("-T,--horizon", horizon, "horizon T > 0")->capture_default_str();
  inv->add_option("--matrix", matrix, "file holding S, one row per line");
  inv->add_option("--random", random, "number of random S")->capture_default_str();
  inv->add_option("--max-cond", max_cond, "condition-number cap for random S")->capture_default_str();
  inv->add_option("--aecs-scaling", aecs_scaling, "s1,s2: AECS of A=0 under S=diag(s1,s2)")
      ->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (*score) return run_score(g, system, horizon, criterion);
    if (*sweep) return run_sweep(g, system, horizons, criteria);
    if (*bounds) return run_bounds(g, system, horizon, at);
    if (*oed) return run_oed(g, vectors, design, scale, probe);
    if (*inv) return run_invariance(g, system, horizon, matrix, random, max_cond, aecs_scaling);
  } catch (const ctscore::SolverStallError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNotConverged;
  } catch (const ctscore::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}
