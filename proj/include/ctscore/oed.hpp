#ifndef CTSCORE_OED_HPP
#define CTSCORE_OED_HPP

#include <cmath>
#include <istream>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/QR>

#include "ctscore/linalg.hpp"
#include "ctscore/simplex.hpp"

namespace ctscore {

/// Candidate regression vectors f(x_1), ..., f(x_m) of a linear model and
/// the scale N / sigma^2 of the information matrix.
class DesignProblem {
 public:
  explicit DesignProblem(std::vector<VectorXd> vectors, double scale = 1.0)
      : vectors_(std::move(vectors)), scale_(scale) {
    if (vectors_.empty()) throw InputError("DesignProblem: no regression vectors");
    const Index d = vectors_.front().size();
    if (d == 0) throw InputError("DesignProblem: empty regression vector");
    for (const auto& f : vectors_) {
      if (f.size() != d) throw DimensionError("DesignProblem: regression vectors differ in length");
      if (!f.allFinite()) throw InputError("DesignProblem: non-finite regression vector");
    }
    if (!(std::isfinite(scale_) && scale_ > 0.0)) {
      throw InputError("DesignProblem: scale must be positive");
    }
    MatrixXd stacked(count(), d);
    for (Index i = 0; i < count(); ++i) stacked.row(i) = vectors_[static_cast<std::size_t>(i)];
    if (stacked.colPivHouseholderQr().rank() < d) {
      throw SingularDesignError("DesignProblem: regression vectors do not span R^" +
                                std::to_string(d));
    }
  }

  Index dim() const { return vectors_.front().size(); }
  Index count() const { return static_cast<Index>(vectors_.size()); }
  double scale() const { return scale_; }
  const std::vector<VectorXd>& vectors() const { return vectors_; }
  const VectorXd& vector(Index i) const { return vectors_[static_cast<std::size_t>(i)]; }

  /// M_i = scale * f_i f_i^T.
  std::vector<MatrixXd> elementary_matrices() const {
    std::vector<MatrixXd> out;
    for (const auto& f : vectors_) out.push_back(scale_ * f * f.transpose());
    return out;
  }

 private:
  std::vector<VectorXd> vectors_;
  double scale_;
};

enum class DesignCriterion { kD, kA };

inline const char* to_string(DesignCriterion c) { return c == DesignCriterion::kD ? "D" : "A"; }

inline DesignCriterion parse_design_criterion(const std::string& name) {
  if (name == "D" || name == "d") return DesignCriterion::kD;
  if (name == "A" || name == "a") return DesignCriterion::kA;
  throw UsageError("unknown design criterion '" + name + "' (expected D or A)");
}

struct DesignResult {
  DesignCriterion criterion;
  Allocation weights;
  double objective_value;
  // Equivalence-theorem gap of the criterion; zero exactly at an optimum.
  double kw_gap;
  SolveReport report;
};

namespace detail {

inline void require_design_weights(const DesignProblem& problem, const VectorXd& w) {
  if (w.size() != problem.count()) {
    throw DimensionError("design weights have " + std::to_string(w.size()) + " entries, problem has " +
                         std::to_string(problem.count()) + " points");
  }
}

inline MatrixXd information_matrix(const DesignProblem& problem, const VectorXd& w) {
  require_design_weights(problem, w);
  const Index d = problem.dim();
  MatrixXd m = MatrixXd::Zero(d, d);
  for (Index i = 0; i < problem.count(); ++i) {
    if (w(i) != 0.0) m.selfadjointView<Eigen::Lower>().rankUpdate(problem.vector(i), w(i));
  }
  m.triangularView<Eigen::StrictlyUpper>() = m.transpose().triangularView<Eigen::StrictlyUpper>();
  return problem.scale() * m;
}

// M(w)^{-1} F^T, one column per design point. nullopt when M is singular.
inline std::optional<std::pair<Eigen::LLT<MatrixXd>, MatrixXd>> solve_points(
    const DesignProblem& problem, const VectorXd& w) {
  auto llt = try_cholesky(information_matrix(problem, w));
  if (!llt) return std::nullopt;
  MatrixXd f(problem.dim(), problem.count());
  for (Index i = 0; i < problem.count(); ++i) f.col(i) = problem.vector(i);
  MatrixXd solved = llt->solve(f);
  return std::make_pair(std::move(*llt), std::move(solved));
}

inline double design_objective(const DesignProblem& problem, DesignCriterion c,
                               const VectorXd& w) {
  const auto llt = try_cholesky(information_matrix(problem, w));
  if (!llt) return std::numeric_limits<double>::infinity();
  if (c == DesignCriterion::kD) return -log_det_from_cholesky(*llt);
  const Index d = problem.dim();
  return llt->solve(MatrixXd::Identity(d, d)).trace();
}

// D: -scale f_i^T M^{-1} f_i.  A: -scale ||M^{-1} f_i||^2.
inline VectorXd design_gradient(const DesignProblem& problem, DesignCriterion c,
                                const VectorXd& w) {
  const auto solved = solve_points(problem, w);
  if (!solved) throw InfeasiblePointError("design gradient: M(w) is singular");
  const MatrixXd& x = solved->second;
  VectorXd g(problem.count());
  for (Index i = 0; i < problem.count(); ++i) {
    g(i) = c == DesignCriterion::kD ? -problem.scale() * problem.vector(i).dot(x.col(i))
                                    : -problem.scale() * x.col(i).squaredNorm();
  }
  return g;
}

}  // namespace detail

/// M(w) = scale * sum_i w_i f_i f_i^T.
inline MatrixXd information_matrix(const DesignProblem& problem, const Allocation& w) {
  return detail::information_matrix(problem, w.values());
}

/// alpha(w) = -log det M(w) for D, beta(w) = tr(M(w)^{-1}) for A.
inline double design_objective(const DesignProblem& problem, DesignCriterion c,
                               const Allocation& w) {
  detail::require_design_weights(problem, w.values());
  const double v = detail::design_objective(problem, c, w.values());
  if (!std::isfinite(v)) throw InfeasiblePointError("design_objective: M(w) is singular");
  return v;
}

inline VectorXd design_gradient(const DesignProblem& problem, DesignCriterion c,
                                const Allocation& w) {
  return detail::design_gradient(problem, c, w.values());
}

/// max_i scale f_i^T M(w)^{-1} f_i - d. Non-negative, zero iff w is D-optimal.
inline double kw_gap(const DesignProblem& problem, const Allocation& w) {
  const auto solved = detail::solve_points(problem, w.values());
  if (!solved) throw InfeasiblePointError("kw_gap: M(w) is singular");
  double worst = -std::numeric_limits<double>::infinity();
  for (Index i = 0; i < problem.count(); ++i) {
    worst = std::max(worst, problem.scale() * problem.vector(i).dot(solved->second.col(i)));
  }
  return worst - static_cast<double>(problem.dim());
}

/// max_i scale ||M(w)^{-1} f_i||^2 - tr(M(w)^{-1}). Zero iff w is A-optimal.
inline double a_optimality_gap(const DesignProblem& problem, const Allocation& w) {
  const auto solved = detail::solve_points(problem, w.values());
  if (!solved) throw InfeasiblePointError("a_optimality_gap: M(w) is singular");
  const Index d = problem.dim();
  const double trace = solved->first.solve(MatrixXd::Identity(d, d)).trace();
  double worst = -std::numeric_limits<double>::infinity();
  for (Index i = 0; i < problem.count(); ++i) {
    worst = std::max(worst, problem.scale() * solved->second.col(i).squaredNorm());
  }
  return worst - trace;
}

/// Minimizes the D- or A-criterion over the simplex, starting at `init`
/// (uniform weights when omitted).
inline DesignResult solve_design(const DesignProblem& problem, DesignCriterion criterion,
                                 const SolveOptions& opts = {},
                                 const std::optional<Allocation>& init = std::nullopt) {
  const Allocation start = init ? *init : Allocation::uniform(problem.count());
  if (start.size() != problem.count()) throw DimensionError("solve_design: initial weights");
  auto report = projected_gradient(
      [&](const VectorXd& w) { return detail::design_objective(problem, criterion, w); },
      [&](const VectorXd& w) { return detail::design_gradient(problem, criterion, w); }, start,
      opts);
  const double gap = criterion == DesignCriterion::kD ? kw_gap(problem, report.optimizer)
                                                      : a_optimality_gap(problem, report.optimizer);
  return DesignResult{criterion, report.optimizer, report.objective_value, gap, std::move(report)};
}

struct ProbeResult {
  // Max pairwise infinity distance among optimizers whose objective is
  // within `objective_tol` of the best one.
  double spread;
  double best_objective;
  std::vector<Allocation> optimizers;
  std::vector<double> objectives;
};

/// Solves from `starts` seeded random points. A large spread with equal
/// objective values certifies that the optimal design is not unique.
inline ProbeResult uniqueness_probe(const DesignProblem& problem, DesignCriterion criterion,
                                    const SolveOptions& opts = {}, int starts = 10,
                                    double objective_tol = 1e-9) {
  if (starts <= 0) throw InputError("uniqueness_probe: starts must be positive");
  std::mt19937_64 rng(opts.seed);
  ProbeResult out{0.0, std::numeric_limits<double>::infinity(), {}, {}};
  const VectorXd uniform = Allocation::uniform(problem.count()).values();
  for (int s = 0; s < starts; ++s) {
    VectorXd start = random_simplex_point(problem.count(), rng).values();
    for (int k = 0; k < 60 && !std::isfinite(detail::design_objective(problem, criterion, start));
         ++k) {
      start = 0.5 * (start + uniform);
    }
    auto result = solve_design(problem, criterion, opts, project_simplex(start));
    out.best_objective = std::min(out.best_objective, result.objective_value);
    out.objectives.push_back(result.objective_value);
    out.optimizers.push_back(result.weights);
  }
  std::vector<VectorXd> near_best;
  for (std::size_t i = 0; i < out.optimizers.size(); ++i) {
    if (out.objectives[i] - out.best_objective <= objective_tol) {
      near_best.push_back(out.optimizers[i].values());
    }
  }
  out.spread = max_pairwise_distance(near_best);
  return out;
}

/// Reads one regression vector per line (whitespace separated numbers);
/// `#` starts a comment, blank lines are skipped.
inline std::vector<VectorXd> parse_design_vectors(std::istream& in) {
  std::vector<VectorXd> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::vector<double> values;
    std::string token;
    while (fields >> token) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(token, &used));
        if (used != token.size()) throw std::invalid_argument(token);
      } catch (const std::exception&) {
        throw ParseError("not a number: '" + token + "'", line_no);
      }
    }
    if (values.empty()) continue;
    if (!out.empty() && static_cast<Index>(values.size()) != out.front().size()) {
      throw ParseError("expected " + std::to_string(out.front().size()) + " values, got " +
                           std::to_string(values.size()),
                       line_no);
    }
    out.push_back(Eigen::Map<const VectorXd>(values.data(), static_cast<Index>(values.size())));
  }
  return out;
}

}  // namespace ctscore

#endif  // CTSCORE_OED_HPP
