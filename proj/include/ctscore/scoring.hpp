#ifndef CTSCORE_SCORING_HPP
#define CTSCORE_SCORING_HPP

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "ctscore/gramian.hpp"
#include "ctscore/linalg.hpp"
#include "ctscore/simplex.hpp"

namespace ctscore {

/// VCS minimizes -log det W(p,T); AECS minimizes tr(W(p,T)^{-1}).
enum class Criterion { kVcs, kAecs };

inline const char* to_string(Criterion c) { return c == Criterion::kVcs ? "VCS" : "AECS"; }

inline Criterion parse_criterion(const std::string& name) {
  if (name == "VCS" || name == "vcs") return Criterion::kVcs;
  if (name == "AECS" || name == "aecs") return Criterion::kAecs;
  throw UsageError("unknown criterion '" + name + "' (expected VCS or AECS)");
}

// Objectives and gradients of an affine model M(p) = sum_i p_i M_i. They are
// shared by the controllability scores and by anything else that can be
// phrased as such a model.
namespace affine {

inline std::optional<double> log_det_objective(std::span<const MatrixXd> terms,
                                               const VectorXd& p) {
  const auto llt = try_cholesky(assemble(terms, p));
  if (!llt) return std::nullopt;
  return -log_det_from_cholesky(*llt);
}

inline std::optional<double> trace_inverse_objective(std::span<const MatrixXd> terms,
                                                     const VectorXd& p) {
  const MatrixXd m = assemble(terms, p);
  const auto llt = try_cholesky(m);
  if (!llt) return std::nullopt;
  const double value = llt->solve(MatrixXd::Identity(m.rows(), m.cols())).trace();
  if (!std::isfinite(value)) return std::nullopt;
  return value;
}

/// Component i: -tr(M^{-1} M_i).
inline std::optional<VectorXd> log_det_gradient(std::span<const MatrixXd> terms,
                                                const VectorXd& p) {
  const MatrixXd m = assemble(terms, p);
  const auto llt = try_cholesky(m);
  if (!llt) return std::nullopt;
  const MatrixXd inv = llt->solve(MatrixXd::Identity(m.rows(), m.cols()));
  VectorXd g(static_cast<Index>(terms.size()));
  for (std::size_t i = 0; i < terms.size(); ++i) {
    g(static_cast<Index>(i)) = -inv.cwiseProduct(terms[i]).sum();
  }
  return g;
}

/// Component i: -tr(M^{-1} M_i M^{-1}).
inline std::optional<VectorXd> trace_inverse_gradient(std::span<const MatrixXd> terms,
                                                      const VectorXd& p) {
  const MatrixXd m = assemble(terms, p);
  const auto llt = try_cholesky(m);
  if (!llt) return std::nullopt;
  const MatrixXd inv = llt->solve(MatrixXd::Identity(m.rows(), m.cols()));
  const MatrixXd inv2 = inv * inv;
  VectorXd g(static_cast<Index>(terms.size()));
  for (std::size_t i = 0; i < terms.size(); ++i) {
    g(static_cast<Index>(i)) = -inv2.cwiseProduct(terms[i]).sum();
  }
  return g;
}

/// Closures for the simplex solver: the objective returns +infinity where
/// M(p) is not positive definite.
struct Problem {
  SimplexObjective objective;
  SimplexGradient gradient;
};

inline Problem make_problem(std::span<const MatrixXd> terms, bool log_det) {
  Problem out;
  out.objective = [terms, log_det](const VectorXd& p) {
    const auto v = log_det ? log_det_objective(terms, p) : trace_inverse_objective(terms, p);
    return v ? *v : std::numeric_limits<double>::infinity();
  };
  out.gradient = [terms, log_det](const VectorXd& p) {
    auto g = log_det ? log_det_gradient(terms, p) : trace_inverse_gradient(terms, p);
    if (!g) throw InfeasiblePointError("gradient requested at an infeasible point");
    return *g;
  };
  return out;
}

}  // namespace affine

namespace detail {

inline void require_weights(const GramianBasis& basis, const Allocation& p) {
  if (p.size() != basis.size()) {
    throw DimensionError("allocation has " + std::to_string(p.size()) + " entries, basis has " +
                         std::to_string(basis.size()));
  }
}

template <typename T>
T value_or_infeasible(std::optional<T> v, const char* what) {
  if (!v) throw InfeasiblePointError(std::string(what) + ": W(p,T) is not positive definite");
  return *std::move(v);
}

}  // namespace detail

/// True iff W(p,T) admits a Cholesky factorization (p lies in X_T).
inline bool feasibility(const GramianBasis& basis, const Allocation& p) {
  detail::require_weights(basis, p);
  return try_cholesky(assemble_gramian(basis, p)).has_value();
}

/// f_T(p) = -log det W(p,T).
inline double vcs_objective(const GramianBasis& basis, const Allocation& p) {
  detail::require_weights(basis, p);
  return detail::value_or_infeasible(affine::log_det_objective(basis.terms(), p.values()),
                                     "vcs_objective");
}

/// g_T(p) = tr(W(p,T)^{-1}).
inline double aecs_objective(const GramianBasis& basis, const Allocation& p) {
  detail::require_weights(basis, p);
  return detail::value_or_infeasible(affine::trace_inverse_objective(basis.terms(), p.values()),
                                     "aecs_objective");
}

inline VectorXd vcs_gradient(const GramianBasis& basis, const Allocation& p) {
  detail::require_weights(basis, p);
  return detail::value_or_infeasible(affine::log_det_gradient(basis.terms(), p.values()),
                                     "vcs_gradient");
}

inline VectorXd aecs_gradient(const GramianBasis& basis, const Allocation& p) {
  detail::require_weights(basis, p);
  return detail::value_or_infeasible(affine::trace_inverse_gradient(basis.terms(), p.values()),
                                     "aecs_gradient");
}

inline double objective(const GramianBasis& basis, Criterion c, const Allocation& p) {
  return c == Criterion::kVcs ? vcs_objective(basis, p) : aecs_objective(basis, p);
}

struct ScoreOptions {
  SolveOptions solve;
  GramianOptions gramian;
  int random_starts = 5;
  // A warning is attached to the result above this condition number of W.
  double condition_warning = 1e12;
};

struct ScoreResult {
  Criterion criterion;
  Horizon horizon;
  Allocation scores;
  double objective_value;
  SolveReport report;
  double multistart_spread;
  GramianMethod method;
  double condition_number;
  std::vector<std::string> warnings;
};

/// Minimizes the criterion over the simplex on a precomputed basis.
inline ScoreResult compute_score(const GramianBasis& basis, Criterion criterion,
                                 const ScoreOptions& opts = {}) {
  if (opts.random_starts < 0) throw InputError("random_starts must be non-negative");
  const auto problem = affine::make_problem(basis.terms(), criterion == Criterion::kVcs);
  const auto runs = multistart_minimize(problem.objective, problem.gradient, basis.size(),
                                        opts.random_starts, opts.solve);
  const SolveReport& best = runs.runs[runs.best];

  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(assemble_gramian(basis, best.optimizer),
                                              Eigen::EigenvaluesOnly);
  const double condition = eig.eigenvalues().maxCoeff() / eig.eigenvalues().minCoeff();

  std::vector<std::string> warnings;
  if (!(condition <= opts.condition_warning)) {
    std::ostringstream msg;
    msg << "W(p,T) condition number " << condition << " at the optimizer";
    warnings.push_back(msg.str());
  }
  for (const auto& run : runs.runs) {
    if (!run.converged) {
      warnings.push_back("a solver run stopped at max_iters with residual " +
                         std::to_string(run.residual));
      break;
    }
  }
  return ScoreResult{criterion,       basis.horizon(), best.optimizer, best.objective_value,
                     best,            runs.spread,     basis.method(), condition,
                     std::move(warnings)};
}

/// Builds the Gramian basis and computes the VCS or AECS of the system.
inline ScoreResult compute_score(const NetworkSystem& system, Horizon horizon,
                                 Criterion criterion, const ScoreOptions& opts = {}) {
  return compute_score(gramian_basis(system, horizon, opts.gramian), criterion, opts);
}

}  // namespace ctscore

#endif  // CTSCORE_SCORING_HPP
