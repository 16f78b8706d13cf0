#ifndef CTSCORE_STRUCTURE_HPP
#define CTSCORE_STRUCTURE_HPP

#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "ctscore/gramian.hpp"
#include "ctscore/scoring.hpp"

namespace ctscore {

// ---------------------------------------------------------------------------
// Source-like nodes
// ---------------------------------------------------------------------------

/// Node whose row of A has no off-diagonal entries, i.e. e_i^T A = ell e_i^T.
struct SourceNode {
  Index index;  // 0-based
  double ell;   // A_ii
};

inline constexpr double kSourceTolerance = 1e-12;

/// Every i with max_{j != i} |A_ij| <= tol, paired with ell = A_ii.
inline std::vector<SourceNode> detect_source_nodes(const NetworkSystem& system,
                                                   double tol = kSourceTolerance) {
  if (!(tol >= 0.0)) throw InputError("detect_source_nodes: tolerance must be non-negative");
  const MatrixXd& a = system.state_matrix();
  std::vector<SourceNode> out;
  for (Index i = 0; i < a.rows(); ++i) {
    double off = 0.0;
    for (Index j = 0; j < a.cols(); ++j) {
      if (j != i) off = std::max(off, std::abs(a(i, j)));
    }
    if (off <= tol) out.push_back({i, a(i, i)});
  }
  return out;
}

enum class Regime { kStable, kMarginal, kUnstable };

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::kStable:
      return "stable";
    case Regime::kMarginal:
      return "marginal";
    case Regime::kUnstable:
      return "unstable";
  }
  return "?";
}

inline Regime classify_regime(double ell) {
  if (ell == 0.0) return Regime::kMarginal;
  return ell < 0.0 ? Regime::kStable : Regime::kUnstable;
}

/// omega(ell, T) = int_0^T exp(2 ell t) dt: T when ell = 0, otherwise
/// (exp(2 ell T) - 1) / (2 ell). Overflows to +infinity for large ell T.
inline double omega(double ell, Horizon horizon) {
  const double t = horizon.value();
  const double x = 2.0 * ell * t;
  if (std::abs(x) < 1e-8) return t * (1.0 + x * (0.5 + x / 6.0));
  return std::expm1(x) / (2.0 * ell);
}

/// 1 / (p_i omega_i(T)), a lower bound on g_T(p) at a source node.
inline double aecs_lower_bound(double p_i, double ell, Horizon horizon) {
  if (!(p_i > 0.0)) return std::numeric_limits<double>::infinity();
  return 1.0 / (p_i * omega(ell, horizon));
}

/// T -> infinity limit of aecs_lower_bound: -2 ell / p_i for ell < 0, zero
/// otherwise.
inline double aecs_lower_bound_limit(double p_i, double ell) {
  if (!(p_i > 0.0)) return std::numeric_limits<double>::infinity();
  return ell < 0.0 ? -2.0 * ell / p_i : 0.0;
}

namespace detail {

inline double source_ell(const NetworkSystem& system, Index i) {
  if (i < 0 || i >= system.size()) throw DimensionError("node index out of range");
  for (const auto& s : detect_source_nodes(system)) {
    if (s.index == i) return s.ell;
  }
  throw PreconditionError("node " + system.labels()[static_cast<std::size_t>(i)] +
                          " is not source-like: its row of A has off-diagonal entries");
}

}  // namespace detail

/// -log(p_i omega_i(T)) - log det W(p,T) with row and column i removed;
/// a lower bound on f_T(p) when node i is source-like.
inline double vcs_lower_bound(const NetworkSystem& system, const GramianBasis& basis,
                              const Allocation& p, Index i) {
  const double ell = detail::source_ell(system, i);
  const MatrixXd w = assemble_gramian(basis, p);
  double rest = 0.0;
  if (w.rows() > 1) {
    const auto llt = try_cholesky(drop_index(w, i));
    if (!llt) throw InfeasiblePointError("vcs_lower_bound: W(p,T) is not positive definite");
    rest = log_det_from_cholesky(*llt);
  }
  return -std::log(p[i] * omega(ell, basis.horizon())) - rest;
}

struct SourceNodeEntry {
  Index index;
  double ell;
  Regime regime;
  double omega;
  double aecs_bound;        // 1 / (p_i omega_i(T)) at the supplied allocation
  double aecs_bound_limit;  // T -> infinity limit of the same bound
};

struct SourceNodeReport {
  Horizon horizon;
  std::vector<SourceNodeEntry> entries;
  std::vector<std::string> warnings;
};

/// Source-node bounds of a system at one horizon, evaluated at allocation p.
inline SourceNodeReport source_node_report(const NetworkSystem& system, Horizon horizon,
                                           const Allocation& p, double tol = kSourceTolerance) {
  if (p.size() != system.size()) throw DimensionError("source_node_report: allocation size");
  SourceNodeReport report{horizon, {}, {}};
  for (const auto& s : detect_source_nodes(system, tol)) {
    const double w = omega(s.ell, horizon);
    if (std::isinf(w)) {
      report.warnings.push_back("omega overflows for node " +
                                system.labels()[static_cast<std::size_t>(s.index)]);
    }
    report.entries.push_back({s.index, s.ell, classify_regime(s.ell), w,
                              aecs_lower_bound(p[s.index], s.ell, horizon),
                              aecs_lower_bound_limit(p[s.index], s.ell)});
  }
  return report;
}

// ---------------------------------------------------------------------------
// State-coordinate changes x = S x~
// ---------------------------------------------------------------------------

class CoordinateChange {
 public:
  static constexpr double kConditionWarning = 1e6;

  explicit CoordinateChange(MatrixXd s) : s_(std::move(s)) {
    require_square(s_, "CoordinateChange: S");
    require_finite(s_, "CoordinateChange: S");
    const Index n = s_.rows();
    Eigen::JacobiSVD<MatrixXd> svd(s_);
    const auto& sv = svd.singularValues();
    double log_abs_det = 0.0;
    for (Index i = 0; i < n; ++i) log_abs_det += std::log(sv(i));
    // |det S| > 1e-12 ||S||^n
    if (!(sv(n - 1) > 0.0) ||
        !(log_abs_det > std::log(1e-12) + static_cast<double>(n) * std::log(sv(0)))) {
      throw InputError("CoordinateChange: S is singular");
    }
    log_abs_det_ = log_abs_det;
    condition_ = sv(0) / sv(n - 1);
    s_inv_ = s_.fullPivLu().inverse();
    if (condition_ > kConditionWarning) {
      std::ostringstream msg;
      msg << "coordinate change has condition number " << condition_;
      warnings_.push_back(msg.str());
    }
  }

  const MatrixXd& matrix() const { return s_; }
  const MatrixXd& inverse() const { return s_inv_; }
  double log_abs_det() const { return log_abs_det_; }
  double condition_number() const { return condition_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  /// S^{-1} W S^{-T}.
  MatrixXd congruence(const MatrixXd& w) const {
    if (w.rows() != s_.rows() || w.cols() != s_.cols()) {
      throw DimensionError("congruence: size mismatch");
    }
    return symmetrize(s_inv_ * w * s_inv_.transpose());
  }

  /// A~ = S^{-1} A S, labels kept.
  NetworkSystem transform(const NetworkSystem& system) const {
    if (system.size() != s_.rows()) throw DimensionError("coordinate change: size mismatch");
    return NetworkSystem(s_inv_ * system.state_matrix() * s_, system.labels());
  }

  /// Basis of the transformed system built from scratch: the state matrix
  /// is A~ and the virtual input of node i enters along S^{-1} e_i.
  GramianBasis transformed_basis(const NetworkSystem& system, Horizon horizon,
                                 const GramianOptions& opts = {}) const {
    return input_gramians(transform(system).state_matrix(), s_inv_, horizon, opts);
  }

 private:
  MatrixXd s_;
  MatrixXd s_inv_;
  double log_abs_det_ = 0.0;
  double condition_ = 1.0;
  std::vector<std::string> warnings_;
};

struct TransformedSystem {
  NetworkSystem system;
  CoordinateChange change;
};

inline TransformedSystem apply_coordinate_change(const NetworkSystem& system, const MatrixXd& s) {
  CoordinateChange change(s);
  NetworkSystem transformed = change.transform(system);
  return TransformedSystem{std::move(transformed), std::move(change)};
}

struct InvarianceReport {
  Allocation original;
  Allocation transformed;
  double spread;           // infinity distance between the two VCS optimizers
  double expected_offset;  // 2 log|det S|
  double max_offset_error; // max over sample points of |f~ - f - 2 log|det S||
  int sample_points;
};

/// Solves VCS for the system and for its transform under S, and checks that
/// f~_T - f_T is the constant 2 log|det S| at random feasible points.
inline InvarianceReport check_vcs_invariance(const NetworkSystem& system, Horizon horizon,
                                             const MatrixXd& s, const ScoreOptions& opts = {},
                                             int sample_points = 10) {
  const CoordinateChange change(s);
  const GramianBasis basis = gramian_basis(system, horizon, opts.gramian);
  const GramianBasis tbasis = change.transformed_basis(system, horizon, opts.gramian);
  const ScoreResult original = compute_score(basis, Criterion::kVcs, opts);
  const ScoreResult transformed = compute_score(tbasis, Criterion::kVcs, opts);

  const double expected = 2.0 * change.log_abs_det();
  std::mt19937_64 rng(opts.solve.seed ^ 0x5eedULL);
  double worst = 0.0;
  for (int k = 0; k < sample_points; ++k) {
    const Allocation p = random_simplex_point(system.size(), rng);
    if (!feasibility(basis, p)) continue;
    const double offset = vcs_objective(tbasis, p) - vcs_objective(basis, p);
    worst = std::max(worst, std::abs(offset - expected));
  }
  const double spread =
      (original.scores.values() - transformed.scores.values()).cwiseAbs().maxCoeff();
  return InvarianceReport{original.scores, transformed.scores, spread, expected, worst,
                          sample_points};
}

struct AecsScalingReport {
  Allocation unscaled;
  Allocation scaled;
  VectorXd unscaled_closed_form;  // (1/2, 1/2)
  VectorXd scaled_closed_form;    // (s1, s2) / (s1 + s2)
  double unscaled_error;
  double scaled_error;
  bool matches;  // both errors <= 1e-8
};

/// AECS of the two-node system A = 0 before and after S = diag(s1, s2),
/// computed by the solver and compared with the closed forms.
inline AecsScalingReport check_aecs_coordinate_dependence(double s1, double s2, Horizon horizon,
                                                          const ScoreOptions& opts = {}) {
  if (!(s1 > 0.0 && s2 > 0.0 && std::isfinite(s1) && std::isfinite(s2))) {
    throw InputError("check_aecs_coordinate_dependence: scalings must be positive");
  }
  const NetworkSystem system(MatrixXd::Zero(2, 2));
  const CoordinateChange change(Eigen::Vector2d(s1, s2).asDiagonal().toDenseMatrix());
  const ScoreResult unscaled =
      compute_score(gramian_basis(system, horizon, opts.gramian), Criterion::kAecs, opts);
  const ScoreResult scaled = compute_score(change.transformed_basis(system, horizon, opts.gramian),
                                           Criterion::kAecs, opts);
  const VectorXd half = Eigen::Vector2d(0.5, 0.5);
  const VectorXd closed = Eigen::Vector2d(s1, s2) / (s1 + s2);
  const double e0 = (unscaled.scores.values() - half).cwiseAbs().maxCoeff();
  const double e1 = (scaled.scores.values() - closed).cwiseAbs().maxCoeff();
  return AecsScalingReport{unscaled.scores, scaled.scores, half, closed, e0, e1,
                           e0 <= 1e-8 && e1 <= 1e-8};
}

// ---------------------------------------------------------------------------
// Matrix inequalities behind the bounds
// ---------------------------------------------------------------------------

namespace detail {

inline void require_spd(const MatrixXd& w, Index i, const char* what) {
  require_square(w, what);
  if (i < 0 || i >= w.rows()) throw DimensionError(std::string(what) + ": index out of range");
  if (!try_cholesky(w)) {
    throw PreconditionError(std::string(what) + ": matrix is not positive definite");
  }
}

}  // namespace detail

/// det W <= W_ii det(W without row/column i), with slack >= -1e-10 |det W|.
inline bool check_det_bound(const MatrixXd& w, Index i) {
  detail::require_spd(w, i, "check_det_bound");
  const double det = w.determinant();
  const double minor = w.rows() > 1 ? drop_index(w, i).determinant() : 1.0;
  return w(i, i) * minor - det >= -1e-10 * std::abs(det);
}

/// (W^{-1})_ii >= 1 / W_ii, with slack >= -1e-12.
inline bool check_inv_diag_bound(const MatrixXd& w, Index i) {
  detail::require_spd(w, i, "check_inv_diag_bound");
  const VectorXd col = w.fullPivLu().solve(VectorXd::Unit(w.rows(), i));
  return col(i) - 1.0 / w(i, i) >= -1e-12;
}

}  // namespace ctscore

#endif  // CTSCORE_STRUCTURE_HPP
