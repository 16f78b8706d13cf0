#ifndef CTSCORE_GRAMIAN_HPP
#define CTSCORE_GRAMIAN_HPP

#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "ctscore/allocation.hpp"
#include "ctscore/expm.hpp"
#include "ctscore/linalg.hpp"

namespace ctscore {

/// State matrix of x' = A x together with one label per node.
class NetworkSystem {
 public:
  /// Labels default to "1", ..., "n".
  explicit NetworkSystem(MatrixXd a, std::vector<std::string> labels = {})
      : a_(std::move(a)), labels_(std::move(labels)) {
    require_square(a_, "NetworkSystem: A");
    require_finite(a_, "NetworkSystem: A");
    if (a_.rows() == 0) throw InputError("NetworkSystem: empty state matrix");
    if (labels_.empty()) {
      for (Index i = 0; i < a_.rows(); ++i) labels_.push_back(std::to_string(i + 1));
    }
    if (static_cast<Index>(labels_.size()) != a_.rows()) {
      throw DimensionError("NetworkSystem: expected " + std::to_string(a_.rows()) +
                           " labels, got " + std::to_string(labels_.size()));
    }
    std::unordered_set<std::string> seen;
    for (const auto& l : labels_) {
      if (!seen.insert(l).second) {
        throw InputError("NetworkSystem: duplicate label '" + l + "'");
      }
    }
  }

  Index size() const { return a_.rows(); }
  const MatrixXd& state_matrix() const { return a_; }
  const std::vector<std::string>& labels() const { return labels_; }

 private:
  MatrixXd a_;
  std::vector<std::string> labels_;
};

/// Positive, finite time horizon T.
class Horizon {
 public:
  explicit Horizon(double t) : t_(t) {
    if (!(std::isfinite(t) && t > 0.0)) {
      throw InputError("horizon must be positive and finite, got " + std::to_string(t));
    }
  }
  double value() const { return t_; }

 private:
  double t_;
};

enum class GramianMethod { kSpectral, kDoubling };

inline const char* to_string(GramianMethod m) {
  return m == GramianMethod::kSpectral ? "spectral" : "doubling";
}

enum class GramianPath { kAuto, kSpectral, kDoubling };

struct GramianOptions {
  GramianPath path = GramianPath::kAuto;
  // Eigenvector condition number above which the spectral path is refused.
  double defect_threshold = 1e8;
  // Recompute with the doubling path whenever the spectral path is used.
  bool cross_check = true;
  double cross_check_tol = 1e-6;
};

/// The per-node finite-time Gramians W_1(T), ..., W_n(T). Also used as a
/// generic list of symmetric terms of an affine matrix model.
class GramianBasis {
 public:
  GramianBasis(Horizon horizon, std::vector<MatrixXd> terms, GramianMethod method)
      : horizon_(horizon), terms_(std::move(terms)), method_(method) {
    if (terms_.empty()) throw InputError("GramianBasis: no terms");
    const Index d = terms_.front().rows();
    for (const auto& t : terms_) {
      require_square(t, "GramianBasis term");
      if (t.rows() != d) throw DimensionError("GramianBasis: terms differ in size");
      require_finite(t, "GramianBasis term");
    }
  }

  Horizon horizon() const { return horizon_; }
  GramianMethod method() const { return method_; }
  /// Number of terms (weights).
  Index size() const { return static_cast<Index>(terms_.size()); }
  /// Matrix dimension of each term.
  Index dim() const { return terms_.front().rows(); }
  const MatrixXd& operator[](Index i) const { return terms_[static_cast<std::size_t>(i)]; }
  std::span<const MatrixXd> terms() const { return terms_; }

 private:
  Horizon horizon_;
  std::vector<MatrixXd> terms_;
  GramianMethod method_;
};

/// phi(mu, T) = (exp(mu T) - 1) / mu, with phi(0, T) = T.
inline std::complex<double> phi(std::complex<double> mu, double t) {
  const std::complex<double> z = mu * t;
  if (std::abs(z) < 1e-4) {
    return t * (1.0 + z * (1.0 / 2.0 + z * (1.0 / 6.0 + z * (1.0 / 24.0))));
  }
  // exp(x + iy) - 1 without cancellation in the real part.
  const double x = z.real();
  const double y = z.imag();
  const double half_sin = std::sin(0.5 * y);
  const std::complex<double> em1(std::expm1(x) * std::cos(y) - 2.0 * half_sin * half_sin,
                                 std::exp(x) * std::sin(y));
  return em1 / mu;
}

/// Gramian over [0, 2T] from the Gramian over [0, T] and E_T = exp(A T):
/// W_{2T} = W_T + E_T W_T E_T^T.
inline MatrixXd doubling_step(const MatrixXd& w_t, const MatrixXd& e_t) {
  require_square(w_t, "doubling_step: W_T");
  require_square(e_t, "doubling_step: E_T");
  if (w_t.rows() != e_t.rows()) throw DimensionError("doubling_step: size mismatch");
  return w_t + e_t * w_t * e_t.transpose();
}

namespace detail {

/// Gramians of the rank-one input patterns b b^T (columns of `inputs`) by
/// the block-exponential formula on a short interval followed by doubling.
inline std::vector<MatrixXd> doubling_gramians(const MatrixXd& a, const MatrixXd& inputs,
                                               double horizon) {
  const Index n = a.rows();
  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  int steps = 0;
  while (norm1 * std::ldexp(horizon, -steps) > 0.125) ++steps;
  const double h = std::ldexp(horizon, -steps);

  std::vector<MatrixXd> out;
  out.reserve(static_cast<std::size_t>(inputs.cols()));
  MatrixXd block = MatrixXd::Zero(2 * n, 2 * n);
  block.topLeftCorner(n, n) = -a;
  block.bottomRightCorner(n, n) = a.transpose();
  for (Index i = 0; i < inputs.cols(); ++i) {
    block.topRightCorner(n, n) = inputs.col(i) * inputs.col(i).transpose();
    const MatrixXd f = matrix_exponential(block, h);
    out.push_back(f.bottomRightCorner(n, n).transpose() * f.topRightCorner(n, n));
  }
  MatrixXd e = matrix_exponential(a, h);
  for (int k = 0; k < steps; ++k) {
    for (auto& w : out) w = doubling_step(w, e);
    e = e * e;
  }
  for (auto& w : out) w = symmetrize(w);
  return out;
}

/// Gramians from an eigendecomposition A = V diag(lambda) V^{-1}. Returns an
/// empty vector when A is (numerically) defective or the imaginary residue
/// is not negligible.
inline std::vector<MatrixXd> spectral_gramians(const MatrixXd& a, const MatrixXd& inputs,
                                               double horizon, double defect_threshold) {
  const Index n = a.rows();
  Eigen::EigenSolver<MatrixXd> es(a);
  if (es.info() != Eigen::Success) return {};
  const Eigen::MatrixXcd v = es.eigenvectors();
  const Eigen::VectorXcd lambda = es.eigenvalues();

  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(v);
  const auto& sv = svd.singularValues();
  if (!(sv(n - 1) > 0.0) || sv(0) / sv(n - 1) > defect_threshold) return {};

  const Eigen::MatrixXcd v_inv = v.partialPivLu().inverse();
  Eigen::MatrixXcd phi_factors(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index k = 0; k < n; ++k) {
      phi_factors(j, k) = phi(lambda(j) + std::conj(lambda(k)), horizon);
    }
  }
  if (!phi_factors.allFinite()) return {};

  std::vector<MatrixXd> out;
  out.reserve(static_cast<std::size_t>(inputs.cols()));
  for (Index i = 0; i < inputs.cols(); ++i) {
    const Eigen::VectorXcd u = v_inv * inputs.col(i).cast<std::complex<double>>();
    const Eigen::MatrixXcd g = (u * u.adjoint()).cwiseProduct(phi_factors);
    const Eigen::MatrixXcd w = v * g * v.adjoint();
    if (w.imag().norm() > 1e-9 * w.real().norm()) return {};
    out.push_back(symmetrize(w.real()));
  }
  return out;
}

}  // namespace detail

/// Finite-time Gramians int_0^T exp(At) b_i b_i^T exp(A^T t) dt for every
/// column b_i of `inputs`. The state-coordinate-change code uses this with
/// inputs = S^{-1}; the node basis uses the identity.
inline GramianBasis input_gramians(const MatrixXd& a, const MatrixXd& inputs, Horizon horizon,
                                   const GramianOptions& opts = {}) {
  require_square(a, "input_gramians: A");
  require_finite(a, "input_gramians: A");
  require_finite(inputs, "input_gramians: inputs");
  if (inputs.rows() != a.rows()) throw DimensionError("input_gramians: inputs row count");
  const double t = horizon.value();

  if (opts.path != GramianPath::kDoubling) {
    auto spectral = detail::spectral_gramians(a, inputs, t, opts.defect_threshold);
    if (!spectral.empty()) {
      if (opts.cross_check) {
        const auto doubled = detail::doubling_gramians(a, inputs, t);
        for (std::size_t i = 0; i < spectral.size(); ++i) {
          const double diff = relative_difference(spectral[i], doubled[i]);
          if (!(diff <= opts.cross_check_tol)) {
            throw IntegrationError("Gramian paths disagree for input " + std::to_string(i + 1) +
                                   ": relative difference " + std::to_string(diff));
          }
        }
      }
      return GramianBasis(horizon, std::move(spectral), GramianMethod::kSpectral);
    }
    if (opts.path == GramianPath::kSpectral) {
      throw IntegrationError("spectral Gramian path refused: A is numerically defective");
    }
  }
  auto doubled = detail::doubling_gramians(a, inputs, t);
  for (const auto& w : doubled) {
    if (!w.allFinite()) throw IntegrationError("Gramian overflow on the doubling path");
  }
  return GramianBasis(horizon, std::move(doubled), GramianMethod::kDoubling);
}

/// Per-node Gramians W_i(T) = int_0^T exp(At) e_i e_i^T exp(A^T t) dt.
inline GramianBasis gramian_basis(const NetworkSystem& system, Horizon horizon,
                                  const GramianOptions& opts = {}) {
  const Index n = system.size();
  return input_gramians(system.state_matrix(), MatrixXd::Identity(n, n), horizon, opts);
}

/// sum_i p_i W_i, symmetrized.
inline MatrixXd assemble(std::span<const MatrixXd> terms, const VectorXd& weights) {
  if (static_cast<Index>(terms.size()) != weights.size()) {
    throw DimensionError("assemble: " + std::to_string(weights.size()) + " weights for " +
                         std::to_string(terms.size()) + " terms");
  }
  MatrixXd sum = MatrixXd::Zero(terms.front().rows(), terms.front().cols());
  for (std::size_t i = 0; i < terms.size(); ++i) {
    sum.noalias() += weights(static_cast<Index>(i)) * terms[i];
  }
  return symmetrize(sum);
}

/// W(p, T) = sum_i p_i W_i(T), symmetrized.
inline MatrixXd assemble_gramian(const GramianBasis& basis, const Allocation& p) {
  return assemble(basis.terms(), p.values());
}

}  // namespace ctscore

#endif  // CTSCORE_GRAMIAN_HPP
