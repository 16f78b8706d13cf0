#ifndef CTSCORE_LINALG_HPP
#define CTSCORE_LINALG_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "ctscore/errors.hpp"

namespace ctscore {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

inline void require_square(const MatrixXd& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw DimensionError(std::string(what) + " must be square, got " +
                         std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()));
  }
}

inline void require_finite(const MatrixXd& m, const char* what) {
  if (!m.allFinite()) {
    throw InputError(std::string(what) + " has non-finite entries");
  }
}

/// (M + M^T) / 2. The result is exactly symmetric.
inline MatrixXd symmetrize(const MatrixXd& m) {
  MatrixXd s = 0.5 * (m + m.transpose());
  // Floating-point addition commutes, but copy the upper triangle anyway so
  // the guarantee does not rely on the evaluation order of the expression.
  s.triangularView<Eigen::StrictlyLower>() =
      s.transpose().triangularView<Eigen::StrictlyLower>();
  return s;
}

/// Cholesky factorization that reports failure instead of throwing. Fails on
/// non-finite input, on a non-positive pivot, and on a non-finite factor.
inline std::optional<Eigen::LLT<MatrixXd>> try_cholesky(const MatrixXd& m) {
  if (!m.allFinite()) return std::nullopt;
  Eigen::LLT<MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) return std::nullopt;
  const auto diag = llt.matrixL().toDenseMatrix().diagonal();
  if (!diag.allFinite() || (diag.array() <= 0.0).any()) return std::nullopt;
  return llt;
}

inline double log_det_from_cholesky(const Eigen::LLT<MatrixXd>& llt) {
  const MatrixXd& lower = llt.matrixLLT();
  double sum = 0.0;
  for (Index i = 0; i < lower.rows(); ++i) sum += std::log(lower(i, i));
  return 2.0 * sum;
}

/// ||a - b||_F / max(||a||_F, ||b||_F); zero when both are zero.
inline double relative_difference(const MatrixXd& a, const MatrixXd& b) {
  const double scale = std::max(a.norm(), b.norm());
  if (scale == 0.0) return 0.0;
  return (a - b).norm() / scale;
}

/// Matrix with row and column `i` removed.
inline MatrixXd drop_index(const MatrixXd& m, Index i) {
  const Index n = m.rows();
  MatrixXd out(n - 1, n - 1);
  for (Index r = 0, rr = 0; r < n; ++r) {
    if (r == i) continue;
    for (Index c = 0, cc = 0; c < n; ++c) {
      if (c == i) continue;
      out(rr, cc++) = m(r, c);
    }
    ++rr;
  }
  return out;
}

}  // namespace ctscore

#endif  // CTSCORE_LINALG_HPP
