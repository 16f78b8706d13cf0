#ifndef CTSCORE_EXPM_HPP
#define CTSCORE_EXPM_HPP

#include <array>
#include <cmath>

#include <Eigen/Dense>
#include <Eigen/LU>

#include "ctscore/linalg.hpp"

namespace ctscore {

namespace detail {

// Pade approximant of degree m evaluated at a matrix whose 1-norm is below
// the corresponding theta_m (Higham, "The scaling and squaring method for the
// matrix exponential revisited", 2005).
template <std::size_t N>
MatrixXd pade_low_degree(const MatrixXd& a, const std::array<double, N>& b) {
  const Index n = a.rows();
  const MatrixXd ident = MatrixXd::Identity(n, n);
  const MatrixXd a2 = a * a;
  MatrixXd power = ident;
  MatrixXd u_inner = b[1] * ident;
  MatrixXd v = b[0] * ident;
  for (std::size_t k = 2; k < N; k += 2) {
    power = power * a2;
    v += b[k] * power;
    if (k + 1 < N) u_inner += b[k + 1] * power;
  }
  const MatrixXd u = a * u_inner;
  return (v - u).partialPivLu().solve(v + u);
}

inline MatrixXd pade13(const MatrixXd& a) {
  static constexpr std::array<double, 14> b = {
      64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
      1187353796428800.0,  129060195264000.0,   10559470521600.0,
      670442572800.0,      33522128640.0,       1323241920.0,
      40840800.0,          960960.0,            16380.0,
      182.0,               1.0};
  const Index n = a.rows();
  const MatrixXd ident = MatrixXd::Identity(n, n);
  const MatrixXd a2 = a * a;
  const MatrixXd a4 = a2 * a2;
  const MatrixXd a6 = a4 * a2;
  const MatrixXd u =
      a * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 +
           b[5] * a4 + b[3] * a2 + b[1] * ident);
  const MatrixXd v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 +
                     b[4] * a4 + b[2] * a2 + b[0] * ident;
  return (v - u).partialPivLu().solve(v + u);
}

}  // namespace detail

/// exp(A t) by scaling and squaring around a diagonal Pade approximant.
/// Degrees 3/5/7/9/13 are chosen from the 1-norm of A t so that the
/// truncation error stays at unit-roundoff level.
inline MatrixXd matrix_exponential(const MatrixXd& a, double t) {
  require_square(a, "matrix_exponential: A");
  require_finite(a, "matrix_exponential: A");
  if (!std::isfinite(t)) throw InputError("matrix_exponential: t is not finite");

  const MatrixXd at = a * t;
  const double norm1 = at.cwiseAbs().colwise().sum().maxCoeff();

  static constexpr std::array<double, 4> b3 = {120.0, 60.0, 12.0, 1.0};
  static constexpr std::array<double, 6> b5 = {30240.0, 15120.0, 3360.0,
                                               420.0,   30.0,    1.0};
  static constexpr std::array<double, 8> b7 = {
      17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0};
  static constexpr std::array<double, 10> b9 = {
      17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
      2162160.0,     110880.0,     3960.0,       90.0,        1.0};

  if (at.rows() == 0) return at;
  if (norm1 <= 1.495585217958292e-2) return detail::pade_low_degree(at, b3);
  if (norm1 <= 2.539398330063230e-1) return detail::pade_low_degree(at, b5);
  if (norm1 <= 9.504178996162932e-1) return detail::pade_low_degree(at, b7);
  if (norm1 <= 2.097847961257068e0) return detail::pade_low_degree(at, b9);

  constexpr double theta13 = 5.371920351148152;
  int squarings = 0;
  if (norm1 > theta13) {
    squarings = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
  }
  MatrixXd result = detail::pade13(at / std::ldexp(1.0, squarings));
  for (int k = 0; k < squarings; ++k) result = result * result;
  return result;
}

}  // namespace ctscore

#endif  // CTSCORE_EXPM_HPP
