#ifndef CTSCORE_ALLOCATION_HPP
#define CTSCORE_ALLOCATION_HPP

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "ctscore/errors.hpp"

namespace ctscore {

/// A point of the probability simplex: non-negative weights summing to one.
class Allocation {
 public:
  static constexpr double kSumTolerance = 1e-12;

  explicit Allocation(Eigen::VectorXd p) : p_(std::move(p)) {
    if (p_.size() == 0) throw InputError("Allocation: empty weight vector");
    if (!p_.allFinite()) throw InputError("Allocation: non-finite weight");
    if ((p_.array() < 0.0).any()) throw InputError("Allocation: negative weight");
    const double sum = p_.sum();
    if (std::abs(sum - 1.0) > kSumTolerance) {
      throw InputError("Allocation: weights sum to " + std::to_string(sum));
    }
  }

  static Allocation uniform(Eigen::Index n) {
    if (n <= 0) throw InputError("Allocation: size must be positive");
    return Allocation(Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n)));
  }

  Eigen::Index size() const { return p_.size(); }
  const Eigen::VectorXd& values() const { return p_; }
  double operator[](Eigen::Index i) const { return p_(i); }

 private:
  Eigen::VectorXd p_;
};

}  // namespace ctscore

#endif  // CTSCORE_ALLOCATION_HPP
