#ifndef CTSCORE_SIMPLEX_HPP
#define CTSCORE_SIMPLEX_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ctscore/allocation.hpp"
#include "ctscore/errors.hpp"

namespace ctscore {

/// Euclidean projection onto the probability simplex (sort-and-threshold).
/// Ties in the sort are broken by index so the result is deterministic.
/// Points already in the simplex up to the Allocation tolerance come back
/// unchanged, so projecting twice gives bit-identical results.
inline Allocation project_simplex(const Eigen::VectorXd& v) {
  const Eigen::Index n = v.size();
  if (n == 0) throw InputError("project_simplex: empty vector");
  if (!v.allFinite()) throw InputError("project_simplex: non-finite entry");
  if ((v.array() >= 0.0).all() && std::abs(v.sum() - 1.0) <= Allocation::kSumTolerance) {
    return Allocation(v);
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&v](Eigen::Index a, Eigen::Index b) { return v(a) > v(b); });

  double cumulative = 0.0;
  double threshold = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double x = v(order[static_cast<std::size_t>(k)]);
    cumulative += x;
    const double candidate = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (x - candidate > 0.0) threshold = candidate;
  }
  return Allocation((v.array() - threshold).cwiseMax(0.0).matrix());
}

struct SolveOptions {
  int max_iters = 200000;
  // Stop once ||p - P(p - gamma grad)|| falls to this value.
  double grad_tol = 1e-10;
  double initial_step = 1.0;
  double armijo_shrink = 0.5;
  double armijo_slope = 1e-4;
  std::uint64_t seed = 20240601;

  void validate() const {
    if (max_iters <= 0) throw InputError("SolveOptions: max_iters must be positive");
    if (!(grad_tol > 0.0)) throw InputError("SolveOptions: grad_tol must be positive");
    if (!(initial_step > 0.0)) throw InputError("SolveOptions: initial_step must be positive");
    if (!(armijo_shrink > 0.0 && armijo_shrink < 1.0)) {
      throw InputError("SolveOptions: armijo_shrink must lie in (0, 1)");
    }
    if (!(armijo_slope > 0.0 && armijo_slope < 1.0)) {
      throw InputError("SolveOptions: armijo_slope must lie in (0, 1)");
    }
  }
};

struct SolveReport {
  Allocation optimizer;
  double objective_value;
  int iterations;
  // ||p - P(p - gamma grad h(p))|| at the returned point for the final gamma.
  double residual;
  double final_step;
  bool converged;
};

/// Objective over the simplex; returns +infinity outside its domain.
using SimplexObjective = std::function<double(const Eigen::VectorXd&)>;
using SimplexGradient = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
/// Called after every accepted step with (iteration, objective value).
using IterationObserver = std::function<void(int, double)>;

inline constexpr int kMaxBacktracks = 60;

namespace detail {

// Projection onto the simplex ignores constant shifts of its argument, so the
// mean of the gradient carries no information. Removing it keeps dot products
// with feasible directions (which sum to zero) free of cancellation.
inline Eigen::VectorXd centered(Eigen::VectorXd g) {
  g.array() -= g.mean();
  return g;
}

// g . d for a direction d with zero sum. The mean of g over the coordinates
// that move is removed first: at a face of the simplex the gradient is
// nearly constant on the support, and rounding in d times that constant
// would otherwise swamp the true slope.
inline double tangent_dot(const Eigen::VectorXd& g, const Eigen::VectorXd& d) {
  double mean = 0.0;
  int moving = 0;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (d(i) != 0.0) mean += g(i), ++moving;
  }
  if (moving == 0) return 0.0;
  mean /= moving;
  double dot = 0.0;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (d(i) != 0.0) dot += (g(i) - mean) * d(i);
  }
  return dot;
}

}  // namespace detail

/// Projected gradient with Armijo backtracking. Each iteration retries from
/// min(initial_step, 2 * previous accepted step). Trial points where the
/// objective is not finite count as rejections.
///
/// Close to the optimum the Armijo decrease drops below the rounding noise
/// of the objective. When |h(q) - h(p)| is at noise level the decrease is
/// estimated by the trapezoid rule 0.5 (grad h(p) + grad h(q)) . (q - p),
/// which has no cancellation. A trial that rounds back onto p makes no
/// progress and is rejected.
inline SolveReport projected_gradient(const SimplexObjective& objective,
                                      const SimplexGradient& gradient, const Allocation& init,
                                      const SolveOptions& opts,
                                      const IterationObserver& observer = nullptr) {
  opts.validate();
  Eigen::VectorXd p = init.values();
  double f = objective(p);
  if (!std::isfinite(f)) {
    throw InfeasibleStartError("projected_gradient: objective is not finite at the start");
  }
  Eigen::VectorXd g = gradient(p);
  if (g.size() != p.size()) throw DimensionError("projected_gradient: gradient size");
  g = detail::centered(std::move(g));

  double previous_step = 0.5 * opts.initial_step;
  double step = opts.initial_step;
  double residual = std::numeric_limits<double>::infinity();
  bool converged = false;
  int iterations = 0;

  for (; iterations < opts.max_iters; ++iterations) {
    step = std::min(opts.initial_step, 2.0 * previous_step);
    Eigen::VectorXd q = project_simplex(p - step * g).values();
    residual = (q - p).norm();
    if (residual <= opts.grad_tol) {
      converged = true;
      break;
    }

    const double noise = 1e-12 * (1.0 + std::abs(f));
    bool accepted = false;
    double fq = 0.0;
    Eigen::VectorXd gq;
    for (int k = 0; k < kMaxBacktracks; ++k) {
      fq = objective(q);
      if (std::isfinite(fq) && q != p) {
        const Eigen::VectorXd d = q - p;
        const double slope = detail::tangent_dot(g, d);
        if (std::abs(fq - f) > noise) {
          if (fq - f <= opts.armijo_slope * slope) {
            gq = detail::centered(gradient(q));
            accepted = true;
            break;
          }
        } else {
          // The sign of fq - f is meaningless here.
          gq = detail::centered(gradient(q));
          if (0.5 * (slope + detail::tangent_dot(gq, d)) <= opts.armijo_slope * slope) {
            accepted = true;
            break;
          }
        }
      }
      step *= opts.armijo_shrink;
      q = project_simplex(p - step * g).values();
    }
    if (!accepted) {
      throw SolverStallError("projected_gradient: no acceptable step after " +
                                 std::to_string(kMaxBacktracks) + " backtracks at iteration " +
                                 std::to_string(iterations) + " (objective " +
                                 std::to_string(f) + ", last step " + std::to_string(step) + ")",
                             iterations, step, f);
    }
    p = std::move(q);
    f = fq;
    g = std::move(gq);
    previous_step = step;
    if (observer) observer(iterations, f);
  }

  if (!converged) {
    step = std::min(opts.initial_step, 2.0 * previous_step);
    residual = (project_simplex(p - step * g).values() - p).norm();
    converged = residual <= opts.grad_tol;
  }
  return SolveReport{Allocation(p), f, iterations, residual, step, converged};
}

/// Uniformly distributed point of the simplex (flat Dirichlet).
inline Allocation random_simplex_point(Eigen::Index n, std::mt19937_64& rng) {
  std::exponential_distribution<double> exp1(1.0);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = exp1(rng);
  v /= v.sum();
  return project_simplex(v);
}

/// Largest infinity-norm distance between any two of the points.
inline double max_pairwise_distance(const std::vector<Eigen::VectorXd>& points) {
  double spread = 0.0;
  for (std::size_t a = 0; a < points.size(); ++a) {
    for (std::size_t b = a + 1; b < points.size(); ++b) {
      spread = std::max(spread, (points[a] - points[b]).cwiseAbs().maxCoeff());
    }
  }
  return spread;
}

struct MultistartResult {
  std::vector<SolveReport> runs;  // runs[0] starts from the uniform allocation
  std::size_t best = 0;
  double spread = 0.0;  // max pairwise infinity distance over all optimizers
};

/// Projected gradient from the uniform allocation and `random_starts`
/// seeded random points. Random points at which the objective is not finite
/// are pulled halfway towards the uniform allocation until it is.
inline MultistartResult multistart_minimize(const SimplexObjective& objective,
                                            const SimplexGradient& gradient, Eigen::Index n,
                                            int random_starts, const SolveOptions& opts) {
  MultistartResult out;
  const Allocation uniform = Allocation::uniform(n);
  out.runs.push_back(projected_gradient(objective, gradient, uniform, opts));

  std::mt19937_64 rng(opts.seed);
  for (int s = 0; s < random_starts; ++s) {
    Eigen::VectorXd start = random_simplex_point(n, rng).values();
    for (int k = 0; k < 60 && !std::isfinite(objective(start)); ++k) {
      start = 0.5 * (start + uniform.values());
    }
    out.runs.push_back(
        projected_gradient(objective, gradient, project_simplex(start), opts));
  }

  std::vector<Eigen::VectorXd> optimizers;
  for (std::size_t i = 0; i < out.runs.size(); ++i) {
    optimizers.push_back(out.runs[i].optimizer.values());
    if (out.runs[i].objective_value < out.runs[out.best].objective_value) out.best = i;
  }
  out.spread = max_pairwise_distance(optimizers);
  return out;
}

}  // namespace ctscore

#endif  // CTSCORE_SIMPLEX_HPP
