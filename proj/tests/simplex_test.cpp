#include "ctscore/simplex.hpp"

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "ctscore/scoring.hpp"
#include "oracles.hpp"

namespace ctscore {
namespace {

TEST(ProjectSimplex, AlreadyInside) {
  const VectorXd p = project_simplex(Eigen::Vector2d(0.3, 0.7)).values();
  EXPECT_NEAR(p(0), 0.3, 1e-16);
  EXPECT_NEAR(p(1), 0.7, 1e-16);
}

TEST(ProjectSimplex, Vertex) {
  const VectorXd p = project_simplex(Eigen::Vector2d(2.0, 0.0)).values();
  EXPECT_EQ(p(0), 1.0);
  EXPECT_EQ(p(1), 0.0);
}

TEST(ProjectSimplex, MatchesBruteForce) {
  const VectorXd v = Eigen::Vector3d(0.6, 0.6, 0.0);
  const VectorXd p = project_simplex(v).values();
  EXPECT_LT((p - oracle::brute_force_projection(v)).cwiseAbs().maxCoeff(), 1e-15);
  // Cross-check against an exhaustive grid of the 3-simplex.
  auto dist = [&v](const VectorXd& x) { return (x - v).squaredNorm(); };
  EXPECT_LT((p - oracle::simplex_grid_argmin(dist, 3, 1e-3)).cwiseAbs().maxCoeff(), 1e-3);
  EXPECT_NEAR(p(0), 0.5, 1e-15);
  EXPECT_NEAR(p(1), 0.5, 1e-15);
  EXPECT_EQ(p(2), 0.0);

  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  std::uniform_int_distribution<int> dim(1, 8);
  for (int trial = 0; trial < 200; ++trial) {
    VectorXd w(dim(rng));
    for (Index i = 0; i < w.size(); ++i) w(i) = g(rng);
    EXPECT_LT((project_simplex(w).values() - oracle::brute_force_projection(w)).cwiseAbs().maxCoeff(),
              1e-14);
  }
}

TEST(ProjectSimplex, Errors) {
  EXPECT_THROW(project_simplex(VectorXd()), InputError);
  EXPECT_THROW(project_simplex(Eigen::Vector2d(NAN, 1.0)), InputError);
}

TEST(ProjectSimplex, IdempotentNonexpansiveAndFeasible) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0.0, 2.0);
  std::uniform_int_distribution<int> dim(1, 12);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = dim(rng);
    VectorXd u(n);
    VectorXd v(n);
    for (int i = 0; i < n; ++i) u(i) = g(rng), v(i) = g(rng);
    const VectorXd pu = project_simplex(u).values();
    const VectorXd pv = project_simplex(v).values();
    EXPECT_EQ(project_simplex(pu).values(), pu);
    EXPECT_LE((pu - pv).norm(), (u - v).norm() + 1e-15);
    EXPECT_TRUE((pu.array() >= 0.0).all());
    EXPECT_NEAR(pu.sum(), 1.0, 1e-12);
  }
}

TEST(ProjectSimplex, TiesAreDeterministic) {
  const VectorXd p = project_simplex(VectorXd::Constant(6, 0.5)).values();
  EXPECT_TRUE((p.array() == p(0)).all());
  EXPECT_NEAR(p(0), 1.0 / 6.0, 1e-16);
}

TEST(Allocation, Validation) {
  EXPECT_THROW(Allocation{VectorXd()}, InputError);
  EXPECT_THROW(Allocation(Eigen::Vector2d(0.5, 0.6)), InputError);
  EXPECT_THROW(Allocation(Eigen::Vector2d(1.5, -0.5)), InputError);
  EXPECT_NO_THROW(Allocation(Eigen::Vector2d(1.0, 0.0)));
}

TEST(SolveOptions, Validation) {
  SolveOptions o;
  EXPECT_NO_THROW(o.validate());
  o.armijo_shrink = 1.0;
  EXPECT_THROW(o.validate(), InputError);
  o = {};
  o.grad_tol = 0.0;
  EXPECT_THROW(o.validate(), InputError);
  o = {};
  o.max_iters = 0;
  EXPECT_THROW(o.validate(), InputError);
}

TEST(ProjectedGradient, InteriorQuadratic) {
  const VectorXd target = Eigen::Vector2d(0.2, 0.8);
  auto f = [&](const VectorXd& p) { return (p - target).squaredNorm(); };
  auto g = [&](const VectorXd& p) { return VectorXd(2.0 * (p - target)); };
  const SolveOptions opts;
  const auto r = projected_gradient(f, g, Allocation::uniform(2), opts);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.residual, opts.grad_tol);
  EXPECT_LT((r.optimizer.values() - target).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(ProjectedGradient, ZeroDynamicsAecs) {
  const auto basis = gramian_basis(NetworkSystem(MatrixXd::Zero(2, 2)), Horizon(1.0));
  const auto problem = affine::make_problem(basis.terms(), false);
  const auto r = projected_gradient(problem.objective, problem.gradient,
                                    Allocation(Eigen::Vector2d(0.9, 0.1)), SolveOptions{});
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.optimizer[0], 0.5, 1e-9);
  EXPECT_NEAR(r.optimizer[1], 0.5, 1e-9);
}

TEST(ProjectedGradient, TwoNodeDiagonalAecsClosedForm) {
  const double t = 10.0;
  const auto basis = gramian_basis(
      NetworkSystem(Eigen::Vector2d(0.0, -1.0).asDiagonal().toDenseMatrix()), Horizon(t));
  const auto problem = affine::make_problem(basis.terms(), false);
  const auto r = projected_gradient(problem.objective, problem.gradient, Allocation::uniform(2),
                                    SolveOptions{});
  const double expected = 1.0 / (1.0 + std::sqrt(2.0 * t / (1.0 - std::exp(-2.0 * t))));
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.optimizer[0], expected, 1e-9);
}

TEST(ProjectedGradient, MonotoneDescentAndFixedPoint) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const NetworkSystem sys(oracle::random_stable(5, rng));
    const auto basis = gramian_basis(sys, Horizon(2.0));
    for (bool log_det : {true, false}) {
      const auto problem = affine::make_problem(basis.terms(), log_det);
      std::vector<double> values{problem.objective(Allocation::uniform(5).values())};
      const SolveOptions opts;
      const auto r = projected_gradient(problem.objective, problem.gradient, Allocation::uniform(5),
                                        opts, [&](int, double f) { values.push_back(f); });
      for (std::size_t k = 1; k < values.size(); ++k) {
        // Steps in the rounding band of h are decided by a gradient
        // estimate; allow for that band only.
        EXPECT_LE(values[k], values[k - 1] + 1e-12 * (1.0 + std::abs(values[k - 1])));
      }
      ASSERT_TRUE(r.converged);
      const VectorXd p = r.optimizer.values();
      const VectorXd step = project_simplex(p - r.final_step * problem.gradient(p)).values();
      EXPECT_LE((step - p).norm(), opts.grad_tol * (1.0 + 1e-6));
      EXPECT_EQ(values.back(), r.objective_value);
    }
  }
}

TEST(ProjectedGradient, InfeasibleStart) {
  auto f = [](const VectorXd&) { return std::numeric_limits<double>::infinity(); };
  auto g = [](const VectorXd& p) { return VectorXd(VectorXd::Zero(p.size())); };
  EXPECT_THROW(projected_gradient(f, g, Allocation::uniform(3), SolveOptions{}),
               InfeasibleStartError);
}

TEST(ProjectedGradient, StallWhenEveryTrialIsInfeasible) {
  const VectorXd start = Allocation::uniform(2).values();
  auto f = [&](const VectorXd& p) {
    return p == start ? 1.0 : std::numeric_limits<double>::infinity();
  };
  auto g = [](const VectorXd&) { return VectorXd(Eigen::Vector2d(1.0, -1.0)); };
  try {
    projected_gradient(f, g, Allocation::uniform(2), SolveOptions{});
    FAIL() << "expected a stall";
  } catch (const SolverStallError& e) {
    EXPECT_EQ(e.iteration(), 0);
    EXPECT_EQ(e.objective(), 1.0);
    EXPECT_LT(e.step(), 1e-15);
  }
}

TEST(ProjectedGradient, MaxItersReportsNotConverged) {
  const auto basis = gramian_basis(NetworkSystem(MatrixXd::Zero(3, 3)), Horizon(1.0));
  const auto problem = affine::make_problem(basis.terms(), true);
  SolveOptions opts;
  opts.max_iters = 1;
  const auto r = projected_gradient(problem.objective, problem.gradient,
                                    Allocation(Eigen::Vector3d(0.8, 0.1, 0.1)), opts);
  EXPECT_FALSE(r.converged);
  EXPECT_GT(r.residual, opts.grad_tol);
  EXPECT_EQ(r.iterations, 1);
}

TEST(RandomSimplexPoint, FeasibleAndSeeded) {
  std::mt19937_64 a(1);
  std::mt19937_64 b(1);
  for (int k = 0; k < 100; ++k) {
    const auto p = random_simplex_point(7, a);
    EXPECT_EQ(p.values(), random_simplex_point(7, b).values());
    EXPECT_NEAR(p.values().sum(), 1.0, 1e-12);
  }
}

TEST(MultistartMinimize, SpreadOfStrictlyConvexProblem) {
  const VectorXd target = Eigen::Vector3d(0.1, 0.3, 0.6);
  auto f = [&](const VectorXd& p) { return (p - target).squaredNorm(); };
  auto g = [&](const VectorXd& p) { return VectorXd(2.0 * (p - target)); };
  const auto r = multistart_minimize(f, g, 3, 5, SolveOptions{});
  EXPECT_EQ(r.runs.size(), 6u);
  EXPECT_LT(r.spread, 1e-9);
  EXPECT_LT((r.runs[r.best].optimizer.values() - target).cwiseAbs().maxCoeff(), 1e-10);
}

}  // namespace
}  // namespace ctscore
