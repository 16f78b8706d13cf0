// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "ctscore/ctscore.hpp"
#include "oracles.hpp"

namespace {

using namespace ctscore;

// Published scores of the ten-node network, rows = nodes 1..10, columns =
// T in {0.01, 1, 1000, 10000}.
using Table = std::array<std::array<double, 4>, 10>;
constexpr std::array<double, 4> kHorizons{0.01, 1.0, 1000.0, 10000.0};

constexpr Table kVcs{{{0.1000, 0.0997, 0.0733, 0.0733},
                      {0.1000, 0.1000, 0.1011, 0.1011},
                      {0.1000, 0.1000, 0.1088, 0.1087},
                      {0.1000, 0.1000, 0.0864, 0.0864},
                      {0.1000, 0.0997, 0.0456, 0.0450},
                      {0.1000, 0.0994, 0.0607, 0.0607},
                      {0.1000, 0.1013, 0.2493, 0.2495},
                      {0.1000, 0.0997, 0.0423, 0.0422},
                      {0.1000, 0.1003, 0.1661, 0.1667},
                      {0.1000, 0.1000, 0.0664, 0.0663}}};

constexpr Table kAecs{{{0.1000, 0.1093, 0.1713, 0.1728},
                       {0.1000, 0.1000, 0.1133, 0.1136},
                       {0.1000, 0.1000, 0.1205, 0.1209},
                       {0.1000, 0.1000, 0.1058, 0.1061},
                       {0.1000, 0.0998, 0.0907, 0.0923},
                       {0.1000, 0.1091, 0.1335, 0.1338},
                       {0.1000, 0.0913, 0.0926, 0.0928},
                       {0.1000, 0.0998, 0.0695, 0.0694},
                       {0.1000, 0.0908, 0.0070, 0.0023},
                       {0.1000, 0.1000, 0.0957, 0.0959}}};

// Same network with A_99 = -1.
constexpr Table kVcsSelfLoop{{{0.1000, 0.0997, 0.0974, 0.0974},
                              {0.1000, 0.1000, 0.1020, 0.1020},
                              {0.1000, 0.1000, 0.1096, 0.1096},
                              {0.1000, 0.1000, 0.0874, 0.0874},
                              {0.1000, 0.0997, 0.0837, 0.0837},
                              {0.1000, 0.0993, 0.0606, 0.0605},
                              {0.1000, 0.1013, 0.2490, 0.2492},
                              {0.1000, 0.0997, 0.0419, 0.0418},
                              {0.1000, 0.1003, 0.1022, 0.1022},
                              {0.1000, 0.1000, 0.0661, 0.0661}}};

constexpr Table kAecsSelfLoop{{{0.1000, 0.1044, 0.1269, 0.1269},
                               {0.1000, 0.0955, 0.0938, 0.0938},
                               {0.1000, 0.0955, 0.1001, 0.1001},
                               {0.1000, 0.0955, 0.0872, 0.0872},
                               {0.1000, 0.0953, 0.0739, 0.0739},
                               {0.1000, 0.1044, 0.1108, 0.1108},
                               {0.0999, 0.0870, 0.0763, 0.0763},
                               {0.1000, 0.0953, 0.0570, 0.0569},
                               {0.1003, 0.1316, 0.1953, 0.1953},
                               {0.1000, 0.0955, 0.0787, 0.0787}}};

int failures = 0;
std::array<std::string, 10> lines;

void report(int id, const char* name, bool ok, const std::string& detail) {
  char head[64];
  std::snprintf(head, sizeof head, "%s  %d  %-34s ", ok ? "PASS" : "FAIL", id, name);
  lines[static_cast<std::size_t>(id)] = head + detail;
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// Every controllability score computed here is recorded so that the
// multistart spread can be checked across all of them.
struct SpreadLog {
  double worst = 0.0;
  int runs = 0;
  void add(const ScoreResult& r) {
    worst = std::max(worst, r.multistart_spread);
    ++runs;
  }
} spreads;

ScoreResult Score(const GramianBasis& basis, Criterion c, const ScoreOptions& opts = {}) {
  ScoreResult r = compute_score(basis, c, opts);
  spreads.add(r);
  return r;
}

NetworkSystem Network(const char* name) { return build_laplacian_dynamics(builtin_network(name)); }

struct TableRun {
  std::vector<ScoreResult> vcs;
  std::vector<ScoreResult> aecs;
  double seconds = 0.0;
};

TableRun RunTable(const NetworkSystem& sys) {
  TableRun out;
  const auto start = std::chrono::steady_clock::now();
  for (double t : kHorizons) {
    const auto basis = gramian_basis(sys, Horizon(t));
    out.vcs.push_back(Score(basis, Criterion::kVcs));
    out.aecs.push_back(Score(basis, Criterion::kAecs));
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

double MaxDeviation(const std::vector<ScoreResult>& runs, const Table& table) {
  double worst = 0.0;
  for (std::size_t h = 0; h < kHorizons.size(); ++h) {
    for (Index i = 0; i < 10; ++i) {
      worst = std::max(worst, std::abs(runs[h].scores[i] - table[static_cast<std::size_t>(i)][h]));
    }
  }
  return worst;
}

void TableReproduction() {
  const TableRun run = RunTable(Network("fig1"));
  const double vcs_dev = MaxDeviation(run.vcs, kVcs);
  const double aecs_dev = MaxDeviation(run.aecs, kAecs);
  // (criterion is VCS, node, horizon column)
  struct Flagship {
    bool vcs;
    Index node;
    std::size_t col;
  };
  const Flagship flagships[] = {{true, 7, 2}, {true, 9, 3}, {false, 9, 2}, {false, 9, 3}, {false, 1, 3}};
  double flag_dev = 0.0;
  for (const auto& f : flagships) {
    const auto& runs = f.vcs ? run.vcs : run.aecs;
    const Table& table = f.vcs ? kVcs : kAecs;
    flag_dev = std::max(flag_dev, std::abs(runs[f.col].scores[f.node - 1] -
                                           table[static_cast<std::size_t>(f.node - 1)][f.col]));
  }
  bool converged = true;
  for (const auto& r : run.vcs) converged = converged && r.report.converged;
  for (const auto& r : run.aecs) converged = converged && r.report.converged;
  const bool ok = vcs_dev <= 5e-3 && aecs_dev <= 5e-3 && flag_dev <= 2e-3 && run.seconds < 60.0;
  report(1, "table reproduction", ok,
         fmt("max dev VCS %.2e", vcs_dev) + fmt(", AECS %.2e", aecs_dev) +
             fmt(" (tol 5e-3); flagship %.2e (tol 2e-3)", flag_dev) +
             fmt("; %.2f s", run.seconds) + (converged ? "" : "; some runs hit max_iters"));
}

void SelfLoopReproduction() {
  const TableRun run = RunTable(Network("fig1-selfloop9"));
  const double aecs9 = run.aecs[3].scores[8];
  const double vcs7 = run.vcs[3].scores[6];
  const double d1 = std::abs(aecs9 - 0.1953);
  const double d2 = std::abs(vcs7 - 0.2492);
  const double whole = std::max(MaxDeviation(run.vcs, kVcsSelfLoop), MaxDeviation(run.aecs, kAecsSelfLoop));
  report(2, "self-loop table reproduction", d1 <= 2e-3 && d2 <= 2e-3,
         fmt("AECS node 9 %.4f", aecs9) + fmt(" (0.1953), VCS node 7 %.4f", vcs7) +
             fmt(" (0.2492); whole table max dev %.2e", whole));
}

void TwoNodeClosedForm() {
  const NetworkSystem sys = Network("twonode-diag");
  double aecs_err = 0.0;
  double vcs_err = 0.0;
  bool decreasing = true;
  double previous = 1.0;
  for (double t : {0.5, 1.0, 10.0, 100.0, 1000.0}) {
    const auto basis = gramian_basis(sys, Horizon(t));
    const double expected = 1.0 / (1.0 + std::sqrt(2.0 * t / (1.0 - std::exp(-2.0 * t))));
    const auto aecs = Score(basis, Criterion::kAecs);
    const auto vcs = Score(basis, Criterion::kVcs);
    aecs_err = std::max(aecs_err, std::abs(aecs.scores[0] - expected));
    vcs_err = std::max(vcs_err, (vcs.scores.values().array() - 0.5).abs().maxCoeff());
    decreasing = decreasing && aecs.scores[0] < previous;
    previous = aecs.scores[0];
  }
  report(3, "two-node closed form", aecs_err <= 1e-7 && vcs_err <= 1e-7 && decreasing,
         fmt("AECS p1 err %.2e", aecs_err) + fmt(", VCS err %.2e", vcs_err) +
             (decreasing ? ", p1(T) decreasing" : ", p1(T) NOT decreasing"));
}

void DiagonalScaling() {
  double worst = 0.0;
  for (auto [s1, s2] : {std::pair{1.0, 3.0}, {2.0, 5.0}, {10.0, 1.0}}) {
    const auto r = check_aecs_coordinate_dependence(s1, s2, Horizon(1.0));
    worst = std::max({worst, r.unscaled_error, r.scaled_error});
    // Record the spreads of the two underlying solves as well.
    const NetworkSystem zero(MatrixXd::Zero(2, 2));
    const CoordinateChange change(Eigen::Vector2d(s1, s2).asDiagonal().toDenseMatrix());
    Score(change.transformed_basis(zero, Horizon(1.0)), Criterion::kAecs);
  }
  Score(gramian_basis(NetworkSystem(MatrixXd::Zero(2, 2)), Horizon(1.0)), Criterion::kAecs);
  report(4, "AECS under diagonal scaling", worst <= 1e-7, fmt("max err %.2e (tol 1e-7)", worst));
}

void VcsInvariance() {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> cond(1.5, 99.0);
  const NetworkSystem sys = Network("fig1");
  const auto basis = gramian_basis(sys, Horizon(1.0));
  double spread = 0.0;
  double offset = 0.0;
  for (int k = 0; k < 10; ++k) {
    const MatrixXd s = oracle::random_conditioned(10, cond(rng), rng);
    const auto r = check_vcs_invariance(sys, Horizon(1.0), s);
    spread = std::max(spread, r.spread);
    offset = std::max(offset, r.max_offset_error);
    Score(CoordinateChange(s).transformed_basis(sys, Horizon(1.0)), Criterion::kVcs);
  }
  Score(basis, Criterion::kVcs);
  report(5, "VCS coordinate invariance", spread < 1e-6 && offset <= 1e-8,
         fmt("10 transforms: spread %.2e", spread) + fmt(", offset err %.2e", offset));
}

void BoundSuite() {
  std::mt19937_64 rng(103);
  const NetworkSystem sys = Network("fig1");
  int violations = 0;
  int checks = 0;
  double diag_err = 0.0;
  for (double t : {1.0, 1000.0}) {
    const auto basis = gramian_basis(sys, Horizon(t));
    int sampled = 0;
    while (sampled < 100) {
      const Allocation p = random_simplex_point(10, rng);
      if (!feasibility(basis, p)) continue;
      ++sampled;
      const double g = aecs_objective(basis, p);
      const double f = vcs_objective(basis, p);
      const MatrixXd w = assemble_gramian(basis, p);
      for (const auto& s : detect_source_nodes(sys)) {
        const double om = omega(s.ell, Horizon(t));
        checks += 3;
        if (!(g >= aecs_lower_bound(p[s.index], s.ell, Horizon(t)))) ++violations;
        if (!(f >= vcs_lower_bound(sys, basis, p, s.index) - 1e-9)) ++violations;
        const double rel = std::abs(w(s.index, s.index) - p[s.index] * om) / (p[s.index] * om);
        diag_err = std::max(diag_err, rel);
        if (!(rel <= 1e-10)) ++violations;
      }
    }
  }
  std::uniform_int_distribution<int> size(2, 8);
  for (int k = 0; k < 500; ++k) {
    const int n = size(rng);
    const MatrixXd w = oracle::random_spd(n, rng);
    for (Index i = 0; i < n; ++i) {
      checks += 2;
      if (!check_det_bound(w, i)) ++violations;
      if (!check_inv_diag_bound(w, i)) ++violations;
    }
  }
  report(6, "bound suite", violations == 0,
         std::to_string(violations) + " violations in " + std::to_string(checks) +
             fmt(" checks; W_ii = p_i omega_i max rel err %.2e", diag_err));
}

void GradientsAndConvexity() {
  std::mt19937_64 rng(107);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const auto basis = gramian_basis(NetworkSystem(oracle::random_stable(4, rng)), Horizon(1.0));
    const VectorXd p = oracle::random_positive_weights(4, rng);
    const auto terms = basis.terms();
    auto f = [&](const VectorXd& x) { return *affine::log_det_objective(terms, x); };
    auto g = [&](const VectorXd& x) { return *affine::trace_inverse_objective(terms, x); };
    const VectorXd gv = vcs_gradient(basis, Allocation(p));
    const VectorXd ga = aecs_gradient(basis, Allocation(p));
    worst = std::max(worst, (gv - oracle::central_difference(f, p)).norm() / gv.norm());
    worst = std::max(worst, (ga - oracle::central_difference(g, p)).norm() / ga.norm());
  }
  int convexity_violations = 0;
  for (int k = 0; k < 200; ++k) {
    const auto basis = gramian_basis(NetworkSystem(oracle::random_stable(4, rng)), Horizon(1.0));
    const Allocation p(oracle::random_positive_weights(4, rng));
    const Allocation q(oracle::random_positive_weights(4, rng));
    const Allocation mid(0.5 * (p.values() + q.values()));
    for (Criterion c : {Criterion::kVcs, Criterion::kAecs}) {
      const double lhs = objective(basis, c, mid);
      const double rhs = 0.5 * (objective(basis, c, p) + objective(basis, c, q));
      if (!(lhs <= rhs + 1e-9)) ++convexity_violations;
    }
  }
  report(7, "gradients and convexity", worst < 1e-6 && convexity_violations == 0,
         fmt("max rel gradient err %.2e", worst) + "; " + std::to_string(convexity_violations) +
             " midpoint violations in 200 pairs");
}

void DesignCorrespondence() {
  std::mt19937_64 rng(109);
  std::normal_distribution<double> normal;
  double identity = 0.0;
  for (int k = 0; k < 100; ++k) {
    const int d = 2 + k % 4;
    std::vector<VectorXd> v;
    for (int i = 0; i < d + 3; ++i) {
      VectorXd f(d);
      for (int j = 0; j < d; ++j) f(j) = normal(rng);
      v.push_back(f);
    }
    const DesignProblem problem(v, std::exp(normal(rng)));
    const GramianBasis basis(Horizon(1.0), problem.elementary_matrices(), GramianMethod::kSpectral);
    const Allocation w(oracle::random_positive_weights(d + 3, rng));
    const double a = design_objective(problem, DesignCriterion::kD, w);
    const double b = design_objective(problem, DesignCriterion::kA, w);
    identity = std::max(identity, std::abs(a - vcs_objective(basis, w)) / (1.0 + std::abs(a)));
    identity = std::max(identity, std::abs(b - aecs_objective(basis, w)) / (1.0 + std::abs(b)));
  }

  std::vector<VectorXd> quad;
  for (double x : {-1.0, 0.0, 1.0}) quad.push_back(Eigen::Vector3d(1.0, x, x * x));
  const DesignProblem quadratic(quad);
  const auto fit = solve_design(quadratic, DesignCriterion::kD);
  const VectorXd grid = oracle::simplex_grid_argmin(
      [&](const VectorXd& w) {
        const auto v = affine::log_det_objective(quadratic.elementary_matrices(), w);
        return v ? *v : std::numeric_limits<double>::infinity();
      },
      3, 1e-3);
  const double uniform_err = (fit.weights.values().array() - 1.0 / 3.0).abs().maxCoeff();
  const double grid_err = (fit.weights.values() - grid).cwiseAbs().maxCoeff();

  const DesignProblem duplicated({Eigen::Vector2d(1, 0), Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)});
  const auto probe = uniqueness_probe(duplicated, DesignCriterion::kD);
  double objective_gap = 0.0;
  for (double v : probe.objectives) objective_gap = std::max(objective_gap, v - probe.best_objective);

  const bool ok = identity <= 1e-12 && uniform_err <= 1e-6 && std::abs(fit.kw_gap) < 1e-6 &&
                  grid_err <= 1e-3 && probe.spread > 0.1 && objective_gap <= 1e-9 &&
                  spreads.worst < 1e-6;
  report(8, "design correspondence", ok,
         fmt("identity err %.1e", identity) + fmt("; quadratic fit KW gap %.1e", fit.kw_gap) +
             fmt(", grid dist %.1e", grid_err) + fmt("; duplicate probe spread %.3f", probe.spread) +
             fmt(" (obj gap %.1e)", objective_gap) + fmt("; scoring spread max %.1e over ", spreads.worst) +
             std::to_string(spreads.runs) + " runs");
}

void SymmetricUniform() {
  std::mt19937_64 rng(113);
  std::uniform_int_distribution<int> size(2, 6);
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    const int n = size(rng);
    const auto basis = gramian_basis(NetworkSystem(oracle::random_symmetric_stable(n, rng)), Horizon(1.0));
    const auto r = Score(basis, Criterion::kVcs);
    worst = std::max(worst, (r.scores.values().array() - 1.0 / n).abs().maxCoeff());
  }
  report(9, "symmetric A gives uniform VCS", worst <= 1e-6, fmt("max deviation %.2e (tol 1e-6)", worst));
}

}  // namespace

int main() {
  const auto start = std::chrono::steady_clock::now();
  // Criterion 8 inspects the spreads of every scoring run, so it goes last.
  TableReproduction();
  SelfLoopReproduction();
  TwoNodeClosedForm();
  DiagonalScaling();
  VcsInvariance();
  BoundSuite();
  GradientsAndConvexity();
  SymmetricUniform();
  DesignCorrespondence();
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  for (std::size_t id = 1; id < lines.size(); ++id) std::printf("%s\n", lines[id].c_str());
  std::printf("%d of 9 criteria passed in %.1f s\n", 9 - failures, seconds);
  return failures == 0 ? 0 : 1;
}
