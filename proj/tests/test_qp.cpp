#include "delam/qp.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <optional>
#include <random>
#include <sstream>

#include "delam/stepper.hpp"
#include "test_support.hpp"

using namespace delam;

namespace {

QpProblem dense_problem(const Eigen::MatrixXd& H, const Eigen::VectorXd& g,
                        std::vector<int> nonneg) {
  QpProblem p;
  p.H = H.sparseView();
  p.g = g;
  p.nonneg_set = std::move(nonneg);
  return p;
}

double objective(const QpProblem& p, const Eigen::VectorXd& x) {
  return 0.5 * x.dot(p.H * x) + p.g.dot(x);
}

// Exhaustive oracle: solve the equality-constrained system for every subset
// of the bound set, keep the feasible-and-optimal candidates.
std::optional<double> enumerate_best_objective(const Eigen::MatrixXd& H,
                                               const Eigen::VectorXd& g,
                                               const std::vector<int>& nonneg) {
  const int n = static_cast<int>(g.size());
  const int nb = static_cast<int>(nonneg.size());
  std::optional<double> best;
  for (unsigned mask = 0; mask < (1u << nb); ++mask) {
    std::vector<bool> active(n, false);
    for (int b = 0; b < nb; ++b)
      if (mask & (1u << b)) active[nonneg[b]] = true;

    std::vector<int> free_idx;
    for (int i = 0; i < n; ++i)
      if (!active[i]) free_idx.push_back(i);

    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    if (!free_idx.empty()) {
      Eigen::MatrixXd h_ff(free_idx.size(), free_idx.size());
      Eigen::VectorXd g_f(free_idx.size());
      for (std::size_t a = 0; a < free_idx.size(); ++a) {
        g_f[a] = -g[free_idx[a]];
        for (std::size_t b = 0; b < free_idx.size(); ++b)
          h_ff(a, b) = H(free_idx[a], free_idx[b]);
      }
      const Eigen::VectorXd x_f = h_ff.ldlt().solve(g_f);
      for (std::size_t a = 0; a < free_idx.size(); ++a) x[free_idx[a]] = x_f[a];
    }

    const Eigen::VectorXd grad = H * x + g;
    bool ok = true;
    for (int i : nonneg) {
      if (!active[i] && x[i] < -1e-9) ok = false;
      if (active[i] && grad[i] < -1e-9 * (1.0 + grad.cwiseAbs().maxCoeff())) ok = false;
    }
    if (!ok) continue;
    const double value = 0.5 * x.dot(H * x) + g.dot(x);
    if (!best || value < *best) best = value;
  }
  return best;
}

}  // namespace

TEST(SolveQp, UnconstrainedMinimumInsideFeasibleSet) {
  // minimize 1/2 x^2 - x, x >= 0  ->  x = 1
  const QpProblem p = dense_problem(Eigen::MatrixXd::Identity(1, 1),
                                    -Eigen::VectorXd::Ones(1), {0});
  const QpSolution sol = solve_qp(p);
  EXPECT_NEAR(sol.x[0], 1.0, 1e-12);
  EXPECT_EQ(sol.status, QpStatus::Converged);
  EXPECT_TRUE(sol.active_set.empty());
}

TEST(SolveQp, ActiveBoundWithMultiplier) {
  // minimize 1/2 x^2 - x subject to x <= 0, encoded via y = -x >= 0:
  // minimize 1/2 y^2 + y, y >= 0  ->  y = 0 with multiplier 1.
  const QpProblem p = dense_problem(Eigen::MatrixXd::Identity(1, 1),
                                    Eigen::VectorXd::Ones(1), {0});
  const QpSolution sol = solve_qp(p);
  EXPECT_DOUBLE_EQ(sol.x[0], 0.0);
  ASSERT_EQ(sol.active_set.size(), 1u);
  const Eigen::VectorXd lambda = p.H * sol.x + p.g;
  EXPECT_NEAR(lambda[0], 1.0, 1e-12);
  EXPECT_NEAR(sol.complementarity_residual, 0.0, 1e-12);
}

TEST(SolveQp, L1SplitVariableShrinkage) {
  // minimize 1/2 x^2 + 0.5 |x - 1| via x = 1 + p+ - p-, p± >= 0  ->  x = 0.5
  Eigen::MatrixXd H(2, 2);
  H << 1.0, -1.0, -1.0, 1.0;
  Eigen::VectorXd g(2);
  g << 1.0 + 0.5, -1.0 + 0.5;
  const QpSolution sol = solve_qp(dense_problem(H, g, {0, 1}));
  const double x = 1.0 + sol.x[0] - sol.x[1];
  EXPECT_NEAR(x, 0.5, 1e-12);
  EXPECT_NEAR(sol.x[0], 0.0, 1e-12);
  EXPECT_NEAR(sol.x[1], 0.5, 1e-12);
}

TEST(SolveQp, MatchesEnumerationOracle) {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<int> size_dist(2, 12);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = size_dist(rng);
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = gauss(rng);
    const Eigen::MatrixXd H = a.transpose() * a + 0.1 * Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd g(n);
    for (int i = 0; i < n; ++i) g[i] = gauss(rng);

    std::vector<int> nonneg;
    std::uniform_int_distribution<int> nb_dist(1, std::min(8, n));
    const int nb = nb_dist(rng);
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    nonneg.assign(perm.begin(), perm.begin() + nb);
    std::sort(nonneg.begin(), nonneg.end());

    const QpProblem p = dense_problem(H, g, nonneg);
    const QpSolution sol = solve_qp(p);
    ASSERT_EQ(sol.status, QpStatus::Converged);
    EXPECT_LE(sol.kkt_residual, 1e-9);

    const auto oracle = enumerate_best_objective(H, g, nonneg);
    ASSERT_TRUE(oracle.has_value());
    const double got = objective(p, sol.x);
    EXPECT_NEAR(got, *oracle, 1e-8 * (std::abs(*oracle) + 1.0));
  }
}

TEST(SolveQp, ObjectiveTraceMonotone) {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 10;
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = gauss(rng);
    const Eigen::MatrixXd H = a.transpose() * a + 0.5 * Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd g(n);
    for (int i = 0; i < n; ++i) g[i] = gauss(rng);
    const QpSolution sol = solve_qp(dense_problem(H, g, {0, 1, 2, 3, 4}));
    double scale = 1.0;
    for (double v : sol.objective_trace) scale = std::max(scale, std::abs(v));
    for (std::size_t k = 1; k < sol.objective_trace.size(); ++k)
      EXPECT_LE(sol.objective_trace[k], sol.objective_trace[k - 1] + 1e-12 * scale);
  }
}

TEST(SolveQp, WarmStartedResolveIsImmediate) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int n = 12;
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = gauss(rng);
  const Eigen::MatrixXd H = a.transpose() * a + Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd g(n);
  for (int i = 0; i < n; ++i) g[i] = gauss(rng);
  const QpProblem p = dense_problem(H, g, {0, 2, 4, 6, 8, 10});

  const QpSolution cold = solve_qp(p);
  QpWarmStart warm{cold.x, cold.active_set};
  const QpSolution hot = solve_qp(p, &warm);
  EXPECT_LE(hot.iterations, 2);
  EXPECT_NEAR(objective(p, hot.x), objective(p, cold.x),
              1e-12 * (std::abs(objective(p, cold.x)) + 1.0));
}

TEST(SolveQp, InvariantUnderUniformScaling) {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int n = 8;
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = gauss(rng);
  const Eigen::MatrixXd H = a.transpose() * a + Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd g(n);
  for (int i = 0; i < n; ++i) g[i] = gauss(rng);

  const QpSolution base = solve_qp(dense_problem(H, g, {0, 1, 2, 3}));
  const double alpha = 3.7e4;
  const QpSolution scaled = solve_qp(dense_problem(alpha * H, alpha * g, {0, 1, 2, 3}));
  EXPECT_LT((base.x - scaled.x).cwiseAbs().maxCoeff(),
            1e-10 * (1.0 + base.x.cwiseAbs().maxCoeff()));
}

TEST(SolveQp, EqualityFixedVariables) {
  const int n = 3;
  Eigen::MatrixXd H(n, n);
  H << 4, 1, 0, 1, 3, 1, 0, 1, 2;
  Eigen::VectorXd g(n);
  g << -1, -2, -3;
  QpProblem p = dense_problem(H, g, {});
  p.eq_fixed = {{1, 2.0}};
  const QpSolution sol = solve_qp(p);
  EXPECT_DOUBLE_EQ(sol.x[1], 2.0);

  // oracle: eliminate x1 and solve the 2x2 system
  Eigen::MatrixXd h_rr(2, 2);
  h_rr << H(0, 0), H(0, 2), H(2, 0), H(2, 2);
  Eigen::VectorXd rhs(2);
  rhs << -(g[0] + H(0, 1) * 2.0), -(g[2] + H(2, 1) * 2.0);
  const Eigen::VectorXd x_r = h_rr.ldlt().solve(rhs);
  EXPECT_NEAR(sol.x[0], x_r[0], 1e-12 * (1.0 + std::abs(x_r[0])));
  EXPECT_NEAR(sol.x[2], x_r[1], 1e-12 * (1.0 + std::abs(x_r[1])));
}

TEST(SolveQp, IndefiniteHessianThrows) {
  Eigen::MatrixXd H(1, 1);
  H << -1.0;
  EXPECT_THROW(solve_qp(dense_problem(H, Eigen::VectorXd::Ones(1), {})),
               QpIndefiniteError);
}

TEST(SolveQp, Deterministic) {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int n = 9;
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = gauss(rng);
  const Eigen::MatrixXd H = a.transpose() * a + Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd g(n);
  for (int i = 0; i < n; ++i) g[i] = gauss(rng);
  const QpProblem p = dense_problem(H, g, {1, 3, 5, 7});
  const QpSolution s1 = solve_qp(p);
  const QpSolution s2 = solve_qp(p);
  EXPECT_TRUE((s1.x.array() == s2.x.array()).all());
  EXPECT_EQ(s1.iterations, s2.iterations);
  EXPECT_EQ(s1.active_set, s2.active_set);
}

TEST(QpJson, DumpLoadRoundTrip) {
  Eigen::MatrixXd H(2, 2);
  H << 2, -1, -1, 2;
  Eigen::VectorXd g(2);
  g << 0.5, -1.5;
  QpProblem p = dense_problem(H, g, {1});
  p.eq_fixed = {{0, 0.25}};

  std::stringstream buffer;
  dump_qp_json(p, buffer);
  const QpProblem q = load_qp_json(buffer);
  EXPECT_EQ(q.size(), p.size());
  EXPECT_EQ(q.nonneg_set, p.nonneg_set);
  EXPECT_EQ(q.eq_fixed, p.eq_fixed);
  const QpSolution sp = solve_qp(p), sq = solve_qp(q);
  EXPECT_TRUE((sp.x.array() == sq.x.array()).all());
}

// --- step QP construction -------------------------------------------------

namespace {

DiscreteOperators stiff_element_ops(const Eigen::Vector2d& direction, double velocity,
                                    double size = 0.01) {
  LoadProgram load;
  load.direction = direction;
  load.velocity = velocity;
  return assemble(delam::testutil::single_element_mesh(size, size),
                  delam::testutil::stiff_bulk_material(), load);
}

}  // namespace

TEST(BuildStepQp, ObjectiveMatchesStoredEnergyPlusSlipCost) {
  const MaterialSpec spec = delam::testutil::stiff_bulk_material();
  const DiscreteOperators ops = stiff_element_ops({0.0, 1.0}, 1e-3);
  Eigen::VectorXd zeta(1), pi_prev(2);
  zeta << 0.6;
  pi_prev << 2e-5, -1e-5;
  const double t_k = 0.03;
  const StepQp qp = build_step_qp(ops, spec, t_k, zeta, pi_prev);

  std::mt19937_64 rng(17);
  std::normal_distribution<double> gauss(0.0, 1e-5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::VectorXd z = Eigen::VectorXd::Zero(qp.problem.size());
    for (int i = 0; i < qp.n_u; ++i) z[i] = gauss(rng);
    for (const auto& [dof, value] : qp.problem.eq_fixed) z[dof] = value;
    double r1 = 0.0;
    for (int k = 0; k < qp.n_iface; ++k) {
      z[qp.p_plus_index(k)] = unit(rng) * 1e-5;
      z[qp.p_minus_index(k)] = unit(rng) * 1e-5;
      r1 += spec.sigma_yield * ops.M_C[k] *
            (z[qp.p_plus_index(k)] + z[qp.p_minus_index(k)]);
    }

    State probe;
    qp.decode(z, &probe.u, &probe.pi);
    probe.zeta = zeta;
    const double energy = stored_energy(ops, spec, t_k, probe).total();
    State base;
    base.u = Eigen::VectorXd::Zero(ops.num_dofs());
    base.pi = pi_prev;
    base.zeta = zeta;
    const double offset = stored_energy(ops, spec, t_k, base).total();

    const double qp_value = 0.5 * z.dot(qp.problem.H * z) + qp.problem.g.dot(z);
    const double expected = energy + r1 - offset;
    EXPECT_NEAR(qp_value, expected, 1e-9 * (std::abs(expected) + 1.0));
  }
}

TEST(BuildStepQp, DebondedSlipFreezesBelowYield) {
  // zeta = 0 decouples pi; kappa_H |pi_prev| <= sigma_yield keeps it frozen.
  const MaterialSpec spec = delam::testutil::stiff_bulk_material();
  const DiscreteOperators ops = stiff_element_ops({0.0, 0.0}, 0.0);
  Eigen::VectorXd zeta = Eigen::VectorXd::Zero(1);
  Eigen::VectorXd pi_prev = Eigen::VectorXd::Constant(2, 2e-5);
  ASSERT_LT(spec.kappa_H * 2e-5, spec.sigma_yield);

  const StepQp qp = build_step_qp(ops, spec, 0.0, zeta, pi_prev);
  const QpSolution sol = solve_qp(qp.problem);
  Eigen::VectorXd u, pi;
  qp.decode(sol.x, &u, &pi);
  EXPECT_NEAR(pi[0], 2e-5, 2e-5 * 1e-9);
  EXPECT_NEAR(pi[1], 2e-5, 2e-5 * 1e-9);
}

TEST(BuildStepQp, DebondedSlipShrinksToYieldPoint) {
  // kappa_H |pi_prev| > sigma_yield relaxes to sigma_yield / kappa_H.
  const MaterialSpec spec = delam::testutil::stiff_bulk_material();
  const DiscreteOperators ops = stiff_element_ops({0.0, 0.0}, 0.0);
  Eigen::VectorXd zeta = Eigen::VectorXd::Zero(1);
  const double target = spec.sigma_yield / spec.kappa_H;  // 5.04e-4
  Eigen::VectorXd pi_prev = Eigen::VectorXd::Constant(2, 1e-3);
  ASSERT_GT(spec.kappa_H * 1e-3, spec.sigma_yield);

  const StepQp qp = build_step_qp(ops, spec, 0.0, zeta, pi_prev);
  const QpSolution sol = solve_qp(qp.problem);
  Eigen::VectorXd u, pi;
  qp.decode(sol.x, &u, &pi);
  EXPECT_NEAR(pi[0], target, target * 1e-9);
  EXPECT_NEAR(pi[1], target, target * 1e-9);
}

TEST(BuildStepQp, BondedBelowOnsetMatchesLinearSolve) {
  // jump_T = 4e-5 < sigma_yield/kappa_T = 5.6e-5: no slip; u solves the
  // Signorini-free linear system.
  const MaterialSpec spec = delam::testutil::stiff_bulk_material();
  const DiscreteOperators ops = stiff_element_ops({1.0, 0.0}, 1e-3);
  Eigen::VectorXd zeta = Eigen::VectorXd::Ones(1);
  Eigen::VectorXd pi_prev = Eigen::VectorXd::Zero(2);
  const double t_k = 0.04;  // prescribed jump 4e-5

  const StepQp qp = build_step_qp(ops, spec, t_k, zeta, pi_prev);
  const QpSolution sol = solve_qp(qp.problem);
  Eigen::VectorXd u, pi;
  qp.decode(sol.x, &u, &pi);
  EXPECT_NEAR(pi.cwiseAbs().maxCoeff(), 0.0, 1e-15);

  // unconstrained oracle on the displacement block
  Eigen::MatrixXd H = Eigen::MatrixXd(qp.problem.H);
  Eigen::VectorXd g = qp.problem.g;
  std::vector<int> free_idx;
  std::vector<char> fixed(qp.problem.size(), 0);
  for (const auto& [dof, value] : qp.problem.eq_fixed) fixed[dof] = 1;
  for (int i = 0; i < qp.n_u; ++i)
    if (!fixed[i]) free_idx.push_back(i);
  Eigen::MatrixXd h_ff(free_idx.size(), free_idx.size());
  Eigen::VectorXd g_f(free_idx.size());
  for (std::size_t a = 0; a < free_idx.size(); ++a) {
    g_f[a] = -g[free_idx[a]];
    for (std::size_t b = 0; b < free_idx.size(); ++b)
      h_ff(a, b) = H(free_idx[a], free_idx[b]);
  }
  const Eigen::VectorXd z_f = h_ff.ldlt().solve(g_f);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(qp.problem.size());
  for (std::size_t a = 0; a < free_idx.size(); ++a) z[free_idx[a]] = z_f[a];
  Eigen::VectorXd u_oracle, pi_oracle;
  qp.decode(z, &u_oracle, &pi_oracle);
  EXPECT_LT((u - u_oracle).cwiseAbs().maxCoeff(),
            1e-9 * (1.0 + u_oracle.cwiseAbs().maxCoeff()));
}

TEST(BuildStepQp, PlasticFlowActivatesAboveOnset) {
  // jump_T = 6e-5 > 5.6e-5: tangential traction 4.5 MPa exceeds 4.2 MPa.
  const MaterialSpec spec = delam::testutil::stiff_bulk_material();
  const DiscreteOperators ops = stiff_element_ops({1.0, 0.0}, 1e-3);
  Eigen::VectorXd zeta = Eigen::VectorXd::Ones(1);
  Eigen::VectorXd pi_prev = Eigen::VectorXd::Zero(2);

  const StepQp qp = build_step_qp(ops, spec, 0.06, zeta, pi_prev);
  const QpSolution sol = solve_qp(qp.problem);
  Eigen::VectorXd u, pi;
  qp.decode(sol.x, &u, &pi);
  EXPECT_GT(pi.minCoeff(), 0.0);
}

TEST(BuildStepQp, TwoBodyMatchedRejected) {
  auto [mesh, layout] = delam::testutil::two_body_mesh();
  const DiscreteOperators ops =
      assemble(mesh, delam::testutil::paper_material(), LoadProgram{}, layout);
  Eigen::VectorXd zeta = Eigen::VectorXd::Ones(1);
  Eigen::VectorXd pi_prev = Eigen::VectorXd::Zero(2);
  EXPECT_THROW(build_step_qp(ops, delam::testutil::paper_material(), 0.0, zeta, pi_prev),
               std::invalid_argument);
}
