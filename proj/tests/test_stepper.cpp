#include "delam/stepper.hpp"

#include <gtest/gtest.h>

#include <random>

#include "delam/config.hpp"
#include "delam/diagnostics.hpp"
#include "test_support.hpp"

using namespace delam;

namespace {

DiscreteOperators stiff_element_ops(const Eigen::Vector2d& direction, double velocity,
                                    double size = 0.01) {
  LoadProgram load;
  load.direction = direction;
  load.velocity = velocity;
  return assemble(testutil::single_element_mesh(size, size),
                  testutil::stiff_bulk_material(), load);
}

struct RampResult {
  History history;
  int first_debond = -1;  // first step with any zeta = 0
  int slip_onset = -1;    // first step with any |pi| > 0
};

RampResult run_ramp(const DiscreteOperators& ops, const MaterialSpec& spec, double tau,
                    int n_steps) {
  RampResult result;
  result.history.states.push_back(initial_state(ops, spec));
  std::optional<QpWarmStart> warm;
  for (int k = 1; k <= n_steps; ++k) {
    const State next = step(result.history.states.back(), tau, ops, spec, &warm);
    if (result.slip_onset < 0 && next.pi.cwiseAbs().maxCoeff() > 1e-15)
      result.slip_onset = k;
    if (result.first_debond < 0 && next.zeta.minCoeff() < 0.5) result.first_debond = k;
    result.history.states.push_back(next);
    if (result.first_debond > 0 && k >= result.first_debond + 2) break;
  }
  return result;
}

}  // namespace

TEST(Step, ZeroLoadingKeepsPristineState) {
  const MaterialSpec spec = testutil::paper_material();
  const DiscreteOperators ops =
      assemble(testutil::single_element_mesh(), spec, LoadProgram{});
  const State s0 = initial_state(ops, spec);
  EXPECT_EQ(s0.u.cwiseAbs().maxCoeff(), 0.0);
  const State s1 = step(s0, 0.01, ops, spec);
  EXPECT_EQ(s1.u.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(s1.pi.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(s1.zeta.minCoeff(), 1.0);
  EXPECT_DOUBLE_EQ(s1.t, 0.01);
}

TEST(Step, ModeIDebondAtCriticalOpening) {
  // Normal ramp: debond when jump_N crosses sqrt(2 a_I / kappa_N) = 5e-5 m,
  // within one load increment.
  const MaterialSpec spec = testutil::stiff_bulk_material();
  const double velocity = 1e-3, tau = 2e-3;  // increment 2e-6 m
  const DiscreteOperators ops = stiff_element_ops({0.0, 1.0}, velocity);
  const RampResult ramp = run_ramp(ops, spec, tau, 60);
  ASSERT_GT(ramp.first_debond, 0);

  const double increment = velocity * tau;
  const State& at_debond = ramp.history.states[ramp.first_debond];
  const State& before = ramp.history.states[ramp.first_debond - 1];
  const Eigen::VectorXd jn_at = ops.J_N * at_debond.u;
  const Eigen::VectorXd jn_before = ops.J_N * before.u;
  const double critical = 5.0e-5;
  EXPECT_GE(jn_at.maxCoeff(), critical - increment);
  EXPECT_LE(jn_before.maxCoeff(), critical + increment);
  EXPECT_NEAR(jn_at.maxCoeff(), critical, increment);
}

TEST(Step, ModeIISlipOnsetBeforeDebond) {
  // Tangential ramp: slip starts when |jump_T| crosses sigma_yield / kappa_T
  // = 5.6e-5 m, before any debonding.
  const MaterialSpec spec = testutil::stiff_bulk_material();
  const double velocity = 1e-3, tau = 2e-3;  // increment 2e-6 m
  const DiscreteOperators ops = stiff_element_ops({1.0, 0.0}, velocity);
  const RampResult ramp = run_ramp(ops, spec, tau, 140);
  ASSERT_GT(ramp.slip_onset, 0);

  const double increment = velocity * tau;
  const double onset = spec.sigma_yield / spec.kappa_T;  // 5.6e-5
  const State& at_onset = ramp.history.states[ramp.slip_onset];
  const State& before = ramp.history.states[ramp.slip_onset - 1];
  const Eigen::VectorXd jt_at = ops.J_T * at_onset.u;
  const Eigen::VectorXd jt_before = ops.J_T * before.u;
  EXPECT_NEAR(jt_at.maxCoeff(), onset, increment);
  EXPECT_LE(jt_before.maxCoeff(), onset + increment);
  // slip activates strictly before total damage
  EXPECT_EQ(at_onset.zeta.minCoeff(), 1.0);
  EXPECT_TRUE(ramp.first_debond < 0 || ramp.first_debond > ramp.slip_onset);
}

TEST(ZetaUpdate, ThresholdRule) {
  const MaterialSpec spec = testutil::paper_material();
  const DiscreteOperators ops =
      assemble(testutil::single_element_mesh(1.0, 1.0), spec, LoadProgram{});
  Eigen::VectorXd zeta_prev = Eigen::VectorXd::Constant(1, 0.7);
  Eigen::VectorXd pi = Eigen::VectorXd::Zero(2);

  // gap density 200 J/m^2 > a_I: drops to zero
  Eigen::VectorXd u = Eigen::VectorXd::Zero(ops.num_dofs());
  const double jn_hot = std::sqrt(2.0 * 200.0 / spec.kappa_N);
  u[2 * 0 + 1] = jn_hot;
  u[2 * 1 + 1] = jn_hot;
  EXPECT_EQ(zeta_update(u, pi, zeta_prev, ops, spec)[0], 0.0);

  // gap density 100 J/m^2 < a_I: keeps previous value
  const double jn_cool = std::sqrt(2.0 * 100.0 / spec.kappa_N);
  u[2 * 0 + 1] = jn_cool;
  u[2 * 1 + 1] = jn_cool;
  EXPECT_EQ(zeta_update(u, pi, zeta_prev, ops, spec)[0], 0.7);
}

TEST(ZetaUpdate, ExactTieKeepsZeta) {
  // Dyadic numbers make the tie g_e == a_I exact in floating point.
  MaterialSpec spec = testutil::paper_material();
  spec.kappa_N = 2.0;
  spec.a_I = 1.0;
  const DiscreteOperators ops =
      assemble(testutil::single_element_mesh(1.0, 1.0), spec, LoadProgram{});
  Eigen::VectorXd zeta_prev = Eigen::VectorXd::Constant(1, 0.5);
  Eigen::VectorXd pi = Eigen::VectorXd::Zero(2);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(ops.num_dofs());
  u[2 * 0 + 1] = 1.0;
  u[2 * 1 + 1] = 1.0;  // g = 1/2 * 2 * 1 = 1 = a_I exactly
  EXPECT_EQ(zeta_update(u, pi, zeta_prev, ops, spec)[0], 0.5);
}

TEST(RunOn, ZeroHorizonGivesSingleState) {
  const MaterialSpec spec = testutil::paper_material();
  const DiscreteOperators ops =
      assemble(testutil::single_element_mesh(), spec, LoadProgram{});
  const History history = run_on(ops, spec, 0.01, 0.0);
  EXPECT_EQ(history.states.size(), 1u);
  EXPECT_DOUBLE_EQ(history.states.front().t, 0.0);
}

TEST(RunOn, StopsAfterFullDebondPlusExtraSteps) {
  const RunConfig config = preset_paper_pull_push();
  const History history = run(config);
  int debond_index = -1;
  for (std::size_t k = 0; k < history.states.size(); ++k) {
    if (history.states[k].zeta.maxCoeff() < 1e-12) {
      debond_index = static_cast<int>(k);
      break;
    }
  }
  ASSERT_GT(debond_index, 0);
  EXPECT_EQ(history.states.size(), static_cast<std::size_t>(debond_index) + 1 +
                                       config.post_debond_steps);
}

TEST(RunOn, IrreversibilityAndFeasibility) {
  RunConfig config = preset_paper_pull_push();
  config.T_s = 0.3;
  const History history = run(config);
  for (std::size_t k = 1; k < history.states.size(); ++k) {
    const auto& prev = history.states[k - 1].zeta;
    const auto& cur = history.states[k].zeta;
    for (int e = 0; e < cur.size(); ++e) EXPECT_LE(cur[e], prev[e]);
    EXPECT_NEAR(history.states[k].t - history.states[k - 1].t, config.tau_s, 1e-12);
  }
}

TEST(RunOn, PerStepEnergyInequality) {
  RunConfig config = preset_paper_pull_push();
  config.T_s = 0.36;
  config.stop_on_full_debond = false;
  const MaterialSpec spec = config.material();
  const Mesh2D mesh =
      build_rectangle_mesh(config.length(), config.height(), config.glued_fraction,
                           config.h_target());
  LoadProgram load;
  load.direction = config.unit_direction();
  load.velocity = config.velocity();
  const DiscreteOperators ops = assemble(mesh, spec, load);
  const History history = run_on(ops, spec, config.tau(), config.horizon(), 3, false);

  for (std::size_t k = 1; k < history.states.size(); ++k) {
    const State& prev = history.states[k - 1];
    const State& cur = history.states[k];
    const double e_new = stored_energy(ops, spec, cur.t, cur).total();
    const double e_old = stored_energy(ops, spec, prev.t, prev).total();
    double r0 = 0.0, r1 = 0.0;
    for (int e = 0; e < cur.zeta.size(); ++e)
      r0 += spec.a_I * ops.A_e[e] * (prev.zeta[e] - cur.zeta[e]);
    for (int i = 0; i < cur.pi.size(); ++i)
      r1 += spec.sigma_yield * ops.M_C[i] * std::abs(cur.pi[i] - prev.pi[i]);
    const double work_inc = -(cur.t - prev.t) * ops.f1_rate.dot(prev.u);
    const double rhs = e_old + work_inc;
    const double slack = 1e-8 * std::max({1.0, std::abs(rhs), std::abs(e_new)});
    EXPECT_LE(e_new + r0 + r1, rhs + slack) << "step " << k;
  }
}

TEST(RunOn, MinimizerAuditAgainstRandomCompetitors) {
  // Direct test of the two discrete semi-stabilities: the accepted (u, pi)
  // beats 50 random admissible perturbations of the step QP objective, and
  // zeta beats random admissible damage competitors.
  RunConfig config = preset_paper_pull_push();
  config.T_s = 0.18;
  const MaterialSpec spec = config.material();
  const Mesh2D mesh =
      build_rectangle_mesh(config.length(), config.height(), config.glued_fraction,
                           config.h_target());
  LoadProgram load;
  load.direction = config.unit_direction();
  load.velocity = config.velocity();
  const DiscreteOperators ops = assemble(mesh, spec, load);
  const History history = run_on(ops, spec, config.tau(), config.horizon(), 3, false);
  ASSERT_GE(history.states.size(), 12u);

  std::mt19937_64 rng(123);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (std::size_t k : {std::size_t(5), history.states.size() - 1}) {
    const State& prev = history.states[k - 1];
    const State& cur = history.states[k];

    State probe = cur;
    const double base = stored_energy(ops, spec, cur.t, probe).total();
    double base_r1 = 0.0;
    for (int i = 0; i < cur.pi.size(); ++i)
      base_r1 += spec.sigma_yield * ops.M_C[i] * std::abs(cur.pi[i] - prev.pi[i]);

    const double u_scale = std::max(1e-7, cur.u.cwiseAbs().maxCoeff() * 0.05);
    const double pi_scale = std::max(1e-7, cur.pi.cwiseAbs().maxCoeff() * 0.2);
    for (int sample = 0; sample < 50; ++sample) {
      State competitor = cur;
      competitor.zeta = prev.zeta;  // objective (4.1a) freezes zeta
      for (int i = 0; i < competitor.u.size(); ++i)
        competitor.u[i] += u_scale * gauss(rng);
      for (int dof : ops.dirichlet_dofs) competitor.u[dof] = 0.0;
      for (int idx = 0; idx < ops.num_interface_nodes(); ++idx) {
        const int v = ops.mesh.interface_nodes[idx];
        competitor.u[2 * v + 1] = std::max(competitor.u[2 * v + 1], 0.0);
      }
      for (int i = 0; i < competitor.pi.size(); ++i)
        competitor.pi[i] += pi_scale * gauss(rng);

      double r1 = 0.0;
      for (int i = 0; i < competitor.pi.size(); ++i)
        r1 += spec.sigma_yield * ops.M_C[i] * std::abs(competitor.pi[i] - prev.pi[i]);
      State frozen = cur;
      frozen.zeta = prev.zeta;
      const double base_frozen = stored_energy(ops, spec, cur.t, frozen).total();
      const double value = stored_energy(ops, spec, cur.t, competitor).total() + r1;
      EXPECT_GE(value, base_frozen + base_r1 - 1e-8 * (std::abs(value) + 1.0));
    }

    // (4.1b): zeta competitors below the accepted zeta
    const Eigen::VectorXd gap = gap_energy_density(ops, spec, cur.u, cur.pi);
    for (int sample = 0; sample < 50; ++sample) {
      double margin = 0.0;
      for (int e = 0; e < cur.zeta.size(); ++e) {
        const double zeta_tilde = cur.zeta[e] * unit(rng);
        margin += ops.A_e[e] * (cur.zeta[e] - zeta_tilde) * (spec.a_I - gap[e]);
      }
      EXPECT_GE(margin, -1e-8 * (std::abs(base) + 1.0));
    }
  }
}

TEST(RunOn, AprioriBoundsStableUnderRefinement) {
  // Discrete a-priori estimates: energy norm of u and the total variations
  // of zeta and pi at (tau/2, h/2) stay within 2x of the coarse run.
  auto measures = [](double scale) {
    RunConfig config = preset_paper_pull_push();
    config.tau_s *= scale;
    config.h_mm *= scale;
    config.T_s = 0.3;
    const MaterialSpec spec = config.material();
    const Mesh2D mesh =
        build_rectangle_mesh(config.length(), config.height(), config.glued_fraction,
                             config.h_target());
    LoadProgram load;
    load.direction = config.unit_direction();
    load.velocity = config.velocity();
    const DiscreteOperators ops = assemble(mesh, spec, load);
    const History history = run_on(ops, spec, config.tau(), config.horizon(), 3, false);

    double u_norm = 0.0, tv_zeta = 0.0, tv_pi = 0.0, pi_norm = 0.0;
    for (std::size_t k = 0; k < history.states.size(); ++k) {
      const State& s = history.states[k];
      u_norm = std::max(u_norm, std::sqrt(s.u.dot(ops.K_bulk * s.u)));
      pi_norm = std::max(pi_norm, s.pi.cwiseAbs().maxCoeff());
      if (k == 0) continue;
      const State& p = history.states[k - 1];
      for (int e = 0; e < s.zeta.size(); ++e)
        tv_zeta += ops.A_e[e] * std::abs(s.zeta[e] - p.zeta[e]);
      for (int i = 0; i < s.pi.size(); ++i)
        tv_pi += ops.M_C[i] * std::abs(s.pi[i] - p.pi[i]);
    }
    return std::array<double, 4>{u_norm, tv_zeta, tv_pi, pi_norm};
  };

  const auto coarse = measures(1.0);
  const auto fine = measures(0.5);
  for (int q = 0; q < 4; ++q) {
    EXPECT_LE(fine[q], 2.0 * coarse[q] + 1e-9) << "quantity " << q;
    EXPECT_GE(fine[q], coarse[q] / 2.0 - 1e-9) << "quantity " << q;
  }
}
