#include "delam/qp.hpp"

#include <Eigen/SparseCholesky>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "sparse_util.hpp"

namespace delam {

namespace {

constexpr double kFeasTol = 1e-12;

double objective(const QpProblem& p, const Eigen::VectorXd& x) {
  return 0.5 * x.dot(p.H * x) + p.g.dot(x);
}

}  // namespace

QpSolution solve_qp(const QpProblem& p, const QpWarmStart* warm_start, double tol_kkt) {
  const int n = p.size();
  if (p.H.rows() != n || p.H.cols() != n)
    throw std::invalid_argument("solve_qp: H/g dimension mismatch");

  std::vector<char> is_fixed(n, 0), is_nonneg(n, 0), in_working(n, 0);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  for (const auto& [i, value] : p.eq_fixed) {
    is_fixed[i] = 1;
    x[i] = value;
  }
  for (int i : p.nonneg_set)
    if (!is_fixed[i]) is_nonneg[i] = 1;  // equality wins when both apply

  if (warm_start) {
    for (int i = 0; i < n; ++i)
      if (!is_fixed[i]) x[i] = warm_start->x.size() == n ? warm_start->x[i] : 0.0;
    for (int i : warm_start->active_set)
      if (i >= 0 && i < n && is_nonneg[i]) in_working[i] = 1;
  }
  for (int i = 0; i < n; ++i) {
    if (!is_nonneg[i]) continue;
    if (in_working[i] || x[i] <= 0.0) {
      x[i] = 0.0;
      in_working[i] = 1;
    }
  }

  const double g_scale = p.g.size() ? std::max(p.g.cwiseAbs().maxCoeff(), 0.0) : 0.0;
  // Per-variable stationarity scale |g_i| + (|H| |x|)_i: blocks of very
  // different stiffness (bulk dofs vs slip variables) get matching dual
  // tolerances instead of one global cutoff.
  Eigen::SparseMatrix<double> h_abs = p.H;
  for (int c = 0; c < h_abs.outerSize(); ++c)
    for (Eigen::SparseMatrix<double>::InnerIterator it(h_abs, c); it; ++it)
      it.valueRef() = std::abs(it.value());
  const auto dual_tolerance = [&](const Eigen::VectorXd& row_scale, int i) {
    return tol_kkt * (std::abs(p.g[i]) + row_scale[i]) + 1e-300;
  };

  QpSolution sol;
  sol.objective_trace.push_back(objective(p, x));

  const int max_iterations = 3 * n + 100;
  std::vector<int> local(n);
  int passes = 0;
  bool converged = false;
  while (passes < max_iterations && !converged) {
    ++passes;
    // Reduced Newton step on the free variables.
    int n_free = 0;
    for (int i = 0; i < n; ++i)
      local[i] = (is_fixed[i] || in_working[i]) ? -1 : n_free++;

    Eigen::VectorXd grad = p.H * x + p.g;
    Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
    if (n_free > 0) {
      Eigen::SparseMatrix<double> h_ff = detail::principal_submatrix(p.H, local, n_free);
      Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> chol(h_ff);
      if (chol.info() != Eigen::Success)
        throw QpIndefiniteError("solve_qp: Hessian not positive definite on the free subspace");
      Eigen::VectorXd rhs(n_free);
      for (int i = 0; i < n; ++i)
        if (local[i] >= 0) rhs[local[i]] = -grad[i];
      const Eigen::VectorXd d_free = chol.solve(rhs);
      for (int i = 0; i < n; ++i)
        if (local[i] >= 0) d[i] = d_free[local[i]];
    }

    const double step_tol = 1e-13 * std::max(1.0, x.cwiseAbs().maxCoeff());
    if (d.cwiseAbs().maxCoeff() <= step_tol) {
      // At the reduced optimum: check multipliers, release one bound at most.
      // Most negative multiplier first, relative to its own row scale;
      // equal violations resolve to the lowest index.
      const Eigen::VectorXd row_scale = h_abs * x.cwiseAbs();
      int release = -1;
      double worst = 0.0;
      for (int i = 0; i < n; ++i) {
        if (!in_working[i]) continue;
        const double tol_i = dual_tolerance(row_scale, i);
        if (grad[i] >= -tol_i) continue;
        const double violation = -grad[i] / (std::abs(p.g[i]) + row_scale[i] + 1e-300);
        if (violation > worst) {
          worst = violation;
          release = i;
        }
      }
      if (release < 0) {
        converged = true;
        continue;
      }
      in_working[release] = 0;
      sol.objective_trace.push_back(objective(p, x));
      continue;
    }

    // Ratio test toward the reduced minimizer; lowest index blocks first.
    double alpha = 1.0;
    int blocking = -1;
    for (int i = 0; i < n; ++i) {
      if (!is_nonneg[i] || in_working[i] || d[i] >= 0.0) continue;
      const double a = -x[i] / d[i];
      if (a < alpha) {
        alpha = a;
        blocking = i;
      }
    }
    x += alpha * d;
    if (blocking >= 0) {
      x[blocking] = 0.0;
      in_working[blocking] = 1;
    }
    sol.objective_trace.push_back(objective(p, x));
  }

  sol.x = x;
  sol.iterations = passes;
  sol.status = converged ? QpStatus::Converged : QpStatus::MaxIterations;

  const Eigen::VectorXd grad = p.H * x + p.g;
  double stationarity = 0.0, complementarity = 0.0;
  for (int i = 0; i < n; ++i) {
    if (is_fixed[i]) continue;
    if (is_nonneg[i]) {
      if (in_working[i]) {
        stationarity = std::max(stationarity, std::max(0.0, -grad[i]));
        sol.active_set.push_back(i);
      } else {
        stationarity = std::max(stationarity, std::abs(grad[i]));
      }
      complementarity = std::max(complementarity, std::abs(x[i] * grad[i]));
    } else {
      stationarity = std::max(stationarity, std::abs(grad[i]));
    }
  }
  sol.kkt_residual = stationarity / (g_scale > 0.0 ? g_scale : 1.0);
  sol.complementarity_residual = complementarity;

  for (int i = 0; i < n; ++i)
    if (is_nonneg[i] && x[i] < -kFeasTol)
      throw std::runtime_error("solve_qp: infeasible iterate (internal error)");
  return sol;
}

void dump_qp_json(const QpProblem& p, std::ostream& os) {
  nlohmann::json j;
  j["format"] = "delam-qp";
  j["version"] = 1;
  j["n"] = p.size();
  nlohmann::json rows = nlohmann::json::array(), cols = nlohmann::json::array(),
                 vals = nlohmann::json::array();
  for (int c = 0; c < p.H.outerSize(); ++c) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(p.H, c); it; ++it) {
      rows.push_back(static_cast<int>(it.row()));
      cols.push_back(static_cast<int>(it.col()));
      vals.push_back(it.value());
    }
  }
  j["H"] = {{"rows", rows}, {"cols", cols}, {"values", vals}};
  j["g"] = std::vector<double>(p.g.data(), p.g.data() + p.g.size());
  j["nonneg_set"] = p.nonneg_set;
  nlohmann::json eq = nlohmann::json::array();
  for (const auto& [i, v] : p.eq_fixed) eq.push_back({i, v});
  j["eq_fixed"] = eq;
  os << j.dump(2);
}

QpProblem load_qp_json(std::istream& is) {
  nlohmann::json j;
  is >> j;
  if (j.value("format", "") != std::string("delam-qp"))
    throw std::invalid_argument("load_qp_json: not a QP dump");
  QpProblem p;
  const int n = j.at("n").get<int>();
  const auto& rows = j.at("H").at("rows");
  const auto& cols = j.at("H").at("cols");
  const auto& vals = j.at("H").at("values");
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t k = 0; k < rows.size(); ++k)
    triplets.emplace_back(rows[k].get<int>(), cols[k].get<int>(), vals[k].get<double>());
  p.H.resize(n, n);
  p.H.setFromTriplets(triplets.begin(), triplets.end());
  p.g.resize(n);
  for (int i = 0; i < n; ++i) p.g[i] = j.at("g")[i].get<double>();
  p.nonneg_set = j.at("nonneg_set").get<std::vector<int>>();
  for (const auto& pair : j.at("eq_fixed"))
    p.eq_fixed.emplace_back(pair[0].get<int>(), pair[1].get<double>());
  return p;
}

void StepQp::decode(const Eigen::VectorXd& z, Eigen::VectorXd* u, Eigen::VectorXd* pi) const {
  if (u) *u = ops->rotation * z.head(n_u);
  if (pi) {
    *pi = pi_prev;
    *pi += z.segment(n_u, n_iface);
    *pi -= z.segment(n_u + n_iface, n_iface);
  }
}

Eigen::VectorXd StepQp::encode_u(const Eigen::VectorXd& u) const {
  return ops->rotation.transpose() * u;
}

StepQp build_step_qp(const DiscreteOperators& ops, const MaterialSpec& spec, double t_k,
                     const Eigen::VectorXd& zeta_prev, const Eigen::VectorXd& pi_prev) {
  if (ops.layout.mode == InterfaceLayout::Mode::TwoBodyMatched)
    throw std::invalid_argument(
        "build_step_qp: stepping supports the RigidObstacle layout only");
  if (zeta_prev.size() != ops.num_interface_edges() ||
      pi_prev.size() != ops.num_interface_nodes())
    throw std::invalid_argument("build_step_qp: field dimensions do not match operators");

  StepQp qp;
  qp.n_u = ops.num_dofs();
  qp.n_iface = ops.num_interface_nodes();
  qp.pi_prev = pi_prev;
  qp.ops = &ops;

  const int m = qp.n_iface;
  const int n_total = qp.n_u + 2 * m;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(n_total);
  g.head(qp.n_u) = -t_k * ops.f1_rate_rot;

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(ops.K_rot.nonZeros() + 64 * ops.num_interface_edges());
  for (int c = 0; c < ops.K_rot.outerSize(); ++c)
    for (Eigen::SparseMatrix<double>::InnerIterator it(ops.K_rot, c); it; ++it)
      triplets.emplace_back(it.row(), it.col(), it.value());

  // Rotated dof layout per interface node k at vertex v: z[2v] tangential,
  // z[2v+1] normal, so jump_T(k) = z[2v] and jump_N(k) = z[2v+1].
  auto tangential_dof = [&](int k) { return 2 * ops.mesh.interface_nodes[k]; };
  auto normal_dof = [&](int k) { return 2 * ops.mesh.interface_nodes[k] + 1; };

  // rank-one term coef * (v.z - c)^2 / 2 -> H += coef v v^T, g += -coef c v
  auto add_affine_square = [&](const std::vector<std::pair<int, double>>& v, double coef,
                               double constant) {
    for (const auto& [i, vi] : v) {
      for (const auto& [j, vj] : v) triplets.emplace_back(i, j, coef * vi * vj);
      g[i] -= coef * constant * vi;
    }
  };

  for (int e = 0; e < ops.num_interface_edges(); ++e) {
    const double w = ops.A_e[e];
    const double zeta = zeta_prev[e];
    const int a = e, b = e + 1;
    const double pi_prev_mid = 0.5 * (pi_prev[a] + pi_prev[b]);

    if (zeta != 0.0) {
      add_affine_square({{normal_dof(a), 0.5}, {normal_dof(b), 0.5}},
                        w * zeta * spec.kappa_N, 0.0);
      // jT_mid - pi_mid with pi = pi_prev + p+ - p-
      add_affine_square({{tangential_dof(a), 0.5},
                         {tangential_dof(b), 0.5},
                         {qp.p_plus_index(a), -0.5},
                         {qp.p_plus_index(b), -0.5},
                         {qp.p_minus_index(a), 0.5},
                         {qp.p_minus_index(b), 0.5}},
                        w * zeta * spec.kappa_T, pi_prev_mid);
    }
  }

  // Hardening on lumped node weights keeps the pi block positive definite.
  for (int i = 0; i < m; ++i)
    add_affine_square({{qp.p_plus_index(i), 1.0}, {qp.p_minus_index(i), -1.0}},
                      spec.kappa_H * ops.M_C[i], -pi_prev[i]);

  if (spec.kappa_G != 0.0) {
    const Eigen::VectorXd kg_pi_prev = spec.kappa_G * (ops.K_G * pi_prev);
    for (int c = 0; c < ops.K_G.outerSize(); ++c) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(ops.K_G, c); it; ++it) {
        const double v = spec.kappa_G * it.value();
        const int i = static_cast<int>(it.row()), j = static_cast<int>(it.col());
        triplets.emplace_back(qp.p_plus_index(i), qp.p_plus_index(j), v);
        triplets.emplace_back(qp.p_minus_index(i), qp.p_minus_index(j), v);
        triplets.emplace_back(qp.p_plus_index(i), qp.p_minus_index(j), -v);
        triplets.emplace_back(qp.p_minus_index(i), qp.p_plus_index(j), -v);
      }
    }
    for (int i = 0; i < m; ++i) {
      g[qp.p_plus_index(i)] += kg_pi_prev[i];
      g[qp.p_minus_index(i)] -= kg_pi_prev[i];
    }
  }

  // L1 slip cost sigma_yield * int |pi - pi_prev| dS with lumped node weights.
  for (int i = 0; i < m; ++i) {
    const double weight = spec.sigma_yield * ops.M_C[i];
    g[qp.p_plus_index(i)] += weight;
    g[qp.p_minus_index(i)] += weight;
  }

  qp.problem.H.resize(n_total, n_total);
  qp.problem.H.setFromTriplets(triplets.begin(), triplets.end());
  qp.problem.g = std::move(g);

  for (int k = 0; k < m; ++k) qp.problem.nonneg_set.push_back(normal_dof(k));
  for (int i = 0; i < m; ++i) qp.problem.nonneg_set.push_back(qp.p_plus_index(i));
  for (int i = 0; i < m; ++i) qp.problem.nonneg_set.push_back(qp.p_minus_index(i));
  std::sort(qp.problem.nonneg_set.begin(), qp.problem.nonneg_set.end());

  for (int dof : ops.dirichlet_dofs) qp.problem.eq_fixed.emplace_back(dof, 0.0);

  return qp;
}

}  // namespace delam
