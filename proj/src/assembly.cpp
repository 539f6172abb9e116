#include "delam/assembly.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cstdlib>
#include <stdexcept>
#include <thread>
#include <vector>

#include "sparse_util.hpp"

namespace delam {

namespace {

int assembly_threads() {
  int n = 1;
  if (const char* env = std::getenv("DELAM_THREADS")) {
    n = std::atoi(env);
    if (n < 1) n = 1;
  }
  const int hw = static_cast<int>(std::thread::hardware_concurrency());
  return std::min(n, std::max(1, hw));
}

using Matrix6d = Eigen::Matrix<double, 6, 6>;

// P1 (CST) plane-strain element stiffness, A * B^T D B.
Matrix6d element_stiffness(const Eigen::Vector2d& p1, const Eigen::Vector2d& p2,
                           const Eigen::Vector2d& p3, const ElasticityTensor& c) {
  const double two_a = (p2.x() - p1.x()) * (p3.y() - p1.y()) -
                       (p2.y() - p1.y()) * (p3.x() - p1.x());
  const double area = 0.5 * two_a;
  const double b[3] = {(p2.y() - p3.y()) / two_a, (p3.y() - p1.y()) / two_a,
                       (p1.y() - p2.y()) / two_a};
  const double cx[3] = {(p3.x() - p2.x()) / two_a, (p1.x() - p3.x()) / two_a,
                        (p2.x() - p1.x()) / two_a};

  Eigen::Matrix<double, 3, 6> B = Eigen::Matrix<double, 3, 6>::Zero();
  for (int i = 0; i < 3; ++i) {
    B(0, 2 * i) = b[i];
    B(1, 2 * i + 1) = cx[i];
    B(2, 2 * i) = cx[i];
    B(2, 2 * i + 1) = b[i];
  }
  Eigen::Matrix3d D = Eigen::Matrix3d::Zero();
  D(0, 0) = D(1, 1) = c.lambda + 2.0 * c.mu;
  D(0, 1) = D(1, 0) = c.lambda;
  D(2, 2) = c.mu;
  return area * B.transpose() * D * B;
}

// Solves K x = rhs with the listed dofs fixed; throws if the constrained
// stiffness fails to factorize.
Eigen::VectorXd constrained_solve(const Eigen::SparseMatrix<double>& K,
                                  const Eigen::VectorXd& rhs,
                                  const std::vector<std::pair<int, double>>& fixed) {
  const int n = static_cast<int>(K.rows());
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  std::vector<int> local(n, 0);
  for (const auto& [dof, value] : fixed) {
    x[dof] = value;
    local[dof] = -1;
  }
  int n_free = 0;
  for (int i = 0; i < n; ++i)
    if (local[i] >= 0) local[i] = n_free++;
  if (n_free == 0) return x;

  Eigen::VectorXd b = rhs - K * x;
  Eigen::VectorXd b_free(n_free);
  for (int i = 0; i < n; ++i)
    if (local[i] >= 0) b_free[local[i]] = b[i];

  Eigen::SparseMatrix<double> K_ff = detail::principal_submatrix(K, local, n_free);
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> chol(K_ff);
  if (chol.info() != Eigen::Success)
    throw std::runtime_error(
        "constrained stiffness is singular (mesh/boundary tagging defect)");
  Eigen::VectorXd x_free = chol.solve(b_free);
  for (int i = 0; i < n; ++i)
    if (local[i] >= 0) x[i] = x_free[local[i]];
  return x;
}

struct MidpointSample {
  double jn, jt, pi;
};

MidpointSample edge_midpoint(const Eigen::VectorXd& jn, const Eigen::VectorXd& jt,
                             const Eigen::VectorXd& pi, int e) {
  return {0.5 * (jn[e] + jn[e + 1]), 0.5 * (jt[e] + jt[e + 1]),
          0.5 * (pi[e] + pi[e + 1])};
}

}  // namespace

DiscreteOperators assemble(const Mesh2D& mesh, const MaterialSpec& spec,
                           const LoadProgram& load, const InterfaceLayout& layout) {
  mesh.validate();
  layout.validate(mesh);

  DiscreteOperators ops;
  ops.mesh = mesh;
  ops.layout = layout;
  ops.load = load;

  const int n = mesh.num_vertices();
  const int n_dofs = 2 * n;
  const int n_tri = mesh.num_triangles();
  const ElasticityTensor c = elasticity_tensor(spec);

  // Element matrices in parallel, accumulation in fixed element order.
  std::vector<Matrix6d> element_k(n_tri);
  const int threads = assembly_threads();
  auto fill_range = [&](int begin, int end) {
    for (int t = begin; t < end; ++t) {
      const auto& tri = mesh.triangles[t];
      element_k[t] = element_stiffness(mesh.vertices[tri[0]], mesh.vertices[tri[1]],
                                       mesh.vertices[tri[2]], c);
    }
  };
  if (threads <= 1 || n_tri < 256) {
    fill_range(0, n_tri);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (n_tri + threads - 1) / threads;
    for (int w = 0; w < threads; ++w) {
      const int begin = w * chunk;
      const int end = std::min(n_tri, begin + chunk);
      if (begin < end) pool.emplace_back(fill_range, begin, end);
    }
    for (auto& th : pool) th.join();
  }

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(n_tri) * 36);
  for (int t = 0; t < n_tri; ++t) {
    const auto& tri = mesh.triangles[t];
    int dof[6];
    for (int a = 0; a < 3; ++a) {
      dof[2 * a] = 2 * tri[a];
      dof[2 * a + 1] = 2 * tri[a] + 1;
    }
    for (int r = 0; r < 6; ++r)
      for (int cc = 0; cc < 6; ++cc)
        triplets.emplace_back(dof[r], dof[cc], element_k[t](r, cc));
  }
  ops.K_bulk.resize(n_dofs, n_dofs);
  ops.K_bulk.setFromTriplets(triplets.begin(), triplets.end());

  const JumpOperator jump = jump_operator(mesh, layout);
  ops.J_N = jump.normal;
  ops.J_T = jump.tangential;

  const int m = mesh.num_interface_nodes();
  const int n_edges = mesh.num_interface_edges();
  ops.A_e.resize(n_edges);
  ops.M_C = Eigen::VectorXd::Zero(m);
  std::vector<Eigen::Triplet<double>> kg;
  for (int e = 0; e < n_edges; ++e) {
    const double len = mesh.interface_edge_length(e);
    ops.A_e[e] = len;
    ops.M_C[e] += 0.5 * len;
    ops.M_C[e + 1] += 0.5 * len;
    kg.emplace_back(e, e, 1.0 / len);
    kg.emplace_back(e + 1, e + 1, 1.0 / len);
    kg.emplace_back(e, e + 1, -1.0 / len);
    kg.emplace_back(e + 1, e, -1.0 / len);
  }
  ops.K_G.resize(m, m);
  ops.K_G.setFromTriplets(kg.begin(), kg.end());

  ops.dirichlet_nodes = mesh.dirichlet_nodes();
  for (int v : ops.dirichlet_nodes) {
    ops.dirichlet_dofs.push_back(2 * v);
    ops.dirichlet_dofs.push_back(2 * v + 1);
  }

  // Dirichlet lift: unit data `direction` on Gamma_D, zero trace on Gamma_C
  // (Gamma_C wins at shared corners), traction-free elsewhere.
  if (load.direction.squaredNorm() == 0.0) {
    ops.lift_uD = Eigen::VectorXd::Zero(n_dofs);
    ops.f1_rate = Eigen::VectorXd::Zero(n_dofs);
  } else {
    std::vector<std::pair<int, double>> fixed;
    for (int v : ops.dirichlet_nodes) {
      fixed.emplace_back(2 * v, load.direction.x());
      fixed.emplace_back(2 * v + 1, load.direction.y());
    }
    std::vector<int> contact_vertices = mesh.interface_nodes;
    if (layout.mode == InterfaceLayout::Mode::TwoBodyMatched)
      contact_vertices.insert(contact_vertices.end(), layout.paired_nodes.begin(),
                              layout.paired_nodes.end());
    for (int v : contact_vertices) {
      fixed.emplace_back(2 * v, 0.0);
      fixed.emplace_back(2 * v + 1, 0.0);
    }
    // Zero-trace wins where Dirichlet and Contact meet.
    std::stable_sort(fixed.begin(), fixed.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first < b.first;
      return std::abs(a.second) < std::abs(b.second);
    });
    fixed.erase(std::unique(fixed.begin(), fixed.end(),
                            [](const auto& a, const auto& b) { return a.first == b.first; }),
                fixed.end());

    ops.lift_uD = constrained_solve(ops.K_bulk, Eigen::VectorXd::Zero(n_dofs), fixed);
    ops.f1_rate = -load.velocity * (ops.K_bulk * ops.lift_uD);
  }

  // Interface-node rotation to (tangential, normal) dof pairs.
  std::vector<Eigen::Triplet<double>> rot;
  std::vector<bool> rotated(n, false);
  if (layout.mode == InterfaceLayout::Mode::RigidObstacle) {
    for (int k = 0; k < m; ++k) {
      const int v = mesh.interface_nodes[k];
      const Eigen::Vector2d tg = mesh.node_tangent(k);
      const Eigen::Vector2d nu = mesh.node_normal(k);
      rot.emplace_back(2 * v, 2 * v, tg.x());
      rot.emplace_back(2 * v + 1, 2 * v, tg.y());
      rot.emplace_back(2 * v, 2 * v + 1, nu.x());
      rot.emplace_back(2 * v + 1, 2 * v + 1, nu.y());
      rotated[v] = true;
    }
  }
  for (int v = 0; v < n; ++v) {
    if (rotated[v]) continue;
    rot.emplace_back(2 * v, 2 * v, 1.0);
    rot.emplace_back(2 * v + 1, 2 * v + 1, 1.0);
  }
  ops.rotation.resize(n_dofs, n_dofs);
  ops.rotation.setFromTriplets(rot.begin(), rot.end());
  ops.K_rot = ops.rotation.transpose() * ops.K_bulk * ops.rotation;
  ops.f1_rate_rot = ops.rotation.transpose() * ops.f1_rate;

  return ops;
}

EnergyParts stored_energy(const DiscreteOperators& ops, const MaterialSpec& spec,
                          double t, const State& state) {
  if (state.u.size() != ops.num_dofs() || state.zeta.size() != ops.num_interface_edges() ||
      state.pi.size() != ops.num_interface_nodes())
    throw std::invalid_argument("stored_energy: state dimensions do not match operators");

  EnergyParts parts;
  parts.bulk = 0.5 * state.u.dot(ops.K_bulk * state.u) - t * ops.f1_rate.dot(state.u);

  const Eigen::VectorXd jn = ops.J_N * state.u;
  const Eigen::VectorXd jt = ops.J_T * state.u;
  for (int e = 0; e < ops.num_interface_edges(); ++e) {
    const auto mid = edge_midpoint(jn, jt, state.pi, e);
    const double slip_gap = mid.jt - mid.pi;
    parts.interface +=
        ops.A_e[e] * state.zeta[e] * (0.5 * spec.kappa_N * mid.jn * mid.jn +
                                      0.5 * spec.kappa_T * slip_gap * slip_gap);
  }
  // Hardening on the lumped node weights: keeps the pi-block of the step QP
  // positive definite and the per-node dissipation densities well-defined.
  for (int i = 0; i < ops.num_interface_nodes(); ++i)
    parts.interface += 0.5 * spec.kappa_H * ops.M_C[i] * state.pi[i] * state.pi[i];
  if (spec.kappa_G != 0.0)
    parts.interface += 0.5 * spec.kappa_G * state.pi.dot(ops.K_G * state.pi);
  return parts;
}

void interface_gradients(const DiscreteOperators& ops, const MaterialSpec& spec,
                         const Eigen::VectorXd& zeta, const Eigen::VectorXd& u,
                         const Eigen::VectorXd& pi, Eigen::VectorXd* grad_u,
                         Eigen::VectorXd* grad_pi) {
  const int m = ops.num_interface_nodes();
  const Eigen::VectorXd jn = ops.J_N * u;
  const Eigen::VectorXd jt = ops.J_T * u;
  Eigen::VectorXd gn = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd gt = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd gp = Eigen::VectorXd::Zero(m);
  for (int e = 0; e < ops.num_interface_edges(); ++e) {
    const auto mid = edge_midpoint(jn, jt, pi, e);
    const double w = ops.A_e[e];
    const double slip_gap = mid.jt - mid.pi;
    const double dn = w * zeta[e] * spec.kappa_N * mid.jn;
    const double dt = w * zeta[e] * spec.kappa_T * slip_gap;
    gn[e] += 0.5 * dn;
    gn[e + 1] += 0.5 * dn;
    gt[e] += 0.5 * dt;
    gt[e + 1] += 0.5 * dt;
    gp[e] -= 0.5 * dt;
    gp[e + 1] -= 0.5 * dt;
  }
  if (grad_u) *grad_u = ops.J_N.transpose() * gn + ops.J_T.transpose() * gt;
  if (grad_pi) {
    *grad_pi = gp;
    for (int i = 0; i < m; ++i) (*grad_pi)[i] += spec.kappa_H * ops.M_C[i] * pi[i];
    if (spec.kappa_G != 0.0) *grad_pi += spec.kappa_G * (ops.K_G * pi);
  }
}

Eigen::VectorXd gap_energy_density(const DiscreteOperators& ops, const MaterialSpec& spec,
                                   const Eigen::VectorXd& u, const Eigen::VectorXd& pi) {
  const Eigen::VectorXd jn = ops.J_N * u;
  const Eigen::VectorXd jt = ops.J_T * u;
  Eigen::VectorXd g(ops.num_interface_edges());
  for (int e = 0; e < ops.num_interface_edges(); ++e) {
    const auto mid = edge_midpoint(jn, jt, pi, e);
    const double slip_gap = mid.jt - mid.pi;
    g[e] = 0.5 * spec.kappa_N * mid.jn * mid.jn + 0.5 * spec.kappa_T * slip_gap * slip_gap;
  }
  return g;
}

Eigen::Vector2d reaction_force(const DiscreteOperators& ops, const MaterialSpec& spec,
                               const State& state, double t) {
  // Untransformed displacement; the lift has zero trace on the interface, so
  // the interface tractions are those of the transformed field.
  const Eigen::VectorXd u_hat = state.u + (t * ops.load.velocity) * ops.lift_uD;
  Eigen::VectorXd grad_int;
  interface_gradients(ops, spec, state.zeta, state.u, state.pi, &grad_int, nullptr);
  const Eigen::VectorXd residual = ops.K_bulk * u_hat + grad_int;

  Eigen::Vector2d force = Eigen::Vector2d::Zero();
  for (int v : ops.dirichlet_nodes) {
    force.x() += residual[2 * v];
    force.y() += residual[2 * v + 1];
  }
  return force;
}

}  // namespace delam
