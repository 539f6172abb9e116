#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "delam/material.hpp"
#include "delam/mesh.hpp"
#include "delam/state.hpp"

namespace delam {

/// Linear-in-time Dirichlet loading, w_D(t) = t * velocity * direction on
/// Gamma_D. direction is expected to be a unit vector; the surface traction
/// on Gamma_N is zero.
struct LoadProgram {
  Eigen::Vector2d direction = Eigen::Vector2d::Zero();
  double velocity = 0.0;  // m/s
};

/// All finite-element matrices and vectors of the discrete energy.
/// Immutable after assemble(); safe to share across threads.
struct DiscreteOperators {
  Mesh2D mesh;
  InterfaceLayout layout;
  LoadProgram load;

  Eigen::SparseMatrix<double> K_bulk;  // 2n x 2n P1 elasticity stiffness
  Eigen::SparseMatrix<double> J_N;     // m x 2n nodal jump maps
  Eigen::SparseMatrix<double> J_T;
  Eigen::VectorXd M_C;                 // m lumped interface node weights (m)
  Eigen::VectorXd A_e;                 // E interface edge lengths (m)
  Eigen::SparseMatrix<double> K_G;     // m x m polyline P1 stiffness
  Eigen::VectorXd lift_uD;             // 2n, unit-direction Dirichlet lift
  Eigen::VectorXd f1_rate;             // 2n, f1(t) = t * f1_rate

  std::vector<int> dirichlet_nodes;    // sorted unique vertex ids
  std::vector<int> dirichlet_dofs;     // both components per node

  // Interface-node dof rotation to (tangential, normal) coordinates:
  // u = rotation * z. Identity blocks away from the interface.
  Eigen::SparseMatrix<double> rotation;
  Eigen::SparseMatrix<double> K_rot;   // rotation^T K_bulk rotation
  Eigen::VectorXd f1_rate_rot;         // rotation^T f1_rate

  int num_dofs() const { return static_cast<int>(K_bulk.rows()); }
  int num_interface_nodes() const { return static_cast<int>(M_C.size()); }
  int num_interface_edges() const { return static_cast<int>(A_e.size()); }
};

/// Assembles every field of DiscreteOperators. The Dirichlet lift solves the
/// pure elastic problem with unit data `direction` on Gamma_D, zero trace on
/// Gamma_C and traction-free elsewhere. Throws on a singular constrained
/// stiffness (mesh/tagging defect). Element loops honor DELAM_THREADS with a
/// deterministic reduction order.
DiscreteOperators assemble(const Mesh2D& mesh, const MaterialSpec& spec,
                           const LoadProgram& load,
                           const InterfaceLayout& layout = InterfaceLayout{});

/// Transformed stored energy split into bulk and interface parts:
///   bulk      = 1/2 u.K u - t f1_rate.u
///   interface = sum_e w_e zeta_e (kN/2 jN^2 + kT/2 (jT - pi)^2)
///               + sum_i m_i kH/2 pi_i^2 + kG/2 pi.K_G pi
/// Jump quantities and pi are sampled at edge midpoints in the zeta-paired
/// terms (so the damage update stays exactly element-wise); the hardening
/// term uses the lumped node weights (so the slip block stays positive
/// definite and per-node dissipation densities are well-defined).
struct EnergyParts {
  double bulk = 0.0;       // J
  double interface = 0.0;  // J
  double total() const { return bulk + interface; }
};

EnergyParts stored_energy(const DiscreteOperators& ops, const MaterialSpec& spec,
                          double t, const State& state);

/// Interface energy gradients at (u, zeta, pi): d/du (length 2n) and d/dpi
/// (length m). Either output may be null.
void interface_gradients(const DiscreteOperators& ops, const MaterialSpec& spec,
                         const Eigen::VectorXd& zeta, const Eigen::VectorXd& u,
                         const Eigen::VectorXd& pi, Eigen::VectorXd* grad_u,
                         Eigen::VectorXd* grad_pi);

/// Per-element gap-energy density at edge midpoints,
/// g_e = kN/2 jN^2 + kT/2 (jT - pi)^2  (J/m^2).
Eigen::VectorXd gap_energy_density(const DiscreteOperators& ops, const MaterialSpec& spec,
                                   const Eigen::VectorXd& u, const Eigen::VectorXd& pi);

/// Equilibrium residual of the untransformed problem summed over Dirichlet
/// nodes: total (horizontal, vertical) force transmitted by the loading.
Eigen::Vector2d reaction_force(const DiscreteOperators& ops, const MaterialSpec& spec,
                               const State& state, double t);

}  // namespace delam
