#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "delam/assembly.hpp"

namespace delam {

/// Sparse convex QP: minimize 1/2 x.H x + g.x subject to x_i >= 0 for
/// i in nonneg_set and x_j fixed for (j, value) in eq_fixed. H must be
/// symmetric and positive definite on the free-variable subspace.
struct QpProblem {
  Eigen::SparseMatrix<double> H;
  Eigen::VectorXd g;
  std::vector<int> nonneg_set;                   // sorted, unique
  std::vector<std::pair<int, double>> eq_fixed;  // sorted by index

  int size() const { return static_cast<int>(g.size()); }
};

enum class QpStatus { Converged, MaxIterations };

struct QpSolution {
  Eigen::VectorXd x;
  std::vector<int> active_set;          // nonneg indices at their bound
  double kkt_residual = 0.0;            // stationarity, relative to ||g||_inf
  double complementarity_residual = 0.0;  // max |x_i lambda_i|
  int iterations = 0;
  QpStatus status = QpStatus::Converged;
  std::vector<double> objective_trace;  // objective after each iterate
};

/// Thrown when the Hessian is not positive definite on a free subspace;
/// indicates a problem-construction bug.
struct QpIndefiniteError : std::runtime_error {
  explicit QpIndefiniteError(const std::string& what) : std::runtime_error(what) {}
};

struct QpWarmStart {
  Eigen::VectorXd x;
  std::vector<int> active_set;
};

/// Primal active-set solver. Deterministic: ties broken by lowest index.
/// On MaxIterations the best iterate and its residuals are returned.
QpSolution solve_qp(const QpProblem& p, const QpWarmStart* warm_start = nullptr,
                    double tol_kkt = 1e-9);

/// Self-describing JSON dump (matrix in coordinate triplet form) for offline
/// reproduction of a problem instance.
void dump_qp_json(const QpProblem& p, std::ostream& os);
QpProblem load_qp_json(std::istream& is);

/// Per-step QP in the variables z = (rotated u dofs, p_plus, p_minus) with
/// pi = pi_prev + p_plus - p_minus. Signorini turns into simple bounds on the
/// rotated normal dofs; the L1 slip term is linear in p_plus, p_minus.
struct StepQp {
  QpProblem problem;
  int n_u = 0;      // displacement dof count
  int n_iface = 0;  // interface node count
  Eigen::VectorXd pi_prev;
  const DiscreteOperators* ops = nullptr;

  int p_plus_index(int k) const { return n_u + k; }
  int p_minus_index(int k) const { return n_u + n_iface + k; }

  void decode(const Eigen::VectorXd& z, Eigen::VectorXd* u, Eigen::VectorXd* pi) const;
  Eigen::VectorXd encode_u(const Eigen::VectorXd& u) const;  // z_u = rotation^T u
};

StepQp build_step_qp(const DiscreteOperators& ops, const MaterialSpec& spec, double t_k,
                     const Eigen::VectorXd& zeta_prev, const Eigen::VectorXd& pi_prev);

}  // namespace delam
