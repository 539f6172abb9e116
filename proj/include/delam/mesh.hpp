#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <array>
#include <string>
#include <vector>

namespace delam {

enum class BoundaryTag { Dirichlet, Neumann, Contact, Free };

std::string to_string(BoundaryTag tag);

struct BoundaryEdge {
  int v0 = -1;
  int v1 = -1;
  BoundaryTag tag = BoundaryTag::Free;
};

/// Triangulated 2-D body with tagged boundary parts and an ordered contact
/// polyline. Immutable after construction; refinement builds a new mesh.
struct Mesh2D {
  std::vector<Eigen::Vector2d> vertices;           // meters
  std::vector<std::array<int, 3>> triangles;       // CCW, positive area
  std::vector<BoundaryEdge> boundary_edges;

  // Contact interface, ordered as a connected polyline. interface_edges[e]
  // joins interface_nodes[e] and interface_nodes[e+1].
  std::vector<int> interface_nodes;
  std::vector<std::array<int, 2>> interface_edges;
  std::vector<Eigen::Vector2d> edge_normal;        // unit, points into the body
  std::vector<Eigen::Vector2d> edge_tangent;       // unit, (t, nu) right-handed

  double h = 0.0;             // max triangle diameter
  double grid_spacing = 0.0;  // max structured cell edge (0 for hand-made meshes)

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_triangles() const { return static_cast<int>(triangles.size()); }
  int num_interface_nodes() const { return static_cast<int>(interface_nodes.size()); }
  int num_interface_edges() const { return static_cast<int>(interface_edges.size()); }

  double triangle_area(int t) const;
  double interface_edge_length(int e) const;
  double interface_length() const;

  /// Unit normal/tangent at an interface node (averaged over adjacent edges).
  Eigen::Vector2d node_normal(int k) const;
  Eigen::Vector2d node_tangent(int k) const;

  std::vector<int> dirichlet_nodes() const;  // sorted, unique

  /// Checks the structural invariants; throws std::runtime_error on violation.
  void validate() const;

  std::string to_json() const;
};

/// How the interface jump is realized: against a rigid obstacle (jump equals
/// the trace of u) or between two bodies with coordinate-matched node pairs.
struct InterfaceLayout {
  enum class Mode { RigidObstacle, TwoBodyMatched };
  Mode mode = Mode::RigidObstacle;
  // TwoBodyMatched only: paired_nodes[k] is the vertex on the second body
  // matching interface_nodes[k]; the pair shares coordinates.
  std::vector<int> paired_nodes;

  void validate(const Mesh2D& mesh) const;
};

/// Structured triangulation of [0,length]x[0,height]. The bottom edge from
/// x=0 to x=glued_fraction*length is tagged Contact (with a grid line placed
/// exactly at the glue front), the right edge Dirichlet, the rest of the
/// bottom Free and the remaining sides Neumann. Grid spacing never exceeds
/// h_target.
Mesh2D build_rectangle_mesh(double length, double height, double glued_fraction,
                            double h_target);

/// Sparse linear maps from nodal displacements to per-interface-node
/// (jump_N, jump_T), each of shape (#interface nodes) x (2 #vertices).
struct JumpOperator {
  Eigen::SparseMatrix<double> normal;
  Eigen::SparseMatrix<double> tangential;
};

JumpOperator jump_operator(const Mesh2D& mesh, const InterfaceLayout& layout);

}  // namespace delam
