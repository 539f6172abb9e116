#include "delam/mesh.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace delam {

std::string to_string(BoundaryTag tag) {
  switch (tag) {
    case BoundaryTag::Dirichlet: return "Dirichlet";
    case BoundaryTag::Neumann: return "Neumann";
    case BoundaryTag::Contact: return "Contact";
    case BoundaryTag::Free: return "Free";
  }
  return "?";
}

double Mesh2D::triangle_area(int t) const {
  const auto& tri = triangles[t];
  const Eigen::Vector2d a = vertices[tri[0]];
  const Eigen::Vector2d b = vertices[tri[1]];
  const Eigen::Vector2d c = vertices[tri[2]];
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x()));
}

double Mesh2D::interface_edge_length(int e) const {
  const auto& edge = interface_edges[e];
  return (vertices[edge[1]] - vertices[edge[0]]).norm();
}

double Mesh2D::interface_length() const {
  double len = 0.0;
  for (int e = 0; e < num_interface_edges(); ++e) len += interface_edge_length(e);
  return len;
}

Eigen::Vector2d Mesh2D::node_normal(int k) const {
  Eigen::Vector2d n = Eigen::Vector2d::Zero();
  if (k > 0) n += edge_normal[k - 1];
  if (k < num_interface_edges()) n += edge_normal[k];
  const double norm = n.norm();
  if (norm == 0.0) throw std::runtime_error("degenerate interface normal at node");
  return n / norm;
}

Eigen::Vector2d Mesh2D::node_tangent(int k) const {
  const Eigen::Vector2d n = node_normal(k);
  return {n.y(), -n.x()};  // (t, nu) right-handed
}

std::vector<int> Mesh2D::dirichlet_nodes() const {
  std::set<int> nodes;
  for (const auto& edge : boundary_edges) {
    if (edge.tag == BoundaryTag::Dirichlet) {
      nodes.insert(edge.v0);
      nodes.insert(edge.v1);
    }
  }
  return {nodes.begin(), nodes.end()};
}

void Mesh2D::validate() const {
  for (int t = 0; t < num_triangles(); ++t) {
    if (!(triangle_area(t) > 0.0))
      throw std::runtime_error("triangle " + std::to_string(t) + " has non-positive area");
  }

  std::set<std::pair<int, int>> seen;
  bool has_dirichlet = false;
  for (const auto& edge : boundary_edges) {
    auto key = std::minmax(edge.v0, edge.v1);
    if (!seen.insert(key).second)
      throw std::runtime_error("boundary edge tagged more than once");
    if (edge.tag == BoundaryTag::Dirichlet) has_dirichlet = true;
  }
  if (!has_dirichlet) throw std::runtime_error("Dirichlet boundary part is empty");

  if (interface_nodes.size() != interface_edges.size() + (interface_edges.empty() ? 0 : 1))
    throw std::runtime_error("interface node/edge counts inconsistent");
  for (int e = 0; e < num_interface_edges(); ++e) {
    if (interface_edges[e][0] != interface_nodes[e] ||
        interface_edges[e][1] != interface_nodes[e + 1])
      throw std::runtime_error("interface polyline is not connected/ordered");
    if (std::abs(edge_normal[e].norm() - 1.0) > 1e-12)
      throw std::runtime_error("interface normal is not unit");
    const double cross = edge_tangent[e].x() * edge_normal[e].y() -
                         edge_tangent[e].y() * edge_normal[e].x();
    if (std::abs(cross - 1.0) > 1e-12)
      throw std::runtime_error("(tangent, normal) is not right-handed");
  }
  if (!(h > 0.0)) throw std::runtime_error("mesh parameter h not recorded");
}

std::string Mesh2D::to_json() const {
  nlohmann::json j;
  auto& verts = j["vertices"] = nlohmann::json::array();
  for (const auto& v : vertices) verts.push_back({v.x(), v.y()});
  auto& tris = j["triangles"] = nlohmann::json::array();
  for (const auto& t : triangles) tris.push_back({t[0], t[1], t[2]});
  auto& edges = j["boundary_edges"] = nlohmann::json::array();
  for (const auto& e : boundary_edges) edges.push_back({e.v0, e.v1, to_string(e.tag)});
  j["interface_nodes"] = interface_nodes;
  return j.dump();
}

void InterfaceLayout::validate(const Mesh2D& mesh) const {
  if (mode == Mode::RigidObstacle) return;
  if (paired_nodes.size() != mesh.interface_nodes.size())
    throw std::runtime_error("TwoBodyMatched layout: pair count mismatch");
  for (std::size_t k = 0; k < paired_nodes.size(); ++k) {
    const Eigen::Vector2d a = mesh.vertices[mesh.interface_nodes[k]];
    const Eigen::Vector2d b = mesh.vertices[paired_nodes[k]];
    if ((a - b).norm() > 1e-14 * std::max(1.0, a.norm()))
      throw std::runtime_error("TwoBodyMatched layout: paired nodes do not coincide");
  }
}

namespace {

// Uniform partition of [x0, x1] into n cells, endpoints exact.
void append_partition(std::vector<double>& xs, double x0, double x1, int n) {
  for (int i = 1; i <= n; ++i) xs.push_back(x0 + (x1 - x0) * static_cast<double>(i) / n);
  xs.back() = x1;
}

}  // namespace

Mesh2D build_rectangle_mesh(double length, double height, double glued_fraction,
                            double h_target) {
  if (!(length > 0.0) || !(height > 0.0) || !(h_target > 0.0))
    throw std::invalid_argument("build_rectangle_mesh: dimensions must be positive");
  if (!(glued_fraction > 0.0) || glued_fraction > 1.0)
    throw std::invalid_argument("build_rectangle_mesh: glued_fraction must be in (0, 1]");
  if (h_target > std::min(length, height))
    throw std::invalid_argument("build_rectangle_mesh: h_target exceeds min(length, height)");

  const double x_front = glued_fraction * length;
  const int n_glued = static_cast<int>(std::ceil(x_front / h_target - 1e-12));
  const int n_rest = (x_front < length)
                         ? static_cast<int>(std::ceil((length - x_front) / h_target - 1e-12))
                         : 0;
  const int ny = static_cast<int>(std::ceil(height / h_target - 1e-12));

  std::vector<double> xs{0.0};
  append_partition(xs, 0.0, x_front, n_glued);
  if (n_rest > 0) append_partition(xs, x_front, length, n_rest);
  std::vector<double> ys{0.0};
  append_partition(ys, 0.0, height, ny);

  const int nx = static_cast<int>(xs.size()) - 1;
  auto vid = [nx](int i, int j) { return j * (nx + 1) + i; };

  Mesh2D mesh;
  mesh.vertices.reserve((nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) mesh.vertices.emplace_back(xs[i], ys[j]);

  // One fixed diagonal per cell: lower-left to upper-right.
  mesh.triangles.reserve(2 * nx * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int ll = vid(i, j), lr = vid(i + 1, j);
      const int ul = vid(i, j + 1), ur = vid(i + 1, j + 1);
      mesh.triangles.push_back({ll, lr, ur});
      mesh.triangles.push_back({ll, ur, ul});
    }
  }

  for (int i = 0; i < nx; ++i) {
    const BoundaryTag tag = (i < n_glued) ? BoundaryTag::Contact : BoundaryTag::Free;
    mesh.boundary_edges.push_back({vid(i, 0), vid(i + 1, 0), tag});
  }
  for (int j = 0; j < ny; ++j)
    mesh.boundary_edges.push_back({vid(nx, j), vid(nx, j + 1), BoundaryTag::Dirichlet});
  for (int i = 0; i < nx; ++i)
    mesh.boundary_edges.push_back({vid(i, ny), vid(i + 1, ny), BoundaryTag::Neumann});
  for (int j = 0; j < ny; ++j)
    mesh.boundary_edges.push_back({vid(0, j), vid(0, j + 1), BoundaryTag::Neumann});

  // Interface polyline left to right along the bottom; the obstacle sits
  // below, so nu = (0,1) points into the body and t = (1,0).
  for (int i = 0; i <= n_glued; ++i) mesh.interface_nodes.push_back(vid(i, 0));
  for (int i = 0; i < n_glued; ++i) {
    mesh.interface_edges.push_back({vid(i, 0), vid(i + 1, 0)});
    mesh.edge_normal.emplace_back(0.0, 1.0);
    mesh.edge_tangent.emplace_back(1.0, 0.0);
  }

  double h = 0.0, spacing = 0.0;
  for (int i = 0; i < nx; ++i) spacing = std::max(spacing, xs[i + 1] - xs[i]);
  for (int j = 0; j < ny; ++j) spacing = std::max(spacing, ys[j + 1] - ys[j]);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (int a = 0; a < 3; ++a)
      h = std::max(h, (mesh.vertices[tri[a]] - mesh.vertices[tri[(a + 1) % 3]]).norm());
  }
  mesh.h = h;
  mesh.grid_spacing = spacing;

  mesh.validate();
  return mesh;
}

JumpOperator jump_operator(const Mesh2D& mesh, const InterfaceLayout& layout) {
  if (mesh.interface_nodes.empty())
    throw std::invalid_argument("jump_operator: interface is empty");
  layout.validate(mesh);

  const int m = mesh.num_interface_nodes();
  const int n_dofs = 2 * mesh.num_vertices();
  std::vector<Eigen::Triplet<double>> tn, tt;
  for (int k = 0; k < m; ++k) {
    const Eigen::Vector2d nu = mesh.node_normal(k);
    const Eigen::Vector2d tg = mesh.node_tangent(k);
    const int v = mesh.interface_nodes[k];
    tn.emplace_back(k, 2 * v, nu.x());
    tn.emplace_back(k, 2 * v + 1, nu.y());
    tt.emplace_back(k, 2 * v, tg.x());
    tt.emplace_back(k, 2 * v + 1, tg.y());
    if (layout.mode == InterfaceLayout::Mode::TwoBodyMatched) {
      const int w = layout.paired_nodes[k];
      tn.emplace_back(k, 2 * w, -nu.x());
      tn.emplace_back(k, 2 * w + 1, -nu.y());
      tt.emplace_back(k, 2 * w, -tg.x());
      tt.emplace_back(k, 2 * w + 1, -tg.y());
    }
  }

  JumpOperator op;
  op.normal.resize(m, n_dofs);
  op.tangential.resize(m, n_dofs);
  op.normal.setFromTriplets(tn.begin(), tn.end());
  op.tangential.setFromTriplets(tt.begin(), tt.end());
  return op;
}

}  // namespace delam
