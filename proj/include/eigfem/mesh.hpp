#pragma once

#include <Eigen/Dense>

#include <array>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

namespace eigfem {

enum class BoundaryLabel { Dirichlet, Neumann };

/// Conforming triangulation of a polygonal domain. Triangles are
/// counterclockwise. For an interior edge, tri[0] is the adjacent triangle
/// with the larger index and tri[1] the one with the smaller index; boundary
/// edges store their single neighbor in tri[0].
struct Mesh {
  struct Edge {
    int v[2];                  // vertex indices, v[0] < v[1]
    int tri[2] = {-1, -1};     // adjacent triangles (tri[1] = -1 on boundary)
    bool boundary = false;
    BoundaryLabel label = BoundaryLabel::Dirichlet;  // boundary edges only
  };

  std::vector<Eigen::Vector2d> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<Edge> edges;
  /// tri_edges[t][i] = global edge opposite local vertex i (connecting the
  /// other two vertices of t).
  std::vector<std::array<int, 3>> tri_edges;
  /// Local index of each triangle's bisection (refinement) edge.
  std::vector<int> refine_edge;
  int level = 1;

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_triangles() const { return static_cast<int>(triangles.size()); }
  int num_edges() const { return static_cast<int>(edges.size()); }

  Eigen::Vector2d edge_midpoint(int e) const {
    return 0.5 * (vertices[edges[e].v[0]] + vertices[edges[e].v[1]]);
  }
  double edge_length(int e) const {
    return (vertices[edges[e].v[1]] - vertices[edges[e].v[0]]).norm();
  }
  double signed_area(int t) const;
  double max_diameter() const;
  double total_area() const;

  /// Builds the edge table and triangle-to-edge incidence from the triangle
  /// list; boundary labels are taken from `boundary_labels` keyed by sorted
  /// vertex pair (missing entries default to Dirichlet). Tags refinement
  /// edges by longest edge where not already set.
  void finalize(const std::vector<std::pair<std::pair<int, int>,
                                            BoundaryLabel>> &boundary_labels);
};

/// Per-triangle geometric constants. Edge i is the edge opposite vertex i.
struct ElementGeometry {
  Eigen::Matrix<double, 3, 2> p;   // vertex coordinates, one per row
  double area = 0;                 // |K|
  double diameter = 0;             // h_K
  Eigen::Vector2d centroid;        // M_K
  double edge_len[3];              // |e_i|
  Eigen::Vector2d tangent[3];      // unit tangents, counterclockwise
  Eigen::Vector2d grad_phi[3];     // gradients of barycentric coordinates
  double cA = 0;                   // A_K: sum over ordered vertex pairs i != j
                                   //      of (dx_ij^2 - dy_ij^2)
  double cB = 0;                   // B_K: mixed second-moment constant
  double edge_len_sq_sum = 0;      // H_K = sum |e_i|^2

  double phi(int i, const Eigen::Vector2d &x) const {
    return 1.0 / 3.0 + grad_phi[i].dot(x - centroid);
  }
};

ElementGeometry element_geometry(const Mesh &mesh, int t);

/// Level-one triangulations of the built-in domains:
/// square, square-neumann, triangle, lshape, hshape, hollow.
Mesh build_domain(const std::string &name);

/// Red refinement: every triangle split into four similar half-sized ones.
Mesh refine_uniform(const Mesh &mesh);

/// Newest-vertex bisection of the marked triangles with recursive closure.
Mesh refine_marked(const Mesh &mesh, const std::set<int> &marked);

void write_mesh(std::ostream &os, const Mesh &mesh);
Mesh read_mesh(std::istream &is);

}  // namespace eigfem
