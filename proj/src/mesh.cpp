#include "eigfem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>

namespace eigfem {

namespace {

using VPair = std::pair<int, int>;

VPair sorted_pair(int a, int b) { return {std::min(a, b), std::max(a, b)}; }

}  // namespace

double Mesh::signed_area(int t) const {
  const auto &tri = triangles[t];
  const Eigen::Vector2d a = vertices[tri[0]], b = vertices[tri[1]],
                        c = vertices[tri[2]];
  return 0.5 * ((b - a)[0] * (c - a)[1] - (b - a)[1] * (c - a)[0]);
}

double Mesh::max_diameter() const {
  double h = 0.0;
  for (const auto &e : edges) {
    double len = (vertices[e.v[1]] - vertices[e.v[0]]).norm();
    h = std::max(h, len);
  }
  return h;
}

double Mesh::total_area() const {
  double a = 0.0;
  for (int t = 0; t < num_triangles(); ++t) a += signed_area(t);
  return a;
}

void Mesh::finalize(
    const std::vector<std::pair<VPair, BoundaryLabel>> &boundary_labels) {
  edges.clear();
  tri_edges.assign(triangles.size(), {-1, -1, -1});

  std::map<VPair, int> edge_index;
  for (int t = 0; t < num_triangles(); ++t) {
    if (signed_area(t) <= 0.0)
      throw std::runtime_error("mesh: triangle " + std::to_string(t) +
                               " is not counterclockwise");
    for (int i = 0; i < 3; ++i) {
      VPair key = sorted_pair(triangles[t][(i + 1) % 3], triangles[t][(i + 2) % 3]);
      auto [it, inserted] = edge_index.try_emplace(key, num_edges());
      if (inserted) {
        Edge e;
        e.v[0] = key.first;
        e.v[1] = key.second;
        e.tri[0] = t;
        edges.push_back(e);
      } else {
        Edge &e = edges[it->second];
        if (e.tri[1] != -1)
          throw std::runtime_error("mesh: edge with more than two triangles");
        // keep the larger triangle label first
        e.tri[1] = std::min(e.tri[0], t);
        e.tri[0] = std::max(e.tri[0], t);
      }
      tri_edges[t][i] = it->second;
    }
  }
  for (auto &e : edges) e.boundary = (e.tri[1] == -1);

  std::map<VPair, BoundaryLabel> labels(boundary_labels.begin(),
                                        boundary_labels.end());
  for (auto &e : edges) {
    if (!e.boundary) continue;
    auto it = labels.find({e.v[0], e.v[1]});
    e.label = (it != labels.end()) ? it->second : BoundaryLabel::Dirichlet;
  }

  if (refine_edge.size() != triangles.size()) {
    // longest-edge initial tagging (ties broken by smaller edge index)
    refine_edge.assign(triangles.size(), 0);
    for (int t = 0; t < num_triangles(); ++t) {
      double best = -1.0;
      for (int i = 0; i < 3; ++i) {
        double len = edge_length(tri_edges[t][i]);
        if (len > best + 1e-14 * (1.0 + best)) {
          best = len;
          refine_edge[t] = i;
        }
      }
    }
  }
}

ElementGeometry element_geometry(const Mesh &mesh, int t) {
  ElementGeometry g;
  const auto &tri = mesh.triangles[t];
  for (int i = 0; i < 3; ++i) g.p.row(i) = mesh.vertices[tri[i]];
  const Eigen::Vector2d a = g.p.row(0), b = g.p.row(1), c = g.p.row(2);
  const double twice_area = (b - a)[0] * (c - a)[1] - (b - a)[1] * (c - a)[0];
  if (twice_area <= 0.0)
    throw std::runtime_error("element_geometry: degenerate triangle");
  g.area = 0.5 * twice_area;
  g.centroid = (a + b + c) / 3.0;
  for (int i = 0; i < 3; ++i) {
    const Eigen::Vector2d pi1 = g.p.row((i + 1) % 3), pi2 = g.p.row((i + 2) % 3);
    const Eigen::Vector2d edge = pi2 - pi1;  // counterclockwise traversal
    g.edge_len[i] = edge.norm();
    g.tangent[i] = edge / g.edge_len[i];
    g.grad_phi[i] = Eigen::Vector2d(-edge[1], edge[0]) / twice_area;
    g.edge_len_sq_sum += g.edge_len[i] * g.edge_len[i];
  }
  g.diameter = std::max({g.edge_len[0], g.edge_len[1], g.edge_len[2]});
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      if (i == j) continue;
      const double dx = g.p(i, 0) - g.p(j, 0);
      const double dy = g.p(i, 1) - g.p(j, 1);
      g.cA += dx * dx - dy * dy;
    }
  for (int i = 0; i < 3; ++i) {
    g.cB += 2.0 * g.p(i, 0) * g.p(i, 1);
    for (int j = 0; j < 3; ++j)
      if (j != i) g.cB -= g.p(i, 0) * g.p(j, 1);
  }
  return g;
}

namespace {

/// Builds a mesh from axis-aligned square cells of size h, each split into
/// two triangles by the north-east diagonal.
Mesh cells_to_mesh(const std::vector<std::pair<int, int>> &cells, double h,
                   const Eigen::Vector2d &origin) {
  Mesh mesh;
  std::map<VPair, int> vid;
  auto vertex = [&](int i, int j) {
    auto [it, inserted] = vid.try_emplace({i, j}, mesh.num_vertices());
    if (inserted)
      mesh.vertices.push_back(origin + h * Eigen::Vector2d(i, j));
    return it->second;
  };
  for (auto [i, j] : cells) {
    int v00 = vertex(i, j), v10 = vertex(i + 1, j);
    int v11 = vertex(i + 1, j + 1), v01 = vertex(i, j + 1);
    mesh.triangles.push_back({v00, v10, v11});
    mesh.triangles.push_back({v00, v11, v01});
  }
  mesh.finalize({});
  return mesh;
}

void label_boundary(Mesh &mesh,
                    const std::function<bool(const Eigen::Vector2d &)> &neumann) {
  for (auto &e : mesh.edges)
    if (e.boundary) {
      Eigen::Vector2d m = 0.5 * (mesh.vertices[e.v[0]] + mesh.vertices[e.v[1]]);
      e.label = neumann(m) ? BoundaryLabel::Neumann : BoundaryLabel::Dirichlet;
    }
}

}  // namespace

Mesh build_domain(const std::string &name) {
  const double tol = 1e-12;
  if (name == "square" || name == "square-neumann") {
    Mesh mesh = cells_to_mesh({{0, 0}}, 1.0, {0.0, 0.0});
    if (name == "square-neumann")
      label_boundary(mesh,
                     [&](const Eigen::Vector2d &m) { return m[0] > 1.0 - tol; });
    return mesh;
  }
  if (name == "triangle") {
    // Domain of Example 3: 0 < x2 < sqrt(3) x1, x2 > sqrt(3)(1 - x1),
    // bounded on the right by x1 = 1 (the Neumann side).
    const double s3 = std::sqrt(3.0);
    Mesh mesh;
    mesh.vertices = {{0.5, 0.5 * s3}, {1.0, 0.0}, {1.0, s3}};
    mesh.triangles = {{0, 1, 2}};
    mesh.finalize({});
    mesh = refine_uniform(refine_uniform(refine_uniform(mesh)));
    mesh.level = 1;
    label_boundary(mesh,
                   [&](const Eigen::Vector2d &m) { return m[0] > 1.0 - tol; });
    return mesh;
  }
  if (name == "lshape") {
    Mesh mesh = cells_to_mesh({{0, 0}, {0, 1}, {1, 1}}, 1.0, {-1.0, -1.0});
    return mesh;
  }
  if (name == "hshape") {
    std::vector<std::pair<int, int>> cells;
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j) {
        const double x = -2.0 + 0.5 * i, y = -2.0 + 0.5 * j;
        const bool left = x < -1.0 - 0.25;
        const bool right = x > 1.0 - tol;
        const bool bar = y > -0.5 - tol && y < 0.5 - 0.25;
        if (left || right || bar) cells.push_back({i, j});
      }
    return cells_to_mesh(cells, 0.5, {-2.0, -2.0});
  }
  if (name == "hollow") {
    std::vector<std::pair<int, int>> cells;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        const double x = -1.0 + 0.5 * i, y = -1.0 + 0.5 * j;
        const bool inner = x > -0.5 - tol && x < 0.5 - 0.25 && y > -0.5 - tol &&
                           y < 0.5 - 0.25;
        if (!inner) cells.push_back({i, j});
      }
    Mesh mesh = cells_to_mesh(cells, 0.5, {-1.0, -1.0});
    label_boundary(mesh,
                   [&](const Eigen::Vector2d &m) { return m[0] < -1.0 + tol; });
    return mesh;
  }
  throw std::invalid_argument("build_domain: unknown domain '" + name + "'");
}

namespace {

std::vector<std::pair<VPair, BoundaryLabel>> split_boundary_labels(
    const Mesh &mesh, const std::map<int, int> &edge_midpoint_vertex) {
  std::vector<std::pair<VPair, BoundaryLabel>> labels;
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const auto &edge = mesh.edges[e];
    if (!edge.boundary) continue;
    auto it = edge_midpoint_vertex.find(e);
    if (it == edge_midpoint_vertex.end()) {
      labels.push_back({sorted_pair(edge.v[0], edge.v[1]), edge.label});
    } else {
      labels.push_back({sorted_pair(edge.v[0], it->second), edge.label});
      labels.push_back({sorted_pair(it->second, edge.v[1]), edge.label});
    }
  }
  return labels;
}

}  // namespace

Mesh refine_uniform(const Mesh &mesh) {
  Mesh out;
  out.vertices = mesh.vertices;
  std::map<int, int> mid;  // edge -> midpoint vertex
  for (int e = 0; e < mesh.num_edges(); ++e) {
    mid[e] = out.num_vertices();
    out.vertices.push_back(mesh.edge_midpoint(e));
  }
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto &tri = mesh.triangles[t];
    // m[i] = midpoint of the edge opposite vertex i
    const int m0 = mid[mesh.tri_edges[t][0]];
    const int m1 = mid[mesh.tri_edges[t][1]];
    const int m2 = mid[mesh.tri_edges[t][2]];
    out.triangles.push_back({tri[0], m2, m1});
    out.triangles.push_back({m2, tri[1], m0});
    out.triangles.push_back({m1, m0, tri[2]});
    out.triangles.push_back({m0, m1, m2});
  }
  out.finalize(split_boundary_labels(mesh, mid));
  out.level = mesh.level + 1;
  return out;
}

Mesh refine_marked(const Mesh &mesh, const std::set<int> &marked) {
  if (marked.empty()) return mesh;

  // Edges to split: the refinement edges of the marked triangles, plus
  // closure so every triangle with a split edge also splits its own
  // refinement edge.
  std::vector<bool> split(mesh.num_edges(), false);
  for (int t : marked) split[mesh.tri_edges[t][mesh.refine_edge[t]]] = true;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
      const int re = mesh.tri_edges[t][mesh.refine_edge[t]];
      if (split[re]) continue;
      for (int i = 0; i < 3; ++i)
        if (split[mesh.tri_edges[t][i]]) {
          split[re] = true;
          changed = true;
          break;
        }
    }
  }

  Mesh out;
  out.vertices = mesh.vertices;
  std::map<int, int> mid;
  for (int e = 0; e < mesh.num_edges(); ++e)
    if (split[e]) {
      mid[e] = out.num_vertices();
      out.vertices.push_back(mesh.edge_midpoint(e));
    }

  std::vector<VPair> child_refine;  // refinement edge of each new triangle
  auto emit = [&](int a, int b, int c, VPair re) {
    out.triangles.push_back({a, b, c});
    child_refine.push_back(sorted_pair(re.first, re.second));
  };
  // Bisects (a,b,c) at the midpoint of edge (b,c); the children's refinement
  // edges are the remaining original edges (a,b) and (a,c). Each may itself
  // be split, in which case the grandchildren's refinement edges are the
  // interior segments created here, which are never split further.
  auto bisect = [&](int a, int b, int c, int m, int split_ab, int split_ca) {
    if (split_ab >= 0) {
      emit(m, a, split_ab, {m, a});
      emit(m, split_ab, b, {m, b});
    } else {
      emit(a, b, m, {a, b});
    }
    if (split_ca >= 0) {
      emit(m, c, split_ca, {m, c});
      emit(m, split_ca, a, {m, a});
    } else {
      emit(a, m, c, {a, c});
    }
  };
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const int i = mesh.refine_edge[t];
    const int re = mesh.tri_edges[t][i];
    const auto &tri = mesh.triangles[t];
    if (!split[re]) {
      const auto &e = mesh.edges[re];
      emit(tri[0], tri[1], tri[2], {e.v[0], e.v[1]});
      continue;
    }
    const int a = tri[i], b = tri[(i + 1) % 3], c = tri[(i + 2) % 3];
    const int e_ab = mesh.tri_edges[t][(i + 2) % 3];  // opposite c
    const int e_ca = mesh.tri_edges[t][(i + 1) % 3];  // opposite b
    bisect(a, b, c, mid[re], split[e_ab] ? mid[e_ab] : -1,
           split[e_ca] ? mid[e_ca] : -1);
  }

  out.refine_edge.clear();
  out.finalize(split_boundary_labels(mesh, mid));
  // restore the newest-vertex refinement-edge tags
  out.refine_edge.assign(out.num_triangles(), 0);
  for (int t = 0; t < out.num_triangles(); ++t) {
    for (int i = 0; i < 3; ++i) {
      const auto &e = out.edges[out.tri_edges[t][i]];
      if (VPair(e.v[0], e.v[1]) == child_refine[t]) {
        out.refine_edge[t] = i;
        break;
      }
    }
  }
  out.level = mesh.level + 1;
  return out;
}

void write_mesh(std::ostream &os, const Mesh &mesh) {
  int nb = 0;
  for (const auto &e : mesh.edges) nb += e.boundary ? 1 : 0;
  os << mesh.num_vertices() << " " << mesh.num_triangles() << " "
     << mesh.num_edges() << "\n";
  os.precision(17);
  for (const auto &v : mesh.vertices) os << v[0] << " " << v[1] << "\n";
  for (const auto &t : mesh.triangles)
    os << t[0] << " " << t[1] << " " << t[2] << "\n";
  for (const auto &e : mesh.edges)
    if (e.boundary)
      os << e.v[0] << " " << e.v[1] << " "
         << (e.label == BoundaryLabel::Dirichlet ? "dirichlet" : "neumann")
         << "\n";
  (void)nb;
}

Mesh read_mesh(std::istream &is) {
  int nv = 0, nt = 0, ne = 0;
  if (!(is >> nv >> nt >> ne)) throw std::runtime_error("mesh: bad header");
  Mesh mesh;
  mesh.vertices.resize(nv);
  for (auto &v : mesh.vertices) is >> v[0] >> v[1];
  mesh.triangles.resize(nt);
  for (auto &t : mesh.triangles) is >> t[0] >> t[1] >> t[2];
  std::vector<std::pair<VPair, BoundaryLabel>> labels;
  int a, b;
  std::string label;
  while (is >> a >> b >> label)
    labels.push_back({sorted_pair(a, b), label == "neumann"
                                             ? BoundaryLabel::Neumann
                                             : BoundaryLabel::Dirichlet});
  mesh.finalize(labels);
  return mesh;
}

}  // namespace eigfem
