#include "eigfem/recovery.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <set>
#include <stdexcept>

namespace eigfem {

namespace {

bool edge_has_vertex(const Mesh::Edge &e, int v) {
  return e.v[0] == v || e.v[1] == v;
}

// Least-squares quadratic fit of (points, values) in coordinates centered at
// `center` and scaled by the patch radius; returns the gradient of the fit
// at the center, or false if the patch is rank deficient / ill conditioned.
bool fit_gradient(const std::vector<Eigen::Vector2d> &points,
                  const std::vector<double> &values,
                  const Eigen::Vector2d &center, Eigen::Vector2d &grad) {
  const int n = static_cast<int>(points.size());
  if (n < 6) return false;
  double radius = 0.0;
  for (const auto &p : points) radius = std::max(radius, (p - center).norm());
  if (radius <= 0.0) return false;
  Eigen::MatrixXd vander(n, 6);
  Eigen::VectorXd rhs(n);
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector2d d = (points[i] - center) / radius;
    vander.row(i) << 1.0, d[0], d[1], d[0] * d[0], d[0] * d[1], d[1] * d[1];
    rhs[i] = values[i];
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(vander,
                                        Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto &sigma = svd.singularValues();
  if (sigma[5] <= 0.0 || sigma[0] / sigma[5] > 1e4) return false;
  const Eigen::VectorXd coef = svd.solve(rhs);
  grad = Eigen::Vector2d(coef[1], coef[2]) / radius;
  return true;
}

// Affine fallback for patches that cannot reach six nodes (very coarse
// meshes); still reproduces linear fields exactly.
bool fit_gradient_linear(const std::vector<Eigen::Vector2d> &points,
                         const std::vector<double> &values,
                         const Eigen::Vector2d &center, Eigen::Vector2d &grad) {
  const int n = static_cast<int>(points.size());
  if (n < 3) return false;
  double radius = 0.0;
  for (const auto &p : points) radius = std::max(radius, (p - center).norm());
  if (radius <= 0.0) return false;
  Eigen::MatrixXd vander(n, 3);
  Eigen::VectorXd rhs(n);
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector2d d = (points[i] - center) / radius;
    vander.row(i) << 1.0, d[0], d[1];
    rhs[i] = values[i];
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(vander,
                                        Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto &sigma = svd.singularValues();
  if (sigma[2] <= 0.0 || sigma[0] / sigma[2] > 1e4) return false;
  const Eigen::VectorXd coef = svd.solve(rhs);
  grad = Eigen::Vector2d(coef[1], coef[2]) / radius;
  return true;
}

}  // namespace

RecoveredGradient recover_kh(const Mesh &mesh, const DofMap &dofmap,
                             const DiscreteField &u) {
  if (dofmap.kind == SpaceKind::P1)
    throw std::invalid_argument("recover_kh: needs a CR or ECR field");

  std::vector<Quad2> local(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t)
    local[t] = local_field(mesh, dofmap, u, t);

  const int ne = mesh.num_edges();
  std::vector<Eigen::Vector2d> value(ne, Eigen::Vector2d::Zero());
  std::vector<char> known(ne, 0);
  for (int e = 0; e < ne; ++e) {
    const auto &edge = mesh.edges[e];
    if (edge.boundary) continue;
    const Eigen::Vector2d m = mesh.edge_midpoint(e);
    value[e] = 0.5 * (local[edge.tri[0]].grad(m) + local[edge.tri[1]].grad(m));
    known[e] = 1;
  }

  // Boundary midpoints: 2 v(m') - v(m'') where e' is an interior edge of
  // the boundary element, K' its neighbor, and e'' the edge of K' not
  // touching e. Among the (at most two) interior-edge candidates, pick the
  // one whose midpoints come closest to the collinear configuration
  // 2m' - m'' = m; that choice is exact for affine fields on parallelogram
  // meshes. Values are propagated until fixpoint; boundary cycles on very
  // coarse meshes fall back to the one-sided trace.
  struct Pending {
    int edge, src1, src2, fallback_tri;
  };
  std::vector<Pending> pending;
  for (int e = 0; e < ne; ++e) {
    const auto &edge = mesh.edges[e];
    if (!edge.boundary) continue;
    const int k = edge.tri[0];
    const Eigen::Vector2d m = mesh.edge_midpoint(e);
    int eprime = -1, esecond = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 3; ++i) {
      const int f = mesh.tri_edges[k][i];
      if (mesh.edges[f].boundary) continue;
      const auto &ep = mesh.edges[f];
      const int kprime = (ep.tri[0] == k) ? ep.tri[1] : ep.tri[0];
      int opp = -1;
      for (int j = 0; j < 3; ++j) {
        const int g2 = mesh.tri_edges[kprime][j];
        if (!edge_has_vertex(mesh.edges[g2], edge.v[0]) &&
            !edge_has_vertex(mesh.edges[g2], edge.v[1]))
          opp = g2;
      }
      if (opp < 0) continue;
      const double score = (2.0 * mesh.edge_midpoint(f) -
                            mesh.edge_midpoint(opp) - m)
                               .norm();
      if (score < best - 1e-12 * mesh.edge_length(e) ||
          (score < best + 1e-12 * mesh.edge_length(e) && f < eprime)) {
        best = score;
        eprime = f;
        esecond = opp;
      }
    }
    if (eprime < 0)
      throw std::runtime_error(
          "recover_kh: boundary element without usable interior edge");
    pending.push_back({e, eprime, esecond, k});
  }
  bool progress = true;
  while (progress) {
    progress = false;
    for (const auto &p : pending) {
      if (known[p.edge] || !known[p.src1] || !known[p.src2]) continue;
      value[p.edge] = 2.0 * value[p.src1] - value[p.src2];
      known[p.edge] = 1;
      progress = true;
    }
  }
  for (const auto &p : pending)
    if (!known[p.edge]) {
      value[p.edge] = local[p.fallback_tri].grad(mesh.edge_midpoint(p.edge));
      known[p.edge] = 1;
    }

  RecoveredGradient g;
  g.tag = (dofmap.kind == SpaceKind::CR) ? Provenance::KhCR : Provenance::KhECR;
  g.mid.resize(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t)
    for (int i = 0; i < 3; ++i) g.mid[t][i] = value[mesh.tri_edges[t][i]];
  return g;
}

RecoveredGradient recover_ppr(const Mesh &mesh, const DofMap &dofmap,
                              const DiscreteField &u, Provenance tag) {
  if (dofmap.kind != SpaceKind::P1)
    throw std::invalid_argument("recover_ppr: needs a P1 field");

  std::vector<std::vector<int>> star(mesh.num_vertices());
  for (const auto &e : mesh.edges) {
    star[e.v[0]].push_back(e.v[1]);
    star[e.v[1]].push_back(e.v[0]);
  }

  std::vector<Eigen::Vector2d> vgrad(mesh.num_vertices());
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    std::set<int> patch(star[v].begin(), star[v].end());
    patch.insert(v);
    Eigen::Vector2d grad;
    for (int grow = 0;; ++grow) {
      std::vector<Eigen::Vector2d> pts;
      std::vector<double> vals;
      for (int w : patch) {
        pts.push_back(mesh.vertices[w]);
        vals.push_back(u.coeffs[w]);
      }
      if (fit_gradient(pts, vals, mesh.vertices[v], grad)) break;
      std::set<int> next = patch;
      for (int w : patch)
        for (int x : star[w]) next.insert(x);
      if (grow >= 3 || next.size() == patch.size()) {
        if (fit_gradient_linear(pts, vals, mesh.vertices[v], grad)) break;
        throw std::runtime_error("recover_ppr: rank-deficient vertex patch");
      }
      patch.swap(next);
    }
    vgrad[v] = grad;
  }

  RecoveredGradient g;
  g.tag = tag;
  g.mid.resize(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t)
    for (int i = 0; i < 3; ++i) {
      const int a = mesh.triangles[t][(i + 1) % 3];
      const int b = mesh.triangles[t][(i + 2) % 3];
      g.mid[t][i] = 0.5 * (vgrad[a] + vgrad[b]);
    }
  return g;
}

RecoveredGradient recover_gh(const Mesh &mesh, const DofMap &dofmap,
                             const DiscreteField &u) {
  if (dofmap.kind != SpaceKind::CR)
    throw std::invalid_argument("recover_gh: needs a CR field");

  // edges around a vertex, for patch growth
  std::vector<std::vector<int>> vertex_edges(mesh.num_vertices());
  for (int e = 0; e < mesh.num_edges(); ++e) {
    vertex_edges[mesh.edges[e].v[0]].push_back(e);
    vertex_edges[mesh.edges[e].v[1]].push_back(e);
  }

  const int ne = mesh.num_edges();
  std::vector<Eigen::Vector2d> value(ne);
  for (int e = 0; e < ne; ++e) {
    std::set<int> patch;
    patch.insert(e);
    for (int v : {mesh.edges[e].v[0], mesh.edges[e].v[1]})
      for (int f : vertex_edges[v]) patch.insert(f);
    Eigen::Vector2d grad;
    const Eigen::Vector2d m = mesh.edge_midpoint(e);
    for (int grow = 0;; ++grow) {
      std::vector<Eigen::Vector2d> pts;
      std::vector<double> vals;
      for (int f : patch) {
        pts.push_back(mesh.edge_midpoint(f));
        vals.push_back(u.coeffs[f]);
      }
      if (fit_gradient(pts, vals, m, grad)) break;
      std::set<int> next = patch;
      for (int f : patch)
        for (int v : {mesh.edges[f].v[0], mesh.edges[f].v[1]})
          for (int g2 : vertex_edges[v]) next.insert(g2);
      if (grow >= 3 || next.size() == patch.size()) {
        if (fit_gradient_linear(pts, vals, m, grad)) break;
        throw std::runtime_error("recover_gh: rank-deficient edge patch");
      }
      patch.swap(next);
    }
    value[e] = grad;
  }

  RecoveredGradient g;
  g.tag = Provenance::PprAdaptive;
  g.mid.resize(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t)
    for (int i = 0; i < 3; ++i) g.mid[t][i] = value[mesh.tri_edges[t][i]];
  return g;
}

std::vector<Eigen::Matrix2d> recovered_hessian(const RecoveredGradient &g,
                                               const Mesh &mesh) {
  std::vector<Eigen::Matrix2d> h(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const ElementGeometry geom = element_geometry(mesh, t);
    Eigen::Matrix2d m = Eigen::Matrix2d::Zero();
    for (int i = 0; i < 3; ++i)
      m += g.mid[t][i] * (-2.0 * geom.grad_phi[i]).transpose();
    h[t] = m;
  }
  return h;
}

double recovery_residual_sq(const Mesh &mesh, const DofMap &dofmap,
                            const DiscreteField &u,
                            const RecoveredGradient &g) {
  double s = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const ElementGeometry geom = element_geometry(mesh, t);
    const Quad2 q = local_field(mesh, dofmap, u, t);
    s += integrate_tri(geom.p, tri_rule_deg4(), [&](const Eigen::Vector2d &x) {
      return (g.eval(geom, t, x) - q.grad(x)).squaredNorm();
    });
  }
  return s;
}

}  // namespace eigfem
