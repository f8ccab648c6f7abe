#include "eigfem/spaces.hpp"

#include <cmath>
#include <stdexcept>

namespace eigfem {

std::string space_name(SpaceKind kind) {
  switch (kind) {
    case SpaceKind::P1: return "P1";
    case SpaceKind::CR: return "CR";
    case SpaceKind::ECR: return "ECR";
  }
  return "?";
}

DofMap build_dofmap(const Mesh &mesh, SpaceKind kind) {
  DofMap map;
  map.kind = kind;
  map.cell_dofs.assign(mesh.num_triangles(), {-1, -1, -1, -1});
  if (kind == SpaceKind::P1) {
    map.n_global = mesh.num_vertices();
    for (int t = 0; t < mesh.num_triangles(); ++t)
      for (int i = 0; i < 3; ++i) map.cell_dofs[t][i] = mesh.triangles[t][i];
    map.constrained.assign(map.n_global, 0);
    for (const auto &e : mesh.edges)
      if (e.boundary && e.label == BoundaryLabel::Dirichlet) {
        map.constrained[e.v[0]] = 1;
        map.constrained[e.v[1]] = 1;
      }
  } else {
    const bool enriched = (kind == SpaceKind::ECR);
    map.n_global = mesh.num_edges() + (enriched ? mesh.num_triangles() : 0);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
      for (int i = 0; i < 3; ++i) map.cell_dofs[t][i] = mesh.tri_edges[t][i];
      if (enriched) map.cell_dofs[t][3] = mesh.num_edges() + t;
    }
    map.constrained.assign(map.n_global, 0);
    for (int e = 0; e < mesh.num_edges(); ++e)
      if (mesh.edges[e].boundary &&
          mesh.edges[e].label == BoundaryLabel::Dirichlet)
        map.constrained[e] = 1;
  }
  map.full_to_free.assign(map.n_global, -1);
  for (int i = 0; i < map.n_global; ++i)
    if (!map.constrained[i]) {
      map.full_to_free[i] = map.n_free++;
      map.free_to_full.push_back(i);
    }
  return map;
}

namespace {

// Mean of a quadratic over segment [a,b] (Simpson, exact).
double edge_mean_quad(const Quad2 &q, const Eigen::Vector2d &a,
                      const Eigen::Vector2d &b) {
  return (q.value(a) + 4.0 * q.value(0.5 * (a + b)) + q.value(b)) / 6.0;
}

// Mean of a quadratic over the triangle (midpoint rule, exact).
double element_mean_quad(const Quad2 &q, const ElementGeometry &g) {
  double s = 0.0;
  for (int i = 0; i < 3; ++i) {
    Eigen::Vector2d m = 0.5 * (g.p.row((i + 1) % 3) + g.p.row((i + 2) % 3));
    s += q.value(m);
  }
  return s / 3.0;
}

// The four ECR dof functionals applied to a quadratic: three edge means
// (edge i opposite vertex i) and the element mean.
Eigen::Vector4d ecr_functionals(const Quad2 &q, const ElementGeometry &g) {
  Eigen::Vector4d v;
  for (int i = 0; i < 3; ++i)
    v[i] = edge_mean_quad(q, g.p.row((i + 1) % 3), g.p.row((i + 2) % 3));
  v[3] = element_mean_quad(q, g);
  return v;
}

std::array<Quad2, 4> ecr_monomials(const ElementGeometry &g) {
  std::array<Quad2, 4> m;
  for (auto &q : m) q.center = g.centroid;
  m[0].c[0] = 1.0;
  m[1].c[1] = 1.0;
  m[2].c[2] = 1.0;
  m[3].c[3] = 1.0;
  m[3].c[5] = 1.0;
  return m;
}

}  // namespace

LocalBasis local_basis(const ElementGeometry &g, SpaceKind kind) {
  LocalBasis basis;
  if (kind == SpaceKind::P1) {
    basis.count = 3;
    for (int i = 0; i < 3; ++i)
      basis.fn[i] = Quad2::affine(g.centroid, 1.0 / 3.0, g.grad_phi[i]);
    return basis;
  }
  if (kind == SpaceKind::CR) {
    basis.count = 3;
    for (int i = 0; i < 3; ++i)
      basis.fn[i] = Quad2::affine(g.centroid, 1.0 / 3.0, -2.0 * g.grad_phi[i]);
    return basis;
  }
  // ECR: dual basis to {edge means, element mean} over
  // {1, X, Y, X^2+Y^2} in centroid-centered coordinates.
  basis.count = 4;
  const auto mono = ecr_monomials(g);
  Eigen::Matrix4d D;
  for (int j = 0; j < 4; ++j) D.col(j) = ecr_functionals(mono[j], g);
  Eigen::Matrix4d C = D.inverse();
  for (int j = 0; j < 4; ++j) {
    Quad2 b;
    b.center = g.centroid;
    for (int k = 0; k < 4; ++k) b += C(k, j) * mono[k];
    basis.fn[j] = b;
  }
  return basis;
}

Quad2 local_field(const Mesh &mesh, const DofMap &dofmap,
                  const DiscreteField &u, int t) {
  const ElementGeometry g = element_geometry(mesh, t);
  const LocalBasis basis = local_basis(g, dofmap.kind);
  Quad2 q;
  q.center = g.centroid;
  for (int i = 0; i < basis.count; ++i)
    q += u.coeffs[dofmap.cell_dofs[t][i]] * basis.fn[i];
  return q;
}

DiscreteField interpolate(
    SpaceKind kind, const std::function<double(const Eigen::Vector2d &)> &f,
    const Mesh &mesh, const DofMap &dofmap) {
  DiscreteField u;
  u.kind = kind;
  u.coeffs = Eigen::VectorXd::Zero(dofmap.n_global);
  if (kind == SpaceKind::P1) {
    for (int v = 0; v < mesh.num_vertices(); ++v)
      u.coeffs[v] = f(mesh.vertices[v]);
    return u;
  }
  for (int e = 0; e < mesh.num_edges(); ++e)
    u.coeffs[e] =
        edge_mean(mesh.vertices[mesh.edges[e].v[0]],
                  mesh.vertices[mesh.edges[e].v[1]], f);
  if (kind == SpaceKind::ECR) {
    const QuadRule &rule = tri_rule_deg6();
    for (int t = 0; t < mesh.num_triangles(); ++t) {
      const ElementGeometry g = element_geometry(mesh, t);
      u.coeffs[mesh.num_edges() + t] = integrate_tri(g.p, rule, f) / g.area;
    }
  }
  return u;
}

Quad2 ecr_bubble(int which, const ElementGeometry &g) {
  if (which != 1 && which != 2)
    throw std::invalid_argument("ecr_bubble: which must be 1 or 2");
  Quad2 phi;
  phi.center = g.centroid;
  if (which == 1) {
    phi.c[3] = 1.0;
    phi.c[5] = -1.0;
  } else {
    phi.c[4] = 1.0;
  }
  const LocalBasis basis = local_basis(g, SpaceKind::ECR);
  const Eigen::Vector4d dofs = ecr_functionals(phi, g);
  Quad2 interp;
  interp.center = g.centroid;
  for (int j = 0; j < 4; ++j) interp += dofs[j] * basis.fn[j];
  return phi - interp;
}

Quad2 centered_radial_quadratic(const ElementGeometry &g) {
  Quad2 q;
  q.center = g.centroid;
  q.c[0] = 2.0;
  q.c[3] = q.c[5] = -36.0 / g.edge_len_sq_sum;
  return q;
}

double commuting_residual(
    SpaceKind kind, const std::function<double(const Eigen::Vector2d &)> &w,
    const std::function<Eigen::Vector2d(const Eigen::Vector2d &)> &grad_w,
    const Mesh &mesh, const QuadRule &rule) {
  const DofMap dofmap = build_dofmap(mesh, kind);
  const DiscreteField pw = interpolate(kind, w, mesh, dofmap);
  double worst = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const ElementGeometry g = element_geometry(mesh, t);
    const LocalBasis basis = local_basis(g, kind);
    const Quad2 pw_loc = local_field(mesh, dofmap, pw, t);
    for (int i = 0; i < basis.count; ++i) {
      const Quad2 &v = basis.fn[i];
      const double r = integrate_tri(g.p, rule, [&](const Eigen::Vector2d &x) {
        return (grad_w(x) - pw_loc.grad(x)).dot(v.grad(x));
      });
      worst = std::max(worst, std::abs(r));
    }
  }
  return worst;
}

double energy_norm_sq(const Mesh &mesh, const DofMap &dofmap,
                      const DiscreteField &u) {
  double s = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const ElementGeometry g = element_geometry(mesh, t);
    const Quad2 q = local_field(mesh, dofmap, u, t);
    s += integrate_tri(g.p, tri_rule_deg2(), [&](const Eigen::Vector2d &x) {
      return q.grad(x).squaredNorm();
    });
  }
  return s;
}

double l2_norm_sq(const Mesh &mesh, const DofMap &dofmap,
                  const DiscreteField &u) {
  double s = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const ElementGeometry g = element_geometry(mesh, t);
    const Quad2 q = local_field(mesh, dofmap, u, t);
    s += integrate_tri(g.p, tri_rule_deg4(), [&](const Eigen::Vector2d &x) {
      const double v = q.value(x);
      return v * v;
    });
  }
  return s;
}

double l2_inner(const Mesh &mesh, const DofMap &da, const DiscreteField &a,
                const DofMap &db, const DiscreteField &b) {
  double s = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const ElementGeometry g = element_geometry(mesh, t);
    const Quad2 qa = local_field(mesh, da, a, t);
    const Quad2 qb = local_field(mesh, db, b, t);
    s += integrate_tri(g.p, tri_rule_deg4(), [&](const Eigen::Vector2d &x) {
      return qa.value(x) * qb.value(x);
    });
  }
  return s;
}

Eigen::VectorXd inflate(const DofMap &dofmap, const Eigen::VectorXd &free_vec) {
  Eigen::VectorXd full = Eigen::VectorXd::Zero(dofmap.n_global);
  for (int i = 0; i < dofmap.n_free; ++i)
    full[dofmap.free_to_full[i]] = free_vec[i];
  return full;
}

Eigen::VectorXd restrict_free(const DofMap &dofmap,
                              const Eigen::VectorXd &full_vec) {
  Eigen::VectorXd v(dofmap.n_free);
  for (int i = 0; i < dofmap.n_free; ++i)
    v[i] = full_vec[dofmap.free_to_full[i]];
  return v;
}

}  // namespace eigfem
