#include "eigfem/estimators.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace eigfem {

Quad2 p_polynomial(SpaceKind family, const ElementGeometry &geom,
                   const Eigen::Matrix2d &H) {
  const Eigen::Matrix2d Hs = 0.5 * (H + H.transpose());

  if (family == SpaceKind::P1) {
    Quad2 p;
    p.center = geom.centroid;
    for (int i = 0; i < 3; ++i) {
      const double tHt = geom.tangent[i].dot(Hs * geom.tangent[i]);
      const Quad2 a =
          Quad2::affine(geom.centroid, 1.0 / 3.0, geom.grad_phi[(i + 1) % 3]);
      const Quad2 b =
          Quad2::affine(geom.centroid, 1.0 / 3.0, geom.grad_phi[(i + 2) % 3]);
      p += (-0.5 * geom.edge_len[i] * geom.edge_len[i] * tHt) *
           Quad2::product(a, b);
    }
    return p;
  }

  const double d11 = Hs(0, 0), d22 = Hs(1, 1), d12 = Hs(0, 1);
  Quad2 p = ((d11 - d22) / 4.0) * ecr_bubble(1, geom) +
            d12 * ecr_bubble(2, geom);
  if (family == SpaceKind::CR) {
    // coefficient of the radial term: the element mean of the interpolation
    // error, which reduces to (1/72) sum_i e_i^T H e_i over the edge vectors
    const double c = (geom.cA + 2.0 * geom.edge_len_sq_sum) / 288.0 * d11 +
                     (2.0 * geom.edge_len_sq_sum - geom.cA) / 288.0 * d22 +
                     geom.cB / 36.0 * d12;
    p -= c * centered_radial_quadratic(geom);
  }
  return p;
}

double estimate_type1(SpaceKind kind, double lambda, const Mesh &mesh,
                      const DofMap &dofmap, const DiscreteField &u,
                      const RecoveredGradient &g) {
  if (kind == SpaceKind::P1)
    throw std::invalid_argument("estimate_type1: needs a CR or ECR pair");
  const std::vector<Eigen::Matrix2d> hess = recovered_hessian(g, mesh);
  double volume = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const ElementGeometry geom = element_geometry(mesh, t);
    const Quad2 p = p_polynomial(kind, geom, hess[t]);
    const Quad2 q = local_field(mesh, dofmap, u, t);
    volume += integrate_tri(geom.p, tri_rule_deg4(),
                            [&](const Eigen::Vector2d &x) {
                              return p.value(x) * q.value(x);
                            });
  }
  return recovery_residual_sq(mesh, dofmap, u, g) - 2.0 * lambda * volume;
}

double estimate_type2(SpaceKind kind, double lambda, const Mesh &mesh,
                      const DofMap &dofmap, const DiscreteField &u,
                      const RecoveredGradient &g) {
  if (kind == SpaceKind::P1)
    throw std::invalid_argument("estimate_type2: needs a CR or ECR pair");
  const std::vector<Eigen::Matrix2d> hess = recovered_hessian(g, mesh);

  std::vector<ElementGeometry> geom(mesh.num_triangles());
  std::vector<Quad2> corr(mesh.num_triangles()), local(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    geom[t] = element_geometry(mesh, t);
    corr[t] = p_polynomial(SpaceKind::P1, geom[t], hess[t]);
    local[t] = local_field(mesh, dofmap, u, t);
  }

  double edge_sum = 0.0;
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const auto &edge = mesh.edges[e];
    if (edge.boundary) continue;
    const int k1 = edge.tri[0], k2 = edge.tri[1];
    const Eigen::Vector2d a = mesh.vertices[edge.v[0]];
    const Eigen::Vector2d b = mesh.vertices[edge.v[1]];
    const Eigen::Vector2d d = (b - a).normalized();
    Eigen::Vector2d n(d[1], -d[0]);  // oriented from K1 to K2
    if (n.dot(geom[k2].centroid - geom[k1].centroid) < 0.0) n = -n;
    edge_sum += integrate_edge(a, b, [&](const Eigen::Vector2d &x) {
      const double avg = 0.5 * (corr[k1].value(x) + corr[k2].value(x));
      const double jump = n.dot(local[k1].grad(x) - local[k2].grad(x));
      return avg * jump;
    });
  }

  double volume = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double dlap = (kind == SpaceKind::ECR) ? local[t].laplacian() : 0.0;
    volume += integrate_tri(geom[t].p, tri_rule_deg4(),
                            [&](const Eigen::Vector2d &x) {
                              return corr[t].value(x) *
                                     (dlap + lambda * local[t].value(x));
                            });
  }

  return recovery_residual_sq(mesh, dofmap, u, g) + 2.0 * edge_sum -
         2.0 * volume;
}

double estimate_conforming(const Mesh &mesh, const DofMap &dofmap,
                           const DiscreteField &u, const RecoveredGradient &g) {
  return recovery_residual_sq(mesh, dofmap, u, g);
}

std::pair<DiscreteField, double> average_projection(const Mesh &mesh,
                                                    const DofMap &cr_map,
                                                    const DiscreteField &u_cr,
                                                    const DofMap &p1_map) {
  if (cr_map.kind != SpaceKind::CR || p1_map.kind != SpaceKind::P1)
    throw std::invalid_argument("average_projection: wrong space kinds");

  Eigen::VectorXd sum = Eigen::VectorXd::Zero(mesh.num_vertices());
  Eigen::VectorXd count = Eigen::VectorXd::Zero(mesh.num_vertices());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const Quad2 q = local_field(mesh, cr_map, u_cr, t);
    for (int i = 0; i < 3; ++i) {
      const int v = mesh.triangles[t][i];
      sum[v] += q.value(mesh.vertices[v]);
      count[v] += 1.0;
    }
  }

  DiscreteField proj;
  proj.kind = SpaceKind::P1;
  proj.coeffs = Eigen::VectorXd::Zero(p1_map.n_global);
  for (int v = 0; v < mesh.num_vertices(); ++v)
    if (!p1_map.constrained[v]) proj.coeffs[v] = sum[v] / count[v];

  const double nrm = std::sqrt(l2_norm_sq(mesh, p1_map, proj));
  if (nrm <= 0.0)
    throw std::runtime_error("average_projection: projected field vanishes");
  proj.coeffs /= nrm;
  return {proj, energy_norm_sq(mesh, p1_map, proj)};
}

double combined_eigenvalue(double lambda_low, double f_low, double lambda_up,
                           double f_up) {
  const double denom = f_low + f_up;
  if (std::abs(denom) <= 1e-14 * (std::abs(f_low) + std::abs(f_up)) ||
      denom == 0.0)
    return 0.5 * (lambda_low + lambda_up);
  return (f_low * lambda_up + f_up * lambda_low) / denom;
}

void EstimateReport::set(int eig_index, const std::string &tag, double value) {
  if (eig_index >= static_cast<int>(records.size()))
    records.resize(eig_index + 1);
  records[eig_index][tag] = value;
}

bool EstimateReport::has(int eig_index, const std::string &tag) const {
  return eig_index < static_cast<int>(records.size()) &&
         records[eig_index].count(tag) > 0;
}

double EstimateReport::get(int eig_index, const std::string &tag) const {
  if (!has(eig_index, tag))
    throw std::out_of_range("EstimateReport: missing " + tag);
  return records[eig_index].at(tag);
}

void write_csv(std::ostream &os, const EstimateReport &report, bool header) {
  if (header) os << "level,eig_index,quantity,value\n";
  os.precision(17);
  for (size_t k = 0; k < report.records.size(); ++k)
    for (const auto &[tag, value] : report.records[k])
      os << report.level << "," << k << "," << tag << "," << value << "\n";
}

}  // namespace eigfem
