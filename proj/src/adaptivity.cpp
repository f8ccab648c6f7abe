#include "eigfem/adaptivity.hpp"

#include <cmath>
#include <ostream>

namespace eigfem {

std::vector<double> indicator(double lambda, const Mesh &mesh,
                              const DofMap &dofmap, const DiscreteField &u) {
  std::vector<ElementGeometry> geom(mesh.num_triangles());
  std::vector<Quad2> local(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    geom[t] = element_geometry(mesh, t);
    local[t] = local_field(mesh, dofmap, u, t);
  }

  // squared jump terms per edge, already weighted by h_e
  std::vector<double> edge_term(mesh.num_edges(), 0.0);
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const auto &edge = mesh.edges[e];
    const Eigen::Vector2d a = mesh.vertices[edge.v[0]];
    const Eigen::Vector2d b = mesh.vertices[edge.v[1]];
    const Eigen::Vector2d tg = (b - a).normalized();
    const Eigen::Vector2d n(tg[1], -tg[0]);
    const double he = mesh.edge_length(e);
    double sq = 0.0;
    if (!edge.boundary) {
      const int k1 = edge.tri[0], k2 = edge.tri[1];
      sq = integrate_edge(a, b, [&](const Eigen::Vector2d &x) {
        const Eigen::Vector2d dj = local[k1].grad(x) - local[k2].grad(x);
        const double jn = n.dot(dj), jt = tg.dot(dj);
        return jn * jn + jt * jt;
      });
    } else {
      const int k = edge.tri[0];
      const bool dirichlet = (edge.label == BoundaryLabel::Dirichlet);
      sq = integrate_edge(a, b, [&](const Eigen::Vector2d &x) {
        const Eigen::Vector2d dg = local[k].grad(x);
        const double v = dirichlet ? tg.dot(dg) : n.dot(dg);
        return v * v;
      });
    }
    edge_term[e] = he * sq;
  }

  std::vector<double> eta(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double unorm_sq =
        integrate_tri(geom[t].p, tri_rule_deg4(), [&](const Eigen::Vector2d &x) {
          const double v = local[t].value(x);
          return v * v;
        });
    double sq = lambda * lambda * geom[t].diameter * geom[t].diameter * unorm_sq;
    for (int i = 0; i < 3; ++i) sq += edge_term[mesh.tri_edges[t][i]];
    eta[t] = std::sqrt(sq);
  }
  return eta;
}

std::set<int> mark(const std::vector<double> &eta, double theta) {
  double max_eta = 0.0;
  for (double v : eta) max_eta = std::max(max_eta, v);
  std::set<int> marked;
  for (size_t t = 0; t < eta.size(); ++t)
    if (eta[t] > theta * max_eta) marked.insert(static_cast<int>(t));
  return marked;
}

AdaptState adapt_loop(const Mesh &initial, const AdaptOptions &opts) {
  AdaptState state;
  state.mesh = initial;
  double eta0 = -1.0;

  for (int k = 0; k < opts.max_iter; ++k) {
    const DofMap dofmap = build_dofmap(state.mesh, SpaceKind::CR);
    const SparseSym A = assemble_stiffness(state.mesh, dofmap);
    const SparseSym B = assemble_mass(state.mesh, dofmap);
    std::vector<EigenPair> pairs;
    try {
      pairs = solve_smallest(A, B, opts.nev, opts.solve);
    } catch (const std::exception &) {
      if (state.history.empty()) throw;
      return state;  // partial history on solver failure
    }
    const EigenPair &pair = pairs.at(opts.eig_index);

    DiscreteField u;
    u.kind = SpaceKind::CR;
    u.coeffs = inflate(dofmap, pair.vec);

    const RecoveredGradient g = recover_gh(state.mesh, dofmap, u);
    const double f = estimate_type2(SpaceKind::CR, pair.value, state.mesh,
                                    dofmap, u, g);

    const std::vector<double> eta = indicator(pair.value, state.mesh, dofmap, u);
    double eta_sq = 0.0;
    for (double v : eta) eta_sq += v * v;
    const double eta_total = std::sqrt(eta_sq);
    if (eta0 < 0.0) eta0 = eta_total;

    AdaptRecord rec;
    rec.k = k;
    rec.ndof = dofmap.n_free;
    rec.lambda = pair.value;
    rec.f_estimate = f;
    rec.lambda_corrected = pair.value + f;
    rec.eta = eta_total;
    rec.num_triangles = state.mesh.num_triangles();
    state.history.push_back(rec);

    if (eta_total <= opts.eta_stop_rel * eta0) break;
    const std::set<int> marked = mark(eta, opts.theta);
    if (marked.empty()) break;
    state.mesh = refine_marked(state.mesh, marked);
  }
  return state;
}

void write_history_csv(std::ostream &os, const AdaptState &state, bool header) {
  if (header) os << "k,ndof,ntri,lambda,lambda_corrected,f_estimate,eta\n";
  os.precision(17);
  for (const auto &r : state.history)
    os << r.k << "," << r.ndof << "," << r.num_triangles << "," << r.lambda
       << "," << r.lambda_corrected << "," << r.f_estimate << "," << r.eta
       << "\n";
}

}  // namespace eigfem
