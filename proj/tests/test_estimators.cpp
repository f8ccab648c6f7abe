#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "eigfem/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

using namespace eigfem;

namespace {

Mesh random_triangle(std::mt19937 &rng) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (;;) {
    Mesh mesh;
    mesh.vertices = {{unif(rng), unif(rng)},
                     {unif(rng), unif(rng)},
                     {unif(rng), unif(rng)}};
    mesh.triangles = {{0, 1, 2}};
    const Eigen::Vector2d a = mesh.vertices[1] - mesh.vertices[0];
    const Eigen::Vector2d b = mesh.vertices[2] - mesh.vertices[0];
    const double area2 = a[0] * b[1] - a[1] * b[0];
    if (area2 < 0) std::swap(mesh.vertices[1], mesh.vertices[2]);
    double lmax = 0;
    for (int i = 0; i < 3; ++i)
      lmax = std::max(lmax,
                      (mesh.vertices[(i + 1) % 3] - mesh.vertices[i]).norm());
    if (std::abs(area2) < 0.2 * lmax * lmax) continue;
    mesh.finalize({});
    return mesh;
  }
}

Mesh neumann_square(int refinements) {
  Mesh mesh;
  mesh.vertices = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  mesh.triangles = {{0, 1, 2}, {0, 2, 3}};
  mesh.finalize({{{0, 1}, BoundaryLabel::Neumann},
                 {{1, 2}, BoundaryLabel::Neumann},
                 {{2, 3}, BoundaryLabel::Neumann},
                 {{0, 3}, BoundaryLabel::Neumann}});
  for (int k = 0; k < refinements; ++k) mesh = refine_uniform(mesh);
  return mesh;
}

// interpolation error of a quadratic, evaluated directly from the dof system
Quad2 interpolation_error(SpaceKind kind, const Mesh &mesh, const Quad2 &w) {
  const DofMap map = build_dofmap(mesh, kind);
  const DiscreteField u = interpolate(
      kind, [&](const Eigen::Vector2d &x) { return w.value(x); }, mesh, map);
  const Quad2 pw = local_field(mesh, map, u, 0);
  // re-center pw onto w's center before subtracting
  Quad2 shifted;
  shifted.center = w.center;
  shifted.c[0] = pw.value(w.center);
  const Eigen::Vector2d grad = pw.grad(w.center);
  shifted.c = {shifted.c[0], grad[0], grad[1], pw.c[3], pw.c[4], pw.c[5]};
  return w - shifted;
}

}  // namespace

TEST_CASE("zero Hessian gives the zero polynomial") {
  std::mt19937 rng(2);
  const Mesh mesh = random_triangle(rng);
  const ElementGeometry g = element_geometry(mesh, 0);
  for (SpaceKind family : {SpaceKind::P1, SpaceKind::CR, SpaceKind::ECR}) {
    const Quad2 p = p_polynomial(family, g, Eigen::Matrix2d::Zero());
    for (double c : p.c) CHECK(c == 0.0);
  }
}

TEST_CASE("conforming correction with identity Hessian at the centroid") {
  Mesh mesh;
  mesh.vertices = {{0, 0}, {1, 0}, {0, 1}};
  mesh.triangles = {{0, 1, 2}};
  mesh.finalize({});
  const ElementGeometry g = element_geometry(mesh, 0);
  const Quad2 p = p_polynomial(SpaceKind::P1, g, Eigen::Matrix2d::Identity());
  // -1/2 sum |e_i|^2 (t_i' t_i) phi phi = -(H_K/2)(1/9) at the centroid
  CHECK(p.value(g.centroid) == doctest::Approx(-2.0 / 9.0));
}

TEST_CASE("correction polynomials reproduce the interpolation error") {
  std::mt19937 rng(37);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Mesh mesh = random_triangle(rng);
    const ElementGeometry g = element_geometry(mesh, 0);
    Quad2 w;
    w.center = g.centroid;
    for (double &c : w.c) c = unif(rng);
    Eigen::Matrix2d hess;
    hess << 2.0 * w.c[3], w.c[4], w.c[4], 2.0 * w.c[5];
    const double scale =
        hess.cwiseAbs().maxCoeff() * g.diameter * g.diameter + 1e-30;
    for (SpaceKind family : {SpaceKind::P1, SpaceKind::CR, SpaceKind::ECR}) {
      const Quad2 err = interpolation_error(family, mesh, w);
      const Quad2 p = p_polynomial(family, g, hess);
      for (int i = 0; i < 7; ++i) {
        const Eigen::Vector2d x =
            g.centroid + 0.3 * Eigen::Vector2d(unif(rng), unif(rng));
        CHECK(std::abs(err.value(x) - p.value(x)) <= 1e-11 * scale);
      }
    }
  }
}

TEST_CASE("fabricated exact recovery gives zero estimates") {
  const Mesh mesh = neumann_square(2);
  auto f = [](const Eigen::Vector2d &x) { return 1.0 + x[0] + 2.0 * x[1]; };
  for (SpaceKind kind : {SpaceKind::CR, SpaceKind::ECR}) {
    const DofMap map = build_dofmap(mesh, kind);
    const DiscreteField u = interpolate(kind, f, mesh, map);
    RecoveredGradient g;
    g.tag = kind == SpaceKind::CR ? Provenance::KhCR : Provenance::KhECR;
    g.mid.assign(mesh.num_triangles(), {Eigen::Vector2d(1, 2),
                                        Eigen::Vector2d(1, 2),
                                        Eigen::Vector2d(1, 2)});
    CHECK(std::abs(estimate_type1(kind, 3.0, mesh, map, u, g)) <= 1e-13);
    CHECK(std::abs(estimate_type2(kind, 3.0, mesh, map, u, g)) <= 1e-13);
  }
  const DofMap p1 = build_dofmap(mesh, SpaceKind::P1);
  const DiscreteField u = interpolate(SpaceKind::P1, f, mesh, p1);
  RecoveredGradient g;
  g.tag = Provenance::PprP1;
  g.mid.assign(mesh.num_triangles(), {Eigen::Vector2d(1, 2),
                                      Eigen::Vector2d(1, 2),
                                      Eigen::Vector2d(1, 2)});
  CHECK(estimate_conforming(mesh, p1, u, g) <= 1e-26);
}

TEST_CASE("edge jump bookkeeping passes the Green identity") {
  // for a broken-linear u with zero element Laplacian and any continuous v:
  //   sum_K int_K grad v . grad u = sum_{e int} int_e v [du/dn]
  //                               + sum_{e bdy} int_e v du/dn
  std::mt19937 rng(47);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const Mesh mesh = neumann_square(3);
  const DofMap map = build_dofmap(mesh, SpaceKind::CR);
  DiscreteField u;
  u.kind = SpaceKind::CR;
  u.coeffs = Eigen::VectorXd::NullaryExpr(
      map.n_global, [&](Eigen::Index) { return unif(rng); });
  Quad2 v;
  v.center = Eigen::Vector2d(0.5, 0.5);
  for (double &c : v.c) c = unif(rng);

  std::vector<Quad2> local(mesh.num_triangles());
  std::vector<ElementGeometry> geom(mesh.num_triangles());
  double vol = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    geom[t] = element_geometry(mesh, t);
    local[t] = local_field(mesh, map, u, t);
    vol += integrate_tri(geom[t].p, tri_rule_deg4(),
                         [&](const Eigen::Vector2d &x) {
                           return v.grad(x).dot(local[t].grad(x));
                         });
  }
  double edge = 0.0;
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const auto &ed = mesh.edges[e];
    const Eigen::Vector2d a = mesh.vertices[ed.v[0]];
    const Eigen::Vector2d b = mesh.vertices[ed.v[1]];
    const Eigen::Vector2d d = (b - a).normalized();
    Eigen::Vector2d n(d[1], -d[0]);
    const int k1 = ed.tri[0];
    if (n.dot(geom[k1].centroid - 0.5 * (a + b)) > 0.0) n = -n;  // outward of K1
    edge += integrate_edge(a, b, [&](const Eigen::Vector2d &x) {
      const double jump =
          ed.boundary ? n.dot(local[k1].grad(x))
                      : n.dot(local[k1].grad(x) - local[ed.tri[1]].grad(x));
      return v.value(x) * jump;
    });
  }
  CHECK(vol == doctest::Approx(edge).epsilon(1e-10));
}

TEST_CASE("estimates are invariant under triangle relabeling") {
  auto f = [](const Eigen::Vector2d &x) {
    return std::sin(M_PI * x[0]) * std::sin(M_PI * x[1]);
  };
  // recovered gradient fabricated from midpoint positions, so that it is
  // identical for both labelings and only the edge/jump plumbing is probed
  auto run = [&](const Mesh &mesh) {
    const DofMap map = build_dofmap(mesh, SpaceKind::CR);
    const DiscreteField u = interpolate(SpaceKind::CR, f, mesh, map);
    RecoveredGradient g;
    g.mid.resize(mesh.num_triangles());
    for (int t = 0; t < mesh.num_triangles(); ++t)
      for (int i = 0; i < 3; ++i) {
        const Eigen::Vector2d m = mesh.edge_midpoint(mesh.tri_edges[t][i]);
        g.mid[t][i] = Eigen::Vector2d(M_PI * std::cos(M_PI * m[0]) *
                                          std::sin(M_PI * m[1]),
                                      M_PI * std::sin(M_PI * m[0]) *
                                          std::cos(M_PI * m[1]));
      }
    return std::pair{estimate_type1(SpaceKind::CR, 19.7, mesh, map, u, g),
                     estimate_type2(SpaceKind::CR, 19.7, mesh, map, u, g)};
  };
  Mesh mesh = build_domain("square");
  for (int k = 1; k < 3; ++k) mesh = refine_uniform(mesh);
  Mesh reversed = mesh;
  std::reverse(reversed.triangles.begin(), reversed.triangles.end());
  std::vector<std::pair<std::pair<int, int>, BoundaryLabel>> labels;
  for (const auto &e : mesh.edges)
    if (e.boundary) labels.push_back({{e.v[0], e.v[1]}, e.label});
  reversed.finalize(labels);
  const auto [f1, f2] = run(mesh);
  const auto [r1, r2] = run(reversed);
  CHECK(f1 == doctest::Approx(r1).epsilon(1e-10));
  CHECK(f2 == doctest::Approx(r2).epsilon(1e-10));
}

TEST_CASE("vertex averaging projects a continuous CR field onto itself") {
  const Mesh mesh = neumann_square(2);
  const DofMap cr = build_dofmap(mesh, SpaceKind::CR);
  const DofMap p1 = build_dofmap(mesh, SpaceKind::P1);
  auto f = [](const Eigen::Vector2d &x) { return x[0] - 0.3 * x[1] + 0.1; };
  const DiscreteField u = interpolate(SpaceKind::CR, f, mesh, cr);
  const auto [proj, energy] = average_projection(mesh, cr, u, p1);
  const double norm = std::sqrt(l2_norm_sq(mesh, cr, u));
  for (int v = 0; v < mesh.num_vertices(); ++v)
    CHECK(proj.coeffs[v] * norm ==
          doctest::Approx(f(mesh.vertices[v])).epsilon(1e-11));
  CHECK(energy == doctest::Approx(energy_norm_sq(mesh, p1, proj)));
}

TEST_CASE("combined eigenvalue arithmetic") {
  CHECK(combined_eigenvalue(19.70, 0.3, 19.78, 0.3) ==
        doctest::Approx(19.74));  // equal estimates: midpoint
  // weight on each bound proportional to the other bound's estimate
  const double c = combined_eigenvalue(10.0, 1.0, 20.0, 3.0);
  CHECK(c == doctest::Approx((1.0 * 20.0 + 3.0 * 10.0) / 4.0));
  CHECK(c >= 10.0);
  CHECK(c <= 20.0);
  // affine invariance
  CHECK(combined_eigenvalue(10.0 + 5.0, 1.0, 20.0 + 5.0, 3.0) ==
        doctest::Approx(c + 5.0));
  // degenerate weights fall back to the midpoint
  CHECK(combined_eigenvalue(1.0, 1e-18, 3.0, -1e-18) == doctest::Approx(2.0));
}

TEST_CASE("recovered and extrapolated eigenvalue arithmetic") {
  CHECK(recovered_eigenvalue(false, 19.70, 0.04) == doctest::Approx(19.74));
  CHECK(recovered_eigenvalue(true, 19.78, 0.04) == doctest::Approx(19.74));
  CHECK(extrapolate(3.0, 3.0) == doctest::Approx(3.0));
  CHECK(extrapolate(19.73, 19.70) == doctest::Approx(19.74));
}

TEST_CASE("report storage and CSV serialization") {
  EstimateReport report;
  report.level = 4;
  report.h = 0.125;
  report.set(0, "lambda_CR", 19.654);
  report.set(1, "lambda_CR", 48.1);
  CHECK(report.has(0, "lambda_CR"));
  CHECK(!report.has(0, "lambda_P1"));
  CHECK(report.get(1, "lambda_CR") == doctest::Approx(48.1));
  CHECK_THROWS(report.get(0, "nope"));
  std::stringstream ss;
  write_csv(ss, report);
  std::string line;
  std::getline(ss, line);
  CHECK(line == "level,eig_index,quantity,value");
  std::getline(ss, line);
  CHECK(line.substr(0, 19) == "4,0,lambda_CR,19.65");
}
