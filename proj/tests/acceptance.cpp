// Acceptance checks: one PASS/FAIL line per criterion, exit code = number of
// failed criteria.
#include "eigfem/experiments.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <random>
#include <string>
#include <vector>

using namespace eigfem;

namespace {

int g_failures = 0;

void report(int criterion, bool ok, const std::string &detail) {
  std::printf("%s criterion %2d: %s\n", ok ? "PASS" : "FAIL", criterion,
              detail.c_str());
  if (!ok) ++g_failures;
}

void run(int criterion, const std::function<std::pair<bool, std::string>()> &f) {
  try {
    const auto [ok, detail] = f();
    report(criterion, ok, detail);
  } catch (const std::exception &e) {
    report(criterion, false, std::string("exception: ") + e.what());
  }
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

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

Quad2 interpolation_error(SpaceKind kind, const Mesh &mesh, const Quad2 &w) {
  const DofMap map = build_dofmap(mesh, kind);
  const DiscreteField u = interpolate(
      kind, [&](const Eigen::Vector2d &x) { return w.value(x); }, mesh, map);
  const Quad2 pw = local_field(mesh, map, u, 0);
  Quad2 shifted;
  shifted.center = w.center;
  const Eigen::Vector2d grad = pw.grad(w.center);
  shifted.c = {pw.value(w.center), grad[0], grad[1], pw.c[3], pw.c[4], pw.c[5]};
  return w - shifted;
}

// least-squares slope of y against x
double slope(const std::vector<double> &x, const std::vector<double> &y) {
  const int n = static_cast<int>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// observed order from errors on consecutive levels (h halved per level):
// minus the regression slope of log2|err| against level
double observed_order(const UniformRun &run, const std::string &tag,
                      int level_lo, int level_hi, int eig_index = 0) {
  std::vector<double> lv, le;
  for (const auto &rep : run.reports) {
    if (rep.level < level_lo || rep.level > level_hi) continue;
    if (!rep.has(eig_index, tag)) continue;
    const double err = rep.get(eig_index, tag) - run.reference[eig_index];
    lv.push_back(rep.level);
    le.push_back(std::log2(std::abs(err)));
  }
  if (lv.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  return -slope(lv, le);
}

double report_error(const UniformRun &run, int level, const std::string &tag,
                    int eig_index = 0) {
  for (const auto &rep : run.reports)
    if (rep.level == level) return rep.get(eig_index, tag) - run.reference[eig_index];
  throw std::runtime_error("level not in run: " + std::to_string(level));
}

bool match_3sig(double value, double target) {
  return std::abs(value - target) <= 5e-3 * std::abs(target);
}

}  // namespace

int main() {
  // shared measured-square run feeding criteria 3, 4, and 7
  ExperimentConfig sq;
  sq.domain = "square";
  sq.level_min = 3;
  sq.level_max = 7;
  sq.nev = 1;
  const UniformRun square = run_uniform(sq);

  run(1, []() -> std::pair<bool, std::string> {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937 rng(37);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    double worst = 0.0;
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
          worst = std::max(worst, std::abs(err.value(x) - p.value(x)) / scale);
        }
      }
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    const bool ok = worst <= 1e-11 && secs < 5.0;
    return {ok, "interpolation-error polynomials exact on 200 random "
                "(triangle, quadratic) pairs: max relative deviation " +
                    fmt(worst) + ", " + fmt(secs) + " s"};
  });

  run(2, []() -> std::pair<bool, std::string> {
    std::mt19937 rng(53);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
      const Mesh mesh = random_triangle(rng);
      Quad2 w;
      w.center = Eigen::Vector2d::Zero();
      for (double &c : w.c) c = unif(rng);
      for (SpaceKind kind : {SpaceKind::CR, SpaceKind::ECR})
        worst = std::max(
            worst,
            commuting_residual(
                kind, [&](const Eigen::Vector2d &x) { return w.value(x); },
                [&](const Eigen::Vector2d &x) { return w.grad(x); }, mesh));
    }
    return {worst <= 1e-12,
            "gradient-orthogonal interpolation residual for quadratics on 50 "
            "random triangles: max " +
                fmt(worst)};
  });

  run(3, [&]() -> std::pair<bool, std::string> {
    const double cr_ref[] = {-0.3407, -8.47e-2, -2.11e-2, -5.29e-3};
    const double p1_ref[] = {3.1266, 7.66e-1, 1.91e-1, 4.76e-2};
    bool ok = true;
    std::string bad;
    for (int level = 3; level <= 6; ++level) {
      const double ec = report_error(square, level, "lambda_CR");
      const double ep = report_error(square, level, "lambda_P1");
      if (!match_3sig(ec, cr_ref[level - 3]))
        ok = false, bad += " lambda_CR@" + std::to_string(level) + "=" + fmt(ec);
      if (!match_3sig(ep, p1_ref[level - 3]))
        ok = false, bad += " lambda_P1@" + std::to_string(level) + "=" + fmt(ep);
    }
    const double ex = report_error(square, 5, "ext_CR");
    if (std::abs(ex - 3.72e-5) > 0.1 * 3.72e-5)
      ok = false, bad += " ext_CR@5=" + fmt(ex);
    return {ok, "measured-square eigenvalue errors levels 3-6 match the "
                "recorded 3-digit reference table, extrapolated error at level 5 "
                "within 10% of 3.72e-5" +
                    (bad.empty() ? "" : ";" + bad)};
  });

  run(4, [&]() -> std::pair<bool, std::string> {
    bool ok = true;
    std::string detail;
    auto check_band = [&](const std::string &tag, double lo, double hi) {
      const double p = observed_order(square, tag, 4, 7);
      const bool good = p >= lo && p <= hi;
      if (!good) ok = false;
      detail += (detail.empty() ? "" : ", ") + tag + "=" + fmt(p) +
                (good ? "" : "(out of [" + fmt(lo) + "," + fmt(hi) + "])");
    };
    check_band("lambda_CR", 1.8, 2.2);
    check_band("lambda_ECR", 1.8, 2.2);
    check_band("lambda_P1", 1.8, 2.2);
    check_band("rec_CR2_CR", 2.7, 3.3);
    check_band("rec_CR1_CR", 3.5, 1e9);
    check_band("rec_ECR1_ECR", 3.5, 1e9);
    check_band("rec_ECR2_ECR", 3.5, 1e9);
    check_band("rec_P1_P1", 3.5, 1e9);
    return {ok, "convergence orders, regression over levels 4-7: " + detail};
  });

  run(5, []() -> std::pair<bool, std::string> {
    const ExactSolution exact = exact_first_eigenpair("square");
    Mesh mesh = build_domain("square");
    for (int l = 1; l < 4; ++l) mesh = refine_uniform(mesh);
    std::vector<double> lv, lrec, lraw;
    for (int level = 4; level <= 7; ++level) {
      const DofMap map = build_dofmap(mesh, SpaceKind::CR);
      const auto pairs = solve_smallest(assemble_stiffness(mesh, map),
                                        assemble_mass(mesh, map), 1);
      DiscreteField u;
      u.kind = SpaceKind::CR;
      u.coeffs = inflate(map, pairs[0].vec);
      const DiscreteField ref = interpolate(SpaceKind::CR, exact.u, mesh, map);
      if (l2_inner(mesh, map, u, map, ref) < 0) u.coeffs = -u.coeffs;
      const RecoveredGradient g = recover_kh(mesh, map, u);
      lv.push_back(level);
      lrec.push_back(std::log2(gradient_error(mesh, g, exact.grad)));
      lraw.push_back(
          std::log2(broken_gradient_error(mesh, map, u, exact.grad)));
      if (level < 7) mesh = refine_uniform(mesh);
    }
    const double p_rec = -slope(lv, lrec);
    const double p_raw = -slope(lv, lraw);
    return {p_rec >= 1.7,
            "recovered-gradient error order " + fmt(p_rec) +
                " (raw broken gradient " + fmt(p_raw) + "), levels 4-7"};
  });

  run(6, []() -> std::pair<bool, std::string> {
    ExperimentConfig cfg;
    cfg.domain = "square";
    cfg.elements = {SpaceKind::CR, SpaceKind::P1};
    cfg.level_min = 3;
    cfg.level_max = 5;
    cfg.nev = 4;
    const UniformRun run4 = run_uniform(cfg);
    bool ok = true;
    std::string bad;
    for (const auto &rep : run4.reports) {
      for (int k = 0; k < 4; ++k) {
        const double lam = run4.reference[k];
        const double lo = rep.get(k, "lambda_CR");
        const double hi = rep.get(k, "lambda_P1");
        if (!(lo <= lam && lam <= hi))
          ok = false,
          bad += " k=" + std::to_string(k) + "@" + std::to_string(rep.level);
      }
      const double star = rep.get(0, "lambda_P1star");
      if (!(run4.reference[0] <= star))
        ok = false, bad += " P1star@" + std::to_string(rep.level);
    }
    return {ok, "lambda_CR <= lambda <= lambda_P1 (first four) and "
                "lambda <= lambda_P1star (first), levels 3-5" +
                    (bad.empty() ? "" : "; violations:" + bad)};
  });

  run(7, [&]() -> std::pair<bool, std::string> {
    const EstimateReport *rep6 = nullptr;
    for (const auto &rep : square.reports)
      if (rep.level == 6) rep6 = &rep;
    const double lam = square.reference[0];
    const double lam_lo = rep6->get(0, "lambda_CR");
    const double lam_up = rep6->get(0, "lambda_P1star");
    const double f_lo = rep6->get(0, "F_CR1_CR");
    const double f_up = rep6->get(0, "F_P1star_CR");
    const double comb = rep6->get(0, "comb_P1star_CR_CR_1");
    // weights must sum to one: the combination is shift-equivariant
    const double w_lo = f_up / (f_lo + f_up);
    const double w_up = f_lo / (f_lo + f_up);
    const bool weights_ok =
        std::abs(w_lo + w_up - 1.0) <= 1e-12 &&
        std::abs(combined_eigenvalue(lam_lo + 1.0, f_lo, lam_up + 1.0, f_up) -
                 (comb + 1.0)) <= 1e-9;
    const double err = std::abs(lam - comb);
    const double bound =
        std::min(std::abs(lam - lam_lo), std::abs(lam - lam_up)) / 10.0;
    return {weights_ok && err <= bound,
            "combined eigenvalue at level 6: weights sum to 1, |error| " +
                fmt(err) + " <= " + fmt(bound)};
  });

  run(8, []() -> std::pair<bool, std::string> {
    ExperimentConfig cfg;
    cfg.domain = "square-neumann";
    cfg.elements = {SpaceKind::CR, SpaceKind::ECR};
    cfg.level_min = 3;
    cfg.level_max = 6;
    cfg.nev = 1;
    const UniformRun run8 = run_uniform(cfg);
    const double p_cr = observed_order(run8, "lambda_CR", 4, 6);
    const double p_rec = observed_order(run8, "rec_ECR1_ECR", 4, 6);
    const bool ok = std::abs(p_cr - 2.0) <= 0.2 && p_rec >= 5.0;
    return {ok, "mixed-boundary square, regression over levels 4-6: "
                "lambda_CR order " +
                    fmt(p_cr) + " (want 2.0+-0.2), rec_ECR1_ECR order " +
                    fmt(p_rec) + " (want >= 5)"};
  });

  run(9, []() -> std::pair<bool, std::string> {
    // first Dirichlet eigenvalue of the L-shaped domain (classical benchmark)
    const double lam = 9.6397238440219;

    ExperimentConfig cfg;
    cfg.domain = "lshape";
    cfg.elements = {SpaceKind::CR};
    cfg.level_min = 2;
    cfg.level_max = 5;
    cfg.nev = 1;
    const UniformRun uni = run_uniform(cfg);
    std::vector<double> ux, uy;
    for (const auto &row : uni.rows) {
      if (row.quantity != "lambda_CR") continue;
      ux.push_back(std::log10(static_cast<double>(row.ndof)));
      uy.push_back(std::log10(std::abs(row.value - lam)));
    }
    const double s_uniform = slope(ux, uy);

    AdaptOptions opts;
    opts.max_iter = 15;
    opts.eta_stop_rel = 0.0;  // always run the full 15 iterations
    const AdaptState state = adapt_loop(build_domain("lshape"), opts);
    std::vector<double> ax, ay;
    int eta_increases = 0;
    for (size_t k = 0; k < state.history.size(); ++k) {
      const AdaptRecord &r = state.history[k];
      ax.push_back(std::log10(static_cast<double>(r.ndof)));
      ay.push_back(std::log10(std::abs(r.lambda - lam)));
      if (k > 0 && r.eta > state.history[k - 1].eta) ++eta_increases;
    }
    const double s_adaptive = slope(ax, ay);
    const bool ok = state.history.size() == 15 && s_adaptive < s_uniform &&
                    eta_increases <= 1;
    return {ok, "adaptive L-shape error-vs-DOF slope " + fmt(s_adaptive) +
                    " steeper than uniform " + fmt(s_uniform) + ", " +
                    std::to_string(eta_increases) + " indicator increase(s)"};
  });

  run(10, []() -> std::pair<bool, std::string> {
    double worst = 0.0;
    int tested = 0;
    for (const char *domain :
         {"square", "square-neumann", "triangle", "lshape", "hshape",
          "hollow"}) {
      Mesh mesh = build_domain(domain);
      for (int level = 1; level <= 3; ++level) {
        if (level > 1) mesh = refine_uniform(mesh);
        for (SpaceKind kind : {SpaceKind::P1, SpaceKind::CR, SpaceKind::ECR}) {
          const DofMap map = build_dofmap(mesh, kind);
          if (map.n_free < 16 || map.n_free > 500) continue;
          const SparseSym A = assemble_stiffness(mesh, map);
          const SparseSym B = assemble_mass(mesh, map);
          SolveOptions opts;
          opts.dense_cutoff = 0;  // force the iterative path
          const auto it = solve_smallest(A, B, 8, opts);
          const Eigen::MatrixXd Ad(A), Bd(B);
          Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> dense(Ad,
                                                                          Bd);
          for (int k = 0; k < 8; ++k)
            worst = std::max(worst,
                             std::abs(it[k].value - dense.eigenvalues()[k]) /
                                 std::abs(dense.eigenvalues()[k]));
          ++tested;
        }
      }
    }
    return {tested > 0 && worst <= 1e-10,
            "iterative solver matches the dense oracle on " +
                std::to_string(tested) +
                " small systems (first 8 eigenvalues): max relative "
                "deviation " +
                fmt(worst)};
  });

  run(11, []() -> std::pair<bool, std::string> {
    const auto checks = verify_example3_geometry();
    int passing = 0;
    double worst_res = 0.0;
    for (const auto &c : checks)
      if (c.ok) {
        ++passing;
        worst_res = std::max({c.dirichlet_residual, c.neumann_residual,
                              c.pde_residual});
      }
    ExperimentConfig cfg;
    cfg.domain = "triangle";
    cfg.elements = {SpaceKind::CR};
    cfg.level_min = 2;
    cfg.level_max = 4;
    cfg.nev = 8;
    const UniformRun tri = run_uniform(cfg);
    int matched = -1;
    for (int i = 0; i < cfg.nev; ++i)
      if (std::isfinite(tri.reference[i])) matched = i;
    double order = std::numeric_limits<double>::quiet_NaN();
    if (matched >= 0) order = observed_order(tri, "lambda_CR", 3, 4, matched);
    const bool ok = passing == 1 && worst_res <= 1e-9 && matched >= 0 &&
                    std::abs(order - 2.0) <= 0.2;
    return {ok, "triangle geometry oracle: 1 passing candidate (max residual " +
                    fmt(worst_res) + "), lambda_CR order " + fmt(order) +
                    " toward 16*pi^2/3"};
  });

  std::printf("%d of 11 criteria failed\n", g_failures);
  return g_failures;
}
