#include "eigfem/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace eigfem {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct SpaceSolve {
  DofMap map;
  std::vector<EigenPair> pairs;
  std::vector<DiscreteField> fields;
};

SpaceSolve solve_space(const Mesh &mesh, SpaceKind kind, int nev,
                       unsigned seed) {
  SpaceSolve s;
  s.map = build_dofmap(mesh, kind);
  const SparseSym A = assemble_stiffness(mesh, s.map);
  const SparseSym B = assemble_mass(mesh, s.map);
  SolveOptions opts;
  opts.seed = seed;
  s.pairs = solve_smallest(A, B, nev, opts);
  s.fields.resize(nev);
  for (int k = 0; k < nev; ++k) {
    s.fields[k].kind = kind;
    s.fields[k].coeffs = inflate(s.map, s.pairs[k].vec);
  }
  return s;
}

/// Best collinear partner of field i of space a among the fields of space b;
/// returns -1 if nothing exceeds the collinearity threshold. `sign` reports
/// the orientation of the match.
int match_index(const Mesh &mesh, const DofMap &da,
                const std::vector<DiscreteField> &fa, int i, const DofMap &db,
                const std::vector<DiscreteField> &fb, double &sign) {
  int best = -1;
  double best_c = 0.0;
  for (size_t j = 0; j < fb.size(); ++j) {
    const double c = l2_inner(mesh, da, fa[i], db, fb[j]);
    if (std::abs(c) > std::abs(best_c)) {
      best_c = c;
      best = static_cast<int>(j);
    }
  }
  if (best < 0 || std::abs(best_c) <= 0.9) return -1;
  sign = best_c < 0.0 ? -1.0 : 1.0;
  return best;
}

RecoveredGradient scaled(RecoveredGradient g, double s) {
  for (auto &m : g.mid)
    for (auto &v : m) v *= s;
  return g;
}

SpaceKind tag_space(const std::string &tag) {
  if (tag.rfind("comb_", 0) == 0) return SpaceKind::CR;
  const size_t us = tag.find('_');
  const std::string token = tag.substr(us + 1);
  if (token.rfind("ECR", 0) == 0) return SpaceKind::ECR;
  if (token.rfind("CR", 0) == 0) return SpaceKind::CR;
  return SpaceKind::P1;
}

bool has_error_column(const std::string &tag) {
  return tag.rfind("lambda_", 0) == 0 || tag.rfind("rec_", 0) == 0 ||
         tag.rfind("comb_", 0) == 0 || tag.rfind("ext_", 0) == 0;
}

std::vector<std::string> split(const std::string &s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

SpaceKind parse_element(const std::string &s) {
  if (s == "p1" || s == "P1") return SpaceKind::P1;
  if (s == "cr" || s == "CR") return SpaceKind::CR;
  if (s == "ecr" || s == "ECR") return SpaceKind::ECR;
  throw std::invalid_argument("unknown element: " + s);
}

}  // namespace

bool apply_option(ExperimentConfig &config, const std::string &key,
                  const std::string &value) {
  if (key == "domain") {
    config.domain = value;
  } else if (key == "element") {
    config.elements.clear();
    for (const auto &e : split(value, ',')) config.elements.push_back(parse_element(e));
  } else if (key == "levels") {
    const size_t dots = value.find("..");
    if (dots == std::string::npos) {
      config.level_min = config.level_max = std::stoi(value);
    } else {
      config.level_min = std::stoi(value.substr(0, dots));
      config.level_max = std::stoi(value.substr(dots + 2));
    }
  } else if (key == "nev") {
    config.nev = std::stoi(value);
  } else if (key == "estimators") {
    config.estimators = split(value, ',');
  } else if (key == "theta") {
    config.theta = std::stod(value);
  } else if (key == "reference") {
    if (value == "exact") {
      config.ref_mode = ReferenceMode::Exact;
    } else if (value == "extrapolated") {
      config.ref_mode = ReferenceMode::Extrapolated;
    } else if (value.rfind("file=", 0) == 0) {
      config.ref_mode = ReferenceMode::File;
      config.ref_file = value.substr(5);
    } else {
      throw std::invalid_argument("unknown reference mode: " + value);
    }
  } else if (key == "out") {
    config.out_path = value;
  } else if (key == "seed") {
    config.seed = static_cast<unsigned>(std::stoul(value));
  } else {
    return false;
  }
  return true;
}

ExperimentConfig load_config(std::istream &is) {
  ExperimentConfig config;
  std::string line;
  while (std::getline(is, line)) {
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::replace(line.begin(), line.end(), '=', ' ');
    std::stringstream ss(line);
    std::string key, value;
    if (!(ss >> key >> value)) continue;
    if (!apply_option(config, key, value))
      throw std::invalid_argument("unknown config key: " + key);
  }
  return config;
}

std::vector<double> exact_eigenvalues(const std::string &domain, int nev) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> out(nev, nan);
  if (domain == "square" || domain == "square-neumann") {
    std::vector<double> all;
    for (int m = 1; m <= 40; ++m)
      for (int n = 1; n <= 40; ++n) {
        const double a = (domain == "square") ? m * m : (m - 0.5) * (m - 0.5);
        all.push_back((a + n * n) * kPi * kPi);
      }
    std::sort(all.begin(), all.end());
    for (int k = 0; k < nev; ++k) out[k] = all[k];
  } else if (domain == "lshape") {
    if (nev >= 3) out[2] = 2.0 * kPi * kPi;
    if (nev >= 8) out[7] = 4.0 * kPi * kPi;
  }
  // triangle handled by nearest-index matching in run_uniform;
  // hshape/hollow have no closed form
  return out;
}

ExactSolution exact_first_eigenpair(const std::string &domain) {
  ExactSolution sol;
  if (domain == "square") {
    sol.lambda = 2.0 * kPi * kPi;
    sol.u = [](const Eigen::Vector2d &x) {
      return 2.0 * std::sin(kPi * x[0]) * std::sin(kPi * x[1]);
    };
    sol.grad = [](const Eigen::Vector2d &x) {
      return Eigen::Vector2d(
          2.0 * kPi * std::cos(kPi * x[0]) * std::sin(kPi * x[1]),
          2.0 * kPi * std::sin(kPi * x[0]) * std::cos(kPi * x[1]));
    };
  } else if (domain == "square-neumann") {
    sol.lambda = 1.25 * kPi * kPi;
    sol.u = [](const Eigen::Vector2d &x) {
      return 2.0 * std::sin(0.5 * kPi * x[0]) * std::sin(kPi * x[1]);
    };
    sol.grad = [](const Eigen::Vector2d &x) {
      return Eigen::Vector2d(
          kPi * std::cos(0.5 * kPi * x[0]) * std::sin(kPi * x[1]),
          2.0 * kPi * std::sin(0.5 * kPi * x[0]) * std::cos(kPi * x[1]));
    };
  } else if (domain == "triangle") {
    const double s3 = std::sqrt(3.0);
    const double c = 2.0 * std::pow(12.0, 0.25) / 3.0;
    sol.lambda = 16.0 * kPi * kPi / 3.0;
    sol.u = [=](const Eigen::Vector2d &x) {
      return c * (std::sin(4.0 * kPi * x[1] / s3) +
                  std::sin(2.0 * kPi * (x[0] - x[1] / s3)) +
                  std::sin(2.0 * kPi * (1.0 - x[0] - x[1] / s3)));
    };
    sol.grad = [=](const Eigen::Vector2d &x) {
      const double c2 = std::cos(2.0 * kPi * (x[0] - x[1] / s3));
      const double c3 = std::cos(2.0 * kPi * (1.0 - x[0] - x[1] / s3));
      return Eigen::Vector2d(
          c * 2.0 * kPi * (c2 - c3),
          c * (4.0 * kPi / s3 * std::cos(4.0 * kPi * x[1] / s3) -
               2.0 * kPi / s3 * c2 - 2.0 * kPi / s3 * c3));
    };
  } else {
    throw std::invalid_argument("no closed-form eigenpair for " + domain);
  }
  return sol;
}

std::vector<GeometryCheck> verify_example3_geometry() {
  const double s3 = std::sqrt(3.0);
  const ExactSolution sol = exact_first_eigenpair("triangle");

  // analytic Laplacian, written out term by term as an independent check
  const double c = 2.0 * std::pow(12.0, 0.25) / 3.0;
  auto lap = [=](const Eigen::Vector2d &x) {
    const double k1 = 4.0 * kPi / s3;
    const double kx = 2.0 * kPi, ky = 2.0 * kPi / s3;
    return c * (-k1 * k1 * std::sin(k1 * x[1]) -
                (kx * kx + ky * ky) * std::sin(2.0 * kPi * (x[0] - x[1] / s3)) -
                (kx * kx + ky * ky) *
                    std::sin(2.0 * kPi * (1.0 - x[0] - x[1] / s3)));
  };

  std::vector<GeometryCheck> checks;
  // candidate layout: rows = vertices; the Neumann side connects the last
  // two vertices, the other two sides are Dirichlet
  const std::vector<std::pair<std::string, Eigen::Matrix<double, 3, 2>>>
      candidates = {
          {"tall-right", (Eigen::Matrix<double, 3, 2>() << 0.5, s3 / 2.0,  //
                          1.0, 0.0, 1.0, s3).finished()},
          {"unit-equilateral", (Eigen::Matrix<double, 3, 2>() << 0.0, 0.0,  //
                                1.0, 0.0, 0.5, s3 / 2.0).finished()}};

  for (const auto &[name, verts] : candidates) {
    GeometryCheck chk;
    chk.name = name;
    chk.vertices = verts;
    const int sides[3][2] = {{0, 1}, {0, 2}, {1, 2}};  // last side = Neumann
    for (int s = 0; s < 3; ++s) {
      const Eigen::Vector2d a = verts.row(sides[s][0]);
      const Eigen::Vector2d b = verts.row(sides[s][1]);
      const Eigen::Vector2d tg = (b - a).normalized();
      const Eigen::Vector2d n(tg[1], -tg[0]);
      for (int k = 0; k <= 200; ++k) {
        const Eigen::Vector2d x = a + (k / 200.0) * (b - a);
        if (s < 2)
          chk.dirichlet_residual =
              std::max(chk.dirichlet_residual, std::abs(sol.u(x)));
        else
          chk.neumann_residual =
              std::max(chk.neumann_residual, std::abs(n.dot(sol.grad(x))));
      }
    }
    double umax = 0.0;
    for (int k = 0; k < 50; ++k) {
      // deterministic interior samples via a low-discrepancy-ish sweep
      double b1 = std::fmod(0.17 + 0.61803398875 * k, 1.0);
      double b2 = std::fmod(0.29 + 0.75487766625 * k, 1.0);
      if (b1 + b2 > 1.0) {
        b1 = 1.0 - b1;
        b2 = 1.0 - b2;
      }
      const Eigen::Vector2d x = verts.row(0) * (1.0 - b1 - b2) +
                                verts.row(1) * b1 + verts.row(2) * b2;
      umax = std::max(umax, std::abs(sol.u(x)));
      chk.pde_residual =
          std::max(chk.pde_residual, std::abs(lap(x) + sol.lambda * sol.u(x)));
    }
    chk.pde_residual /= sol.lambda * std::max(umax, 1e-30);
    chk.ok = chk.dirichlet_residual <= 1e-10 && chk.neumann_residual <= 1e-10 &&
             chk.pde_residual <= 1e-9;
    checks.push_back(chk);
  }
  return checks;
}

double gradient_error(const Mesh &mesh, const RecoveredGradient &g,
                      const std::function<Eigen::Vector2d(
                          const Eigen::Vector2d &)> &exact_grad) {
  double s = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const ElementGeometry geom = element_geometry(mesh, t);
    s += integrate_tri(geom.p, tri_rule_deg6(), [&](const Eigen::Vector2d &x) {
      return (g.eval(geom, t, x) - exact_grad(x)).squaredNorm();
    });
  }
  return std::sqrt(s);
}

double broken_gradient_error(
    const Mesh &mesh, const DofMap &dofmap, const DiscreteField &u,
    const std::function<Eigen::Vector2d(const Eigen::Vector2d &)> &exact_grad) {
  double s = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const ElementGeometry geom = element_geometry(mesh, t);
    const Quad2 q = local_field(mesh, dofmap, u, t);
    s += integrate_tri(geom.p, tri_rule_deg6(), [&](const Eigen::Vector2d &x) {
      return (q.grad(x) - exact_grad(x)).squaredNorm();
    });
  }
  return std::sqrt(s);
}

UniformRun run_uniform(const ExperimentConfig &config) {
  UniformRun run;
  run.config = config;

  auto wants = [&](SpaceKind k) {
    return std::find(config.elements.begin(), config.elements.end(), k) !=
           config.elements.end();
  };
  const bool have_cr = wants(SpaceKind::CR);
  const bool have_ecr = wants(SpaceKind::ECR);
  const bool have_p1 = wants(SpaceKind::P1);
  const int nev = config.nev;

  Mesh mesh = build_domain(config.domain);
  for (int l = 1; l < config.level_min; ++l) mesh = refine_uniform(mesh);

  for (int level = config.level_min; level <= config.level_max; ++level) {
    EstimateReport report;
    report.level = level;
    report.h = mesh.max_diameter();
    report.records.resize(nev);

    std::map<SpaceKind, SpaceSolve> solved;
    for (SpaceKind k : config.elements)
      solved.emplace(k, solve_space(mesh, k, nev, config.seed));

    DofMap p1_map;
    std::vector<DiscreteField> p1star(nev);
    std::vector<RecoveredGradient> g_cr(nev), g_ecr(nev), g_p1(nev),
        g_p1star(nev);
    if (have_cr) {
      const SpaceSolve &cr = solved.at(SpaceKind::CR);
      p1_map = build_dofmap(mesh, SpaceKind::P1);
      for (int i = 0; i < nev; ++i) {
        report.set(i, "lambda_CR", cr.pairs[i].value);
        auto [proj, lam] = average_projection(mesh, cr.map, cr.fields[i], p1_map);
        p1star[i] = proj;
        report.set(i, "lambda_P1star", lam);
        g_cr[i] = recover_kh(mesh, cr.map, cr.fields[i]);
        g_p1star[i] = recover_ppr(mesh, p1_map, p1star[i], Provenance::PprP1Star);
      }
    }
    if (have_ecr) {
      const SpaceSolve &ecr = solved.at(SpaceKind::ECR);
      for (int i = 0; i < nev; ++i) {
        report.set(i, "lambda_ECR", ecr.pairs[i].value);
        g_ecr[i] = recover_kh(mesh, ecr.map, ecr.fields[i]);
      }
    }
    if (have_p1) {
      const SpaceSolve &p1 = solved.at(SpaceKind::P1);
      for (int i = 0; i < nev; ++i) {
        report.set(i, "lambda_P1", p1.pairs[i].value);
        g_p1[i] = recover_ppr(mesh, p1.map, p1.fields[i]);
      }
    }

    for (int i = 0; i < nev; ++i) {
      int m_p1 = -1;
      double s_p1 = 1.0;
      if (have_cr && have_p1)
        m_p1 = match_index(mesh, solved.at(SpaceKind::CR).map,
                           solved.at(SpaceKind::CR).fields, i,
                           solved.at(SpaceKind::P1).map,
                           solved.at(SpaceKind::P1).fields, s_p1);

      if (have_cr) {
        const SpaceSolve &cr = solved.at(SpaceKind::CR);
        const double lam = cr.pairs[i].value;
        const DiscreteField &u = cr.fields[i];

        report.set(i, "F_CR1_CR",
                   estimate_type1(SpaceKind::CR, lam, mesh, cr.map, u, g_cr[i]));
        report.set(i, "F_CR2_CR",
                   estimate_type2(SpaceKind::CR, lam, mesh, cr.map, u, g_cr[i]));
        report.set(i, "F_CR1_P1star",
                   estimate_type1(SpaceKind::CR, lam, mesh, cr.map, u,
                                  g_p1star[i]));
        report.set(i, "F_CR2_P1star",
                   estimate_type2(SpaceKind::CR, lam, mesh, cr.map, u,
                                  g_p1star[i]));
        if (m_p1 >= 0) {
          const RecoveredGradient gp = scaled(g_p1[m_p1], s_p1);
          report.set(i, "F_CR1_P1",
                     estimate_type1(SpaceKind::CR, lam, mesh, cr.map, u, gp));
          report.set(i, "F_CR2_P1",
                     estimate_type2(SpaceKind::CR, lam, mesh, cr.map, u, gp));
        }

        report.set(i, "F_P1star_CR",
                   estimate_conforming(mesh, p1_map, p1star[i], g_cr[i]));
        report.set(i, "F_P1star_P1star",
                   estimate_conforming(mesh, p1_map, p1star[i], g_p1star[i]));
        if (m_p1 >= 0)
          report.set(i, "F_P1star_P1",
                     estimate_conforming(mesh, p1_map, p1star[i],
                                         scaled(g_p1[m_p1], s_p1)));
      }

      if (have_ecr) {
        const SpaceSolve &ecr = solved.at(SpaceKind::ECR);
        const double lam = ecr.pairs[i].value;
        report.set(i, "F_ECR1_ECR",
                   estimate_type1(SpaceKind::ECR, lam, mesh, ecr.map,
                                  ecr.fields[i], g_ecr[i]));
        report.set(i, "F_ECR2_ECR",
                   estimate_type2(SpaceKind::ECR, lam, mesh, ecr.map,
                                  ecr.fields[i], g_ecr[i]));
      }

      if (have_p1) {
        const SpaceSolve &p1 = solved.at(SpaceKind::P1);
        // conforming estimates are indexed by the matched eigenfunction
        const int j = (have_cr && m_p1 >= 0) ? m_p1 : i;
        report.set(i, "F_P1_P1",
                   estimate_conforming(mesh, p1.map, p1.fields[j], g_p1[j]));
        if (have_cr && m_p1 >= 0) {
          report.set(i, "F_P1_CR",
                     estimate_conforming(mesh, p1.map, p1.fields[j],
                                         scaled(g_cr[i], s_p1)));
          report.set(i, "F_P1_P1star",
                     estimate_conforming(mesh, p1.map, p1.fields[j],
                                         scaled(g_p1star[i], s_p1)));
        }
      }

      // recovered eigenvalues: nonconforming bases add F, conforming subtract
      const std::vector<std::tuple<std::string, std::string, std::string, bool>>
          rec_defs = {{"rec_CR1_CR", "lambda_CR", "F_CR1_CR", false},
                      {"rec_CR2_CR", "lambda_CR", "F_CR2_CR", false},
                      {"rec_CR1_P1", "lambda_CR", "F_CR1_P1", false},
                      {"rec_CR2_P1", "lambda_CR", "F_CR2_P1", false},
                      {"rec_CR1_P1star", "lambda_CR", "F_CR1_P1star", false},
                      {"rec_CR2_P1star", "lambda_CR", "F_CR2_P1star", false},
                      {"rec_ECR1_ECR", "lambda_ECR", "F_ECR1_ECR", false},
                      {"rec_ECR2_ECR", "lambda_ECR", "F_ECR2_ECR", false},
                      {"rec_P1_CR", "lambda_P1", "F_P1_CR", true},
                      {"rec_P1_P1", "lambda_P1", "F_P1_P1", true},
                      {"rec_P1_P1star", "lambda_P1", "F_P1_P1star", true},
                      {"rec_P1star_CR", "lambda_P1star", "F_P1star_CR", true},
                      {"rec_P1star_P1", "lambda_P1star", "F_P1star_P1", true},
                      {"rec_P1star_P1star", "lambda_P1star", "F_P1star_P1star",
                       true}};
      for (const auto &[tag, lam_tag, f_tag, conforming] : rec_defs)
        if (report.has(i, lam_tag) && report.has(i, f_tag))
          report.set(i, tag,
                     recovered_eigenvalue(conforming, report.get(i, lam_tag),
                                          report.get(i, f_tag)));

      // combined eigenvalues: lower bound lambda_CR weighted against an
      // upper bound; tag comb_<up>_<lowgrad>_<upgrad>_<type>
      const std::vector<std::pair<std::string, std::string>> lows = {
          {"CR_1", "F_CR1_CR"},
          {"CR_2", "F_CR2_CR"},
          {"P1_1", "F_CR1_P1"},
          {"P1_2", "F_CR2_P1"}};
      const std::vector<std::tuple<std::string, std::string, std::string>> ups =
          {{"P1", "CR", "F_P1_CR"},
           {"P1", "P1", "F_P1_P1"},
           {"P1star", "CR", "F_P1star_CR"},
           {"P1star", "P1", "F_P1star_P1"},
           {"P1star", "P1star", "F_P1star_P1star"}};
      for (const auto &[low_name, low_f] : lows)
        for (const auto &[up_space, up_grad, up_f] : ups) {
          const std::string lam_up_tag = "lambda_" + up_space;
          if (!report.has(i, "lambda_CR") || !report.has(i, low_f) ||
              !report.has(i, lam_up_tag) || !report.has(i, up_f))
            continue;
          const size_t us = low_name.find('_');
          const std::string tag = "comb_" + up_space + "_" +
                                  low_name.substr(0, us) + "_" + up_grad +
                                  "_" + low_name.substr(us + 1);
          report.set(i, tag,
                     combined_eigenvalue(report.get(i, "lambda_CR"),
                                         report.get(i, low_f),
                                         report.get(i, lam_up_tag),
                                         report.get(i, up_f)));
        }

      if (!run.reports.empty()) {
        const EstimateReport &prev = run.reports.back();
        for (const auto &[kind, name] :
             std::vector<std::pair<SpaceKind, std::string>>{
                 {SpaceKind::CR, "CR"},
                 {SpaceKind::ECR, "ECR"},
                 {SpaceKind::P1, "P1"}}) {
          (void)kind;
          const std::string lam_tag = "lambda_" + name;
          if (report.has(i, lam_tag) && prev.has(i, lam_tag))
            report.set(i, "ext_" + name,
                       extrapolate(report.get(i, lam_tag),
                                   prev.get(i, lam_tag)));
        }
      }
    }

    run.reports.push_back(std::move(report));
    if (level < config.level_max) mesh = refine_uniform(mesh);
  }

  // reference eigenvalues
  const double nan = std::numeric_limits<double>::quiet_NaN();
  run.reference.assign(nev, nan);
  if (config.ref_mode == ReferenceMode::Exact) {
    run.reference = exact_eigenvalues(config.domain, nev);
    if (config.domain == "triangle") {
      // nearest-index match of the known eigenvalue on the finest level
      const double target = 16.0 * kPi * kPi / 3.0;
      const EstimateReport &fin = run.reports.back();
      int best = -1;
      double best_d = std::numeric_limits<double>::infinity();
      for (int i = 0; i < nev; ++i) {
        for (const std::string name : {"lambda_CR", "lambda_ECR", "lambda_P1"})
          if (fin.has(i, name)) {
            const double d = std::abs(fin.get(i, name) - target);
            if (d < best_d) {
              best_d = d;
              best = i;
            }
            break;
          }
      }
      if (best >= 0) run.reference[best] = target;
    }
  } else if (config.ref_mode == ReferenceMode::Extrapolated) {
    if (run.reports.size() < 2)
      throw std::runtime_error("extrapolated reference needs >= 2 levels");
    const EstimateReport &fine = run.reports.back();
    const EstimateReport &coarse = run.reports[run.reports.size() - 2];
    for (int i = 0; i < nev; ++i)
      for (const std::string name : {"lambda_CR", "lambda_ECR", "lambda_P1"})
        if (fine.has(i, name) && coarse.has(i, name)) {
          run.reference[i] =
              extrapolate(fine.get(i, name), coarse.get(i, name));
          break;
        }
  } else {
    std::ifstream in(config.ref_file);
    if (!in) throw std::runtime_error("cannot open " + config.ref_file);
    double v;
    for (int i = 0; i < nev && (in >> v); ++i) run.reference[i] = v;
  }

  // flatten to rows with errors and observed orders; free-dof counts per
  // level come from a fresh pass over the mesh hierarchy
  std::vector<std::map<SpaceKind, int>> ndofs;
  {
    Mesh m = build_domain(config.domain);
    for (int l = 1; l < config.level_min; ++l) m = refine_uniform(m);
    for (int level = config.level_min; level <= config.level_max; ++level) {
      std::map<SpaceKind, int> counts;
      for (SpaceKind k :
           {SpaceKind::P1, SpaceKind::CR, SpaceKind::ECR})
        counts[k] = build_dofmap(m, k).n_free;
      ndofs.push_back(counts);
      if (level < config.level_max) m = refine_uniform(m);
    }
  }

  for (size_t li = 0; li < run.reports.size(); ++li) {
    const EstimateReport &rep = run.reports[li];
    for (int i = 0; i < nev; ++i) {
      for (const auto &[tag, value] : rep.records[i]) {
        ResultRow row;
        row.domain = config.domain;
        row.level = rep.level;
        row.h = rep.h;
        row.ndof = ndofs[li].at(tag_space(tag));
        row.eig_index = i;
        row.quantity = tag;
        row.value = value;
        if (has_error_column(tag) && std::isfinite(run.reference[i])) {
          row.error = value - run.reference[i];
          if (li > 0 && run.reports[li - 1].has(i, tag)) {
            const double prev_err =
                run.reports[li - 1].get(i, tag) - run.reference[i];
            if (prev_err != 0.0 && *row.error != 0.0)
              row.order = std::log2(std::abs(prev_err) / std::abs(*row.error));
          }
        }
        run.rows.push_back(std::move(row));
      }
    }
  }
  return run;
}

void write_rows_csv(std::ostream &os, const std::vector<ResultRow> &rows,
                    bool header) {
  if (header) os << "domain,level,h,ndof,eig_index,quantity,value,error,order\n";
  os.precision(17);
  for (const auto &r : rows) {
    os << r.domain << "," << r.level << "," << r.h << "," << r.ndof << ","
       << r.eig_index << "," << r.quantity << "," << r.value << ",";
    if (r.error) os << *r.error;
    os << ",";
    if (r.order) os << *r.order;
    os << "\n";
  }
}

void emit_plot_data(const std::vector<ResultRow> &rows,
                    const std::string &prefix) {
  std::map<std::pair<std::string, int>, std::vector<const ResultRow *>> series;
  for (const auto &r : rows)
    if (r.error) series[{r.quantity, r.eig_index}].push_back(&r);

  for (const auto &[key, pts] : series) {
    std::ofstream os(prefix + key.first + "_" + std::to_string(key.second) +
                     ".dat");
    os.precision(17);
    // least-squares slope of log|error| vs log h
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const auto *p : pts) {
      if (*p->error == 0.0) continue;
      const double x = std::log10(p->h), y = std::log10(std::abs(*p->error));
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++n;
    }
    if (n >= 2) {
      const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
      os << "# slope " << slope << "\n";
    } else {
      os << "# slope n/a\n";
    }
    os << "# level h ndof abs_error\n";
    for (const auto *p : pts)
      os << p->level << " " << p->h << " " << p->ndof << " "
         << std::abs(*p->error) << "\n";
  }
}

}  // namespace eigfem
