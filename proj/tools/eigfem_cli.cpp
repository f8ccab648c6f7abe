#include "eigfem/experiments.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

int run_uniform_cmd(const std::string &config_path,
                    const std::vector<std::pair<std::string, std::string>>
                        &overrides) {
  eigfem::ExperimentConfig config;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) {
      std::cerr << "cannot open config file: " << config_path << "\n";
      return 1;
    }
    config = eigfem::load_config(in);
  }
  for (const auto &[key, value] : overrides)
    eigfem::apply_option(config, key, value);

  const eigfem::UniformRun run = eigfem::run_uniform(config);
  if (config.out_path.empty()) {
    eigfem::write_rows_csv(std::cout, run.rows);
  } else {
    std::ofstream os(config.out_path);
    if (!os) {
      std::cerr << "cannot open output file: " << config.out_path << "\n";
      return 1;
    }
    eigfem::write_rows_csv(os, run.rows);
    eigfem::emit_plot_data(run.rows, config.out_path + ".");
  }
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Laplacian eigenvalue experiments with P1/CR/ECR elements"};
  app.require_subcommand(1);

  // uniform-refinement experiment
  auto *uniform = app.add_subcommand(
      "uniform", "eigenvalues, estimates and convergence table on uniformly "
                 "refined meshes");
  std::string config_path, domain, element, levels, estimators, reference, out;
  int nev = -1;
  double theta = -1.0;
  long long seed = -1;
  uniform->add_option("--config", config_path, "key-value config file");
  uniform->add_option("--domain", domain,
                      "square|square-neumann|triangle|lshape|hshape|hollow");
  uniform->add_option("--element", element, "comma list of p1,cr,ecr");
  uniform->add_option("--levels", levels, "level range a..b");
  uniform->add_option("--nev", nev, "number of eigenvalues");
  uniform->add_option("--estimators", estimators, "comma list of tags");
  uniform->add_option("--theta", theta, "marking threshold");
  uniform->add_option("--reference", reference,
                      "exact|extrapolated|file=PATH");
  uniform->add_option("--out", out, "CSV output path");
  uniform->add_option("--seed", seed, "eigensolver seed");

  // adaptive loop
  auto *adapt = app.add_subcommand("adapt",
                                   "adaptive bisection refinement driven by "
                                   "the residual indicator");
  std::string a_domain = "lshape", a_out;
  eigfem::AdaptOptions a_opts;
  adapt->add_option("--domain", a_domain, "domain name");
  adapt->add_option("--nev", a_opts.nev, "number of eigenvalues");
  adapt->add_option("--eig-index", a_opts.eig_index,
                    "eigenvalue driving the indicator");
  adapt->add_option("--theta", a_opts.theta, "marking threshold");
  adapt->add_option("--max-iter", a_opts.max_iter, "iteration cap");
  adapt->add_option("--out", a_out, "history CSV path");
  long long a_seed = -1;
  adapt->add_option("--seed", a_seed, "eigensolver seed");

  // geometry self-check for the triangle domain
  auto *verify = app.add_subcommand(
      "verify-example3", "check the closed-form triangle eigenfunction "
                         "against candidate geometries");

  // mesh export
  auto *meshcmd = app.add_subcommand("mesh", "write a refined mesh to a file");
  std::string m_domain = "square", m_out;
  int m_level = 1;
  meshcmd->add_option("--domain", m_domain, "domain name");
  meshcmd->add_option("--level", m_level, "refinement level");
  meshcmd->add_option("--out", m_out, "output path (stdout if empty)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (uniform->parsed()) {
      std::vector<std::pair<std::string, std::string>> overrides;
      if (uniform->count("--domain")) overrides.emplace_back("domain", domain);
      if (uniform->count("--element"))
        overrides.emplace_back("element", element);
      if (uniform->count("--levels")) overrides.emplace_back("levels", levels);
      if (uniform->count("--nev"))
        overrides.emplace_back("nev", std::to_string(nev));
      if (uniform->count("--estimators"))
        overrides.emplace_back("estimators", estimators);
      if (uniform->count("--theta"))
        overrides.emplace_back("theta", std::to_string(theta));
      if (uniform->count("--reference"))
        overrides.emplace_back("reference", reference);
      if (uniform->count("--out")) overrides.emplace_back("out", out);
      if (uniform->count("--seed"))
        overrides.emplace_back("seed", std::to_string(seed));
      return run_uniform_cmd(config_path, overrides);
    }

    if (adapt->parsed()) {
      if (a_seed >= 0) a_opts.solve.seed = static_cast<unsigned>(a_seed);
      const eigfem::Mesh mesh = eigfem::build_domain(a_domain);
      const eigfem::AdaptState state = eigfem::adapt_loop(mesh, a_opts);
      if (a_out.empty()) {
        eigfem::write_history_csv(std::cout, state);
      } else {
        std::ofstream os(a_out);
        if (!os) {
          std::cerr << "cannot open output file: " << a_out << "\n";
          return 1;
        }
        eigfem::write_history_csv(os, state);
      }
      return 0;
    }

    if (verify->parsed()) {
      const auto checks = eigfem::verify_example3_geometry();
      bool any_ok = false;
      for (const auto &c : checks) {
        std::cout << c.name << ": dirichlet " << c.dirichlet_residual
                  << " neumann " << c.neumann_residual << " pde "
                  << c.pde_residual << (c.ok ? " OK" : " FAIL") << "\n";
        any_ok = any_ok || c.ok;
      }
      return any_ok ? 0 : 1;
    }

    if (meshcmd->parsed()) {
      eigfem::Mesh mesh = eigfem::build_domain(m_domain);
      for (int l = 1; l < m_level; ++l) mesh = eigfem::refine_uniform(mesh);
      if (m_out.empty()) {
        eigfem::write_mesh(std::cout, mesh);
      } else {
        std::ofstream os(m_out);
        if (!os) {
          std::cerr << "cannot open output file: " << m_out << "\n";
          return 1;
        }
        eigfem::write_mesh(os, mesh);
      }
      return 0;
    }
  } catch (const std::exception &ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
