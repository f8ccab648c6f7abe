#pragma once

#include "eigfem/adaptivity.hpp"

#include <functional>
#include <optional>
#include <string>

namespace eigfem {

enum class ReferenceMode { Exact, Extrapolated, File };

struct ExperimentConfig {
  std::string domain = "square";
  std::vector<SpaceKind> elements = {SpaceKind::CR, SpaceKind::ECR,
                                     SpaceKind::P1};
  int level_min = 1;
  int level_max = 4;
  int nev = 1;
  std::vector<std::string> estimators;  // empty = all quantities
  double theta = 0.3;
  std::string out_path;
  ReferenceMode ref_mode = ReferenceMode::Exact;
  std::string ref_file;
  unsigned seed = 20240815;
};

/// Applies one "key value" option (same keys as the CLI flags); returns false
/// for unknown keys.
bool apply_option(ExperimentConfig &config, const std::string &key,
                  const std::string &value);
ExperimentConfig load_config(std::istream &is);

struct ResultRow {
  std::string domain;
  int level = 0;
  double h = 0.0;
  int ndof = 0;
  int eig_index = 0;
  std::string quantity;
  double value = 0.0;
  std::optional<double> error;  // value - reference
  std::optional<double> order;  // log2(|err_2h| / |err_h|)
};

struct UniformRun {
  ExperimentConfig config;
  std::vector<EstimateReport> reports;  // one per level
  std::vector<double> reference;        // per eigenvalue index, NaN if unknown
  std::vector<ResultRow> rows;
};

/// Solves every requested element on every level, computes all estimator,
/// recovered, combined, and extrapolated quantities, and tabulates errors and
/// observed orders against the configured reference.
UniformRun run_uniform(const ExperimentConfig &config);

/// domain,level,h,ndof,eig_index,quantity,value,error,order
void write_rows_csv(std::ostream &os, const std::vector<ResultRow> &rows,
                    bool header = true);

/// Per-quantity series files "<prefix><quantity>.dat" with columns
/// level h ndof |error| and a least-squares slope comment.
void emit_plot_data(const std::vector<ResultRow> &rows,
                    const std::string &prefix);

/// Known eigenvalues per domain; entries are NaN where no closed form exists
/// (only selected indices are known on the L-shape, and only the matched
/// index on the triangle domain gets a value — see run_uniform).
std::vector<double> exact_eigenvalues(const std::string &domain, int nev);

struct ExactSolution {
  double lambda = 0.0;
  std::function<double(const Eigen::Vector2d &)> u;
  std::function<Eigen::Vector2d(const Eigen::Vector2d &)> grad;
};

/// Closed-form first eigenpair for square, square-neumann, and triangle.
ExactSolution exact_first_eigenpair(const std::string &domain);

struct GeometryCheck {
  std::string name;
  Eigen::Matrix<double, 3, 2> vertices;
  double dirichlet_residual = 0.0;  // max |u| on the two Dirichlet sides
  double neumann_residual = 0.0;    // max |du/dx1| on the Neumann side
  double pde_residual = 0.0;        // max |Delta u + lambda u| (relative)
  bool ok = false;
};

/// Evaluates the closed-form triangle-domain eigenfunction on candidate
/// triangles and returns the check results; the passing candidate fixes the
/// mesh geometry used by build_domain("triangle").
std::vector<GeometryCheck> verify_example3_geometry();

/// L2 error of a recovered gradient against an exact gradient.
double gradient_error(const Mesh &mesh, const RecoveredGradient &g,
                      const std::function<Eigen::Vector2d(
                          const Eigen::Vector2d &)> &exact_grad);

/// Broken-gradient L2 error of a discrete field against an exact gradient.
double broken_gradient_error(
    const Mesh &mesh, const DofMap &dofmap, const DiscreteField &u,
    const std::function<Eigen::Vector2d(const Eigen::Vector2d &)> &exact_grad);

}  // namespace eigfem
