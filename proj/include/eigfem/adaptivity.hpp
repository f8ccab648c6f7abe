#pragma once

#include "eigfem/eigensolve.hpp"
#include "eigfem/estimators.hpp"

#include <set>

namespace eigfem {

/// One record of the adaptive history: iteration index, problem size, the
/// approximate eigenvalue, its second-type corrected value (from the
/// midpoint-patch recovered gradient), and the global indicator.
struct AdaptRecord {
  int k = 0;
  int ndof = 0;
  double lambda = 0.0;
  double lambda_corrected = 0.0;
  double f_estimate = 0.0;
  double eta = 0.0;
  int num_triangles = 0;
};

struct AdaptState {
  Mesh mesh;
  std::vector<AdaptRecord> history;
};

struct AdaptOptions {
  int nev = 1;
  int eig_index = 0;       // which eigenvalue drives the indicator
  double theta = 0.3;
  int max_iter = 25;
  double eta_stop_rel = 1e-3;  // stop when eta <= rel * initial eta
  SolveOptions solve;
};

/// Residual indicator per element for a CR eigenpair:
///   eta_K^2 = lambda^2 h_K^2 ||u||_{0,K}^2
///           + sum_{e in dK} h_e (||[du/dn]||_{0,e}^2 + ||[du/dt]||_{0,e}^2).
/// Boundary edges keep only the trace that measures a boundary-condition
/// residual: the tangential derivative on Dirichlet edges, the normal one on
/// Neumann edges.
std::vector<double> indicator(double lambda, const Mesh &mesh,
                              const DofMap &dofmap, const DiscreteField &u);

/// Elements with eta_K > theta * max eta_K.
std::set<int> mark(const std::vector<double> &eta, double theta);

/// Solve -> estimate -> indicate -> mark -> bisect until the indicator drops
/// below the relative threshold or the iteration cap is reached.
AdaptState adapt_loop(const Mesh &initial, const AdaptOptions &opts = {});

/// History CSV: k,ndof,ntri,lambda,lambda_corrected,f_estimate,eta.
void write_history_csv(std::ostream &os, const AdaptState &state,
                       bool header = true);

}  // namespace eigfem
