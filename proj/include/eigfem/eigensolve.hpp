#pragma once

#include "eigfem/assembly.hpp"

#include <vector>

namespace eigfem {

struct EigenPair {
  double value = 0.0;
  Eigen::VectorXd vec;     // free-dof coefficients, B-normalized
  double residual = 0.0;   // ||A x - lambda B x|| / ||B x||
};

struct SolveOptions {
  double tol = 1e-10;
  int max_sweeps = 500;
  int extra_block = 5;       // block size = nev + extra_block
  int dense_cutoff = 2000;   // use a dense solve below this dimension
  unsigned seed = 20240815;  // initial block generator
};

/// Smallest nev eigenpairs of A x = lambda B x with A, B symmetric and B
/// positive definite. Pairs are sorted ascending, B-orthonormal, and
/// sign-fixed (first component of noticeable size positive). Uses a dense
/// solve for small systems and shift-invert subspace iteration otherwise.
std::vector<EigenPair> solve_smallest(const SparseSym &A, const SparseSym &B,
                                      int nev, const SolveOptions &opts = {});

double rayleigh_quotient(const Eigen::VectorXd &u, const SparseSym &A,
                         const SparseSym &B);

}  // namespace eigfem
