#pragma once

#include "eigfem/spaces.hpp"

#include <Eigen/Sparse>

#include <iosfwd>

namespace eigfem {

using SparseSym = Eigen::SparseMatrix<double>;

/// Stiffness matrix sum_K int_K grad phi_i . grad phi_j on the free
/// (non-Dirichlet) dofs.
SparseSym assemble_stiffness(const Mesh &mesh, const DofMap &dofmap);

/// Mass matrix sum_K int_K phi_i phi_j on the free dofs, exact for the
/// polynomial integrands (degree-4 rule).
SparseSym assemble_mass(const Mesh &mesh, const DofMap &dofmap);

/// Coordinate-format dump "i j value", one entry per line.
void write_coordinate(std::ostream &os, const SparseSym &m);

}  // namespace eigfem
