#pragma once

#include "eigfem/mesh.hpp"
#include "eigfem/poly.hpp"
#include "eigfem/quadrature.hpp"

#include <Eigen/Dense>

#include <functional>

namespace eigfem {

enum class SpaceKind { P1, CR, ECR };

inline int local_dof_count(SpaceKind kind) {
  return kind == SpaceKind::ECR ? 4 : 3;
}
std::string space_name(SpaceKind kind);

/// Global degree-of-freedom map for one of the three spaces. P1 dofs live on
/// vertices, CR dofs on edges (edge means), ECR dofs on edges plus one
/// element-mean dof per triangle. Dirichlet constraints are imposed by
/// elimination: `full_to_free` maps global dofs to indices of the reduced
/// system (-1 when constrained).
struct DofMap {
  SpaceKind kind = SpaceKind::P1;
  int n_global = 0;
  int n_free = 0;
  std::vector<std::array<int, 4>> cell_dofs;  // unused slots are -1
  std::vector<char> constrained;
  std::vector<int> full_to_free;
  std::vector<int> free_to_full;
};

DofMap build_dofmap(const Mesh &mesh, SpaceKind kind);

/// Coefficient vector over a DofMap; the local expansion on each triangle is
/// a polynomial of degree <= 2.
struct DiscreteField {
  SpaceKind kind = SpaceKind::P1;
  Eigen::VectorXd coeffs;  // full length n_global
};

/// Local shape functions on one element, dual to the dof functionals
/// (vertex values for P1, edge means for CR, edge + element means for ECR).
struct LocalBasis {
  int count = 0;
  std::array<Quad2, 4> fn;
};

LocalBasis local_basis(const ElementGeometry &geom, SpaceKind kind);

/// Local expansion of a field on triangle t as a single polynomial.
Quad2 local_field(const Mesh &mesh, const DofMap &dofmap,
                  const DiscreteField &u, int t);

/// Canonical interpolation: vertex values (P1), edge means (CR), edge and
/// element means (ECR).
DiscreteField interpolate(SpaceKind kind,
                          const std::function<double(const Eigen::Vector2d &)> &f,
                          const Mesh &mesh, const DofMap &dofmap);

/// (I - Pi_ECR) applied to the centered quadratics X^2-Y^2 (which = 1) and
/// XY (which = 2); all edge means and the element mean of the result vanish.
Quad2 ecr_bubble(int which, const ElementGeometry &geom);

/// 2 - (36/H_K) ((x1-M1)^2 + (x2-M2)^2); completes P1 + span{bubbles} to P2.
Quad2 centered_radial_quadratic(const ElementGeometry &geom);

/// Max over elements and local basis functions of
/// |int_K grad(w - Pi w) . grad v|; a test-harness residual for the
/// gradient-orthogonality of the canonical CR/ECR interpolations.
double commuting_residual(
    SpaceKind kind, const std::function<double(const Eigen::Vector2d &)> &w,
    const std::function<Eigen::Vector2d(const Eigen::Vector2d &)> &grad_w,
    const Mesh &mesh, const QuadRule &rule = tri_rule_deg6());

/// Broken-gradient energy sum_K int_K |grad u|^2.
double energy_norm_sq(const Mesh &mesh, const DofMap &dofmap,
                      const DiscreteField &u);
/// Squared L2 norm over the domain.
double l2_norm_sq(const Mesh &mesh, const DofMap &dofmap,
                  const DiscreteField &u);
/// L2 inner product of two fields, possibly from different spaces.
double l2_inner(const Mesh &mesh, const DofMap &da, const DiscreteField &a,
                const DofMap &db, const DiscreteField &b);

/// Expands a reduced (free-dof) vector to a full coefficient vector with
/// zeros on constrained dofs.
Eigen::VectorXd inflate(const DofMap &dofmap, const Eigen::VectorXd &free_vec);
Eigen::VectorXd restrict_free(const DofMap &dofmap,
                              const Eigen::VectorXd &full_vec);

}  // namespace eigfem
