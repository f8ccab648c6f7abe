#pragma once

#include "eigfem/spaces.hpp"

namespace eigfem {

enum class Provenance { KhCR, KhECR, PprP1, PprP1Star, PprAdaptive };

/// Piecewise-affine recovered gradient, stored as values at each triangle's
/// three edge midpoints (slot i = midpoint of the edge opposite vertex i).
struct RecoveredGradient {
  Provenance tag = Provenance::KhCR;
  std::vector<std::array<Eigen::Vector2d, 3>> mid;

  /// Affine evaluation on triangle t via the midpoint Lagrange basis.
  Eigen::Vector2d eval(const ElementGeometry &g, int t,
                       const Eigen::Vector2d &x) const {
    Eigen::Vector2d v = Eigen::Vector2d::Zero();
    for (int i = 0; i < 3; ++i) v += mid[t][i] * (1.0 - 2.0 * g.phi(i, x));
    return v;
  }
};

/// Edge-midpoint averaging of the broken gradient of a CR/ECR field:
/// interior midpoints get the two-sided average, boundary midpoints the
/// extrapolation 2 v(m') - v(m'') through the neighbor across the interior
/// edge of the boundary element whose midpoints are most nearly collinear
/// with the boundary midpoint (the affine-exact choice).
RecoveredGradient recover_kh(const Mesh &mesh, const DofMap &dofmap,
                             const DiscreteField &u);

/// Polynomial-preserving recovery for conforming P1 fields: least-squares
/// quadratic fits on grown vertex patches, vertex gradients interpolated to
/// edge midpoints.
RecoveredGradient recover_ppr(const Mesh &mesh, const DofMap &dofmap,
                              const DiscreteField &u,
                              Provenance tag = Provenance::PprP1);

/// Midpoint-patch recovery for CR fields on (possibly adaptive) meshes:
/// CR dofs are single-valued at edge midpoints, so a quadratic is fitted to
/// the dof values on a patch of nearby midpoints for each edge.
RecoveredGradient recover_gh(const Mesh &mesh, const DofMap &dofmap,
                             const DiscreteField &u);

/// Per-triangle constant Jacobian of the affine recovered gradient
/// (not symmetrized).
std::vector<Eigen::Matrix2d> recovered_hessian(const RecoveredGradient &g,
                                               const Mesh &mesh);

/// ||g - grad_h u||^2 over the domain.
double recovery_residual_sq(const Mesh &mesh, const DofMap &dofmap,
                            const DiscreteField &u,
                            const RecoveredGradient &g);

}  // namespace eigfem
