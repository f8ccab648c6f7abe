#pragma once

#include "eigfem/recovery.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <utility>

namespace eigfem {

/// Quadratic correction polynomial on one element for a constant Hessian
/// proxy H: the Taylor expansion of the canonical interpolation error of the
/// given family. Off-diagonal entries use the symmetric part of H.
Quad2 p_polynomial(SpaceKind family, const ElementGeometry &geom,
                   const Eigen::Matrix2d &H);

/// First-family eigenvalue error estimate for a nonconforming eigenpair:
///   ||g - grad_h u||^2 - 2 lambda sum_K int_K P_kind(H_K) u dx
/// with H_K the element Jacobian of the recovered gradient g.
double estimate_type1(SpaceKind kind, double lambda, const Mesh &mesh,
                      const DofMap &dofmap, const DiscreteField &u,
                      const RecoveredGradient &g);

/// Second-family estimate: the recovery residual plus normal-jump edge terms
/// against the averaged P1 correction polynomial, minus the volume term
/// 2 int P1-polynomial (Delta_h u + lambda u). The broken Laplacian vanishes
/// for CR fields and is elementwise constant for ECR.
double estimate_type2(SpaceKind kind, double lambda, const Mesh &mesh,
                      const DofMap &dofmap, const DiscreteField &u,
                      const RecoveredGradient &g);

/// Conforming estimate ||g - grad u||^2 for P1 (or projected P1) fields.
double estimate_conforming(const Mesh &mesh, const DofMap &dofmap,
                           const DiscreteField &u, const RecoveredGradient &g);

/// Vertex-averaged conforming projection of a CR eigenfunction: vertex value
/// = mean of the element limits, zero on Dirichlet vertices, L2-normalized.
/// Returns the P1 field and its Rayleigh quotient.
std::pair<DiscreteField, double> average_projection(const Mesh &mesh,
                                                    const DofMap &cr_map,
                                                    const DiscreteField &u_cr,
                                                    const DofMap &p1_map);

/// Correction by an asymptotically exact estimate: lower (nonconforming)
/// bounds add F, upper (conforming) bounds subtract it.
inline double recovered_eigenvalue(bool conforming, double lambda, double F) {
  return conforming ? lambda - F : lambda + F;
}

/// Weighted average of a lower and an upper eigenvalue bound; the weight on
/// each bound is proportional to the OTHER bound's error estimate. Falls back
/// to the midpoint when the weights degenerate.
double combined_eigenvalue(double lambda_low, double f_low, double lambda_up,
                           double f_up);

/// Richardson extrapolation from two consecutive uniform levels.
inline double extrapolate(double lambda_h, double lambda_2h) {
  return (4.0 * lambda_h - lambda_2h) / 3.0;
}

/// All scalar quantities computed on one mesh level, keyed per eigenvalue
/// index by quantity tag (lambda_CR, F_CR1_CR, rec_CR1_CR, comb_..., ...).
struct EstimateReport {
  int level = 0;
  double h = 0.0;
  std::vector<std::map<std::string, double>> records;  // one map per index

  void set(int eig_index, const std::string &tag, double value);
  bool has(int eig_index, const std::string &tag) const;
  double get(int eig_index, const std::string &tag) const;  // throws if absent
};

/// One CSV row per (level, eigenvalue index, quantity, value).
void write_csv(std::ostream &os, const EstimateReport &report,
               bool header = true);

}  // namespace eigfem
