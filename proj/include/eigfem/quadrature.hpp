#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <vector>

namespace eigfem {

/// Symmetric quadrature rule on the reference triangle, given in barycentric
/// coordinates with weights summing to one.
struct QuadRule {
  std::vector<Eigen::Vector3d> bary;
  std::vector<double> weight;
};

/// 3-point midpoint rule, exact for quadratics.
inline const QuadRule &tri_rule_deg2() {
  static const QuadRule rule = {
      {{0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}},
      {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}};
  return rule;
}

/// 6-point rule (Dunavant), exact for quartics.
inline const QuadRule &tri_rule_deg4() {
  static const QuadRule rule = [] {
    QuadRule r;
    const double a1 = 0.108103018168070, b1 = 0.445948490915965;
    const double a2 = 0.816847572980459, b2 = 0.091576213509771;
    const double w1 = 0.223381589678011, w2 = 0.109951743655322;
    for (int k = 0; k < 3; ++k) {
      Eigen::Vector3d p1(b1, b1, b1), p2(b2, b2, b2);
      p1[k] = a1;
      p2[k] = a2;
      r.bary.push_back(p1);
      r.weight.push_back(w1);
      r.bary.push_back(p2);
      r.weight.push_back(w2);
    }
    return r;
  }();
  return rule;
}

/// 12-point rule (Dunavant), exact for degree 6.
inline const QuadRule &tri_rule_deg6() {
  static const QuadRule rule = [] {
    QuadRule r;
    const double a1 = 0.873821971016996, b1 = 0.063089014491502;
    const double w1 = 0.050844906370207;
    const double a2 = 0.501426509658179, b2 = 0.249286745170910;
    const double w2 = 0.116786275726379;
    const double a3 = 0.053145049844817, b3 = 0.310352451033784;
    const double c3 = 1.0 - a3 - b3;
    const double w3 = 0.082851075618374;
    for (int k = 0; k < 3; ++k) {
      Eigen::Vector3d p1(b1, b1, b1), p2(b2, b2, b2);
      p1[k] = a1;
      p2[k] = a2;
      r.bary.push_back(p1);
      r.weight.push_back(w1);
      r.bary.push_back(p2);
      r.weight.push_back(w2);
    }
    const double perms[6][3] = {{a3, b3, c3}, {a3, c3, b3}, {b3, a3, c3},
                                {b3, c3, a3}, {c3, a3, b3}, {c3, b3, a3}};
    for (auto &p : perms) {
      r.bary.push_back(Eigen::Vector3d(p[0], p[1], p[2]));
      r.weight.push_back(w3);
    }
    return r;
  }();
  return rule;
}

/// 3-point Gauss-Legendre rule on [0,1], exact for degree 5.
/// Returns (position, weight) pairs with weights summing to one.
inline const std::array<std::pair<double, double>, 3> &edge_gauss3() {
  static const std::array<std::pair<double, double>, 3> rule = [] {
    const double g = std::sqrt(3.0 / 5.0);
    return std::array<std::pair<double, double>, 3>{
        std::pair{0.5 * (1.0 - g), 5.0 / 18.0}, std::pair{0.5, 8.0 / 18.0},
        std::pair{0.5 * (1.0 + g), 5.0 / 18.0}};
  }();
  return rule;
}

using Tri = Eigen::Matrix<double, 3, 2>;  // vertex coordinates, one per row

template <class F>
double integrate_tri(const Tri &p, const QuadRule &rule, F &&f) {
  const double area =
      0.5 * std::abs((p(1, 0) - p(0, 0)) * (p(2, 1) - p(0, 1)) -
                     (p(2, 0) - p(0, 0)) * (p(1, 1) - p(0, 1)));
  double s = 0.0;
  for (size_t q = 0; q < rule.bary.size(); ++q) {
    const Eigen::Vector3d &b = rule.bary[q];
    Eigen::Vector2d x = b[0] * p.row(0) + b[1] * p.row(1) + b[2] * p.row(2);
    s += rule.weight[q] * f(x);
  }
  return area * s;
}

template <class F>
double integrate_edge(const Eigen::Vector2d &a, const Eigen::Vector2d &b,
                      F &&f) {
  const double len = (b - a).norm();
  double s = 0.0;
  for (const auto &[t, w] : edge_gauss3()) s += w * f(a + t * (b - a));
  return len * s;
}

/// Mean value of f along segment [a,b].
template <class F>
double edge_mean(const Eigen::Vector2d &a, const Eigen::Vector2d &b, F &&f) {
  double s = 0.0;
  for (const auto &[t, w] : edge_gauss3()) s += w * f(a + t * (b - a));
  return s;
}

}  // namespace eigfem
