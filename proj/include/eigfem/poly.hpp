#pragma once

#include <Eigen/Dense>

#include <array>

namespace eigfem {

/// Bivariate polynomial of degree <= 2 in coordinates centered at a given
/// point:  c0 + c1 X + c2 Y + c3 X^2 + c4 XY + c5 Y^2  with X = x - center.
struct Quad2 {
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  std::array<double, 6> c = {0, 0, 0, 0, 0, 0};

  double value(const Eigen::Vector2d &x) const {
    const double X = x[0] - center[0], Y = x[1] - center[1];
    return c[0] + c[1] * X + c[2] * Y + c[3] * X * X + c[4] * X * Y +
           c[5] * Y * Y;
  }

  Eigen::Vector2d grad(const Eigen::Vector2d &x) const {
    const double X = x[0] - center[0], Y = x[1] - center[1];
    return {c[1] + 2.0 * c[3] * X + c[4] * Y, c[2] + c[4] * X + 2.0 * c[5] * Y};
  }

  double laplacian() const { return 2.0 * (c[3] + c[5]); }

  Quad2 &operator+=(const Quad2 &o) {
    for (int i = 0; i < 6; ++i) c[i] += o.c[i];
    return *this;
  }
  Quad2 &operator-=(const Quad2 &o) {
    for (int i = 0; i < 6; ++i) c[i] -= o.c[i];
    return *this;
  }
  Quad2 &operator*=(double s) {
    for (double &ci : c) ci *= s;
    return *this;
  }

  friend Quad2 operator+(Quad2 a, const Quad2 &b) { return a += b; }
  friend Quad2 operator-(Quad2 a, const Quad2 &b) { return a -= b; }
  friend Quad2 operator*(double s, Quad2 a) { return a *= s; }

  /// Affine polynomial v0 + g.dot(x - center).
  static Quad2 affine(const Eigen::Vector2d &center, double v0,
                      const Eigen::Vector2d &g) {
    Quad2 p;
    p.center = center;
    p.c = {v0, g[0], g[1], 0, 0, 0};
    return p;
  }

  /// Product of two affine polynomials sharing the same center.
  static Quad2 product(const Quad2 &a, const Quad2 &b) {
    Quad2 p;
    p.center = a.center;
    p.c[0] = a.c[0] * b.c[0];
    p.c[1] = a.c[0] * b.c[1] + a.c[1] * b.c[0];
    p.c[2] = a.c[0] * b.c[2] + a.c[2] * b.c[0];
    p.c[3] = a.c[1] * b.c[1];
    p.c[4] = a.c[1] * b.c[2] + a.c[2] * b.c[1];
    p.c[5] = a.c[2] * b.c[2];
    return p;
  }
};

}  // namespace eigfem
