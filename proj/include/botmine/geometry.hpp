#pragma once

#include <array>

#include "botmine/errors.hpp"

namespace botmine {

// Patch center in image coordinates (x right, y down).
struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct GeometryConfig {
  double eta_o = 0.5;           // order-constraint weight, in [0, 1]
  double eta_s = 1.0;           // shape-constraint weight, in [0, 1]
  double degeneracy_eps = 1e-6; // squared-pixel threshold for a degenerate cross product
};

// Cosines of the triangle's interior angles, indexed by patch role.
struct TriangleAngles {
  double cos_a = 0.0;
  double cos_b = 0.0;
  double cos_c = 0.0;
};

// Arrangement sign plus angle cosines; the geometric part of a triplet detector.
struct TriangleSignature {
  int order = 0;  // +1 clockwise, -1 counterclockwise, 0 degenerate
  TriangleAngles angles;
};

// Side test: sign of the z component of (b-a) x (c-a).
// |z| <= eps maps to 0 (collinear within tolerance).
int order_sign(const Point& a, const Point& b, const Point& c, double eps);

// 1 when the candidate arrangement agrees with the reference (or the
// reference is degenerate, where ordering is undefined), 1 - eta_o otherwise.
double order_penalty(int g_ref, int g_cand, const GeometryConfig& cfg);

// Angle cosines at vertices a, b, c from normalized inner products of the
// incident edges, clamped to [-1, 1]. Throws DegenerateTriangleError when two
// points are within one pixel of each other.
TriangleAngles triangle_angles(const Point& a, const Point& b, const Point& c);

// 1 - eta_s * sum_i |cos(theta_i) - cos(theta_i')| / 6, role-aligned.
double shape_penalty(const TriangleAngles& ref, const TriangleAngles& cand,
                     const GeometryConfig& cfg);

TriangleSignature make_signature(const Point& a, const Point& b, const Point& c,
                                 const GeometryConfig& cfg);

}  // namespace botmine
