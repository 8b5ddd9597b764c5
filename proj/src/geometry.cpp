#include "botmine/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace botmine {

namespace {

double cos_at_vertex(const Point& v, const Point& p, const Point& q) {
  const double ux = p.x - v.x, uy = p.y - v.y;
  const double vx = q.x - v.x, vy = q.y - v.y;
  const double nu = std::sqrt(ux * ux + uy * uy);
  const double nv = std::sqrt(vx * vx + vy * vy);
  return std::clamp((ux * vx + uy * vy) / (nu * nv), -1.0, 1.0);
}

}  // namespace

int order_sign(const Point& a, const Point& b, const Point& c, double eps) {
  const double z = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
  if (std::abs(z) <= eps) return 0;
  return z > 0.0 ? 1 : -1;
}

double order_penalty(int g_ref, int g_cand, const GeometryConfig& cfg) {
  if (g_ref == 0 || g_ref == g_cand) return 1.0;
  return 1.0 - cfg.eta_o;
}

TriangleAngles triangle_angles(const Point& a, const Point& b, const Point& c) {
  const auto dist2 = [](const Point& p, const Point& q) {
    const double dx = p.x - q.x, dy = p.y - q.y;
    return dx * dx + dy * dy;
  };
  if (dist2(a, b) < 1.0 || dist2(b, c) < 1.0 || dist2(a, c) < 1.0) {
    throw DegenerateTriangleError("triangle_angles: vertices closer than one pixel");
  }
  return {cos_at_vertex(a, b, c), cos_at_vertex(b, a, c), cos_at_vertex(c, a, b)};
}

double shape_penalty(const TriangleAngles& ref, const TriangleAngles& cand,
                     const GeometryConfig& cfg) {
  const double diff = std::abs(ref.cos_a - cand.cos_a) + std::abs(ref.cos_b - cand.cos_b) +
                      std::abs(ref.cos_c - cand.cos_c);
  return 1.0 - cfg.eta_s * diff / 6.0;
}

TriangleSignature make_signature(const Point& a, const Point& b, const Point& c,
                                 const GeometryConfig& cfg) {
  TriangleSignature sig;
  sig.order = order_sign(a, b, c, cfg.degeneracy_eps);
  sig.angles = triangle_angles(a, b, c);
  return sig;
}

}  // namespace botmine
