#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "botmine/geometry.hpp"
#include "botmine/rng.hpp"

using namespace botmine;

namespace {
Point random_point(Rng& rng, double span = 100.0) {
  return {rng.uniform(-span, span), rng.uniform(-span, span)};
}
}  // namespace

TEST_CASE("order_sign basic cases") {
  const double eps = 1e-6;
  CHECK(order_sign({0, 0}, {2, 0}, {1, 1}, eps) == 1);
  CHECK(order_sign({0, 0}, {1, 1}, {2, 0}, eps) == -1);  // b and c swapped
  CHECK(order_sign({0, 0}, {1, 1}, {2, 2}, eps) == 0);   // collinear
}

TEST_CASE("order_sign antisymmetry and mirror flip") {
  Rng rng(42);
  int nondegenerate = 0;
  for (int t = 0; t < 2000; ++t) {
    const Point a = random_point(rng), b = random_point(rng), c = random_point(rng);
    const int g = order_sign(a, b, c, 1e-6);
    CHECK(order_sign(a, c, b, 1e-6) == -g);
    // Horizontal mirror of all three points flips the arrangement.
    const Point am{-a.x, a.y}, bm{-b.x, b.y}, cm{-c.x, c.y};
    CHECK(order_sign(am, bm, cm, 1e-6) == -g);
    if (g != 0) ++nondegenerate;
  }
  CHECK(nondegenerate > 1900);
}

TEST_CASE("order_penalty values and bounds") {
  GeometryConfig cfg;
  cfg.eta_o = 0.5;
  CHECK(order_penalty(1, 1, cfg) == doctest::Approx(1.0));
  CHECK(order_penalty(1, -1, cfg) == doctest::Approx(0.5));
  cfg.eta_o = 0.0;
  CHECK(order_penalty(1, -1, cfg) == doctest::Approx(1.0));
  // Degenerate reference never penalizes.
  cfg.eta_o = 1.0;
  CHECK(order_penalty(0, 1, cfg) == doctest::Approx(1.0));
  CHECK(order_penalty(0, -1, cfg) == doctest::Approx(1.0));

  Rng rng(7);
  for (int t = 0; t < 1000; ++t) {
    cfg.eta_o = rng.uniform();
    const int gr = rng.range_int(-1, 1), gc = rng.range_int(-1, 1);
    const double p = order_penalty(gr, gc, cfg);
    CHECK(p >= 1.0 - cfg.eta_o - 1e-12);
    CHECK(p <= 1.0 + 1e-12);
  }
}

TEST_CASE("triangle_angles known triangles") {
  const auto right = triangle_angles({0, 0}, {1, 0}, {0, 1});
  CHECK(right.cos_a == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(right.cos_b == doctest::Approx(std::sqrt(2.0) / 2).epsilon(1e-9));
  CHECK(right.cos_c == doctest::Approx(std::sqrt(2.0) / 2).epsilon(1e-9));

  const auto equi = triangle_angles({0, 0}, {2, 0}, {1, std::sqrt(3.0)});
  CHECK(equi.cos_a == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(equi.cos_b == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(equi.cos_c == doctest::Approx(0.5).epsilon(1e-9));

  CHECK_THROWS_AS(triangle_angles({0, 0}, {0, 0}, {1, 0}), DegenerateTriangleError);
  CHECK_THROWS_AS(triangle_angles({0, 0}, {0.5, 0.5}, {10, 0}), DegenerateTriangleError);
}

TEST_CASE("triangle angle invariances") {
  Rng rng(99);
  for (int t = 0; t < 500; ++t) {
    Point a = random_point(rng), b = random_point(rng), c = random_point(rng);
    if (order_sign(a, b, c, 1.0) == 0) continue;  // keep clearly non-degenerate triples

    const auto base = triangle_angles(a, b, c);
    // Angles sum to pi.
    const double sum = std::acos(base.cos_a) + std::acos(base.cos_b) + std::acos(base.cos_c);
    CHECK(sum == doctest::Approx(M_PI).epsilon(1e-6));

    // Similarity transform: rotate, scale, translate.
    const double th = rng.uniform(0, 2 * M_PI), s = rng.uniform(0.5, 3.0);
    const double tx = rng.uniform(-50, 50), ty = rng.uniform(-50, 50);
    const auto xf = [&](const Point& p) -> Point {
      return {s * (p.x * std::cos(th) - p.y * std::sin(th)) + tx,
              s * (p.x * std::sin(th) + p.y * std::cos(th)) + ty};
    };
    const auto moved = triangle_angles(xf(a), xf(b), xf(c));
    CHECK(moved.cos_a == doctest::Approx(base.cos_a).epsilon(1e-6));
    CHECK(moved.cos_b == doctest::Approx(base.cos_b).epsilon(1e-6));
    CHECK(moved.cos_c == doctest::Approx(base.cos_c).epsilon(1e-6));

    // Mirroring keeps angles, flips the order sign.
    const auto mirrored = triangle_angles({-a.x, a.y}, {-b.x, b.y}, {-c.x, c.y});
    CHECK(mirrored.cos_a == doctest::Approx(base.cos_a).epsilon(1e-9));
    CHECK(mirrored.cos_b == doctest::Approx(base.cos_b).epsilon(1e-9));
    CHECK(mirrored.cos_c == doctest::Approx(base.cos_c).epsilon(1e-9));
  }
}

TEST_CASE("shape_penalty hand-computed value") {
  GeometryConfig cfg;
  cfg.eta_s = 1.0;
  const TriangleAngles equi{0.5, 0.5, 0.5};
  const TriangleAngles right{0.0, std::sqrt(2.0) / 2, std::sqrt(2.0) / 2};
  // 1 - (0.5 + 2 * 0.2071) / 6
  CHECK(shape_penalty(equi, right, cfg) == doctest::Approx(0.8476).epsilon(1e-4));
  CHECK(shape_penalty(equi, equi, cfg) == doctest::Approx(1.0));
  cfg.eta_s = 0.0;
  CHECK(shape_penalty(equi, right, cfg) == doctest::Approx(1.0));
}

TEST_CASE("shape_penalty bounds and symmetry") {
  Rng rng(1234);
  for (int t = 0; t < 2000; ++t) {
    GeometryConfig cfg;
    cfg.eta_s = rng.uniform();
    const TriangleAngles u{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const TriangleAngles v{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const double p = shape_penalty(u, v, cfg);
    CHECK(p >= 1.0 - cfg.eta_s - 1e-12);
    CHECK(p <= 1.0 + 1e-12);
    CHECK(shape_penalty(v, u, cfg) == doctest::Approx(p).epsilon(1e-15));
  }
  // Equality to 1 iff the cosines match exactly (eta_s > 0).
  GeometryConfig cfg;
  cfg.eta_s = 0.5;
  const TriangleAngles u{0.1, 0.2, 0.3};
  CHECK(shape_penalty(u, u, cfg) == 1.0);
  const TriangleAngles v{0.1 + 1e-9, 0.2, 0.3};
  CHECK(shape_penalty(u, v, cfg) < 1.0);
}

TEST_CASE("make_signature") {
  GeometryConfig cfg;
  const auto sig = make_signature({0, 0}, {2, 0}, {1, 1}, cfg);
  CHECK(sig.order == 1);
  CHECK(sig.angles.cos_a == doctest::Approx(std::sqrt(2.0) / 2).epsilon(1e-9));
}
