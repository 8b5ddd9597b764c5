#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "botmine/hog.hpp"
#include "test_support.hpp"

using namespace botmine;
using namespace botmine::testing;

TEST_CASE("constant patch gives an all-zero descriptor") {
  const GrayImage img = constant_image(80, 80, 0.37f);
  const HogConfig cfg;
  const FeatureVector f = extract_hog(img, {8, 8, 64}, cfg);
  CHECK(f.size() == 1764);
  CHECK(*std::max_element(f.begin(), f.end()) == 0.0);
  CHECK(*std::min_element(f.begin(), f.end()) == 0.0);
}

TEST_CASE("descriptor dimensions follow the block count formula") {
  const HogConfig cfg;
  CHECK(cfg.descriptor_dim(64) == 7 * 7 * 4 * 9);    // 1764
  CHECK(cfg.descriptor_dim(128) == 15 * 15 * 4 * 9);  // 8100

  Rng rng(3);
  const GrayImage img = random_image(200, 160, rng);
  CHECK(extract_hog(img, {0, 0, 64}, cfg).size() == 1764);
  CHECK(extract_hog(img, {32, 16, 128}, cfg).size() == 8100);
  CHECK(whole_image_descriptor(img, cfg).size() == 8100);
}

TEST_CASE("vertical step edge concentrates energy in the horizontal-gradient bin") {
  GrayImage img = GrayImage::zeros(64, 64);
  for (int y = 0; y < 64; ++y) {
    for (int x = 32; x < 64; ++x) img.at(x, y) = 1.0f;
  }
  const HogConfig cfg;
  const FeatureVector f = extract_hog(img, {0, 0, 64}, cfg);

  // Unsigned orientation of a pure horizontal gradient is 0, i.e. bin 0.
  double bin0 = 0.0, total = 0.0;
  for (size_t i = 0; i < f.size(); ++i) {
    total += f[i] * f[i];
    if (i % cfg.bins == 0) bin0 += f[i] * f[i];
  }
  CHECK(total > 0.0);
  CHECK(bin0 / total >= 0.9);
}

TEST_CASE("entries stay in [0,1] and ignore constant intensity shifts") {
  Rng rng(17);
  const HogConfig cfg;
  for (int t = 0; t < 20; ++t) {
    GrayImage img = random_image(96, 96, rng);
    // Quantize to 8-bit levels in [0, 0.5] so the +0.25 shift is exact in
    // float and gradients are unchanged bit for bit.
    for (auto& p : img.pixels) p = std::floor(p * 128.0f) / 256.0f;
    const FeatureVector f = extract_hog(img, {8, 16, 64}, cfg);
    CHECK(*std::min_element(f.begin(), f.end()) >= 0.0);
    CHECK(*std::max_element(f.begin(), f.end()) <= 1.0);

    GrayImage shifted = img;
    for (auto& p : shifted.pixels) p += 0.25f;
    const FeatureVector g = extract_hog(shifted, {8, 16, 64}, cfg);
    CHECK(max_abs_diff(f, g) == 0.0);
  }
}

TEST_CASE("identical images give identical whole-image descriptors") {
  Rng rng(23);
  const GrayImage a = random_image(180, 140, rng);
  const GrayImage b = a;
  const HogConfig cfg;
  CHECK(whole_image_descriptor(a, cfg) == whole_image_descriptor(b, cfg));

  // A mirrored image generally differs: the cells are reordered.
  const FeatureVector fm = whole_image_descriptor(mirror(a), cfg);
  CHECK(max_abs_diff(whole_image_descriptor(a, cfg), fm) > 1e-6);
}

TEST_CASE("block grid matches per-patch extraction on aligned windows") {
  Rng rng(31);
  const GrayImage img = random_image(160, 120, rng);
  const HogConfig cfg;
  const BlockGrid grid = build_block_grid(img, cfg);
  CHECK(grid.blocks_x == 160 / 8 - 1);
  CHECK(grid.blocks_y == 120 / 8 - 1);

  for (int t = 0; t < 10; ++t) {
    const int cx = rng.range_int(0, (160 - 64) / 8);
    const int cy = rng.range_int(0, (120 - 64) / 8);
    const FeatureVector direct = extract_hog(img, {cx * 8, cy * 8, 64}, cfg);
    const FeatureVector gathered = gather_window(grid, cx, cy, 64 / 8);
    CHECK(direct == gathered);  // bit-identical by construction
  }
}

TEST_CASE("out-of-bounds patches are rejected") {
  const GrayImage img = constant_image(100, 100, 0.5f);
  const HogConfig cfg;
  CHECK_THROWS_AS(extract_hog(img, {50, 50, 64}, cfg), InvalidRegionError);
  CHECK_THROWS_AS(extract_hog(img, {-8, 0, 64}, cfg), InvalidRegionError);
}
