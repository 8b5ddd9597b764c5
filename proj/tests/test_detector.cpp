#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numeric>

#include "botmine/detector.hpp"
#include "test_support.hpp"

using namespace botmine;
using namespace botmine::testing;

namespace {

// Vertical, horizontal and diagonal gratings: HOG-distinguishable patterns.
void plant_grating(GrayImage& img, int x0, int y0, int side, int kind) {
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      float v = 0.0f;
      if (kind == 0) v = (x / 2) % 2 ? 1.0f : 0.0f;
      if (kind == 1) v = (y / 2) % 2 ? 1.0f : 0.0f;
      if (kind == 2) v = ((x + y) / 2) % 2 ? 1.0f : 0.0f;
      img.at(x0 + x, y0 + y) = v;
    }
  }
}

struct PlantedScene {
  GrayImage img;
  TripletDetector det;
  PatchConfig pc{16, 16};
  HogConfig hc;
  std::array<PatchLocation, 3> truth;
};

// Three distinct gratings on a flat background; detector weights are the HOG
// templates themselves, so each role peaks on its own pattern.
PlantedScene make_planted_scene() {
  PlantedScene s;
  s.img = constant_image(64, 64, 0.5f);
  s.truth = {PatchLocation{0, 0, 16}, PatchLocation{48, 0, 16}, PatchLocation{0, 48, 16}};
  for (int r = 0; r < 3; ++r) plant_grating(s.img, s.truth[r].x, s.truth[r].y, 16, r);
  for (int r = 0; r < 3; ++r) s.det.weights[r] = extract_hog(s.img, s.truth[r], s.hc);
  const auto c = [](const PatchLocation& l) { return Point{l.x + 8.0, l.y + 8.0}; };
  s.det.geometry = GeometryConfig{0.0, 0.0, 1e-6};
  s.det.signature = make_signature(c(s.truth[0]), c(s.truth[1]), c(s.truth[2]), s.det.geometry);
  return s;
}

}  // namespace

TEST_CASE("fit_background hand-computed covariance") {
  const BackgroundStats st = fit_background({{0.0, 0.0}, {2.0, 2.0}}, 0.0);
  CHECK(st.mu(0) == doctest::Approx(1.0));
  CHECK(st.mu(1) == doctest::Approx(1.0));
  CHECK(st.sigma(0, 0) == doctest::Approx(1.0));
  CHECK(st.sigma(0, 1) == doctest::Approx(1.0));
  CHECK(st.sigma(1, 0) == doctest::Approx(1.0));
  CHECK(st.sigma(1, 1) == doctest::Approx(1.0));
}

TEST_CASE("fit_background of identical patches is the ridge alone") {
  const std::vector<FeatureVector> same(5, FeatureVector{0.3, 0.7, 0.1});
  const BackgroundStats st = fit_background(same, 0.1);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      CHECK(st.sigma(i, j) == doctest::Approx(i == j ? 0.1 : 0.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("fit_background contract on random input") {
  Rng rng(2);
  std::vector<FeatureVector> patches;
  for (int i = 0; i < 40; ++i) {
    FeatureVector p(6);
    for (auto& v : p) v = rng.uniform();
    patches.push_back(p);
  }
  const BackgroundStats st = fit_background(patches, 0.01);
  CHECK((st.sigma - st.sigma.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(st.mu.allFinite());
  CHECK(st.sample_count == 40);
  CHECK_THROWS_AS(fit_background({{1.0, 2.0}}, 0.0), InsufficientDataError);
}

TEST_CASE("chunked accumulation merges to the sequential result") {
  Rng rng(13);
  Eigen::MatrixXd data(30, 5);
  for (int i = 0; i < 30; ++i) {
    for (int j = 0; j < 5; ++j) data(i, j) = rng.uniform();
  }
  BackgroundAccumulator seq(5);
  for (int i = 0; i < 30; ++i) {
    const Eigen::VectorXd row = data.row(i);
    seq.add(row.data());
  }
  BackgroundAccumulator chunked(5);
  chunked.add_batch(data.topRows(11));
  chunked.add_batch(data.middleRows(11, 9));
  chunked.add_batch(data.bottomRows(10));

  const BackgroundStats a = seq.finalize(0.0);
  const BackgroundStats b = chunked.finalize(0.0);
  CHECK((a.mu - b.mu).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((a.sigma - b.sigma).cwiseAbs().maxCoeff() < 1e-12);

  // Same chunking twice is bit-identical.
  BackgroundAccumulator again(5);
  again.add_batch(data.topRows(11));
  again.add_batch(data.middleRows(11, 9));
  again.add_batch(data.bottomRows(10));
  const BackgroundStats c = again.finalize(0.0);
  CHECK((b.mu - c.mu).cwiseAbs().maxCoeff() == 0.0);
  CHECK((b.sigma - c.sigma).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("lda_weights closed-form cases") {
  BackgroundStats st;
  st.mu = Eigen::VectorXd::Zero(3);
  st.sigma = Eigen::MatrixXd::Identity(3, 3);
  const FeatureVector t{1.0, -2.0, 0.5};
  const FeatureVector w = lda_weights(t, st);
  for (int i = 0; i < 3; ++i) CHECK(w[i] == doctest::Approx(t[i]).epsilon(1e-12));

  st.sigma = 2.0 * Eigen::MatrixXd::Identity(3, 3);
  const FeatureVector w2 = lda_weights(t, st);
  for (int i = 0; i < 3; ++i) CHECK(w2[i] == doctest::Approx(t[i] / 2).epsilon(1e-12));

  st.sigma = Eigen::Vector3d(1.0, 2.0, 4.0).asDiagonal();
  st.mu = Eigen::Vector3d(1.0, 0.0, 0.0);
  const FeatureVector w3 = lda_weights({2.0, 2.0, 4.0}, st);
  for (int i = 0; i < 3; ++i) CHECK(w3[i] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("lda_weights residual bound on random SPD systems") {
  Rng rng(21);
  for (int t = 0; t < 100; ++t) {
    const int dim = rng.range_int(2, 64);
    Eigen::MatrixXd m(dim, dim);
    for (int i = 0; i < dim; ++i) {
      for (int j = 0; j < dim; ++j) m(i, j) = rng.normal();
    }
    BackgroundStats st;
    st.sigma = m.transpose() * m / dim + 0.05 * Eigen::MatrixXd::Identity(dim, dim);
    st.mu = Eigen::VectorXd::Zero(dim);
    FeatureVector tmpl(dim);
    for (auto& v : tmpl) v = rng.normal();

    const FeatureVector w = lda_weights(tmpl, st);
    const Eigen::Map<const Eigen::VectorXd> wv(w.data(), dim);
    const Eigen::Map<const Eigen::VectorXd> tv(tmpl.data(), dim);
    const double residual = (st.sigma * wv - (tv - st.mu)).norm();
    CHECK(residual <= 1e-6 * (tv - st.mu).norm());
  }
}

TEST_CASE("lda_weights rejects a non-PD matrix") {
  BackgroundStats st;
  st.sigma = Eigen::MatrixXd::Zero(2, 2);
  st.sigma(0, 0) = 1.0;
  st.sigma(1, 1) = -1.0;
  st.mu = Eigen::VectorXd::Zero(2);
  CHECK_THROWS_AS(lda_weights({1.0, 1.0}, st), SingularCovarianceError);
}

TEST_CASE("score_grid dimensions and zero weights") {
  const HogConfig hc;
  const PatchConfig pc{64, 8};
  const GrayImage img = constant_image(500, 300, 0.5f);
  const FeatureVector zero(static_cast<size_t>(hc.descriptor_dim(64)), 0.0);
  const ScoreMap map = score_grid(img, zero, pc, hc);
  CHECK(map.cols == 55);
  CHECK(map.rows == 30);
  for (double s : map.scores) CHECK(s == 0.0);

  CHECK_THROWS_AS(score_grid(constant_image(32, 32, 0.0f), zero, pc, hc), TooSmallError);
}

TEST_CASE("fast score kernel matches the serial reference") {
  Rng rng(4);
  const HogConfig hc;
  const PatchConfig pc{64, 8};
  const GrayImage img = random_image(144, 104, rng);
  FeatureVector w(static_cast<size_t>(hc.descriptor_dim(64)));
  for (auto& v : w) v = rng.normal();

  const ScoreMap fast = score_grid(build_block_grid(img, hc), w, pc);
  const ScoreMap ref = score_grid_reference(img, w, pc, hc);
  REQUIRE(fast.cols == ref.cols);
  REQUIRE(fast.rows == ref.rows);
  CHECK(max_abs_diff(fast.scores, ref.scores) < 1e-9);
}

TEST_CASE("top_k_nms basics") {
  ScoreMap map;
  map.cols = 10;
  map.rows = 10;
  map.patch_side = 64;
  map.stride = 8;
  map.scores.assign(100, 0.0);
  map.scores[12] = 3.0;  // (col 2, row 1)

  const auto picks = top_k_nms(map, 3, 0.25);
  REQUIRE(picks.size() == 3);
  CHECK(picks[0].loc == PatchLocation{16, 8, 64});
  CHECK(picks[0].score == 3.0);
  CHECK(picks[1].score == 0.0);  // zero cells fill the rest, NMS permitting

  // Two adjacent windows 8 px apart overlap far above 0.25: keep the higher.
  ScoreMap two;
  two.cols = 2;
  two.rows = 1;
  two.patch_side = 64;
  two.stride = 8;
  two.scores = {0.9, 1.0};
  const auto kept = top_k_nms(two, 3, 0.25);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].loc.x == 8);
}

TEST_CASE("top_k_nms equals a brute-force oracle on random maps") {
  Rng rng(8);
  for (int t = 0; t < 50; ++t) {
    ScoreMap map;
    map.cols = 10;
    map.rows = 10;
    map.patch_side = 64;
    map.stride = rng.range_int(8, 40);
    map.scores.resize(100);
    for (auto& s : map.scores) s = rng.uniform();
    const int k = rng.range_int(1, 8);
    const double overlap = rng.uniform(0.0, 0.6);

    const auto got = top_k_nms(map, k, overlap);

    // Oracle: repeatedly take the best remaining cell compatible with kept.
    std::vector<Detection> oracle;
    std::vector<bool> used(100, false);
    while (static_cast<int>(oracle.size()) < k) {
      int best = -1;
      for (int i = 0; i < 100; ++i) {
        if (used[i]) continue;
        const PatchLocation loc = map.location(i % 10, i / 10);
        bool ok = true;
        for (const auto& d : oracle) {
          if (iou(loc, d.loc) > overlap) {
            ok = false;
            break;
          }
        }
        if (!ok) {
          used[i] = true;  // can never become valid later
          continue;
        }
        if (best < 0 || map.scores[i] > map.scores[best]) best = i;
      }
      if (best < 0) break;
      used[best] = true;
      oracle.push_back({map.location(best % 10, best / 10), map.scores[best]});
    }

    REQUIRE(got.size() == oracle.size());
    for (size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].loc == oracle[i].loc);
      CHECK(got[i].score == oracle[i].score);
    }
  }
}

TEST_CASE("detect_triplet with penalties off sums the top-1 scores") {
  PlantedScene s = make_planted_scene();
  const TripletDetection d = detect_triplet(s.img, s.det, 4, s.pc, s.hc, 0.25);
  REQUIRE(d.valid);
  CHECK(d.locations[0] == s.truth[0]);
  CHECK(d.locations[1] == s.truth[1]);
  CHECK(d.locations[2] == s.truth[2]);

  double expected = 0.0;
  for (int r = 0; r < 3; ++r) {
    const ScoreMap m = score_grid(s.img, s.det.weights[r], s.pc, s.hc);
    expected += *std::max_element(m.scores.begin(), m.scores.end());
  }
  CHECK(d.total == doctest::Approx(expected).epsilon(1e-12));
  CHECK(d.order_pen == 1.0);
  CHECK(d.shape_pen == 1.0);
}

TEST_CASE("order violation halves the score at eta_o = 0.5") {
  // k = 1 pins the combination to the three top-1 windows.
  PlantedScene s = make_planted_scene();
  const double base = detect_triplet(s.img, s.det, 1, s.pc, s.hc, 0.25).total;

  s.det.geometry = GeometryConfig{0.5, 0.0, 1e-6};
  s.det.signature.order = -s.det.signature.order;  // contradict the arrangement
  const TripletDetection d = detect_triplet(s.img, s.det, 1, s.pc, s.hc, 0.25);
  REQUIRE(d.valid);
  CHECK(d.total == doctest::Approx(0.5 * base).epsilon(1e-9));
}

TEST_CASE("raising the penalty weights never raises the total") {
  PlantedScene s = make_planted_scene();
  s.det.signature.order = -s.det.signature.order;
  s.det.signature.angles.cos_a += 0.3;  // make the shape constraint bite too
  double prev = std::numeric_limits<double>::infinity();
  for (double eta = 0.0; eta <= 1.0; eta += 0.125) {
    s.det.geometry = GeometryConfig{eta, eta, 1e-6};
    const TripletDetection d = detect_triplet(s.img, s.det, 4, s.pc, s.hc, 0.25);
    REQUIRE(d.valid);
    CHECK(d.total <= prev + 1e-12);
    prev = d.total;
  }
}

TEST_CASE("greedy equals the exhaustive argmax when k covers all windows") {
  Rng rng(55);
  const HogConfig hc;
  const PatchConfig pc{16, 16};  // disjoint windows, so truncation is lossless
  const int dim = hc.descriptor_dim(16);

  for (int t = 0; t < 30; ++t) {
    const GrayImage img = random_image(64, 32, rng);  // 4 x 2 = 8 windows
    TripletDetector det;
    for (int r = 0; r < 3; ++r) {
      det.weights[r].resize(dim);
      for (auto& v : det.weights[r]) v = rng.normal();
    }
    det.geometry = GeometryConfig{0.5, 1.0, 1e-6};
    det.signature = make_signature({0, 0}, {30, 4}, {11, 27}, det.geometry);

    const TripletDetection greedy = detect_triplet(img, det, 8, pc, hc, 0.25);

    // Exhaustive oracle over all role-assigned window triples.
    std::vector<PatchLocation> windows;
    std::vector<std::array<double, 3>> scores;
    for (int y = 0; y + 16 <= 32; y += 16) {
      for (int x = 0; x + 16 <= 64; x += 16) {
        const PatchLocation loc{x, y, 16};
        const FeatureVector f = extract_hog(img, loc, hc);
        windows.push_back(loc);
        scores.push_back({std::inner_product(f.begin(), f.end(), det.weights[0].begin(), 0.0),
                          std::inner_product(f.begin(), f.end(), det.weights[1].begin(), 0.0),
                          std::inner_product(f.begin(), f.end(), det.weights[2].begin(), 0.0)});
      }
    }
    double best = -std::numeric_limits<double>::infinity();
    std::array<PatchLocation, 3> best_locs{};
    const size_t n = windows.size();
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        for (size_t l = 0; l < n; ++l) {
          if (l == i || l == j) continue;
          const auto c = [&](size_t w) {
            return Point{windows[w].x + 8.0, windows[w].y + 8.0};
          };
          const int g = order_sign(c(i), c(j), c(l), det.geometry.degeneracy_eps);
          const double po = order_penalty(det.signature.order, g, det.geometry);
          const double ps = shape_penalty(det.signature.angles,
                                          triangle_angles(c(i), c(j), c(l)), det.geometry);
          const double total = (scores[i][0] + scores[j][1] + scores[l][2]) * po * ps;
          if (total > best) {
            best = total;
            best_locs = {windows[i], windows[j], windows[l]};
          }
        }
      }
    }
    REQUIRE(greedy.valid);
    CHECK(greedy.total == doctest::Approx(best).epsilon(1e-12));
    CHECK(greedy.locations[0] == best_locs[0]);
    CHECK(greedy.locations[1] == best_locs[1]);
    CHECK(greedy.locations[2] == best_locs[2]);
  }
}

TEST_CASE("detect_with_mirror ties break toward the unmirrored image") {
  const GrayImage img = constant_image(64, 64, 0.5f);
  PlantedScene proto = make_planted_scene();  // reuse detector shape
  const TripletDetection d = detect_with_mirror(img, proto.det, 4, proto.pc, proto.hc, 0.25);
  REQUIRE(d.valid);
  CHECK(d.total == 0.0);
  CHECK_FALSE(d.mirrored);
}

TEST_CASE("a pattern only present mirrored is found in the mirror") {
  PlantedScene s = make_planted_scene();
  // Build the detector from the mirrored image; the straight image then only
  // matches after flipping.
  const GrayImage flipped = mirror(s.img);
  TripletDetector det = s.det;
  for (int r = 0; r < 3; ++r) {
    const PatchLocation l = s.truth[r];
    const PatchLocation lm{s.img.width - l.x - l.side, l.y, l.side};
    det.weights[r] = extract_hog(flipped, lm, s.hc);
  }
  det.geometry = GeometryConfig{0.5, 1.0, 1e-6};
  const auto c = [&](int r) {
    const PatchLocation l = s.truth[r];
    return Point{s.img.width - l.x - l.side + 8.0, l.y + 8.0};
  };
  det.signature = make_signature(c(0), c(1), c(2), det.geometry);

  const TripletDetection plain = detect_triplet(s.img, det, 4, s.pc, s.hc, 0.25);
  const TripletDetection both = detect_with_mirror(s.img, det, 4, s.pc, s.hc, 0.25);
  REQUIRE(both.valid);
  CHECK(both.mirrored);
  CHECK(both.total > plain.total);
}

TEST_CASE("detect_with_mirror is exactly mirror-invariant") {
  Rng rng(77);
  const HogConfig hc;
  const PatchConfig pc{16, 16};
  const int dim = hc.descriptor_dim(16);
  for (int t = 0; t < 10; ++t) {
    const GrayImage img = random_image(64, 48, rng);
    TripletDetector det;
    for (int r = 0; r < 3; ++r) {
      det.weights[r].resize(dim);
      for (auto& v : det.weights[r]) v = rng.normal();
    }
    det.geometry = GeometryConfig{0.5, 1.0, 1e-6};
    det.signature = make_signature({3, 1}, {40, 9}, {17, 30}, det.geometry);

    const TripletDetection a = detect_with_mirror(img, det, 5, pc, hc, 0.25);
    const TripletDetection b = detect_with_mirror(mirror(img), det, 5, pc, hc, 0.25);
    CHECK(a.total == b.total);  // exact
  }
}

TEST_CASE("no valid combination yields the sentinel") {
  // Image admits only one window: every triple reuses it and is skipped.
  Rng rng(90);
  const HogConfig hc;
  const PatchConfig pc{64, 8};
  const GrayImage img = random_image(64, 64, rng);
  TripletDetector det;
  const int dim = hc.descriptor_dim(64);
  for (int r = 0; r < 3; ++r) {
    det.weights[r].assign(dim, 0.0);
    det.weights[r][0] = 1.0;
  }
  det.geometry = GeometryConfig{0.5, 1.0, 1e-6};
  det.signature = make_signature({0, 0}, {10, 0}, {0, 10}, det.geometry);

  const TripletDetection d = detect_triplet(img, det, 3, pc, hc, 0.25);
  CHECK_FALSE(d.valid);
  CHECK(d.total == -std::numeric_limits<double>::infinity());
}
