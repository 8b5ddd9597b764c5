#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "botmine/classify.hpp"
#include "test_support.hpp"

using namespace botmine;
using namespace botmine::testing;

namespace {

// Four Gaussian blobs at the corners of a square with a wide margin.
void make_blobs(Rng& rng, int per_class, std::vector<FeatureVector>* xs, std::vector<int>* ys) {
  const double centers[4][2] = {{0, 0}, {4, 0}, {0, 4}, {4, 4}};
  for (int c = 0; c < 4; ++c) {
    for (int i = 0; i < per_class; ++i) {
      xs->push_back({centers[c][0] + rng.normal(0, 0.3), centers[c][1] + rng.normal(0, 0.3)});
      ys->push_back(c);
    }
  }
}

}  // namespace

TEST_CASE("separable two-class problem reaches full training accuracy") {
  std::vector<FeatureVector> xs;
  std::vector<int> ys;
  Rng rng(1);
  for (int i = 0; i < 30; ++i) {
    xs.push_back({rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)});
    ys.push_back(0);
    xs.push_back({rng.uniform(3.0, 4.0), rng.uniform(0.0, 1.0)});
    ys.push_back(1);
  }
  const LinearModel model = train_svm(xs, ys, 2, 1.0, 7);
  CHECK(evaluate(model, xs, ys).accuracy == doctest::Approx(1.0));
}

TEST_CASE("training is deterministic given the seed") {
  std::vector<FeatureVector> xs;
  std::vector<int> ys;
  Rng rng(2);
  make_blobs(rng, 15, &xs, &ys);
  const LinearModel a = train_svm(xs, ys, 4, 1.0, 99);
  const LinearModel b = train_svm(xs, ys, 4, 1.0, 99);
  CHECK(a.weights == b.weights);
  CHECK(a.bias == b.bias);
  CHECK(a.epochs_run == b.epochs_run);
}

TEST_CASE("dual objective is non-increasing across epochs") {
  std::vector<FeatureVector> xs;
  std::vector<int> ys;
  Rng rng(3);
  make_blobs(rng, 20, &xs, &ys);
  const LinearModel model = train_svm(xs, ys, 4, 1.0, 5);
  for (const auto& log : model.objective_log) {
    REQUIRE(log.size() >= 2);
    for (size_t e = 1; e < log.size(); ++e) CHECK(log[e] <= log[e - 1] + 1e-9);
  }
}

TEST_CASE("four separable blobs classify held-out points") {
  Rng rng(4);
  double total_acc = 0.0;
  const int resamples = 100;
  for (int t = 0; t < resamples; ++t) {
    std::vector<FeatureVector> train_x, test_x;
    std::vector<int> train_y, test_y;
    make_blobs(rng, 10, &train_x, &train_y);
    make_blobs(rng, 20, &test_x, &test_y);
    const LinearModel model = train_svm(train_x, train_y, 4, 1.0, 1000 + t);
    total_acc += evaluate(model, test_x, test_y).accuracy;
  }
  CHECK(total_acc / resamples >= 0.95);
}

TEST_CASE("train_svm rejects degenerate input") {
  CHECK_THROWS_AS(train_svm({{1.0}, {2.0}}, {0, 0}, 1, 1.0, 0), DegenerateTrainingError);
  CHECK_THROWS_AS(train_svm({{1.0}}, {0, 1}, 2, 1.0, 0), ShapeMismatchError);
}

TEST_CASE("predict follows biases on zero descriptors and breaks ties low") {
  LinearModel model;
  model.num_classes = 2;
  model.dim = 2;
  model.weights = {{0.0, 0.0}, {0.0, 0.0}};
  model.bias = {1.0, -1.0};
  CHECK(predict(model, {0.0, 0.0}).label == 0);

  model.bias = {-1.0, 1.0};
  CHECK(predict(model, {0.0, 0.0}).label == 1);

  model.bias = {0.5, 0.5};
  CHECK(predict(model, {0.0, 0.0}).label == 0);  // exact tie -> lower id

  CHECK_THROWS_AS(predict(model, {1.0, 2.0, 3.0}), ShapeMismatchError);
}

TEST_CASE("predict argmax ignores a common shift and matches a dot-product oracle") {
  Rng rng(5);
  for (int t = 0; t < 50; ++t) {
    LinearModel model;
    model.num_classes = rng.range_int(2, 6);
    model.dim = rng.range_int(1, 8);
    for (int c = 0; c < model.num_classes; ++c) {
      FeatureVector w(model.dim);
      for (auto& v : w) v = rng.normal();
      model.weights.push_back(w);
      model.bias.push_back(rng.normal());
    }
    FeatureVector x(model.dim);
    for (auto& v : x) v = rng.normal();

    const Prediction p = predict(model, x);
    int best = 0;
    double best_score = -1e300;
    for (int c = 0; c < model.num_classes; ++c) {
      double s = model.bias[c];
      for (int j = 0; j < model.dim; ++j) s += model.weights[c][j] * x[j];
      if (s > best_score) {
        best_score = s;
        best = c;
      }
    }
    CHECK(p.label == best);

    LinearModel shifted = model;
    const double shift = rng.normal() * 10;
    for (auto& b : shifted.bias) b += shift;
    CHECK(predict(shifted, x).label == p.label);
  }
}

TEST_CASE("evaluate on a hand-counted fixture") {
  LinearModel model;
  model.num_classes = 2;
  model.dim = 1;
  model.weights = {{-1.0}, {1.0}};  // class 1 wins for x > 0
  model.bias = {0.0, 0.0};

  // 10 samples: 6 of class 0 (one above zero), 4 of class 1 (one below).
  std::vector<FeatureVector> xs = {{-1}, {-2}, {-1}, {-3}, {-1}, {2}, {1}, {2}, {3}, {-2}};
  std::vector<int> ys = {0, 0, 0, 0, 0, 0, 1, 1, 1, 1};
  const EvalReport r = evaluate(model, xs, ys);
  CHECK(r.total == 10);
  CHECK(r.correct == 8);  // class 0: 5/6, class 1: 3/4
  CHECK(r.accuracy == doctest::Approx(0.8));
  CHECK(r.per_class_accuracy[0] == doctest::Approx(5.0 / 6.0));
  CHECK(r.per_class_accuracy[1] == doctest::Approx(0.75));
  CHECK(r.confusion[0][0] == 5);
  CHECK(r.confusion[0][1] == 1);
  CHECK(r.confusion[1][0] == 1);
  CHECK(r.confusion[1][1] == 3);

  // Perfect predictor: diagonal confusion.
  std::vector<FeatureVector> sep = {{-1}, {-2}, {1}, {2}};
  std::vector<int> sep_y = {0, 0, 1, 1};
  const EvalReport perfect = evaluate(model, sep, sep_y);
  CHECK(perfect.accuracy == doctest::Approx(1.0));
  CHECK(perfect.confusion[0][1] == 0);
  CHECK(perfect.confusion[1][0] == 0);

  // Constant predictor on a balanced 4-class set: accuracy 1/4.
  LinearModel constant;
  constant.num_classes = 4;
  constant.dim = 1;
  constant.weights = {{0.0}, {0.0}, {0.0}, {0.0}};
  constant.bias = {1.0, 0.0, 0.0, 0.0};
  std::vector<FeatureVector> bal(8, FeatureVector{0.0});
  std::vector<int> bal_y = {0, 1, 2, 3, 0, 1, 2, 3};
  CHECK(evaluate(constant, bal, bal_y).accuracy == doctest::Approx(0.25));
}

TEST_CASE("bot_descriptor dimension, sentinel mapping and mirror invariance") {
  Rng rng(6);
  const HogConfig hc;
  const PatchConfig pc{16, 16};
  const int dim = hc.descriptor_dim(16);

  // Small model of 5 random detectors.
  std::vector<MinedTriplet> model(5);
  for (auto& t : model) {
    for (int r = 0; r < 3; ++r) {
      t.detector.weights[r].resize(dim);
      for (auto& v : t.detector.weights[r]) v = rng.normal();
    }
    t.detector.geometry = GeometryConfig{0.5, 1.0, 1e-6};
    t.detector.signature = make_signature({2, 3}, {40, 8}, {20, 28}, t.detector.geometry);
  }

  const GrayImage img = random_image(64, 48, rng);
  const GridPair grids{build_block_grid(img, hc), build_block_grid(mirror(img), hc)};
  const FeatureVector bot = bot_descriptor(grids, model, 4, pc, 0.25);
  CHECK(bot.size() == 5);

  // Mirrored input gives exactly the same descriptor.
  const GrayImage mir = mirror(img);
  const GridPair mgrids{build_block_grid(mir, hc), build_block_grid(mirror(mir), hc)};
  CHECK(bot_descriptor(mgrids, model, 4, pc, 0.25) == bot);

  // An image too small for three disjoint patches maps to the zero sentinel.
  const GrayImage tiny = constant_image(16, 16, 0.3f);
  const GridPair tgrids{build_block_grid(tiny, hc), build_block_grid(mirror(tiny), hc)};
  const FeatureVector zero = bot_descriptor(tgrids, model, 4, pc, 0.25);
  for (double v : zero) CHECK(v == 0.0);
}
