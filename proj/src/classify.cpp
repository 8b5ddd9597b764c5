#include "botmine/classify.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "botmine/rng.hpp"

namespace botmine {

FeatureVector bot_descriptor(const GridPair& grids, const std::vector<MinedTriplet>& model,
                             int k, const PatchConfig& pc, double overlap_max) {
  if (model.empty()) throw InsufficientDataError("bot_descriptor: empty triplet model");
  FeatureVector out(model.size(), 0.0);
  for (size_t t = 0; t < model.size(); ++t) {
    const TripletDetection d =
        detect_on_grid_pair(grids.grid, grids.mirrored, model[t].detector, k, pc, overlap_max);
    out[t] = d.valid ? d.total : 0.0;
  }
  return out;
}

namespace {

// Dual coordinate descent for one binary L1-hinge problem.
// Returns the augmented weight vector (bias as the last coordinate).
FeatureVector solve_binary(const std::vector<FeatureVector>& xs, const std::vector<int>& sign,
                           double c_reg, Rng& rng, int max_epochs, double tol,
                           std::vector<double>* objective, int* epochs_out) {
  const int n = static_cast<int>(xs.size());
  const int d = static_cast<int>(xs.front().size()) + 1;  // +1 for the bias feature

  std::vector<double> qii(n);
  for (int i = 0; i < n; ++i) {
    double q = 1.0;  // bias feature
    for (double v : xs[i]) q += v * v;
    qii[i] = q;
  }

  FeatureVector w(d, 0.0);
  std::vector<double> alpha(n, 0.0);
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;

  const auto dot_w = [&](int i) {
    double s = w[d - 1];
    const FeatureVector& x = xs[i];
    for (size_t j = 0; j < x.size(); ++j) s += w[j] * x[j];
    return s;
  };
  const auto axpy_w = [&](double coef, int i) {
    const FeatureVector& x = xs[i];
    for (size_t j = 0; j < x.size(); ++j) w[j] += coef * x[j];
    w[d - 1] += coef;
  };
  const auto dual_objective = [&]() {
    double ww = 0.0, suma = 0.0;
    for (double v : w) ww += v * v;
    for (double a : alpha) suma += a;
    return 0.5 * ww - suma;
  };

  double prev_obj = dual_objective();  // 0 at the start
  objective->push_back(prev_obj);
  int epoch = 0;
  for (; epoch < max_epochs; ++epoch) {
    // Fisher-Yates permutation from the seeded generator.
    for (int i = n - 1; i > 0; --i) {
      std::swap(order[i], order[rng.range_int(0, i)]);
    }
    for (int idx : order) {
      const double y = sign[idx];
      const double g = y * dot_w(idx) - 1.0;
      double pg = g;
      if (alpha[idx] <= 0.0) pg = std::min(g, 0.0);
      if (alpha[idx] >= c_reg) pg = std::max(g, 0.0);
      if (std::abs(pg) < 1e-12) continue;
      const double old = alpha[idx];
      alpha[idx] = std::clamp(old - g / qii[idx], 0.0, c_reg);
      axpy_w((alpha[idx] - old) * y, idx);
    }
    const double obj = dual_objective();
    objective->push_back(obj);
    const double change = prev_obj - obj;
    prev_obj = obj;
    if (change <= tol * std::max(1.0, std::abs(obj))) {
      ++epoch;
      break;
    }
  }
  *epochs_out = epoch;
  return w;
}

}  // namespace

LinearModel train_svm(const std::vector<FeatureVector>& xs, const std::vector<int>& ys,
                      int num_classes, double c_reg, std::uint64_t seed, int max_epochs,
                      double tol) {
  if (xs.empty() || xs.size() != ys.size()) {
    throw ShapeMismatchError("train_svm: descriptors and labels disagree");
  }
  if (num_classes < 2) {
    throw DegenerateTrainingError("train_svm: need at least two classes");
  }
  for (int y : ys) {
    if (y < 0 || y >= num_classes) throw DataError("train_svm: label out of range");
  }
  if (c_reg <= 0.0) throw ConfigError("train_svm: regularization constant must be > 0");

  LinearModel model;
  model.num_classes = num_classes;
  model.dim = static_cast<int>(xs.front().size());
  model.c_reg = c_reg;
  model.seed = seed;
  model.weights.resize(num_classes);
  model.bias.resize(num_classes);
  model.objective_log.resize(num_classes);

  for (int c = 0; c < num_classes; ++c) {
    std::vector<int> sign(ys.size());
    for (size_t i = 0; i < ys.size(); ++i) sign[i] = ys[i] == c ? 1 : -1;
    Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(c));
    int epochs = 0;
    FeatureVector w = solve_binary(xs, sign, c_reg, rng, max_epochs, tol,
                                   &model.objective_log[c], &epochs);
    model.bias[c] = w.back();
    w.pop_back();
    model.weights[c] = std::move(w);
    model.epochs_run = std::max(model.epochs_run, epochs);
  }
  return model;
}

Prediction predict(const LinearModel& model, const FeatureVector& x) {
  if (static_cast<int>(x.size()) != model.dim) {
    throw ShapeMismatchError("predict: descriptor dim " + std::to_string(x.size()) +
                             " != model dim " + std::to_string(model.dim));
  }
  Prediction p;
  p.scores.resize(model.num_classes);
  for (int c = 0; c < model.num_classes; ++c) {
    double s = model.bias[c];
    const FeatureVector& w = model.weights[c];
    for (size_t j = 0; j < x.size(); ++j) s += w[j] * x[j];
    p.scores[c] = s;
  }
  p.label = 0;
  for (int c = 1; c < model.num_classes; ++c) {
    if (p.scores[c] > p.scores[p.label]) p.label = c;  // strict: ties keep the lower id
  }
  return p;
}

EvalReport evaluate(const LinearModel& model, const std::vector<FeatureVector>& xs,
                    const std::vector<int>& ys) {
  if (xs.empty()) throw InsufficientDataError("evaluate: empty test set");
  EvalReport report;
  report.total = static_cast<long long>(xs.size());
  report.confusion.assign(model.num_classes, std::vector<long long>(model.num_classes, 0));
  std::vector<long long> per_class_total(model.num_classes, 0);
  std::vector<long long> per_class_correct(model.num_classes, 0);

  for (size_t i = 0; i < xs.size(); ++i) {
    const int pred = predict(model, xs[i]).label;
    const int truth = ys[i];
    if (truth < 0 || truth >= model.num_classes) continue;  // counted as error by caller
    ++per_class_total[truth];
    ++report.confusion[truth][pred];
    if (pred == truth) {
      ++report.correct;
      ++per_class_correct[truth];
    }
  }
  report.accuracy = static_cast<double>(report.correct) / static_cast<double>(report.total);
  report.per_class_accuracy.resize(model.num_classes, 0.0);
  for (int c = 0; c < model.num_classes; ++c) {
    if (per_class_total[c] > 0) {
      report.per_class_accuracy[c] =
          static_cast<double>(per_class_correct[c]) / static_cast<double>(per_class_total[c]);
    }
  }
  return report;
}

}  // namespace botmine
