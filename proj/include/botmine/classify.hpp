#pragma once

#include <cstdint>
#include <vector>

#include "botmine/mining.hpp"

namespace botmine {

// Bag-of-Triplets: one entry per mined detector (model order, grouped by
// class), holding the maximum mirrored detection total on the image.
// Images with no valid detection for a detector get 0 in that entry.
FeatureVector bot_descriptor(const GridPair& grids, const std::vector<MinedTriplet>& model,
                             int k, const PatchConfig& pc, double overlap_max);

// One-vs-rest linear classifiers over BoT space.
struct LinearModel {
  int num_classes = 0;
  int dim = 0;
  std::vector<FeatureVector> weights;  // one per class
  std::vector<double> bias;            // one per class
  double c_reg = 1.0;
  std::uint64_t seed = 0;
  int epochs_run = 0;  // max over the per-class solvers

  // Per-class dual objective per epoch; in-memory diagnostics only.
  std::vector<std::vector<double>> objective_log;
};

// L2-regularized L1-hinge SVM trained by dual coordinate descent, one
// classifier per class. Deterministic given the seed. Stops when the
// relative dual-objective change drops below tol or at max_epochs.
// Throws DegenerateTrainingError with fewer than two classes.
LinearModel train_svm(const std::vector<FeatureVector>& xs, const std::vector<int>& ys,
                      int num_classes, double c_reg, std::uint64_t seed, int max_epochs = 1000,
                      double tol = 1e-4);

struct Prediction {
  int label = -1;
  std::vector<double> scores;
};

// Argmax of the per-class decision values; exact ties go to the lower class.
Prediction predict(const LinearModel& model, const FeatureVector& x);

struct EvalReport {
  double accuracy = 0.0;
  long long total = 0;
  long long correct = 0;
  std::vector<double> per_class_accuracy;
  std::vector<std::vector<long long>> confusion;  // [true][predicted]
};

EvalReport evaluate(const LinearModel& model, const std::vector<FeatureVector>& xs,
                    const std::vector<int>& ys);

}  // namespace botmine
