#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "botmine/geometry.hpp"
#include "botmine/hog.hpp"
#include "botmine/image.hpp"

namespace botmine {

// Sliding-window lattice shared by scoring, mining and detection.
struct PatchConfig {
  int patch_side = 64;
  int stride = 8;
};

// Dataset-wide patch statistics backing the whitened appearance models.
// sigma already contains the ridge (lambda * I), recorded in lambda.
struct BackgroundStats {
  Eigen::VectorXd mu;
  Eigen::MatrixXd sigma;
  double lambda = 0.0;
  long long sample_count = 0;

  int dim() const { return static_cast<int>(mu.size()); }
};

// One-pass mean/covariance accumulator. Partial accumulators over disjoint
// chunks merge associatively (Chan's update), so a fixed chunk partition
// yields bit-identical results for any thread count.
class BackgroundAccumulator {
 public:
  explicit BackgroundAccumulator(int dim);

  void add(const double* x);
  void add(const FeatureVector& x) { add(x.data()); }
  // Rows of x are patches; batched so the centered product runs as a GEMM.
  void add_batch(const Eigen::MatrixXd& x);
  void merge(const BackgroundAccumulator& other);

  long long count() const { return n_; }
  int dim() const { return static_cast<int>(mean_.size()); }

  // Population covariance plus lambda * I. Throws InsufficientDataError
  // when fewer than two patches were seen.
  BackgroundStats finalize(double lambda) const;

 private:
  long long n_ = 0;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd m2_;  // sum of centered outer products
};

BackgroundStats fit_background(const std::vector<FeatureVector>& patches, double lambda);

// Whitening solver; factors sigma once and reuses the factor per template.
class LdaSolver {
 public:
  explicit LdaSolver(const BackgroundStats& stats);

  // w with sigma * w = tmpl - mu.
  FeatureVector weights(const FeatureVector& tmpl) const;

 private:
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd mu_;
};

FeatureVector lda_weights(const FeatureVector& tmpl, const BackgroundStats& stats);

struct ScoreMap {
  int cols = 0;
  int rows = 0;
  int patch_side = 0;
  int stride = 0;
  std::vector<double> scores;  // [row][col]

  double at(int col, int row) const { return scores[static_cast<size_t>(row) * cols + col]; }
  PatchLocation location(int col, int row) const {
    return {col * stride, row * stride, patch_side};
  }
};

// Dense w . feature map over the sliding-window lattice. The BlockGrid
// overload is the OpenMP kernel and requires stride to be a cell multiple;
// the reference overload extracts every window descriptor serially and is
// kept as the ground truth the kernel is tested against.
ScoreMap score_grid(const BlockGrid& grid, const FeatureVector& w, const PatchConfig& pc);
ScoreMap score_grid(const GrayImage& img, const FeatureVector& w, const PatchConfig& pc,
                    const HogConfig& hc);
ScoreMap score_grid_reference(const GrayImage& img, const FeatureVector& w, const PatchConfig& pc,
                              const HogConfig& hc);

struct Detection {
  PatchLocation loc;
  double score = 0.0;
};

// Greedy descending-score selection with pairwise IoU at most overlap_max.
// Ties resolve by (y, x) ascending. May return fewer than k detections.
std::vector<Detection> top_k_nms(const ScoreMap& map, int k, double overlap_max);

// Appearance models for roles A/B/C plus the reference arrangement.
struct TripletDetector {
  std::array<FeatureVector, 3> weights;
  TriangleSignature signature;
  int class_label = -1;
  GeometryConfig geometry;
};

struct TripletDetection {
  std::array<PatchLocation, 3> locations{};
  std::array<double, 3> appearance{};
  double order_pen = 1.0;
  double shape_pen = 1.0;
  double total = 0.0;
  bool valid = false;
  bool mirrored = false;
};

// No-detection sentinel: valid == false and total == -infinity.
TripletDetection no_detection();

// Top-k per role, then argmax of the penalized sum over the k^3 role
// combinations. Combinations with patch overlap above overlap_max or with
// centers too close to form a triangle are skipped.
TripletDetection detect_on_grid(const BlockGrid& grid, const TripletDetector& det, int k,
                                const PatchConfig& pc, double overlap_max);
TripletDetection detect_triplet(const GrayImage& img, const TripletDetector& det, int k,
                                const PatchConfig& pc, const HogConfig& hc, double overlap_max);

// Larger of the detections on the image and on its mirror; ties keep the
// unmirrored result. Locations of a mirrored win are in mirrored coordinates.
TripletDetection detect_on_grid_pair(const BlockGrid& grid, const BlockGrid& mirrored,
                                     const TripletDetector& det, int k, const PatchConfig& pc,
                                     double overlap_max);
TripletDetection detect_with_mirror(const GrayImage& img, const TripletDetector& det, int k,
                                    const PatchConfig& pc, const HogConfig& hc,
                                    double overlap_max);

}  // namespace botmine
