#pragma once

#include <optional>
#include <vector>

#include "botmine/detector.hpp"

namespace botmine {

// A seed training image and its nearest neighbors by whole-image descriptor.
struct Neighborhood {
  int seed = -1;
  std::vector<int> members;  // seed first, then ascending (distance, id)
};

// Seed plus its size-1 nearest neighbors by Euclidean distance over the
// descriptor index. Deterministic distance-then-id tie-break.
Neighborhood build_neighborhood(int seed, const std::vector<FeatureVector>& descriptors,
                                int size);

// Grid of between-class / in-class variation ratios over patch locations.
struct DiscriminativeMap {
  int cols = 0;
  int rows = 0;
  int patch_side = 0;
  int stride = 0;
  std::vector<double> d;

  double at(int col, int row) const { return d[static_cast<size_t>(row) * cols + col]; }
  PatchLocation location(int col, int row) const {
    return {col * stride, row * stride, patch_side};
  }
  ScoreMap as_score_map() const { return {cols, rows, patch_side, stride, d}; }
};

// Members of one neighborhood, aligned on a shared canonical frame.
struct NeighborhoodView {
  int seed_id = -1;
  int seed_label = -1;
  std::vector<int> member_labels;
  std::vector<const BlockGrid*> member_grids;
};

// Per-location variation ratio across the stack of aligned members. The
// denominator is guarded by eps. OpenMP-parallel over locations; the
// reference implementation below is the plain serial evaluation.
DiscriminativeMap discriminative_map(const NeighborhoodView& nbhd, const PatchConfig& pc,
                                     double eps);
DiscriminativeMap discriminative_map_reference(const NeighborhoodView& nbhd,
                                               const PatchConfig& pc, double eps);

struct CandidateTriplet {
  int source_neighborhood = -1;  // seed image id
  int class_label = -1;
  std::array<PatchLocation, 3> locations;  // descending discriminative score
  std::array<FeatureVector, 3> templates;  // positives averaged per location
  TriangleSignature signature;             // from the three centers
};

// NMS-filtered top locations, positive-sample templates, and all three-way
// combinations in canonical order. Degenerate (collinear) combinations are
// dropped. Returns an empty list when fewer than three locations survive.
std::vector<CandidateTriplet> propose_candidates(const NeighborhoodView& nbhd,
                                                 const DiscriminativeMap& dmap, int top_n,
                                                 double overlap_max, const GeometryConfig& geo);

// Shannon entropy (natural log) of a count histogram.
double shannon_entropy(const std::vector<long long>& counts);

struct EntropyScore {
  double entropy = 0.0;
  double mean_top_score = 0.0;
  int detections = 0;  // images with a valid detection
};

// Mirrored grids of one evaluation image.
struct GridPair {
  BlockGrid grid;
  BlockGrid mirrored;
};

// Runs the detector over every evaluation image, takes the top_m totals and
// returns the entropy of their class distribution plus the mean top score.
// Empty when no image yields a valid detection (degenerate detector).
std::optional<EntropyScore> entropy_score(const TripletDetector& det,
                                          const std::vector<GridPair>& eval_grids,
                                          const std::vector<int>& eval_labels, int top_m, int k,
                                          const PatchConfig& pc, double overlap_max);

struct MinedTriplet {
  TripletDetector detector;
  std::array<PatchLocation, 3> locations;  // template locations, canonical frame
  double entropy = 0.0;
  double mean_top_score = 0.0;
  int candidate_id = -1;  // stable id for deterministic ordering
};

// Per class: ascending entropy, ties by descending mean top score, then by
// candidate id; keeps at most per_class each (all of an undersized pool).
// Output is grouped by ascending class label.
std::vector<MinedTriplet> select_triplets(std::vector<MinedTriplet> scored, int per_class);

}  // namespace botmine
