#pragma once

#include <cstdint>

#include "botmine/detector.hpp"
#include "botmine/hog.hpp"

namespace botmine {

// End-to-end pipeline settings. Defaults: 64x64 patches at stride 8 on
// width-500 crops, neighborhoods of 20, top 6 locations per neighborhood,
// 300 triplets per class, eta_o 0.5 / eta_s 1.
struct PipelineConfig {
  int patch_side = 64;
  int stride = 8;
  int target_width = 500;
  int canonical_side = 256;   // shared frame for neighborhood stacks and detection
  int descriptor_side = 128;  // whole-image descriptor frame
  int neighborhood_size = 20;
  int top_locations = 6;
  int triplets_per_class = 300;
  int k_top = 5;
  double eta_o = 0.5;
  double eta_s = 1.0;
  double overlap_max = 0.25;
  int top_m = 0;  // 0: min(50, eval images / 4), at least 1
  double svm_c = 1.0;
  std::uint64_t rng_seed = 0;
  // 0 disables subsampling: neighborhoods search the full training set and
  // entropy scores run over all classes. Positive values follow the
  // large-dataset recipe: the positive class plus that many random others.
  int negative_class_subsample = 0;
  int entropy_negative_classes = 0;
  int seeds_per_class = 0;     // 0: every training image seeds a neighborhood
  double lambda_scale = 0.01;  // covariance ridge = scale * trace(sigma) / dim
  double dmap_eps = 1e-6;
  double degeneracy_eps = 1e-6;
  HogConfig hog;

  GeometryConfig geometry() const { return {eta_o, eta_s, degeneracy_eps}; }
  PatchConfig patch() const { return {patch_side, stride}; }

  // Throws ConfigError on out-of-range values.
  void validate() const;
};

}  // namespace botmine
