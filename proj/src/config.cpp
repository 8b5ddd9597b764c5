#include "botmine/config.hpp"

#include <string>

namespace botmine {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("config: " + what);
}

}  // namespace

void PipelineConfig::validate() const {
  require(patch_side >= 16, "patch_side must be >= 16");
  require(stride >= 1, "stride must be >= 1");
  require(stride % hog.cell_size == 0, "stride must be a multiple of the HOG cell size");
  require(patch_side % hog.cell_size == 0, "patch_side must be a multiple of the HOG cell size");
  require(target_width >= 64, "target_width must be >= 64");
  require(canonical_side >= patch_side, "canonical_side must cover at least one patch");
  require(canonical_side % hog.cell_size == 0,
          "canonical_side must be a multiple of the HOG cell size");
  require(descriptor_side >= 2 * hog.cell_size, "descriptor_side too small for HOG");
  require(neighborhood_size >= 1, "neighborhood_size must be >= 1");
  require(top_locations >= 3, "top_locations must be >= 3");
  require(triplets_per_class >= 1, "triplets_per_class must be >= 1");
  require(k_top >= 1, "k_top must be >= 1");
  require(eta_o >= 0.0 && eta_o <= 1.0, "eta_o must be in [0, 1]");
  require(eta_s >= 0.0 && eta_s <= 1.0, "eta_s must be in [0, 1]");
  require(overlap_max >= 0.0 && overlap_max <= 1.0, "overlap_max must be in [0, 1]");
  require(top_m >= 0, "top_m must be >= 0");
  require(svm_c > 0.0, "svm_c must be > 0");
  require(negative_class_subsample >= 0, "negative_class_subsample must be >= 0");
  require(entropy_negative_classes >= 0, "entropy_negative_classes must be >= 0");
  require(seeds_per_class >= 0, "seeds_per_class must be >= 0");
  require(lambda_scale > 0.0, "lambda_scale must be > 0");
  require(dmap_eps > 0.0, "dmap_eps must be > 0");
  require(degeneracy_eps > 0.0, "degeneracy_eps must be > 0");
  require(hog.cell_size >= 2, "HOG cell size must be >= 2");
  require(hog.bins >= 2, "HOG needs at least 2 orientation bins");
  require(hog.block_cells >= 1, "HOG block must span at least 1 cell");
  require(patch_side / hog.cell_size >= hog.block_cells, "patch smaller than one HOG block");
}

}  // namespace botmine
