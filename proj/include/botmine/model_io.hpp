#pragma once

#include <optional>
#include <string>
#include <vector>

#include "botmine/classify.hpp"
#include "botmine/config.hpp"

namespace botmine {

// Everything a trained pipeline needs at inference time. Serialized as a
// versioned binary container: a JSON header describing the structure plus
// raw little-endian float64 arrays for the bulk data. Round-trips bit-exactly.
struct Model {
  static constexpr std::uint32_t kFormatVersion = 1;

  PipelineConfig config;
  std::vector<std::string> class_names;  // index == class label id
  BackgroundStats stats;
  std::vector<MinedTriplet> triplets;  // grouped by ascending class label
  std::optional<LinearModel> classifier;
};

void save_model(const std::string& path, const Model& model);

// Throws DataError on bad magic, a mismatched format version, or truncation.
Model load_model(const std::string& path);

}  // namespace botmine
