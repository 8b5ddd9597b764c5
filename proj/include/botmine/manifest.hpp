#pragma once

#include <array>
#include <string>
#include <vector>

#include "botmine/image.hpp"

namespace botmine {

// One dataset image: path, class label, bounding box, and (for localization
// benchmarks) annotated landmark centers. The first `stable_landmarks`
// entries of `landmarks` correspond across images of a class; the rest are
// per-image distractors.
struct ManifestEntry {
  std::string path;
  std::string label;
  Rect bbox;
  std::vector<std::array<double, 2>> landmarks;
  int stable_landmarks = 0;
  std::string split;  // optional "train" / "test" tag

  bool operator==(const ManifestEntry&) const = default;
};

// JSON-lines manifest. Relative image paths are resolved against the
// manifest's directory. Throws DataError on malformed lines.
std::vector<ManifestEntry> load_manifest(const std::string& path);

void save_manifest(const std::string& path, const std::vector<ManifestEntry>& entries);

// Canonical one-line JSON form (used by save_manifest).
std::string manifest_line(const ManifestEntry& entry);
ManifestEntry parse_manifest_line(const std::string& line);

}  // namespace botmine
