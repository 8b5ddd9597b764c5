#include "botmine/manifest.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>

namespace botmine {

using nlohmann::json;

std::string manifest_line(const ManifestEntry& entry) {
  json j;
  j["path"] = entry.path;
  j["label"] = entry.label;
  j["bbox"] = {entry.bbox.x, entry.bbox.y, entry.bbox.w, entry.bbox.h};
  if (!entry.landmarks.empty()) {
    json lm = json::array();
    for (const auto& p : entry.landmarks) lm.push_back({p[0], p[1]});
    j["landmarks"] = lm;
    j["stable"] = entry.stable_landmarks;
  }
  if (!entry.split.empty()) j["split"] = entry.split;
  return j.dump();
}

ManifestEntry parse_manifest_line(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("manifest: bad JSON line: ") + e.what());
  }
  ManifestEntry entry;
  try {
    entry.path = j.at("path").get<std::string>();
    entry.label = j.at("label").get<std::string>();
    const auto& bb = j.at("bbox");
    if (!bb.is_array() || bb.size() != 4) throw DataError("manifest: bbox must be [x,y,w,h]");
    entry.bbox = {bb[0].get<int>(), bb[1].get<int>(), bb[2].get<int>(), bb[3].get<int>()};
    if (j.contains("landmarks")) {
      for (const auto& p : j["landmarks"]) {
        entry.landmarks.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
      }
    }
    entry.stable_landmarks = j.value("stable", 0);
    entry.split = j.value("split", std::string());
  } catch (const json::exception& e) {
    throw DataError(std::string("manifest: missing or mistyped field: ") + e.what());
  }
  if (entry.label.empty()) throw DataError("manifest: empty label for " + entry.path);
  if (entry.bbox.w <= 0 || entry.bbox.h <= 0) {
    throw DataError("manifest: bbox of " + entry.path + " has non-positive area");
  }
  if (entry.stable_landmarks < 0 ||
      entry.stable_landmarks > static_cast<int>(entry.landmarks.size())) {
    throw DataError("manifest: stable landmark count out of range for " + entry.path);
  }
  return entry;
}

std::vector<ManifestEntry> load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("manifest: cannot open " + path);
  const std::filesystem::path dir = std::filesystem::path(path).parent_path();

  std::vector<ManifestEntry> entries;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      ManifestEntry entry = parse_manifest_line(line);
      if (!entry.path.empty() && std::filesystem::path(entry.path).is_relative()) {
        entry.path = (dir / entry.path).string();
      }
      entries.push_back(std::move(entry));
    } catch (const DataError& e) {
      throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return entries;
}

void save_manifest(const std::string& path, const std::vector<ManifestEntry>& entries) {
  std::ofstream out(path);
  if (!out) throw DataError("manifest: cannot write " + path);
  for (const auto& entry : entries) out << manifest_line(entry) << '\n';
}

}  // namespace botmine
