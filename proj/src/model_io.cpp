#include "botmine/model_io.hpp"

#include <json.hpp>

#include <bit>
#include <cstring>
#include <fstream>

namespace botmine {

static_assert(std::endian::native == std::endian::little,
              "model files are little-endian; big-endian hosts are not supported");

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'B', 'O', 'T', 'M', 'O', 'D', 'E', 'L'};

json hog_to_json(const HogConfig& h) {
  json j;
  j["cell_size"] = h.cell_size;
  j["bins"] = h.bins;
  j["block_cells"] = h.block_cells;
  j["normalize_eps"] = h.normalize_eps;
  j["clip"] = h.clip;
  return j;
}

HogConfig hog_from_json(const json& j) {
  HogConfig h;
  h.cell_size = j.at("cell_size").get<int>();
  h.bins = j.at("bins").get<int>();
  h.block_cells = j.at("block_cells").get<int>();
  h.normalize_eps = j.at("normalize_eps").get<double>();
  h.clip = j.at("clip").get<double>();
  return h;
}

json config_to_json(const PipelineConfig& c) {
  json j;
  j["patch_side"] = c.patch_side;
  j["stride"] = c.stride;
  j["target_width"] = c.target_width;
  j["canonical_side"] = c.canonical_side;
  j["descriptor_side"] = c.descriptor_side;
  j["neighborhood_size"] = c.neighborhood_size;
  j["top_locations"] = c.top_locations;
  j["triplets_per_class"] = c.triplets_per_class;
  j["k_top"] = c.k_top;
  j["eta_o"] = c.eta_o;
  j["eta_s"] = c.eta_s;
  j["overlap_max"] = c.overlap_max;
  j["top_m"] = c.top_m;
  j["svm_c"] = c.svm_c;
  j["rng_seed"] = c.rng_seed;
  j["negative_class_subsample"] = c.negative_class_subsample;
  j["entropy_negative_classes"] = c.entropy_negative_classes;
  j["seeds_per_class"] = c.seeds_per_class;
  j["lambda_scale"] = c.lambda_scale;
  j["dmap_eps"] = c.dmap_eps;
  j["degeneracy_eps"] = c.degeneracy_eps;
  j["hog"] = hog_to_json(c.hog);
  return j;
}

PipelineConfig config_from_json(const json& j) {
  PipelineConfig c;
  c.patch_side = j.at("patch_side").get<int>();
  c.stride = j.at("stride").get<int>();
  c.target_width = j.at("target_width").get<int>();
  c.canonical_side = j.at("canonical_side").get<int>();
  c.descriptor_side = j.at("descriptor_side").get<int>();
  c.neighborhood_size = j.at("neighborhood_size").get<int>();
  c.top_locations = j.at("top_locations").get<int>();
  c.triplets_per_class = j.at("triplets_per_class").get<int>();
  c.k_top = j.at("k_top").get<int>();
  c.eta_o = j.at("eta_o").get<double>();
  c.eta_s = j.at("eta_s").get<double>();
  c.overlap_max = j.at("overlap_max").get<double>();
  c.top_m = j.at("top_m").get<int>();
  c.svm_c = j.at("svm_c").get<double>();
  c.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  c.negative_class_subsample = j.at("negative_class_subsample").get<int>();
  c.entropy_negative_classes = j.at("entropy_negative_classes").get<int>();
  c.seeds_per_class = j.at("seeds_per_class").get<int>();
  c.lambda_scale = j.at("lambda_scale").get<double>();
  c.dmap_eps = j.at("dmap_eps").get<double>();
  c.degeneracy_eps = j.at("degeneracy_eps").get<double>();
  c.hog = hog_from_json(j.at("hog"));
  return c;
}

void append_doubles(std::string* out, const double* data, size_t n) {
  const size_t old = out->size();
  out->resize(old + n * sizeof(double));
  std::memcpy(out->data() + old, data, n * sizeof(double));
}

class Reader {
 public:
  Reader(const std::string& buf, size_t offset) : buf_(buf), pos_(offset) {}

  void read_doubles(double* dst, size_t n) {
    if (pos_ + n * sizeof(double) > buf_.size()) {
      throw DataError("model file truncated");
    }
    std::memcpy(dst, buf_.data() + pos_, n * sizeof(double));
    pos_ += n * sizeof(double);
  }

  FeatureVector read_vector(size_t n) {
    FeatureVector v(n);
    read_doubles(v.data(), n);
    return v;
  }

  size_t pos() const { return pos_; }

 private:
  const std::string& buf_;
  size_t pos_;
};

}  // namespace

void save_model(const std::string& path, const Model& model) {
  const int stats_dim = model.stats.dim();
  const int weight_dim =
      model.triplets.empty() ? 0 : static_cast<int>(model.triplets.front().detector.weights[0].size());

  json header;
  header["version"] = Model::kFormatVersion;
  header["config"] = config_to_json(model.config);
  header["class_names"] = model.class_names;
  header["stats"] = {{"dim", stats_dim},
                     {"lambda", model.stats.lambda},
                     {"samples", model.stats.sample_count}};
  header["weight_dim"] = weight_dim;

  json triplets = json::array();
  for (const auto& t : model.triplets) {
    json jt;
    jt["class"] = t.detector.class_label;
    jt["entropy"] = t.entropy;
    jt["mean"] = t.mean_top_score;
    jt["id"] = t.candidate_id;
    jt["geometry"] = {{"eta_o", t.detector.geometry.eta_o},
                      {"eta_s", t.detector.geometry.eta_s},
                      {"eps", t.detector.geometry.degeneracy_eps}};
    jt["signature"] = {{"order", t.detector.signature.order},
                       {"cos",
                        {t.detector.signature.angles.cos_a, t.detector.signature.angles.cos_b,
                         t.detector.signature.angles.cos_c}}};
    json locs = json::array();
    for (const auto& l : t.locations) locs.push_back({l.x, l.y, l.side});
    jt["locations"] = locs;
    triplets.push_back(std::move(jt));
  }
  header["triplets"] = std::move(triplets);

  json jc;
  jc["present"] = model.classifier.has_value();
  if (model.classifier) {
    jc["classes"] = model.classifier->num_classes;
    jc["dim"] = model.classifier->dim;
    jc["c"] = model.classifier->c_reg;
    jc["seed"] = model.classifier->seed;
    jc["epochs"] = model.classifier->epochs_run;
  }
  header["classifier"] = std::move(jc);

  const std::string header_bytes = header.dump();

  std::string buf;
  buf.append(kMagic, sizeof(kMagic));
  const std::uint32_t version = Model::kFormatVersion;
  const std::uint64_t hlen = header_bytes.size();
  buf.append(reinterpret_cast<const char*>(&version), sizeof(version));
  buf.append(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
  buf += header_bytes;

  append_doubles(&buf, model.stats.mu.data(), stats_dim);
  // Eigen stores column-major; write row-major for a well-defined layout.
  std::vector<double> row(stats_dim);
  for (int r = 0; r < stats_dim; ++r) {
    for (int c = 0; c < stats_dim; ++c) row[c] = model.stats.sigma(r, c);
    append_doubles(&buf, row.data(), row.size());
  }
  for (const auto& t : model.triplets) {
    for (const auto& w : t.detector.weights) {
      if (static_cast<int>(w.size()) != weight_dim) {
        throw ShapeMismatchError("save_model: inconsistent detector weight dims");
      }
      append_doubles(&buf, w.data(), w.size());
    }
  }
  if (model.classifier) {
    for (const auto& w : model.classifier->weights) {
      append_doubles(&buf, w.data(), w.size());
    }
    append_doubles(&buf, model.classifier->bias.data(), model.classifier->bias.size());
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("save_model: cannot write " + path);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw DataError("save_model: short write to " + path);
}

Model load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("load_model: cannot open " + path);
  std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (buf.size() < sizeof(kMagic) + sizeof(std::uint32_t) + sizeof(std::uint64_t) ||
      std::memcmp(buf.data(), kMagic, sizeof(kMagic)) != 0) {
    throw DataError("load_model: " + path + " is not a model file");
  }
  std::uint32_t version = 0;
  std::uint64_t hlen = 0;
  std::memcpy(&version, buf.data() + sizeof(kMagic), sizeof(version));
  std::memcpy(&hlen, buf.data() + sizeof(kMagic) + sizeof(version), sizeof(hlen));
  if (version != Model::kFormatVersion) {
    throw DataError("load_model: format version " + std::to_string(version) +
                    " is not supported (expected " + std::to_string(Model::kFormatVersion) + ")");
  }
  const size_t header_start = sizeof(kMagic) + sizeof(version) + sizeof(hlen);
  if (header_start + hlen > buf.size()) throw DataError("load_model: truncated header");

  json header;
  try {
    header = json::parse(buf.substr(header_start, hlen));
  } catch (const json::parse_error& e) {
    throw DataError(std::string("load_model: bad header: ") + e.what());
  }

  Model model;
  try {
    model.config = config_from_json(header.at("config"));
    model.class_names = header.at("class_names").get<std::vector<std::string>>();

    const int stats_dim = header.at("stats").at("dim").get<int>();
    const int weight_dim = header.at("weight_dim").get<int>();

    Reader reader(buf, header_start + hlen);
    model.stats.mu.resize(stats_dim);
    reader.read_doubles(model.stats.mu.data(), stats_dim);
    model.stats.sigma.resize(stats_dim, stats_dim);
    for (int r = 0; r < stats_dim; ++r) {
      FeatureVector row = reader.read_vector(stats_dim);
      for (int c = 0; c < stats_dim; ++c) model.stats.sigma(r, c) = row[c];
    }
    model.stats.lambda = header.at("stats").at("lambda").get<double>();
    model.stats.sample_count = header.at("stats").at("samples").get<long long>();

    for (const auto& jt : header.at("triplets")) {
      MinedTriplet t;
      t.detector.class_label = jt.at("class").get<int>();
      t.entropy = jt.at("entropy").get<double>();
      t.mean_top_score = jt.at("mean").get<double>();
      t.candidate_id = jt.at("id").get<int>();
      t.detector.geometry.eta_o = jt.at("geometry").at("eta_o").get<double>();
      t.detector.geometry.eta_s = jt.at("geometry").at("eta_s").get<double>();
      t.detector.geometry.degeneracy_eps = jt.at("geometry").at("eps").get<double>();
      t.detector.signature.order = jt.at("signature").at("order").get<int>();
      const auto& cos = jt.at("signature").at("cos");
      t.detector.signature.angles = {cos.at(0).get<double>(), cos.at(1).get<double>(),
                                     cos.at(2).get<double>()};
      const auto& locs = jt.at("locations");
      for (int r = 0; r < 3; ++r) {
        t.locations[r] = {locs.at(r).at(0).get<int>(), locs.at(r).at(1).get<int>(),
                          locs.at(r).at(2).get<int>()};
        t.detector.weights[r] = reader.read_vector(weight_dim);
      }
      model.triplets.push_back(std::move(t));
    }

    const auto& jc = header.at("classifier");
    if (jc.at("present").get<bool>()) {
      LinearModel lm;
      lm.num_classes = jc.at("classes").get<int>();
      lm.dim = jc.at("dim").get<int>();
      lm.c_reg = jc.at("c").get<double>();
      lm.seed = jc.at("seed").get<std::uint64_t>();
      lm.epochs_run = jc.at("epochs").get<int>();
      for (int c = 0; c < lm.num_classes; ++c) {
        lm.weights.push_back(reader.read_vector(lm.dim));
      }
      lm.bias = reader.read_vector(lm.num_classes);
      model.classifier = std::move(lm);
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("load_model: malformed header: ") + e.what());
  }
  return model;
}

}  // namespace botmine
