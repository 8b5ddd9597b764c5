#include "botmine/pipeline.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <set>
#include <tuple>

#include "botmine/image_io.hpp"
#include "botmine/rng.hpp"

namespace botmine {

namespace {

class StageTimer {
 public:
  explicit StageTimer(std::string name)
      : name_(std::move(name)), start_(std::chrono::steady_clock::now()) {}
  ~StageTimer() {
    const auto end = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(end - start_).count();
    std::fprintf(stderr, "[botmine] %-28s %7.2f s\n", name_.c_str(), s);
  }

 private:
  std::string name_;
  std::chrono::steady_clock::time_point start_;
};

std::vector<std::string> sorted_labels(const std::vector<ManifestEntry>& entries) {
  std::set<std::string> labels;
  for (const auto& e : entries) labels.insert(e.label);
  return {labels.begin(), labels.end()};
}

int label_id(const std::vector<std::string>& table, const std::string& label) {
  const auto it = std::lower_bound(table.begin(), table.end(), label);
  if (it == table.end() || *it != label) return -1;
  return static_cast<int>(it - table.begin());
}

}  // namespace

Dataset prepare_dataset(const std::vector<ManifestEntry>& entries, const PipelineConfig& cfg,
                        const std::vector<std::string>* label_table) {
  StageTimer timer("prepare dataset");
  cfg.validate();

  Dataset ds;
  ds.class_names = label_table ? *label_table : sorted_labels(entries);

  const int n = static_cast<int>(entries.size());
  std::vector<char> ok(n, 0);
  std::vector<GrayImage> canonical(n);
  std::vector<FeatureVector> descs(n);
  std::vector<GridPair> grids(n);
  std::vector<std::string> failures(n);

#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    try {
      const GrayImage raw = read_image(entries[i].path);
      const GrayImage pre = preprocess(raw, entries[i].bbox, cfg.target_width);
      canonical[i] = resize_bilinear(pre, cfg.canonical_side, cfg.canonical_side);
      descs[i] = whole_image_descriptor(pre, cfg.hog, cfg.descriptor_side);
      grids[i].grid = build_block_grid(canonical[i], cfg.hog);
      grids[i].mirrored = build_block_grid(mirror(canonical[i]), cfg.hog);
      ok[i] = 1;
    } catch (const DataError& e) {
      failures[i] = e.what();
    }
  }

  for (int i = 0; i < n; ++i) {
    if (!ok[i]) {
      std::cerr << "[botmine] skipping " << entries[i].path << ": " << failures[i] << "\n";
      continue;
    }
    ds.entries.push_back(entries[i]);
    ds.labels.push_back(label_id(ds.class_names, entries[i].label));
    ds.canonical.push_back(std::move(canonical[i]));
    ds.global_descriptors.push_back(std::move(descs[i]));
    ds.grids.push_back(std::move(grids[i]));
    if (ds.labels.back() < 0 && label_table) {
      std::cerr << "[botmine] unknown label '" << entries[i].label << "' for "
                << entries[i].path << " (counted as error)\n";
    }
  }
  return ds;
}

BackgroundStats compute_background(const Dataset& ds, const PipelineConfig& cfg) {
  StageTimer timer("background statistics");
  if (ds.grids.empty()) throw InsufficientDataError("compute_background: no images");

  const PatchConfig pc = cfg.patch();
  const BlockGrid& g0 = ds.grids.front().grid;
  const int window_cells = pc.patch_side / g0.cell_size;
  const int step_cells = pc.stride / g0.cell_size;
  const int wb = window_cells - g0.block_cells + 1;
  const int dim = wb * wb * g0.block_dim;
  const int cols = (g0.image_width - pc.patch_side) / pc.stride + 1;
  const int rows = (g0.image_height - pc.patch_side) / pc.stride + 1;
  const int windows_per_image = cols * rows;

  // Fixed-size image groups keep the merge order (and hence the result)
  // independent of the thread count.
  const int group_size = 4;
  const int groups = (static_cast<int>(ds.grids.size()) + group_size - 1) / group_size;

  BackgroundAccumulator acc(dim);
#pragma omp parallel for ordered schedule(static, 1)
  for (int g = 0; g < groups; ++g) {
    const int begin = g * group_size;
    const int end = std::min<int>(begin + group_size, static_cast<int>(ds.grids.size()));

    Eigen::MatrixXd x(static_cast<long>(end - begin) * windows_per_image, dim);
    long r = 0;
    for (int i = begin; i < end; ++i) {
      for (int row = 0; row < rows; ++row) {
        for (int col = 0; col < cols; ++col) {
          const FeatureVector f =
              gather_window(ds.grids[i].grid, col * step_cells, row * step_cells, window_cells);
          x.row(r++) = Eigen::Map<const Eigen::VectorXd>(f.data(), dim);
        }
      }
    }
    BackgroundAccumulator part(dim);
    part.add_batch(x);
#pragma omp ordered
    acc.merge(part);
  }

  BackgroundStats stats = acc.finalize(0.0);
  const double lambda = cfg.lambda_scale * stats.sigma.trace() / stats.dim();
  stats.sigma.diagonal().array() += lambda;
  stats.lambda = lambda;
  return stats;
}

namespace {

// Neighborhood retrieval restricted to an allowed label set (the full set
// when subsampling is off).
Neighborhood restricted_neighborhood(const Dataset& ds, int seed, int size,
                                     const std::vector<char>& allowed) {
  std::vector<int> pool;  // dataset indices in the retrieval pool
  for (int i = 0; i < static_cast<int>(ds.labels.size()); ++i) {
    if (allowed[ds.labels[i]]) pool.push_back(i);
  }
  std::vector<FeatureVector> descs;
  descs.reserve(pool.size());
  int seed_pos = -1;
  for (size_t p = 0; p < pool.size(); ++p) {
    if (pool[p] == seed) seed_pos = static_cast<int>(p);
    descs.push_back(ds.global_descriptors[pool[p]]);
  }
  if (seed_pos < 0) throw ConfigError("neighborhood: seed not in retrieval pool");

  Neighborhood local =
      build_neighborhood(seed_pos, descs, std::min(size, static_cast<int>(descs.size())));
  Neighborhood out;
  out.seed = seed;
  for (int m : local.members) out.members.push_back(pool[m]);
  return out;
}

std::vector<char> allowed_classes(int num_classes, int positive, int extra, Rng* rng) {
  std::vector<char> allowed(num_classes, 0);
  if (extra <= 0 || extra >= num_classes - 1) {
    std::fill(allowed.begin(), allowed.end(), 1);
    return allowed;
  }
  allowed[positive] = 1;
  std::vector<int> others;
  for (int c = 0; c < num_classes; ++c) {
    if (c != positive) others.push_back(c);
  }
  for (int i = 0; i < extra; ++i) {
    const int j = i + static_cast<int>(rng->below(others.size() - i));
    std::swap(others[i], others[j]);
    allowed[others[i]] = 1;
  }
  return allowed;
}

}  // namespace

Model mine_pipeline(const std::vector<ManifestEntry>& train, const PipelineConfig& cfg) {
  cfg.validate();
  Dataset ds = prepare_dataset(train, cfg, nullptr);
  if (ds.num_classes() < 2) throw InsufficientDataError("mine: need at least 2 classes");
  if (ds.entries.size() < 2) throw InsufficientDataError("mine: need at least 2 readable images");

  Model model;
  model.config = cfg;
  model.class_names = ds.class_names;
  model.stats = compute_background(ds, cfg);

  const PatchConfig pc = cfg.patch();
  const GeometryConfig geo = cfg.geometry();

  // Seeds: every training image, or the first seeds_per_class per class.
  std::vector<int> seeds;
  {
    std::vector<int> taken(ds.num_classes(), 0);
    for (int i = 0; i < static_cast<int>(ds.labels.size()); ++i) {
      if (cfg.seeds_per_class > 0 && taken[ds.labels[i]] >= cfg.seeds_per_class) continue;
      ++taken[ds.labels[i]];
      seeds.push_back(i);
    }
  }

  // Neighborhoods, discriminative maps and candidate proposals per seed.
  std::vector<std::vector<CandidateTriplet>> per_seed(seeds.size());
  {
    StageTimer timer("candidate proposal");
#pragma omp parallel for schedule(dynamic)
    for (int s = 0; s < static_cast<int>(seeds.size()); ++s) {
      const int seed = seeds[s];
      Rng rng = Rng::substream(cfg.rng_seed, 0x4E1B00D5ULL + seed);
      const std::vector<char> allowed = allowed_classes(
          ds.num_classes(), ds.labels[seed], cfg.negative_class_subsample, &rng);
      const Neighborhood nbhd =
          restricted_neighborhood(ds, seed, cfg.neighborhood_size, allowed);

      NeighborhoodView view;
      view.seed_id = seed;
      view.seed_label = ds.labels[seed];
      for (int m : nbhd.members) {
        view.member_labels.push_back(ds.labels[m]);
        view.member_grids.push_back(&ds.grids[m].grid);
      }
      const DiscriminativeMap dmap = discriminative_map(view, pc, cfg.dmap_eps);
      per_seed[s] = propose_candidates(view, dmap, cfg.top_locations, cfg.overlap_max, geo);
      if (per_seed[s].empty()) {
        std::cerr << "[botmine] neighborhood of image " << seed
                  << " yielded no candidates; skipped\n";
      }
    }
  }

  // Flatten in seed order, then drop exact duplicates (same class and the
  // same three locations proposed by overlapping neighborhoods).
  std::vector<CandidateTriplet> candidates;
  {
    std::set<std::tuple<int, int, int, int, int, int, int>> seen;
    for (const auto& list : per_seed) {
      for (const auto& cand : list) {
        const auto key = std::make_tuple(cand.class_label, cand.locations[0].x,
                                         cand.locations[0].y, cand.locations[1].x,
                                         cand.locations[1].y, cand.locations[2].x,
                                         cand.locations[2].y);
        if (seen.insert(key).second) candidates.push_back(cand);
      }
    }
  }
  if (candidates.empty()) throw InsufficientDataError("mine: no candidate triplets proposed");
  std::cerr << "[botmine] " << candidates.size() << " unique candidates from " << seeds.size()
            << " neighborhoods\n";

  // Whitened appearance weights.
  std::vector<TripletDetector> detectors(candidates.size());
  {
    StageTimer timer("lda weights");
    const LdaSolver solver(model.stats);
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < static_cast<int>(candidates.size()); ++i) {
      TripletDetector det;
      for (int r = 0; r < 3; ++r) det.weights[r] = solver.weights(candidates[i].templates[r]);
      det.signature = candidates[i].signature;
      det.class_label = candidates[i].class_label;
      det.geometry = geo;
      detectors[i] = std::move(det);
    }
  }

  // Entropy over the top detections across the evaluation pool.
  std::vector<MinedTriplet> scored;
  {
    StageTimer timer("entropy scoring");
    const int default_top_m =
        std::max(1, std::min<int>(50, static_cast<int>(ds.entries.size()) / 4));
    const int top_m = cfg.top_m > 0 ? cfg.top_m : default_top_m;

    std::vector<char> valid(candidates.size(), 0);
    std::vector<EntropyScore> scores(candidates.size());
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < static_cast<int>(candidates.size()); ++i) {
      Rng rng = Rng::substream(cfg.rng_seed, 0xE7A0ULL + i);
      const std::vector<char> allowed = allowed_classes(
          ds.num_classes(), candidates[i].class_label, cfg.entropy_negative_classes, &rng);

      std::vector<GridPair> eval_grids;
      std::vector<int> eval_labels;
      bool subset = false;
      for (size_t img = 0; img < ds.grids.size(); ++img) {
        if (!allowed[ds.labels[img]]) {
          subset = true;
          continue;
        }
        eval_labels.push_back(ds.labels[img]);
      }
      std::optional<EntropyScore> s;
      if (!subset) {
        s = entropy_score(detectors[i], ds.grids, ds.labels, top_m, cfg.k_top, pc,
                          cfg.overlap_max);
      } else {
        eval_grids.clear();
        for (size_t img = 0; img < ds.grids.size(); ++img) {
          if (allowed[ds.labels[img]]) eval_grids.push_back(ds.grids[img]);
        }
        s = entropy_score(detectors[i], eval_grids, eval_labels, top_m, cfg.k_top, pc,
                          cfg.overlap_max);
      }
      if (s) {
        valid[i] = 1;
        scores[i] = *s;
      }
    }

    int discarded = 0;
    for (size_t i = 0; i < candidates.size(); ++i) {
      if (!valid[i]) {
        ++discarded;
        continue;
      }
      MinedTriplet t;
      t.detector = std::move(detectors[i]);
      t.locations = candidates[i].locations;
      t.entropy = scores[i].entropy;
      t.mean_top_score = scores[i].mean_top_score;
      t.candidate_id = static_cast<int>(i);
      scored.push_back(std::move(t));
    }
    if (discarded > 0) {
      std::cerr << "[botmine] discarded " << discarded << " degenerate candidates\n";
    }
  }
  if (scored.empty()) throw InsufficientDataError("mine: every candidate was degenerate");

  model.triplets = select_triplets(std::move(scored), cfg.triplets_per_class);
  std::cerr << "[botmine] selected " << model.triplets.size() << " triplets across "
            << ds.num_classes() << " classes\n";
  return model;
}

std::vector<FeatureVector> bot_batch(const Dataset& ds, const Model& model) {
  std::vector<FeatureVector> bots(ds.grids.size());
  const PatchConfig pc = model.config.patch();
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < static_cast<int>(ds.grids.size()); ++i) {
    bots[i] = bot_descriptor(ds.grids[i], model.triplets, model.config.k_top, pc,
                             model.config.overlap_max);
  }
  return bots;
}

void train_pipeline(const std::vector<ManifestEntry>& train, Model* model) {
  if (model->triplets.empty()) throw DataError("train: model has no mined triplets");
  Dataset ds = prepare_dataset(train, model->config, &model->class_names);
  for (int l : ds.labels) {
    if (l < 0) throw DataError("train: training split contains labels unknown to the model");
  }

  std::vector<FeatureVector> bots;
  {
    StageTimer timer("bag-of-triplets (train)");
    bots = bot_batch(ds, *model);
  }
  {
    StageTimer timer("svm training");
    model->classifier = train_svm(bots, ds.labels, static_cast<int>(model->class_names.size()),
                                  model->config.svm_c, model->config.rng_seed);
  }
}

EvalReport eval_pipeline(const std::vector<ManifestEntry>& test, const Model& model,
                         const std::string& out_dir) {
  if (!model.classifier) throw DataError("eval: model has no trained classifier");
  Dataset ds = prepare_dataset(test, model.config, &model.class_names);

  std::vector<FeatureVector> bots;
  {
    StageTimer timer("bag-of-triplets (eval)");
    bots = bot_batch(ds, model);
  }
  const EvalReport report = evaluate(*model.classifier, bots, ds.labels);

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    std::ofstream csv(std::filesystem::path(out_dir) / "confusion.csv");
    csv << "true\\pred";
    for (const auto& name : model.class_names) csv << ',' << name;
    csv << '\n';
    for (size_t r = 0; r < report.confusion.size(); ++r) {
      csv << model.class_names[r];
      for (long long v : report.confusion[r]) csv << ',' << v;
      csv << '\n';
    }
  }
  return report;
}

LocalizationResult bench_localize(const std::vector<ManifestEntry>& entries,
                                  const PipelineConfig& cfg, int num_pairs, int triplets_per_pair,
                                  std::uint64_t seed) {
  cfg.validate();
  if (num_pairs < 1 || triplets_per_pair < 1) {
    throw ConfigError("bench-localize: pairs and triplets per pair must be >= 1");
  }
  Dataset ds = prepare_dataset(entries, cfg, nullptr);

  // Landmarks mapped through crop + width resize + canonical resample.
  std::vector<std::vector<Point>> landmarks(ds.entries.size());
  std::vector<int> stable(ds.entries.size(), 0);
  for (size_t i = 0; i < ds.entries.size(); ++i) {
    const ManifestEntry& e = ds.entries[i];
    if (e.landmarks.empty()) continue;
    const double wscale = static_cast<double>(cfg.target_width) / e.bbox.w;
    const int pre_h = static_cast<int>(std::lround(e.bbox.h * wscale));
    const double cx = static_cast<double>(cfg.canonical_side) / cfg.target_width * wscale;
    const double cy = static_cast<double>(cfg.canonical_side) / pre_h * wscale;
    for (const auto& p : e.landmarks) {
      landmarks[i].push_back({(p[0] - e.bbox.x) * cx, (p[1] - e.bbox.y) * cy});
    }
    stable[i] = e.stable_landmarks;
  }

  // Classes with at least two annotated images.
  std::vector<std::vector<int>> by_class(ds.num_classes());
  for (size_t i = 0; i < ds.entries.size(); ++i) {
    if (!landmarks[i].empty() && stable[i] >= 3) by_class[ds.labels[i]].push_back(i);
  }
  std::vector<int> usable;
  for (int c = 0; c < ds.num_classes(); ++c) {
    if (by_class[c].size() >= 2) usable.push_back(c);
  }
  if (usable.empty()) {
    throw InsufficientDataError("bench-localize: no class has two annotated images");
  }

  const BackgroundStats stats = compute_background(ds, cfg);
  const LdaSolver solver(stats);
  const PatchConfig pc = cfg.patch();
  const int side = pc.patch_side;

  const auto patch_at = [&](const Point& p) {
    const int half = side / 2;
    const int x = std::clamp(static_cast<int>(std::lround(p.x)) - half, 0,
                             cfg.canonical_side - side);
    const int y = std::clamp(static_cast<int>(std::lround(p.y)) - half, 0,
                             cfg.canonical_side - side);
    return PatchLocation{x, y, side};
  };

  // Mode weights: appearance, order, shape, combined.
  const std::array<GeometryConfig, 4> modes = {
      GeometryConfig{0.0, 0.0, cfg.degeneracy_eps},
      GeometryConfig{cfg.eta_o, 0.0, cfg.degeneracy_eps},
      GeometryConfig{0.0, cfg.eta_s, cfg.degeneracy_eps},
      GeometryConfig{cfg.eta_o, cfg.eta_s, cfg.degeneracy_eps},
  };

  std::array<long long, 4> correct{};
  long long trials = 0;

  StageTimer timer("localization benchmark");
#pragma omp parallel for schedule(dynamic) reduction(+ : trials)
  for (int pair = 0; pair < num_pairs; ++pair) {
    Rng rng = Rng::substream(seed, 0x10CA112EULL + pair);
    const int cls = usable[rng.below(usable.size())];
    const auto& members = by_class[cls];
    const int a = members[rng.below(members.size())];
    int b = a;
    while (b == a) b = members[rng.below(members.size())];

    const auto& lm1 = landmarks[a];
    const auto& lm2 = landmarks[b];
    const int pool1 = static_cast<int>(lm1.size());
    const int pool2 = static_cast<int>(lm2.size());
    const int n_stable = std::min(stable[a], stable[b]);

    // One-shot whitened detectors for every image-1 landmark patch.
    std::vector<FeatureVector> w1(pool1);
    for (int i = 0; i < pool1; ++i) {
      w1[i] = solver.weights(extract_hog(ds.canonical[a], patch_at(lm1[i]), cfg.hog));
    }
    // Appearance scores of every (image-1 landmark, image-2 landmark) pair.
    std::vector<FeatureVector> feats2(pool2);
    std::vector<PatchLocation> locs2(pool2);
    for (int j = 0; j < pool2; ++j) {
      locs2[j] = patch_at(lm2[j]);
      feats2[j] = extract_hog(ds.canonical[b], locs2[j], cfg.hog);
    }
    Eigen::MatrixXd scores(pool1, pool2);
    for (int i = 0; i < pool1; ++i) {
      for (int j = 0; j < pool2; ++j) {
        scores(i, j) = std::inner_product(feats2[j].begin(), feats2[j].end(), w1[i].begin(), 0.0);
      }
    }

    // Candidate-combination geometry, shared by all triplets of this pair.
    const auto c2 = [&](int j) { return Point{lm2[j].x, lm2[j].y}; };
    std::vector<int8_t> sign2(static_cast<size_t>(pool2) * pool2 * pool2);
    std::vector<TriangleAngles> ang2(static_cast<size_t>(pool2) * pool2 * pool2);
    std::vector<char> usable2(static_cast<size_t>(pool2) * pool2 * pool2, 0);
    for (int x = 0; x < pool2; ++x) {
      for (int y = 0; y < pool2; ++y) {
        for (int z = 0; z < pool2; ++z) {
          const size_t at = (static_cast<size_t>(x) * pool2 + y) * pool2 + z;
          if (x == y || y == z || x == z) continue;
          try {
            ang2[at] = triangle_angles(c2(x), c2(y), c2(z));
          } catch (const DegenerateTriangleError&) {
            continue;
          }
          sign2[at] = static_cast<int8_t>(order_sign(c2(x), c2(y), c2(z), cfg.degeneracy_eps));
          usable2[at] = 1;
        }
      }
    }

    std::array<long long, 4> local_correct{};
    int degenerate_draws = 0;
    for (int t = 0; t < triplets_per_pair; ++t) {
      // Three distinct stable landmarks from image 1.
      int i = static_cast<int>(rng.below(n_stable));
      int j = i, l = i;
      while (j == i) j = static_cast<int>(rng.below(n_stable));
      while (l == i || l == j) l = static_cast<int>(rng.below(n_stable));

      TriangleSignature ref;
      try {
        ref = make_signature(Point{lm1[i].x, lm1[i].y}, Point{lm1[j].x, lm1[j].y},
                             Point{lm1[l].x, lm1[l].y}, cfg.geometry());
      } catch (const DegenerateTriangleError&) {
        // Resample; annotated landmarks should normally form a triangle.
        if (++degenerate_draws < 10 * triplets_per_pair) --t;
        continue;
      }
      ++trials;

      for (int mode = 0; mode < 4; ++mode) {
        double best = -std::numeric_limits<double>::infinity();
        int bx = -1, by = -1, bz = -1;
        for (int x = 0; x < pool2; ++x) {
          for (int y = 0; y < pool2; ++y) {
            for (int z = 0; z < pool2; ++z) {
              const size_t at = (static_cast<size_t>(x) * pool2 + y) * pool2 + z;
              if (!usable2[at]) continue;
              const double po = order_penalty(ref.order, sign2[at], modes[mode]);
              const double ps = shape_penalty(ref.angles, ang2[at], modes[mode]);
              const double total = (scores(i, x) + scores(j, y) + scores(l, z)) * po * ps;
              if (total > best) {
                best = total;
                bx = x;
                by = y;
                bz = z;
              }
            }
          }
        }
        if (bx < 0) continue;
        const auto hit = [&](int got, int want) {
          return got == want || iou(locs2[got], locs2[want]) > 0.5;
        };
        if (hit(bx, i) && hit(by, j) && hit(bz, l)) ++local_correct[mode];
      }
    }
#pragma omp critical
    for (int mode = 0; mode < 4; ++mode) correct[mode] += local_correct[mode];
  }

  LocalizationResult result;
  result.pairs = num_pairs;
  result.trials = trials;
  for (int mode = 0; mode < 4; ++mode) {
    result.accuracy[mode] = static_cast<double>(correct[mode]) / static_cast<double>(trials);
  }
  for (int mode = 0; mode < 4; ++mode) {
    result.improvement_pct[mode] =
        100.0 * (result.accuracy[mode] - result.accuracy[0]) / std::max(result.accuracy[0], 1e-12);
  }
  return result;
}

void visualize_detections(const std::vector<ManifestEntry>& entries, const Model& model,
                          const std::string& out_dir, int max_images) {
  if (model.triplets.empty()) throw DataError("visualize: model has no triplets");
  Dataset ds = prepare_dataset(entries, model.config, &model.class_names);
  std::filesystem::create_directories(out_dir);
  const PatchConfig pc = model.config.patch();

  const int n = std::min<int>(max_images, static_cast<int>(ds.entries.size()));
  for (int i = 0; i < n; ++i) {
    // Strongest-responding triplet on this image.
    TripletDetection best = no_detection();
    int best_t = -1;
    for (size_t t = 0; t < model.triplets.size(); ++t) {
      const TripletDetection d =
          detect_on_grid_pair(ds.grids[i].grid, ds.grids[i].mirrored, model.triplets[t].detector,
                              model.config.k_top, pc, model.config.overlap_max);
      if (d.valid && (best_t < 0 || d.total > best.total)) {
        best = d;
        best_t = static_cast<int>(t);
      }
    }
    if (best_t < 0) continue;

    RgbImage overlay = RgbImage::from_gray(ds.canonical[i]);
    const std::array<std::array<float, 3>, 3> colors = {
        {{1.0f, 0.2f, 0.2f}, {0.2f, 1.0f, 0.2f}, {0.3f, 0.5f, 1.0f}}};
    for (int r = 0; r < 3; ++r) {
      PatchLocation loc = best.locations[r];
      if (best.mirrored) loc.x = overlay.width - loc.x - loc.side;
      draw_box(overlay, loc, colors[r]);
    }
    const std::string cls = model.class_names[model.triplets[best_t].detector.class_label];
    write_png((std::filesystem::path(out_dir) /
               ("det_" + std::to_string(i) + "_" + cls + ".png"))
                  .string(),
              overlay);
  }
}

void visualize_bot_means(const std::vector<ManifestEntry>& entries, const Model& model,
                         const std::string& out_dir) {
  Dataset ds = prepare_dataset(entries, model.config, &model.class_names);
  const std::vector<FeatureVector> bots = bot_batch(ds, model);
  std::filesystem::create_directories(out_dir);

  const int dim = static_cast<int>(model.triplets.size());
  std::vector<FeatureVector> mean(ds.num_classes(), FeatureVector(dim, 0.0));
  std::vector<int> count(ds.num_classes(), 0);
  for (size_t i = 0; i < bots.size(); ++i) {
    if (ds.labels[i] < 0) continue;
    ++count[ds.labels[i]];
    for (int j = 0; j < dim; ++j) mean[ds.labels[i]][j] += bots[i][j];
  }
  std::ofstream csv(std::filesystem::path(out_dir) / "bot_means.csv");
  csv << "class";
  for (int j = 0; j < dim; ++j) csv << ",t" << j;
  csv << '\n';
  double peak = 1e-12;
  for (int c = 0; c < ds.num_classes(); ++c) {
    if (count[c] == 0) continue;
    csv << model.class_names[c];
    for (int j = 0; j < dim; ++j) {
      mean[c][j] /= count[c];
      peak = std::max(peak, mean[c][j]);
      csv << ',' << mean[c][j];
    }
    csv << '\n';
  }

  // Bar chart: one row of bars per class, one bar per triplet.
  const int bar_w = std::max(1, 600 / std::max(dim, 1));
  const int row_h = 60;
  GrayImage chart = GrayImage::zeros(std::max(dim * bar_w, 1), row_h * ds.num_classes());
  for (int c = 0; c < ds.num_classes(); ++c) {
    for (int j = 0; j < dim; ++j) {
      const int h = static_cast<int>(std::lround(std::max(mean[c][j], 0.0) / peak * (row_h - 8)));
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < bar_w - (bar_w > 1 ? 1 : 0); ++x) {
          chart.at(j * bar_w + x, (c + 1) * row_h - 2 - y) = 1.0f;
        }
      }
    }
  }
  write_png((std::filesystem::path(out_dir) / "bot_means.png").string(), chart);
}

void visualize_dmap(const std::vector<ManifestEntry>& train, const PipelineConfig& cfg,
                    int seed_id, const std::string& out_dir) {
  cfg.validate();
  Dataset ds = prepare_dataset(train, cfg, nullptr);
  if (seed_id < 0 || seed_id >= static_cast<int>(ds.entries.size())) {
    throw ConfigError("visualize: seed id out of range");
  }
  const Neighborhood nbhd = restricted_neighborhood(
      ds, seed_id, std::min(cfg.neighborhood_size, static_cast<int>(ds.entries.size())),
      std::vector<char>(ds.num_classes(), 1));

  NeighborhoodView view;
  view.seed_id = seed_id;
  view.seed_label = ds.labels[seed_id];
  for (int m : nbhd.members) {
    view.member_labels.push_back(ds.labels[m]);
    view.member_grids.push_back(&ds.grids[m].grid);
  }
  const DiscriminativeMap dmap = discriminative_map(view, cfg.patch(), cfg.dmap_eps);

  double peak = 1e-12;
  for (double v : dmap.d) peak = std::max(peak, v);
  RgbImage overlay = RgbImage::from_gray(ds.canonical[seed_id]);
  for (int row = 0; row < dmap.rows; ++row) {
    for (int col = 0; col < dmap.cols; ++col) {
      const double heat = dmap.at(col, row) / peak;
      const PatchLocation loc = dmap.location(col, row);
      const int cx = loc.x + loc.side / 2, cy = loc.y + loc.side / 2;
      // Heat dots at patch centers; red channel encodes the score.
      for (int dy = -2; dy <= 2; ++dy) {
        for (int dx = -2; dx <= 2; ++dx) {
          overlay.set(cx + dx, cy + dy, static_cast<float>(heat), 0.1f, 0.1f);
        }
      }
    }
  }
  std::filesystem::create_directories(out_dir);
  write_png((std::filesystem::path(out_dir) / ("dmap_seed_" + std::to_string(seed_id) + ".png"))
                .string(),
            overlay);
}

}  // namespace botmine
