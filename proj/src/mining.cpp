#include "botmine/mining.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <map>
#include <numeric>

namespace botmine {

Neighborhood build_neighborhood(int seed, const std::vector<FeatureVector>& descriptors,
                                int size) {
  const int n = static_cast<int>(descriptors.size());
  if (seed < 0 || seed >= n) throw ConfigError("build_neighborhood: seed out of range");
  if (size < 1) throw ConfigError("build_neighborhood: size must be >= 1");
  if (size > n) {
    throw InsufficientDataError("build_neighborhood: size " + std::to_string(size) +
                                " exceeds training set of " + std::to_string(n));
  }

  const FeatureVector& q = descriptors[seed];
  std::vector<std::pair<double, int>> dist;
  dist.reserve(n - 1);
  for (int i = 0; i < n; ++i) {
    if (i == seed) continue;
    if (descriptors[i].size() != q.size()) {
      throw ShapeMismatchError("build_neighborhood: descriptor dim mismatch");
    }
    double d2 = 0.0;
    for (size_t j = 0; j < q.size(); ++j) {
      const double diff = descriptors[i][j] - q[j];
      d2 += diff * diff;
    }
    dist.emplace_back(d2, i);
  }
  std::sort(dist.begin(), dist.end());

  Neighborhood nbhd;
  nbhd.seed = seed;
  nbhd.members.push_back(seed);
  for (int i = 0; i < size - 1; ++i) nbhd.members.push_back(dist[i].second);
  return nbhd;
}

namespace {

void check_aligned(const NeighborhoodView& nbhd, const PatchConfig& pc) {
  if (nbhd.member_grids.empty()) throw InsufficientDataError("discriminative_map: no members");
  if (nbhd.member_labels.size() != nbhd.member_grids.size()) {
    throw ShapeMismatchError("discriminative_map: labels/grids size mismatch");
  }
  const BlockGrid* first = nbhd.member_grids.front();
  for (const BlockGrid* g : nbhd.member_grids) {
    if (g->image_width != first->image_width || g->image_height != first->image_height ||
        g->block_dim != first->block_dim || g->cell_size != first->cell_size) {
      throw ShapeMismatchError("discriminative_map: members not on a shared canonical frame");
    }
  }
  if (pc.stride % first->cell_size != 0) {
    throw ConfigError("discriminative_map: stride must be a multiple of the cell size");
  }
}

DiscriminativeMap make_map_shell(const NeighborhoodView& nbhd, const PatchConfig& pc) {
  const BlockGrid* g = nbhd.member_grids.front();
  DiscriminativeMap map;
  map.patch_side = pc.patch_side;
  map.stride = pc.stride;
  map.cols = (g->image_width - pc.patch_side) / pc.stride + 1;
  map.rows = (g->image_height - pc.patch_side) / pc.stride + 1;
  map.d.assign(static_cast<size_t>(map.cols) * map.rows, 0.0);
  return map;
}

// Compact class ids present in the neighborhood.
std::vector<int> compact_labels(const std::vector<int>& labels, int* num_classes) {
  std::map<int, int> remap;
  for (int l : labels) remap.emplace(l, 0);
  int next = 0;
  for (auto& [label, id] : remap) id = next++;
  std::vector<int> out(labels.size());
  for (size_t i = 0; i < labels.size(); ++i) out[i] = remap[labels[i]];
  *num_classes = next;
  return out;
}

}  // namespace

DiscriminativeMap discriminative_map(const NeighborhoodView& nbhd, const PatchConfig& pc,
                                     double eps) {
  check_aligned(nbhd, pc);
  DiscriminativeMap map = make_map_shell(nbhd, pc);

  const int members = static_cast<int>(nbhd.member_grids.size());
  int num_classes = 0;
  const std::vector<int> cls = compact_labels(nbhd.member_labels, &num_classes);
  const BlockGrid* g0 = nbhd.member_grids.front();
  const int window_cells = pc.patch_side / g0->cell_size;
  const int step_cells = pc.stride / g0->cell_size;
  const int dim = (window_cells - g0->block_cells + 1) * (window_cells - g0->block_cells + 1) *
                  g0->block_dim;

  std::vector<long long> class_count(num_classes, 0);
  for (int c : cls) ++class_count[c];

#pragma omp parallel
  {
    std::vector<FeatureVector> feats(members);
    std::vector<FeatureVector> class_mean(num_classes);
    FeatureVector grand_mean;

#pragma omp for schedule(static)
    for (int idx = 0; idx < map.cols * map.rows; ++idx) {
      const int col = idx % map.cols;
      const int row = idx / map.cols;
      const int cx = col * step_cells;
      const int cy = row * step_cells;

      for (int m = 0; m < members; ++m) {
        feats[m] = gather_window(*nbhd.member_grids[m], cx, cy, window_cells);
      }
      for (auto& cm : class_mean) cm.assign(dim, 0.0);
      grand_mean.assign(dim, 0.0);
      for (int m = 0; m < members; ++m) {
        for (int j = 0; j < dim; ++j) {
          class_mean[cls[m]][j] += feats[m][j];
          grand_mean[j] += feats[m][j];
        }
      }
      for (int c = 0; c < num_classes; ++c) {
        for (int j = 0; j < dim; ++j) class_mean[c][j] /= static_cast<double>(class_count[c]);
      }
      for (int j = 0; j < dim; ++j) grand_mean[j] /= static_cast<double>(members);

      double num = 0.0;
      for (int c = 0; c < num_classes; ++c) {
        for (int j = 0; j < dim; ++j) {
          const double diff = class_mean[c][j] - grand_mean[j];
          num += diff * diff;
        }
      }
      double den = 0.0;
      for (int m = 0; m < members; ++m) {
        for (int j = 0; j < dim; ++j) {
          const double diff = feats[m][j] - class_mean[cls[m]][j];
          den += diff * diff;
        }
      }
      map.d[idx] = num / std::max(den, eps);
    }
  }
  return map;
}

DiscriminativeMap discriminative_map_reference(const NeighborhoodView& nbhd,
                                               const PatchConfig& pc, double eps) {
  check_aligned(nbhd, pc);
  DiscriminativeMap map = make_map_shell(nbhd, pc);

  const int members = static_cast<int>(nbhd.member_grids.size());
  int num_classes = 0;
  const std::vector<int> cls = compact_labels(nbhd.member_labels, &num_classes);
  const BlockGrid* g0 = nbhd.member_grids.front();
  const int window_cells = pc.patch_side / g0->cell_size;
  const int step_cells = pc.stride / g0->cell_size;

  for (int row = 0; row < map.rows; ++row) {
    for (int col = 0; col < map.cols; ++col) {
      std::vector<FeatureVector> feats(members);
      for (int m = 0; m < members; ++m) {
        feats[m] = gather_window(*nbhd.member_grids[m], col * step_cells, row * step_cells,
                                 window_cells);
      }
      const size_t dim = feats.front().size();

      FeatureVector grand(dim, 0.0);
      for (const auto& f : feats) {
        for (size_t j = 0; j < dim; ++j) grand[j] += f[j];
      }
      for (double& v : grand) v /= members;

      double num = 0.0, den = 0.0;
      for (int c = 0; c < num_classes; ++c) {
        FeatureVector mean_c(dim, 0.0);
        int n_c = 0;
        for (int m = 0; m < members; ++m) {
          if (cls[m] != c) continue;
          ++n_c;
          for (size_t j = 0; j < dim; ++j) mean_c[j] += feats[m][j];
        }
        for (double& v : mean_c) v /= n_c;
        for (size_t j = 0; j < dim; ++j) {
          const double diff = mean_c[j] - grand[j];
          num += diff * diff;
        }
        for (int m = 0; m < members; ++m) {
          if (cls[m] != c) continue;
          for (size_t j = 0; j < dim; ++j) {
            const double diff = feats[m][j] - mean_c[j];
            den += diff * diff;
          }
        }
      }
      map.d[static_cast<size_t>(row) * map.cols + col] = num / std::max(den, eps);
    }
  }
  return map;
}

std::vector<CandidateTriplet> propose_candidates(const NeighborhoodView& nbhd,
                                                 const DiscriminativeMap& dmap, int top_n,
                                                 double overlap_max, const GeometryConfig& geo) {
  if (top_n < 3) throw ConfigError("propose_candidates: top_n must be >= 3");

  std::vector<int> positives;
  for (size_t m = 0; m < nbhd.member_labels.size(); ++m) {
    if (nbhd.member_labels[m] == nbhd.seed_label) positives.push_back(static_cast<int>(m));
  }
  if (positives.empty()) {
    throw InsufficientDataError("propose_candidates: no positive samples in neighborhood");
  }

  const auto tops = top_k_nms(dmap.as_score_map(), top_n, overlap_max);
  if (tops.size() < 3) return {};

  const BlockGrid* g0 = nbhd.member_grids.front();
  const int window_cells = dmap.patch_side / g0->cell_size;

  // Positive-averaged template per kept location; tops are already in
  // descending-score order, which fixes the canonical role order.
  std::vector<FeatureVector> templates(tops.size());
  for (size_t t = 0; t < tops.size(); ++t) {
    const int cx = tops[t].loc.x / g0->cell_size;
    const int cy = tops[t].loc.y / g0->cell_size;
    FeatureVector acc;
    for (int m : positives) {
      const FeatureVector f = gather_window(*nbhd.member_grids[m], cx, cy, window_cells);
      if (acc.empty()) {
        acc = f;
      } else {
        for (size_t j = 0; j < f.size(); ++j) acc[j] += f[j];
      }
    }
    for (double& v : acc) v /= static_cast<double>(positives.size());
    templates[t] = std::move(acc);
  }

  const auto center = [](const PatchLocation& l) {
    return Point{l.x + l.side / 2.0, l.y + l.side / 2.0};
  };

  std::vector<CandidateTriplet> out;
  const int n = static_cast<int>(tops.size());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      for (int l = j + 1; l < n; ++l) {
        const Point ca = center(tops[i].loc), cb = center(tops[j].loc), cc = center(tops[l].loc);
        const int g = order_sign(ca, cb, cc, geo.degeneracy_eps);
        if (g == 0) continue;  // collinear proposal geometry, dropped
        CandidateTriplet cand;
        cand.source_neighborhood = nbhd.seed_id;
        cand.class_label = nbhd.seed_label;
        cand.locations = {tops[i].loc, tops[j].loc, tops[l].loc};
        cand.templates = {templates[i], templates[j], templates[l]};
        cand.signature.order = g;
        cand.signature.angles = triangle_angles(ca, cb, cc);
        out.push_back(std::move(cand));
      }
    }
  }
  return out;
}

double shannon_entropy(const std::vector<long long>& counts) {
  long long total = 0;
  for (long long c : counts) total += c;
  if (total <= 0) return 0.0;
  double h = 0.0;
  for (long long c : counts) {
    if (c <= 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log(p);
  }
  return h;
}

std::optional<EntropyScore> entropy_score(const TripletDetector& det,
                                          const std::vector<GridPair>& eval_grids,
                                          const std::vector<int>& eval_labels, int top_m, int k,
                                          const PatchConfig& pc, double overlap_max) {
  if (eval_grids.size() != eval_labels.size()) {
    throw ShapeMismatchError("entropy_score: grids/labels size mismatch");
  }
  int max_label = -1;
  int distinct = 0;
  {
    std::vector<int> sorted = eval_labels;
    std::sort(sorted.begin(), sorted.end());
    if (!sorted.empty()) max_label = sorted.back();
    distinct = static_cast<int>(std::unique(sorted.begin(), sorted.end()) - sorted.begin());
  }
  if (distinct < 2) {
    throw InsufficientDataError("entropy_score: evaluation set must span >= 2 classes");
  }
  if (top_m < 1) throw ConfigError("entropy_score: top_m must be >= 1");

  struct Hit {
    double total;
    int idx;
  };
  std::vector<Hit> hits;
  hits.reserve(eval_grids.size());
  for (size_t i = 0; i < eval_grids.size(); ++i) {
    const TripletDetection d =
        detect_on_grid_pair(eval_grids[i].grid, eval_grids[i].mirrored, det, k, pc, overlap_max);
    if (d.valid) hits.push_back({d.total, static_cast<int>(i)});
  }
  if (hits.empty()) return std::nullopt;

  const int m = std::min<int>(top_m, static_cast<int>(hits.size()));
  std::partial_sort(hits.begin(), hits.begin() + m, hits.end(), [](const Hit& a, const Hit& b) {
    if (a.total != b.total) return a.total > b.total;
    return a.idx < b.idx;
  });

  std::vector<long long> counts(max_label + 1, 0);
  double mean = 0.0;
  for (int i = 0; i < m; ++i) {
    ++counts[eval_labels[hits[i].idx]];
    mean += hits[i].total;
  }

  EntropyScore score;
  score.entropy = shannon_entropy(counts);
  score.mean_top_score = mean / m;
  score.detections = static_cast<int>(hits.size());
  return score;
}

std::vector<MinedTriplet> select_triplets(std::vector<MinedTriplet> scored, int per_class) {
  if (per_class < 1) throw ConfigError("select_triplets: per_class must be >= 1");
  std::stable_sort(scored.begin(), scored.end(), [](const MinedTriplet& a, const MinedTriplet& b) {
    if (a.detector.class_label != b.detector.class_label) {
      return a.detector.class_label < b.detector.class_label;
    }
    if (a.entropy != b.entropy) return a.entropy < b.entropy;
    if (a.mean_top_score != b.mean_top_score) return a.mean_top_score > b.mean_top_score;
    return a.candidate_id < b.candidate_id;
  });

  std::vector<MinedTriplet> kept;
  int current_class = std::numeric_limits<int>::min();
  int taken = 0;
  int short_classes = 0;
  for (auto& t : scored) {
    if (t.detector.class_label != current_class) {
      if (current_class != std::numeric_limits<int>::min() && taken < per_class) ++short_classes;
      current_class = t.detector.class_label;
      taken = 0;
    }
    if (taken < per_class) {
      kept.push_back(std::move(t));
      ++taken;
    }
  }
  if (taken > 0 && taken < per_class) ++short_classes;
  if (short_classes > 0) {
    std::cerr << "[mining] " << short_classes
              << " class(es) had fewer candidates than requested; kept all of them\n";
  }
  return kept;
}

}  // namespace botmine
