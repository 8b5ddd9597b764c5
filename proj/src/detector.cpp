#include "botmine/detector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace botmine {

BackgroundAccumulator::BackgroundAccumulator(int dim)
    : mean_(Eigen::VectorXd::Zero(dim)), m2_(Eigen::MatrixXd::Zero(dim, dim)) {}

void BackgroundAccumulator::add(const double* x) {
  const Eigen::Map<const Eigen::VectorXd> v(x, mean_.size());
  ++n_;
  const Eigen::VectorXd delta = v - mean_;
  mean_ += delta / static_cast<double>(n_);
  const double scale = static_cast<double>(n_ - 1) / static_cast<double>(n_);
  m2_.selfadjointView<Eigen::Lower>().rankUpdate(delta, scale);
}

void BackgroundAccumulator::add_batch(const Eigen::MatrixXd& x) {
  const long long m = x.rows();
  if (m == 0) return;
  if (x.cols() != mean_.size()) throw ShapeMismatchError("add_batch: feature dim mismatch");
  const Eigen::VectorXd bmean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - bmean.transpose();

  BackgroundAccumulator batch(dim());
  batch.n_ = m;
  batch.mean_ = bmean;
  batch.m2_.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose(), 1.0);
  merge(batch);
}

void BackgroundAccumulator::merge(const BackgroundAccumulator& other) {
  if (other.n_ == 0) return;
  if (n_ == 0) {
    n_ = other.n_;
    mean_ = other.mean_;
    m2_ = other.m2_;
    return;
  }
  const double na = static_cast<double>(n_);
  const double nb = static_cast<double>(other.n_);
  const Eigen::VectorXd delta = other.mean_ - mean_;
  mean_ += delta * (nb / (na + nb));
  m2_ += other.m2_;
  m2_.selfadjointView<Eigen::Lower>().rankUpdate(delta, na * nb / (na + nb));
  n_ += other.n_;
}

BackgroundStats BackgroundAccumulator::finalize(double lambda) const {
  if (n_ < 2) throw InsufficientDataError("fit_background: need at least 2 patches");
  BackgroundStats stats;
  stats.mu = mean_;
  stats.sigma = m2_.selfadjointView<Eigen::Lower>();
  stats.sigma /= static_cast<double>(n_);
  stats.sigma.diagonal().array() += lambda;
  stats.lambda = lambda;
  stats.sample_count = n_;
  return stats;
}

BackgroundStats fit_background(const std::vector<FeatureVector>& patches, double lambda) {
  if (patches.size() < 2) throw InsufficientDataError("fit_background: need at least 2 patches");
  BackgroundAccumulator acc(static_cast<int>(patches.front().size()));
  for (const auto& p : patches) {
    if (p.size() != patches.front().size()) {
      throw ShapeMismatchError("fit_background: inconsistent feature dims");
    }
    acc.add(p);
  }
  return acc.finalize(lambda);
}

LdaSolver::LdaSolver(const BackgroundStats& stats) : llt_(stats.sigma), mu_(stats.mu) {
  if (llt_.info() != Eigen::Success) {
    throw SingularCovarianceError(
        "lda_weights: covariance not positive-definite; increase the ridge lambda");
  }
}

FeatureVector LdaSolver::weights(const FeatureVector& tmpl) const {
  if (static_cast<long>(tmpl.size()) != mu_.size()) {
    throw ShapeMismatchError("lda_weights: template dim " + std::to_string(tmpl.size()) +
                             " != stats dim " + std::to_string(mu_.size()));
  }
  const Eigen::Map<const Eigen::VectorXd> t(tmpl.data(), mu_.size());
  const Eigen::VectorXd w = llt_.solve(t - mu_);
  return FeatureVector(w.data(), w.data() + w.size());
}

FeatureVector lda_weights(const FeatureVector& tmpl, const BackgroundStats& stats) {
  return LdaSolver(stats).weights(tmpl);
}

namespace {

void check_weight_dim(const FeatureVector& w, int wb, int block_dim) {
  if (static_cast<long long>(w.size()) != static_cast<long long>(wb) * wb * block_dim) {
    throw ShapeMismatchError("score_grid: weight dim " + std::to_string(w.size()) +
                             " does not match window descriptor dim " +
                             std::to_string(static_cast<long long>(wb) * wb * block_dim));
  }
}

}  // namespace

ScoreMap score_grid(const BlockGrid& grid, const FeatureVector& w, const PatchConfig& pc) {
  if (pc.stride <= 0 || pc.stride % grid.cell_size != 0) {
    throw ConfigError("score_grid: stride must be a positive multiple of the cell size");
  }
  if (grid.image_width < pc.patch_side || grid.image_height < pc.patch_side) {
    throw TooSmallError("score_grid: image smaller than the patch");
  }
  const int window_cells = pc.patch_side / grid.cell_size;
  const int wb = window_cells - grid.block_cells + 1;
  check_weight_dim(w, wb, grid.block_dim);

  ScoreMap map;
  map.patch_side = pc.patch_side;
  map.stride = pc.stride;
  map.cols = (grid.image_width - pc.patch_side) / pc.stride + 1;
  map.rows = (grid.image_height - pc.patch_side) / pc.stride + 1;
  map.scores.resize(static_cast<size_t>(map.cols) * map.rows);

  const int step_cells = pc.stride / grid.cell_size;
  const size_t row_len = static_cast<size_t>(wb) * grid.block_dim;

#pragma omp parallel for schedule(static)
  for (int row = 0; row < map.rows; ++row) {
    const int cy = row * step_cells;
    for (int col = 0; col < map.cols; ++col) {
      const int cx = col * step_cells;
      double s = 0.0;
      for (int j = 0; j < wb; ++j) {
        const double* g = grid.block(cx, cy + j);
        const double* wj = &w[j * row_len];
        double acc = 0.0;
        for (size_t t = 0; t < row_len; ++t) acc += wj[t] * g[t];
        s += acc;
      }
      map.scores[static_cast<size_t>(row) * map.cols + col] = s;
    }
  }
  return map;
}

ScoreMap score_grid(const GrayImage& img, const FeatureVector& w, const PatchConfig& pc,
                    const HogConfig& hc) {
  if (pc.stride % hc.cell_size == 0) {
    return score_grid(build_block_grid(img, hc), w, pc);
  }
  return score_grid_reference(img, w, pc, hc);
}

ScoreMap score_grid_reference(const GrayImage& img, const FeatureVector& w, const PatchConfig& pc,
                              const HogConfig& hc) {
  if (img.width < pc.patch_side || img.height < pc.patch_side) {
    throw TooSmallError("score_grid: image smaller than the patch");
  }
  const int wb = hc.blocks_for(pc.patch_side);
  check_weight_dim(w, wb, hc.block_dim());

  ScoreMap map;
  map.patch_side = pc.patch_side;
  map.stride = pc.stride;
  map.cols = (img.width - pc.patch_side) / pc.stride + 1;
  map.rows = (img.height - pc.patch_side) / pc.stride + 1;
  map.scores.resize(static_cast<size_t>(map.cols) * map.rows);

  for (int row = 0; row < map.rows; ++row) {
    for (int col = 0; col < map.cols; ++col) {
      const FeatureVector f =
          extract_hog(img, {col * pc.stride, row * pc.stride, pc.patch_side}, hc);
      map.scores[static_cast<size_t>(row) * map.cols + col] =
          std::inner_product(f.begin(), f.end(), w.begin(), 0.0);
    }
  }
  return map;
}

std::vector<Detection> top_k_nms(const ScoreMap& map, int k, double overlap_max) {
  if (k < 1) throw ConfigError("top_k_nms: k must be >= 1");
  std::vector<int> order(map.scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (map.scores[a] != map.scores[b]) return map.scores[a] > map.scores[b];
    return a < b;  // flat index order == (y, x) ascending
  });

  std::vector<Detection> kept;
  kept.reserve(k);
  for (int idx : order) {
    const PatchLocation loc = map.location(idx % map.cols, idx / map.cols);
    bool ok = true;
    for (const auto& d : kept) {
      if (iou(loc, d.loc) > overlap_max) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    kept.push_back({loc, map.scores[idx]});
    if (static_cast<int>(kept.size()) == k) break;
  }
  return kept;
}

TripletDetection no_detection() {
  TripletDetection d;
  d.total = -std::numeric_limits<double>::infinity();
  d.valid = false;
  return d;
}

namespace {

Point center_of(const PatchLocation& loc) {
  return {loc.x + loc.side / 2.0, loc.y + loc.side / 2.0};
}

bool too_close(const Point& a, const Point& b) {
  const double dx = a.x - b.x, dy = a.y - b.y;
  return dx * dx + dy * dy < 1.0;  // triangle_angles needs >= 1 px separation
}

}  // namespace

TripletDetection detect_on_grid(const BlockGrid& grid, const TripletDetector& det, int k,
                                const PatchConfig& pc, double overlap_max) {
  std::array<std::vector<Detection>, 3> top;
  for (int r = 0; r < 3; ++r) {
    top[r] = top_k_nms(score_grid(grid, det.weights[r], pc), k, overlap_max);
    if (top[r].empty()) return no_detection();
  }

  TripletDetection best = no_detection();
  for (const auto& da : top[0]) {
    for (const auto& db : top[1]) {
      if (iou(da.loc, db.loc) > overlap_max) continue;
      const Point ca = center_of(da.loc), cb = center_of(db.loc);
      if (too_close(ca, cb)) continue;
      for (const auto& dc : top[2]) {
        if (iou(da.loc, dc.loc) > overlap_max || iou(db.loc, dc.loc) > overlap_max) continue;
        const Point cc = center_of(dc.loc);
        if (too_close(ca, cc) || too_close(cb, cc)) continue;

        const int g = order_sign(ca, cb, cc, det.geometry.degeneracy_eps);
        const double p_o = order_penalty(det.signature.order, g, det.geometry);
        const double p_s =
            shape_penalty(det.signature.angles, triangle_angles(ca, cb, cc), det.geometry);
        const double total = (da.score + db.score + dc.score) * p_o * p_s;
        if (total > best.total || !best.valid) {
          best.locations = {da.loc, db.loc, dc.loc};
          best.appearance = {da.score, db.score, dc.score};
          best.order_pen = p_o;
          best.shape_pen = p_s;
          best.total = total;
          best.valid = true;
        }
      }
    }
  }
  return best;
}

TripletDetection detect_triplet(const GrayImage& img, const TripletDetector& det, int k,
                                const PatchConfig& pc, const HogConfig& hc, double overlap_max) {
  return detect_on_grid(build_block_grid(img, hc), det, k, pc, overlap_max);
}

TripletDetection detect_on_grid_pair(const BlockGrid& grid, const BlockGrid& mirrored,
                                     const TripletDetector& det, int k, const PatchConfig& pc,
                                     double overlap_max) {
  TripletDetection straight = detect_on_grid(grid, det, k, pc, overlap_max);
  TripletDetection flipped = detect_on_grid(mirrored, det, k, pc, overlap_max);
  if (!flipped.valid) return straight;
  if (!straight.valid || flipped.total > straight.total) {
    flipped.mirrored = true;
    return flipped;
  }
  return straight;
}

TripletDetection detect_with_mirror(const GrayImage& img, const TripletDetector& det, int k,
                                    const PatchConfig& pc, const HogConfig& hc,
                                    double overlap_max) {
  return detect_on_grid_pair(build_block_grid(img, hc), build_block_grid(mirror(img), hc), det, k,
                             pc, overlap_max);
}

}  // namespace botmine
