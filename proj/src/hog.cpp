#include "botmine/hog.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace botmine {

namespace {

// Magnitude-weighted orientation histogram of one cell. Both the per-patch
// and the grid path call this, which keeps their outputs bit-identical.
void accumulate_cell(const GrayImage& img, int px, int py, const HogConfig& cfg, double* hist) {
  const int w = img.width, h = img.height;
  std::fill(hist, hist + cfg.bins, 0.0);
  for (int y = py; y < py + cfg.cell_size; ++y) {
    for (int x = px; x < px + cfg.cell_size; ++x) {
      const double gx = img.at(std::min(x + 1, w - 1), y) - img.at(std::max(x - 1, 0), y);
      const double gy = img.at(x, std::min(y + 1, h - 1)) - img.at(x, std::max(y - 1, 0));
      const double mag = std::sqrt(gx * gx + gy * gy);
      if (mag == 0.0) continue;
      double theta = std::atan2(gy, gx);
      if (theta < 0.0) theta += M_PI;
      int bin = static_cast<int>(theta / M_PI * cfg.bins);
      if (bin >= cfg.bins) bin = cfg.bins - 1;
      hist[bin] += mag;
    }
  }
}

// L2 normalize with epsilon guard, clip, renormalize. All-zero stays zero.
void normalize_block(double* v, int n, const HogConfig& cfg) {
  double ss = 0.0;
  for (int i = 0; i < n; ++i) ss += v[i] * v[i];
  const double n1 = std::sqrt(ss + cfg.normalize_eps * cfg.normalize_eps);
  for (int i = 0; i < n; ++i) v[i] = std::min(v[i] / n1, cfg.clip);
  ss = 0.0;
  for (int i = 0; i < n; ++i) ss += v[i] * v[i];
  const double n2 = std::sqrt(ss + cfg.normalize_eps * cfg.normalize_eps);
  for (int i = 0; i < n; ++i) v[i] /= n2;
}

// Gather a block's cells (row-major within the block) and normalize.
void make_block(const std::vector<double>& cell_hist, int cells_x, int cx, int cy,
                const HogConfig& cfg, double* out) {
  int k = 0;
  for (int v = 0; v < cfg.block_cells; ++v) {
    for (int u = 0; u < cfg.block_cells; ++u) {
      const double* h = &cell_hist[(static_cast<size_t>(cy + v) * cells_x + (cx + u)) * cfg.bins];
      for (int b = 0; b < cfg.bins; ++b) out[k++] = h[b];
    }
  }
  normalize_block(out, cfg.block_dim(), cfg);
}

}  // namespace

FeatureVector extract_hog(const GrayImage& img, const PatchLocation& loc, const HogConfig& cfg) {
  if (loc.x < 0 || loc.y < 0 || loc.side <= 0 || loc.x + loc.side > img.width ||
      loc.y + loc.side > img.height) {
    throw InvalidRegionError("extract_hog: patch [" + std::to_string(loc.x) + "," +
                             std::to_string(loc.y) + "]+" + std::to_string(loc.side) +
                             " outside image");
  }
  const int cells = cfg.cells_for(loc.side);
  if (cells < cfg.block_cells) {
    throw TooSmallError("extract_hog: patch smaller than one block");
  }

  std::vector<double> cell_hist(static_cast<size_t>(cells) * cells * cfg.bins);
  for (int cy = 0; cy < cells; ++cy) {
    for (int cx = 0; cx < cells; ++cx) {
      accumulate_cell(img, loc.x + cx * cfg.cell_size, loc.y + cy * cfg.cell_size, cfg,
                      &cell_hist[(static_cast<size_t>(cy) * cells + cx) * cfg.bins]);
    }
  }

  const int blocks = cells - cfg.block_cells + 1;
  FeatureVector out(static_cast<size_t>(blocks) * blocks * cfg.block_dim());
  for (int by = 0; by < blocks; ++by) {
    for (int bx = 0; bx < blocks; ++bx) {
      make_block(cell_hist, cells, bx, by, cfg,
                 &out[(static_cast<size_t>(by) * blocks + bx) * cfg.block_dim()]);
    }
  }
  return out;
}

BlockGrid build_block_grid(const GrayImage& img, const HogConfig& cfg) {
  const int cells_x = img.width / cfg.cell_size;
  const int cells_y = img.height / cfg.cell_size;
  if (cells_x < cfg.block_cells || cells_y < cfg.block_cells) {
    throw TooSmallError("build_block_grid: image smaller than one block");
  }

  std::vector<double> cell_hist(static_cast<size_t>(cells_x) * cells_y * cfg.bins);
#pragma omp parallel for schedule(static)
  for (int cy = 0; cy < cells_y; ++cy) {
    for (int cx = 0; cx < cells_x; ++cx) {
      accumulate_cell(img, cx * cfg.cell_size, cy * cfg.cell_size, cfg,
                      &cell_hist[(static_cast<size_t>(cy) * cells_x + cx) * cfg.bins]);
    }
  }

  BlockGrid grid;
  grid.cell_size = cfg.cell_size;
  grid.bins = cfg.bins;
  grid.block_cells = cfg.block_cells;
  grid.blocks_x = cells_x - cfg.block_cells + 1;
  grid.blocks_y = cells_y - cfg.block_cells + 1;
  grid.block_dim = cfg.block_dim();
  grid.image_width = img.width;
  grid.image_height = img.height;
  grid.data.resize(static_cast<size_t>(grid.blocks_x) * grid.blocks_y * grid.block_dim);

#pragma omp parallel for schedule(static)
  for (int by = 0; by < grid.blocks_y; ++by) {
    for (int bx = 0; bx < grid.blocks_x; ++bx) {
      make_block(cell_hist, cells_x, bx, by, cfg,
                 &grid.data[(static_cast<size_t>(by) * grid.blocks_x + bx) * grid.block_dim]);
    }
  }
  return grid;
}

FeatureVector gather_window(const BlockGrid& grid, int cell_x, int cell_y, int window_cells) {
  const int wb = window_cells - grid.block_cells + 1;
  FeatureVector out(static_cast<size_t>(wb) * wb * grid.block_dim);
  double* dst = out.data();
  for (int j = 0; j < wb; ++j) {
    const double* src = grid.block(cell_x, cell_y + j);
    std::copy(src, src + static_cast<size_t>(wb) * grid.block_dim, dst);
    dst += static_cast<size_t>(wb) * grid.block_dim;
  }
  return out;
}

FeatureVector whole_image_descriptor(const GrayImage& img, const HogConfig& cfg,
                                     int canonical_side) {
  const GrayImage canon = resize_bilinear(img, canonical_side, canonical_side);
  return extract_hog(canon, {0, 0, canonical_side}, cfg);
}

}  // namespace botmine
