#pragma once

#include <vector>

#include "botmine/image.hpp"

namespace botmine {

using FeatureVector = std::vector<double>;

// Dalal-Triggs style HOG: unsigned orientation bins, square cells, square
// blocks of cells with one-cell stride, L2 normalization with epsilon guard,
// clipping and renormalization.
struct HogConfig {
  int cell_size = 8;
  int bins = 9;
  int block_cells = 2;       // block edge, in cells
  double normalize_eps = 1e-6;
  double clip = 0.2;

  int block_dim() const { return block_cells * block_cells * bins; }

  // Cells along one axis of a square patch (trailing pixels are ignored
  // when side is not a cell multiple).
  int cells_for(int side) const { return side / cell_size; }

  int blocks_for(int side) const { return cells_for(side) - block_cells + 1; }

  // Descriptor length of one square patch.
  int descriptor_dim(int side) const {
    const int b = blocks_for(side);
    return b * b * block_dim();
  }
};

// Image-wide grid of normalized blocks anchored at pixel (0,0) on the cell
// lattice. The descriptor of any cell-aligned window is a gather of its
// blocks, which is what makes dense scoring cheap.
struct BlockGrid {
  int cell_size = 0;
  int bins = 0;
  int block_cells = 0;
  int blocks_x = 0;
  int blocks_y = 0;
  int block_dim = 0;
  int image_width = 0;
  int image_height = 0;
  std::vector<double> data;  // [by][bx][block_dim]

  const double* block(int bx, int by) const {
    return &data[(static_cast<size_t>(by) * blocks_x + bx) * block_dim];
  }
};

// Orientation histogram vector of the patch at `loc`, blocks in row-major
// order. Gradients are clamped central differences on the full image, so a
// patch interior to the image sees one pixel of surrounding context.
// Throws InvalidRegionError if the patch leaves the image.
FeatureVector extract_hog(const GrayImage& img, const PatchLocation& loc, const HogConfig& cfg);

// Normalized blocks for the whole image. OpenMP-parallel over rows;
// bit-identical to per-patch extraction on cell-aligned windows.
BlockGrid build_block_grid(const GrayImage& img, const HogConfig& cfg);

// Copy of the window descriptor starting at cell (cell_x, cell_y) spanning
// `window_cells` cells per axis.
FeatureVector gather_window(const BlockGrid& grid, int cell_x, int cell_y, int window_cells);

// HOG of the image resampled to a square canonical frame, so descriptors of
// differently sized images share one dimension.
FeatureVector whole_image_descriptor(const GrayImage& img, const HogConfig& cfg,
                                     int canonical_side = 128);

}  // namespace botmine
