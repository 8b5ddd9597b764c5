#pragma once

#include <cstdint>
#include <vector>

#include "botmine/errors.hpp"

namespace botmine {

// Row-major grayscale image with intensities in [0, 1].
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<float> pixels;

  float at(int x, int y) const { return pixels[static_cast<size_t>(y) * width + x]; }
  float& at(int x, int y) { return pixels[static_cast<size_t>(y) * width + x]; }

  static GrayImage zeros(int w, int h) {
    GrayImage img;
    img.width = w;
    img.height = h;
    img.pixels.assign(static_cast<size_t>(w) * h, 0.0f);
    return img;
  }
};

struct Rect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;
};

// Axis-aligned square patch, fully inside the image it refers to.
struct PatchLocation {
  int x = 0;     // left
  int y = 0;     // top
  int side = 0;  // edge length in pixels

  bool operator==(const PatchLocation&) const = default;
};

// Intersection-over-union of two axis-aligned square patches.
double iou(const PatchLocation& a, const PatchLocation& b);

// Horizontal flip. Exact involution on pixel data.
GrayImage mirror(const GrayImage& img);

// Bilinear resample to the exact target size. Same size returns a copy.
GrayImage resize_bilinear(const GrayImage& img, int out_w, int out_h);

GrayImage crop(const GrayImage& img, const Rect& box);

// Crop to `bbox`, then scale to `target_width` keeping the aspect ratio.
// Throws InvalidRegionError if bbox leaves the image, TooSmallError if the
// result would be under 64 px in either dimension.
GrayImage preprocess(const GrayImage& img, const Rect& bbox, int target_width);

}  // namespace botmine
