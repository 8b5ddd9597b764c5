#pragma once

#include <array>
#include <string>
#include <vector>

#include "botmine/image.hpp"

namespace botmine {

// Decodes a PNG or JPEG file (sniffed by magic bytes) to grayscale.
// Color inputs are converted with luma weights 0.299/0.587/0.114.
// Throws DataError on unreadable or unsupported files.
GrayImage read_image(const std::string& path);

// 8-bit grayscale PNG.
void write_png(const std::string& path, const GrayImage& img);

// 8-bit RGB PNG, for overlays. pixels are interleaved r,g,b in [0,1].
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<float> pixels;

  static RgbImage from_gray(const GrayImage& img);
  void set(int x, int y, float r, float g, float b);
};

void write_png(const std::string& path, const RgbImage& img);

// Axis-aligned rectangle outline, clipped to the image.
void draw_box(RgbImage& img, const PatchLocation& loc, const std::array<float, 3>& rgb);

}  // namespace botmine
