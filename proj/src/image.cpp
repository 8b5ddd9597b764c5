#include "botmine/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace botmine {

double iou(const PatchLocation& a, const PatchLocation& b) {
  const double ix = std::max(0, std::min(a.x + a.side, b.x + b.side) - std::max(a.x, b.x));
  const double iy = std::max(0, std::min(a.y + a.side, b.y + b.side) - std::max(a.y, b.y));
  const double inter = ix * iy;
  const double uni = static_cast<double>(a.side) * a.side + static_cast<double>(b.side) * b.side - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

GrayImage mirror(const GrayImage& img) {
  GrayImage out = GrayImage::zeros(img.width, img.height);
  for (int y = 0; y < img.height; ++y) {
    const float* src = &img.pixels[static_cast<size_t>(y) * img.width];
    float* dst = &out.pixels[static_cast<size_t>(y) * img.width];
    for (int x = 0; x < img.width; ++x) dst[x] = src[img.width - 1 - x];
  }
  return out;
}

GrayImage resize_bilinear(const GrayImage& img, int out_w, int out_h) {
  if (out_w <= 0 || out_h <= 0) throw InvalidRegionError("resize: non-positive target size");
  if (out_w == img.width && out_h == img.height) return img;

  GrayImage out = GrayImage::zeros(out_w, out_h);
  const double sx = static_cast<double>(img.width) / out_w;
  const double sy = static_cast<double>(img.height) / out_h;
  for (int y = 0; y < out_h; ++y) {
    const double fy = (y + 0.5) * sy - 0.5;
    const int y0 = std::clamp(static_cast<int>(std::floor(fy)), 0, img.height - 1);
    const int y1 = std::min(y0 + 1, img.height - 1);
    const double wy = std::clamp(fy - y0, 0.0, 1.0);
    for (int x = 0; x < out_w; ++x) {
      const double fx = (x + 0.5) * sx - 0.5;
      const int x0 = std::clamp(static_cast<int>(std::floor(fx)), 0, img.width - 1);
      const int x1 = std::min(x0 + 1, img.width - 1);
      const double wx = std::clamp(fx - x0, 0.0, 1.0);
      const double top = (1.0 - wx) * img.at(x0, y0) + wx * img.at(x1, y0);
      const double bot = (1.0 - wx) * img.at(x0, y1) + wx * img.at(x1, y1);
      out.at(x, y) = static_cast<float>((1.0 - wy) * top + wy * bot);
    }
  }
  return out;
}

GrayImage crop(const GrayImage& img, const Rect& box) {
  if (box.w <= 0 || box.h <= 0 || box.x < 0 || box.y < 0 || box.x + box.w > img.width ||
      box.y + box.h > img.height) {
    throw InvalidRegionError("crop: bbox [" + std::to_string(box.x) + "," + std::to_string(box.y) +
                             "," + std::to_string(box.w) + "," + std::to_string(box.h) +
                             "] outside " + std::to_string(img.width) + "x" +
                             std::to_string(img.height) + " image");
  }
  GrayImage out = GrayImage::zeros(box.w, box.h);
  for (int y = 0; y < box.h; ++y) {
    const float* src = &img.pixels[static_cast<size_t>(y + box.y) * img.width + box.x];
    std::copy(src, src + box.w, &out.pixels[static_cast<size_t>(y) * box.w]);
  }
  return out;
}

GrayImage preprocess(const GrayImage& img, const Rect& bbox, int target_width) {
  if (target_width < 64) throw ConfigError("preprocess: target width must be >= 64");
  GrayImage region = crop(img, bbox);
  const int out_h = static_cast<int>(std::lround(
      static_cast<double>(region.height) * target_width / region.width));
  if (out_h < 64) {
    throw TooSmallError("preprocess: scaled height " + std::to_string(out_h) + " is below 64");
  }
  return resize_bilinear(region, target_width, out_h);
}

}  // namespace botmine
