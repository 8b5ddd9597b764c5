#include "botmine/image_io.hpp"

#include <jpeglib.h>
#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <memory>

namespace botmine {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

float luma(float r, float g, float b) { return 0.299f * r + 0.587f * g + 0.114f * b; }

GrayImage read_png_file(const std::string& path, std::FILE* fp) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("read_image: libpng init failed for " + path);
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("read_image: corrupt PNG " + path);
  }
  png_init_io(png, fp);
  png_read_info(png, info);

  // Normalize everything to 8-bit RGB without alpha.
  png_set_expand(png);
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_set_gray_to_rgb(png);
  png_read_update_info(png, info);

  const int w = static_cast<int>(png_get_image_width(png, info));
  const int h = static_cast<int>(png_get_image_height(png, info));
  std::vector<unsigned char> row(static_cast<size_t>(w) * 3);

  GrayImage img = GrayImage::zeros(w, h);
  for (int y = 0; y < h; ++y) {
    png_read_row(png, row.data(), nullptr);
    for (int x = 0; x < w; ++x) {
      img.at(x, y) =
          luma(row[3 * x] / 255.0f, row[3 * x + 1] / 255.0f, row[3 * x + 2] / 255.0f);
    }
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

struct JpegErrorMgr {
  jpeg_error_mgr pub;
  std::jmp_buf jump;
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
  std::longjmp(err->jump, 1);
}

GrayImage read_jpeg_file(const std::string& path, std::FILE* fp) {
  jpeg_decompress_struct cinfo;
  JpegErrorMgr jerr;
  cinfo.err = jpeg_std_error(&jerr.pub);
  jerr.pub.error_exit = jpeg_error_exit;
  if (setjmp(jerr.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw DataError("read_image: corrupt JPEG " + path);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, fp);
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);

  const int w = static_cast<int>(cinfo.output_width);
  const int h = static_cast<int>(cinfo.output_height);
  std::vector<unsigned char> row(static_cast<size_t>(w) * 3);
  unsigned char* rows[1] = {row.data()};

  GrayImage img = GrayImage::zeros(w, h);
  for (int y = 0; y < h; ++y) {
    jpeg_read_scanlines(&cinfo, rows, 1);
    for (int x = 0; x < w; ++x) {
      img.at(x, y) =
          luma(row[3 * x] / 255.0f, row[3 * x + 1] / 255.0f, row[3 * x + 2] / 255.0f);
    }
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return img;
}

unsigned char to_byte(float v) {
  return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

void write_png_rows(const std::string& path, int w, int h, int channels,
                    const std::vector<unsigned char>& bytes) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw DataError("write_png: cannot open " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw DataError("write_png: libpng init failed for " + path);
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw DataError("write_png: failed writing " + path);
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, w, h, 8,
               channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < h; ++y) {
    png_write_row(png, const_cast<unsigned char*>(&bytes[static_cast<size_t>(y) * w * channels]));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

GrayImage read_image(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw DataError("read_image: cannot open " + path);
  unsigned char magic[4] = {0, 0, 0, 0};
  const size_t got = std::fread(magic, 1, sizeof(magic), fp.get());
  std::rewind(fp.get());
  if (got >= 4 && magic[0] == 0x89 && magic[1] == 'P' && magic[2] == 'N' && magic[3] == 'G') {
    return read_png_file(path, fp.get());
  }
  if (got >= 2 && magic[0] == 0xFF && magic[1] == 0xD8) {
    return read_jpeg_file(path, fp.get());
  }
  throw DataError("read_image: " + path + " is neither PNG nor JPEG");
}

void write_png(const std::string& path, const GrayImage& img) {
  std::vector<unsigned char> bytes(img.pixels.size());
  for (size_t i = 0; i < img.pixels.size(); ++i) bytes[i] = to_byte(img.pixels[i]);
  write_png_rows(path, img.width, img.height, 1, bytes);
}

RgbImage RgbImage::from_gray(const GrayImage& img) {
  RgbImage out;
  out.width = img.width;
  out.height = img.height;
  out.pixels.resize(img.pixels.size() * 3);
  for (size_t i = 0; i < img.pixels.size(); ++i) {
    out.pixels[3 * i] = out.pixels[3 * i + 1] = out.pixels[3 * i + 2] = img.pixels[i];
  }
  return out;
}

void RgbImage::set(int x, int y, float r, float g, float b) {
  if (x < 0 || y < 0 || x >= width || y >= height) return;
  float* p = &pixels[(static_cast<size_t>(y) * width + x) * 3];
  p[0] = r;
  p[1] = g;
  p[2] = b;
}

void write_png(const std::string& path, const RgbImage& img) {
  std::vector<unsigned char> bytes(img.pixels.size());
  for (size_t i = 0; i < img.pixels.size(); ++i) bytes[i] = to_byte(img.pixels[i]);
  write_png_rows(path, img.width, img.height, 3, bytes);
}

void draw_box(RgbImage& img, const PatchLocation& loc, const std::array<float, 3>& rgb) {
  for (int x = loc.x; x < loc.x + loc.side; ++x) {
    img.set(x, loc.y, rgb[0], rgb[1], rgb[2]);
    img.set(x, loc.y + loc.side - 1, rgb[0], rgb[1], rgb[2]);
  }
  for (int y = loc.y; y < loc.y + loc.side; ++y) {
    img.set(loc.x, y, rgb[0], rgb[1], rgb[2]);
    img.set(loc.x + loc.side - 1, y, rgb[0], rgb[1], rgb[2]);
  }
}

}  // namespace botmine
