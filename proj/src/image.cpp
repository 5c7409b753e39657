#include "ndr/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>

namespace ndr {

namespace {

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void write_png(const Image& img, const std::filesystem::path& path) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw Error("cannot open " + path.string() + " for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw Error("libpng initialization failed");
  }
  std::vector<std::uint8_t> bytes(img.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = to_byte(img.values[i]);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error("failed writing " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (std::size_t y = 0; y < img.height; ++y) png_write_row(png, bytes.data() + y * img.width * 3);
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

Image read_png(const std::filesystem::path& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw Error("cannot open " + path.string());
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error("libpng initialization failed");
  }
  Image img;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error("failed reading " + path.string());
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_set_palette_to_rgb(png);
  png_set_expand_gray_1_2_4_to_8(png);
  png_set_gray_to_rgb(png);
  png_read_update_info(png, info);
  const std::size_t h = png_get_image_height(png, info);
  const std::size_t w = png_get_image_width(png, info);
  std::vector<std::uint8_t> bytes(h * w * 3);
  for (std::size_t y = 0; y < h; ++y) png_read_row(png, bytes.data() + y * w * 3, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  img = Image(h, w);
  for (std::size_t i = 0; i < bytes.size(); ++i) img.values[i] = bytes[i] / 255.0;
  return img;
}

void write_ppm(const Image& img, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os << "P3\n" << img.width << ' ' << img.height << "\n255\n";
  for (std::size_t y = 0; y < img.height; ++y) {
    for (std::size_t x = 0; x < img.width * 3; ++x) {
      os << static_cast<int>(to_byte(img.values[y * img.width * 3 + x])) << (x + 1 < img.width * 3 ? ' ' : '\n');
    }
  }
  if (!os) throw Error("failed writing " + path.string());
}

Image read_ppm(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open " + path.string());
  std::string magic;
  std::size_t w = 0, h = 0;
  int maxval = 0;
  is >> magic >> w >> h >> maxval;
  if (magic != "P3" || w == 0 || h == 0 || maxval <= 0) throw Error(path.string() + ": not a plain PPM");
  Image img(h, w);
  for (double& v : img.values) {
    int byte = 0;
    if (!(is >> byte)) throw Error(path.string() + ": truncated pixel data");
    v = static_cast<double>(byte) / maxval;
  }
  return img;
}

}  // namespace

void Image::clamp() {
  for (double& v : values) v = std::clamp(v, 0.0, 1.0);
}

Tensor stack_images(const std::vector<const Image*>& images) {
  if (images.empty()) throw DimensionError("stack_images: empty batch");
  const std::size_t h = images.front()->height, w = images.front()->width;
  Tensor t({images.size(), h, w, 3});
  auto out = t.data();
  for (std::size_t n = 0; n < images.size(); ++n) {
    if (images[n]->height != h || images[n]->width != w) throw DimensionError("stack_images: size mismatch");
    std::copy(images[n]->values.begin(), images[n]->values.end(), out.begin() + n * h * w * 3);
  }
  return t;
}

Tensor to_tensor(const Image& img) { return stack_images({&img}); }

Image from_tensor(const Tensor& t, std::size_t index) {
  if (t.rank() != 4 || t.dim(3) != 3 || index >= t.dim(0)) {
    throw DimensionError("from_tensor: expected [N,H,W,3], got " + shape_str(t.shape()));
  }
  Image img(t.dim(1), t.dim(2));
  const auto src = t.data().subspan(index * img.size(), img.size());
  std::copy(src.begin(), src.end(), img.values.begin());
  return img;
}

void save_image(const Image& img, const std::filesystem::path& path) {
  if (path.extension() == ".ppm") write_ppm(img, path);
  else write_png(img, path);
}

Image load_image(const std::filesystem::path& path) {
  if (path.extension() == ".ppm") return read_ppm(path);
  return read_png(path);
}

Image quantize8(const Image& img) {
  Image out = img;
  for (double& v : out.values) v = to_byte(v) / 255.0;
  return out;
}

}  // namespace ndr
