#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "ndr/tensor.hpp"

namespace ndr {

/// RGB image, values in [0,1], stored HWC.
struct Image {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> values;

  static constexpr std::size_t channels = 3;

  Image() = default;
  Image(std::size_t h, std::size_t w, double fill = 0.0) : height(h), width(w), values(h * w * 3, fill) {}

  double& at(std::size_t y, std::size_t x, std::size_t c) { return values[(y * width + x) * 3 + c]; }
  double at(std::size_t y, std::size_t x, std::size_t c) const { return values[(y * width + x) * 3 + c]; }
  std::size_t size() const { return values.size(); }

  void clamp();
  bool operator==(const Image&) const = default;
};

/// [N,H,W,3] tensor from same-sized images.
Tensor stack_images(const std::vector<const Image*>& images);
Tensor to_tensor(const Image& img);
/// Extracts batch item `index` of an [N,H,W,3] tensor.
Image from_tensor(const Tensor& t, std::size_t index = 0);

/// 8-bit RGB. The format follows the extension: ".png" or ".ppm" (plain P3).
void save_image(const Image& img, const std::filesystem::path& path);
Image load_image(const std::filesystem::path& path);

/// Rounds to the 8-bit grid, i.e. what a save/load round trip produces.
Image quantize8(const Image& img);

}  // namespace ndr
