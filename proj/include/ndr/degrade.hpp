#pragma once

// Synthetic degradations and paired dataset generation.

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "ndr/image.hpp"
#include "ndr/rng.hpp"

namespace ndr {

enum class DegradationKind { noise, rain, haze, downsample };

inline constexpr std::array<DegradationKind, 4> kAllKinds = {
    DegradationKind::noise, DegradationKind::rain, DegradationKind::haze, DegradationKind::downsample};

std::string to_string(DegradationKind kind);
DegradationKind parse_kind(const std::string& name);

struct NoiseParams {
  double sigma = 25.0;  // 0-255 scale
};

struct RainParams {
  double density = 0.02;    // probability that a pixel seeds a streak
  double angle_deg = 0.0;   // streak tilt away from vertical
  double length = 7.0;      // pixels
  double intensity = 0.5;   // peak brightness added by a streak
};

struct HazeParams {
  double transmission = 0.6;
  double airlight = 0.85;
};

struct DownsampleParams {
  std::size_t scale = 2;
};

struct DegradationSpec {
  DegradationKind kind = DegradationKind::noise;
  std::variant<NoiseParams, RainParams, HazeParams, DownsampleParams> params = NoiseParams{};
  std::uint64_t seed = 0;

  void validate() const;
  nlohmann::json params_json() const;
  static DegradationSpec from_json(DegradationKind kind, const nlohmann::json& params, std::uint64_t seed);
};

// --- generators -------------------------------------------------------------

/// out = clamp(img + n), n ~ N(0, (sigma/255)^2) per element.
Image add_gaussian_noise(const Image& img, double sigma, std::uint64_t seed);

/// Nonnegative streak layer of one channel, [height*width].
std::vector<double> rain_layer(std::size_t height, std::size_t width, const RainParams& p, std::uint64_t seed);
/// Offsets (dy, dx) covered by the oriented line kernel.
std::vector<std::pair<int, int>> streak_kernel(const RainParams& p);
/// out = clamp(img + R) with R broadcast to all channels.
Image add_rain_streaks(const Image& img, const RainParams& p, std::uint64_t seed);

/// Atmospheric scattering with constant transmission: img*t + A*(1-t).
/// t = 0 is rejected unless `allow_opaque` is set.
Image apply_haze(const Image& img, double transmission, double airlight, bool allow_opaque = false);

/// Box filter: each output pixel is the mean of an s x s block.
Image downsample(const Image& img, std::size_t scale = 2);
/// Point sampling of every s-th pixel (aliased).
Image decimate(const Image& img, std::size_t scale = 2);

/// Procedural clean image: gradient background, shapes and smooth texture.
Image procedural_pattern(std::size_t height, std::size_t width, std::uint64_t seed);

// --- datasets ----------------------------------------------------------------

struct Sample {
  std::size_t id = 0;
  DegradationSpec spec;
  std::size_t size = 32;
  Image clean;
  Image degraded;
};

/// Builds the (clean, degraded) pair for a spec. For downsample the pattern
/// is drawn at scale*size; the target is its box-filtered version and the
/// input its decimated version, so both share one resolution.
Sample make_sample(std::size_t id, std::size_t size, const DegradationSpec& spec);

struct DatasetConfig {
  std::size_t count = 8;
  std::size_t size = 32;
  std::uint64_t seed = 0;
  /// Relative weights per kind; kinds with weight 0 never appear.
  std::array<double, 4> mixture = {1.0, 0.0, 0.0, 0.0};
  std::vector<double> noise_sigmas = {15.0, 25.0, 50.0};

  void validate() const;
};

/// Draws a random spec of the given kind with the artifact's parameter ranges.
DegradationSpec draw_spec(DegradationKind kind, const DatasetConfig& cfg, Rng& rng);

/// Sample i is drawn from its own stream mix_seed(cfg.seed, i), so the
/// result is independent of evaluation order.
std::vector<Sample> make_dataset(const DatasetConfig& cfg);
/// `per_kind` samples of each listed kind, for held-out evaluation.
std::vector<Sample> make_heldout(const DatasetConfig& cfg, std::size_t per_kind, std::uint64_t seed);

/// Writes <dir>/clean/<id>.png, <dir>/degraded/<id>.png and <dir>/manifest.json.
void write_dataset(const std::vector<Sample>& samples, const std::filesystem::path& dir);
/// Reads a dataset back from its manifest (images loaded from disk).
std::vector<Sample> load_dataset(const std::filesystem::path& dir);
/// Rebuilds every sample from the manifest's specs alone.
std::vector<Sample> regenerate_from_manifest(const std::filesystem::path& manifest_path);

}  // namespace ndr
