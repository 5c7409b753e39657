#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "ndr/degrade.hpp"

namespace ndr {
namespace {

namespace fs = std::filesystem;

Image constant(std::size_t h, std::size_t w, double v) { return Image(h, w, v); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ndr_test_" + name);
  fs::remove_all(p);
  return p;
}

TEST(Noise, ZeroSigmaIsIdentity) {
  const Image img = procedural_pattern(16, 16, 3);
  EXPECT_EQ(add_gaussian_noise(img, 0.0, 9), img);
}

TEST(Noise, SampleStdMatchesSigma) {
  const Image img = constant(64, 64, 0.5);
  const Image out = add_gaussian_noise(img, 25.0, 11);
  double mean = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < img.size(); ++i) {
    const double d = out.values[i] - img.values[i];
    mean += d;
    sq += d * d;
  }
  const double n = static_cast<double>(img.size());
  mean /= n;
  const double sd = std::sqrt(sq / n - mean * mean);
  EXPECT_NEAR(sd, 25.0 / 255.0, 0.05 * 25.0 / 255.0);
}

TEST(Noise, FixedSeedIsReproducible) {
  const Image img = procedural_pattern(16, 16, 4);
  EXPECT_EQ(add_gaussian_noise(img, 15.0, 77), add_gaussian_noise(img, 15.0, 77));
  EXPECT_NE(add_gaussian_noise(img, 15.0, 77), add_gaussian_noise(img, 15.0, 78));
}

TEST(Noise, NegativeSigmaThrows) { EXPECT_THROW(add_gaussian_noise(constant(4, 4, 0.5), -1.0, 0), Error); }

TEST(Rain, ZeroDensityIsIdentity) {
  const Image img = procedural_pattern(16, 16, 5);
  EXPECT_EQ(add_rain_streaks(img, {0.0, 10.0, 7.0, 0.5}, 3), img);
}

TEST(Rain, LayerIsNonNegative) {
  const auto layer = rain_layer(32, 32, {0.05, -20.0, 9.0, 0.6}, 8);
  for (double v : layer) EXPECT_GE(v, 0.0);
  const Image img = procedural_pattern(32, 32, 6);
  const Image out = add_rain_streaks(img, {0.05, -20.0, 9.0, 0.6}, 8);
  for (std::size_t i = 0; i < img.size(); ++i) EXPECT_GE(out.values[i], img.values[i]);
}

TEST(Rain, CoverageTracksDensity) {
  const RainParams p{0.05, 15.0, 7.0, 0.5};
  const auto layer = rain_layer(128, 128, p, 21);
  std::size_t hit = 0;
  for (double v : layer) hit += v > 0.0;
  const double measured = static_cast<double>(hit) / static_cast<double>(layer.size());
  // A pixel stays dry only if none of the positions its footprint reaches seeded a streak.
  const double expected = 1.0 - std::pow(1.0 - p.density, static_cast<double>(streak_kernel(p).size()));
  EXPECT_GE(measured, 0.5 * expected);
  EXPECT_LE(measured, 2.0 * expected);
}

TEST(Rain, InvalidDensityThrows) { EXPECT_THROW(rain_layer(8, 8, {1.5, 0.0, 5.0, 0.5}, 0), Error); }

TEST(Haze, UnitTransmissionIsIdentity) {
  const Image img = procedural_pattern(16, 16, 7);
  EXPECT_EQ(apply_haze(img, 1.0, 0.8), img);
}

TEST(Haze, OpaqueLimitGivesAirlight) {
  const Image out = apply_haze(procedural_pattern(8, 8, 8), 0.0, 0.9, true);
  for (double v : out.values) EXPECT_DOUBLE_EQ(v, 0.9);
  EXPECT_THROW(apply_haze(procedural_pattern(8, 8, 8), 0.0, 0.9), Error);
}

TEST(Haze, ClosedForm) {
  const Image out = apply_haze(constant(4, 4, 0.2), 0.5, 0.9);
  for (double v : out.values) EXPECT_NEAR(v, 0.55, 1e-15);
}

TEST(Downsample, ConstantStaysConstant) {
  for (double v : downsample(constant(8, 6, 0.3)).values) EXPECT_DOUBLE_EQ(v, 0.3);
}

TEST(Downsample, CheckerBlockAverages) {
  Image img(2, 2);
  for (std::size_t c = 0; c < 3; ++c) {
    img.at(0, 1, c) = 1.0;
    img.at(1, 0, c) = 1.0;
  }
  const Image out = downsample(img);
  ASSERT_EQ(out.height, 1u);
  for (double v : out.values) EXPECT_EQ(v, 0.5);
}

TEST(Downsample, MatchesBlockAverageOracle) {
  const Image img = procedural_pattern(12, 10, 9);
  const Image out = downsample(img, 2);
  for (std::size_t y = 0; y < 6; ++y)
    for (std::size_t x = 0; x < 5; ++x)
      for (std::size_t c = 0; c < 3; ++c) {
        const double expected = (img.at(2 * y, 2 * x, c) + img.at(2 * y, 2 * x + 1, c) + img.at(2 * y + 1, 2 * x, c) +
                                 img.at(2 * y + 1, 2 * x + 1, c)) / 4.0;
        EXPECT_EQ(out.at(y, x, c), expected);
      }
}

TEST(Downsample, OddSizeThrows) { EXPECT_THROW(downsample(constant(5, 4, 0.0)), DimensionError); }

TEST(Dataset, NoiseOnlyMixture) {
  DatasetConfig cfg;
  cfg.count = 8;
  cfg.mixture = {1.0, 0.0, 0.0, 0.0};
  const auto samples = make_dataset(cfg);
  ASSERT_EQ(samples.size(), 8u);
  for (const auto& s : samples) EXPECT_EQ(s.spec.kind, DegradationKind::noise);
}

TEST(Dataset, ThreeKindCountsWithinMultinomialBounds) {
  DatasetConfig cfg;
  cfg.count = 300;
  cfg.size = 8;
  cfg.seed = 5;
  cfg.mixture = {1.0, 1.0, 1.0, 0.0};
  std::map<DegradationKind, int> counts;
  for (const auto& s : make_dataset(cfg)) ++counts[s.spec.kind];
  EXPECT_EQ(counts.size(), 3u);
  for (auto [kind, n] : counts) {
    EXPECT_GE(n, 80) << to_string(kind);
    EXPECT_LE(n, 120) << to_string(kind);
  }
}

TEST(Dataset, EveryGeneratorStaysInRangeAndDegrades) {
  DatasetConfig cfg;
  cfg.count = 40;
  cfg.size = 16;
  cfg.mixture = {1.0, 1.0, 1.0, 1.0};
  for (const auto& s : make_dataset(cfg)) {
    double mse = 0.0;
    for (std::size_t i = 0; i < s.clean.size(); ++i) {
      EXPECT_GE(s.degraded.values[i], 0.0);
      EXPECT_LE(s.degraded.values[i], 1.0);
      EXPECT_GE(s.clean.values[i], 0.0);
      EXPECT_LE(s.clean.values[i], 1.0);
      mse += std::pow(s.clean.values[i] - s.degraded.values[i], 2);
    }
    mse /= static_cast<double>(s.clean.size());
    const double psnr = 10.0 * std::log10(1.0 / mse);
    EXPECT_TRUE(std::isfinite(psnr));
    EXPECT_LT(psnr, 50.0) << to_string(s.spec.kind);
    EXPECT_EQ(s.degraded.height, s.clean.height);
  }
}

TEST(Dataset, InvalidMixtureThrows) {
  DatasetConfig cfg;
  cfg.mixture = {0.0, 0.0, 0.0, 0.0};
  EXPECT_THROW(make_dataset(cfg), Error);
  cfg.mixture = {1.0, -1.0, 0.0, 0.0};
  EXPECT_THROW(make_dataset(cfg), Error);
}

TEST(Dataset, SpecRangesAreEnforced) {
  EXPECT_THROW((DegradationSpec{DegradationKind::noise, NoiseParams{30.0}, 0}.validate()), Error);
  EXPECT_THROW((DegradationSpec{DegradationKind::haze, HazeParams{0.5, 0.3}, 0}.validate()), Error);
  EXPECT_THROW((DegradationSpec{DegradationKind::haze, HazeParams{0.0, 0.8}, 0}.validate()), Error);
}

TEST(Dataset, SameSeedGivesByteIdenticalFiles) {
  DatasetConfig cfg;
  cfg.count = 6;
  cfg.size = 16;
  cfg.mixture = {1.0, 1.0, 1.0, 1.0};
  const fs::path a = scratch("ds_a"), b = scratch("ds_b");
  write_dataset(make_dataset(cfg), a);
  write_dataset(make_dataset(cfg), b);
  for (const auto& entry : fs::recursive_directory_iterator(a)) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), a);
    EXPECT_EQ(slurp(entry.path()), slurp(b / rel)) << rel;
  }
}

TEST(Dataset, RegenerationFromManifestIsBitExact) {
  DatasetConfig cfg;
  cfg.count = 5;
  cfg.size = 16;
  cfg.mixture = {1.0, 1.0, 1.0, 1.0};
  const auto samples = make_dataset(cfg);
  const fs::path dir = scratch("ds_regen");
  write_dataset(samples, dir);
  const auto again = regenerate_from_manifest(dir / "manifest.json");
  ASSERT_EQ(again.size(), samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    EXPECT_EQ(again[i].clean, samples[i].clean);
    EXPECT_EQ(again[i].degraded, samples[i].degraded);
  }
  const auto loaded = load_dataset(dir);
  for (std::size_t i = 0; i < samples.size(); ++i) EXPECT_EQ(loaded[i].degraded, quantize8(samples[i].degraded));
}

TEST(Dataset, ResultDoesNotDependOnSampleCount) {
  DatasetConfig cfg;
  cfg.size = 8;
  cfg.mixture = {1.0, 1.0, 1.0, 0.0};
  cfg.count = 4;
  const auto small = make_dataset(cfg);
  cfg.count = 9;
  const auto large = make_dataset(cfg);
  for (std::size_t i = 0; i < small.size(); ++i) EXPECT_EQ(small[i].degraded, large[i].degraded);
}

TEST(Images, PngAndPpmRoundTrip) {
  const Image img = quantize8(procedural_pattern(10, 12, 13));
  const fs::path dir = scratch("img");
  fs::create_directories(dir);
  for (const char* ext : {".png", ".ppm"}) {
    save_image(img, dir / (std::string("a") + ext));
    EXPECT_EQ(load_image(dir / (std::string("a") + ext)), img) << ext;
  }
}

}  // namespace
}  // namespace ndr
