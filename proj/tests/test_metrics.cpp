#include <gtest/gtest.h>

#include <cmath>

#include "ndr/metrics.hpp"

namespace ndr {
namespace {

Image random_image(std::size_t h, std::size_t w, std::uint64_t seed) {
  Rng rng(seed);
  Image img(h, w);
  for (double& v : img.values) v = rng.uniform();
  return img;
}

TEST(Psnr, IdenticalImagesHitCap) {
  const Image a = random_image(8, 8, 1);
  EXPECT_EQ(psnr(a, a), 100.0);
}

TEST(Psnr, QuarterMse) {
  const Image a(4, 4, 0.0), b(4, 4, 0.5);
  EXPECT_NEAR(psnr(a, b), 6.0206, 1e-4);
}

TEST(Psnr, MatchesDirectFormula) {
  const Image a = random_image(9, 7, 2), b = random_image(9, 7, 3);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a.values[i] - b.values[i]) * (a.values[i] - b.values[i]);
  EXPECT_NEAR(psnr(a, b), -10.0 * std::log10(acc / static_cast<double>(a.size())), 1e-9);
}

TEST(Psnr, SizeMismatchThrows) { EXPECT_THROW(psnr(Image(4, 4), Image(4, 5)), DimensionError); }

TEST(Ssim, IdenticalImagesGiveExactlyOne) {
  const Image a = random_image(16, 16, 4);
  EXPECT_EQ(ssim(a, a), 1.0);
}

TEST(Ssim, ApproachesOneAsOffsetShrinks) {
  const Image base(16, 16, 0.5);
  double prev = -1.0;
  for (double eps : {0.2, 0.1, 0.05, 0.01, 0.001}) {
    const double s = ssim(base, Image(16, 16, 0.5 + eps));
    EXPECT_GT(s, prev);
    prev = s;
  }
  EXPECT_NEAR(prev, 1.0, 1e-5);
}

TEST(Ssim, StrongerNoiseScoresLower) {
  const Image clean = procedural_pattern(32, 32, 5);
  const double s15 = ssim(clean, add_gaussian_noise(clean, 15.0, 6));
  const double s50 = ssim(clean, add_gaussian_noise(clean, 50.0, 6));
  EXPECT_LT(s50, s15);
}

TEST(Ssim, IsSymmetric) {
  const Image a = random_image(12, 12, 7), b = random_image(12, 12, 8);
  EXPECT_DOUBLE_EQ(ssim(a, b), ssim(b, a));
}

TEST(Ssim, TooSmallForWindowThrows) { EXPECT_THROW(ssim(Image(8, 8), Image(8, 8)), DimensionError); }

TEST(Evaluate, BaselineReportsDegradedPsnr) {
  DatasetConfig cfg;
  cfg.count = 6;
  cfg.size = 16;
  cfg.mixture = {1.0, 1.0, 1.0, 0.0};
  const auto samples = make_dataset(cfg);
  const MetricReport r = evaluate(nullptr, samples);
  ASSERT_EQ(r.samples.size(), samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    EXPECT_DOUBLE_EQ(r.samples[i].psnr_restored, psnr(samples[i].degraded, samples[i].clean));
    EXPECT_DOUBLE_EQ(r.samples[i].psnr_restored, r.samples[i].psnr_degraded);
  }
  EXPECT_DOUBLE_EQ(r.mean_psnr_gain(), 0.0);
}

TEST(Evaluate, IdentityModelMatchesBaseline) {
  DatasetConfig cfg;
  cfg.count = 4;
  cfg.size = 16;
  const auto samples = make_dataset(cfg);
  ModelConfig mc;
  RestoreModel model(mc);
  const MetricReport r = evaluate(&model, samples);
  for (const auto& s : r.samples) EXPECT_DOUBLE_EQ(s.psnr_restored, s.psnr_degraded);
}

TEST(Separation, ConstantColumnDictionaryIsUniform) {
  ModelConfig mc;
  RestoreModel model(mc);
  for (std::size_t m = 0; m < mc.feature_dim; ++m)
    for (std::size_t n = 0; n < mc.slots; ++n) model.dictionary().D.at({m, n}) = 0.01 * static_cast<double>(m);
  DatasetConfig cfg;
  cfg.count = 12;
  cfg.size = 16;
  cfg.mixture = {1.0, 1.0, 1.0, 0.0};
  const SeparationReport r = affinity_separation(model, make_dataset(cfg));
  for (const auto& p : r.profiles)
    for (double v : p.mean_row) EXPECT_NEAR(v, 1.0 / 8.0, 1e-12);
  EXPECT_FALSE(r.capped);
  EXPECT_NEAR(r.rho, 1.0, 1e-9);
}

TEST(Separation, OneHotClassesHitTheCap) {
  std::vector<AffinityProfile> profiles = {
      {{1, 0, 0}, "noise"}, {{1, 0, 0}, "noise"}, {{0, 1, 0}, "rain"}, {{0, 1, 0}, "rain"}};
  const SeparationReport r = affinity_separation(profiles);
  EXPECT_EQ(r.d_intra, 0.0);
  EXPECT_NEAR(r.d_inter, std::sqrt(2.0), 1e-15);
  EXPECT_TRUE(r.capped);
  EXPECT_EQ(r.rho, kRhoCap);
}

TEST(Separation, RatioOfMeanDistances) {
  std::vector<AffinityProfile> profiles = {
      {{0.5, 0.5}, "a"}, {{0.6, 0.4}, "a"}, {{0.1, 0.9}, "b"}, {{0.2, 0.8}, "b"}};
  const SeparationReport r = affinity_separation(profiles);
  const double intra = std::sqrt(0.02);
  const double inter = (std::sqrt(0.32) + std::sqrt(0.18) + std::sqrt(0.5) + std::sqrt(0.32)) / 4.0;
  EXPECT_NEAR(r.d_intra, intra, 1e-12);
  EXPECT_NEAR(r.d_inter, inter, 1e-12);
  EXPECT_NEAR(r.rho, inter / intra, 1e-12);
}

TEST(Separation, SingleClassThrows) {
  EXPECT_THROW(affinity_separation({{{1, 0}, "a"}, {{0, 1}, "a"}}), Error);
}

}  // namespace
}  // namespace ndr
