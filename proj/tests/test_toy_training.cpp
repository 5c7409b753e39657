// Full-length toy run on noise only (sigma 25): 300 images, 2000 steps at
// the default configuration. Takes several minutes.

#include <gtest/gtest.h>

#include "ndr/config.hpp"

namespace ndr {
namespace {

struct NoiseRun {
  double first100 = 0.0, last100 = 0.0;
  MetricReport report;
  double mse_degrade = 0.0, mse_identity = 0.0;  // mse(x', x) and mse(y, x) on held-out pairs
};

double mse(const Tensor& a, const Tensor& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return acc / static_cast<double>(a.numel());
}

const NoiseRun& noise_run() {
  static const NoiseRun run = [] {
    RunConfig rc;
    rc.set_seed(0);
    rc.dataset.count = 300;
    rc.dataset.mixture = {1.0, 0.0, 0.0, 0.0};
    rc.train.eval_every = 0;
    const auto heldout = make_heldout(rc.dataset, 32, mix_seed(rc.seed, 777));
    Trainer trainer(rc.train, make_dataset(rc.dataset), heldout);
    NoiseRun r;
    for (std::size_t i = 0; i < rc.train.steps; ++i) {
      const double loss = trainer.step().total;
      if (i < 100) r.first100 += loss / 100.0;
      if (i >= rc.train.steps - 100) r.last100 += loss / 100.0;
    }
    r.report = trainer.evaluate_heldout();
    NoGradGuard no_grad;
    for (const Sample& s : heldout) {
      const Tensor x = to_tensor(s.degraded), y = to_tensor(s.clean);
      const Tensor x_prime = trainer.system().degrade.forward(y, trainer.system().restore.forward(x).u);
      r.mse_degrade += mse(x_prime, x) / static_cast<double>(heldout.size());
      r.mse_identity += mse(y, x) / static_cast<double>(heldout.size());
    }
    std::printf("noise-only toy: loss %.5f -> %.5f (ratio %.3f); PSNR %.3f -> %.3f dB; mse(x',x) %.6f vs mse(y,x) %.6f\n",
                r.first100, r.last100, r.last100 / r.first100, r.report.overall.psnr_degraded,
                r.report.overall.psnr_restored, r.mse_degrade, r.mse_identity);
    return r;
  }();
  return run;
}

TEST(ToyNoise, RestoredPsnrBeatsDegraded) {
  EXPECT_GT(noise_run().report.overall.psnr_restored, noise_run().report.overall.psnr_degraded);
}

TEST(ToyNoise, DegradeMovesCleanTowardDegraded) {
  EXPECT_LT(noise_run().mse_degrade, noise_run().mse_identity);
}

TEST(ToyNoise, LossHalvesOverTraining) {
  EXPECT_LT(noise_run().last100, 0.5 * noise_run().first100);
}

}  // namespace
}  // namespace ndr
