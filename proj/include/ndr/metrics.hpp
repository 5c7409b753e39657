#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ndr/degrade.hpp"
#include "ndr/model.hpp"

namespace ndr {

inline constexpr double kPsnrCap = 100.0;

/// 10*log10(1/mse) on the unit scale; identical images give kPsnrCap.
double psnr(const Image& a, const Image& b);

struct SsimParams {
  std::size_t window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
};

/// Mean SSIM over all valid window positions, averaged across channels.
double ssim(const Image& a, const Image& b, const SsimParams& p = {});

// --- restoration report -------------------------------------------------------

struct SampleScore {
  std::size_t id = 0;
  DegradationKind kind{};
  double psnr_restored = 0.0;
  double ssim_restored = 0.0;
  double psnr_degraded = 0.0;  // baseline: degraded input vs clean
  double ssim_degraded = 0.0;
};

struct KindSummary {
  std::size_t count = 0;
  double psnr_restored = 0.0;
  double ssim_restored = 0.0;
  double psnr_degraded = 0.0;
  double ssim_degraded = 0.0;
};

struct MetricReport {
  std::vector<SampleScore> samples;
  std::map<std::string, KindSummary> by_kind;
  KindSummary overall;

  /// Mean over kinds of (restored PSNR - degraded PSNR).
  double mean_psnr_gain() const;
  nlohmann::json to_json() const;
  std::string to_csv() const;
};

/// Scores `model` on the samples; without a model the restored image is the
/// degraded input itself (baseline report).
MetricReport evaluate(const RestoreModel* model, const std::vector<Sample>& samples, std::size_t batch = 8);

// --- affinity structure -------------------------------------------------------

struct AffinityProfile {
  std::vector<double> mean_row;  // length N, sums to 1
  std::string label;
};

struct SeparationReport {
  double d_intra = 0.0;
  double d_inter = 0.0;
  double rho = 0.0;
  bool capped = false;  // d_intra fell below the floor; rho holds kRhoCap
  std::vector<AffinityProfile> profiles;

  nlohmann::json to_json() const;
};

inline constexpr double kRhoCap = 1e6;
inline constexpr double kIntraFloor = 1e-12;

/// Mean affinity row of each image from a [B*H*W, N] affinity matrix.
std::vector<std::vector<double>> mean_affinity_rows(const Tensor& affinity, std::size_t batch);

/// rho = mean inter-class L2 distance / mean intra-class L2 distance.
/// Throws if fewer than two classes are present. If all profiles coincide
/// rho is 1.
SeparationReport affinity_separation(const std::vector<AffinityProfile>& profiles);
/// Profiles from the finest-scale affinity of `model` on each sample.
SeparationReport affinity_separation(const RestoreModel& model, const std::vector<Sample>& samples);

}  // namespace ndr
