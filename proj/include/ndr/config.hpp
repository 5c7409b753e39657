#pragma once

// Run configuration file (JSON). Every field is optional and falls back to
// its default; unknown keys are rejected.
//
// {
//   "seed": 0,
//   "train":   { "lambda", "lr", "batch_size", "crop_size", "steps", "weight_decay",
//                "beta1", "beta2", "eps", "alt_steps", "detach_degradation",
//                "eval_every", "eval_per_kind", "checkpoint_every" },
//   "model":   { "channels", "scales", "M", "N", "K", "variant" },
//   "dataset": { "count", "size", "seed", "dir", "noise_sigmas",
//                "mixture": { "noise", "rain", "haze", "downsample" } },
//   "output":  { "dir" }
// }

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "ndr/degrade.hpp"
#include "ndr/train.hpp"

namespace ndr {

class ConfigError : public Error {
 public:
  using Error::Error;
};

struct RunConfig {
  std::uint64_t seed = 0;
  TrainingConfig train;
  DatasetConfig dataset;
  std::filesystem::path dataset_dir;  // empty: synthesize in memory
  std::filesystem::path output_dir = "runs/default";

  RunConfig();
  /// Applies the top-level seed to the training, model and dataset streams.
  void set_seed(std::uint64_t s);
  /// Fully resolved configuration, including defaults.
  nlohmann::json to_json() const;
  void validate() const;
};

RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace ndr
