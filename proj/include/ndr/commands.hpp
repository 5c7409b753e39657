#pragma once

// Subcommands of the `ndr` binary. Each throws ndr::Error on failure;
// run_cli maps that to a nonzero exit code.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ndr/config.hpp"
#include "ndr/metrics.hpp"

namespace ndr {

struct CommandOptions {
  std::optional<std::filesystem::path> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> steps;
  std::optional<double> lambda;
  std::optional<std::size_t> alt_steps;
  std::optional<std::filesystem::path> out;
  std::optional<std::filesystem::path> ckpt;
  std::optional<std::filesystem::path> data;   // dataset directory (eval)
  std::optional<std::filesystem::path> image;  // inspect-ndr probe image
  std::filesystem::path input;                 // infer
  std::filesystem::path output;                // infer
  std::vector<std::string> variants;           // ablate
  bool pad = false;
};

/// Config file (or defaults) with command-line overrides applied.
RunConfig resolve_config(const CommandOptions& opts);

void cmd_synth(const CommandOptions& opts, std::ostream& log);
TrainOutcome cmd_train(const CommandOptions& opts, std::ostream& log);
MetricReport cmd_eval(const CommandOptions& opts, std::ostream& log);
void cmd_infer(const CommandOptions& opts, std::ostream& log);
void cmd_inspect_ndr(const CommandOptions& opts, std::ostream& log);
AblationReport cmd_ablate(const CommandOptions& opts, std::ostream& log);

/// Restores an image whose sides need not be divisible by the model's
/// downsampling factor: with `pad` the image is edge-padded and cropped back,
/// otherwise a DimensionError explains the constraint.
Image restore_image(const RestoreModel& model, const Image& img, bool pad, std::ostream& log);

/// Writes <dir>/<name>.csv, <name>.f32 (little-endian float32) and <name>.json
/// (shape sidecar).
void dump_tensor(const Tensor& t, const std::filesystem::path& dir, const std::string& name);

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ndr
