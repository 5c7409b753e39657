#pragma once

// Joint optimization of the restoration and degradation networks:
//   total = mse(x, x') + lambda * mse(y, y_hat)
// with one joint Adam step over both networks and the dictionary.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ndr/checkpoint.hpp"
#include "ndr/degrade.hpp"
#include "ndr/metrics.hpp"
#include "ndr/model.hpp"
#include "ndr/optim.hpp"

namespace ndr {

struct TrainingConfig {
  double lambda = 1.0;
  double lr = 1e-4;
  std::size_t batch_size = 4;
  std::size_t crop_size = 32;
  std::size_t steps = 2000;
  std::uint64_t seed = 0;
  double weight_decay = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  /// 0 = joint steps on the summed loss. k > 0 alternates blocks of k steps
  /// that optimize only the x-reconstruction term, then only the weighted
  /// y-reconstruction term.
  std::size_t alt_steps = 0;
  /// Stop gradients of the degradation branch at U.
  bool detach_degradation = false;
  std::size_t eval_every = 200;
  std::size_t eval_per_kind = 16;
  std::size_t checkpoint_every = 0;  // 0: only the final checkpoint
  ModelConfig model;

  AdamConfig adam() const { return {lr, beta1, beta2, eps, weight_decay}; }
  void validate() const;
};

struct Losses {
  double total = 0.0;
  double x_recon = 0.0;  // mse(x, x')
  double y_recon = 0.0;  // mse(y, y_hat), before lambda
};

/// Graph of one bidirectional forward pass (recorded on the active tape).
struct LossGraph {
  Tensor total;
  Tensor x_recon;
  Tensor y_recon;
  RestoreOutput restored;
  Tensor x_prime;
};

LossGraph bidirectional_losses(const RestoreModel& restore, const DegradeModel& degrade, const Tensor& x,
                               const Tensor& y, double lambda, bool detach_degradation = false);

/// Restore + degrade models plus optimizer state over their joint parameters.
struct NdrSystem {
  RestoreModel restore;
  DegradeModel degrade;
  ParamList params;
  AdamState adam;

  explicit NdrSystem(const ModelConfig& cfg);
  std::vector<Tensor> tensors() const;
  void zero_grad();
};

/// Forward, backward and one Adam step on a paired batch [B,H,W,3].
/// `phase_term` selects which loss is optimized in alternating mode:
/// 0 = summed loss, 1 = x-reconstruction only, 2 = lambda * y-reconstruction only.
Losses bidirectional_step(NdrSystem& sys, const Tensor& x, const Tensor& y, const TrainingConfig& cfg,
                          int phase_term = 0);

/// Number of parameters belonging to the dictionary, DQ and DI modules.
std::size_t count_ndr_params(const ParamList& params);

struct TrainOutcome {
  std::vector<Losses> history;  // one entry per executed step
  std::size_t final_step = 0;
  std::filesystem::path final_checkpoint;
  std::filesystem::path metrics_csv;
};

class Trainer {
 public:
  /// `echo` is stored verbatim in every checkpoint's metadata.
  Trainer(const TrainingConfig& cfg, std::vector<Sample> train, std::vector<Sample> heldout,
          nlohmann::json echo = nlohmann::json::object());

  /// Restores weights, optimizer moments, step counter and RNG state.
  void resume(const Checkpoint& ckpt);
  Checkpoint checkpoint() const;

  Losses step();
  std::size_t current_step() const { return step_; }
  const NdrSystem& system() const { return sys_; }
  NdrSystem& system() { return sys_; }

  /// Runs until cfg.steps, writing metrics.csv and checkpoints into out_dir.
  /// Non-finite losses save <out_dir>/crash.ndrc and rethrow.
  TrainOutcome run(const std::filesystem::path& out_dir);

  MetricReport evaluate_heldout() const;

  static constexpr const char* kMetricsHeader = "step,loss_total,loss_xrecon,loss_yrecon,psnr_eval,ssim_eval";

 private:
  void next_batch(Tensor& x, Tensor& y);

  TrainingConfig cfg_;
  std::vector<Sample> train_;
  std::vector<Sample> heldout_;
  nlohmann::json echo_;
  NdrSystem sys_;
  Rng rng_;
  std::size_t step_ = 0;
  Losses running_;
};

/// Loads a model pair from a checkpoint written by Trainer.
NdrSystem load_system(const Checkpoint& ckpt);
ModelConfig model_config_from_meta(const nlohmann::json& meta);

// --- ablations -------------------------------------------------------------------

struct AblationRun {
  std::string name;  // e.g. "no_dq" or "lambda=0.5"
  Variant variant = Variant::full;
  double lambda = 1.0;
  std::size_t restore_params = 0;
  std::size_t ndr_params = 0;
  Losses final_losses;
  MetricReport report;
};

struct AblationReport {
  std::vector<std::string> requested;
  std::vector<AblationRun> runs;

  std::string to_csv() const;
  nlohmann::json to_json() const;
};

inline const std::vector<double> kLambdaGrid = {0.0, 0.5, 1.0, 1.5, 3.0};

/// Trains each requested variant with identical seed and data. Accepts
/// "full", "no_dq", "no_di", "no_cp" and "lambda-sweep".
AblationReport ablate(const TrainingConfig& base, const std::vector<std::string>& variants,
                      const std::vector<Sample>& train, const std::vector<Sample>& heldout);

}  // namespace ndr
