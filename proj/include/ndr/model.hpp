#pragma once

// Restoration network (multi-scale encoder / DQ+DI junction / decoder) and the
// lighter degradation network (encoder / DI / decoder).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ndr/ndr_core.hpp"

namespace ndr {

/// Which NDR pieces are present; the ablations swap a module for plain
/// convolution.
enum class Variant { full, no_dq, no_di, no_cp };

std::string to_string(Variant v);
Variant parse_variant(const std::string& name);

struct ModelConfig {
  std::size_t channels = 16;     // base width C at the finest scale
  std::size_t scales = 2;
  std::size_t feature_dim = 32;  // M
  std::size_t slots = 8;         // N
  std::size_t rank = 4;          // K
  Variant variant = Variant::full;
  std::uint64_t seed = 0;

  std::size_t channels_at(std::size_t scale) const { return channels << scale; }
  void validate() const;
};

/// conv3x3 -> SiLU -> channel gate (pool, 1x1, sigmoid) -> conv3x3, plus skip.
struct ResBlock {
  Conv3 conv1;
  Pointwise gate;
  Conv3 conv2;

  static ResBlock make(std::size_t channels, Rng& rng);
  Tensor operator()(const Tensor& x) const;
  void collect(const std::string& prefix, ParamList& out) const;
};

/// DQ + DI at one scale, or its ablation substitute.
struct Junction {
  Variant variant = Variant::full;
  DqWeights dq;
  DiWeights di;
  Pointwise plain_query;  // no_dq: U = 1x1 conv of F
  Conv3 plain_inject;     // no_di: F + conv3x3(U)
  Pointwise concat_mix;   // no_cp: F + 1x1 conv of [F, U]

  static Junction make(Variant v, std::size_t channels, const ModelConfig& cfg, Rng& rng, bool with_query = true);
  void collect(const std::string& prefix, ParamList& out) const;
};

/// Injects U into F according to the variant (shared by both networks).
Tensor inject(const Junction& j, const Tensor& f, const Tensor& u);

struct RestoreOutput {
  Tensor y_hat;                    // [B,H,W,3]
  std::vector<Tensor> u;           // per scale, finest first: [B,H/2^s,W/2^s,C*2^s]
  std::vector<Tensor> affinity;    // per scale [B*h*w, N]; empty for no_dq
};

class RestoreModel {
 public:
  explicit RestoreModel(const ModelConfig& cfg);

  /// Residual prediction x + r. `clamp_output` clamps to [0,1] (evaluation only).
  RestoreOutput forward(const Tensor& x, bool clamp_output = false) const;
  ParamList params() const;
  std::size_t count_params() const { return count_scalars(params()); }

  const ModelConfig& config() const { return cfg_; }
  const NdrDictionary& dictionary() const { return dict_; }
  NdrDictionary& dictionary() { return dict_; }
  Conv3& tail() { return tail_; }

 private:
  ModelConfig cfg_;
  NdrDictionary dict_;
  Conv3 head_;
  std::vector<ResBlock> encoders_;
  std::vector<Conv3> down_;
  std::vector<Junction> junctions_;
  std::vector<ResBlock> decoders_;
  std::vector<Conv3> up_;
  Conv3 tail_;
};

class DegradeModel {
 public:
  explicit DegradeModel(const ModelConfig& cfg);

  /// x' = y + r, conditioned on the finest-scale U from the restoration network.
  Tensor forward(const Tensor& y, const std::vector<Tensor>& u_list) const;
  ParamList params() const;
  std::size_t count_params() const { return count_scalars(params()); }
  Conv3& tail() { return tail_; }

 private:
  ModelConfig cfg_;
  Conv3 head_;
  ResBlock block_;
  Junction injector_;
  ResBlock decoder_;
  Conv3 tail_;
};

/// Throws DimensionError unless x is [B,H,W,3] with H and W divisible by
/// 2^(scales-1).
void check_image_batch(const Tensor& x, std::size_t scales, const char* who);

}  // namespace ndr
