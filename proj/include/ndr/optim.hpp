#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ndr/tensor.hpp"

namespace ndr {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-4;  // coupled L2: added to the gradient
};

/// First/second moments per parameter plus the shared step count.
struct AdamState {
  std::uint64_t step = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;

  void init_for(std::span<const Tensor> params);
};

/// One bias-corrected Adam update over every parameter, using the gradients
/// accumulated on the tensors. Throws NonFiniteError before touching any
/// parameter if a gradient contains NaN/Inf. Parameters without a gradient
/// are treated as having a zero gradient.
void adam_step(std::span<Tensor> params, AdamState& state, const AdamConfig& cfg);

}  // namespace ndr
