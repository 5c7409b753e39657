#pragma once

// Central-difference checks for every differentiable op and a tiny model,
// shared by the unit tests and the acceptance binary.

#include <string>
#include <vector>

#include "ndr/model.hpp"
#include "ndr/ndr_core.hpp"
#include "support.hpp"

namespace ndr::testing {

struct OpCheck {
  std::string op;
  GradCheck result;
};

using Inputs = std::vector<Tensor>;

inline std::vector<OpCheck> run_op_gradchecks(std::uint64_t seed) {
  Rng rng(seed);
  auto r = [&](Shape s) { return random_tensor(std::move(s), rng); };
  std::vector<OpCheck> out;
  auto check = [&](const std::string& name, auto f, Inputs in) {
    const std::uint64_t wseed = mix_seed(seed, out.size());
    out.push_back({name, grad_check([&](const Inputs& x) { return weighted_sum(f(x), wseed); }, std::move(in))});
  };

  check("add", [](const Inputs& x) { return ops::add(x[0], x[1]); }, {r({2, 3}), r({2, 3})});
  check("sub", [](const Inputs& x) { return ops::sub(x[0], x[1]); }, {r({2, 3}), r({2, 3})});
  check("mul", [](const Inputs& x) { return ops::mul(x[0], x[1]); }, {r({2, 3}), r({2, 3})});
  check("scale", [](const Inputs& x) { return ops::scale(x[0], -1.7); }, {r({4})});
  check("sigmoid", [](const Inputs& x) { return ops::sigmoid(x[0]); }, {r({3, 4})});
  check("silu", [](const Inputs& x) { return ops::silu(x[0]); }, {r({3, 4})});
  check("matmul", [](const Inputs& x) { return ops::matmul(x[0], x[1]); }, {r({3, 4}), r({4, 2})});
  check("transpose", [](const Inputs& x) { return ops::transpose_last2(x[0]); }, {r({2, 3, 4})});
  check("reshape", [](const Inputs& x) { return ops::reshape(x[0], {4, 3}); }, {r({2, 6})});
  check("softmax_rows", [](const Inputs& x) { return ops::softmax_rows(x[0]); }, {r({4, 5})});
  check("mean_axes", [](const Inputs& x) { return ops::mean_axes(x[0], {1, 3}); }, {r({2, 3, 2, 4})});
  check("global_avg_pool", [](const Inputs& x) { return ops::global_avg_pool(x[0]); }, {r({2, 3, 4, 3})});
  check("conv1x1", [](const Inputs& x) { return ops::conv1x1(x[0], x[1], x[2]); },
        {r({2, 3, 3, 4}), r({4, 5}), r({5})});
  check("conv3x3", [](const Inputs& x) { return ops::conv3x3(x[0], x[1], x[2], 1); },
        {r({2, 5, 4, 3}), r({3, 3, 3, 2}), r({2})});
  check("conv3x3_stride2", [](const Inputs& x) { return ops::conv3x3(x[0], x[1], x[2], 2); },
        {r({1, 6, 5, 2}), r({3, 3, 2, 3}), r({3})});
  check("upsample", [](const Inputs& x) { return ops::upsample_nearest2x(x[0]); }, {r({1, 2, 3, 2})});
  check("scale_channels", [](const Inputs& x) { return ops::scale_channels(x[0], x[1]); },
        {r({2, 3, 3, 4}), r({2, 1, 1, 4})});
  check("concat", [](const Inputs& x) { return ops::concat_channels(x[0], x[1]); },
        {r({1, 2, 2, 3}), r({1, 2, 2, 2})});
  check("cp_combine", [](const Inputs& x) { return ops::cp_combine(x[0], x[1], x[2]); },
        {r({2, 3, 4}), r({2, 3, 5}), r({2, 3, 6})});
  check("mse", [](const Inputs& x) { return ops::mse(x[0], x[1]); }, {r({3, 3}), r({3, 3})});

  // NDR modules, differentiated with respect to inputs and weights.
  const std::size_t c = 5, m = 4, n = 3, k = 2;
  check("dq_affinity",
        [](const Inputs& x) { return dq_affinity(x[0], NdrDictionary{x[1]}, Pointwise{x[2], x[3]}); },
        {r({1, 4, 3, c}), r({m, n}), r({c, m}), r({m})});
  check("dq_query",
        [](const Inputs& x) { return dq_query(ops::softmax_rows(x[0]), NdrDictionary{x[1]}, Pointwise{x[2], x[3]}, 1, 4, 3).u; },
        {r({12, n}), r({m, n}), r({m, c}), r({c})});
  check("cp_conv",
        [&](const Inputs& x) {
          return cp_conv(x[0], CpProjector{k, Pointwise{x[1], x[2]}, Pointwise{x[3], x[4]}, Pointwise{x[5], x[6]}});
        },
        {r({2, 4, 3, c}), r({c, k * c}), r({k * c}), r({1, k}), r({k}), r({1, k}), r({k})});
  check("di_inject",
        [&](const Inputs& x) {
          const CpProjector pf{k, Pointwise{x[2], x[3]}, Pointwise{x[4], x[5]}, Pointwise{x[6], x[7]}};
          const CpProjector pu{k, Pointwise{x[8], x[9]}, Pointwise{x[10], x[11]}, Pointwise{x[12], x[13]}};
          return di_inject(x[0], x[1], DiWeights{pf, pu});
        },
        {r({1, 4, 3, c}), r({1, 4, 3, c}), r({c, k * c}), r({k * c}), r({1, k}), r({k}), r({1, k}), r({k}),
         r({c, k * c}), r({k * c}), r({1, k}), r({k}), r({1, k}), r({k})});
  return out;
}

/// Gradient of the bidirectional objective with respect to every parameter
/// of a tiny restore/degrade pair with randomized (nonzero) output layers.
inline GradCheck run_model_gradcheck(std::uint64_t seed, Variant variant = Variant::full,
                                     std::size_t entries_per_param = 6) {
  ModelConfig cfg;
  cfg.channels = 4;
  cfg.scales = 2;
  cfg.feature_dim = 4;
  cfg.slots = 3;
  cfg.rank = 2;
  cfg.variant = variant;
  cfg.seed = seed;
  RestoreModel restore(cfg);
  DegradeModel degrade(cfg);
  Rng rng(mix_seed(seed, 5));
  for (Conv3* tail : {&restore.tail(), &degrade.tail()}) {
    for (double& v : tail->weight.data()) v = rng.uniform(-0.3, 0.3);
    for (double& v : tail->bias.data()) v = rng.uniform(-0.1, 0.1);
  }
  const Tensor x = random_tensor({2, 8, 8, 3}, rng, 0, 1), y = random_tensor({2, 8, 8, 3}, rng, 0, 1);

  ParamList params = restore.params();
  for (auto& p : degrade.params()) params.push_back(p);
  Inputs tensors;
  for (auto& p : params) tensors.push_back(p.tensor);

  // Parameters are captured by handle inside the models, so the closure only
  // needs to re-run the forward pass. The objective weighs the residuals
  // (outputs minus their identity inputs): same gradients, but the constant
  // image terms no longer swamp the central differences with roundoff.
  const std::uint64_t wseed = mix_seed(seed, 6);
  auto objective = [&](const Inputs&) {
    const RestoreOutput r = restore.forward(x);
    const Tensor xp = degrade.forward(y, r.u);
    return ops::add(weighted_sum(ops::sub(xp, y), wseed), weighted_sum(ops::sub(r.y_hat, x), wseed + 1));
  };
  // Entries whose gradient is below 1e-5 are compared absolutely at 1e-9:
  // a few ulps of an O(1) objective divided by 2h already reach 1e-10.
  return grad_check(objective, tensors, 1e-5, entries_per_param, 1e-5);
}

}  // namespace ndr::testing
