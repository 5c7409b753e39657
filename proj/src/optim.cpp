#include "ndr/optim.hpp"

#include <cmath>

namespace ndr {

void AdamState::init_for(std::span<const Tensor> params) {
  step = 0;
  m.clear();
  v.clear();
  for (const Tensor& p : params) {
    m.emplace_back(p.numel(), 0.0);
    v.emplace_back(p.numel(), 0.0);
  }
}

void adam_step(std::span<Tensor> params, AdamState& state, const AdamConfig& cfg) {
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw DimensionError("adam_step: optimizer state does not match parameter list");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (state.m[i].size() != params[i].numel() || state.v[i].size() != params[i].numel()) {
      throw DimensionError("adam_step: moment shape mismatch for parameter " + std::to_string(i));
    }
    if (params[i].has_grad()) {
      auto g = params[i].grad_mut();
      for (std::size_t j = 0; j < g.size(); ++j) {
        if (!std::isfinite(g[j])) {
          throw NonFiniteError("adam_step: non-finite gradient in parameter " + std::to_string(i) +
                               " element " + std::to_string(j));
        }
      }
    }
  }

  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = params[i];
    auto w = p.data();
    const bool has = p.has_grad();
    std::span<double> g = has ? p.grad_mut() : std::span<double>{};
    auto& m = state.m[i];
    auto& v = state.v[i];
    for (std::size_t j = 0; j < w.size(); ++j) {
      const double grad = (has ? g[j] : 0.0) + cfg.weight_decay * w[j];
      m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * grad;
      v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * grad * grad;
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      w[j] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
  }
}

}  // namespace ndr
