#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "ndr/ops.hpp"
#include "ndr/rng.hpp"

namespace ndr::testing {

inline Tensor random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = rng.uniform(lo, hi);
  return t;
}

inline Tensor leaf(Tensor t) {
  t.set_requires_grad(true);
  return t;
}

struct GradCheck {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
};

/// Compares analytic gradients of `f(inputs)` (a scalar) against central
/// differences for every entry of every input, or `max_entries` evenly
/// spaced entries per input when that is nonzero.
/// rel = |a - n| / max(|a|, |n|, floor).
inline GradCheck grad_check(const std::function<Tensor(const std::vector<Tensor>&)>& f, std::vector<Tensor> inputs,
                            double h = 1e-5, std::size_t max_entries = 0, double floor = 1e-6) {
  for (auto& t : inputs) {
    t.set_requires_grad(true);
    t.zero_grad();
  }
  Tape::active().clear();
  backward(f(inputs));
  GradCheck out;
  for (auto& t : inputs) {
    const std::vector<double> analytic = t.grad();
    const std::size_t n = t.numel();
    const std::size_t stride = max_entries && n > max_entries ? n / max_entries : 1;
    for (std::size_t i = 0; i < n; i += stride) {
      const double orig = t[i];
      double plus, minus;
      {
        NoGradGuard g;
        t[i] = orig + h;
        plus = f(inputs).item();
        t[i] = orig - h;
        minus = f(inputs).item();
        t[i] = orig;
      }
      const double numeric = (plus - minus) / (2 * h);
      const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), floor});
      out.max_rel_error = std::max(out.max_rel_error, std::abs(analytic[i] - numeric) / denom);
      ++out.checked;
    }
  }
  return out;
}

/// sum(out * weights) with fixed random weights, so every output entry
/// contributes a distinct amount to the loss.
inline Tensor weighted_sum(const Tensor& out, std::uint64_t seed) {
  Rng rng(seed);
  Tensor w = random_tensor(out.shape(), rng);
  return ops::sum(ops::mul(out, w));
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace ndr::testing
