#include "ndr/layers.hpp"

#include <cmath>

namespace ndr {

std::size_t count_scalars(const ParamList& params) {
  std::size_t n = 0;
  for (const auto& p : params) n += p.tensor.numel();
  return n;
}

Tensor make_param(Shape shape, double stddev, Rng& rng) {
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = rng.normal(0.0, stddev);
  t.set_requires_grad();
  return t;
}

Pointwise Pointwise::make(std::size_t cin, std::size_t cout, Rng& rng, double gain) {
  return {make_param({cin, cout}, gain / std::sqrt(static_cast<double>(cin)), rng),
          Tensor({cout}, 0.0).set_requires_grad()};
}

Pointwise Pointwise::zeros(std::size_t cin, std::size_t cout) {
  Tensor w({cin, cout}, 0.0);
  Tensor b({cout}, 0.0);
  w.set_requires_grad();
  b.set_requires_grad();
  return {w, b};
}

void Pointwise::collect(const std::string& prefix, ParamList& out) const {
  out.push_back({prefix + ".w", weight});
  out.push_back({prefix + ".b", bias});
}

Conv3 Conv3::make(std::size_t cin, std::size_t cout, Rng& rng, std::size_t stride, double gain) {
  Conv3 c{make_param({3, 3, cin, cout}, gain / std::sqrt(9.0 * static_cast<double>(cin)), rng),
          Tensor({cout}, 0.0), stride};
  c.bias.set_requires_grad();
  return c;
}

Conv3 Conv3::zeros(std::size_t cin, std::size_t cout) {
  Conv3 c{Tensor({3, 3, cin, cout}, 0.0), Tensor({cout}, 0.0), 1};
  c.weight.set_requires_grad();
  c.bias.set_requires_grad();
  return c;
}

void Conv3::collect(const std::string& prefix, ParamList& out) const {
  out.push_back({prefix + ".w", weight});
  out.push_back({prefix + ".b", bias});
}

}  // namespace ndr
