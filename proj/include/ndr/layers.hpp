#pragma once

#include <string>
#include <vector>

#include "ndr/ops.hpp"
#include "ndr/rng.hpp"

namespace ndr {

struct NamedParam {
  std::string name;
  Tensor tensor;
};
using ParamList = std::vector<NamedParam>;

std::size_t count_scalars(const ParamList& params);

/// Random normal tensor marked as a trainable parameter.
Tensor make_param(Shape shape, double stddev, Rng& rng);

/// 1x1 convolution (pointwise linear map over channels), times a fixed
/// output scale that is not trained.
struct Pointwise {
  Tensor weight;  // [cin, cout]
  Tensor bias;    // [cout]
  double scale = 1.0;

  static Pointwise make(std::size_t cin, std::size_t cout, Rng& rng, double gain = 1.0);
  static Pointwise zeros(std::size_t cin, std::size_t cout);
  Tensor operator()(const Tensor& x) const {
    const Tensor y = ops::conv1x1(x, weight, bias);
    return scale == 1.0 ? y : ops::scale(y, scale);
  }
  void collect(const std::string& prefix, ParamList& out) const;
};

struct Conv3 {
  Tensor weight;  // [3,3,cin,cout]
  Tensor bias;    // [cout]
  std::size_t stride = 1;

  static Conv3 make(std::size_t cin, std::size_t cout, Rng& rng, std::size_t stride = 1, double gain = 1.0);
  static Conv3 zeros(std::size_t cin, std::size_t cout);
  Tensor operator()(const Tensor& x) const { return ops::conv3x3(x, weight, bias, stride); }
  void collect(const std::string& prefix, ParamList& out) const;
};

}  // namespace ndr
