#include "ndr/ndr_core.hpp"

#include <algorithm>
#include <cmath>

namespace ndr {

NdrDictionary NdrDictionary::random(std::size_t feature_dim, std::size_t slots, Rng& rng, double stddev) {
  return {make_param({feature_dim, slots}, stddev, rng)};
}

DqWeights DqWeights::make(std::size_t channels, std::size_t feature_dim, Rng& rng, double dict_stddev) {
  // Fixed output scales give P * D and the mapped U' roughly unit spread;
  // with a small dictionary the affinity would otherwise start uniform and U
  // constant, and the query path would have nothing to learn from. Keeping
  // the scale out of the weights leaves them at the usual magnitude, so
  // optimizer steps move them at the same relative rate as other layers.
  const double gain = 1.0 / (dict_stddev * std::sqrt(static_cast<double>(feature_dim)));
  DqWeights w{Pointwise::make(channels, feature_dim, rng), Pointwise::make(feature_dim, channels, rng)};
  w.map_in.scale = gain;
  w.map_out.scale = gain * std::sqrt(static_cast<double>(feature_dim));
  return w;
}

void DqWeights::collect(const std::string& prefix, ParamList& out) const {
  map_in.collect(prefix + ".map_in", out);
  map_out.collect(prefix + ".map_out", out);
}

Tensor dq_logits(const Tensor& features, const NdrDictionary& dict, const Pointwise& map_in) {
  if (features.rank() != 4) throw DimensionError("dq: features must be [B,H,W,C], got " + shape_str(features.shape()));
  if (map_in.weight.dim(1) != dict.feature_dim()) {
    throw DimensionError("dq: mapping produces " + std::to_string(map_in.weight.dim(1)) +
                         " channels but the dictionary has M = " + std::to_string(dict.feature_dim()));
  }
  const Tensor mapped = map_in(features);
  const std::size_t pixels = features.dim(0) * features.dim(1) * features.dim(2);
  const Tensor p = ops::reshape(mapped, {pixels, dict.feature_dim()});
  return ops::matmul(p, dict.D);
}

Tensor dq_affinity(const Tensor& features, const NdrDictionary& dict, const Pointwise& map_in) {
  return ops::softmax_rows(dq_logits(features, dict, map_in));
}

ApproxDegradation dq_query(const Tensor& affinity, const NdrDictionary& dict, const Pointwise& map_out,
                           std::size_t batch, std::size_t height, std::size_t width) {
  if (affinity.rank() != 2 || affinity.dim(1) != dict.slots() || affinity.dim(0) != batch * height * width) {
    throw DimensionError("dq_query: affinity " + shape_str(affinity.shape()) + " does not match dictionary " +
                         shape_str(dict.D.shape()));
  }
  if (map_out.weight.dim(0) != dict.feature_dim()) throw DimensionError("dq_query: output mapping expects wrong M");
  Tensor u_prime = ops::matmul(affinity, ops::transpose_last2(dict.D));
  Tensor u = map_out(ops::reshape(u_prime, {batch, height, width, dict.feature_dim()}));
  return {u, u_prime};
}

CpProjector CpProjector::make(std::size_t channels, std::size_t rank, Rng& rng) {
  return {rank, Pointwise::make(channels, rank * channels, rng), Pointwise::make(1, rank, rng),
          Pointwise::make(1, rank, rng)};
}

CpProjector CpProjector::zeros(std::size_t channels, std::size_t rank) {
  return {rank, Pointwise::zeros(channels, rank * channels), Pointwise::zeros(1, rank), Pointwise::zeros(1, rank)};
}

void CpProjector::collect(const std::string& prefix, ParamList& out) const {
  channel.collect(prefix + ".p1", out);
  height.collect(prefix + ".p2", out);
  width.collect(prefix + ".p3", out);
}

CpFactors cp_factors(const Tensor& x, const CpProjector& proj) {
  if (x.rank() != 4) throw DimensionError("cp_conv: input must be [B,H,W,C], got " + shape_str(x.shape()));
  const std::size_t b = x.dim(0), h = x.dim(1), w = x.dim(2), c = x.dim(3), k = proj.rank;
  if (k == 0 || k >= std::min({c, h, w})) {
    throw DimensionError("cp_conv: rank K = " + std::to_string(k) + " must be below min(C,H,W) for " +
                         shape_str(x.shape()));
  }
  if (proj.channel.weight.dim(0) != c || proj.channel.weight.dim(1) != k * c) {
    throw DimensionError("cp_conv: channel projector does not match C = " + std::to_string(c));
  }
  // p1: pool over (H,W), channels C -> K*C.
  Tensor u1 = ops::sigmoid(ops::reshape(proj.channel(ops::mean_axes(x, {1, 2})), {b, k, c}));
  // p2: pool over (W,C) -> [B,H,1], 1 -> K, then [B,K,H].
  Tensor u2 = ops::sigmoid(ops::transpose_last2(proj.height(ops::reshape(ops::mean_axes(x, {2, 3}), {b, h, 1}))));
  // p3: pool over (H,C) -> [B,W,1], 1 -> K, then [B,K,W].
  Tensor u3 = ops::sigmoid(ops::transpose_last2(proj.width(ops::reshape(ops::mean_axes(x, {1, 3}), {b, w, 1}))));
  return {u1, u2, u3};
}

Tensor cp_conv(const Tensor& x, const CpProjector& proj) {
  const CpFactors f = cp_factors(x, proj);
  return ops::cp_combine(f.u1, f.u2, f.u3);
}

Tensor cp_kronecker(const CpFactors& f) {
  const std::size_t b = f.u1.dim(0), k = f.u1.dim(1), c = f.u1.dim(2), h = f.u2.dim(2), w = f.u3.dim(2);
  Tensor out({b, k, h, w, c});
  for (std::size_t n = 0; n < b; ++n)
    for (std::size_t r = 0; r < k; ++r)
      for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x)
          for (std::size_t ch = 0; ch < c; ++ch)
            out.at({n, r, y, x, ch}) = f.u1.at({n, r, ch}) * f.u2.at({n, r, y}) * f.u3.at({n, r, x});
  return out;
}

DiWeights DiWeights::make(std::size_t channels, std::size_t rank, Rng& rng) {
  return {CpProjector::make(channels, rank, rng), CpProjector::make(channels, rank, rng)};
}

void DiWeights::collect(const std::string& prefix, ParamList& out) const {
  feature.collect(prefix + ".cp_f", out);
  degradation.collect(prefix + ".cp_u", out);
}

Tensor di_combine(const Tensor& f, const Tensor& f_cp, const Tensor& u_cp) {
  return ops::add(ops::add(ops::mul(f_cp, u_cp), u_cp), f);
}

Tensor di_inject(const Tensor& f, const Tensor& u, const DiWeights& w) {
  if (f.shape() != u.shape()) {
    throw DimensionError("di_inject: feature " + shape_str(f.shape()) + " vs degradation " + shape_str(u.shape()));
  }
  const Tensor u_cp = cp_conv(u, w.degradation);
  const Tensor f_cp = cp_conv(f, w.feature);
  return di_combine(f, f_cp, u_cp);
}

}  // namespace ndr
