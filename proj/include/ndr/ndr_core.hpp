#pragma once

// Neural degradation representation: the learnable dictionary, the
// degradation query (affinity + re-weighting) and the degradation injection
// built on the rank-averaged CP convolution.

#include "ndr/layers.hpp"

namespace ndr {

inline constexpr double kDictionaryInitStd = 0.02;

/// Learnable dictionary D [M, N]: N degradation slots of M features each.
struct NdrDictionary {
  Tensor D;

  /// i.i.d. normal entries, mean 0.
  static NdrDictionary random(std::size_t feature_dim, std::size_t slots, Rng& rng,
                              double stddev = kDictionaryInitStd);
  std::size_t feature_dim() const { return D.dim(0); }
  std::size_t slots() const { return D.dim(1); }
};

struct DqWeights {
  Pointwise map_in;   // C -> M
  Pointwise map_out;  // M -> C

  static DqWeights make(std::size_t channels, std::size_t feature_dim, Rng& rng,
                        double dict_stddev = kDictionaryInitStd);
  void collect(const std::string& prefix, ParamList& out) const;
};

/// Affinity logits sigma = P * D, [B*H*W, N], where P is the flattened 1x1
/// mapping of F [B,H,W,C] to M channels.
Tensor dq_logits(const Tensor& features, const NdrDictionary& dict, const Pointwise& map_in);

/// S = softmax_rows(P * D), [B*H*W, N]. Every row sums to 1.
Tensor dq_affinity(const Tensor& features, const NdrDictionary& dict, const Pointwise& map_in);

struct ApproxDegradation {
  Tensor u;        // [B,H,W,C] after the output mapping
  Tensor u_prime;  // [B*H*W, M], S re-weighting of the dictionary
};

/// U' = S * D^T, reshaped to [B,H,W,M] and mapped back to C channels.
ApproxDegradation dq_query(const Tensor& affinity, const NdrDictionary& dict, const Pointwise& map_out,
                           std::size_t batch, std::size_t height, std::size_t width);

/// Pool -> 1x1 conv -> sigmoid projectors producing the three CP factors.
/// The channel projector maps the (H,W)-pooled channel vector C -> K*C;
/// the height and width projectors map the single-channel (C,W)- and
/// (C,H)-pooled profiles 1 -> K. Both stay independent of image size.
struct CpProjector {
  std::size_t rank = 4;
  Pointwise channel;  // C -> K*C
  Pointwise height;   // 1 -> K
  Pointwise width;    // 1 -> K

  static CpProjector make(std::size_t channels, std::size_t rank, Rng& rng);
  static CpProjector zeros(std::size_t channels, std::size_t rank);
  void collect(const std::string& prefix, ParamList& out) const;
};

struct CpFactors {
  Tensor u1;  // [B,K,C]
  Tensor u2;  // [B,K,H]
  Tensor u3;  // [B,K,W]
};

/// Throws DimensionError unless K < min(C, H, W).
CpFactors cp_factors(const Tensor& x, const CpProjector& proj);
/// Rank-averaged outer product of the factors, [B,H,W,C], values in (0,1).
Tensor cp_conv(const Tensor& x, const CpProjector& proj);
/// Unaveraged K slices [B,K,H,W,C]; slice k is u1[k] (x) u2[k] (x) u3[k].
/// Not differentiable; used for inspection and checks.
Tensor cp_kronecker(const CpFactors& f);

struct DiWeights {
  CpProjector feature;
  CpProjector degradation;

  static DiWeights make(std::size_t channels, std::size_t rank, Rng& rng);
  void collect(const std::string& prefix, ParamList& out) const;
};

/// F_out = (F_cp * U_cp + U_cp) + F, elementwise.
Tensor di_combine(const Tensor& f, const Tensor& f_cp, const Tensor& u_cp);
/// F_out with F_cp = CP(F) and U_cp = CP(U).
Tensor di_inject(const Tensor& f, const Tensor& u, const DiWeights& w);

}  // namespace ndr
