#pragma once

// Differentiable tensor operations. Each op records itself on the active
// Tape when any input requires grad. Image-shaped tensors are NHWC.

#include <vector>

#include "ndr/tensor.hpp"

namespace ndr::ops {

// Elementwise, identical shapes.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double s);
Tensor sigmoid(const Tensor& x);
Tensor silu(const Tensor& x);

Tensor matmul(const Tensor& a, const Tensor& b);  // [P,Q] x [Q,R]
Tensor transpose_last2(const Tensor& x);          // [..., A, B] -> [..., B, A]
Tensor reshape(const Tensor& x, Shape shape);

/// Row-wise softmax of a [R,N] matrix, stabilized by subtracting the row max.
Tensor softmax_rows(const Tensor& x);

/// Mean over the listed axes; reduced axes are dropped from the shape.
Tensor mean_axes(const Tensor& x, std::vector<std::size_t> axes);
/// [B,H,W,C] -> [B,1,1,C]
Tensor global_avg_pool(const Tensor& x);

/// Pointwise linear map over the last axis: [..., Cin] -> [..., Cout].
/// weight [Cin,Cout], bias [Cout].
Tensor conv1x1(const Tensor& x, const Tensor& weight, const Tensor& bias);
/// Zero-padded 3x3 convolution, stride 1 or 2. weight [3,3,Cin,Cout].
Tensor conv3x3(const Tensor& x, const Tensor& weight, const Tensor& bias, std::size_t stride = 1);
/// [B,H,W,C] -> [B,2H,2W,C]
Tensor upsample_nearest2x(const Tensor& x);
/// x [B,H,W,C] times per-channel gate [B,1,1,C].
Tensor scale_channels(const Tensor& x, const Tensor& gate);
/// [B,H,W,C1] ++ [B,H,W,C2] -> [B,H,W,C1+C2]
Tensor concat_channels(const Tensor& a, const Tensor& b);

/// Rank-averaged outer product of CP factors:
/// out[b,h,w,c] = mean_k u1[b,k,c] * u2[b,k,h] * u3[b,k,w].
Tensor cp_combine(const Tensor& u1, const Tensor& u2, const Tensor& u3);

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
/// Mean of squared differences, a scalar.
Tensor mse(const Tensor& a, const Tensor& b);

}  // namespace ndr::ops
