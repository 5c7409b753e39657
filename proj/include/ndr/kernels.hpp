#pragma once

// Raw compute kernels behind the differentiable ops.
//
// Every kernel exists twice: `serial` holds the textbook loop nest kept as the
// test reference, `parallel` holds the OpenMP version the ops call. Parallel
// kernels split work only over independent output elements, and each output
// is accumulated in a fixed order, so results do not depend on the thread
// count.
//
// Image tensors are NHWC. 3x3 weights are laid out [ky][kx][cin][cout].

#include <cstddef>
#include <span>

namespace ndr::kernels {

struct ConvGeom {
  std::size_t batch, height, width, cin, cout, stride;
  std::size_t out_height() const { return (height - 1) / stride + 1; }
  std::size_t out_width() const { return (width - 1) / stride + 1; }
};

namespace serial {
// out[p,r] = a[p,q] * b[q,r]
void gemm_nn(std::span<const double> a, std::span<const double> b, std::span<double> out,
             std::size_t p, std::size_t q, std::size_t r);
// out[p,q] = a[p,r] * b[q,r]^T
void gemm_nt(std::span<const double> a, std::span<const double> b, std::span<double> out,
             std::size_t p, std::size_t q, std::size_t r);
// out[q,r] = a[p,q]^T * b[p,r]
void gemm_tn(std::span<const double> a, std::span<const double> b, std::span<double> out,
             std::size_t p, std::size_t q, std::size_t r);

// Zero padding of one pixel; stride 1 or 2.
void conv3x3_forward(std::span<const double> in, std::span<const double> weight,
                     std::span<const double> bias, std::span<double> out, const ConvGeom& g);
// Overwrites grad_in.
void conv3x3_backward_input(std::span<const double> grad_out, std::span<const double> weight,
                            std::span<double> grad_in, const ConvGeom& g);
// Overwrites grad_weight and grad_bias.
void conv3x3_backward_weight(std::span<const double> in, std::span<const double> grad_out,
                             std::span<double> grad_weight, std::span<double> grad_bias,
                             const ConvGeom& g);
}  // namespace serial

namespace parallel {
// out[p,r] = a[p,q] * b[q,r]
void gemm_nn(std::span<const double> a, std::span<const double> b, std::span<double> out,
             std::size_t p, std::size_t q, std::size_t r);
// out[p,q] = a[p,r] * b[q,r]^T
void gemm_nt(std::span<const double> a, std::span<const double> b, std::span<double> out,
             std::size_t p, std::size_t q, std::size_t r);
// out[q,r] = a[p,q]^T * b[p,r]
void gemm_tn(std::span<const double> a, std::span<const double> b, std::span<double> out,
             std::size_t p, std::size_t q, std::size_t r);

// Zero padding of one pixel; stride 1 or 2.
void conv3x3_forward(std::span<const double> in, std::span<const double> weight,
                     std::span<const double> bias, std::span<double> out, const ConvGeom& g);
// Overwrites grad_in.
void conv3x3_backward_input(std::span<const double> grad_out, std::span<const double> weight,
                            std::span<double> grad_in, const ConvGeom& g);
// Overwrites grad_weight and grad_bias.
void conv3x3_backward_weight(std::span<const double> in, std::span<const double> grad_out,
                             std::span<double> grad_weight, std::span<double> grad_bias,
                             const ConvGeom& g);
}  // namespace parallel

}  // namespace ndr::kernels
