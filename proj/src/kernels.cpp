#include "ndr/kernels.hpp"

#include <algorithm>
#include <vector>

namespace ndr::kernels {

namespace {
// Below this many multiply-adds a parallel region costs more than it saves.
constexpr std::size_t kParallelWork = 1 << 14;

using Index = long long;  // OpenMP loop counters must be signed

inline bool tap_source(std::size_t o, std::size_t k, std::size_t stride, std::size_t extent,
                       std::size_t& src) {
  // input coordinate = o*stride + k - 1
  const std::size_t shifted = o * stride + k;
  if (shifted < 1 || shifted - 1 >= extent) return false;
  src = shifted - 1;
  return true;
}
}  // namespace

// ---------------------------------------------------------------------------
// Serial reference kernels: direct definitions, no blocking, no reordering.
// ---------------------------------------------------------------------------
namespace serial {

void gemm_nn(std::span<const double> a, std::span<const double> b, std::span<double> out,
             std::size_t p, std::size_t q, std::size_t r) {
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < r; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < q; ++k) acc += a[i * q + k] * b[k * r + j];
      out[i * r + j] = acc;
    }
  }
}

void gemm_nt(std::span<const double> a, std::span<const double> b, std::span<double> out,
             std::size_t p, std::size_t q, std::size_t r) {
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < q; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < r; ++k) acc += a[i * r + k] * b[j * r + k];
      out[i * q + j] = acc;
    }
  }
}

void gemm_tn(std::span<const double> a, std::span<const double> b, std::span<double> out,
             std::size_t p, std::size_t q, std::size_t r) {
  for (std::size_t i = 0; i < q; ++i) {
    for (std::size_t j = 0; j < r; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < p; ++k) acc += a[k * q + i] * b[k * r + j];
      out[i * r + j] = acc;
    }
  }
}

void conv3x3_forward(std::span<const double> in, std::span<const double> weight,
                     std::span<const double> bias, std::span<double> out, const ConvGeom& g) {
  const std::size_t ho = g.out_height(), wo = g.out_width();
  for (std::size_t b = 0; b < g.batch; ++b)
    for (std::size_t oy = 0; oy < ho; ++oy)
      for (std::size_t ox = 0; ox < wo; ++ox)
        for (std::size_t co = 0; co < g.cout; ++co) {
          double acc = bias[co];
          for (std::size_t ky = 0; ky < 3; ++ky)
            for (std::size_t kx = 0; kx < 3; ++kx) {
              std::size_t iy, ix;
              if (!tap_source(oy, ky, g.stride, g.height, iy)) continue;
              if (!tap_source(ox, kx, g.stride, g.width, ix)) continue;
              for (std::size_t ci = 0; ci < g.cin; ++ci)
                acc += in[((b * g.height + iy) * g.width + ix) * g.cin + ci] *
                       weight[((ky * 3 + kx) * g.cin + ci) * g.cout + co];
            }
          out[((b * ho + oy) * wo + ox) * g.cout + co] = acc;
        }
}

void conv3x3_backward_input(std::span<const double> grad_out, std::span<const double> weight,
                            std::span<double> grad_in, const ConvGeom& g) {
  const std::size_t ho = g.out_height(), wo = g.out_width();
  std::fill(grad_in.begin(), grad_in.end(), 0.0);
  for (std::size_t b = 0; b < g.batch; ++b)
    for (std::size_t oy = 0; oy < ho; ++oy)
      for (std::size_t ox = 0; ox < wo; ++ox)
        for (std::size_t ky = 0; ky < 3; ++ky)
          for (std::size_t kx = 0; kx < 3; ++kx) {
            std::size_t iy, ix;
            if (!tap_source(oy, ky, g.stride, g.height, iy)) continue;
            if (!tap_source(ox, kx, g.stride, g.width, ix)) continue;
            for (std::size_t ci = 0; ci < g.cin; ++ci)
              for (std::size_t co = 0; co < g.cout; ++co)
                grad_in[((b * g.height + iy) * g.width + ix) * g.cin + ci] +=
                    grad_out[((b * ho + oy) * wo + ox) * g.cout + co] *
                    weight[((ky * 3 + kx) * g.cin + ci) * g.cout + co];
          }
}

void conv3x3_backward_weight(std::span<const double> in, std::span<const double> grad_out,
                             std::span<double> grad_weight, std::span<double> grad_bias,
                             const ConvGeom& g) {
  const std::size_t ho = g.out_height(), wo = g.out_width();
  std::fill(grad_weight.begin(), grad_weight.end(), 0.0);
  std::fill(grad_bias.begin(), grad_bias.end(), 0.0);
  for (std::size_t b = 0; b < g.batch; ++b)
    for (std::size_t oy = 0; oy < ho; ++oy)
      for (std::size_t ox = 0; ox < wo; ++ox) {
        const std::size_t opix = ((b * ho + oy) * wo + ox) * g.cout;
        for (std::size_t co = 0; co < g.cout; ++co) grad_bias[co] += grad_out[opix + co];
        for (std::size_t ky = 0; ky < 3; ++ky)
          for (std::size_t kx = 0; kx < 3; ++kx) {
            std::size_t iy, ix;
            if (!tap_source(oy, ky, g.stride, g.height, iy)) continue;
            if (!tap_source(ox, kx, g.stride, g.width, ix)) continue;
            for (std::size_t ci = 0; ci < g.cin; ++ci)
              for (std::size_t co = 0; co < g.cout; ++co)
                grad_weight[((ky * 3 + kx) * g.cin + ci) * g.cout + co] +=
                    in[((b * g.height + iy) * g.width + ix) * g.cin + ci] * grad_out[opix + co];
          }
      }
}

}  // namespace serial

// ---------------------------------------------------------------------------
// OpenMP kernels. Inner loops run over the contiguous output channel so the
// compiler can vectorize them as axpy updates.
// ---------------------------------------------------------------------------
namespace parallel {

void gemm_nn(std::span<const double> a, std::span<const double> b, std::span<double> out,
             std::size_t p, std::size_t q, std::size_t r) {
  const double* A = a.data();
  const double* B = b.data();
  double* O = out.data();
#pragma omp parallel for schedule(static) if (p * q * r > kParallelWork)
  for (Index i = 0; i < static_cast<Index>(p); ++i) {
    double* row = O + i * r;
    std::fill(row, row + r, 0.0);
    for (std::size_t k = 0; k < q; ++k) {
      const double s = A[i * q + k];
      const double* brow = B + k * r;
      for (std::size_t j = 0; j < r; ++j) row[j] += s * brow[j];
    }
  }
}

void gemm_nt(std::span<const double> a, std::span<const double> b, std::span<double> out,
             std::size_t p, std::size_t q, std::size_t r) {
  // Transpose b once so the update is a contiguous axpy over q.
  std::vector<double> bt(r * q);
  for (std::size_t j = 0; j < q; ++j)
    for (std::size_t k = 0; k < r; ++k) bt[k * q + j] = b[j * r + k];
  const double* A = a.data();
  const double* BT = bt.data();
  double* O = out.data();
#pragma omp parallel for schedule(static) if (p * q * r > kParallelWork)
  for (Index i = 0; i < static_cast<Index>(p); ++i) {
    double* row = O + i * q;
    std::fill(row, row + q, 0.0);
    for (std::size_t k = 0; k < r; ++k) {
      const double s = A[i * r + k];
      const double* brow = BT + k * q;
      for (std::size_t j = 0; j < q; ++j) row[j] += s * brow[j];
    }
  }
}

void gemm_tn(std::span<const double> a, std::span<const double> b, std::span<double> out,
             std::size_t p, std::size_t q, std::size_t r) {
  const double* A = a.data();
  const double* B = b.data();
  double* O = out.data();
#pragma omp parallel for schedule(static) if (p * q * r > kParallelWork)
  for (Index i = 0; i < static_cast<Index>(q); ++i) {
    double* row = O + i * r;
    std::fill(row, row + r, 0.0);
    for (std::size_t k = 0; k < p; ++k) {
      const double s = A[k * q + i];
      const double* brow = B + k * r;
      for (std::size_t j = 0; j < r; ++j) row[j] += s * brow[j];
    }
  }
}

void conv3x3_forward(std::span<const double> in, std::span<const double> weight,
                     std::span<const double> bias, std::span<double> out, const ConvGeom& g) {
  const std::size_t ho = g.out_height(), wo = g.out_width();
  const std::size_t cin = g.cin, cout = g.cout;
  const double* X = in.data();
  const double* Wt = weight.data();
  double* O = out.data();
  const Index rows = static_cast<Index>(g.batch * ho);
#pragma omp parallel for schedule(static) if (g.batch * ho * wo * cin * cout * 9 > kParallelWork)
  for (Index row = 0; row < rows; ++row) {
    const std::size_t b = static_cast<std::size_t>(row) / ho;
    const std::size_t oy = static_cast<std::size_t>(row) % ho;
    for (std::size_t ox = 0; ox < wo; ++ox) {
      double* o = O + ((b * ho + oy) * wo + ox) * cout;
      for (std::size_t co = 0; co < cout; ++co) o[co] = bias[co];
      for (std::size_t ky = 0; ky < 3; ++ky) {
        std::size_t iy;
        if (!tap_source(oy, ky, g.stride, g.height, iy)) continue;
        for (std::size_t kx = 0; kx < 3; ++kx) {
          std::size_t ix;
          if (!tap_source(ox, kx, g.stride, g.width, ix)) continue;
          const double* x = X + ((b * g.height + iy) * g.width + ix) * cin;
          const double* w = Wt + (ky * 3 + kx) * cin * cout;
          for (std::size_t ci = 0; ci < cin; ++ci) {
            const double s = x[ci];
            const double* wrow = w + ci * cout;
            for (std::size_t co = 0; co < cout; ++co) o[co] += s * wrow[co];
          }
        }
      }
    }
  }
}

void conv3x3_backward_input(std::span<const double> grad_out, std::span<const double> weight,
                            std::span<double> grad_in, const ConvGeom& g) {
  const std::size_t ho = g.out_height(), wo = g.out_width();
  const std::size_t cin = g.cin, cout = g.cout;
  // wt[tap][co][ci] so the per-pixel update is an axpy over input channels.
  std::vector<double> wt(9 * cin * cout);
  for (std::size_t tap = 0; tap < 9; ++tap)
    for (std::size_t ci = 0; ci < cin; ++ci)
      for (std::size_t co = 0; co < cout; ++co)
        wt[(tap * cout + co) * cin + ci] = weight[(tap * cin + ci) * cout + co];

  const double* G = grad_out.data();
  const double* WT = wt.data();
  double* GI = grad_in.data();
  const Index rows = static_cast<Index>(g.batch * g.height);
  // Gather form: each input row is owned by one thread.
#pragma omp parallel for schedule(static) if (g.batch * ho * wo * cin * cout * 9 > kParallelWork)
  for (Index row = 0; row < rows; ++row) {
    const std::size_t b = static_cast<std::size_t>(row) / g.height;
    const std::size_t iy = static_cast<std::size_t>(row) % g.height;
    for (std::size_t ix = 0; ix < g.width; ++ix) {
      double* gi = GI + ((b * g.height + iy) * g.width + ix) * cin;
      std::fill(gi, gi + cin, 0.0);
      for (std::size_t ky = 0; ky < 3; ++ky) {
        // iy = oy*stride + ky - 1
        const std::size_t ny = iy + 1;
        if (ny < ky || (ny - ky) % g.stride != 0) continue;
        const std::size_t oy = (ny - ky) / g.stride;
        if (oy >= ho) continue;
        for (std::size_t kx = 0; kx < 3; ++kx) {
          const std::size_t nx = ix + 1;
          if (nx < kx || (nx - kx) % g.stride != 0) continue;
          const std::size_t ox = (nx - kx) / g.stride;
          if (ox >= wo) continue;
          const double* go = G + ((b * ho + oy) * wo + ox) * cout;
          const double* w = WT + (ky * 3 + kx) * cout * cin;
          for (std::size_t co = 0; co < cout; ++co) {
            const double s = go[co];
            const double* wrow = w + co * cin;
            for (std::size_t ci = 0; ci < cin; ++ci) gi[ci] += s * wrow[ci];
          }
        }
      }
    }
  }
}

void conv3x3_backward_weight(std::span<const double> in, std::span<const double> grad_out,
                             std::span<double> grad_weight, std::span<double> grad_bias,
                             const ConvGeom& g) {
  const std::size_t ho = g.out_height(), wo = g.out_width();
  const std::size_t cin = g.cin, cout = g.cout;
  const double* X = in.data();
  const double* G = grad_out.data();
  double* GW = grad_weight.data();

  // Each thread owns whole (tap, ci) weight rows and walks every output pixel
  // in the same order, so the sum order is fixed.
  const Index rows = static_cast<Index>(9 * cin);
#pragma omp parallel for schedule(static) if (g.batch * ho * wo * cin * cout * 9 > kParallelWork)
  for (Index row = 0; row < rows; ++row) {
    const std::size_t tap = static_cast<std::size_t>(row) / cin;
    const std::size_t ci = static_cast<std::size_t>(row) % cin;
    const std::size_t ky = tap / 3, kx = tap % 3;
    double* gw = GW + (tap * cin + ci) * cout;
    std::fill(gw, gw + cout, 0.0);
    for (std::size_t b = 0; b < g.batch; ++b)
      for (std::size_t oy = 0; oy < ho; ++oy) {
        std::size_t iy;
        if (!tap_source(oy, ky, g.stride, g.height, iy)) continue;
        for (std::size_t ox = 0; ox < wo; ++ox) {
          std::size_t ix;
          if (!tap_source(ox, kx, g.stride, g.width, ix)) continue;
          const double s = X[((b * g.height + iy) * g.width + ix) * cin + ci];
          const double* go = G + ((b * ho + oy) * wo + ox) * cout;
          for (std::size_t co = 0; co < cout; ++co) gw[co] += s * go[co];
        }
      }
  }

  std::fill(grad_bias.begin(), grad_bias.end(), 0.0);
  const std::size_t pixels = g.batch * ho * wo;
  for (std::size_t p = 0; p < pixels; ++p)
    for (std::size_t co = 0; co < cout; ++co) grad_bias[co] += G[p * cout + co];
}

}  // namespace parallel

}  // namespace ndr::kernels
