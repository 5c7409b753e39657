#include "ndr/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ndr/kernels.hpp"

namespace ndr::ops {

namespace {

using ImplPtr = std::shared_ptr<detail::TensorImpl>;

bool tracking(std::initializer_list<const Tensor*> inputs) {
  if (!Tape::active().enabled()) return false;
  return std::any_of(inputs.begin(), inputs.end(), [](const Tensor* t) { return t->requires_grad(); });
}

Tensor finish(Tensor out, const char* op, bool track, std::function<void()> bw) {
  check_finite(out.data(), op);
  if (track) {
    out.impl()->requires_grad = true;
    out.impl()->recorded = true;
    Tape::active().record({op, out.impl(), std::move(bw)});
  }
  return out;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
  }
}

void require_rank(const Tensor& x, std::size_t rank, const char* op) {
  if (x.rank() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                         shape_str(x.shape()));
  }
}

template <class F>
Tensor unary(const Tensor& x, F f) {
  Tensor out(x.shape());
  auto xs = x.data();
  auto os = out.data();
  for (std::size_t i = 0; i < xs.size(); ++i) os[i] = f(xs[i]);
  return out;
}

inline double sigmoid_scalar(double v) {
  if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  Tensor out(a.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = a[i] + b[i];
  const bool track = tracking({&a, &b});
  ImplPtr ai = a.impl(), bi = b.impl(), oi = out.impl();
  return finish(out, "add", track, [ai, bi, oi] {
    for (const auto& in : {ai, bi}) {
      if (!in->requires_grad) continue;
      auto g = in->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += oi->grad[i];
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  Tensor out(a.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = a[i] - b[i];
  const bool track = tracking({&a, &b});
  ImplPtr ai = a.impl(), bi = b.impl(), oi = out.impl();
  return finish(out, "sub", track, [ai, bi, oi] {
    if (ai->requires_grad) {
      auto g = ai->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += oi->grad[i];
    }
    if (bi->requires_grad) {
      auto g = bi->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= oi->grad[i];
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  Tensor out(a.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = a[i] * b[i];
  const bool track = tracking({&a, &b});
  ImplPtr ai = a.impl(), bi = b.impl(), oi = out.impl();
  return finish(out, "mul", track, [ai, bi, oi] {
    if (ai->requires_grad) {
      auto g = ai->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += oi->grad[i] * bi->data[i];
    }
    if (bi->requires_grad) {
      auto g = bi->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += oi->grad[i] * ai->data[i];
    }
  });
}

Tensor scale(const Tensor& x, double s) {
  Tensor out = unary(x, [s](double v) { return v * s; });
  ImplPtr xi = x.impl(), oi = out.impl();
  return finish(out, "scale", tracking({&x}), [xi, oi, s] {
    auto g = xi->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += oi->grad[i] * s;
  });
}

Tensor sigmoid(const Tensor& x) {
  Tensor out = unary(x, sigmoid_scalar);
  ImplPtr xi = x.impl(), oi = out.impl();
  return finish(out, "sigmoid", tracking({&x}), [xi, oi] {
    auto g = xi->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double s = oi->data[i];
      g[i] += oi->grad[i] * s * (1.0 - s);
    }
  });
}

Tensor silu(const Tensor& x) {
  Tensor out = unary(x, [](double v) { return v * sigmoid_scalar(v); });
  ImplPtr xi = x.impl(), oi = out.impl();
  return finish(out, "silu", tracking({&x}), [xi, oi] {
    auto g = xi->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double v = xi->data[i];
      const double s = sigmoid_scalar(v);
      g[i] += oi->grad[i] * s * (1.0 + v * (1.0 - s));
    }
  });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  const std::size_t p = a.dim(0), q = a.dim(1), r = b.dim(1);
  if (b.dim(0) != q) {
    throw DimensionError("matmul: inner dimensions differ " + shape_str(a.shape()) + " x " +
                         shape_str(b.shape()));
  }
  Tensor out({p, r});
  kernels::parallel::gemm_nn(a.data(), b.data(), out.data(), p, q, r);
  ImplPtr ai = a.impl(), bi = b.impl(), oi = out.impl();
  return finish(out, "matmul", tracking({&a, &b}), [ai, bi, oi, p, q, r] {
    if (ai->requires_grad) {
      std::vector<double> ga(p * q);
      kernels::parallel::gemm_nt(oi->grad, bi->data, ga, p, q, r);
      auto g = ai->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += ga[i];
    }
    if (bi->requires_grad) {
      std::vector<double> gb(q * r);
      kernels::parallel::gemm_tn(ai->data, oi->grad, gb, p, q, r);
      auto g = bi->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += gb[i];
    }
  });
}

Tensor transpose_last2(const Tensor& x) {
  if (x.rank() < 2) throw DimensionError("transpose_last2: rank < 2");
  Shape shape = x.shape();
  const std::size_t rows = shape[shape.size() - 2], cols = shape.back();
  const std::size_t batch = x.numel() / (rows * cols);
  std::swap(shape[shape.size() - 2], shape[shape.size() - 1]);
  Tensor out(shape);
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j)
        out[(b * cols + j) * rows + i] = x[(b * rows + i) * cols + j];
  ImplPtr xi = x.impl(), oi = out.impl();
  return finish(out, "transpose", tracking({&x}), [xi, oi, batch, rows, cols] {
    auto g = xi->grad_buffer();
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j)
          g[(b * rows + i) * cols + j] += oi->grad[(b * cols + j) * rows + i];
  });
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (numel_of(shape) != x.numel()) {
    throw DimensionError("reshape: " + shape_str(x.shape()) + " -> " + shape_str(shape));
  }
  Tensor out(std::move(shape), std::vector<double>(x.data().begin(), x.data().end()));
  ImplPtr xi = x.impl(), oi = out.impl();
  return finish(out, "reshape", tracking({&x}), [xi, oi] {
    auto g = xi->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += oi->grad[i];
  });
}

Tensor softmax_rows(const Tensor& x) {
  require_rank(x, 2, "softmax_rows");
  check_finite(x.data(), "softmax_rows input");
  const std::size_t rows = x.dim(0), n = x.dim(1);
  Tensor out(x.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = x.data().data() + r * n;
    double* o = out.data().data() + r * n;
    const double mx = *std::max_element(in, in + n);
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) total += (o[j] = std::exp(in[j] - mx));
    for (std::size_t j = 0; j < n; ++j) o[j] /= total;
  }
  ImplPtr xi = x.impl(), oi = out.impl();
  return finish(out, "softmax_rows", tracking({&x}), [xi, oi, rows, n] {
    auto g = xi->grad_buffer();
    for (std::size_t r = 0; r < rows; ++r) {
      const double* s = oi->data.data() + r * n;
      const double* go = oi->grad.data() + r * n;
      double dot = 0.0;
      for (std::size_t j = 0; j < n; ++j) dot += go[j] * s[j];
      for (std::size_t j = 0; j < n; ++j) g[r * n + j] += s[j] * (go[j] - dot);
    }
  });
}

Tensor mean_axes(const Tensor& x, std::vector<std::size_t> axes) {
  const Shape& in_shape = x.shape();
  std::vector<bool> reduced(in_shape.size(), false);
  for (std::size_t a : axes) {
    if (a >= in_shape.size() || reduced[a]) throw DimensionError("mean_axes: bad axis list");
    reduced[a] = true;
  }
  Shape out_shape;
  std::size_t count = 1;
  for (std::size_t i = 0; i < in_shape.size(); ++i) {
    if (reduced[i]) count *= in_shape[i];
    else out_shape.push_back(in_shape[i]);
  }
  if (out_shape.empty()) out_shape.push_back(1);

  // Map each input element to its output slot once; reused by backward.
  auto target = std::make_shared<std::vector<std::size_t>>(x.numel());
  {
    std::vector<std::size_t> idx(in_shape.size(), 0);
    for (std::size_t flat = 0; flat < x.numel(); ++flat) {
      std::size_t o = 0;
      for (std::size_t d = 0; d < in_shape.size(); ++d)
        if (!reduced[d]) o = o * in_shape[d] + idx[d];
      (*target)[flat] = o;
      for (std::size_t d = in_shape.size(); d-- > 0;) {
        if (++idx[d] < in_shape[d]) break;
        idx[d] = 0;
      }
    }
  }
  Tensor out(out_shape);
  for (std::size_t i = 0; i < x.numel(); ++i) out[(*target)[i]] += x[i];
  const double inv = 1.0 / static_cast<double>(count);
  for (double& v : out.data()) v *= inv;
  ImplPtr xi = x.impl(), oi = out.impl();
  return finish(out, "mean_axes", tracking({&x}), [xi, oi, target, inv] {
    auto g = xi->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += oi->grad[(*target)[i]] * inv;
  });
}

Tensor global_avg_pool(const Tensor& x) {
  require_rank(x, 4, "global_avg_pool");
  return reshape(mean_axes(x, {1, 2}), {x.dim(0), 1, 1, x.dim(3)});
}

Tensor conv1x1(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  require_rank(weight, 2, "conv1x1 weight");
  const std::size_t cin = weight.dim(0), cout = weight.dim(1);
  if (x.shape().back() != cin || bias.numel() != cout) {
    throw DimensionError("conv1x1: input " + shape_str(x.shape()) + " weight " +
                         shape_str(weight.shape()) + " bias " + shape_str(bias.shape()));
  }
  const std::size_t pixels = x.numel() / cin;
  Shape shape = x.shape();
  shape.back() = cout;
  Tensor out(shape);
  kernels::parallel::gemm_nn(x.data(), weight.data(), out.data(), pixels, cin, cout);
  for (std::size_t p = 0; p < pixels; ++p)
    for (std::size_t c = 0; c < cout; ++c) out[p * cout + c] += bias[c];
  ImplPtr xi = x.impl(), wi = weight.impl(), bi = bias.impl(), oi = out.impl();
  return finish(out, "conv1x1", tracking({&x, &weight, &bias}), [xi, wi, bi, oi, pixels, cin, cout] {
    if (xi->requires_grad) {
      std::vector<double> gx(pixels * cin);
      kernels::parallel::gemm_nt(oi->grad, wi->data, gx, pixels, cin, cout);
      auto g = xi->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += gx[i];
    }
    if (wi->requires_grad) {
      std::vector<double> gw(cin * cout);
      kernels::parallel::gemm_tn(xi->data, oi->grad, gw, pixels, cin, cout);
      auto g = wi->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += gw[i];
    }
    if (bi->requires_grad) {
      auto g = bi->grad_buffer();
      for (std::size_t p = 0; p < pixels; ++p)
        for (std::size_t c = 0; c < cout; ++c) g[c] += oi->grad[p * cout + c];
    }
  });
}

Tensor conv3x3(const Tensor& x, const Tensor& weight, const Tensor& bias, std::size_t stride) {
  require_rank(x, 4, "conv3x3");
  require_rank(weight, 4, "conv3x3 weight");
  if (stride != 1 && stride != 2) throw DimensionError("conv3x3: stride must be 1 or 2");
  const Shape& ws = weight.shape();
  if (ws[0] != 3 || ws[1] != 3 || ws[2] != x.dim(3) || bias.numel() != ws[3]) {
    throw DimensionError("conv3x3: input " + shape_str(x.shape()) + " weight " +
                         shape_str(ws) + " bias " + shape_str(bias.shape()));
  }
  const kernels::ConvGeom geom{x.dim(0), x.dim(1), x.dim(2), ws[2], ws[3], stride};
  Tensor out({geom.batch, geom.out_height(), geom.out_width(), geom.cout});
  kernels::parallel::conv3x3_forward(x.data(), weight.data(), bias.data(), out.data(), geom);
  ImplPtr xi = x.impl(), wi = weight.impl(), bi = bias.impl(), oi = out.impl();
  return finish(out, "conv3x3", tracking({&x, &weight, &bias}), [xi, wi, bi, oi, geom] {
    if (xi->requires_grad) {
      std::vector<double> gx(xi->data.size());
      kernels::parallel::conv3x3_backward_input(oi->grad, wi->data, gx, geom);
      auto g = xi->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += gx[i];
    }
    if (wi->requires_grad || bi->requires_grad) {
      std::vector<double> gw(wi->data.size()), gb(bi->data.size());
      kernels::parallel::conv3x3_backward_weight(xi->data, oi->grad, gw, gb, geom);
      if (wi->requires_grad) {
        auto g = wi->grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += gw[i];
      }
      if (bi->requires_grad) {
        auto g = bi->grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += gb[i];
      }
    }
  });
}

Tensor upsample_nearest2x(const Tensor& x) {
  require_rank(x, 4, "upsample_nearest2x");
  const std::size_t b = x.dim(0), h = x.dim(1), w = x.dim(2), c = x.dim(3);
  Tensor out({b, 2 * h, 2 * w, c});
  for (std::size_t n = 0; n < b; ++n)
    for (std::size_t y = 0; y < 2 * h; ++y)
      for (std::size_t xx = 0; xx < 2 * w; ++xx)
        for (std::size_t ch = 0; ch < c; ++ch)
          out[((n * 2 * h + y) * 2 * w + xx) * c + ch] = x[((n * h + y / 2) * w + xx / 2) * c + ch];
  ImplPtr xi = x.impl(), oi = out.impl();
  return finish(out, "upsample_nearest2x", tracking({&x}), [xi, oi, b, h, w, c] {
    auto g = xi->grad_buffer();
    for (std::size_t n = 0; n < b; ++n)
      for (std::size_t y = 0; y < 2 * h; ++y)
        for (std::size_t xx = 0; xx < 2 * w; ++xx)
          for (std::size_t ch = 0; ch < c; ++ch)
            g[((n * h + y / 2) * w + xx / 2) * c + ch] += oi->grad[((n * 2 * h + y) * 2 * w + xx) * c + ch];
  });
}

Tensor scale_channels(const Tensor& x, const Tensor& gate) {
  require_rank(x, 4, "scale_channels");
  const std::size_t b = x.dim(0), c = x.dim(3);
  if (gate.shape() != Shape{b, 1, 1, c}) {
    throw DimensionError("scale_channels: gate " + shape_str(gate.shape()) + " for input " +
                         shape_str(x.shape()));
  }
  const std::size_t hw = x.dim(1) * x.dim(2);
  Tensor out(x.shape());
  for (std::size_t n = 0; n < b; ++n)
    for (std::size_t p = 0; p < hw; ++p)
      for (std::size_t ch = 0; ch < c; ++ch) {
        const std::size_t i = (n * hw + p) * c + ch;
        out[i] = x[i] * gate[n * c + ch];
      }
  ImplPtr xi = x.impl(), gi = gate.impl(), oi = out.impl();
  return finish(out, "scale_channels", tracking({&x, &gate}), [xi, gi, oi, b, hw, c] {
    if (xi->requires_grad) {
      auto g = xi->grad_buffer();
      for (std::size_t n = 0; n < b; ++n)
        for (std::size_t p = 0; p < hw; ++p)
          for (std::size_t ch = 0; ch < c; ++ch) {
            const std::size_t i = (n * hw + p) * c + ch;
            g[i] += oi->grad[i] * gi->data[n * c + ch];
          }
    }
    if (gi->requires_grad) {
      auto g = gi->grad_buffer();
      for (std::size_t n = 0; n < b; ++n)
        for (std::size_t p = 0; p < hw; ++p)
          for (std::size_t ch = 0; ch < c; ++ch) {
            const std::size_t i = (n * hw + p) * c + ch;
            g[n * c + ch] += oi->grad[i] * xi->data[i];
          }
    }
  });
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  require_rank(a, 4, "concat_channels");
  require_rank(b, 4, "concat_channels");
  for (std::size_t d = 0; d < 3; ++d)
    if (a.dim(d) != b.dim(d)) throw DimensionError("concat_channels: spatial mismatch");
  const std::size_t ca = a.dim(3), cb = b.dim(3), pixels = a.numel() / ca;
  Tensor out({a.dim(0), a.dim(1), a.dim(2), ca + cb});
  for (std::size_t p = 0; p < pixels; ++p) {
    for (std::size_t c = 0; c < ca; ++c) out[p * (ca + cb) + c] = a[p * ca + c];
    for (std::size_t c = 0; c < cb; ++c) out[p * (ca + cb) + ca + c] = b[p * cb + c];
  }
  ImplPtr ai = a.impl(), bi = b.impl(), oi = out.impl();
  return finish(out, "concat_channels", tracking({&a, &b}), [ai, bi, oi, pixels, ca, cb] {
    if (ai->requires_grad) {
      auto g = ai->grad_buffer();
      for (std::size_t p = 0; p < pixels; ++p)
        for (std::size_t c = 0; c < ca; ++c) g[p * ca + c] += oi->grad[p * (ca + cb) + c];
    }
    if (bi->requires_grad) {
      auto g = bi->grad_buffer();
      for (std::size_t p = 0; p < pixels; ++p)
        for (std::size_t c = 0; c < cb; ++c) g[p * cb + c] += oi->grad[p * (ca + cb) + ca + c];
    }
  });
}

Tensor cp_combine(const Tensor& u1, const Tensor& u2, const Tensor& u3) {
  require_rank(u1, 3, "cp_combine u1");
  require_rank(u2, 3, "cp_combine u2");
  require_rank(u3, 3, "cp_combine u3");
  const std::size_t b = u1.dim(0), k = u1.dim(1), c = u1.dim(2), h = u2.dim(2), w = u3.dim(2);
  if (u2.dim(0) != b || u3.dim(0) != b || u2.dim(1) != k || u3.dim(1) != k) {
    throw DimensionError("cp_combine: factor shapes " + shape_str(u1.shape()) + " " +
                         shape_str(u2.shape()) + " " + shape_str(u3.shape()));
  }
  const double inv_k = 1.0 / static_cast<double>(k);
  Tensor out({b, h, w, c});
  for (std::size_t n = 0; n < b; ++n)
    for (std::size_t r = 0; r < k; ++r) {
      const double* f1 = u1.data().data() + (n * k + r) * c;
      for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) {
          const double s = inv_k * u2[(n * k + r) * h + y] * u3[(n * k + r) * w + x];
          double* o = out.data().data() + ((n * h + y) * w + x) * c;
          for (std::size_t ch = 0; ch < c; ++ch) o[ch] += s * f1[ch];
        }
    }
  ImplPtr i1 = u1.impl(), i2 = u2.impl(), i3 = u3.impl(), oi = out.impl();
  return finish(out, "cp_combine", tracking({&u1, &u2, &u3}), [i1, i2, i3, oi, b, k, c, h, w, inv_k] {
    for (std::size_t n = 0; n < b; ++n)
      for (std::size_t r = 0; r < k; ++r) {
        const std::size_t f1 = (n * k + r) * c, f2 = (n * k + r) * h, f3 = (n * k + r) * w;
        for (std::size_t y = 0; y < h; ++y)
          for (std::size_t x = 0; x < w; ++x) {
            const double* go = oi->grad.data() + ((n * h + y) * w + x) * c;
            double dot1 = 0.0;  // <grad_out(y,x,:), u1[r,:]>
            for (std::size_t ch = 0; ch < c; ++ch) dot1 += go[ch] * i1->data[f1 + ch];
            if (i1->requires_grad) {
              auto g = i1->grad_buffer();
              const double s = inv_k * i2->data[f2 + y] * i3->data[f3 + x];
              for (std::size_t ch = 0; ch < c; ++ch) g[f1 + ch] += s * go[ch];
            }
            if (i2->requires_grad) i2->grad_buffer()[f2 + y] += inv_k * dot1 * i3->data[f3 + x];
            if (i3->requires_grad) i3->grad_buffer()[f3 + x] += inv_k * dot1 * i2->data[f2 + y];
          }
      }
  });
}

namespace {

// Neumaier-compensated running sum; losses reduce thousands of terms.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = total_ + v;
    carry_ += std::abs(total_) >= std::abs(v) ? (total_ - t) + v : (v - t) + total_;
    total_ = t;
  }
  double value() const { return total_ + carry_; }

 private:
  double total_ = 0.0, carry_ = 0.0;
};

}  // namespace

Tensor sum(const Tensor& x) {
  CompensatedSum acc;
  for (double v : x.data()) acc.add(v);
  Tensor out(Shape{1}, acc.value());
  ImplPtr xi = x.impl(), oi = out.impl();
  return finish(out, "sum", tracking({&x}), [xi, oi] {
    auto g = xi->grad_buffer();
    for (double& v : g) v += oi->grad[0];
  });
}

Tensor mean(const Tensor& x) { return scale(sum(x), 1.0 / static_cast<double>(x.numel())); }

Tensor mse(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mse");
  CompensatedSum acc;
  for (std::size_t i = 0; i < a.numel(); ++i) {
    const double d = a[i] - b[i];
    acc.add(d * d);
  }
  const double n = static_cast<double>(a.numel());
  Tensor out(Shape{1}, acc.value() / n);
  ImplPtr ai = a.impl(), bi = b.impl(), oi = out.impl();
  return finish(out, "mse", tracking({&a, &b}), [ai, bi, oi, n] {
    const double go = oi->grad[0] * 2.0 / n;
    if (ai->requires_grad) {
      auto g = ai->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += go * (ai->data[i] - bi->data[i]);
    }
    if (bi->requires_grad) {
      auto g = bi->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= go * (ai->data[i] - bi->data[i]);
    }
  });
}

}  // namespace ndr::ops
