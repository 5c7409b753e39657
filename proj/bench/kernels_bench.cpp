// Serial reference kernels against their OpenMP counterparts at the sizes a
// default training step uses (batch 4, 32x32, 16-32 channels).

#include <benchmark/benchmark.h>

#include <vector>

#include "ndr/kernels.hpp"
#include "ndr/rng.hpp"

namespace {

using namespace ndr::kernels;

std::vector<double> filled(std::size_t n, std::uint64_t seed) {
  ndr::Rng rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

template <auto Gemm>
void BM_gemm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::size_t p = n * n, q = 32, r = 32;  // one pixel row per output
  const auto a = filled(p * q, 1), b = filled(q * r, 2);
  std::vector<double> out(p * r);
  for (auto _ : state) {
    Gemm(a, b, out, p, q, r);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(p * q * r));
}

ConvGeom geom(const benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto c = static_cast<std::size_t>(state.range(1));
  return {4, n, n, c, c, 1};
}

template <auto Conv>
void BM_conv_forward(benchmark::State& state) {
  const ConvGeom g = geom(state);
  const auto in = filled(g.batch * g.height * g.width * g.cin, 3), w = filled(9 * g.cin * g.cout, 4),
             bias = filled(g.cout, 5);
  std::vector<double> out(g.batch * g.out_height() * g.out_width() * g.cout);
  for (auto _ : state) {
    Conv(in, w, bias, out, g);
    benchmark::DoNotOptimize(out.data());
  }
}

template <auto Conv>
void BM_conv_backward_input(benchmark::State& state) {
  const ConvGeom g = geom(state);
  const auto grad_out = filled(g.batch * g.height * g.width * g.cout, 6), w = filled(9 * g.cin * g.cout, 7);
  std::vector<double> grad_in(g.batch * g.height * g.width * g.cin);
  for (auto _ : state) {
    Conv(grad_out, w, grad_in, g);
    benchmark::DoNotOptimize(grad_in.data());
  }
}

template <auto Conv>
void BM_conv_backward_weight(benchmark::State& state) {
  const ConvGeom g = geom(state);
  const auto in = filled(g.batch * g.height * g.width * g.cin, 8),
             grad_out = filled(g.batch * g.height * g.width * g.cout, 9);
  std::vector<double> gw(9 * g.cin * g.cout), gb(g.cout);
  for (auto _ : state) {
    Conv(in, grad_out, gw, gb, g);
    benchmark::DoNotOptimize(gw.data());
  }
}

BENCHMARK(BM_gemm<serial::gemm_nn>)->Name("gemm_nn/serial")->Arg(16)->Arg(32);
BENCHMARK(BM_gemm<parallel::gemm_nn>)->Name("gemm_nn/parallel")->Arg(16)->Arg(32);
BENCHMARK(BM_conv_forward<serial::conv3x3_forward>)->Name("conv_fwd/serial")->Args({32, 16})->Args({16, 32});
BENCHMARK(BM_conv_forward<parallel::conv3x3_forward>)->Name("conv_fwd/parallel")->Args({32, 16})->Args({16, 32});
BENCHMARK(BM_conv_backward_input<serial::conv3x3_backward_input>)->Name("conv_bwd_in/serial")->Args({32, 16});
BENCHMARK(BM_conv_backward_input<parallel::conv3x3_backward_input>)->Name("conv_bwd_in/parallel")->Args({32, 16});
BENCHMARK(BM_conv_backward_weight<serial::conv3x3_backward_weight>)->Name("conv_bwd_w/serial")->Args({32, 16});
BENCHMARK(BM_conv_backward_weight<parallel::conv3x3_backward_weight>)->Name("conv_bwd_w/parallel")->Args({32, 16});

}  // namespace

BENCHMARK_MAIN();
