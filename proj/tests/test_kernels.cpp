#include <gtest/gtest.h>

#include <omp.h>

#include "ndr/kernels.hpp"
#include "ndr/rng.hpp"
#include "support.hpp"

namespace ndr {
namespace {

namespace ks = kernels::serial;
namespace kp = kernels::parallel;

std::vector<double> random_vec(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-1, 1);
  return v;
}

// Sizes large enough to cross the parallel threshold.
TEST(Kernels, GemmParallelMatchesSerial) {
  Rng rng(1);
  const std::size_t p = 67, q = 45, r = 53;
  const auto a = random_vec(p * q, rng), b = random_vec(q * r, rng), bt = random_vec(r * q, rng),
             at = random_vec(p * r, rng);
  std::vector<double> s(p * r), t(p * r);
  ks::gemm_nn(a, b, s, p, q, r);
  kp::gemm_nn(a, b, t, p, q, r);
  EXPECT_LT(testing::max_abs_diff(s, t), 1e-12);

  std::vector<double> s2(p * r), t2(p * r);
  ks::gemm_nt(a, bt, s2, p, r, q);
  kp::gemm_nt(a, bt, t2, p, r, q);
  EXPECT_LT(testing::max_abs_diff(s2, t2), 1e-12);

  std::vector<double> s3(q * r), t3(q * r);
  ks::gemm_tn(a, at, s3, p, q, r);
  kp::gemm_tn(a, at, t3, p, q, r);
  EXPECT_LT(testing::max_abs_diff(s3, t3), 1e-12);
}

TEST(Kernels, ConvParallelMatchesSerial) {
  Rng rng(2);
  for (std::size_t stride : {1u, 2u}) {
    const kernels::ConvGeom g{3, 20, 18, 8, 12, stride};
    const auto in = random_vec(g.batch * g.height * g.width * g.cin, rng);
    const auto w = random_vec(9 * g.cin * g.cout, rng);
    const auto bias = random_vec(g.cout, rng);
    const std::size_t out_n = g.batch * g.out_height() * g.out_width() * g.cout;
    std::vector<double> s(out_n), t(out_n);
    ks::conv3x3_forward(in, w, bias, s, g);
    kp::conv3x3_forward(in, w, bias, t, g);
    EXPECT_LT(testing::max_abs_diff(s, t), 1e-12);

    const auto gout = random_vec(out_n, rng);
    std::vector<double> gi_s(in.size(), 7.0), gi_t(in.size(), -3.0);
    ks::conv3x3_backward_input(gout, w, gi_s, g);
    kp::conv3x3_backward_input(gout, w, gi_t, g);
    EXPECT_LT(testing::max_abs_diff(gi_s, gi_t), 1e-12);

    std::vector<double> gw_s(w.size(), 1.0), gw_t(w.size(), 2.0), gb_s(g.cout, 1.0), gb_t(g.cout, 2.0);
    ks::conv3x3_backward_weight(in, gout, gw_s, gb_s, g);
    kp::conv3x3_backward_weight(in, gout, gw_t, gb_t, g);
    EXPECT_LT(testing::max_abs_diff(gw_s, gw_t), 1e-11);
    EXPECT_LT(testing::max_abs_diff(gb_s, gb_t), 1e-12);
  }
}

TEST(Kernels, ParallelResultIndependentOfThreadCount) {
  Rng rng(3);
  const kernels::ConvGeom g{2, 16, 16, 8, 8, 1};
  const auto in = random_vec(g.batch * g.height * g.width * g.cin, rng);
  const auto w = random_vec(9 * g.cin * g.cout, rng);
  const auto bias = random_vec(g.cout, rng);
  const std::size_t out_n = g.batch * g.height * g.width * g.cout;
  std::vector<double> one(out_n), many(out_n);
  const int prev = omp_get_max_threads();
  omp_set_num_threads(1);
  kp::conv3x3_forward(in, w, bias, one, g);
  omp_set_num_threads(4);
  kp::conv3x3_forward(in, w, bias, many, g);
  omp_set_num_threads(prev);
  EXPECT_EQ(one, many);
}

}  // namespace
}  // namespace ndr
