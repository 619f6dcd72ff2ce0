#include <gtest/gtest.h>

#include <chrono>
#include <cmath>

#include "h2kit/filter.hpp"
#include "support.hpp"

using namespace h2kit;
using h2test::kClamp;
using h2test::kPeriodic;

TEST(Kernel, Sigma4Has33Taps) {
  const auto k = build_kernel(4.0);
  EXPECT_EQ(k.half_width, 16);
  EXPECT_EQ(k.taps(), 33u);
  double s = 0.0;
  for (double w : k.weights) s += w;
  EXPECT_NEAR(s, 1.0, 1e-12);
}

TEST(Kernel, Sigma1CentralWeight) {
  const auto k = build_kernel(1.0);
  EXPECT_EQ(k.taps(), 9u);
  EXPECT_NEAR(k[0], 0.398944, 1e-6);
  EXPECT_NEAR(k[0], 0.39894346935609776, 1e-15);
}

TEST(Kernel, InvariantsOverSigmas) {
  for (double sigma : {0.5, 1.0, 2.0, 4.0, 6.0, 8.0, 12.0, 16.0}) {
    const auto k = build_kernel(sigma);
    const int z = static_cast<int>(std::lround(4.0 * sigma));
    ASSERT_EQ(k.taps(), static_cast<std::size_t>(2 * z + 1)) << sigma;
    double s = 0.0;
    for (double w : k.weights) {
      EXPECT_GT(w, 0.0);
      s += w;
    }
    EXPECT_NEAR(s, 1.0, 1e-12) << sigma;
    for (int u = 1; u <= z; ++u) EXPECT_EQ(k[u], k[-u]) << sigma << " " << u;
    for (int u = 0; u < z; ++u) EXPECT_GT(k[u], k[u + 1]);
  }
}

TEST(Kernel, NonIntegerSigmaRounds) {
  EXPECT_EQ(build_kernel(2.3).half_width, 9);
  EXPECT_EQ(build_kernel(0.1).half_width, 0);
  EXPECT_EQ(build_kernel(0.1).weights[0], 1.0);
}

TEST(Kernel, NonPositiveSigma) {
  EXPECT_THROW(build_kernel(0.0), DomainError);
  EXPECT_THROW(build_kernel(-1.0), DomainError);
}

TEST(Filter, ConstantPreserved) {
  for (const auto& bc : {kPeriodic, kClamp}) {
    const GridSpec g(11, 9, 7, 1e-4, bc);
    for (double sigma : {0.5, 1.0, 2.0, 4.0}) {
      const auto out = filter_field(ScalarField3D(g, 3.25), sigma);
      for (double v : out.values()) ASSERT_NEAR(v, 3.25, 1e-12) << sigma;
    }
  }
}

TEST(Filter, ImpulseResponseIsTensorProduct) {
  const std::size_t n = 33, c = 16;
  const GridSpec g(n, n, n, 1.0, kPeriodic);
  std::vector<double> v(g.size(), 0.0);
  v[g.linear(c, c, c)] = 1.0;
  const auto out = filter_field(ScalarField3D(g, v), 2.0);
  const auto k = build_kernel(2.0);
  double worst = 0.0;
  for (std::size_t kk = 0; kk < n; ++kk)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i) {
        const int di = static_cast<int>(i) - 16, dj = static_cast<int>(j) - 16, dk = static_cast<int>(kk) - 16;
        const bool in = std::abs(di) <= 8 && std::abs(dj) <= 8 && std::abs(dk) <= 8;
        const double expect = in ? k[di] * k[dj] * k[dk] : 0.0;
        worst = std::max(worst, std::abs(out(i, j, kk) - expect));
      }
  EXPECT_LT(worst, 1e-16);
}

TEST(Filter, MatchesBruteForcePeriodic) {
  const GridSpec g(17, 17, 17, 1.0, kPeriodic);
  const auto f = h2test::random_field(g, 1234);
  const auto t0 = std::chrono::steady_clock::now();
  const auto fast = filter_field(f, 2.0);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto slow = h2test::brute_force_filter(f, 2.0);
  EXPECT_LT(h2test::max_abs_diff(fast.values(), slow), 1e-10);
  EXPECT_LT(secs, 10.0);
}

TEST(Filter, MatchesBruteForceMixedBoundaries) {
  const GridSpec g(9, 7, 12, 1.0, {Boundary::clamp, Boundary::periodic, Boundary::clamp});
  const auto f = h2test::random_field(g, 99, -1.0, 2.0);
  for (double sigma : {0.7, 1.5}) {
    const auto fast = filter_field(f, sigma);
    EXPECT_LT(h2test::max_abs_diff(fast.values(), h2test::brute_force_filter(f, sigma)), 1e-12) << sigma;
  }
}

TEST(Filter, KernelWiderThanClampAxis) {
  // z = 8 on axes of length 5: truncated taps renormalize.
  const GridSpec g(5, 5, 5, 1.0, kClamp);
  const auto f = h2test::random_field(g, 5);
  EXPECT_LT(h2test::max_abs_diff(filter_field(f, 2.0).values(), h2test::brute_force_filter(f, 2.0)), 1e-12);
}

TEST(Filter, PeriodicAxisShorterThanKernelWraps) {
  const GridSpec g(6, 3, 4, 1.0, kPeriodic);
  const auto f = h2test::random_field(g, 6);
  EXPECT_LT(h2test::max_abs_diff(filter_field(f, 2.0).values(), h2test::brute_force_filter(f, 2.0)), 1e-12);
}

TEST(Filter, Linearity) {
  const GridSpec g(9, 9, 9, 1.0, {Boundary::periodic, Boundary::clamp, Boundary::periodic});
  const auto a = h2test::random_field(g, 1), b = h2test::random_field(g, 2);
  const auto mix = map_binary(a, b, [](double x, double y) { return 2.5 * x - 0.75 * y; });
  const auto fa = filter_field(a, 1.5), fb = filter_field(b, 1.5), fm = filter_field(mix, 1.5);
  for (std::size_t n = 0; n < g.size(); ++n) ASSERT_NEAR(fm[n], 2.5 * fa[n] - 0.75 * fb[n], 1e-10);
}

TEST(Filter, AxisPassesCommute) {
  const GridSpec g(10, 8, 6, 1.0, {Boundary::clamp, Boundary::periodic, Boundary::clamp});
  const auto f = h2test::random_field(g, 3);
  const auto k = build_kernel(1.3);
  const auto xy = filter_axis(filter_axis(f, 0, k), 1, k);
  const auto yx = filter_axis(filter_axis(f, 1, k), 0, k);
  EXPECT_LT(h2test::max_abs_diff(xy.values(), yx.values()), 1e-12);
}

TEST(Filter, MonotoneBounds) {
  const GridSpec g(12, 10, 8, 1.0, {Boundary::clamp, Boundary::periodic, Boundary::clamp});
  const auto f = h2test::random_field(g, 8, -3.0, 7.0);
  const auto out = filter_field(f, 2.0);
  EXPECT_GE(field_min(out), field_min(f));
  EXPECT_LE(field_max(out), field_max(f));
}

TEST(Filter, SumConservedOnPeriodicGrid) {
  const GridSpec g(16, 12, 10, 1.0, kPeriodic);
  const auto f = h2test::random_field(g, 77, 0.0, 5.0);
  const double before = pairwise_sum(f.values());
  for (double sigma : {1.0, 4.0, 6.5}) {
    const double after = pairwise_sum(filter_field(f, sigma).values());
    EXPECT_NEAR(after / before, 1.0, 1e-12) << sigma;
  }
}

TEST(Filter, ThreadCountDoesNotChangeResult) {
  const GridSpec g(13, 11, 9, 1.0, {Boundary::clamp, Boundary::periodic, Boundary::clamp});
  const auto f = h2test::random_field(g, 42);
  const auto one = filter_field(f, 2.0, 1);
  for (unsigned t : {2u, 3u, 7u}) {
    const auto many = filter_field(f, 2.0, t);
    for (std::size_t n = 0; n < g.size(); ++n) ASSERT_EQ(one[n], many[n]) << t;
  }
}

TEST(Filter, DegenerateClampAxis) {
  const GridSpec flat(8, 8, 1, 1.0, kClamp);
  EXPECT_THROW(filter_field(ScalarField3D(flat, 1.0), 1.0), DomainError);
  EXPECT_NO_THROW(filter_field(ScalarField3D(flat, 1.0), 0.5));
  const GridSpec flat_periodic(8, 8, 1, 1.0, kPeriodic);
  const auto out = filter_field(ScalarField3D(flat_periodic, 2.0), 3.0);
  for (double v : out.values()) EXPECT_NEAR(v, 2.0, 1e-12);
}

TEST(Favre, ConstantDensityGivesPlainFilter) {
  const GridSpec g(9, 8, 7, 1.0, {Boundary::periodic, Boundary::clamp, Boundary::periodic});
  const auto phi = h2test::random_field(g, 4);
  const auto r = favre_filter(ScalarField3D(g, 2.7), phi, 1.5);
  const auto plain = filter_field(phi, 1.5);
  EXPECT_LT(h2test::max_abs_diff(r.phi_tilde.values(), plain.values()), 1e-12);
  const auto unit = favre_filter(ScalarField3D(g, 1.0), phi, 1.5);
  for (double v : unit.rho_bar.values()) ASSERT_NEAR(v, 1.0, 1e-12);
  EXPECT_LT(h2test::max_abs_diff(unit.phi_tilde.values(), plain.values()), 1e-12);
}

TEST(Favre, ConstantScalarPreserved) {
  const GridSpec g(9, 8, 7, 1.0, kClamp);
  const auto rho = h2test::random_field(g, 5, 0.2, 1.5);
  const auto r = favre_filter(rho, ScalarField3D(g, 0.0117), 2.0);
  for (double v : r.phi_tilde.values()) ASSERT_NEAR(v, 0.0117, 1e-12);
}

TEST(Favre, TwoPointHandValue) {
  // sigma = 0.5: z = 2, weights at distance 0 and 1 are 1 and e^-2; the
  // left point keeps those two taps after truncation.
  const GridSpec g(2, 1, 1, 1.0, kClamp);
  const auto r = favre_filter(ScalarField3D(g, {1.0, 3.0}), ScalarField3D(g, {0.0, 1.0}), 0.5);
  EXPECT_NEAR(r.phi_tilde[0], 0.288765405772406, 1e-14);
  const double e2 = std::exp(-2.0);
  EXPECT_NEAR(r.rho_bar[0], (1.0 + 3.0 * e2) / (1.0 + e2), 1e-14);
}

TEST(Favre, RejectsNonPositiveDensity) {
  const GridSpec g(3, 1, 1, 1.0);
  EXPECT_THROW(favre_filter(ScalarField3D(g, {1.0, 0.0, 1.0}), ScalarField3D(g, 0.5), 0.5), ValidationError);
  EXPECT_THROW(favre_filter(ScalarField3D(g, 1.0), ScalarField3D(GridSpec(4, 1, 1, 1.0), 0.5), 0.5), ShapeError);
}

TEST(Downsample, IdentityAndStride) {
  const auto f = h2test::random_field(GridSpec(5, 4, 3, 1.0), 7);
  const auto same = downsample(f, 1);
  for (std::size_t n = 0; n < f.size(); ++n) EXPECT_EQ(same[n], f[n]);

  const auto line = downsample(ScalarField3D(GridSpec(4, 1, 1, 1.0), {10, 11, 12, 13}), 2);
  ASSERT_EQ(line.size(), 2u);
  EXPECT_EQ(line[0], 10.0);
  EXPECT_EQ(line[1], 12.0);
}

TEST(Downsample, ShapeArithmetic) {
  const GridSpec g(64, 64, 64, 1e-4, {Boundary::clamp, Boundary::clamp, Boundary::periodic});
  const auto c = downsample(ScalarField3D(g, 1.0), 4);
  EXPECT_EQ(c.grid().shape_string(), "16x16x16");
  EXPECT_DOUBLE_EQ(c.grid().dx(), 4e-4);
  EXPECT_EQ(c.grid().boundaries(), g.boundaries());
  const auto odd = downsample(ScalarField3D(GridSpec(5, 7, 1, 1.0), 1.0), 2);
  EXPECT_EQ(odd.grid().shape_string(), "3x4x1");
  EXPECT_THROW(downsample(odd, 0), DomainError);
}

TEST(LESParams, Validation) {
  LESParams p;
  EXPECT_NO_THROW(p.validate());
  p.dsf = 0;
  EXPECT_THROW(p.validate(), DomainError);
  p = {};
  p.sigma = 0.0;
  EXPECT_THROW(p.validate(), DomainError);
  p = {};
  p.delta_ratio = 1.2;
  EXPECT_THROW(p.validate(), DomainError);
  p = {};
  EXPECT_DOUBLE_EQ(p.coarse_dx(1e-4), 2e-4);
  EXPECT_FALSE(p.resolution_index(1e-4));
}

TEST(LESParams, ReferenceResolutionIndex) {
  for (const auto& row : kReferenceLESRows) {
    LESParams p;
    p.sigma = row.sigma;
    p.dsf = row.dsf;
    p.delta1 = row.delta1_m;
    EXPECT_NEAR(p.coarse_dx(1e-4), row.coarse_dx_m, 1e-15);
    // Both printed values carry three significant digits.
    const double half_ulp = 0.5 * std::pow(10.0, std::floor(std::log10(row.delta1_m)) - 2.0);
    const double tol = half_ulp / p.coarse_dx(1e-4) + 0.005;
    EXPECT_NEAR(*p.resolution_index(1e-4), row.resolution_index, tol)
        << "sigma " << row.sigma << " phi " << row.phi_g;
  }
}

TEST(LESParams, ReferenceRatiosDecreaseWithSigma) {
  for (double phi : {0.35, 0.4, 0.5, 0.6, 0.7}) {
    double prev = 2.0;
    for (const auto& row : kReferenceLESRows)
      if (row.phi_g == phi) {
        EXPECT_LE(row.delta_ratio, prev);
        prev = row.delta_ratio;
      }
  }
}
