/// @file filter.hpp
/// @brief LES emulation: truncated discrete Gaussian filter applied
///        separably along x, y, z; Favre filtering; strided downsampling.
///
/// The filter width sigma is expressed in source-grid cells. The kernel is
/// w[u] = exp(-u^2 / (2 sigma^2)) for integer u in [-z, z], z = round(4 sigma),
/// normalized by its sum.
///
/// Boundary treatment per axis:
///   periodic  indices wrap (circular convolution, any axis length)
///   clamp     taps falling outside the axis are dropped and the surviving
///             weights renormalized to sum 1
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "h2kit/error.hpp"
#include "h2kit/field.hpp"
#include "h2kit/reduce.hpp"

namespace h2kit {

struct GaussianKernel1D {
  double sigma = 0.0;
  int half_width = 0;
  /// 2*half_width + 1 weights, weights[half_width] is the center tap.
  std::vector<double> weights;

  std::size_t taps() const { return weights.size(); }
  double operator[](int u) const { return weights[static_cast<std::size_t>(u + half_width)]; }
};

inline int kernel_half_width(double sigma) { return static_cast<int>(std::lround(4.0 * sigma)); }

inline GaussianKernel1D build_kernel(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw DomainError("build_kernel: sigma must be positive, got " + std::to_string(sigma));
  GaussianKernel1D k;
  k.sigma = sigma;
  k.half_width = kernel_half_width(sigma);
  const int z = k.half_width;
  k.weights.assign(static_cast<std::size_t>(2 * z + 1), 0.0);

  std::vector<double> half(static_cast<std::size_t>(z + 1));
  for (int u = 0; u <= z; ++u) {
    const double r = u / sigma;
    half[static_cast<std::size_t>(u)] = std::exp(-0.5 * r * r);
  }
  // Sum from the smallest tail terms inward.
  double sum = 0.0;
  for (int u = z; u >= 1; --u) sum += 2.0 * half[static_cast<std::size_t>(u)];
  sum += half[0];
  for (int u = 0; u <= z; ++u) {
    const double w = half[static_cast<std::size_t>(u)] / sum;
    k.weights[static_cast<std::size_t>(z + u)] = w;
    k.weights[static_cast<std::size_t>(z - u)] = w;
  }
  return k;
}

namespace detail {

/// Filters one line of length n (input strided in `src`) into `dst` (contiguous).
inline void filter_line(const double* src, std::size_t stride, std::size_t n,
                        const GaussianKernel1D& k, Boundary bc, double* dst) {
  const long z = k.half_width;
  const long len = static_cast<long>(n);
  const double* w = k.weights.data() + z;
  if (bc == Boundary::periodic) {
    for (long i = 0; i < len; ++i) {
      double acc = 0.0;
      for (long u = -z; u <= z; ++u) {
        long idx = (i + u) % len;
        if (idx < 0) idx += len;
        acc += w[u] * src[static_cast<std::size_t>(idx) * stride];
      }
      dst[i] = acc;
    }
    return;
  }
  for (long i = 0; i < len; ++i) {
    const long lo = std::max(-z, -i);
    const long hi = std::min(z, len - 1 - i);
    double acc = 0.0, wsum = 0.0;
    for (long u = lo; u <= hi; ++u) {
      acc += w[u] * src[static_cast<std::size_t>(i + u) * stride];
      wsum += w[u];
    }
    dst[i] = acc / wsum;
  }
}

} // namespace detail

/// One 1D pass along `axis` (0 = x, 1 = y, 2 = z). Lines perpendicular to the
/// axis are independent and are distributed over `threads`; results do not
/// depend on the thread count.
inline ScalarField3D filter_axis(const ScalarField3D& f, int axis, const GaussianKernel1D& k,
                                 unsigned threads = 1) {
  const GridSpec& g = f.grid();
  const std::size_t n = g.dim(axis);
  const Boundary bc = g.boundary(axis);
  if (bc == Boundary::clamp && n == 1 && k.sigma >= 1.0)
    throw DomainError("filter_axis: degenerate clamp axis " + std::to_string(axis) +
                      " of length 1 with sigma >= 1");
  if (n == 1 || k.half_width == 0) return f;

  const std::size_t nx = g.nx(), ny = g.ny(), nz = g.nz();
  const std::size_t stride = axis == 0 ? 1 : axis == 1 ? nx : nx * ny;
  // Lines are enumerated by the two remaining coordinates.
  const std::size_t a_len = axis == 0 ? ny : nx;
  const std::size_t b_len = axis == 2 ? ny : nz;
  const std::size_t lines = a_len * b_len;

  const double* src = f.values().data();
  std::vector<double> out(g.size());
  parallel_for(lines, threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> scratch(n);
    for (std::size_t line = begin; line < end; ++line) {
      const std::size_t a = line % a_len, b = line / a_len;
      std::size_t base = 0;
      if (axis == 0) base = g.linear(0, a, b);
      else if (axis == 1) base = g.linear(a, 0, b);
      else base = g.linear(a, b, 0);
      detail::filter_line(src + base, stride, n, k, bc, scratch.data());
      for (std::size_t t = 0; t < n; ++t) out[base + t * stride] = scratch[t];
    }
  });
  return ScalarField3D(g, std::move(out));
}

/// Separable 3D filter: x pass, then y, then z.
inline ScalarField3D filter_field(const ScalarField3D& f, const GaussianKernel1D& k,
                                  unsigned threads = 1) {
  for (int axis = 0; axis < 3; ++axis)
    if (f.grid().boundary(axis) == Boundary::clamp && f.grid().dim(axis) == 1 && k.sigma >= 1.0)
      throw DomainError("filter_field: degenerate clamp axis " + std::to_string(axis) +
                        " of length 1 with sigma >= 1");
  ScalarField3D out = filter_axis(f, 0, k, threads);
  out = filter_axis(out, 1, k, threads);
  return filter_axis(out, 2, k, threads);
}

inline ScalarField3D filter_field(const ScalarField3D& f, double sigma, unsigned threads = 1) {
  return filter_field(f, build_kernel(sigma), threads);
}

struct FavreResult {
  ScalarField3D rho_bar;
  ScalarField3D phi_tilde;
};

inline void require_positive_density(const ScalarField3D& rho) {
  for (std::size_t n = 0; n < rho.size(); ++n)
    if (!(rho[n] > 0.0))
      throw ValidationError("favre_filter: non-positive density at linear index " +
                            std::to_string(n));
}

/// Favre average given an already filtered density.
inline ScalarField3D favre_average(const ScalarField3D& rho, const ScalarField3D& rho_bar,
                                   const ScalarField3D& phi, const GaussianKernel1D& k,
                                   unsigned threads = 1) {
  const ScalarField3D rho_phi_bar =
      filter_field(map_binary(rho, phi, [](double r, double p) { return r * p; }), k, threads);
  return map_binary(rho_phi_bar, rho_bar, [](double num, double den) { return num / den; });
}

inline FavreResult favre_filter(const ScalarField3D& rho, const ScalarField3D& phi,
                                const GaussianKernel1D& k, unsigned threads = 1) {
  if (!(rho.grid() == phi.grid()))
    throw ShapeError("favre_filter: grid mismatch " + rho.grid().shape_string() + " vs " +
                     phi.grid().shape_string());
  require_positive_density(rho);
  ScalarField3D rho_bar = filter_field(rho, k, threads);
  ScalarField3D phi_tilde = favre_average(rho, rho_bar, phi, k, threads);
  return {std::move(rho_bar), std::move(phi_tilde)};
}

inline FavreResult favre_filter(const ScalarField3D& rho, const ScalarField3D& phi, double sigma,
                                unsigned threads = 1) {
  return favre_filter(rho, phi, build_kernel(sigma), threads);
}

inline std::size_t coarse_dim(std::size_t n, std::size_t dsf) { return (n + dsf - 1) / dsf; }

/// Point sampling at indices 0, dsf, 2*dsf, ... on every axis.
inline ScalarField3D downsample(const ScalarField3D& f, long dsf) {
  if (dsf < 1) throw DomainError("downsample: DSF must be >= 1, got " + std::to_string(dsf));
  if (dsf == 1) return f;
  const auto s = static_cast<std::size_t>(dsf);
  const GridSpec& g = f.grid();
  const GridSpec cg = g.with_shape(coarse_dim(g.nx(), s), coarse_dim(g.ny(), s),
                                   coarse_dim(g.nz(), s), g.dx() * static_cast<double>(dsf));
  std::vector<double> out(cg.size());
  std::size_t n = 0;
  for (std::size_t k = 0; k < cg.nz(); ++k)
    for (std::size_t j = 0; j < cg.ny(); ++j)
      for (std::size_t i = 0; i < cg.nx(); ++i) out[n++] = f(i * s, j * s, k * s);
  return ScalarField3D(cg, std::move(out));
}

/// One emulated LES resolution.
struct LESParams {
  double sigma = 4.0;
  long dsf = 2;
  /// Unfiltered-to-filtered flamelet thickness ratio for this (sigma, phi_g).
  std::optional<double> delta_ratio;
  /// Filtered flamelet thickness [m], used for the resolution index.
  std::optional<double> delta1;

  void validate() const {
    if (!(sigma > 0.0)) throw DomainError("LESParams: sigma must be positive");
    if (dsf < 1) throw DomainError("LESParams: DSF must be >= 1");
    if (delta_ratio && !(*delta_ratio > 0.0 && *delta_ratio <= 1.0))
      throw DomainError("LESParams: delta ratio must lie in (0,1]");
  }

  double coarse_dx(double fine_dx) const { return static_cast<double>(dsf) * fine_dx; }

  /// delta1 / coarse_dx + 1.
  std::optional<double> resolution_index(double fine_dx) const {
    if (!delta1) return std::nullopt;
    return *delta1 / coarse_dx(fine_dx) + 1.0;
  }
};

/// Reference flame characteristics of the published five-case database for
/// the three LES resolutions (0.1 mm source cells).
struct ReferenceLESRow {
  double sigma;
  long dsf;
  double coarse_dx_m;
  double phi_g;
  double delta1_m;
  double delta_ratio;
  double resolution_index;
};

inline constexpr ReferenceLESRow kReferenceLESRows[] = {
    {4, 2, 0.2e-3, 0.35, 1.41e-3, 0.81, 8.03},  {4, 2, 0.2e-3, 0.40, 1.06e-3, 0.59, 6.30},
    {4, 2, 0.2e-3, 0.50, 9.28e-4, 0.41, 5.64},  {4, 2, 0.2e-3, 0.60, 9.01e-4, 0.36, 5.51},
    {4, 2, 0.2e-3, 0.70, 9.09e-4, 0.33, 5.55},  {8, 4, 0.4e-3, 0.35, 2.06e-3, 0.55, 6.16},
    {8, 4, 0.4e-3, 0.40, 1.83e-3, 0.34, 5.58},  {8, 4, 0.4e-3, 0.50, 1.75e-3, 0.21, 5.38},
    {8, 4, 0.4e-3, 0.60, 1.75e-3, 0.18, 5.36},  {8, 4, 0.4e-3, 0.70, 1.75e-3, 0.17, 5.37},
    {16, 8, 0.8e-3, 0.35, 3.66e-3, 0.31, 5.58}, {16, 8, 0.8e-3, 0.40, 3.53e-3, 0.18, 5.41},
    {16, 8, 0.8e-3, 0.50, 3.47e-3, 0.11, 5.34}, {16, 8, 0.8e-3, 0.60, 3.45e-3, 0.09, 5.32},
    {16, 8, 0.8e-3, 0.70, 3.45e-3, 0.09, 5.31},
};

} // namespace h2kit
