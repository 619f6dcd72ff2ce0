/// @file synth.hpp
/// @brief Analytic flame-like snapshots whose filtered quantities have closed
///        forms. Planar and wrinkled erf fronts, plus matching 1D profiles.
///
/// Along the front normal, with s = (x - x_f) / a (cells):
///   c        = (1 + erf(s / sqrt 2)) / 2
///   Y_H2     = xi * (1 - c)
///   rho      = rho_u + (rho_b - rho_u) * c
///   omega_H2 = -omega_peak * m * exp(-s^2 / 2)
/// The wrinkled front sits at x_f = x0 + A sin(2 pi y / ly) sin(2 pi z / lz)
/// and, for A > 0, m = 1 + 0.5 sin(2 pi y / ly) modulates the burning rate
/// along the front. Under a Gaussian filter of width s_f the front stays an
/// erf of width sqrt(a^2 + s_f^2) and the omega peak scales by
/// a / sqrt(a^2 + s_f^2).
#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "h2kit/bundle.hpp"
#include "h2kit/error.hpp"
#include "h2kit/field.hpp"
#include "h2kit/profile.hpp"
#include "h2kit/thermo.hpp"

namespace h2kit {

struct SyntheticFlameSpec {
  double a = 3.0;              ///< transition length [cells]
  double omega_peak = 1000.0;  ///< [kg/m^3/s]
  double rho_u = 1.0;          ///< [kg/m^3]
  double rho_b = 0.25;
  double xi_level = 0.0117;
  /// Linear mixture-fraction ramp across y (first at j = 0, second at j = ny-1).
  std::optional<std::pair<double, double>> xi_ramp;
  double amplitude = 0.0;      ///< wrinkle amplitude [cells]
  double lambda_y = 0.0;       ///< wavelengths [cells]; 0 disables that factor
  double lambda_z = 0.0;
  std::size_t nx = 64, ny = 32, nz = 32;
  double dx = 1e-4;            ///< [m]
  std::optional<double> x0;    ///< mean front position [cells], default nx/2
  std::array<Boundary, 3> boundary{Boundary::clamp, Boundary::periodic, Boundary::periodic};
  std::string case_id = "synthetic";
  std::int32_t time_index = 0;

  double front_position() const { return x0.value_or(static_cast<double>(nx) / 2.0); }
};

namespace detail {

inline void validate_synth(const SyntheticFlameSpec& s, const MixtureConstants& mix) {
  if (!(s.a >= 2.0)) throw DomainError("synthetic flame: a must be >= 2 cells");
  if (!(s.rho_u > s.rho_b && s.rho_b > 0.0))
    throw DomainError("synthetic flame: need rho_u > rho_b > 0");
  if (!(s.amplitude >= 0.0)) throw DomainError("synthetic flame: amplitude must be >= 0");
  if (!(s.omega_peak >= 0.0)) throw DomainError("synthetic flame: omega_peak must be >= 0");
  auto check_xi = [&](double xi) {
    if (!(xi > 0.0 && xi <= mix.xi_s))
      throw DomainError("synthetic flame: mixture fraction " + std::to_string(xi) +
                        " outside (0, xi_s]");
  };
  check_xi(s.xi_level);
  if (s.xi_ramp) {
    check_xi(s.xi_ramp->first);
    check_xi(s.xi_ramp->second);
  }
  if (static_cast<double>(s.nx) < 8.0 * s.a)
    throw DomainError("synthetic flame: nx must be >= 8a");
  if (s.boundary[0] == Boundary::clamp) {
    const double x0 = s.front_position();
    const double reach = s.amplitude + 4.0 * s.a;
    if (x0 - reach < 0.0 || x0 + reach > static_cast<double>(s.nx - 1))
      throw PlacementError(s.amplitude > 0.0
                               ? "synthetic flame: wrinkle amplitude too large for the domain"
                               : "synthetic flame: front within 4a of a clamp boundary");
  }
}

inline SnapshotBundle generate_flame(const SyntheticFlameSpec& s, const MixtureConstants& mix) {
  validate_synth(s, mix);
  const GridSpec g(s.nx, s.ny, s.nz, s.dx, s.boundary);
  const double two_pi = 2.0 * std::numbers::pi;
  const bool wrinkled = s.amplitude > 0.0;
  auto wave = [&](std::size_t idx, double lambda) {
    return lambda > 0.0 ? std::sin(two_pi * static_cast<double>(idx) / lambda) : 1.0;
  };

  std::vector<double> c(g.size()), y(g.size()), xi(g.size()), rho(g.size()), om(g.size());
  std::size_t n = 0;
  for (std::size_t k = 0; k < s.nz; ++k)
    for (std::size_t j = 0; j < s.ny; ++j) {
      const double xf =
          s.front_position() + (wrinkled ? s.amplitude * wave(j, s.lambda_y) * wave(k, s.lambda_z) : 0.0);
      const double mod = wrinkled && s.lambda_y > 0.0 ? 1.0 + 0.5 * wave(j, s.lambda_y) : 1.0;
      double xi_here = s.xi_level;
      if (s.xi_ramp) {
        const double f = s.ny > 1 ? static_cast<double>(j) / static_cast<double>(s.ny - 1) : 0.0;
        xi_here = s.xi_ramp->first + (s.xi_ramp->second - s.xi_ramp->first) * f;
      }
      for (std::size_t i = 0; i < s.nx; ++i, ++n) {
        const double sn = (static_cast<double>(i) - xf) / s.a;
        const double cv = 0.5 * (1.0 + std::erf(sn / std::numbers::sqrt2));
        c[n] = cv;
        xi[n] = xi_here;
        y[n] = xi_here * (1.0 - cv);
        rho[n] = s.rho_u + (s.rho_b - s.rho_u) * cv;
        om[n] = -s.omega_peak * mod * std::exp(-0.5 * sn * sn);
      }
    }

  SnapshotBundle b;
  b.case_id = s.case_id;
  b.time_index = s.time_index;
  b.phi_g = equivalence_ratio(s.xi_level, mix);
  b.grid = g;
  b.set(names::rho, ScalarField3D(g, std::move(rho)));
  b.set(names::y_h2, ScalarField3D(g, std::move(y)));
  b.set(names::xi, ScalarField3D(g, std::move(xi)));
  b.set(names::omega_h2, ScalarField3D(g, std::move(om)));
  return b;
}

} // namespace detail

inline SnapshotBundle make_planar_flame(const SyntheticFlameSpec& spec,
                                        const MixtureConstants& mix = default_mixture()) {
  SyntheticFlameSpec s = spec;
  s.amplitude = 0.0;
  return detail::generate_flame(s, mix);
}

/// Requires periodic y and z axes, and wavelengths that divide the axis
/// lengths.
inline SnapshotBundle make_wrinkled_flame(const SyntheticFlameSpec& spec,
                                          const MixtureConstants& mix = default_mixture()) {
  if (spec.boundary[1] != Boundary::periodic || spec.boundary[2] != Boundary::periodic)
    throw DomainError("wrinkled flame: y and z axes must be periodic");
  auto divides = [](double lambda, std::size_t len) {
    if (lambda == 0.0) return true;
    if (!(lambda > 0.0)) return false;
    const double q = static_cast<double>(len) / lambda;
    return std::abs(q - std::round(q)) < 1e-12 && std::round(q) >= 1.0;
  };
  if (!divides(spec.lambda_y, spec.ny) || !divides(spec.lambda_z, spec.nz))
    throw DomainError("wrinkled flame: wavelengths must divide the axis lengths");
  return detail::generate_flame(spec, mix);
}

/// 1D profile of the same erf flame, sampled `refine` times finer than the
/// 3D grid spacing over `cells` 3D cells centred on the front.
inline FlameletProfile make_flamelet_profile(const SyntheticFlameSpec& s, std::size_t cells,
                                             std::size_t refine, double phi,
                                             std::optional<double> omega_peak = std::nullopt) {
  if (refine < 1 || cells < 2) throw DomainError("flamelet profile: need refine >= 1 and cells >= 2");
  const std::size_t n = cells * refine + 1;
  const double h = s.dx / static_cast<double>(refine);
  const double peak = omega_peak.value_or(s.omega_peak);
  FlameletProfile p;
  p.phi = phi;
  for (std::size_t i = 0; i < n; ++i) {
    const double xc = (static_cast<double>(i) - static_cast<double>(n - 1) / 2.0) / static_cast<double>(refine);
    const double sn = xc / s.a;
    const double cv = 0.5 * (1.0 + std::erf(sn / std::numbers::sqrt2));
    p.x.push_back(static_cast<double>(i) * h);
    p.c.push_back(cv);
    p.omega.push_back(peak * std::exp(-0.5 * sn * sn));
    p.rho.push_back(s.rho_u + (s.rho_b - s.rho_u) * cv);
  }
  return p;
}

/// Integral of |grad c| over the domain [m^2]. By the co-area formula this
/// equals the mean iso-surface area over c in [0,1].
inline double flame_surface_integral(const ScalarField3D& c) {
  const GridSpec& g = c.grid();
  const double h = g.dx();
  auto deriv = [&](std::size_t i, std::size_t j, std::size_t k, int axis) {
    std::array<std::size_t, 3> p{i, j, k};
    const std::size_t len = g.dim(axis);
    if (len == 1) return 0.0;
    const std::size_t a = static_cast<std::size_t>(axis);
    const std::size_t at = p[a];
    std::array<std::size_t, 3> lo = p, hi = p;
    double span = 2.0;
    if (g.boundary(axis) == Boundary::periodic) {
      lo[a] = (at + len - 1) % len;
      hi[a] = (at + 1) % len;
    } else {
      lo[a] = at == 0 ? 0 : at - 1;
      hi[a] = at + 1 == len ? at : at + 1;
      span = static_cast<double>(hi[a] - lo[a]);
    }
    return (c(hi[0], hi[1], hi[2]) - c(lo[0], lo[1], lo[2])) / (span * h);
  };
  double total = 0.0;
  for (std::size_t k = 0; k < g.nz(); ++k)
    for (std::size_t j = 0; j < g.ny(); ++j)
      for (std::size_t i = 0; i < g.nx(); ++i) {
        const double gx = deriv(i, j, k, 0), gy = deriv(i, j, k, 1), gz = deriv(i, j, k, 2);
        total += std::sqrt(gx * gx + gy * gy + gz * gz);
      }
  return total * h * h * h;
}

} // namespace h2kit
