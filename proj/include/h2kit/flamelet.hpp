/// @file flamelet.hpp
/// @brief Filtered tabulated-chemistry baseline: flame thickness, filtered
///        1D flamelet tables, fractal wrinkling factor and the closures
///        omega^F (global equivalence ratio) / omega^FC (local).
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "h2kit/error.hpp"
#include "h2kit/field.hpp"
#include "h2kit/filter.hpp"
#include "h2kit/profile.hpp"

namespace h2kit {

/// Progress-variable flame thickness 1 / max|dc/dx|.
///
/// Interior gradients use the 4th-order central stencil, the points next to
/// the ends the 2nd-order one, the end points one-sided differences.
inline double flame_thickness(std::span<const double> c, double dx) {
  const std::size_t n = c.size();
  if (n < 3) throw DomainError("flame_thickness: need at least 3 points");
  if (!(dx > 0.0)) throw DomainError("flame_thickness: spacing must be positive");
  double gmax = std::max(std::abs(c[1] - c[0]), std::abs(c[n - 1] - c[n - 2]));
  for (std::size_t i = 1; i + 1 < n; ++i) {
    double g;
    if (i >= 2 && i + 2 < n)
      g = (-c[i + 2] + 8.0 * c[i + 1] - 8.0 * c[i - 1] + c[i - 2]) / 12.0;
    else
      g = 0.5 * (c[i + 1] - c[i - 1]);
    gmax = std::max(gmax, std::abs(g));
  }
  if (gmax < 1e-12) throw DegenerateError("flame_thickness: flat profile");
  return dx / gmax;
}

/// Checks the invariants a profile needs before tabulation.
inline void validate_table_profile(const FlameletProfile& p) {
  const std::size_t n = p.size();
  if (n < 3 || p.c.size() != n || p.omega.size() != n || p.rho.size() != n)
    throw ValidationError("flamelet profile: need >= 3 rows with 4 equal-length columns");
  if (!(p.c.front() < 0.01 && p.c.back() > 0.99))
    throw ValidationError("flamelet profile does not span the flame (c must go from < 0.01 to > 0.99)");
  const double h = p.spacing();
  for (std::size_t i = 1; i < n; ++i) {
    if (std::abs((p.x[i] - p.x[i - 1]) - h) > 1e-9 * h)
      throw ValidationError("flamelet profile: non-uniform spacing at row " + std::to_string(i));
    if (p.c[i] < p.c[i - 1]) throw ValidationError("flamelet profile: c decreasing at row " + std::to_string(i));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (p.omega[i] < 0.0) throw ValidationError("flamelet profile: negative omega at row " + std::to_string(i));
    if (!(p.rho[i] > 0.0)) throw ValidationError("flamelet profile: non-positive rho at row " + std::to_string(i));
  }
}

/// Pads the profile with `cells` copies of its end states on both sides.
inline FlameletProfile extend_profile(const FlameletProfile& p, std::size_t cells) {
  const std::size_t n = p.size();
  if (n < 2) throw ValidationError("extend_profile: need at least 2 rows");
  const double h = p.spacing();
  FlameletProfile out;
  out.phi = p.phi;
  const std::size_t m = n + 2 * cells;
  out.x.resize(m);
  out.c.resize(m);
  out.omega.resize(m);
  out.rho.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t src = i < cells ? 0 : (i - cells >= n ? n - 1 : i - cells);
    out.x[i] = p.x.front() + (static_cast<double>(i) - static_cast<double>(cells)) * h;
    out.c[i] = p.c[src];
    out.omega[i] = p.omega[src];
    out.rho[i] = p.rho[src];
  }
  return out;
}

/// Filtered burning rate as a function of the Favre-filtered progress
/// variable for one (profile, sigma) pair.
struct FlameletTable {
  double sigma = 0.0;      ///< filter width in profile cells
  double phi = 0.0;
  double delta0 = 0.0;     ///< unfiltered thickness [m]
  double delta1 = 0.0;     ///< filtered thickness [m]
  std::vector<double> c;      ///< strictly increasing knots in [0,1]
  std::vector<double> omega;  ///< filtered burning rate at the knots
  double spacing = 0.0;                ///< profile spacing [m]
  std::vector<double> omega_filtered;  ///< filtered omega on the profile grid

  double thickness_ratio() const { return delta0 / delta1; }

  double peak() const { return *std::max_element(omega.begin(), omega.end()); }

  /// Linear interpolation in c; c is clamped to [0,1] first.
  double lookup(double cq) const {
    cq = std::clamp(cq, 0.0, 1.0);
    if (cq <= c.front()) return omega.front();
    if (cq >= c.back()) return omega.back();
    const auto it = std::upper_bound(c.begin(), c.end(), cq);
    const std::size_t hi = static_cast<std::size_t>(it - c.begin());
    const std::size_t lo = hi - 1;
    const double t = (cq - c[lo]) / (c[hi] - c[lo]);
    return omega[lo] + t * (omega[hi] - omega[lo]);
  }
};

/// Filters the profile with the LES kernel (Favre for c, plain for omega)
/// and tabulates omega_bar against c_tilde.
///
/// `sigma` is in cells of the grid the filter is defined on; pass
/// `source_dx` when that grid differs from the profile spacing (e.g. DNS
/// cells of 0.1 mm applied to a finer 1D flame).
inline FlameletTable build_table(const FlameletProfile& p, double sigma,
                                 std::optional<double> source_dx = std::nullopt) {
  validate_table_profile(p);
  const std::size_t n = p.size();
  const double h = p.spacing();
  const double sigma_cells = source_dx ? sigma * *source_dx / h : sigma;
  const GaussianKernel1D k = build_kernel(sigma_cells);
  if (static_cast<std::size_t>(k.half_width) >= n)
    throw DomainError("build_table: kernel half-width " + std::to_string(k.half_width) +
                      " exceeds profile support of " + std::to_string(n) +
                      " points; extend the profile with its end states first");

  FlameletTable t;
  t.sigma = sigma_cells;
  t.phi = p.phi;
  t.delta0 = flame_thickness(p.c, h);
  const double resolution = t.delta0 / h;
  if (resolution < 10.0)
    throw DomainError("build_table: only " + std::to_string(resolution) +
                      " points across the flame thickness (need >= 10)");

  const GridSpec line(n, 1, 1, h, {Boundary::clamp, Boundary::clamp, Boundary::clamp});
  const ScalarField3D rho(line, p.rho);
  std::vector<double> rc(n);
  for (std::size_t i = 0; i < n; ++i) rc[i] = p.rho[i] * p.c[i];
  const ScalarField3D rho_bar = filter_axis(rho, 0, k);
  const ScalarField3D rc_bar = filter_axis(ScalarField3D(line, std::move(rc)), 0, k);
  const ScalarField3D om_bar = filter_axis(ScalarField3D(line, p.omega), 0, k);

  std::vector<double> ct(n);
  for (std::size_t i = 0; i < n; ++i) ct[i] = std::clamp(rc_bar[i] / rho_bar[i], 0.0, 1.0);
  for (std::size_t i = 1; i < n; ++i)
    if (ct[i] < ct[i - 1] - 1e-12)
      throw ValidationError("build_table: filtered progress variable is not monotone at point " +
                            std::to_string(i));
  t.delta1 = flame_thickness(ct, h);
  t.spacing = h;
  t.omega_filtered.assign(om_bar.values().begin(), om_bar.values().end());

  if (ct.front() > 0.0) {
    t.c.push_back(0.0);
    t.omega.push_back(0.0);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!t.c.empty() && !(ct[i] > t.c.back())) continue;
    t.c.push_back(ct[i]);
    t.omega.push_back(om_bar[i]);
  }
  if (t.c.back() < 1.0) {
    t.c.push_back(1.0);
    t.omega.push_back(0.0);
  }
  return t;
}

struct WrinklingConfig {
  double fractal_dim = 2.5;
  double outer_cutoff = 1.0;  ///< L [m]
  double inner_cutoff = 1.0;  ///< eta [m]
};

/// Fractal wrinkling factor (L / eta)^(D_f - 2).
inline double wrinkling_factor(const WrinklingConfig& cfg) {
  if (!(cfg.fractal_dim >= 2.0 && cfg.fractal_dim <= 3.0))
    throw DomainError("wrinkling_factor: fractal dimension must lie in [2,3]");
  if (!(cfg.inner_cutoff > 0.0 && cfg.outer_cutoff > 0.0))
    throw DomainError("wrinkling_factor: cutoffs must be positive");
  if (cfg.inner_cutoff > cfg.outer_cutoff)
    throw DomainError("wrinkling_factor: inner cutoff exceeds outer cutoff");
  return std::pow(cfg.outer_cutoff / cfg.inner_cutoff, cfg.fractal_dim - 2.0);
}

struct BaselineConfig {
  double fractal_dim = 2.5;
  /// Replaces the per-table factor (delta1/delta0)^(D_f-2) when set.
  std::optional<double> wrinkling;
};

/// Tables of one filter width at several equivalence ratios.
class FlameletLibrary {
public:
  FlameletLibrary() = default;
  explicit FlameletLibrary(std::vector<FlameletTable> tables) : tables_(std::move(tables)) {
    std::sort(tables_.begin(), tables_.end(),
              [](const FlameletTable& a, const FlameletTable& b) { return a.phi < b.phi; });
    for (std::size_t i = 1; i < tables_.size(); ++i)
      if (!(tables_[i].phi > tables_[i - 1].phi))
        throw ValidationError("FlameletLibrary: duplicate equivalence ratio " + std::to_string(tables_[i].phi));
  }

  const std::vector<FlameletTable>& tables() const { return tables_; }
  bool empty() const { return tables_.empty(); }

  /// Table whose phi matches within 1e-9, if any.
  const FlameletTable* find(double phi) const {
    for (const auto& t : tables_)
      if (std::abs(t.phi - phi) <= 1e-9 * std::max(1.0, std::abs(phi))) return &t;
    return nullptr;
  }

private:
  std::vector<FlameletTable> tables_;
};

/// One table per profile at filter width `sigma` (cells of `source_dx`).
/// Each profile is first padded with its end states by the kernel
/// half-width so the clamp boundary never truncates the flame.
inline FlameletLibrary build_library(const std::vector<FlameletProfile>& profiles, double sigma,
                                     std::optional<double> source_dx = std::nullopt) {
  std::vector<FlameletTable> tables;
  for (const auto& p : profiles) {
    validate_table_profile(p);
    const double h = p.spacing();
    const double sigma_cells = source_dx ? sigma * *source_dx / h : sigma;
    const auto pad = static_cast<std::size_t>(kernel_half_width(sigma_cells));
    tables.push_back(build_table(extend_profile(p, pad), sigma, source_dx));
  }
  return FlameletLibrary(std::move(tables));
}

struct TableThickness {
  double delta0 = 0.0;
  double delta1 = 0.0;
  double ratio() const { return delta0 / delta1; }
};

/// Unfiltered and filtered thickness at `phi`, linear in phi between the
/// neighbouring tables.
inline TableThickness library_thickness(const FlameletLibrary& lib, double phi) {
  if (lib.empty()) throw ValidationError("library_thickness: empty flamelet library");
  if (const FlameletTable* t = lib.find(phi)) return {t->delta0, t->delta1};
  const auto& tabs = lib.tables();
  if (phi < tabs.front().phi || phi > tabs.back().phi)
    throw ExtrapolationError("library_thickness: equivalence ratio " + std::to_string(phi) +
                             " outside tabulated range");
  std::size_t hi = 1;
  while (tabs[hi].phi < phi) ++hi;
  const FlameletTable& a = tabs[hi - 1];
  const FlameletTable& b = tabs[hi];
  const double w = (phi - a.phi) / (b.phi - a.phi);
  return {(1.0 - w) * a.delta0 + w * b.delta0, (1.0 - w) * a.delta1 + w * b.delta1};
}

inline double table_wrinkling(const FlameletTable& t, const BaselineConfig& cfg) {
  if (cfg.wrinkling) return *cfg.wrinkling;
  return wrinkling_factor({cfg.fractal_dim, t.delta1, t.delta0});
}

namespace detail {

class BaselineEvaluator {
public:
  BaselineEvaluator(const FlameletLibrary& lib, const BaselineConfig& cfg) : lib_(lib) {
    if (lib.empty()) throw ValidationError("baseline_omega: empty flamelet library");
    for (const auto& t : lib.tables()) xi_.push_back(table_wrinkling(t, cfg));
  }

  double operator()(double c, double phi) const {
    const auto& tabs = lib_.tables();
    const double tol = 1e-9 * std::max(1.0, std::abs(phi));
    for (std::size_t i = 0; i < tabs.size(); ++i)
      if (std::abs(tabs[i].phi - phi) <= tol) return xi_[i] * tabs[i].lookup(c);
    if (phi < tabs.front().phi || phi > tabs.back().phi)
      throw ExtrapolationError("baseline_omega: equivalence ratio " + std::to_string(phi) +
                               " outside tabulated range [" + std::to_string(tabs.front().phi) + ", " +
                               std::to_string(tabs.back().phi) + "]");
    std::size_t hi = 1;
    while (tabs[hi].phi < phi) ++hi;
    const std::size_t lo = hi - 1;
    const double t = (phi - tabs[lo].phi) / (tabs[hi].phi - tabs[lo].phi);
    const double a = xi_[lo] * tabs[lo].lookup(c);
    const double b = xi_[hi] * tabs[hi].lookup(c);
    return (1.0 - t) * a + t * b;
  }

private:
  const FlameletLibrary& lib_;
  std::vector<double> xi_;
};

} // namespace detail

/// omega^F: tables evaluated at the global equivalence ratio.
inline ScalarField3D baseline_omega(const ScalarField3D& c_tilde, double phi_g,
                                    const FlameletLibrary& lib, const BaselineConfig& cfg = {}) {
  const detail::BaselineEvaluator eval(lib, cfg);
  return map_unary(c_tilde, [&](double c) { return eval(c, phi_g); });
}

/// omega^FC: tables evaluated at the local filtered equivalence ratio.
inline ScalarField3D baseline_omega(const ScalarField3D& c_tilde, const ScalarField3D& phi_tilde,
                                    const FlameletLibrary& lib, const BaselineConfig& cfg = {}) {
  const detail::BaselineEvaluator eval(lib, cfg);
  return map_binary(c_tilde, phi_tilde, [&](double c, double phi) { return eval(c, phi); });
}

} // namespace h2kit
