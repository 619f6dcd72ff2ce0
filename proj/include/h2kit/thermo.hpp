/// @file thermo.hpp
/// @brief Bilger mixture fraction, H2-based progress variable, equivalence
///        ratio and burning rate for lean premixed H2-air mixtures.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "h2kit/error.hpp"
#include "h2kit/field.hpp"

namespace h2kit {

struct SpeciesAtoms {
  int h = 0;
  int o = 0;
  int n = 0;
};

/// Atomic masses, the 9-species H2/O2/N2 set and the two stream compositions
/// (pure H2 fuel, O2/N2 oxidizer).
class ElementTable {
public:
  static constexpr double kWH = 1.008;
  static constexpr double kWO = 15.999;
  static constexpr double kWN = 14.007;

  /// Oxidizer with the given O2 mole fraction in an O2/N2 blend (air: 0.21).
  explicit ElementTable(double o2_mole_fraction = 0.21) {
    if (!(o2_mole_fraction > 0.0 && o2_mole_fraction <= 1.0))
      throw DomainError("ElementTable: O2 mole fraction must lie in (0,1]");
    const double wo2 = molar_mass("O2"), wn2 = molar_mass("N2");
    y_o2_ox_ = o2_mole_fraction * wo2 /
               (o2_mole_fraction * wo2 + (1.0 - o2_mole_fraction) * wn2);
  }

  static ElementTable with_oxidizer_o2_mass_fraction(double y_o2) {
    if (!(y_o2 > 0.0 && y_o2 <= 1.0))
      throw DomainError("ElementTable: O2 mass fraction must lie in (0,1]");
    ElementTable t;
    t.y_o2_ox_ = y_o2;
    return t;
  }

  static const std::map<std::string, SpeciesAtoms>& species() {
    static const std::map<std::string, SpeciesAtoms> table = {
        {"H2", {2, 0, 0}},  {"H", {1, 0, 0}},   {"O2", {0, 2, 0}},
        {"OH", {1, 1, 0}},  {"O", {0, 1, 0}},   {"H2O", {2, 1, 0}},
        {"HO2", {1, 2, 0}}, {"H2O2", {2, 2, 0}}, {"N2", {0, 0, 2}},
    };
    return table;
  }

  static const SpeciesAtoms& atoms(const std::string& name) {
    const auto& t = species();
    auto it = t.find(name);
    if (it == t.end()) throw UnknownSpeciesError("unknown species '" + name + "'");
    return it->second;
  }

  static double molar_mass(const std::string& name) {
    const auto& a = atoms(name);
    return a.h * kWH + a.o * kWO + a.n * kWN;
  }

  /// Elemental H mass fraction carried by a unit mass of the species.
  static double z_h(const std::string& name) { return atoms(name).h * kWH / molar_mass(name); }
  static double z_o(const std::string& name) { return atoms(name).o * kWO / molar_mass(name); }

  static double beta(double z_h, double z_o) { return z_h / (2.0 * kWH) - z_o / kWO; }

  double oxidizer_y_o2() const { return y_o2_ox_; }
  double beta_fuel() const { return beta(1.0, 0.0); }
  double beta_oxidizer() const { return beta(0.0, y_o2_ox_); }

private:
  double y_o2_ox_ = 0.0;
};

struct MixtureConstants {
  double xi_s;
};

/// Stoichiometric mixture fraction: fuel mass fraction of the 2H2 + O2
/// blend with the oxidizer stream.
inline double stoich_xi(const ElementTable& table = ElementTable()) {
  const double s = ElementTable::molar_mass("O2") / (2.0 * ElementTable::molar_mass("H2"));
  return 1.0 / (1.0 + s / table.oxidizer_y_o2());
}

inline MixtureConstants default_mixture() { return MixtureConstants{stoich_xi()}; }

namespace detail {
inline double xi_from_beta(double beta, const ElementTable& t) {
  double xi = (beta - t.beta_oxidizer()) / (t.beta_fuel() - t.beta_oxidizer());
  constexpr double kSnap = 1e-10;
  if (xi < 0.0 && xi > -kSnap) xi = 0.0;
  if (xi > 1.0 && xi < 1.0 + kSnap) xi = 1.0;
  return xi;
}
} // namespace detail

/// Bilger mixture fraction of one composition (species name -> mass fraction).
inline double bilger_xi(const std::map<std::string, double>& y,
                        const ElementTable& table = ElementTable()) {
  double zh = 0.0, zo = 0.0, sum = 0.0;
  for (const auto& [name, value] : y) {
    zh += ElementTable::z_h(name) * value;
    zo += ElementTable::z_o(name) * value;
    sum += value;
  }
  if (std::abs(sum - 1.0) > 1e-6)
    throw ValidationError("bilger_xi: mass fractions sum to " + std::to_string(sum));
  return detail::xi_from_beta(ElementTable::beta(zh, zo), table);
}

/// Pointwise Bilger mixture fraction from species mass-fraction fields.
inline ScalarField3D bilger_xi(const std::map<std::string, ScalarField3D>& y,
                               const ElementTable& table = ElementTable()) {
  if (y.empty()) throw ValidationError("bilger_xi: no species given");
  const GridSpec& grid = y.begin()->second.grid();
  struct Entry {
    const ScalarField3D* field;
    double zh, zo;
  };
  std::vector<Entry> entries;
  for (const auto& [name, f] : y) {
    if (!(f.grid() == grid)) throw ShapeError("bilger_xi: species '" + name + "' grid mismatch");
    entries.push_back({&f, ElementTable::z_h(name), ElementTable::z_o(name)});
  }
  std::vector<double> out(grid.size());
  for (std::size_t n = 0; n < out.size(); ++n) {
    double zh = 0.0, zo = 0.0, sum = 0.0;
    for (const auto& e : entries) {
      const double v = (*e.field)[n];
      if (v < 0.0 || v > 1.0)
        throw ValidationError("bilger_xi: mass fraction outside [0,1] at linear index " +
                              std::to_string(n));
      zh += e.zh * v;
      zo += e.zo * v;
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-6)
      throw ValidationError("bilger_xi: mass fractions sum to " + std::to_string(sum) +
                            " at linear index " + std::to_string(n));
    out[n] = detail::xi_from_beta(ElementTable::beta(zh, zo), table);
  }
  return ScalarField3D(grid, std::move(out));
}

inline constexpr double kPureAirXi = 1e-6;
inline constexpr double kProgressLow = -0.01;
inline constexpr double kProgressHigh = 1.01;

struct ProgressDiagnostics {
  std::size_t below_zero = 0;
  std::size_t above_one = 0;
  /// Sum of |c - clamp(c, 0, 1)| before the [-0.01, 1.01] clamp.
  double out_of_range_mass = 0.0;
  std::size_t pure_air_points = 0;
};

struct ProgressResult {
  ScalarField3D c;
  ProgressDiagnostics diagnostics;
};

/// Pointwise progress variable from the H2 mass fraction, using the lean/rich
/// burnt-gas H2 level max(0, (xi - xi_s)/(1 - xi_s)).
inline double progress_variable(double y_h2, double xi, const MixtureConstants& mix) {
  const double burnt = std::max(0.0, (xi - mix.xi_s) / (1.0 - mix.xi_s));
  const double den = xi - burnt;
  if (den < kPureAirXi) return 0.0;
  return (xi - y_h2) / den;
}

inline ProgressResult progress_variable(const ScalarField3D& y_h2_tilde,
                                        const ScalarField3D& xi_tilde,
                                        const MixtureConstants& mix = default_mixture()) {
  if (!(y_h2_tilde.grid() == xi_tilde.grid()))
    throw ShapeError("progress_variable: grid mismatch " + y_h2_tilde.grid().shape_string() +
                     " vs " + xi_tilde.grid().shape_string());
  ProgressDiagnostics diag;
  std::vector<double> out(y_h2_tilde.size());
  for (std::size_t n = 0; n < out.size(); ++n) {
    const double burnt = std::max(0.0, (xi_tilde[n] - mix.xi_s) / (1.0 - mix.xi_s));
    if (xi_tilde[n] - burnt < kPureAirXi) {
      ++diag.pure_air_points;
      out[n] = 0.0;
      continue;
    }
    const double c = progress_variable(y_h2_tilde[n], xi_tilde[n], mix);
    if (c < 0.0) {
      ++diag.below_zero;
      diag.out_of_range_mass += -c;
    } else if (c > 1.0) {
      ++diag.above_one;
      diag.out_of_range_mass += c - 1.0;
    }
    out[n] = std::clamp(c, kProgressLow, kProgressHigh);
  }
  return {ScalarField3D(y_h2_tilde.grid(), std::move(out)), diag};
}

inline double equivalence_ratio(double xi, const MixtureConstants& mix) {
  return xi * (1.0 - mix.xi_s) / (mix.xi_s * (1.0 - xi));
}

inline ScalarField3D equivalence_ratio(const ScalarField3D& xi_tilde,
                                       const MixtureConstants& mix = default_mixture()) {
  const GridSpec& g = xi_tilde.grid();
  std::vector<double> out(g.size());
  for (std::size_t n = 0; n < out.size(); ++n) {
    const double xi = xi_tilde[n];
    if (xi >= 1.0 - 1e-6 || xi < 0.0) {
      const Index3 at = g.decompose(n);
      throw DomainError("equivalence_ratio: xi = " + std::to_string(xi) + " outside [0, 1-1e-6) at (" +
                        std::to_string(at.i) + "," + std::to_string(at.j) + "," +
                        std::to_string(at.k) + ")");
    }
    out[n] = equivalence_ratio(xi, mix);
  }
  return ScalarField3D(g, std::move(out));
}

/// Burning rate = -filtered H2 source term. H2 production is rejected.
inline ScalarField3D burning_rate(const ScalarField3D& omega_h2_filtered) {
  const GridSpec& g = omega_h2_filtered.grid();
  std::vector<double> out(g.size());
  for (std::size_t n = 0; n < out.size(); ++n) {
    const double w = omega_h2_filtered[n];
    if (w > 0.0)
      throw ValidationError("burning_rate: positive H2 source term " + std::to_string(w) +
                            " at linear index " + std::to_string(n));
    out[n] = 0.0 - w;
  }
  return ScalarField3D(g, std::move(out));
}

} // namespace h2kit
