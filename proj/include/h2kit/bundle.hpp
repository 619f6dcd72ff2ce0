/// @file bundle.hpp
/// @brief Named collection of fields on one grid plus case metadata.
///
/// The same container carries raw DNS snapshots (rho, Y_H2, xi, omega_H2,
/// optional further Y_*), emulated-LES bundles (rho_bar, Y_H2_tilde,
/// xi_tilde, omega_H2_bar, c_tilde, phi_tilde, omega_bar) and single-field
/// prediction files. Numeric metadata (sigma, DSF, ...) goes in
/// `attributes`.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "h2kit/error.hpp"
#include "h2kit/field.hpp"

namespace h2kit {

namespace names {
inline constexpr const char* rho = "rho";
inline constexpr const char* y_h2 = "Y_H2";
inline constexpr const char* xi = "xi";
inline constexpr const char* omega_h2 = "omega_H2";

inline constexpr const char* rho_bar = "rho_bar";
inline constexpr const char* y_h2_tilde = "Y_H2_tilde";
inline constexpr const char* xi_tilde = "xi_tilde";
inline constexpr const char* omega_h2_bar = "omega_H2_bar";
inline constexpr const char* c_tilde = "c_tilde";
inline constexpr const char* phi_tilde = "phi_tilde";
inline constexpr const char* omega_bar = "omega_bar";

inline constexpr const char* attr_sigma = "sigma";
inline constexpr const char* attr_dsf = "dsf";
inline constexpr const char* attr_fine_dx = "fine_dx";
inline constexpr const char* attr_delta_ratio = "delta_ratio";
inline constexpr const char* attr_delta1 = "delta1";
inline constexpr const char* attr_xi_s = "xi_s";
} // namespace names

struct SnapshotBundle {
  std::string case_id;
  std::int32_t time_index = 0;
  double phi_g = 0.0;
  GridSpec grid;
  std::map<std::string, ScalarField3D> fields;
  std::map<std::string, double> attributes;

  bool has(const std::string& name) const { return fields.count(name) != 0; }

  const ScalarField3D& field(const std::string& name) const {
    auto it = fields.find(name);
    if (it == fields.end())
      throw ValidationError("bundle '" + case_id + "': missing field '" + name + "'");
    return it->second;
  }

  std::optional<double> attribute(const std::string& name) const {
    auto it = attributes.find(name);
    if (it == attributes.end()) return std::nullopt;
    return it->second;
  }

  /// Inserts or replaces; the field must be on the bundle grid.
  void set(const std::string& name, ScalarField3D f) {
    if (!(f.grid() == grid))
      throw ShapeError("bundle '" + case_id + "': field '" + name + "' has grid " +
                       f.grid().shape_string() + ", bundle grid is " + grid.shape_string());
    fields.insert_or_assign(name, std::move(f));
  }

  friend bool operator==(const SnapshotBundle& a, const SnapshotBundle& b) {
    if (a.case_id != b.case_id || a.time_index != b.time_index || a.phi_g != b.phi_g ||
        !(a.grid == b.grid) || a.attributes != b.attributes || a.fields.size() != b.fields.size())
      return false;
    for (const auto& [name, f] : a.fields) {
      auto it = b.fields.find(name);
      if (it == b.fields.end() || !(it->second.grid() == f.grid())) return false;
      for (std::size_t n = 0; n < f.size(); ++n)
        if (f[n] != it->second[n]) return false;
    }
    return true;
  }
};

namespace detail {
template <class Pred>
void check_field(const SnapshotBundle& b, const char* name, Pred ok, const char* what) {
  const ScalarField3D& f = b.field(name);
  for (std::size_t n = 0; n < f.size(); ++n) {
    if (!ok(f[n])) {
      const Index3 at = f.grid().decompose(n);
      throw ValidationError(std::string("field '") + name + "' violates " + what + " at (" +
                            std::to_string(at.i) + "," + std::to_string(at.j) + "," +
                            std::to_string(at.k) + "), value " + std::to_string(f[n]));
    }
  }
}

inline void check_shared_grid(const SnapshotBundle& b) {
  for (const auto& [name, f] : b.fields)
    if (!(f.grid() == b.grid))
      throw ValidationError("field '" + name + "' grid " + f.grid().shape_string() +
                            " differs from bundle grid " + b.grid.shape_string());
}
} // namespace detail

/// Raw-snapshot invariants: required fields present, shared grid,
/// rho > 0, Y_H2 and xi in [0,1], omega_H2 <= 0.
inline void validate_snapshot(const SnapshotBundle& b) {
  detail::check_shared_grid(b);
  detail::check_field(b, names::rho, [](double v) { return v > 0.0; }, "rho > 0");
  detail::check_field(b, names::y_h2, [](double v) { return v >= 0.0 && v <= 1.0; }, "0 <= Y_H2 <= 1");
  detail::check_field(b, names::xi, [](double v) { return v >= 0.0 && v <= 1.0; }, "0 <= xi <= 1");
  detail::check_field(b, names::omega_h2, [](double v) { return v <= 0.0; }, "omega_H2 <= 0");
}

/// Emulated-LES invariants: derived fields present, omega_bar >= 0.
inline void validate_derived(const SnapshotBundle& b) {
  detail::check_shared_grid(b);
  detail::check_field(b, names::rho_bar, [](double v) { return v > 0.0; }, "rho_bar > 0");
  detail::check_field(b, names::c_tilde, [](double v) { return v >= -0.01 && v <= 1.01; },
                      "-0.01 <= c_tilde <= 1.01");
  (void)b.field(names::phi_tilde);
  detail::check_field(b, names::omega_bar, [](double v) { return v >= 0.0; }, "omega_bar >= 0");
}

} // namespace h2kit
