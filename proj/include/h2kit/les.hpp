/// @file les.hpp
/// @brief DNS snapshot -> emulated LES bundle.
#pragma once

#include <string>

#include "h2kit/bundle.hpp"
#include "h2kit/filter.hpp"
#include "h2kit/thermo.hpp"

namespace h2kit {

struct EmulationReport {
  ProgressDiagnostics progress;
};

/// Adds c_tilde, phi_tilde and omega_bar to a bundle holding Y_H2_tilde,
/// xi_tilde and omega_H2_bar.
inline void derive_les_fields(SnapshotBundle& b, const MixtureConstants& mix = default_mixture(),
                              EmulationReport* report = nullptr) {
  ProgressResult c = progress_variable(b.field(names::y_h2_tilde), b.field(names::xi_tilde), mix);
  if (report) report->progress = c.diagnostics;
  b.set(names::c_tilde, std::move(c.c));
  b.set(names::phi_tilde, equivalence_ratio(b.field(names::xi_tilde), mix));
  b.set(names::omega_bar, burning_rate(b.field(names::omega_h2_bar)));
}

/// Filters a snapshot into rho_bar, Y_H2_tilde, xi_tilde and omega_H2_bar
/// and derives c_tilde, phi_tilde and omega_bar on the coarse grid.
///
/// omega_H2 is plain-filtered; Y_H2 and xi are Favre-filtered.
inline SnapshotBundle emulate_les(const SnapshotBundle& snap, const LESParams& params,
                                  const MixtureConstants& mix = default_mixture(),
                                  unsigned threads = 1, EmulationReport* report = nullptr) {
  params.validate();
  validate_snapshot(snap);
  const GaussianKernel1D k = build_kernel(params.sigma);

  const ScalarField3D& rho = snap.field(names::rho);
  const ScalarField3D rho_bar = filter_field(rho, k, threads);
  const ScalarField3D y_tilde = favre_average(rho, rho_bar, snap.field(names::y_h2), k, threads);
  const ScalarField3D xi_tilde = favre_average(rho, rho_bar, snap.field(names::xi), k, threads);
  const ScalarField3D omega_h2_bar = filter_field(snap.field(names::omega_h2), k, threads);

  SnapshotBundle out;
  out.case_id = snap.case_id;
  out.time_index = snap.time_index;
  out.phi_g = snap.phi_g;
  out.attributes = snap.attributes;
  out.attributes[names::attr_sigma] = params.sigma;
  out.attributes[names::attr_dsf] = static_cast<double>(params.dsf);
  out.attributes[names::attr_fine_dx] = snap.grid.dx();
  out.attributes[names::attr_xi_s] = mix.xi_s;
  if (params.delta_ratio) out.attributes[names::attr_delta_ratio] = *params.delta_ratio;
  if (params.delta1) out.attributes[names::attr_delta1] = *params.delta1;

  ScalarField3D rho_c = downsample(rho_bar, params.dsf);
  out.grid = rho_c.grid();
  out.set(names::rho_bar, std::move(rho_c));
  out.set(names::y_h2_tilde, downsample(y_tilde, params.dsf));
  out.set(names::xi_tilde, downsample(xi_tilde, params.dsf));
  out.set(names::omega_h2_bar, downsample(omega_h2_bar, params.dsf));
  derive_les_fields(out, mix, report);
  return out;
}

} // namespace h2kit
