/// @file profile.hpp
/// @brief 1D laminar flame profile (external input of the tabulated baseline).
#pragma once

#include <vector>

namespace h2kit {

struct FlameletProfile {
  std::vector<double> x;      ///< [m], strictly increasing
  std::vector<double> c;      ///< progress variable, non-decreasing
  std::vector<double> omega;  ///< burning rate [kg/m^3/s], >= 0
  std::vector<double> rho;    ///< density [kg/m^3], > 0
  double phi = 0.0;           ///< fresh-gas equivalence ratio

  std::size_t size() const { return x.size(); }
  double spacing() const { return x.size() > 1 ? (x.back() - x.front()) / double(x.size() - 1) : 0.0; }
  friend bool operator==(const FlameletProfile&, const FlameletProfile&) = default;
};

} // namespace h2kit
