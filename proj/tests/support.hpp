// Shared helpers for the unit tests and the acceptance binary.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <unistd.h>

#include "h2kit/field.hpp"
#include "h2kit/rng.hpp"

namespace h2test {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("h2kit_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
  std::filesystem::path path_;
};

inline h2kit::ScalarField3D random_field(const h2kit::GridSpec& g, std::uint64_t seed,
                                         double lo = 0.0, double hi = 1.0) {
  h2kit::CounterRng rng(seed);
  std::vector<double> v(g.size());
  for (auto& x : v) x = lo + (hi - lo) * rng.uniform();
  return h2kit::ScalarField3D(g, std::move(v));
}

/// Direct 3D convolution with the truncated Gaussian exp(-|r|^2 / 2 sigma^2)
/// over the box |u|,|v|,|w| <= round(4 sigma). Periodic axes wrap; on clamp
/// axes out-of-range offsets are dropped and the surviving weights
/// renormalized. Written without the library kernel on purpose.
inline std::vector<double> brute_force_filter(const h2kit::ScalarField3D& f, double sigma) {
  const h2kit::GridSpec& g = f.grid();
  const long z = std::lround(4.0 * sigma);
  const long n[3] = {static_cast<long>(g.nx()), static_cast<long>(g.ny()), static_cast<long>(g.nz())};
  std::vector<double> out(g.size());
  auto resolve = [&](long idx, int axis, bool& ok) {
    if (g.boundary(axis) == h2kit::Boundary::periodic) return ((idx % n[axis]) + n[axis]) % n[axis];
    ok = ok && idx >= 0 && idx < n[axis];
    return idx;
  };
  for (long k = 0; k < n[2]; ++k)
    for (long j = 0; j < n[1]; ++j)
      for (long i = 0; i < n[0]; ++i) {
        double num = 0.0, den = 0.0;
        for (long w = -z; w <= z; ++w)
          for (long v = -z; v <= z; ++v)
            for (long u = -z; u <= z; ++u) {
              bool ok = true;
              const long ii = resolve(i + u, 0, ok), jj = resolve(j + v, 1, ok), kk = resolve(k + w, 2, ok);
              if (!ok) continue;
              const double wt = std::exp(-static_cast<double>(u * u + v * v + w * w) / (2.0 * sigma * sigma));
              num += wt * f(static_cast<std::size_t>(ii), static_cast<std::size_t>(jj), static_cast<std::size_t>(kk));
              den += wt;
            }
        out[static_cast<std::size_t>(i + n[0] * (j + n[1] * k))] = num / den;
      }
  return out;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) m = std::max(m, std::abs(a[n] - b[n]));
  return m;
}

inline const std::array<h2kit::Boundary, 3> kPeriodic{h2kit::Boundary::periodic, h2kit::Boundary::periodic,
                                                       h2kit::Boundary::periodic};
inline const std::array<h2kit::Boundary, 3> kClamp{h2kit::Boundary::clamp, h2kit::Boundary::clamp,
                                                    h2kit::Boundary::clamp};

} // namespace h2test
