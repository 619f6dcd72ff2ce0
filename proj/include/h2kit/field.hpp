/// @file field.hpp
/// @brief Uniform structured grid and the 3D scalar field stored on it.
///
/// Data are stored x-fastest: the linear index of (i,j,k) is
/// i + nx*(j + ny*k). Every format and every algorithm in h2kit assumes this
/// layout.
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "h2kit/error.hpp"

namespace h2kit {

enum class Boundary : std::uint8_t { periodic = 0, clamp = 1 };

inline const char* to_string(Boundary b) {
  return b == Boundary::periodic ? "periodic" : "clamp";
}

struct Index3 {
  std::size_t i = 0, j = 0, k = 0;
  friend bool operator==(const Index3&, const Index3&) = default;
};

/// Point counts, isotropic spacing [m] and per-axis boundary mode.
class GridSpec {
public:
  GridSpec() = default;

  GridSpec(std::size_t nx, std::size_t ny, std::size_t nz, double dx,
           std::array<Boundary, 3> boundary = {Boundary::clamp, Boundary::clamp,
                                               Boundary::clamp})
      : dims_{nx, ny, nz}, dx_(dx), boundary_(boundary) {
    if (nx < 1 || ny < 1 || nz < 1)
      throw DomainError("GridSpec: point counts must be >= 1");
    if (!(dx > 0.0) || !std::isfinite(dx))
      throw DomainError("GridSpec: spacing must be positive and finite");
  }

  std::size_t nx() const { return dims_[0]; }
  std::size_t ny() const { return dims_[1]; }
  std::size_t nz() const { return dims_[2]; }
  std::size_t dim(int axis) const { return dims_.at(static_cast<std::size_t>(axis)); }
  const std::array<std::size_t, 3>& dims() const { return dims_; }
  double dx() const { return dx_; }
  Boundary boundary(int axis) const { return boundary_.at(static_cast<std::size_t>(axis)); }
  const std::array<Boundary, 3>& boundaries() const { return boundary_; }

  std::size_t size() const { return dims_[0] * dims_[1] * dims_[2]; }

  std::size_t linear(std::size_t i, std::size_t j, std::size_t k) const {
    return i + dims_[0] * (j + dims_[1] * k);
  }

  Index3 decompose(std::size_t linear_index) const {
    Index3 idx;
    idx.i = linear_index % dims_[0];
    linear_index /= dims_[0];
    idx.j = linear_index % dims_[1];
    idx.k = linear_index / dims_[1];
    return idx;
  }

  /// Same grid with a different spacing (used by downsampling).
  GridSpec with_shape(std::size_t nx, std::size_t ny, std::size_t nz, double dx) const {
    return GridSpec(nx, ny, nz, dx, boundary_);
  }

  std::string shape_string() const {
    return std::to_string(dims_[0]) + "x" + std::to_string(dims_[1]) + "x" +
           std::to_string(dims_[2]);
  }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;

private:
  std::array<std::size_t, 3> dims_{1, 1, 1};
  double dx_ = 1.0;
  std::array<Boundary, 3> boundary_{Boundary::clamp, Boundary::clamp, Boundary::clamp};
};

/// Double-precision scalar on a GridSpec. Values are immutable after
/// construction and always finite.
class ScalarField3D {
public:
  ScalarField3D() : data_(1, 0.0) {}

  explicit ScalarField3D(const GridSpec& grid, double value = 0.0)
      : grid_(grid), data_(grid.size(), value) {
    if (!std::isfinite(value))
      throw ValidationError("ScalarField3D: non-finite fill value");
  }

  ScalarField3D(const GridSpec& grid, std::vector<double> data)
      : grid_(grid), data_(std::move(data)) {
    if (data_.size() != grid_.size())
      throw ShapeError("ScalarField3D: data length " + std::to_string(data_.size()) +
                       " does not match grid " + grid_.shape_string());
    for (std::size_t n = 0; n < data_.size(); ++n)
      if (!std::isfinite(data_[n]))
        throw ValidationError("ScalarField3D: non-finite value at linear index " +
                              std::to_string(n));
  }

  const GridSpec& grid() const { return grid_; }
  std::size_t size() const { return data_.size(); }
  std::span<const double> values() const { return data_; }
  double operator[](std::size_t n) const { return data_[n]; }

  /// Unchecked access.
  double operator()(std::size_t i, std::size_t j, std::size_t k) const {
    return data_[grid_.linear(i, j, k)];
  }

  double at(std::size_t i, std::size_t j, std::size_t k) const {
    if (i >= grid_.nx() || j >= grid_.ny() || k >= grid_.nz())
      throw BoundsError("ScalarField3D::at: (" + std::to_string(i) + "," + std::to_string(j) +
                        "," + std::to_string(k) + ") outside " + grid_.shape_string());
    return data_[grid_.linear(i, j, k)];
  }

  /// Moves the storage out; the field is left empty.
  std::vector<double> release() && { return std::move(data_); }

private:
  GridSpec grid_;
  std::vector<double> data_;
};

template <class F>
ScalarField3D map_unary(const ScalarField3D& a, F&& f) {
  std::vector<double> out(a.size());
  for (std::size_t n = 0; n < out.size(); ++n) out[n] = f(a[n]);
  return ScalarField3D(a.grid(), std::move(out));
}

/// Element-wise f(a_n, b_n). Grids must be identical.
template <class F>
ScalarField3D map_binary(const ScalarField3D& a, const ScalarField3D& b, F&& f) {
  if (!(a.grid() == b.grid()))
    throw ShapeError("map_binary: grid mismatch " + a.grid().shape_string() + " vs " +
                     b.grid().shape_string());
  std::vector<double> out(a.size());
  for (std::size_t n = 0; n < out.size(); ++n) out[n] = f(a[n], b[n]);
  return ScalarField3D(a.grid(), std::move(out));
}

inline double field_min(const ScalarField3D& f) {
  double m = f[0];
  for (double v : f.values()) m = v < m ? v : m;
  return m;
}

inline double field_max(const ScalarField3D& f) {
  double m = f[0];
  for (double v : f.values()) m = v > m ? v : m;
  return m;
}

} // namespace h2kit
