/// @file sampling.hpp
/// @brief Snapshot test/train-val split, random cube extraction, rotation and
///        flip augmentation, train/val assignment.
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "h2kit/bundle.hpp"
#include "h2kit/cube.hpp"
#include "h2kit/error.hpp"
#include "h2kit/rng.hpp"

namespace h2kit {

enum class SnapshotRole { test, trainval };

/// Snapshots whose time index is a multiple of 10 are held out for testing.
inline SnapshotRole snapshot_role(std::int64_t time_index) {
  return time_index % 10 == 0 ? SnapshotRole::test : SnapshotRole::trainval;
}

inline std::vector<SnapshotRole> split_snapshots(const std::vector<std::int64_t>& indices) {
  std::vector<SnapshotRole> roles;
  roles.reserve(indices.size());
  for (auto t : indices) roles.push_back(snapshot_role(t));
  return roles;
}

struct CubeCorner {
  std::size_t i = 0, j = 0, k = 0;
};

/// `n` uniformly random corners (with replacement) such that the cube fits.
inline std::vector<CubeCorner> draw_cube_corners(const GridSpec& g, std::size_t n, std::size_t edge,
                                                 CounterRng& rng) {
  if (edge == 0) throw SizeError("extract_cubes: cube edge must be positive");
  if (g.nx() < edge || g.ny() < edge || g.nz() < edge)
    throw SizeError("extract_cubes: domain " + g.shape_string() + " smaller than cube edge " +
                    std::to_string(edge));
  std::vector<CubeCorner> corners(n);
  for (auto& c : corners) {
    c.i = rng.below(g.nx() - edge + 1);
    c.j = rng.below(g.ny() - edge + 1);
    c.k = rng.below(g.nz() - edge + 1);
  }
  return corners;
}

inline CubeSample cut_cube(const SnapshotBundle& derived, const CubeCorner& at, std::size_t edge,
                           float delta_ratio) {
  const ScalarField3D* src[3] = {&derived.field(names::c_tilde), &derived.field(names::phi_tilde),
                                 &derived.field(names::omega_bar)};
  CubeSample s;
  s.edge = edge;
  for (auto& ch : s.channels) ch.resize(s.voxels());
  std::size_t n = 0;
  for (std::size_t k = 0; k < edge; ++k)
    for (std::size_t j = 0; j < edge; ++j)
      for (std::size_t i = 0; i < edge; ++i, ++n) {
        s.channels[kChanC][n] = static_cast<float>((*src[0])(at.i + i, at.j + j, at.k + k));
        s.channels[kChanPhi][n] = static_cast<float>((*src[1])(at.i + i, at.j + j, at.k + k));
        s.channels[kChanOmega][n] = static_cast<float>((*src[2])(at.i + i, at.j + j, at.k + k));
        s.channels[kChanDelta][n] = delta_ratio;
      }
  return s;
}

/// Extracts `n` random cubes of edge `edge` from an emulated-LES bundle. The
/// bundle must carry the sigma, dsf and delta_ratio attributes.
inline std::vector<CubeSample> extract_cubes(const SnapshotBundle& derived, std::size_t n,
                                             std::size_t edge, CounterRng& rng,
                                             std::uint32_t source_id = 0) {
  if (n < 1) throw DomainError("extract_cubes: cube count must be >= 1");
  const auto ratio = derived.attribute(names::attr_delta_ratio);
  if (!ratio) throw ValidationError("extract_cubes: bundle lacks the delta_ratio attribute");
  if (!(*ratio > 0.0 && *ratio <= 1.0))
    throw ValidationError("extract_cubes: delta ratio " + std::to_string(*ratio) + " outside (0,1]");
  CubeMeta meta;
  meta.phi_g = static_cast<float>(derived.phi_g);
  meta.sigma = static_cast<float>(derived.attribute(names::attr_sigma).value_or(0.0));
  meta.dsf = static_cast<float>(derived.attribute(names::attr_dsf).value_or(1.0));
  meta.delta_ratio = static_cast<float>(*ratio);
  meta.case_id = source_id;

  std::vector<CubeSample> out;
  out.reserve(n);
  for (const auto& corner : draw_cube_corners(derived.grid, n, edge, rng)) {
    CubeSample s = cut_cube(derived, corner, edge, meta.delta_ratio);
    s.meta = meta;
    out.push_back(std::move(s));
  }
  return out;
}

inline std::vector<CubeSample> extract_cubes(const SnapshotBundle& derived, std::size_t n,
                                             std::size_t edge, std::uint64_t seed,
                                             std::uint32_t source_id = 0) {
  CounterRng rng = CounterRng::stream(seed, source_id);
  return extract_cubes(derived, n, edge, rng, source_id);
}

// ---------------------------------------------------------------------------
// Augmentation
// ---------------------------------------------------------------------------

struct CubeTransform {
  enum class Kind { identity, rotate, flip };
  Kind kind = Kind::identity;
  int axis = 0;   ///< 0 = x, 1 = y, 2 = z
  int turns = 0;  ///< quarter turns for rotations, 1..3
  friend bool operator==(const CubeTransform&, const CubeTransform&) = default;
};

inline constexpr double kAugmentProbability = 0.25;

/// With probability 0.25 a transform is applied; rotation or flip with equal
/// odds, axis uniform, quarter-turn count uniform in {1,2,3}.
inline CubeTransform draw_transform(CounterRng& rng) {
  CubeTransform t;
  if (!(rng.uniform() < kAugmentProbability)) return t;
  const bool rotate = rng.below(2) == 0;
  t.axis = static_cast<int>(rng.below(3));
  if (rotate) {
    t.kind = CubeTransform::Kind::rotate;
    t.turns = 1 + static_cast<int>(rng.below(3));
  } else {
    t.kind = CubeTransform::Kind::flip;
  }
  return t;
}

inline CubeTransform inverse(const CubeTransform& t) {
  CubeTransform inv = t;
  if (t.kind == CubeTransform::Kind::rotate) inv.turns = (4 - t.turns) % 4;
  return inv;
}

namespace detail {
/// Source coordinate for destination coordinate `d` under one quarter turn
/// about `axis`: the plane (p, q) of the two other axes maps as
/// dst(p, q) = src(q, N-1-p).
inline std::array<std::size_t, 3> quarter_turn_source(std::array<std::size_t, 3> d, int axis,
                                                      std::size_t edge) {
  const int p = (axis + 1) % 3, q = (axis + 2) % 3;
  std::array<std::size_t, 3> s = d;
  s[static_cast<std::size_t>(p)] = d[static_cast<std::size_t>(q)];
  s[static_cast<std::size_t>(q)] = edge - 1 - d[static_cast<std::size_t>(p)];
  return s;
}
} // namespace detail

inline CubeSample apply_transform(const CubeSample& in, const CubeTransform& t) {
  in.check_shape();
  if (t.kind == CubeTransform::Kind::identity) return in;
  if (t.kind == CubeTransform::Kind::rotate && t.turns % 4 == 0) return in;
  if (t.axis < 0 || t.axis > 2) throw DomainError("apply_transform: axis must be 0, 1 or 2");
  const std::size_t e = in.edge;
  CubeSample out = in;
  std::vector<std::size_t> src_index(in.voxels());
  for (std::size_t k = 0; k < e; ++k)
    for (std::size_t j = 0; j < e; ++j)
      for (std::size_t i = 0; i < e; ++i) {
        std::array<std::size_t, 3> s{i, j, k};
        if (t.kind == CubeTransform::Kind::flip) {
          s[static_cast<std::size_t>(t.axis)] = e - 1 - s[static_cast<std::size_t>(t.axis)];
        } else {
          for (int r = 0; r < t.turns % 4; ++r) s = detail::quarter_turn_source(s, t.axis, e);
        }
        src_index[in.index(i, j, k)] = in.index(s[0], s[1], s[2]);
      }
  for (std::size_t c = 0; c < kCubeChannels; ++c)
    for (std::size_t n = 0; n < src_index.size(); ++n) out.channels[c][n] = in.channels[c][src_index[n]];
  return out;
}

/// Draws and applies one random augmentation. Channels that are not
/// edge^3 long raise ShapeError.
inline CubeSample augment(const CubeSample& s, CounterRng& rng) {
  return apply_transform(s, draw_transform(rng));
}

// ---------------------------------------------------------------------------
// Train/validation split
// ---------------------------------------------------------------------------

/// Tags round(fraction * count) uniformly chosen samples as validation.
inline std::vector<SplitTag> assign_train_val(std::size_t count, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw DomainError("assign_train_val: fraction must lie in (0,1)");
  const auto nval = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(count)));
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  CounterRng rng = CounterRng::stream(seed, 0x5eed5117ULL);
  // Partial Fisher-Yates: the first nval entries are a uniform subset.
  for (std::size_t n = 0; n < nval; ++n) {
    const std::size_t pick = n + static_cast<std::size_t>(rng.below(count - n));
    std::swap(order[n], order[pick]);
  }
  std::vector<SplitTag> tags(count, SplitTag::train);
  for (std::size_t n = 0; n < nval; ++n) tags[order[n]] = SplitTag::val;
  return tags;
}

inline void assign_train_val(std::vector<CubeSample>& samples, double fraction, std::uint64_t seed) {
  const auto tags = assign_train_val(samples.size(), fraction, seed);
  for (std::size_t n = 0; n < samples.size(); ++n) samples[n].meta.split = tags[n];
}

} // namespace h2kit
