#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "h2kit/sampling.hpp"
#include "support.hpp"

using namespace h2kit;

namespace {

// Derived bundle whose channels encode their own coordinates.
SnapshotBundle coordinate_bundle(std::size_t nx, std::size_t ny, std::size_t nz) {
  const GridSpec g(nx, ny, nz, 2e-4, h2test::kPeriodic);
  std::vector<double> c(g.size()), phi(g.size()), om(g.size());
  for (std::size_t n = 0; n < g.size(); ++n) {
    const Index3 at = g.decompose(n);
    c[n] = static_cast<double>(at.i);
    phi[n] = static_cast<double>(at.j);
    om[n] = static_cast<double>(at.k);
  }
  SnapshotBundle b;
  b.grid = g;
  b.phi_g = 0.4;
  b.set(names::c_tilde, ScalarField3D(g, std::move(c)));
  b.set(names::phi_tilde, ScalarField3D(g, std::move(phi)));
  b.set(names::omega_bar, ScalarField3D(g, std::move(om)));
  b.attributes[names::attr_sigma] = 4.0;
  b.attributes[names::attr_dsf] = 2.0;
  b.attributes[names::attr_delta_ratio] = 0.6;
  return b;
}

CubeSample counting_cube(std::size_t edge) {
  CubeSample s;
  s.edge = edge;
  for (std::size_t c = 0; c < kCubeChannels; ++c) {
    s.channels[c].resize(s.voxels());
    for (std::size_t n = 0; n < s.voxels(); ++n) s.channels[c][n] = static_cast<float>(c * 10000 + n);
  }
  return s;
}

CubeTransform rotation(int axis, int turns) {
  return {CubeTransform::Kind::rotate, axis, turns};
}

CubeTransform flip(int axis) { return {CubeTransform::Kind::flip, axis, 0}; }

} // namespace

TEST(Split, SixtySnapshots) {
  std::vector<std::int64_t> idx(60);
  for (std::int64_t t = 0; t < 60; ++t) idx[static_cast<std::size_t>(t)] = t;
  const auto roles = split_snapshots(idx);
  EXPECT_EQ(std::count(roles.begin(), roles.end(), SnapshotRole::test), 6);
  EXPECT_EQ(std::count(roles.begin(), roles.end(), SnapshotRole::trainval), 54);
  EXPECT_EQ(snapshot_role(7), SnapshotRole::trainval);
  EXPECT_EQ(snapshot_role(40), SnapshotRole::test);
  EXPECT_EQ(snapshot_role(0), SnapshotRole::test);
}

TEST(Extract, FullDomainCubeHasZeroCorner) {
  const SnapshotBundle b = coordinate_bundle(16, 16, 16);
  const auto cubes = extract_cubes(b, 3, 16, std::uint64_t{5});
  ASSERT_EQ(cubes.size(), 3u);
  for (const auto& s : cubes) {
    EXPECT_EQ(s.channels[kChanC][0], 0.0f);
    EXPECT_EQ(s.channels[kChanPhi][0], 0.0f);
    EXPECT_EQ(s.channels[kChanOmega][0], 0.0f);
    EXPECT_EQ(s.channels[kChanC][s.index(15, 0, 0)], 15.0f);
  }
}

TEST(Extract, MetadataAndDeltaChannel) {
  const SnapshotBundle b = coordinate_bundle(20, 18, 17);
  const auto cubes = extract_cubes(b, 4, 8, std::uint64_t{1}, encode_source_id(2, 31));
  for (const auto& s : cubes) {
    EXPECT_EQ(s.meta.phi_g, 0.4f);
    EXPECT_EQ(s.meta.sigma, 4.0f);
    EXPECT_EQ(s.meta.dsf, 2.0f);
    EXPECT_EQ(s.meta.delta_ratio, 0.6f);
    EXPECT_EQ(s.meta.case_id, 2031u);
    for (float v : s.channels[kChanDelta]) EXPECT_EQ(v, 0.6f);
  }
}

TEST(Extract, CubesAreContiguousAndInBounds) {
  const SnapshotBundle b = coordinate_bundle(24, 20, 18);
  const std::size_t e = 8;
  const auto cubes = extract_cubes(b, 200, e, std::uint64_t{9});
  std::set<std::array<float, 3>> corners;
  for (const auto& s : cubes) {
    const float i0 = s.channels[kChanC][0], j0 = s.channels[kChanPhi][0], k0 = s.channels[kChanOmega][0];
    EXPECT_LE(i0 + e, 24.0f);
    EXPECT_LE(j0 + e, 20.0f);
    EXPECT_LE(k0 + e, 18.0f);
    corners.insert({i0, j0, k0});
    for (std::size_t k = 0; k < e; ++k)
      for (std::size_t j = 0; j < e; ++j)
        for (std::size_t i = 0; i < e; ++i) {
          const std::size_t n = s.index(i, j, k);
          ASSERT_EQ(s.channels[kChanC][n], i0 + static_cast<float>(i));
          ASSERT_EQ(s.channels[kChanPhi][n], j0 + static_cast<float>(j));
          ASSERT_EQ(s.channels[kChanOmega][n], k0 + static_cast<float>(k));
        }
  }
  EXPECT_GT(corners.size(), 100u);
}

TEST(Extract, DeterministicPerSeedAndSource) {
  const SnapshotBundle b = coordinate_bundle(20, 20, 20);
  const auto a1 = extract_cubes(b, 10, 4, std::uint64_t{3}, 7);
  const auto a2 = extract_cubes(b, 10, 4, std::uint64_t{3}, 7);
  const auto other_seed = extract_cubes(b, 10, 4, std::uint64_t{4}, 7);
  const auto other_source = extract_cubes(b, 10, 4, std::uint64_t{3}, 8);
  EXPECT_EQ(a1, a2);
  auto same_corners = [](const std::vector<CubeSample>& x, const std::vector<CubeSample>& y) {
    for (std::size_t n = 0; n < x.size(); ++n)
      if (x[n].channels != y[n].channels) return false;
    return true;
  };
  EXPECT_FALSE(same_corners(a1, other_seed));
  EXPECT_FALSE(same_corners(a1, other_source));
}

TEST(Extract, Rejections) {
  const SnapshotBundle b = coordinate_bundle(12, 12, 12);
  EXPECT_THROW(extract_cubes(b, 1, 16, std::uint64_t{0}), SizeError);
  EXPECT_THROW(extract_cubes(b, 1, 0, std::uint64_t{0}), SizeError);
  EXPECT_THROW(extract_cubes(b, 0, 4, std::uint64_t{0}), DomainError);
  SnapshotBundle no_ratio = b;
  no_ratio.attributes.erase(names::attr_delta_ratio);
  EXPECT_THROW(extract_cubes(no_ratio, 1, 4, std::uint64_t{0}), ValidationError);
}

TEST(Augment, FourQuarterTurnsAreIdentity) {
  const CubeSample s = counting_cube(5);
  for (int axis = 0; axis < 3; ++axis) {
    CubeSample r = s;
    for (int n = 0; n < 4; ++n) r = apply_transform(r, rotation(axis, 1));
    EXPECT_EQ(r, s) << axis;
    EXPECT_NE(apply_transform(s, rotation(axis, 1)), s);
  }
}

TEST(Augment, DoubleFlipIsIdentity) {
  const CubeSample s = counting_cube(4);
  for (int axis = 0; axis < 3; ++axis) {
    const CubeSample once = apply_transform(s, flip(axis));
    EXPECT_NE(once, s);
    EXPECT_EQ(apply_transform(once, flip(axis)), s);
  }
}

TEST(Augment, InverseUndoesEveryTransform) {
  const CubeSample s = counting_cube(4);
  for (int axis = 0; axis < 3; ++axis) {
    for (int turns = 1; turns <= 3; ++turns) {
      const auto t = rotation(axis, turns);
      EXPECT_EQ(apply_transform(apply_transform(s, t), inverse(t)), s);
    }
    EXPECT_EQ(apply_transform(apply_transform(s, flip(axis)), inverse(flip(axis))), s);
  }
}

TEST(Augment, QuarterTurnMovesExpectedVoxel) {
  CubeSample s = counting_cube(3);
  const CubeSample r = apply_transform(s, rotation(2, 1));
  // About z, dst(i, j) = src(j, N-1-i).
  EXPECT_EQ(r.channels[0][r.index(0, 0, 1)], s.channels[0][s.index(0, 2, 1)]);
  EXPECT_EQ(r.channels[0][r.index(2, 1, 0)], s.channels[0][s.index(1, 0, 0)]);
}

TEST(Augment, ValueMultisetPreserved) {
  const CubeSample s = counting_cube(4);
  CounterRng rng(11);
  for (int n = 0; n < 200; ++n) {
    const CubeSample out = augment(s, rng);
    for (std::size_t c = 0; c < kCubeChannels; ++c) {
      auto a = out.channels[c], b = s.channels[c];
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      ASSERT_EQ(a, b);
    }
    EXPECT_EQ(out.meta, s.meta);
  }
}

TEST(Augment, ApplicationFrequency) {
  CounterRng rng = CounterRng::stream(2024, 1);
  const int draws = 100000;
  int applied = 0, rotations = 0;
  std::array<int, 3> axes{};
  for (int n = 0; n < draws; ++n) {
    const CubeTransform t = draw_transform(rng);
    if (t.kind == CubeTransform::Kind::identity) continue;
    ++applied;
    ++axes[static_cast<std::size_t>(t.axis)];
    if (t.kind == CubeTransform::Kind::rotate) {
      ++rotations;
      EXPECT_GE(t.turns, 1);
      EXPECT_LE(t.turns, 3);
    }
  }
  EXPECT_NEAR(applied / static_cast<double>(draws), 0.25, 0.01);
  EXPECT_NEAR(rotations / static_cast<double>(applied), 0.5, 0.02);
  for (int a : axes) EXPECT_NEAR(a / static_cast<double>(applied), 1.0 / 3.0, 0.02);
}

TEST(Augment, MalformedCubeRejected) {
  CubeSample s = counting_cube(3);
  s.channels[1].resize(5);
  CounterRng rng(0);
  EXPECT_THROW(augment(s, rng), ShapeError);
}

TEST(TrainVal, RoundedValidationCount) {
  auto count_val = [](const std::vector<SplitTag>& tags) {
    return std::count(tags.begin(), tags.end(), SplitTag::val);
  };
  EXPECT_EQ(count_val(assign_train_val(32400, 0.10, 0)), 3240);
  EXPECT_EQ(count_val(assign_train_val(10, 0.10, 0)), 1);
  EXPECT_EQ(count_val(assign_train_val(15, 0.10, 0)), 2);
  EXPECT_EQ(count_val(assign_train_val(0, 0.10, 0)), 0);
  EXPECT_THROW(assign_train_val(10, 0.0, 0), DomainError);
  EXPECT_THROW(assign_train_val(10, 1.0, 0), DomainError);
}

TEST(TrainVal, DeterministicAndSeedDependent) {
  EXPECT_EQ(assign_train_val(500, 0.1, 42), assign_train_val(500, 0.1, 42));
  EXPECT_NE(assign_train_val(500, 0.1, 42), assign_train_val(500, 0.1, 43));
}

TEST(TrainVal, TagsSamples) {
  std::vector<CubeSample> s(20, counting_cube(2));
  assign_train_val(s, 0.25, 1);
  const auto tags = assign_train_val(20, 0.25, 1);
  for (std::size_t n = 0; n < s.size(); ++n) EXPECT_EQ(s[n].meta.split, tags[n]);
}
