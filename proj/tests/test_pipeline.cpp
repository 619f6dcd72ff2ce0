#include <gtest/gtest.h>

#include <cstdio>
#include <sstream>

#include <sys/wait.h>

#include "dataset.hpp"
#include "h2kit/pipeline.hpp"
#include "support.hpp"

using namespace h2kit;
using h2test::TempDir;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code;
  std::string out, err;
};

CliResult h2(std::vector<std::string> args) {
  args.insert(args.begin(), "h2kit");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<fs::path> derived_paths(const fs::path& out) {
  std::vector<fs::path> v;
  for (const auto& m : h2test::mini_snapshots())
    for (auto [sigma, dsf] : {std::pair{2.0, 2L}, std::pair{1.0, 1L}}) {
      SnapshotBundle b;
      b.case_id = m.case_id;
      b.time_index = m.time_index;
      LESParams p;
      p.sigma = sigma;
      p.dsf = dsf;
      v.push_back(out / "derived" / cli::derived_name(b, p));
    }
  return v;
}

} // namespace

TEST(Cli, SynthThenFilterDownsamples) {
  TempDir t("cli_sf");
  const auto snap = (t / "flame.h2snap").string(), les = (t / "les.h2snap").string();
  auto r = h2({"synth", "--planar", "--a", "3", "--dims", "64,32,32", "--out", snap});
  ASSERT_EQ(r.code, 0) << r.err;
  r = h2({"filter", "--in", snap, "--out", les, "--sigma", "4", "--dsf", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const SnapshotBundle d = read_derived(les);
  EXPECT_EQ(d.grid.shape_string(), "32x16x16");
  EXPECT_FALSE(d.attribute(names::attr_delta_ratio).has_value());
  EXPECT_EQ(d.attribute(names::attr_sigma), 4.0);

  r = h2({"metrics", "--pred", snap + ":omega_H2", "--truth", les, "--out", (t / "m").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("64x32x32"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("32x16x16"), std::string::npos) << r.err;
}

TEST(Cli, UsageErrorsAndInfo) {
  EXPECT_EQ(h2({}).code, 2);
  EXPECT_EQ(h2({"synth", "--planar", "--bogus", "1", "--out", "x"}).code, 2);
  EXPECT_EQ(h2({"filter", "--in", "/nonexistent/file.h2snap", "--out", "y"}).code, 2);
  EXPECT_EQ(h2({"--help"}).code, 0);
  const auto v = h2({"--version"});
  EXPECT_EQ(v.code, 0);
  EXPECT_NE(v.out.find("0.1.0"), std::string::npos);
}

TEST(Cli, LibraryErrorExitsOne) {
  TempDir t("cli_err");
  const auto snap = (t / "flame.h2snap").string();
  const auto r = h2({"synth", "--planar", "--a", "1", "--out", snap});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("DomainError"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(snap));
}

TEST(Cli, DeriveComputesMixtureFractionFromSpecies) {
  TempDir t("cli_derive");
  const GridSpec g(6, 5, 4, 1e-4, h2test::kPeriodic);
  const ElementTable table;
  const double yo = table.oxidizer_y_o2();
  std::vector<double> yh2(g.size()), o2(g.size()), n2(g.size());
  for (std::size_t n = 0; n < g.size(); ++n) {
    const double z = 0.02 * static_cast<double>(n % 7) / 6.0;
    yh2[n] = z;
    o2[n] = (1.0 - z) * yo;
    n2[n] = (1.0 - z) * (1.0 - yo);
  }
  SnapshotBundle b;
  b.grid = g;
  b.case_id = "mix";
  b.set("rho", ScalarField3D(g, 1.0));
  b.set(names::omega_h2, ScalarField3D(g, 0.0));
  b.set(names::y_h2, ScalarField3D(g, yh2));
  b.set("Y_O2", ScalarField3D(g, std::move(o2)));
  b.set("Y_N2", ScalarField3D(g, std::move(n2)));
  write_snapshot(b, t / "species.h2snap");
  const auto r = h2({"derive", "--in", (t / "species.h2snap").string(), "--out", (t / "xi.h2snap").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const SnapshotBundle d = read_snapshot(t / "xi.h2snap");
  const auto& xi = d.field(names::xi);
  for (std::size_t n = 0; n < g.size(); ++n) EXPECT_NEAR(xi.values()[n], yh2[n], 1e-12) << n;
}

TEST(All, ByteIdenticalAcrossRuns) {
  TempDir t("all_det");
  const auto manifest = h2test::write_mini_dataset(t / "data");
  auto r = h2({"all", "--manifest", manifest.string(), "--out", (t / "run1").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  r = h2({"all", "--manifest", manifest.string(), "--out", (t / "run2").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto a = h2test::tree_bytes(t / "run1"), b = h2test::tree_bytes(t / "run2");
  EXPECT_EQ(a.size(), b.size());
  EXPECT_TRUE(a == b);
  EXPECT_TRUE(a.count("cubes.cube1"));
  EXPECT_TRUE(a.count("run_log.json"));
  EXPECT_TRUE(a.count("metrics/F_summary.csv"));
  EXPECT_TRUE(a.count("metrics/FC_snapshots.csv"));
  // Ten derived bundles, four baseline predictions (2 test snapshots x 2 parameter sets) per mode.
  std::size_t derived = 0, baseline = 0;
  for (const auto& [name, bytes] : a) {
    derived += name.rfind("derived/", 0) == 0;
    baseline += name.rfind("baseline/F/", 0) == 0;
  }
  EXPECT_EQ(derived, 10u);
  EXPECT_EQ(baseline, 4u);

  r = h2({"--seed", "8", "all", "--manifest", manifest.string(), "--out", (t / "run3").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(h2test::tree_bytes(t / "run3").at("cubes.cube1"), a.at("cubes.cube1"));
}

TEST(All, CubesExcludeTestSnapshotsAndMatchSampleStage) {
  TempDir t("all_cubes");
  const auto manifest = h2test::write_mini_dataset(t / "data", 11);
  const fs::path out = t / "run";
  ASSERT_EQ(h2({"all", "--manifest", manifest.string(), "--out", out.string()}).code, 0);

  const CubeDataset ds = read_cube_dataset(out / "cubes.cube1");
  // Three train/val snapshots, two parameter sets, four cubes each.
  EXPECT_EQ(ds.samples.size(), 24u);
  EXPECT_EQ(ds.edge, 8u);
  std::size_t val = 0;
  for (const auto& s : ds.samples) {
    EXPECT_NE(source_time_index(s.meta.case_id) % 10, 0) << s.meta.case_id;
    EXPECT_LT(source_case_ordinal(s.meta.case_id), 2u);
    val += s.meta.split == SplitTag::val;
  }
  EXPECT_EQ(val, 6u);

  std::vector<std::string> args{"--seed", "11", "sample", "--in"};
  for (const auto& p : derived_paths(out)) args.push_back(p.string());
  for (std::string a : {"--cubes-per-solution", "4", "--edge", "8", "--val-fraction", "0.25", "--out"})
    args.push_back(a);
  args.push_back((t / "sampled.cube1").string());
  const auto r = h2(args);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_file_bytes(t / "sampled.cube1"), read_file_bytes(out / "cubes.cube1"));
}

TEST(All, RunLogDigestsAndRelativePaths) {
  TempDir t("all_log");
  const auto manifest = h2test::write_mini_dataset(t / "data");
  const fs::path out = t / "run";
  ASSERT_EQ(h2({"all", "--manifest", manifest.string(), "--out", out.string()}).code, 0);
  const auto text = read_file_bytes(out / "run_log.json");
  const auto j = nlohmann::json::parse(text.begin(), text.end());
  EXPECT_EQ(j.at("command"), "all");
  EXPECT_EQ(j.at("version"), "0.1.0");
  EXPECT_EQ(j.at("config").at("seed"), 7);
  ASSERT_FALSE(j.at("outputs").empty());
  for (const auto& [rel, digest] : j.at("outputs").items()) {
    EXPECT_FALSE(fs::path(rel).is_absolute()) << rel;
    EXPECT_EQ(rel.find(t.path().string()), std::string::npos) << rel;
    EXPECT_EQ(digest.get<std::string>(), cli::file_digest(out / rel)) << rel;
  }
  EXPECT_EQ(j.at("inputs").at("manifest").get<std::string>(), cli::file_digest(manifest));
  EXPECT_EQ(j.at("inputs").at("lean_1.h2snap").get<std::string>(), cli::file_digest(t / "data" / "lean_1.h2snap"));
}

TEST(All, BaselineStageMatchesAllOutput) {
  TempDir t("all_base");
  const auto manifest = h2test::write_mini_dataset(t / "data");
  const fs::path out = t / "run";
  ASSERT_EQ(h2({"all", "--manifest", manifest.string(), "--out", out.string()}).code, 0);
  const fs::path derived = derived_paths(out)[0];
  ASSERT_NE(derived.filename().string().find("_t0000_"), std::string::npos);
  for (std::string mode : {"F", "FC"}) {
    const fs::path pred = t / (mode + ".h2snap");
    const auto r = h2({"baseline", "--in", derived.string(), "--profiles", (t / "data" / "profiles").string(),
                        "--mode", mode, "--df", "2.5", "--out", pred.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(read_file_bytes(pred), read_file_bytes(out / "baseline" / mode / derived.filename())) << mode;
  }
}

TEST(Binary, SubprocessExitCodes) {
  const std::string exe = H2KIT_CLI_PATH;
  auto status = [](const std::string& cmd) {
    const int s = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  EXPECT_EQ(status(exe + " --version"), 0);
  EXPECT_EQ(status(exe + " --no-such-flag"), 2);
  EXPECT_EQ(status(exe), 2);
  TempDir t("bin");
  EXPECT_EQ(status(exe + " synth --planar --dims 32,4,4 --out " + (t / "s.h2snap").string()), 0);
  EXPECT_TRUE(fs::exists(t / "s.h2snap"));
  EXPECT_EQ(status(exe + " synth --planar --a 1 --out " + (t / "bad.h2snap").string()), 1);
}
