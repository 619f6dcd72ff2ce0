/// @file pipeline.hpp
/// @brief Command-line driver: synth, filter, derive, sample, baseline,
///        metrics, and `all` which chains them over a manifest.
///
/// Exit codes: 0 success, 1 stage failure, 2 usage error.
#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <typeinfo>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "h2kit/bundle.hpp"
#include "h2kit/cube.hpp"
#include "h2kit/error.hpp"
#include "h2kit/filter.hpp"
#include "h2kit/flamelet.hpp"
#include "h2kit/les.hpp"
#include "h2kit/metrics.hpp"
#include "h2kit/rng.hpp"
#include "h2kit/sampling.hpp"
#include "h2kit/snapshot_io.hpp"
#include "h2kit/synth.hpp"
#include "h2kit/thermo.hpp"

namespace h2kit::cli {

inline constexpr const char* kVersion = "0.1.0";

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Helpers
// ---------------------------------------------------------------------------

inline std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline std::string file_digest(const fs::path& p) {
  return "fnv1a64:" + hex64(fnv1a64(read_file_bytes(p)));
}

/// "path[:field]". A suffix containing '/' is part of the path.
struct FieldRef {
  fs::path path;
  std::string field;
};

inline FieldRef parse_field_ref(const std::string& s, const std::string& default_field) {
  const auto pos = s.rfind(':');
  if (pos == std::string::npos || pos == 0 || pos + 1 == s.size() ||
      s.find('/', pos) != std::string::npos)
    return {s, default_field};
  return {s.substr(0, pos), s.substr(pos + 1)};
}

inline std::vector<double> parse_list(const std::string& s, std::size_t expect, const char* what) {
  std::vector<double> out;
  std::string tok;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == ',') {
      out.push_back(detail::parse_double(tok, 0));
      tok.clear();
    } else {
      tok += s[i];
    }
  }
  if (out.size() != expect)
    throw CLI::ValidationError(std::string(what) + ": expected " + std::to_string(expect) +
                               " comma-separated values, got '" + s + "'");
  return out;
}

inline std::array<Boundary, 3> parse_boundaries(const std::string& s) {
  std::array<Boundary, 3> out{};
  std::size_t axis = 0;
  std::string tok;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == ',') {
      if (axis == 3) throw CLI::ValidationError("--boundary: expected 3 entries");
      if (tok == "periodic")
        out[axis++] = Boundary::periodic;
      else if (tok == "clamp")
        out[axis++] = Boundary::clamp;
      else
        throw CLI::ValidationError("--boundary: unknown boundary '" + tok + "'");
      tok.clear();
    } else {
      tok += s[i];
    }
  }
  if (axis != 3) throw CLI::ValidationError("--boundary: expected 3 entries");
  return out;
}

inline std::string error_kind(const std::exception& e) {
  if (dynamic_cast<const TruncationError*>(&e)) return "TruncationError";
  if (dynamic_cast<const FormatError*>(&e)) return "FormatError";
  if (dynamic_cast<const ShapeError*>(&e)) return "ShapeError";
  if (dynamic_cast<const ValidationError*>(&e)) return "ValidationError";
  if (dynamic_cast<const DomainError*>(&e)) return "DomainError";
  if (dynamic_cast<const BoundsError*>(&e)) return "BoundsError";
  if (dynamic_cast<const IoError*>(&e)) return "IoError";
  if (dynamic_cast<const DegenerateError*>(&e)) return "DegenerateError";
  if (dynamic_cast<const UnknownSpeciesError*>(&e)) return "UnknownSpeciesError";
  if (dynamic_cast<const ExtrapolationError*>(&e)) return "ExtrapolationError";
  if (dynamic_cast<const SizeError*>(&e)) return "SizeError";
  if (dynamic_cast<const PlacementError*>(&e)) return "PlacementError";
  return "Error";
}

/// Records what a run consumed and produced. Contains no timestamps and no
/// absolute output locations, so repeated runs produce identical logs.
class RunLog {
public:
  explicit RunLog(std::string command) {
    j_["tool"] = "h2kit";
    j_["version"] = kVersion;
    j_["command"] = std::move(command);
    j_["config"] = nlohmann::json::object();
    j_["inputs"] = nlohmann::json::object();
    j_["outputs"] = nlohmann::json::object();
  }

  void config(const std::string& key, nlohmann::json v) { j_["config"][key] = std::move(v); }
  void input(const std::string& label, const fs::path& p) { j_["inputs"][label] = file_digest(p); }
  void output(const std::string& label, const fs::path& p) { j_["outputs"][label] = file_digest(p); }
  std::string dump() const { return j_.dump(2) + "\n"; }
  void write(const fs::path& p) const { write_text_atomic(p, dump()); }

private:
  nlohmann::json j_;
};

/// `*.flamelet` and `*.txt` files of a directory, by file name. Each must
/// carry a "# phi" line.
inline std::vector<fs::path> profile_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("profiles: '" + dir.string() + "' is not a directory");
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && (e.path().extension() == ".flamelet" || e.path().extension() == ".txt"))
      out.push_back(e.path());
  std::sort(out.begin(), out.end());
  if (out.empty()) throw IoError("profiles: no *.flamelet or *.txt files in '" + dir.string() + "'");
  return out;
}

inline std::vector<FlameletProfile> read_profiles(const std::vector<fs::path>& files) {
  std::vector<FlameletProfile> out;
  for (const auto& f : files) {
    const auto text = read_file_bytes(f);
    const std::string s(text.begin(), text.end());
    if (s.find("# phi") == std::string::npos)
      throw FormatError("profile '" + f.string() + "' has no '# phi <value>' line");
    out.push_back(parse_flamelet_profile(s));
  }
  return out;
}

inline double require_attribute(const SnapshotBundle& b, const char* name, const fs::path& from) {
  const auto v = b.attribute(name);
  if (!v) throw ValidationError("'" + from.string() + "' lacks the '" + name + "' attribute");
  return *v;
}

/// RNG for the cubes of one (snapshot, LES resolution) pair. Independent of
/// processing order, so `sample` and `all` draw identical cubes.
inline CounterRng cube_stream(std::uint64_t seed, std::uint32_t source_id, double sigma, long dsf) {
  const std::uint64_t res = derive_key(std::bit_cast<std::uint64_t>(sigma), static_cast<std::uint64_t>(dsf));
  return CounterRng(derive_key(derive_key(seed, source_id), res), 0);
}

inline std::map<std::string, std::uint32_t> case_ordinals(const std::vector<std::string>& ids) {
  std::set<std::string> uniq(ids.begin(), ids.end());
  std::map<std::string, std::uint32_t> out;
  std::uint32_t n = 0;
  for (const auto& id : uniq) out[id] = n++;
  return out;
}

inline std::string sigma_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

inline std::string derived_name(const SnapshotBundle& b, const LESParams& p) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "_t%04d_s", static_cast<int>(b.time_index));
  return b.case_id + buf + sigma_label(p.sigma) + "_d" + std::to_string(p.dsf) + ".h2snap";
}

/// Prediction bundle for metrics: omega_bar (prediction), omega_bar_truth and
/// c_tilde on the derived grid.
inline SnapshotBundle prediction_bundle(const SnapshotBundle& derived, ScalarField3D pred) {
  SnapshotBundle out;
  out.case_id = derived.case_id;
  out.time_index = derived.time_index;
  out.phi_g = derived.phi_g;
  out.grid = derived.grid;
  out.attributes = derived.attributes;
  out.set(names::omega_bar, std::move(pred));
  out.set(names::c_tilde, derived.field(names::c_tilde));
  if (derived.has(names::omega_bar)) out.set("omega_bar_truth", derived.field(names::omega_bar));
  return out;
}

inline GroupKey group_of(const SnapshotBundle& truth) {
  GroupKey k;
  k.phi_g = truth.phi_g;
  k.sigma = truth.attribute(names::attr_sigma).value_or(0.0);
  k.dsf = std::lround(truth.attribute(names::attr_dsf).value_or(1.0));
  return k;
}

// ---------------------------------------------------------------------------
// Stage options
// ---------------------------------------------------------------------------

struct Globals {
  unsigned threads = 0;
  std::optional<std::uint64_t> seed;
  std::string run_log;
};

struct SynthOptions {
  bool planar = false, wrinkled = false;
  SyntheticFlameSpec spec;
  std::string dims = "64,32,32";
  std::string boundary = "clamp,periodic,periodic";
  std::string xi_ramp;
  double x0 = -1.0;
  std::string out;
  std::string profile_out;
  std::size_t profile_cells = 0;
  std::size_t profile_refine = 4;
  double profile_phi = -1.0;
};

struct FilterOptions {
  std::string in, out, profile, profiles;
  double sigma = 4.0;
  long dsf = 2;
  double delta_ratio = 0.0;
};

struct DeriveOptions {
  std::string in, out;
  double o2_mole_fraction = 0.21;
};

struct SampleOptions {
  std::vector<std::string> in;
  std::string out;
  std::size_t cubes = 40, edge = 16;
  double val_fraction = 0.1;
};

struct BaselineOptions {
  std::string in, out, profiles, mode = "F";
  double sigma = 0.0;
  double df = 2.5;
};

struct MetricsOptions {
  std::vector<std::string> pred, truth, c_field;
  std::string out, prefix;
  std::size_t bins = 50;
  bool mask = false;
  double norm = 0.0;
};

struct AllOptions {
  std::string manifest, out;
};

// ---------------------------------------------------------------------------
// Stages
// ---------------------------------------------------------------------------

inline void stage_synth(const SynthOptions& o, const Globals& g, std::ostream& log) {
  SyntheticFlameSpec s = o.spec;
  const auto d = parse_list(o.dims, 3, "--dims");
  for (double v : d)
    if (!(v >= 1.0 && v == std::floor(v))) throw DomainError("--dims: entries must be positive integers");
  s.nx = static_cast<std::size_t>(d[0]);
  s.ny = static_cast<std::size_t>(d[1]);
  s.nz = static_cast<std::size_t>(d[2]);
  s.boundary = parse_boundaries(o.boundary);
  if (!o.xi_ramp.empty()) {
    const auto r = parse_list(o.xi_ramp, 2, "--xi-ramp");
    s.xi_ramp = std::make_pair(r[0], r[1]);
  }
  if (o.x0 >= 0.0) s.x0 = o.x0;
  const SnapshotBundle b = o.wrinkled ? make_wrinkled_flame(s) : make_planar_flame(s);
  std::optional<FlameletProfile> prof;
  if (!o.profile_out.empty()) {
    const std::size_t cells = o.profile_cells ? o.profile_cells
                                              : static_cast<std::size_t>(std::ceil(16.0 * s.a));
    prof = make_flamelet_profile(s, cells, o.profile_refine, o.profile_phi >= 0.0 ? o.profile_phi : b.phi_g);
  }
  write_snapshot(b, o.out);
  log << "synth: wrote " << o.out << " (" << b.grid.shape_string() << ", phi_g " << b.phi_g << ")\n";
  if (prof) {
    write_flamelet_profile(*prof, o.profile_out);
    log << "synth: wrote profile " << o.profile_out << "\n";
  }
  if (!g.run_log.empty()) {
    RunLog rl("synth");
    rl.config("kind", o.wrinkled ? "wrinkled" : "planar");
    rl.config("dims", o.dims);
    rl.config("a", s.a);
    rl.config("amplitude", s.amplitude);
    rl.output(fs::path(o.out).filename().string(), o.out);
    rl.write(g.run_log);
  }
}

inline void stage_filter(const FilterOptions& o, const Globals& g, std::ostream& log) {
  const SnapshotBundle snap = read_snapshot(o.in);
  LESParams p;
  p.sigma = o.sigma;
  p.dsf = o.dsf;
  if (o.delta_ratio > 0.0) p.delta_ratio = o.delta_ratio;
  std::vector<fs::path> prof_files;
  if (!o.profile.empty()) prof_files.push_back(o.profile);
  if (!o.profiles.empty()) prof_files = profile_files(o.profiles);
  if (!prof_files.empty()) {
    const FlameletLibrary lib = build_library(read_profiles(prof_files), p.sigma, snap.grid.dx());
    const TableThickness th = library_thickness(lib, snap.phi_g);
    p.delta_ratio = th.ratio();
    p.delta1 = th.delta1;
  }
  p.validate();
  EmulationReport rep;
  const SnapshotBundle out = emulate_les(snap, p, default_mixture(), resolve_threads(g.threads), &rep);
  write_snapshot(out, o.out);
  log << "filter: wrote " << o.out << " (" << out.grid.shape_string() << ")";
  if (rep.progress.below_zero || rep.progress.above_one)
    log << ", c_tilde outside [0,1] at " << rep.progress.below_zero + rep.progress.above_one << " points";
  log << "\n";
  if (!g.run_log.empty()) {
    RunLog rl("filter");
    rl.config("sigma", p.sigma);
    rl.config("dsf", p.dsf);
    if (p.delta_ratio) rl.config("delta_ratio", *p.delta_ratio);
    rl.input(fs::path(o.in).filename().string(), o.in);
    for (const auto& f : prof_files) rl.input(f.filename().string(), f);
    rl.output(fs::path(o.out).filename().string(), o.out);
    rl.write(g.run_log);
  }
}

/// Adds xi from species fields (Y_<species>) and, for filtered bundles,
/// c_tilde, phi_tilde and omega_bar.
inline void stage_derive(const DeriveOptions& o, const Globals& g, std::ostream& log) {
  SnapshotBundle b = read_bundle(o.in);
  const ElementTable table(o.o2_mole_fraction);
  const MixtureConstants mix{stoich_xi(table)};
  std::map<std::string, ScalarField3D> species;
  for (const auto& [name, f] : b.fields)
    if (name.rfind("Y_", 0) == 0 && ElementTable::species().count(name.substr(2))) species.emplace(name.substr(2), f);
  bool did = false;
  if (species.size() >= 2) {
    b.set(names::xi, bilger_xi(species, table));
    log << "derive: xi from " << species.size() << " species fields\n";
    did = true;
  }
  if (b.has(names::y_h2_tilde) && b.has(names::xi_tilde) && b.has(names::omega_h2_bar)) {
    derive_les_fields(b, mix);
    b.attributes[names::attr_xi_s] = mix.xi_s;
    validate_derived(b);
    log << "derive: c_tilde, phi_tilde, omega_bar\n";
    did = true;
  } else if (did) {
    validate_snapshot(b);
  }
  if (!did)
    throw ValidationError("derive: '" + o.in + "' holds neither species fields nor filtered fields");
  write_snapshot(b, o.out);
  if (!g.run_log.empty()) {
    RunLog rl("derive");
    rl.config("o2_mole_fraction", o.o2_mole_fraction);
    rl.input(fs::path(o.in).filename().string(), o.in);
    rl.output(fs::path(o.out).filename().string(), o.out);
    rl.write(g.run_log);
  }
}

inline void stage_sample(const SampleOptions& o, const Globals& g, std::ostream& log) {
  const std::uint64_t seed = g.seed.value_or(0);
  std::vector<SnapshotBundle> bundles;
  std::vector<std::string> ids;
  for (const auto& p : o.in) {
    bundles.push_back(read_derived(p));
    ids.push_back(bundles.back().case_id);
  }
  const auto ordinals = case_ordinals(ids);
  std::vector<CubeSample> cubes;
  std::size_t skipped = 0;
  for (const auto& b : bundles) {
    if (snapshot_role(b.time_index) == SnapshotRole::test) {
      ++skipped;
      continue;
    }
    const std::uint32_t src = encode_source_id(ordinals.at(b.case_id), b.time_index);
    CounterRng rng = cube_stream(seed, src, b.attribute(names::attr_sigma).value_or(0.0),
                                 std::lround(b.attribute(names::attr_dsf).value_or(1.0)));
    auto part = extract_cubes(b, o.cubes, o.edge, rng, src);
    cubes.insert(cubes.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  assign_train_val(cubes, o.val_fraction, seed);
  write_cube_dataset(cubes, o.out, o.edge);
  log << "sample: " << cubes.size() << " cubes from " << bundles.size() - skipped << " snapshots (" << skipped
      << " test snapshots skipped) -> " << o.out << "\n";
  if (!g.run_log.empty()) {
    RunLog rl("sample");
    rl.config("seed", seed);
    rl.config("cubes_per_solution", o.cubes);
    rl.config("edge", o.edge);
    rl.config("val_fraction", o.val_fraction);
    for (const auto& p : o.in) rl.input(fs::path(p).filename().string(), p);
    rl.output(fs::path(o.out).filename().string(), o.out);
    rl.write(g.run_log);
  }
}

inline void stage_baseline(const BaselineOptions& o, const Globals& g, std::ostream& log) {
  const SnapshotBundle d = read_derived(o.in);
  const double sigma = o.sigma > 0.0 ? o.sigma : require_attribute(d, names::attr_sigma, o.in);
  const double fine_dx = require_attribute(d, names::attr_fine_dx, o.in);
  const auto files = profile_files(o.profiles);
  const FlameletLibrary lib = build_library(read_profiles(files), sigma, fine_dx);
  BaselineConfig cfg;
  cfg.fractal_dim = o.df;
  ScalarField3D pred = o.mode == "F" ? baseline_omega(d.field(names::c_tilde), d.phi_g, lib, cfg)
                                     : baseline_omega(d.field(names::c_tilde), d.field(names::phi_tilde), lib, cfg);
  const SnapshotBundle out = prediction_bundle(d, std::move(pred));
  write_snapshot(out, o.out);
  log << "baseline: mode " << o.mode << " -> " << o.out << "\n";
  if (!g.run_log.empty()) {
    RunLog rl("baseline");
    rl.config("mode", o.mode);
    rl.config("sigma", sigma);
    rl.config("fractal_dim", o.df);
    rl.input(fs::path(o.in).filename().string(), o.in);
    for (const auto& f : files) rl.input(f.filename().string(), f);
    rl.output(fs::path(o.out).filename().string(), o.out);
    rl.write(g.run_log);
  }
}

struct LoadedPair {
  SnapshotBundle truth_bundle;
  ScalarField3D pred, truth, c;
};

inline void stage_metrics(const MetricsOptions& o, const Globals& g, std::ostream& log) {
  if (o.pred.size() != o.truth.size())
    throw DomainError("metrics: " + std::to_string(o.pred.size()) + " --pred but " +
                      std::to_string(o.truth.size()) + " --truth");
  if (!o.c_field.empty() && o.c_field.size() != o.truth.size())
    throw DomainError("metrics: --c-field must be given once per --truth or not at all");
  if (o.bins < 2) throw DomainError("metrics: --bins must be >= 2");

  std::map<fs::path, SnapshotBundle> cache;
  auto load = [&](const FieldRef& r) -> const ScalarField3D& {
    auto it = cache.find(r.path);
    if (it == cache.end()) it = cache.emplace(r.path, read_bundle(r.path)).first;
    return it->second.field(r.field);
  };

  std::vector<LoadedPair> pairs;
  for (std::size_t n = 0; n < o.truth.size(); ++n) {
    const FieldRef pr = parse_field_ref(o.pred[n], names::omega_bar);
    const FieldRef tr = parse_field_ref(o.truth[n], names::omega_bar);
    const FieldRef cr = o.c_field.empty() ? FieldRef{tr.path, names::c_tilde}
                                          : parse_field_ref(o.c_field[n], names::c_tilde);
    LoadedPair lp{SnapshotBundle{}, load(pr), load(tr), load(cr)};
    lp.truth_bundle = cache.at(tr.path);
    require_same_grid(lp.pred, lp.truth, "metrics");
    require_same_grid(lp.c, lp.truth, "metrics (c field)");
    pairs.push_back(std::move(lp));
  }

  double norm = o.norm;
  if (!(norm > 0.0)) {
    norm = 0.0;
    for (const auto& p : pairs) norm = std::max(norm, field_max(p.truth));
  }
  ScoreGroups groups;
  std::map<GroupKey, Hist2D> hists;
  const ProgressMask mask;
  for (const auto& p : pairs) {
    const GroupKey key = group_of(p.truth_bundle);
    SnapshotScore sc;
    sc.case_id = p.truth_bundle.case_id;
    sc.time_index = p.truth_bundle.time_index;
    sc.nmae = o.mask ? nmae_masked(p.pred, p.truth, p.c, mask) : nmae(p.pred, p.truth);
    sc.rmse = rmse(p.pred, p.truth);
    groups[key].push_back(sc);
    auto [it, fresh] = hists.try_emplace(key);
    if (fresh) {
      it->second.bins = o.bins;
      it->second.mask = mask;
      it->second.counts.assign(o.bins * o.bins, 0);
    }
    hist2d_accumulate(it->second, EvalPair{&p.pred, &p.truth, &p.c, norm});
  }
  write_report(o.out, o.prefix, groups, hists);
  log << "metrics: " << pairs.size() << " pairs in " << groups.size() << " groups -> " << o.out << "\n";
  if (!g.run_log.empty()) {
    RunLog rl("metrics");
    rl.config("bins", o.bins);
    rl.config("mask", o.mask);
    rl.config("normalization", norm);
    for (const auto& [path, b] : cache) rl.input(path.filename().string(), path);
    rl.write(g.run_log);
  }
}

/// synth/ingest -> filter -> derive -> sample -> baseline -> metrics over a
/// manifest. Writes under `out`:
///   derived/<case>_tNNNN_s<sigma>_d<dsf>.h2snap
///   cubes.cube1
///   baseline/<mode>/<derived name>          (test snapshots)
///   metrics/<mode>_summary.csv, <mode>_snapshots.csv, <mode>_hist_*.csv
///   run_log.json
inline void stage_all(const AllOptions& o, const Globals& g, std::ostream& log) {
  const DatasetManifest m = read_manifest(o.manifest);
  const std::uint64_t seed = g.seed.value_or(m.sampling.seed);
  const unsigned threads = resolve_threads(g.threads);
  const fs::path out(o.out);
  if (m.profiles.empty()) throw ValidationError("manifest: at least one flamelet profile is required");

  RunLog rl("all");
  rl.config("seed", seed);
  rl.config("cubes_per_solution", m.sampling.cubes_per_solution);
  rl.config("edge", m.sampling.edge);
  rl.config("val_fraction", m.sampling.val_fraction);
  rl.config("fractal_dim", m.fractal_dim);
  rl.config("hist_bins", m.hist_bins);
  rl.config("baseline_modes", m.baseline_modes);
  nlohmann::json les = nlohmann::json::array();
  for (const auto& p : m.les_params) les.push_back({{"sigma", p.sigma}, {"dsf", p.dsf}});
  rl.config("les_params", les);
  rl.input("manifest", o.manifest);

  std::vector<FlameletProfile> profiles;
  for (const auto& mp : m.profiles) {
    FlameletProfile p = read_flamelet_profile(mp.path);
    p.phi = mp.phi;
    profiles.push_back(std::move(p));
    rl.input(mp.path.filename().string(), mp.path);
  }
  std::vector<std::string> ids;
  for (const auto& s : m.snapshots) ids.push_back(s.case_id);
  const auto ordinals = case_ordinals(ids);

  std::map<std::pair<std::size_t, double>, FlameletLibrary> libs;
  auto library = [&](std::size_t pi, double dx) -> const FlameletLibrary& {
    auto it = libs.find({pi, dx});
    if (it == libs.end()) it = libs.emplace(std::make_pair(pi, dx), build_library(profiles, m.les_params[pi].sigma, dx)).first;
    return it->second;
  };

  BaselineConfig bcfg;
  bcfg.fractal_dim = m.fractal_dim;
  struct TestEval {
    std::string mode;
    GroupKey key;
    SnapshotScore score;
    ScalarField3D pred, truth, c;
  };
  std::vector<TestEval> evals;
  std::vector<CubeSample> cubes;
  std::vector<fs::path> written;

  for (const auto& ms : m.snapshots) {
    rl.input(ms.path.filename().string(), ms.path);
    const SnapshotBundle snap = read_snapshot(ms.path);
    const bool test = snapshot_role(snap.time_index) == SnapshotRole::test;
    const std::uint32_t src = encode_source_id(ordinals.at(snap.case_id), snap.time_index);
    for (std::size_t pi = 0; pi < m.les_params.size(); ++pi) {
      LESParams p = m.les_params[pi];
      const FlameletLibrary& lib = library(pi, snap.grid.dx());
      const TableThickness th = library_thickness(lib, snap.phi_g);
      p.delta_ratio = th.ratio();
      p.delta1 = th.delta1;
      const SnapshotBundle d = emulate_les(snap, p, default_mixture(), threads);
      const std::string name = derived_name(snap, p);
      write_snapshot(d, out / "derived" / name);
      written.push_back(fs::path("derived") / name);

      if (!test) {
        CounterRng rng = cube_stream(seed, src, p.sigma, p.dsf);
        auto part = extract_cubes(d, m.sampling.cubes_per_solution, m.sampling.edge, rng, src);
        cubes.insert(cubes.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
        continue;
      }
      for (const auto& mode : m.baseline_modes) {
        ScalarField3D pred = mode == "F" ? baseline_omega(d.field(names::c_tilde), d.phi_g, lib, bcfg)
                                         : baseline_omega(d.field(names::c_tilde), d.field(names::phi_tilde), lib, bcfg);
        const SnapshotBundle pb = prediction_bundle(d, pred);
        write_snapshot(pb, out / "baseline" / mode / name);
        written.push_back(fs::path("baseline") / mode / name);
        TestEval e{mode, group_of(d), {}, std::move(pred), d.field(names::omega_bar), d.field(names::c_tilde)};
        e.score.case_id = d.case_id;
        e.score.time_index = d.time_index;
        e.score.nmae = nmae(e.pred, e.truth);
        e.score.rmse = rmse(e.pred, e.truth);
        evals.push_back(std::move(e));
      }
    }
    log << "all: " << snap.case_id << " t=" << snap.time_index << (test ? " (test)" : " (train/val)") << "\n";
  }

  assign_train_val(cubes, m.sampling.val_fraction, seed);
  write_cube_dataset(cubes, out / "cubes.cube1", m.sampling.edge);
  written.push_back("cubes.cube1");
  log << "all: " << cubes.size() << " cubes\n";

  double norm = 0.0;
  for (const auto& e : evals) norm = std::max(norm, field_max(e.truth));
  for (const auto& mode : m.baseline_modes) {
    ScoreGroups groups;
    std::map<GroupKey, Hist2D> hists;
    for (const auto& e : evals) {
      if (e.mode != mode) continue;
      groups[e.key].push_back(e.score);
      auto [it, fresh] = hists.try_emplace(e.key);
      if (fresh) {
        it->second.bins = m.hist_bins;
        it->second.counts.assign(m.hist_bins * m.hist_bins, 0);
      }
      if (norm > 0.0) hist2d_accumulate(it->second, EvalPair{&e.pred, &e.truth, &e.c, norm});
    }
    write_report(out / "metrics", mode + "_", groups, hists);
    written.push_back(fs::path("metrics") / (mode + "_summary.csv"));
    written.push_back(fs::path("metrics") / (mode + "_snapshots.csv"));
    for (const auto& [key, h] : hists)
      written.push_back(fs::path("metrics") / (mode + "_hist_" + group_label(key) + ".csv"));
  }

  for (const auto& w : written) rl.output(w.generic_string(), out / w);
  rl.write(out / "run_log.json");
  log << "all: wrote " << written.size() << " artifacts and run_log.json\n";
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"h2kit: LES emulation of DNS hydrogen flames, cube sampling, flamelet baseline and metrics",
               "h2kit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  std::uint64_t seed_value = 0;
  app.add_option("--threads", g.threads, "Worker threads (default: H2KIT_THREADS, else 1)")
      ->check(CLI::PositiveNumber);
  auto* seed_opt = app.add_option("--seed", seed_value, "Random seed");
  app.add_option("--run-log", g.run_log, "Write a JSON run log to this path (single stages)");

  SynthOptions so;
  auto* synth = app.add_subcommand("synth", "Write an analytic planar or wrinkled flame snapshot");
  auto* kind = synth->add_option_group("kind");
  kind->add_flag("--planar", so.planar, "Planar front");
  kind->add_flag("--wrinkled", so.wrinkled, "Sinusoidally wrinkled front");
  kind->require_option(1);
  synth->add_option("--a", so.spec.a, "Transition length [cells]")->capture_default_str();
  synth->add_option("--omega-peak", so.spec.omega_peak, "Peak burning rate")->capture_default_str();
  synth->add_option("--rho-u", so.spec.rho_u, "Unburnt density")->capture_default_str();
  synth->add_option("--rho-b", so.spec.rho_b, "Burnt density")->capture_default_str();
  synth->add_option("--xi-level", so.spec.xi_level, "Mixture fraction")->capture_default_str();
  synth->add_option("--xi-ramp", so.xi_ramp, "Linear mixture-fraction ramp across y: lo,hi");
  synth->add_option("--amplitude", so.spec.amplitude, "Wrinkle amplitude [cells]")->capture_default_str();
  synth->add_option("--lambda-y", so.spec.lambda_y, "Wrinkle wavelength along y [cells]");
  synth->add_option("--lambda-z", so.spec.lambda_z, "Wrinkle wavelength along z [cells]");
  synth->add_option("--dims", so.dims, "Grid nx,ny,nz")->capture_default_str();
  synth->add_option("--dx", so.spec.dx, "Grid spacing [m]")->capture_default_str();
  synth->add_option("--x0", so.x0, "Mean front position [cells] (default nx/2)");
  synth->add_option("--boundary", so.boundary, "Boundaries x,y,z: periodic|clamp")->capture_default_str();
  synth->add_option("--case", so.spec.case_id, "Case id")->capture_default_str();
  synth->add_option("--time-index", so.spec.time_index, "Time index")->capture_default_str();
  synth->add_option("--out", so.out, "Output snapshot")->required();
  synth->add_option("--profile-out", so.profile_out, "Also write the matching 1D flamelet profile");
  synth->add_option("--profile-cells", so.profile_cells, "Profile extent in grid cells (default 16a)");
  synth->add_option("--profile-refine", so.profile_refine, "Profile points per grid cell")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  synth->add_option("--profile-phi", so.profile_phi, "Profile equivalence ratio (default phi_g)");

  FilterOptions fo;
  auto* filter = app.add_subcommand("filter", "Filter, downsample and derive LES fields from a snapshot");
  filter->add_option("--in", fo.in, "Input snapshot")->required()->check(CLI::ExistingFile);
  filter->add_option("--out", fo.out, "Output derived bundle")->required();
  filter->add_option("--sigma", fo.sigma, "Filter width [source cells]")->capture_default_str()->check(CLI::PositiveNumber);
  filter->add_option("--dsf", fo.dsf, "Downsampling factor")->capture_default_str()->check(CLI::PositiveNumber);
  auto* dr = filter->add_option("--delta-ratio", fo.delta_ratio, "Thickness ratio delta0/delta1")
                 ->check(CLI::Range(1e-12, 1.0));
  auto* fprof = filter->add_option("--profile", fo.profile, "Flamelet profile for the thickness ratio")
                    ->check(CLI::ExistingFile);
  auto* fprofs = filter->add_option("--profiles", fo.profiles, "Directory of flamelet profiles")
                     ->check(CLI::ExistingDirectory);
  dr->excludes(fprof)->excludes(fprofs);
  fprof->excludes(fprofs);

  DeriveOptions dopt;
  auto* derive = app.add_subcommand("derive", "Add xi from species fields and/or c_tilde, phi_tilde, omega_bar");
  derive->add_option("--in", dopt.in, "Input bundle")->required()->check(CLI::ExistingFile);
  derive->add_option("--out", dopt.out, "Output bundle")->required();
  derive->add_option("--o2-mole-fraction", dopt.o2_mole_fraction, "Oxidizer O2 mole fraction")
      ->capture_default_str()
      ->check(CLI::Range(1e-9, 1.0));

  SampleOptions sopt;
  auto* sample = app.add_subcommand("sample", "Extract random training cubes into a CUBE1 dataset");
  sample->add_option("--in", sopt.in, "Derived bundles")->required()->check(CLI::ExistingFile);
  sample->add_option("--out", sopt.out, "Output CUBE1 file")->required();
  sample->add_option("--cubes-per-solution", sopt.cubes, "Cubes per snapshot")->capture_default_str()->check(CLI::PositiveNumber);
  sample->add_option("--edge", sopt.edge, "Cube edge")->capture_default_str()->check(CLI::PositiveNumber);
  sample->add_option("--val-fraction", sopt.val_fraction, "Validation fraction")
      ->capture_default_str()
      ->check(CLI::Range(1e-12, 1.0 - 1e-12));

  BaselineOptions bo;
  auto* baseline = app.add_subcommand("baseline", "Tabulated flamelet burning rate (F or FC)");
  baseline->add_option("--in", bo.in, "Derived bundle")->required()->check(CLI::ExistingFile);
  baseline->add_option("--profiles", bo.profiles, "Directory of flamelet profiles")->required()->check(CLI::ExistingDirectory);
  baseline->add_option("--out", bo.out, "Output prediction bundle")->required();
  baseline->add_option("--sigma", bo.sigma, "Filter width (default: from the bundle)")->check(CLI::PositiveNumber);
  baseline->add_option("--mode", bo.mode, "F (global phi) or FC (local phi)")
      ->capture_default_str()
      ->check(CLI::IsMember({"F", "FC"}));
  baseline->add_option("--df", bo.df, "Fractal dimension")->capture_default_str()->check(CLI::Range(2.0, 3.0));

  MetricsOptions mo;
  auto* metrics = app.add_subcommand("metrics", "NMAE/RMSE tables and masked 2D histograms");
  metrics->add_option("--pred", mo.pred, "Prediction path[:field] (default field omega_bar)")->required();
  metrics->add_option("--truth", mo.truth, "Truth path[:field] (default field omega_bar)")->required();
  metrics->add_option("--c-field", mo.c_field, "Progress variable path[:field] (default truth:c_tilde)");
  metrics->add_option("--bins", mo.bins, "Histogram bins per axis")->capture_default_str()->check(CLI::Range(2, 100000));
  metrics->add_flag("--mask,!--no-mask", mo.mask, "Restrict NMAE to 0.05 <= c <= 0.95 (default: all points)");
  metrics->add_option("--norm", mo.norm, "Histogram normalization (default: max truth)")->check(CLI::PositiveNumber);
  metrics->add_option("--out", mo.out, "Output directory")->required();
  metrics->add_option("--prefix", mo.prefix, "File name prefix");

  AllOptions ao;
  auto* all = app.add_subcommand("all", "Run every stage over a manifest");
  all->add_option("--manifest", ao.manifest, "Dataset manifest (JSON)")->required()->check(CLI::ExistingFile);
  all->add_option("--out", ao.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }
  if (seed_opt->count()) g.seed = seed_value;

  CLI::App* chosen = app.get_subcommands().front();
  const std::string stage = chosen->get_name();
  try {
    if (chosen == synth) stage_synth(so, g, out);
    else if (chosen == filter) stage_filter(fo, g, out);
    else if (chosen == derive) stage_derive(dopt, g, out);
    else if (chosen == sample) stage_sample(sopt, g, out);
    else if (chosen == baseline) stage_baseline(bo, g, out);
    else if (chosen == metrics) stage_metrics(mo, g, out);
    else stage_all(ao, g, out);
  } catch (const CLI::ValidationError& e) {
    err << "h2kit " << stage << ": usage error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "h2kit " << stage << ": error [" << error_kind(e) << "]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "h2kit " << stage << ": error [" << typeid(e).name() << "]: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

} // namespace h2kit::cli
