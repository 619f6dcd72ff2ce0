/// @file snapshot_io.hpp
/// @brief Binary snapshot/cube formats, flamelet text tables, JSON manifests.
///
/// All binary formats are little-endian independent of the host; see
/// docs/formats.md for the byte layouts.
#pragma once

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "h2kit/bundle.hpp"
#include "h2kit/cube.hpp"
#include "h2kit/error.hpp"
#include "h2kit/filter.hpp"
#include "h2kit/profile.hpp"

namespace h2kit {

// ---------------------------------------------------------------------------
// Byte codec
// ---------------------------------------------------------------------------

class ByteWriter {
public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u32(std::uint32_t v) { put_le(v, 4); }
  void i32(std::int32_t v) { put_le(static_cast<std::uint32_t>(v), 4); }
  void u64(std::uint64_t v) { put_le(v, 8); }
  void f32(float v) { put_le(std::bit_cast<std::uint32_t>(v), 4); }
  void f64(double v) { put_le(std::bit_cast<std::uint64_t>(v), 8); }
  void bytes(std::span<const std::uint8_t> b) { buf_.insert(buf_.end(), b.begin(), b.end()); }
  void raw(std::string_view s) { buf_.insert(buf_.end(), s.begin(), s.end()); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    raw(s);
  }

  const std::vector<std::uint8_t>& buffer() const { return buf_; }
  std::vector<std::uint8_t> take() && { return std::move(buf_); }

private:
  void put_le(std::uint64_t v, int n) {
    for (int b = 0; b < n; ++b) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
  }
  std::vector<std::uint8_t> buf_;
};

/// Reads little-endian values by assembling bytes arithmetically, so the
/// decode is correct on either host byte order.
class ByteReader {
public:
  explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(get_le(1)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get_le(4)); }
  std::int32_t i32() { return static_cast<std::int32_t>(static_cast<std::uint32_t>(get_le(4))); }
  std::uint64_t u64() { return get_le(8); }
  float f32() { return std::bit_cast<float>(static_cast<std::uint32_t>(get_le(4))); }
  double f64() { return std::bit_cast<double>(get_le(8)); }
  std::string_view raw(std::size_t n) {
    need(n);
    std::string_view s(reinterpret_cast<const char*>(data_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::string str() { return std::string(raw(u32())); }

  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }
  void need(std::size_t n) const {
    if (remaining() < n)
      throw TruncationError("unexpected end of data: need " + std::to_string(n) + " bytes at offset " +
                            std::to_string(pos_) + ", " + std::to_string(remaining()) + " left");
  }

private:
  std::uint64_t get_le(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int b = 0; b < n; ++b) v |= std::uint64_t{data_[pos_ + static_cast<std::size_t>(b)]} << (8 * b);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
}

/// Writes to `path.tmp` and renames over `path`, so readers never observe a
/// partially written file.
inline void write_file_atomic(const std::filesystem::path& path,
                              std::span<const std::uint8_t> bytes) {
  if (path.empty()) throw IoError("empty output path");
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
}

inline void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

// ---------------------------------------------------------------------------
// H2SNAP1
// ---------------------------------------------------------------------------

inline constexpr std::string_view kSnapshotMagic{"H2SNAP1\0", 8};

enum class Precision : std::uint8_t { f64 = 0, f32 = 1 };

inline std::vector<std::uint8_t> encode_snapshot(const SnapshotBundle& b,
                                                 Precision precision = Precision::f64) {
  ByteWriter w;
  w.raw(kSnapshotMagic);
  w.u32(static_cast<std::uint32_t>(b.grid.nx()));
  w.u32(static_cast<std::uint32_t>(b.grid.ny()));
  w.u32(static_cast<std::uint32_t>(b.grid.nz()));
  w.f64(b.grid.dx());
  for (int a = 0; a < 3; ++a) w.u8(static_cast<std::uint8_t>(b.grid.boundary(a)));
  w.u8(static_cast<std::uint8_t>(precision));
  w.str(b.case_id);
  w.i32(b.time_index);
  w.f64(b.phi_g);
  w.u32(static_cast<std::uint32_t>(b.attributes.size()));
  for (const auto& [name, value] : b.attributes) {
    w.str(name);
    w.f64(value);
  }
  w.u32(static_cast<std::uint32_t>(b.fields.size()));
  for (const auto& [name, f] : b.fields) {
    if (!(f.grid() == b.grid)) throw ShapeError("encode_snapshot: field '" + name + "' grid mismatch");
    w.str(name);
    if (precision == Precision::f64)
      for (double v : f.values()) w.f64(v);
    else
      for (double v : f.values()) w.f32(static_cast<float>(v));
  }
  return std::move(w).take();
}

/// Structural decode only; physical invariants are checked by the callers.
inline SnapshotBundle decode_snapshot(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kSnapshotMagic.size() ||
      std::memcmp(bytes.data(), kSnapshotMagic.data(), kSnapshotMagic.size()) != 0)
    throw FormatError("not an H2SNAP1 file (bad magic)");
  ByteReader r(bytes);
  r.raw(kSnapshotMagic.size());
  const std::uint32_t nx = r.u32(), ny = r.u32(), nz = r.u32();
  const double dx = r.f64();
  std::array<Boundary, 3> bc{};
  for (auto& m : bc) {
    const std::uint8_t v = r.u8();
    if (v > 1) throw FormatError("H2SNAP1: invalid boundary code " + std::to_string(v));
    m = static_cast<Boundary>(v);
  }
  const std::uint8_t prec = r.u8();
  if (prec > 1) throw FormatError("H2SNAP1: invalid payload precision code " + std::to_string(prec));
  SnapshotBundle b;
  try {
    b.grid = GridSpec(nx, ny, nz, dx, bc);
  } catch (const DomainError& e) {
    throw FormatError(std::string("H2SNAP1: invalid grid: ") + e.what());
  }
  b.case_id = r.str();
  b.time_index = r.i32();
  b.phi_g = r.f64();
  const std::uint32_t nattr = r.u32();
  for (std::uint32_t a = 0; a < nattr; ++a) {
    std::string name = r.str();
    b.attributes[name] = r.f64();
  }
  const std::uint32_t nfields = r.u32();
  const std::size_t count = b.grid.size();
  const std::size_t width = prec == 0 ? 8 : 4;
  for (std::uint32_t f = 0; f < nfields; ++f) {
    std::string name = r.str();
    if (b.fields.count(name)) throw FormatError("H2SNAP1: duplicate field '" + name + "'");
    if (r.remaining() < count * width)
      throw TruncationError("H2SNAP1: field '" + name + "' needs " + std::to_string(count * width) +
                            " bytes (" + b.grid.shape_string() + "), " +
                            std::to_string(r.remaining()) + " left");
    std::vector<double> data(count);
    if (prec == 0)
      for (auto& v : data) v = r.f64();
    else
      for (auto& v : data) v = static_cast<double>(r.f32());
    try {
      b.fields.emplace(name, ScalarField3D(b.grid, std::move(data)));
    } catch (const ValidationError& e) {
      throw ValidationError("field '" + name + "': " + e.what());
    }
  }
  if (r.remaining() != 0)
    throw FormatError("H2SNAP1: " + std::to_string(r.remaining()) + " trailing bytes");
  return b;
}

inline void write_snapshot(const SnapshotBundle& b, const std::filesystem::path& path,
                           Precision precision = Precision::f64) {
  write_file_atomic(path, encode_snapshot(b, precision));
}

/// Reads any H2SNAP1 file without checking physical invariants.
inline SnapshotBundle read_bundle(const std::filesystem::path& path) {
  return decode_snapshot(read_file_bytes(path));
}

/// Reads a raw DNS snapshot and checks its invariants.
inline SnapshotBundle read_snapshot(const std::filesystem::path& path) {
  SnapshotBundle b = read_bundle(path);
  validate_snapshot(b);
  return b;
}

inline SnapshotBundle read_derived(const std::filesystem::path& path) {
  SnapshotBundle b = read_bundle(path);
  validate_derived(b);
  return b;
}

// ---------------------------------------------------------------------------
// CUBE1
// ---------------------------------------------------------------------------

inline constexpr std::string_view kCubeMagic{"CUBE1\0", 6};
inline constexpr std::size_t kCubeHeaderBytes = 6 + 12;
inline constexpr std::size_t kCubeMetaBytes = 24;

inline std::size_t cube_dataset_bytes(std::size_t count, std::size_t edge) {
  return kCubeHeaderBytes + count * (kCubeMetaBytes + kCubeChannels * edge * edge * edge * 4);
}

struct CubeDataset {
  std::size_t edge = 0;
  std::vector<CubeSample> samples;
};

inline std::vector<std::uint8_t> encode_cube_dataset(std::span<const CubeSample> samples,
                                                     std::size_t edge_if_empty = 16) {
  const std::size_t edge = samples.empty() ? edge_if_empty : samples.front().edge;
  for (const auto& s : samples) {
    if (s.edge != edge)
      throw ShapeError("write_cube_dataset: heterogeneous cube edges " + std::to_string(edge) +
                       " and " + std::to_string(s.edge));
    s.check_shape();
  }
  ByteWriter w;
  w.raw(kCubeMagic);
  w.u32(static_cast<std::uint32_t>(samples.size()));
  w.u32(static_cast<std::uint32_t>(edge));
  w.u32(static_cast<std::uint32_t>(kCubeChannels));
  for (const auto& s : samples) {
    w.f32(s.meta.phi_g);
    w.f32(s.meta.sigma);
    w.f32(s.meta.dsf);
    w.f32(s.meta.delta_ratio);
    w.u32(s.meta.case_id);
    w.u32(static_cast<std::uint32_t>(s.meta.split));
    for (const auto& ch : s.channels)
      for (float v : ch) w.f32(v);
  }
  return std::move(w).take();
}

inline CubeDataset decode_cube_dataset(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kCubeMagic.size() ||
      std::memcmp(bytes.data(), kCubeMagic.data(), kCubeMagic.size()) != 0)
    throw FormatError("not a CUBE1 file (bad magic)");
  ByteReader r(bytes);
  r.raw(kCubeMagic.size());
  const std::uint32_t count = r.u32(), edge = r.u32(), nch = r.u32();
  if (nch != kCubeChannels)
    throw FormatError("CUBE1: expected 4 channels, header says " + std::to_string(nch));
  const std::size_t expected = cube_dataset_bytes(count, edge);
  if (bytes.size() < expected)
    throw TruncationError("CUBE1: header declares " + std::to_string(expected) + " bytes, file has " +
                          std::to_string(bytes.size()));
  if (bytes.size() > expected)
    throw FormatError("CUBE1: " + std::to_string(bytes.size() - expected) + " trailing bytes");
  CubeDataset ds;
  ds.edge = edge;
  ds.samples.resize(count);
  for (auto& s : ds.samples) {
    s.edge = edge;
    s.meta.phi_g = r.f32();
    s.meta.sigma = r.f32();
    s.meta.dsf = r.f32();
    s.meta.delta_ratio = r.f32();
    s.meta.case_id = r.u32();
    const std::uint32_t tag = r.u32();
    if (tag > 1) throw FormatError("CUBE1: invalid split tag " + std::to_string(tag));
    s.meta.split = static_cast<SplitTag>(tag);
    for (auto& ch : s.channels) {
      ch.resize(s.voxels());
      for (auto& v : ch) v = r.f32();
    }
  }
  return ds;
}

inline void write_cube_dataset(std::span<const CubeSample> samples, const std::filesystem::path& path,
                               std::size_t edge_if_empty = 16) {
  write_file_atomic(path, encode_cube_dataset(samples, edge_if_empty));
}

inline CubeDataset read_cube_dataset(const std::filesystem::path& path) {
  return decode_cube_dataset(read_file_bytes(path));
}

// ---------------------------------------------------------------------------
// Flamelet profile text tables
// ---------------------------------------------------------------------------

namespace detail {
inline double parse_double(std::string_view tok, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw FormatError("flamelet profile line " + std::to_string(line) + ": bad number '" +
                      std::string(tok) + "'");
  return v;
}

inline std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string t; in >> t;) out.push_back(t);
  return out;
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
} // namespace detail

/// Parses a whitespace-separated table whose header names the columns
/// x, c, omega and rho (any order). Lines starting with '#' are comments;
/// "# phi <value>" sets the fresh-gas equivalence ratio.
inline FlameletProfile parse_flamelet_profile(const std::string& text) {
  FlameletProfile p;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  std::array<std::size_t, 4> col{};
  while (std::getline(in, line)) {
    ++lineno;
    auto tok = detail::split_ws(line);
    if (tok.empty()) continue;
    if (tok[0][0] == '#') {
      std::vector<std::string> rest;
      for (auto& t : tok) {
        std::string s = t;
        s.erase(std::remove(s.begin(), s.end(), '#'), s.end());
        s.erase(std::remove(s.begin(), s.end(), '='), s.end());
        if (!s.empty()) rest.push_back(s);
      }
      if (rest.size() == 2 && rest[0] == "phi") p.phi = detail::parse_double(rest[1], lineno);
      continue;
    }
    if (header.empty()) {
      header = tok;
      const char* need[4] = {"x", "c", "omega", "rho"};
      for (int n = 0; n < 4; ++n) {
        auto it = std::find(header.begin(), header.end(), need[n]);
        if (it == header.end())
          throw FormatError(std::string("flamelet profile: header lacks column '") + need[n] + "'");
        col[static_cast<std::size_t>(n)] = static_cast<std::size_t>(it - header.begin());
      }
      continue;
    }
    if (tok.size() != header.size())
      throw FormatError("flamelet profile line " + std::to_string(lineno) + ": " +
                        std::to_string(tok.size()) + " columns, header has " +
                        std::to_string(header.size()));
    p.x.push_back(detail::parse_double(tok[col[0]], lineno));
    p.c.push_back(detail::parse_double(tok[col[1]], lineno));
    p.omega.push_back(detail::parse_double(tok[col[2]], lineno));
    p.rho.push_back(detail::parse_double(tok[col[3]], lineno));
  }
  if (header.empty()) throw FormatError("flamelet profile: missing header line");
  if (p.x.empty()) throw FormatError("flamelet profile: no data rows");
  for (std::size_t n = 0; n < p.x.size(); ++n) {
    if (n > 0 && !(p.x[n] > p.x[n - 1]))
      throw ValidationError("flamelet profile: x not strictly increasing at row " + std::to_string(n));
    if (n > 0 && p.c[n] < p.c[n - 1])
      throw ValidationError("flamelet profile: c decreasing at row " + std::to_string(n));
    if (p.c[n] < 0.0 || p.c[n] > 1.0)
      throw ValidationError("flamelet profile: c outside [0,1] at row " + std::to_string(n));
    if (p.omega[n] < 0.0)
      throw ValidationError("flamelet profile: negative omega at row " + std::to_string(n));
    if (!(p.rho[n] > 0.0))
      throw ValidationError("flamelet profile: non-positive rho at row " + std::to_string(n));
  }
  return p;
}

inline FlameletProfile read_flamelet_profile(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return parse_flamelet_profile(std::string(bytes.begin(), bytes.end()));
}

inline std::string format_flamelet_profile(const FlameletProfile& p) {
  std::string s = "# phi " + detail::format_double(p.phi) + "\nx c omega rho\n";
  for (std::size_t n = 0; n < p.x.size(); ++n)
    s += detail::format_double(p.x[n]) + " " + detail::format_double(p.c[n]) + " " +
         detail::format_double(p.omega[n]) + " " + detail::format_double(p.rho[n]) + "\n";
  return s;
}

inline void write_flamelet_profile(const FlameletProfile& p, const std::filesystem::path& path) {
  write_text_atomic(path, format_flamelet_profile(p));
}

// ---------------------------------------------------------------------------
// Dataset manifest (JSON)
// ---------------------------------------------------------------------------

struct ManifestSnapshot {
  std::filesystem::path path;
  std::string case_id;
  double phi_g = 0.0;
  std::int32_t time_index = 0;
};

struct ManifestProfile {
  double phi = 0.0;
  std::filesystem::path path;
};

struct SamplingConfig {
  std::size_t cubes_per_solution = 40;
  std::size_t edge = 16;
  std::uint64_t seed = 0;
  double val_fraction = 0.10;
};

struct DatasetManifest {
  std::vector<ManifestSnapshot> snapshots;
  std::vector<LESParams> les_params;
  SamplingConfig sampling;
  std::vector<ManifestProfile> profiles;
  std::vector<std::string> baseline_modes{"F", "FC"};
  double fractal_dim = 2.5;
  std::size_t hist_bins = 50;
};

/// Parses a manifest; relative paths resolve against `base_dir`.
inline DatasetManifest parse_manifest(const std::string& text, const std::filesystem::path& base_dir) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("manifest: ") + e.what());
  }
  auto resolve = [&](const std::string& p) {
    std::filesystem::path fp(p);
    return fp.is_absolute() ? fp : base_dir / fp;
  };
  DatasetManifest m;
  try {
    for (const auto& s : j.at("snapshots")) {
      ManifestSnapshot e;
      e.path = resolve(s.at("path").get<std::string>());
      e.case_id = s.at("case").get<std::string>();
      e.phi_g = s.at("phi_g").get<double>();
      e.time_index = s.at("time_index").get<std::int32_t>();
      m.snapshots.push_back(e);
    }
    for (const auto& p : j.at("les_params")) {
      LESParams lp;
      lp.sigma = p.at("sigma").get<double>();
      lp.dsf = p.at("dsf").get<long>();
      lp.validate();
      m.les_params.push_back(lp);
    }
    if (j.contains("sampling")) {
      const auto& s = j["sampling"];
      m.sampling.cubes_per_solution = s.value("cubes_per_solution", m.sampling.cubes_per_solution);
      m.sampling.edge = s.value("edge", m.sampling.edge);
      m.sampling.seed = s.value("seed", m.sampling.seed);
      m.sampling.val_fraction = s.value("val_fraction", m.sampling.val_fraction);
    }
    if (j.contains("profiles"))
      for (const auto& p : j["profiles"])
        m.profiles.push_back({p.at("phi").get<double>(), resolve(p.at("path").get<std::string>())});
    if (j.contains("baseline")) {
      const auto& b = j["baseline"];
      if (b.contains("modes")) m.baseline_modes = b["modes"].get<std::vector<std::string>>();
      m.fractal_dim = b.value("fractal_dim", m.fractal_dim);
    }
    if (j.contains("metrics")) m.hist_bins = j["metrics"].value("bins", m.hist_bins);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("manifest: ") + e.what());
  }
  if (m.les_params.empty()) throw ValidationError("manifest: no les_params");
  std::set<std::pair<std::string, std::int32_t>> seen;
  for (const auto& s : m.snapshots)
    if (!seen.insert({s.case_id, s.time_index}).second)
      throw ValidationError("manifest: duplicate time index " + std::to_string(s.time_index) +
                            " for case '" + s.case_id + "'");
  for (const auto& mode : m.baseline_modes)
    if (mode != "F" && mode != "FC") throw ValidationError("manifest: unknown baseline mode '" + mode + "'");
  if (!(m.sampling.val_fraction > 0.0 && m.sampling.val_fraction < 1.0))
    throw ValidationError("manifest: val_fraction must lie in (0,1)");
  return m;
}

/// Reads a manifest and checks that every referenced file exists and parses,
/// and that snapshot headers agree with the manifest metadata.
inline DatasetManifest read_manifest(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  DatasetManifest m = parse_manifest(std::string(bytes.begin(), bytes.end()), path.parent_path());
  for (const auto& s : m.snapshots) {
    if (!std::filesystem::exists(s.path)) throw IoError("manifest: missing snapshot '" + s.path.string() + "'");
    const SnapshotBundle b = read_snapshot(s.path);
    if (b.case_id != s.case_id || b.time_index != s.time_index || b.phi_g != s.phi_g)
      throw ValidationError("manifest: metadata of '" + s.path.string() + "' disagrees with the file header");
  }
  for (const auto& p : m.profiles) {
    if (!std::filesystem::exists(p.path)) throw IoError("manifest: missing profile '" + p.path.string() + "'");
    (void)read_flamelet_profile(p.path);
  }
  return m;
}

} // namespace h2kit
