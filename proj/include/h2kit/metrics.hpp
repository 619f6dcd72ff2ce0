/// @file metrics.hpp
/// @brief Error metrics (NMAE, RMSE), masked 2D histograms and grouped
///        CSV reports.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "h2kit/error.hpp"
#include "h2kit/field.hpp"
#include "h2kit/reduce.hpp"
#include "h2kit/snapshot_io.hpp"

namespace h2kit {

inline void require_same_length(std::span<const double> a, std::span<const double> b, const char* who) {
  if (a.size() != b.size())
    throw ShapeError(std::string(who) + ": length mismatch " + std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()));
}

inline void require_same_grid(const ScalarField3D& a, const ScalarField3D& b, const char* who) {
  if (!(a.grid() == b.grid()))
    throw ShapeError(std::string(who) + ": grid mismatch, prediction " + a.grid().shape_string() +
                     " vs truth " + b.grid().shape_string());
}

/// mean|truth - pred| / mean(truth).
inline double nmae(std::span<const double> pred, std::span<const double> truth) {
  require_same_length(pred, truth, "nmae");
  if (truth.empty()) throw DegenerateError("nmae: empty input");
  std::vector<double> abs_err(truth.size());
  for (std::size_t n = 0; n < truth.size(); ++n) abs_err[n] = std::abs(truth[n] - pred[n]);
  const double mean_truth = pairwise_sum(truth) / static_cast<double>(truth.size());
  if (!(mean_truth > 0.0)) throw DegenerateError("nmae: mean of truth is not positive");
  return pairwise_sum(abs_err) / static_cast<double>(truth.size()) / mean_truth;
}

inline double rmse(std::span<const double> pred, std::span<const double> truth) {
  require_same_length(pred, truth, "rmse");
  if (truth.empty()) throw DegenerateError("rmse: empty input");
  std::vector<double> sq(truth.size());
  for (std::size_t n = 0; n < truth.size(); ++n) {
    const double d = pred[n] - truth[n];
    sq[n] = d * d;
  }
  return std::sqrt(pairwise_sum(sq) / static_cast<double>(truth.size()));
}

inline double nmae(const ScalarField3D& pred, const ScalarField3D& truth) {
  require_same_grid(pred, truth, "nmae");
  return nmae(pred.values(), truth.values());
}

inline double rmse(const ScalarField3D& pred, const ScalarField3D& truth) {
  require_same_grid(pred, truth, "rmse");
  return rmse(pred.values(), truth.values());
}

struct ProgressMask {
  double lo = 0.05;
  double hi = 0.95;
  bool contains(double c) const { return c >= lo && c <= hi; }
};

/// NMAE restricted to points whose progress variable lies inside `mask`.
inline double nmae_masked(const ScalarField3D& pred, const ScalarField3D& truth, const ScalarField3D& c,
                          ProgressMask mask = {}) {
  require_same_grid(pred, truth, "nmae");
  require_same_grid(c, truth, "nmae mask");
  std::vector<double> p, t;
  for (std::size_t n = 0; n < truth.size(); ++n)
    if (mask.contains(c[n])) {
      p.push_back(pred[n]);
      t.push_back(truth[n]);
    }
  return nmae(p, t);
}

struct EvalPair {
  const ScalarField3D* prediction;
  const ScalarField3D* truth;
  const ScalarField3D* progress;
  /// Maximum burning rate over the evaluation dataset.
  double normalization;
};

/// counts(t, p) holds points whose normalized truth falls in bin t and
/// normalized prediction in bin p. Bins are uniform on [0,1], half-open
/// except the last; values outside [0,1] go to the edge bins.
struct Hist2D {
  std::size_t bins = 0;
  std::vector<std::uint64_t> counts;
  ProgressMask mask;

  std::uint64_t operator()(std::size_t truth_bin, std::size_t pred_bin) const {
    return counts[truth_bin * bins + pred_bin];
  }
  std::uint64_t total() const {
    std::uint64_t s = 0;
    for (auto c : counts) s += c;
    return s;
  }
};

inline std::size_t hist_bin(double v, std::size_t bins) {
  if (!(v > 0.0)) return 0;
  if (v >= 1.0) return bins - 1;
  return std::min(bins - 1, static_cast<std::size_t>(v * static_cast<double>(bins)));
}

inline void hist2d_accumulate(Hist2D& h, const EvalPair& pair) {
  require_same_grid(*pair.prediction, *pair.truth, "hist2d");
  require_same_grid(*pair.progress, *pair.truth, "hist2d mask");
  if (!(pair.normalization > 0.0)) throw DegenerateError("hist2d: normalization must be positive");
  for (std::size_t n = 0; n < pair.truth->size(); ++n) {
    if (!h.mask.contains((*pair.progress)[n])) continue;
    const std::size_t t = hist_bin((*pair.truth)[n] / pair.normalization, h.bins);
    const std::size_t p = hist_bin((*pair.prediction)[n] / pair.normalization, h.bins);
    ++h.counts[t * h.bins + p];
  }
}

inline Hist2D hist2d_masked(const EvalPair& pair, std::size_t bins, ProgressMask mask = {}) {
  if (bins < 2) throw DomainError("hist2d_masked: need at least 2 bins");
  Hist2D h;
  h.bins = bins;
  h.mask = mask;
  h.counts.assign(bins * bins, 0);
  hist2d_accumulate(h, pair);
  return h;
}

/// Linear-interpolation quantile (Hyndman-Fan type 7).
inline double quantile_type7(std::vector<double> v, double p) {
  if (v.empty()) throw DegenerateError("quantile: empty input");
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

// ---------------------------------------------------------------------------
// Grouped report
// ---------------------------------------------------------------------------

struct GroupKey {
  double phi_g = 0.0;
  double sigma = 0.0;
  long dsf = 1;
  friend auto operator<=>(const GroupKey&, const GroupKey&) = default;
};

struct SnapshotScore {
  std::string case_id;
  std::int32_t time_index = 0;
  double nmae = 0.0;
  double rmse = 0.0;
};

struct GroupSummary {
  GroupKey key;
  std::size_t count = 0;
  std::optional<double> mean, q1, q3;
};

inline GroupSummary summarize(const GroupKey& key, const std::vector<SnapshotScore>& scores) {
  GroupSummary s;
  s.key = key;
  s.count = scores.size();
  if (scores.empty()) return s;
  std::vector<double> v;
  for (const auto& sc : scores) v.push_back(sc.nmae);
  s.mean = pairwise_sum(v) / static_cast<double>(v.size());
  s.q1 = quantile_type7(v, 0.25);
  s.q3 = quantile_type7(v, 0.75);
  return s;
}

using ScoreGroups = std::map<GroupKey, std::vector<SnapshotScore>>;

inline std::vector<GroupSummary> report(const ScoreGroups& groups) {
  std::vector<GroupSummary> out;
  for (const auto& [key, scores] : groups) out.push_back(summarize(key, scores));
  return out;
}

namespace detail {
inline std::string csv_num(std::optional<double> v) {
  return v ? format_double(*v) : std::string("NA");
}
} // namespace detail

inline std::string format_summary_csv(const std::vector<GroupSummary>& rows) {
  std::string s = "phi_g,sigma,dsf,n_snapshots,nmae_mean,nmae_q1,nmae_q3\n";
  for (const auto& r : rows)
    s += detail::format_double(r.key.phi_g) + "," + detail::format_double(r.key.sigma) + "," +
         std::to_string(r.key.dsf) + "," + std::to_string(r.count) + "," + detail::csv_num(r.mean) + "," +
         detail::csv_num(r.q1) + "," + detail::csv_num(r.q3) + "\n";
  return s;
}

inline std::string format_scores_csv(const ScoreGroups& groups) {
  std::string s = "phi_g,sigma,dsf,case,time_index,nmae,rmse\n";
  for (const auto& [key, scores] : groups)
    for (const auto& sc : scores)
      s += detail::format_double(key.phi_g) + "," + detail::format_double(key.sigma) + "," +
           std::to_string(key.dsf) + "," + sc.case_id + "," + std::to_string(sc.time_index) + "," +
           detail::format_double(sc.nmae) + "," + detail::format_double(sc.rmse) + "\n";
  return s;
}

/// Rows are truth bins, columns prediction bins.
inline std::string format_hist_csv(const Hist2D& h) {
  std::string s;
  for (std::size_t t = 0; t < h.bins; ++t) {
    for (std::size_t p = 0; p < h.bins; ++p) {
      if (p) s += ",";
      s += std::to_string(h(t, p));
    }
    s += "\n";
  }
  return s;
}

inline std::string group_label(const GroupKey& k) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "phi%.4g_sigma%.4g_dsf%ld", k.phi_g, k.sigma, k.dsf);
  return buf;
}

/// Writes `<prefix>summary.csv`, `<prefix>snapshots.csv` and one
/// `<prefix>hist_<group>.csv` per histogram into `dir`.
inline void write_report(const std::filesystem::path& dir, const std::string& prefix, const ScoreGroups& groups,
                         const std::map<GroupKey, Hist2D>& hists = {}) {
  write_text_atomic(dir / (prefix + "summary.csv"), format_summary_csv(report(groups)));
  write_text_atomic(dir / (prefix + "snapshots.csv"), format_scores_csv(groups));
  for (const auto& [key, h] : hists)
    write_text_atomic(dir / (prefix + "hist_" + group_label(key) + ".csv"), format_hist_csv(h));
}

} // namespace h2kit
