#pragma once

// Raw RecordSets to model-ready windows. Fixed order of operations:
// extrapolate labels, filter outliers, downsample, normalize, window, augment.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "comfort/error.hpp"
#include "comfort/labels.hpp"
#include "comfort/record.hpp"
#include "comfort/rng.hpp"

namespace comfort {

/// Forward-fills user ratings onto every record. Records before the first
/// rating take that first rating.
inline RecordSet extrapolate_labels(RecordSet rs) {
  auto is_rating = [](const ComfortRecord& r) { return r.label && r.label_source == LabelSource::UserRated; };
  const auto first = std::find_if(rs.records.begin(), rs.records.end(), is_rating);
  if (first == rs.records.end())
    throw Error(Errc::NoLabels, "participant '" + rs.participant_id + "' has no user-rated labels");
  std::optional<ThermalLabel> current = first->label;
  for (auto& r : rs.records) {
    if (is_rating(r)) {
      current = r.label;
      continue;
    }
    r.label = current;
    r.label_source = LabelSource::Extrapolated;
  }
  return rs;
}

namespace detail {

struct Moments {
  double mean = 0.0;
  double std = 0.0;
  std::size_t n = 0;
};

/// Population mean and standard deviation of the present values.
inline Moments moments(const std::vector<double>& xs) {
  Moments m;
  m.n = xs.size();
  if (xs.empty()) return m;
  double sum = 0.0;
  for (double x : xs) sum += x;
  m.mean = sum / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - m.mean) * (x - m.mean);
  m.std = std::sqrt(ss / static_cast<double>(xs.size()));
  return m;
}

}  // namespace detail

inline constexpr double kOutlierSigmas = 3.0;

/// Drops records with any sensor value beyond mean +- 3 std of the
/// participant, and records whose ambient temperature lies beyond
/// mean +- 3 std of their own label group. Zero-variance channels are exempt.
inline RecordSet remove_outliers(RecordSet rs) {
  const std::size_t n = rs.records.size();
  if (n < 2) return rs;
  std::vector<bool> drop(n, false);

  auto screen = [&](const std::string& channel, const std::vector<std::size_t>& members) {
    std::vector<double> values;
    std::vector<std::size_t> owners;
    for (auto i : members) {
      if (auto v = numeric_field(rs.records[i], channel)) {
        values.push_back(*v);
        owners.push_back(i);
      }
    }
    const auto m = detail::moments(values);
    if (m.n < 2 || m.std <= 0.0) return;
    for (std::size_t k = 0; k < values.size(); ++k)
      if (std::abs(values[k] - m.mean) > kOutlierSigmas * m.std) drop[owners[k]] = true;
  };

  std::vector<std::size_t> everyone(n);
  for (std::size_t i = 0; i < n; ++i) everyone[i] = i;
  for (const auto& ch : sensor_channels()) screen(ch, everyone);

  std::array<std::vector<std::size_t>, 7> groups;
  for (std::size_t i = 0; i < n; ++i)
    if (rs.records[i].label) groups[rs.records[i].label->index()].push_back(i);
  for (const auto& ch : ambient_channels())
    for (const auto& g : groups) screen(ch, g);

  std::vector<ComfortRecord> kept;
  kept.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    if (!drop[i]) kept.push_back(std::move(rs.records[i]));
  rs.records = std::move(kept);
  return rs;
}

/// Keeps records 0, stride, 2*stride, ...
inline RecordSet downsample(RecordSet rs, std::size_t stride) {
  if (stride < 1) throw Error(Errc::InvalidConfig, "downsample stride must be >= 1");
  if (stride == 1) return rs;
  std::vector<ComfortRecord> kept;
  kept.reserve(rs.records.size() / stride + 1);
  for (std::size_t i = 0; i < rs.records.size(); i += stride) kept.push_back(std::move(rs.records[i]));
  rs.records = std::move(kept);
  rs.nominal_rate_hz /= static_cast<double>(stride);
  return rs;
}

/// One model input channel: a numeric column (z-normalized) or one entry
/// of a categorical column's one-hot expansion.
struct Channel {
  std::string name;    // channel name, "gender=F" for one-hot entries
  std::string column;  // source column
  bool one_hot = false;
  std::string category;  // one-hot entries only
  double mean = 0.0;
  double std = 1.0;
};

struct NormalizationStats {
  std::vector<Channel> channels;

  std::size_t size() const noexcept { return channels.size(); }
};

/// Selected columns plus normalization statistics fitted on training data.
/// The statistics object is shared, never copied, between partitions.
struct FeatureSpec {
  std::vector<std::string> selected;
  std::shared_ptr<const NormalizationStats> stats;
  std::vector<std::string> dropped;  // zero-variance columns removed at fit time

  std::size_t n_channels() const { return stats ? stats->size() : 0; }
};

inline FeatureSpec fit_feature_spec(std::span<const RecordSet> training, std::vector<std::string> selected) {
  FeatureSpec spec;
  spec.selected = std::move(selected);
  auto stats = std::make_shared<NormalizationStats>();
  for (const auto& col : spec.selected) {
    if (const auto* vocab = categorical_vocabulary(col)) {
      for (const auto& v : *vocab) stats->channels.push_back({col + "=" + v, col, true, v, 0.0, 1.0});
      continue;
    }
    if (!is_numeric_column(col)) throw Error(Errc::MissingFeature, "unknown feature column '" + col + "'");
    std::vector<double> xs;
    for (const auto& rs : training)
      for (const auto& r : rs.records)
        if (auto v = numeric_field(r, col)) xs.push_back(*v);
    const auto m = detail::moments(xs);
    if (m.n == 0) throw Error(Errc::MissingFeature, "column '" + col + "' has no values in the training data");
    if (m.std <= 0.0) {
      spec.dropped.push_back(col);
      continue;
    }
    stats->channels.push_back({col, col, false, "", m.mean, m.std});
  }
  spec.stats = std::move(stats);
  return spec;
}

/// Normalized feature row for one record.
inline void feature_row(const ComfortRecord& r, const NormalizationStats& stats, std::span<double> out,
                        std::size_t row_number = 0) {
  for (std::size_t c = 0; c < stats.channels.size(); ++c) {
    const auto& ch = stats.channels[c];
    if (ch.one_hot) {
      const auto v = categorical_field(r, ch.column);
      if (!v) throw Error(Errc::MissingFeature, ch.column + " is NA at row " + std::to_string(row_number + 1), row_number + 1);
      out[c] = *v == ch.category ? 1.0 : 0.0;
    } else {
      const auto v = numeric_field(r, ch.column);
      if (!v) throw Error(Errc::MissingFeature, ch.column + " is NA at row " + std::to_string(row_number + 1), row_number + 1);
      out[c] = (*v - ch.mean) / ch.std;
    }
  }
}

struct Window {
  std::vector<double> sequence;  // window_len x n_features, row-major
  OrdinalVector target{};
  ThermalLabel label;
  std::string participant;
  std::size_t end_index = 0;
};

struct WindowedDataset {
  std::vector<Window> windows;
  std::size_t window_len = 1;
  std::size_t forecast_gap = 0;
  std::size_t stride_downsample = 1;
  std::size_t n_features = 0;
  std::shared_ptr<const NormalizationStats> stats;

  std::size_t size() const noexcept { return windows.size(); }
  bool empty() const noexcept { return windows.empty(); }

  std::vector<ThermalLabel> labels() const {
    std::vector<ThermalLabel> out;
    out.reserve(windows.size());
    for (const auto& w : windows) out.push_back(w.label);
    return out;
  }

  void append(WindowedDataset other) {
    for (auto& w : other.windows) windows.push_back(std::move(w));
  }
};

inline std::size_t expected_window_count(std::size_t n, std::size_t w, std::size_t g) {
  return n + 1 >= w + g + 1 ? n + 1 - w - g : 0;
}

/// One window per end index e in [w-1, N-1-g]: rows [e-w+1, e] as input and
/// the ordinal-encoded label at e+g as target. Too-short series yield zero
/// windows.
inline WindowedDataset make_windows(const RecordSet& rs, const FeatureSpec& spec, std::size_t w, std::size_t g,
                                    std::size_t stride_downsample = 1) {
  if (w < 1) throw Error(Errc::InvalidConfig, "window length must be >= 1");
  if (!spec.stats) throw Error(Errc::InvalidConfig, "feature spec has no fitted statistics");
  WindowedDataset ds;
  ds.window_len = w;
  ds.forecast_gap = g;
  ds.stride_downsample = stride_downsample;
  ds.stats = spec.stats;
  const std::size_t f = spec.stats->size();
  ds.n_features = f;
  const std::size_t n = rs.records.size();
  const std::size_t count = expected_window_count(n, w, g);
  if (count == 0) return ds;

  std::vector<double> rows(n * f);
  for (std::size_t i = 0; i < n; ++i) feature_row(rs.records[i], *spec.stats, std::span<double>(rows).subspan(i * f, f), i);

  ds.windows.reserve(count);
  for (std::size_t e = w - 1; e + g < n; ++e) {
    const auto& target = rs.records[e + g];
    if (!target.label)
      throw Error(Errc::NoLabels, "record " + std::to_string(e + g + 1) + " of '" + rs.participant_id + "' is unlabeled",
                  e + g + 1);
    Window win;
    win.sequence.assign(rows.begin() + static_cast<std::ptrdiff_t>((e + 1 - w) * f),
                        rows.begin() + static_cast<std::ptrdiff_t>((e + 1) * f));
    win.label = *target.label;
    win.target = encode_ordinal(win.label);
    win.participant = rs.participant_id;
    win.end_index = e;
    ds.windows.push_back(std::move(win));
  }
  return ds;
}

/// Adds N(mu, sigma^2) noise to the continuous channels of every window.
/// Each participant draws from its own stream derived from the seed.
inline WindowedDataset augment_gaussian(WindowedDataset ds, double mu, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw Error(Errc::InvalidConfig, "sigma must be >= 0");
  if (sigma == 0.0 && mu == 0.0) return ds;
  std::vector<bool> continuous(ds.n_features, true);
  if (ds.stats)
    for (std::size_t c = 0; c < ds.n_features; ++c) continuous[c] = !ds.stats->channels[c].one_hot;

  std::map<std::string, Rng> streams;
  std::normal_distribution<double> noise(mu, sigma > 0.0 ? sigma : 1.0);
  for (auto& win : ds.windows) {
    auto it = streams.find(win.participant);
    if (it == streams.end()) it = streams.emplace(win.participant, Rng(derive_seed(seed, win.participant))).first;
    auto& rng = it->second;
    for (std::size_t i = 0; i < win.sequence.size(); ++i) {
      if (!continuous[i % ds.n_features]) continue;
      win.sequence[i] += sigma > 0.0 ? noise(rng) : mu;
    }
  }
  return ds;
}

}  // namespace comfort
