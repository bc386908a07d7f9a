#pragma once

// Random forest over flat feature rows: bootstrap per tree, ceil(sqrt(f))
// candidate features per node, Gini splits, label histograms in the leaves.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "comfort/error.hpp"
#include "comfort/labels.hpp"
#include "comfort/parallel.hpp"
#include "comfort/preprocess.hpp"
#include "comfort/rng.hpp"

namespace comfort {

using LabelCounts = std::array<std::size_t, 7>;

inline double gini(const LabelCounts& counts) {
  std::size_t total = 0;
  for (auto c : counts) total += c;
  if (total == 0) throw Error(Errc::EmptyNode, "gini of an empty node");
  double sum_sq = 0.0;
  for (auto c : counts) {
    const double p = static_cast<double>(c) / static_cast<double>(total);
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

struct ForestConfig {
  std::size_t trees = 400;
  std::size_t max_depth = 8;
  std::size_t max_features = 0;  // 0: ceil(sqrt(f))
  std::uint64_t seed = 42;
  std::size_t threads = 0;  // 0: hardware concurrency

  void validate() const {
    if (trees == 0) throw Error(Errc::InvalidConfig, "forest needs at least one tree");
  }
};

struct TreeNode {
  int feature = -1;  // -1 for leaves
  double threshold = 0.0;  // go left when x <= threshold
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::uint32_t depth = 0;
  LabelCounts histogram{};
  double weighted_decrease = 0.0;  // (n/N) * impurity decrease, split nodes only

  bool is_leaf() const noexcept { return feature < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  std::size_t leaf_index(std::span<const double> row) const {
    std::size_t i = 0;
    while (!nodes[i].is_leaf())
      i = static_cast<std::size_t>(row[static_cast<std::size_t>(nodes[i].feature)] <= nodes[i].threshold ? nodes[i].left
                                                                                                         : nodes[i].right);
    return i;
  }

  std::size_t depth() const {
    std::size_t d = 0;
    for (const auto& n : nodes) d = std::max<std::size_t>(d, n.depth);
    return d;
  }
};

struct ForestModel {
  ForestConfig config;
  std::size_t n_features = 0;
  std::vector<std::string> feature_names;
  std::vector<Tree> trees;
  bool trained = false;
};

/// Row-major feature matrix with labels.
struct FeatureTable {
  std::vector<double> x;
  std::size_t n_features = 0;
  std::vector<ThermalLabel> y;
  std::vector<std::string> names;

  std::size_t rows() const noexcept { return y.size(); }
  std::span<const double> row(std::size_t i) const { return {x.data() + i * n_features, n_features}; }
};

/// Flattens windows into rows of window_len * n_features values. Names are
/// the channel names for single-step windows and "name@t" otherwise.
inline FeatureTable table_from_windows(const WindowedDataset& ds) {
  FeatureTable t;
  t.n_features = ds.window_len * ds.n_features;
  t.x.reserve(ds.size() * t.n_features);
  t.y.reserve(ds.size());
  for (const auto& w : ds.windows) {
    t.x.insert(t.x.end(), w.sequence.begin(), w.sequence.end());
    t.y.push_back(w.label);
  }
  for (std::size_t s = 0; s < ds.window_len; ++s) {
    for (std::size_t c = 0; c < ds.n_features; ++c) {
      std::string name = ds.stats ? ds.stats->channels[c].name : "f" + std::to_string(c);
      if (ds.window_len > 1) name += "@" + std::to_string(s);
      t.names.push_back(std::move(name));
    }
  }
  return t;
}

namespace forest_detail {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double child_impurity = 0.0;  // n_l * g_l + n_r * g_r
};

class TreeBuilder {
 public:
  TreeBuilder(const FeatureTable& t, const ForestConfig& cfg, Rng& rng) : t_(t), cfg_(cfg), rng_(rng) {
    mtry_ = cfg.max_features ? std::min(cfg.max_features, t.n_features)
                             : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(t.n_features))));
    mtry_ = std::max<std::size_t>(1, mtry_);
    features_.resize(t.n_features);
    std::iota(features_.begin(), features_.end(), std::size_t{0});
  }

  Tree build(std::vector<std::size_t> sample) {
    total_ = static_cast<double>(sample.size());
    grow(sample, 0);
    return std::move(tree_);
  }

 private:
  std::int32_t grow(std::vector<std::size_t>& idx, std::uint32_t depth) {
    const auto id = static_cast<std::int32_t>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    TreeNode node;
    node.depth = depth;
    for (auto i : idx) ++node.histogram[t_.y[i].index()];
    const double g = gini(node.histogram);
    if (depth >= cfg_.max_depth || g <= 0.0 || idx.size() < 2) {
      tree_.nodes[static_cast<std::size_t>(id)] = node;
      return id;
    }
    const auto split = best_split(idx);
    if (split.feature < 0) {
      tree_.nodes[static_cast<std::size_t>(id)] = node;
      return id;
    }
    std::vector<std::size_t> left, right;
    for (auto i : idx) (value(i, split.feature) <= split.threshold ? left : right).push_back(i);
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.weighted_decrease = (static_cast<double>(idx.size()) * g - split.child_impurity) / total_;
    idx.clear();
    idx.shrink_to_fit();
    node.left = grow(left, depth + 1);
    node.right = grow(right, depth + 1);
    tree_.nodes[static_cast<std::size_t>(id)] = node;
    return id;
  }

  double value(std::size_t row, int feature) const {
    return t_.x[row * t_.n_features + static_cast<std::size_t>(feature)];
  }

  /// Draws mtry features; keeps drawing from the rest while no valid split
  /// has been found.
  Split best_split(const std::vector<std::size_t>& idx) {
    Split best;
    const std::size_t f = features_.size();
    for (std::size_t k = 0; k < f; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, f - 1);
      std::swap(features_[k], features_[pick(rng_)]);
      if (k >= mtry_ && best.feature >= 0) break;
      consider(idx, static_cast<int>(features_[k]), best);
    }
    return best;
  }

  void consider(const std::vector<std::size_t>& idx, int feature, Split& best) {
    order_.resize(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) order_[k] = {value(idx[k], feature), t_.y[idx[k]].index()};
    std::sort(order_.begin(), order_.end());
    LabelCounts left{}, right{};
    for (const auto& [v, c] : order_) ++right[c];
    const std::size_t n = order_.size();
    for (std::size_t k = 0; k + 1 < n; ++k) {
      ++left[order_[k].second];
      --right[order_[k].second];
      if (order_[k].first == order_[k + 1].first) continue;
      const double impurity = static_cast<double>(k + 1) * gini(left) + static_cast<double>(n - k - 1) * gini(right);
      if (best.feature < 0 || impurity < best.child_impurity) {
        best.feature = feature;
        best.child_impurity = impurity;
        best.threshold = order_[k].first + (order_[k + 1].first - order_[k].first) / 2.0;
      }
    }
  }

  const FeatureTable& t_;
  const ForestConfig& cfg_;
  Rng& rng_;
  std::size_t mtry_ = 1;
  std::vector<std::size_t> features_;
  std::vector<std::pair<double, std::size_t>> order_;
  Tree tree_;
  double total_ = 1.0;
};

}  // namespace forest_detail

/// Tree k draws its bootstrap sample and feature subsets from
/// derive_seed(seed, k), so forests do not depend on the thread count.
inline ForestModel rf_train(const FeatureTable& table, const ForestConfig& cfg) {
  cfg.validate();
  if (table.rows() == 0) throw Error(Errc::EmptyDataset, "no training rows");
  if (table.x.size() != table.rows() * table.n_features) throw Error(Errc::ShapeMismatch, "feature table is ragged");
  ForestModel m;
  m.config = cfg;
  m.n_features = table.n_features;
  m.feature_names = table.names;
  if (m.feature_names.size() != m.n_features) {
    m.feature_names.clear();
    for (std::size_t c = 0; c < m.n_features; ++c) m.feature_names.push_back("f" + std::to_string(c));
  }
  m.trees.resize(cfg.trees);
  const std::size_t n = table.rows();
  parallel_for(
      cfg.trees,
      [&](std::size_t k) {
        Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(k)));
        std::uniform_int_distribution<std::size_t> draw(0, n - 1);
        std::vector<std::size_t> sample(n);
        for (auto& s : sample) s = draw(rng);
        forest_detail::TreeBuilder builder(table, cfg, rng);
        m.trees[k] = builder.build(std::move(sample));
      },
      cfg.threads ? cfg.threads : default_threads());
  m.trained = true;
  return m;
}

/// Summed leaf histograms over all trees.
inline std::array<double, 7> rf_histogram(const ForestModel& m, std::span<const double> row) {
  if (!m.trained) throw Error(Errc::UntrainedModel, "forest has not been trained");
  if (row.size() != m.n_features)
    throw Error(Errc::ShapeMismatch, "row has " + std::to_string(row.size()) + " features, forest expects " +
                                         std::to_string(m.n_features));
  std::array<double, 7> sum{};
  for (const auto& t : m.trees) {
    const auto& leaf = t.nodes[t.leaf_index(row)];
    for (std::size_t c = 0; c < 7; ++c) sum[c] += static_cast<double>(leaf.histogram[c]);
  }
  return sum;
}

/// Argmax of the summed histograms; ties go to the colder label.
inline ThermalLabel rf_predict(const ForestModel& m, std::span<const double> row) {
  const auto h = rf_histogram(m, row);
  std::size_t best = 0;
  for (std::size_t c = 1; c < 7; ++c)
    if (h[c] > h[best]) best = c;
  return ThermalLabel::from_index(best);
}

inline std::vector<ThermalLabel> rf_predict(const ForestModel& m, const FeatureTable& table) {
  std::vector<ThermalLabel> out;
  out.reserve(table.rows());
  for (std::size_t i = 0; i < table.rows(); ++i) out.push_back(rf_predict(m, table.row(i)));
  return out;
}

using RankedScores = std::vector<std::pair<std::string, double>>;

inline void sort_ranked(RankedScores& r) {
  std::stable_sort(r.begin(), r.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
}

/// Mean weighted Gini decrease per feature, normalized to sum 1, in
/// descending order. All scores are zero when no tree ever split.
inline RankedScores impurity_importance(const ForestModel& m) {
  if (!m.trained) throw Error(Errc::UntrainedModel, "forest has not been trained");
  std::vector<double> score(m.n_features, 0.0);
  for (const auto& t : m.trees)
    for (const auto& node : t.nodes)
      if (!node.is_leaf()) score[static_cast<std::size_t>(node.feature)] += node.weighted_decrease;
  double total = 0.0;
  for (auto& s : score) {
    s /= static_cast<double>(m.trees.size());
    total += s;
  }
  RankedScores out;
  for (std::size_t c = 0; c < m.n_features; ++c) out.emplace_back(m.feature_names[c], total > 0 ? score[c] / total : 0.0);
  sort_ranked(out);
  return out;
}

}  // namespace comfort
