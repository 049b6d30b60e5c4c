#include "dialectid/forest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include <json.hpp>

#include "dialectid/errors.hpp"
#include "dialectid/eval.hpp"
#include "dialectid/labels.hpp"
#include "dialectid/parallel.hpp"

namespace dialectid {

namespace {

using i128 = __int128;

constexpr const char* kModelFormat = "dialectid-forest";
constexpr int kModelVersion = 1;

int argmax(std::span<const std::int64_t> counts) {
  int best = 0;
  for (std::size_t k = 1; k < counts.size(); ++k)
    if (counts[k] > counts[best]) best = static_cast<int>(k);
  return best;
}

std::vector<std::int64_t> class_counts(std::span<const std::size_t> samples, const TrainingData& data) {
  std::vector<std::int64_t> counts(data.n_classes, 0);
  for (std::size_t s : samples) ++counts[data.y[s]];
  return counts;
}

// Halfway between two consecutive distinct values, never equal to the upper one.
double midpoint(double lo, double hi) {
  double m = lo + 0.5 * (hi - lo);
  if (!std::isfinite(m)) m = 0.5 * lo + 0.5 * hi;
  if (!(m < hi) || m < lo) m = lo;
  return m;
}

struct Builder {
  const TrainingData& data;
  const ForestParams& params;
  Rng& rng;
  std::size_t subset_size;
  DecisionTree tree;

  int build(std::vector<std::size_t>& samples, int depth) {
    const int index = static_cast<int>(tree.nodes.size());
    TreeNode node;
    node.counts = class_counts(samples, data);
    node.prediction = argmax(node.counts);
    tree.nodes.push_back(node);

    const auto n = static_cast<std::int64_t>(samples.size());
    const bool pure = node.counts[node.prediction] == n;
    const bool too_few = n < params.min_samples_split;
    const bool too_deep = params.max_depth && depth >= *params.max_depth;
    if (pure || too_few || too_deep) return index;

    const std::vector<int> features = draw_features();
    const auto split = best_split(samples, features, data);
    if (!split) return index;

    std::vector<std::size_t> left, right;
    for (std::size_t s : samples) {
      (data.at(s, split->feature) <= split->threshold ? left : right).push_back(s);
    }
    samples.clear();
    samples.shrink_to_fit();

    tree.nodes[index].feature = split->feature;
    tree.nodes[index].threshold = split->threshold;
    const int l = build(left, depth + 1);
    const int r = build(right, depth + 1);
    tree.nodes[index].left = l;
    tree.nodes[index].right = r;
    return index;
  }

  // Partial Fisher-Yates over 0..n-1, then sorted.
  std::vector<int> draw_features() {
    std::vector<int> all(data.n_features);
    std::iota(all.begin(), all.end(), 0);
    for (std::size_t i = 0; i < subset_size; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(all.size() - i));
      std::swap(all[i], all[j]);
    }
    all.resize(subset_size);
    std::sort(all.begin(), all.end());
    return all;
  }
};

void check_training_data(const TrainingData& data) {
  if (data.n_rows == 0) throw DegenerateData("no training rows");
  if (data.n_features == 0) throw DegenerateData("no features");
  if (data.x.size() != data.n_rows * data.n_features || data.y.size() != data.n_rows)
    throw DimensionMismatch("training matrix shape does not match its row and feature counts");
  std::vector<bool> present(data.n_classes, false);
  for (int label : data.y) {
    if (label < 0 || label >= data.n_classes) throw DegenerateData("label out of range");
    present[label] = true;
  }
  if (std::count(present.begin(), present.end(), true) < 2)
    throw DegenerateData("training data contains fewer than two classes");
}

std::vector<std::string> dialect_class_names() {
  std::vector<std::string> names;
  for (Dialect d : kAllDialects) names.emplace_back(dialect_name(d));
  return names;
}

}  // namespace

TrainingData to_training_data(const Dataset& d) {
  std::vector<std::size_t> rows(d.rows.size());
  std::iota(rows.begin(), rows.end(), 0);
  return to_training_data(d, rows);
}

TrainingData to_training_data(const Dataset& d, std::span<const std::size_t> rows) {
  TrainingData t;
  t.n_rows = rows.size();
  t.n_features = d.width();
  t.n_classes = kNumClasses;
  t.x.reserve(t.n_rows * t.n_features);
  t.y.reserve(t.n_rows);
  for (std::size_t r : rows) {
    const FeatureRow& row = d.rows.at(r);
    if (row.values.size() != t.n_features)
      throw DimensionMismatch("row " + row.sample_id + " has " + std::to_string(row.values.size()) +
                              " values, expected " + std::to_string(t.n_features));
    t.x.insert(t.x.end(), row.values.begin(), row.values.end());
    t.y.push_back(class_index(row.dialect));
  }
  return t;
}

int DecisionTree::predict(std::span<const double> x) const {
  int i = 0;
  while (!nodes[i].is_leaf()) {
    const TreeNode& node = nodes[i];
    i = x[node.feature] <= node.threshold ? node.left : node.right;
  }
  return nodes[i].prediction;
}

void validate(const ForestParams& p) {
  if (p.n_estimators < 1) throw ConfigError("n_estimators must be at least 1");
  if (p.max_features < 1) throw ConfigError("max_features must be at least 1");
  if (p.min_samples_split < 2) throw ConfigError("min_samples_split must be at least 2");
  if (p.max_depth && *p.max_depth < 0) throw ConfigError("max_depth must be nonnegative");
}

double gini(std::span<const std::int64_t> counts) {
  std::int64_t total = 0;
  for (auto c : counts) total += c;
  if (total <= 0) throw EmptyNode("gini of an empty node");
  double sum = 0.0;
  for (auto c : counts) {
    const double p = static_cast<double>(c) / static_cast<double>(total);
    sum += p * p;
  }
  return 1.0 - sum;
}

std::optional<Split> best_split(std::span<const std::size_t> samples, std::span<const int> features,
                                const TrainingData& data) {
  const auto n = static_cast<std::int64_t>(samples.size());
  if (n < 2 || features.empty()) return std::nullopt;

  const auto parent = class_counts(samples, data);
  i128 parent_sq = 0;
  for (auto c : parent) parent_sq += static_cast<i128>(c) * c;
  if (parent_sq == static_cast<i128>(n) * n) return std::nullopt;

  // Weighted child impurity is 1 - S/n with S = sum cL^2/nL + sum cR^2/nR, so
  // maximizing S as the exact fraction num/den maximizes the decrease. The
  // parent itself scores parent_sq/n; a split must beat it strictly.
  i128 best_num = parent_sq;
  i128 best_den = n;
  std::optional<Split> best;

  std::vector<int> order(features.begin(), features.end());
  std::sort(order.begin(), order.end());
  order.erase(std::unique(order.begin(), order.end()), order.end());

  std::vector<std::pair<double, int>> column(samples.size());
  std::vector<std::int64_t> left(data.n_classes);
  std::vector<std::int64_t> right(data.n_classes);
  for (int f : order) {
    for (std::size_t i = 0; i < samples.size(); ++i) column[i] = {data.at(samples[i], f), data.y[samples[i]]};
    std::sort(column.begin(), column.end());
    std::fill(left.begin(), left.end(), 0);
    right = parent;
    i128 left_sq = 0;
    i128 right_sq = parent_sq;
    for (std::int64_t i = 0; i + 1 < n; ++i) {
      const int label = column[i].second;
      left_sq += 2 * left[label] + 1;
      right_sq -= 2 * right[label] - 1;
      ++left[label];
      --right[label];
      if (!(column[i].first < column[i + 1].first)) continue;
      const std::int64_t n_left = i + 1;
      const std::int64_t n_right = n - n_left;
      const i128 num = left_sq * n_right + right_sq * n_left;
      const i128 den = static_cast<i128>(n_left) * n_right;
      if (num * best_den > best_num * den) {
        best_num = num;
        best_den = den;
        // decrease = (num/den - parent_sq/n) / n
        const i128 gain_num = num * n - parent_sq * den;
        const long double decrease = static_cast<long double>(gain_num) /
                                     (static_cast<long double>(den) * static_cast<long double>(n) * n);
        best = Split{f, midpoint(column[i].first, column[i + 1].first), static_cast<double>(decrease)};
      }
    }
  }
  return best;
}

DecisionTree grow_tree(std::span<const std::size_t> samples, const TrainingData& data, const ForestParams& params,
                       Rng& rng) {
  if (samples.empty()) throw EmptyNode("grow_tree needs at least one sample");
  const std::size_t subset = std::min<std::size_t>(std::max(params.max_features, 1), data.n_features);
  Builder b{data, params, rng, subset, {}};
  b.tree.n_features = data.n_features;
  std::vector<std::size_t> root(samples.begin(), samples.end());
  b.build(root, 0);
  return std::move(b.tree);
}

RandomForestModel train_forest(const TrainingData& data, const ForestParams& params,
                               std::vector<std::string> feature_names, std::vector<std::string> class_names,
                               unsigned threads) {
  validate(params);
  check_training_data(data);
  if (feature_names.size() != data.n_features)
    throw DimensionMismatch("feature name count does not match the training matrix");
  if (class_names.size() != static_cast<std::size_t>(data.n_classes))
    throw DimensionMismatch("class name count does not match the label range");

  RandomForestModel m;
  m.params = params;
  m.feature_names = std::move(feature_names);
  m.class_names = std::move(class_names);
  m.trees.resize(params.n_estimators);
  parallel_for(m.trees.size(), threads, [&](std::size_t i) {
    Rng rng = Rng::stream(params.seed, {i});
    std::vector<std::size_t> samples(data.n_rows);
    if (params.bootstrap) {
      for (auto& s : samples) s = static_cast<std::size_t>(rng.below(data.n_rows));
    } else {
      std::iota(samples.begin(), samples.end(), 0);
    }
    m.trees[i] = grow_tree(samples, data, params, rng);
  });
  return m;
}

RandomForestModel train_forest(const Dataset& d, const ForestParams& params, unsigned threads) {
  return train_forest(to_training_data(d), params, d.feature_names, dialect_class_names(), threads);
}

int forest_predict(const RandomForestModel& m, std::span<const double> x) {
  if (x.size() != m.n_features())
    throw DimensionMismatch("row has " + std::to_string(x.size()) + " values, model expects " +
                            std::to_string(m.n_features()));
  std::vector<int> votes(m.class_names.size(), 0);
  for (const auto& tree : m.trees) ++votes[tree.predict(x)];
  return static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

std::vector<int> forest_predict_all(const RandomForestModel& m, const TrainingData& data, unsigned threads) {
  if (data.n_features != m.n_features())
    throw DimensionMismatch("data has " + std::to_string(data.n_features) + " features, model expects " +
                            std::to_string(m.n_features()));
  std::vector<int> out(data.n_rows);
  parallel_for(data.n_rows, threads, [&](std::size_t r) { out[r] = forest_predict(m, data.row(r)); });
  return out;
}

std::vector<double> feature_importances(const RandomForestModel& m) {
  const std::size_t width = m.n_features();
  std::vector<double> total(width, 0.0);
  for (const auto& tree : m.trees) {
    std::vector<double> mine(width, 0.0);
    const auto& nodes = tree.nodes;
    const auto count = [](const TreeNode& n) {
      return static_cast<double>(std::accumulate(n.counts.begin(), n.counts.end(), std::int64_t{0}));
    };
    const double n_root = count(nodes[0]);
    for (const auto& node : nodes) {
      if (node.is_leaf()) continue;
      const TreeNode& l = nodes[node.left];
      const TreeNode& r = nodes[node.right];
      const double n_node = count(node);
      const double decrease = gini(node.counts) - count(l) / n_node * gini(l.counts) -
                              count(r) / n_node * gini(r.counts);
      mine[node.feature] += n_node / n_root * decrease;
    }
    const double sum = std::accumulate(mine.begin(), mine.end(), 0.0);
    if (sum > 0.0)
      for (std::size_t f = 0; f < width; ++f) total[f] += mine[f] / sum;
  }
  const double sum = std::accumulate(total.begin(), total.end(), 0.0);
  if (sum > 0.0)
    for (double& v : total) v /= sum;
  return total;
}

GridResult grid_search(const Dataset& d, const ParamGrid& grid, int k, std::uint64_t seed, const ForestParams& base,
                       unsigned threads) {
  if (k < 2) throw InsufficientClassSamples("k must be at least 2");
  if (grid.n_estimators.empty() || grid.max_features.empty()) throw ConfigError("empty parameter grid");
  std::array<std::size_t, kNumClasses> sizes{};
  for (const auto& row : d.rows) ++sizes[class_index(row.dialect)];
  for (int c = 0; c < kNumClasses; ++c) {
    if (sizes[c] > 0 && sizes[c] < static_cast<std::size_t>(k))
      throw InsufficientClassSamples(std::string(dialect_name(kAllDialects[c])) + " has " +
                                     std::to_string(sizes[c]) + " rows, fewer than k = " + std::to_string(k));
  }

  const auto folds = stratified_k_fold(d, k, seed);
  std::vector<TrainingData> train(k), test(k);
  for (int f = 0; f < k; ++f) {
    std::vector<std::size_t> rows;
    for (int g = 0; g < k; ++g)
      if (g != f) rows.insert(rows.end(), folds[g].begin(), folds[g].end());
    std::sort(rows.begin(), rows.end());
    train[f] = to_training_data(d, rows);
    test[f] = to_training_data(d, folds[f]);
  }

  std::vector<int> trees = grid.n_estimators, features = grid.max_features;
  std::sort(trees.begin(), trees.end());
  trees.erase(std::unique(trees.begin(), trees.end()), trees.end());
  std::sort(features.begin(), features.end());
  features.erase(std::unique(features.begin(), features.end()), features.end());

  GridResult result;
  std::optional<std::size_t> best;
  for (int t : trees) {
    for (int mf : features) {
      GridRow row;
      row.params = base;
      row.params.n_estimators = t;
      row.params.max_features = mf;
      for (int f = 0; f < k; ++f) {
        const auto model = train_forest(train[f], row.params, d.feature_names, dialect_class_names(), threads);
        const auto predicted = forest_predict_all(model, test[f], threads);
        std::size_t correct = 0;
        for (std::size_t r = 0; r < predicted.size(); ++r) correct += predicted[r] == test[f].y[r];
        row.fold_accuracy.push_back(static_cast<double>(correct) / static_cast<double>(predicted.size()));
      }
      row.mean_accuracy =
          std::accumulate(row.fold_accuracy.begin(), row.fold_accuracy.end(), 0.0) / static_cast<double>(k);
      if (!best || row.mean_accuracy > result.table[*best].mean_accuracy) best = result.table.size();
      result.table.push_back(std::move(row));
    }
  }
  result.best = result.table[*best].params;
  return result;
}

// ---- persistence ----------------------------------------------------------

std::string save_model(const RandomForestModel& m) {
  using nlohmann::ordered_json;
  ordered_json doc;
  doc["format"] = kModelFormat;
  doc["version"] = kModelVersion;
  ordered_json p;
  p["n_estimators"] = m.params.n_estimators;
  p["max_features"] = m.params.max_features;
  p["min_samples_split"] = m.params.min_samples_split;
  p["max_depth"] = m.params.max_depth ? ordered_json(*m.params.max_depth) : ordered_json(nullptr);
  p["bootstrap"] = m.params.bootstrap;
  p["seed"] = m.params.seed;
  doc["params"] = p;
  doc["feature_names"] = m.feature_names;
  doc["class_names"] = m.class_names;
  ordered_json trees = ordered_json::array();
  for (const auto& tree : m.trees) {
    ordered_json nodes = ordered_json::array();
    for (const auto& node : tree.nodes) {
      ordered_json j;
      if (node.is_leaf()) {
        j["class"] = node.prediction;
      } else {
        j["feature"] = node.feature;
        j["threshold"] = node.threshold;
        j["left"] = node.left;
        j["right"] = node.right;
      }
      j["counts"] = node.counts;
      nodes.push_back(std::move(j));
    }
    trees.push_back(std::move(nodes));
  }
  doc["trees"] = std::move(trees);
  return doc.dump(1) + "\n";
}

RandomForestModel load_model(std::string_view raw) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(raw.begin(), raw.end());
  } catch (const json::exception& e) {
    throw ModelFormatError(std::string("not valid JSON (truncated or corrupt): ") + e.what());
  }
  try {
    if (!doc.is_object()) throw ModelFormatError("top level is not an object");
    if (!doc.contains("format") || doc.at("format") != kModelFormat)
      throw ModelFormatError("missing or wrong format tag");
    const json& version = doc.at("version");
    if (!version.is_number_integer() || version.get<int>() != kModelVersion)
      throw ModelFormatError("unsupported model version " + version.dump() + " (expected " +
                             std::to_string(kModelVersion) + ")");

    RandomForestModel m;
    const json& p = doc.at("params");
    m.params.n_estimators = p.at("n_estimators").get<int>();
    m.params.max_features = p.at("max_features").get<int>();
    m.params.min_samples_split = p.at("min_samples_split").get<int>();
    if (!p.at("max_depth").is_null()) m.params.max_depth = p.at("max_depth").get<int>();
    m.params.bootstrap = p.at("bootstrap").get<bool>();
    m.params.seed = p.at("seed").get<std::uint64_t>();
    m.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
    m.class_names = doc.at("class_names").get<std::vector<std::string>>();
    if (m.feature_names.empty()) throw ModelFormatError("no feature names");
    if (m.class_names.empty()) throw ModelFormatError("no class names");
    const auto n_classes = static_cast<int>(m.class_names.size());
    const auto n_features = static_cast<int>(m.feature_names.size());

    for (const json& jt : doc.at("trees")) {
      DecisionTree tree;
      tree.n_features = m.feature_names.size();
      const int size = static_cast<int>(jt.size());
      if (size == 0) throw ModelFormatError("tree without nodes");
      for (int i = 0; i < size; ++i) {
        const json& jn = jt.at(i);
        TreeNode node;
        node.counts = jn.at("counts").get<std::vector<std::int64_t>>();
        if (static_cast<int>(node.counts.size()) != n_classes) throw ModelFormatError("node counts width mismatch");
        std::int64_t total = 0;
        for (auto c : node.counts) {
          if (c < 0) throw ModelFormatError("negative class count");
          total += c;
        }
        if (total <= 0) throw ModelFormatError("node with no training samples");
        node.prediction = argmax(node.counts);
        if (jn.contains("feature")) {
          node.feature = jn.at("feature").get<int>();
          node.threshold = jn.at("threshold").get<double>();
          node.left = jn.at("left").get<int>();
          node.right = jn.at("right").get<int>();
          if (node.feature < 0 || node.feature >= n_features) throw ModelFormatError("split feature out of range");
          // Pre-order storage: children always follow their parent.
          if (node.left <= i || node.right <= i || node.left >= size || node.right >= size)
            throw ModelFormatError("child index out of range");
        } else {
          const int cls = jn.at("class").get<int>();
          if (cls != node.prediction) throw ModelFormatError("leaf class disagrees with its counts");
        }
        tree.nodes.push_back(std::move(node));
      }
      m.trees.push_back(std::move(tree));
    }
    if (static_cast<int>(m.trees.size()) != m.params.n_estimators)
      throw ModelFormatError("tree count does not match n_estimators");
    validate(m.params);
    return m;
  } catch (const json::exception& e) {
    throw ModelFormatError(std::string("malformed model: ") + e.what());
  } catch (const ConfigError& e) {
    throw ModelFormatError(std::string("invalid parameters: ") + e.detail());
  }
}

}  // namespace dialectid
