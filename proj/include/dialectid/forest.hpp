#pragma once

// CART trees and a bagged random forest.
//
// Split search compares candidate splits with exact integer arithmetic, so
// "best" and the tie-break order never depend on floating-point rounding.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dialectid/features.hpp"
#include "dialectid/rng.hpp"

namespace dialectid {

// Dense row-major design matrix with integer class labels in [0, n_classes).
struct TrainingData {
  std::vector<double> x;
  std::vector<int> y;
  std::size_t n_rows = 0;
  std::size_t n_features = 0;
  int n_classes = 0;

  double at(std::size_t row, std::size_t feature) const { return x[row * n_features + feature]; }
  std::span<const double> row(std::size_t r) const { return {x.data() + r * n_features, n_features}; }
};

// Uses all columns of d and the dialect index as label (3 classes).
TrainingData to_training_data(const Dataset& d);
// Same, restricted to the given rows (in that order).
TrainingData to_training_data(const Dataset& d, std::span<const std::size_t> rows);

struct TreeNode {
  int feature = -1;  // -1 for leaves
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int prediction = 0;                 // argmax of counts, lowest class on ties
  std::vector<std::int64_t> counts;   // training class counts reaching this node

  bool is_leaf() const { return feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root, pre-order
  std::size_t n_features = 0;

  int predict(std::span<const double> x) const;
  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;
};

struct ForestParams {
  int n_estimators = 400;
  int max_features = 12;  // clamped to the feature count when training
  int min_samples_split = 2;
  std::optional<int> max_depth;  // root is depth 0
  bool bootstrap = true;
  std::uint64_t seed = 0;

  friend bool operator==(const ForestParams&, const ForestParams&) = default;
};

// Throws ConfigError when a field is out of range.
void validate(const ForestParams& p);

struct RandomForestModel {
  std::vector<DecisionTree> trees;
  ForestParams params;
  std::vector<std::string> feature_names;
  std::vector<std::string> class_names;

  std::size_t n_features() const { return feature_names.size(); }
};

// 1 - sum (c_k / n)^2. Throws EmptyNode when the total is zero.
double gini(std::span<const std::int64_t> counts);

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double decrease = 0.0;  // parent Gini minus weighted child Gini
};

// Best Gini split of `samples` (duplicates allowed, they act as weights)
// over `features`. Thresholds are midpoints between consecutive distinct
// values; x <= threshold goes left. Ties go to the lowest feature index,
// then the lowest threshold. Returns nullopt if no split reduces impurity.
std::optional<Split> best_split(std::span<const std::size_t> samples, std::span<const int> features,
                                const TrainingData& data);

// Draw order from rng, pre-order with left before right: at every node that
// is not stopped, a sorted feature subset of size min(max_features, n).
DecisionTree grow_tree(std::span<const std::size_t> samples, const TrainingData& data, const ForestParams& params,
                       Rng& rng);

// Tree i uses Rng::stream(seed, {i}): n bootstrap draws first (when enabled),
// then its feature subsets. Throws DegenerateData for fewer than two classes
// or no rows.
RandomForestModel train_forest(const TrainingData& data, const ForestParams& params,
                               std::vector<std::string> feature_names, std::vector<std::string> class_names,
                               unsigned threads = 0);
RandomForestModel train_forest(const Dataset& d, const ForestParams& params, unsigned threads = 0);

// Plurality vote, ties to the lowest class index. Throws DimensionMismatch.
int forest_predict(const RandomForestModel& m, std::span<const double> x);
std::vector<int> forest_predict_all(const RandomForestModel& m, const TrainingData& data, unsigned threads = 0);

// Mean decrease in impurity, normalized per tree and again after averaging.
// All zeros if no tree has a split.
std::vector<double> feature_importances(const RandomForestModel& m);

struct ParamGrid {
  std::vector<int> n_estimators = {100, 200, 400};
  std::vector<int> max_features = {4, 6, 12};
};

struct GridRow {
  ForestParams params;
  std::vector<double> fold_accuracy;
  double mean_accuracy = 0.0;
};

struct GridResult {
  ForestParams best;
  std::vector<GridRow> table;  // ordered by n_estimators, then max_features
};

// Stratified k-fold CV of every grid cell on top of `base`. Highest mean
// wins; ties go to fewer trees, then fewer features. Throws
// InsufficientClassSamples if some present class has fewer than k rows.
GridResult grid_search(const Dataset& d, const ParamGrid& grid, int k, std::uint64_t seed,
                       const ForestParams& base = {}, unsigned threads = 0);

// Versioned JSON. load_model throws ModelFormatError.
std::string save_model(const RandomForestModel& m);
RandomForestModel load_model(std::string_view raw);

}  // namespace dialectid
