#include "dialectid/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

#include "dialectid/errors.hpp"
#include "dialectid/rng.hpp"
#include "dialectid/text_util.hpp"

namespace dialectid {

namespace {

constexpr std::uint64_t kSplitTag = 0x53504C54;  // "SPLT"
constexpr std::uint64_t kFoldTag = 0x464F4C44;   // "FOLD"

// Row indices of each class in canonical order.
std::array<std::vector<std::size_t>, kNumClasses> canonical_classes(const Dataset& d) {
  std::array<std::vector<std::size_t>, kNumClasses> out;
  for (std::size_t i = 0; i < d.rows.size(); ++i) out[class_index(d.rows[i].dialect)].push_back(i);
  for (auto& rows : out) {
    std::sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) {
      const FeatureRow& x = d.rows[a];
      const FeatureRow& y = d.rows[b];
      return std::tie(x.speaker_id, x.sample_id, a) < std::tie(y.speaker_id, y.sample_id, b);
    });
  }
  return out;
}

}  // namespace

SplitResult stratified_split(const Dataset& d, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw OutOfRange("test fraction must lie in (0, 1)");
  auto classes = canonical_classes(d);
  SplitResult out;
  for (int c = 0; c < kNumClasses; ++c) {
    auto& rows = classes[c];
    const std::size_t n = rows.size();
    if (n == 0) continue;
    if (n < 2)
      throw ClassTooSmall(std::string(dialect_name(kAllDialects[c])) + " has 1 row; a split needs at least 2");
    Rng rng = Rng::stream(seed, {kSplitTag, static_cast<std::uint64_t>(c)});
    rng.shuffle(std::span<std::size_t>(rows));
    auto n_test = static_cast<std::size_t>(std::floor(test_fraction * static_cast<double>(n) + 0.5));
    n_test = std::clamp<std::size_t>(n_test, 1, n - 1);
    out.test_indices.insert(out.test_indices.end(), rows.begin(), rows.begin() + n_test);
    out.train_indices.insert(out.train_indices.end(), rows.begin() + n_test, rows.end());
  }
  std::sort(out.train_indices.begin(), out.train_indices.end());
  std::sort(out.test_indices.begin(), out.test_indices.end());
  return out;
}

std::vector<std::vector<std::size_t>> stratified_k_fold(const Dataset& d, int k, std::uint64_t seed) {
  if (k < 2) throw ClassTooSmall("k-fold needs k >= 2");
  auto classes = canonical_classes(d);
  std::vector<std::vector<std::size_t>> folds(k);
  std::size_t offset = 0;
  for (int c = 0; c < kNumClasses; ++c) {
    auto& rows = classes[c];
    if (rows.empty()) continue;
    if (rows.size() < static_cast<std::size_t>(k))
      throw ClassTooSmall(std::string(dialect_name(kAllDialects[c])) + " has " + std::to_string(rows.size()) +
                          " rows, fewer than k = " + std::to_string(k));
    Rng rng = Rng::stream(seed, {kFoldTag, static_cast<std::uint64_t>(c)});
    rng.shuffle(std::span<std::size_t>(rows));
    for (std::size_t i = 0; i < rows.size(); ++i) folds[(offset + i) % k].push_back(rows[i]);
    offset += rows.size();
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

std::int64_t ConfusionMatrix::total() const {
  std::int64_t sum = 0;
  for (const auto& row : counts)
    for (auto v : row) sum += v;
  return sum;
}

ConfusionMatrix confusion_matrix(std::span<const int> truth, std::span<const int> predicted) {
  if (truth.size() != predicted.size())
    throw LengthMismatch(std::to_string(truth.size()) + " true labels vs " + std::to_string(predicted.size()) +
                         " predictions");
  ConfusionMatrix c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || truth[i] >= kNumClasses || predicted[i] < 0 || predicted[i] >= kNumClasses)
      throw OutOfRange("class label out of range at position " + std::to_string(i));
    ++c.counts[truth[i]][predicted[i]];
  }
  return c;
}

std::array<std::array<double, kNumClasses>, kNumClasses> normalize_rows(const ConfusionMatrix& c) {
  std::array<std::array<double, kNumClasses>, kNumClasses> out{};
  for (int i = 0; i < kNumClasses; ++i) {
    const auto sum = std::accumulate(c.counts[i].begin(), c.counts[i].end(), std::int64_t{0});
    if (sum == 0) continue;
    for (int j = 0; j < kNumClasses; ++j)
      out[i][j] = static_cast<double>(c.counts[i][j]) / static_cast<double>(sum);
  }
  return out;
}

double accuracy(const ConfusionMatrix& c) {
  const auto total = c.total();
  if (total == 0) throw EmptyMatrix("accuracy of an empty confusion matrix");
  std::int64_t trace = 0;
  for (int i = 0; i < kNumClasses; ++i) trace += c.counts[i][i];
  return static_cast<double>(trace) / static_cast<double>(total);
}

std::string format_confusion_table(const ConfusionMatrix& c, bool normalized) {
  const auto fractions = normalize_rows(c);
  std::size_t label_width = std::string("true \\ pred").size();
  for (Dialect d : c.class_names) label_width = std::max(label_width, dialect_name(d).size());
  std::size_t cell = 10;
  for (Dialect d : c.class_names) cell = std::max(cell, dialect_name(d).size() + 2);

  const auto pad_right = [](std::string s, std::size_t w) { return s + std::string(w > s.size() ? w - s.size() : 0, ' '); };
  const auto pad_left = [](std::string s, std::size_t w) { return std::string(w > s.size() ? w - s.size() : 0, ' ') + s; };

  std::string out = pad_right("true \\ pred", label_width);
  for (Dialect d : c.class_names) out += pad_left(std::string(dialect_name(d)), cell);
  out += '\n';
  for (int i = 0; i < kNumClasses; ++i) {
    out += pad_right(std::string(dialect_name(c.class_names[i])), label_width);
    for (int j = 0; j < kNumClasses; ++j) {
      char buf[32];
      if (normalized) std::snprintf(buf, sizeof buf, "%.4f", fractions[i][j]);
      else std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(c.counts[i][j]));
      out += pad_left(buf, cell);
    }
    out += '\n';
  }
  return out;
}

std::string confusion_csv(const ConfusionMatrix& c, bool normalized) {
  const auto fractions = normalize_rows(c);
  std::string out = "true_class";
  for (Dialect d : c.class_names) out += ",pred_" + std::string(dialect_name(d));
  out += '\n';
  for (int i = 0; i < kNumClasses; ++i) {
    out += dialect_name(c.class_names[i]);
    for (int j = 0; j < kNumClasses; ++j) {
      out += ',';
      out += normalized ? format_g(fractions[i][j], 6) : std::to_string(c.counts[i][j]);
    }
    out += '\n';
  }
  return out;
}

}  // namespace dialectid
