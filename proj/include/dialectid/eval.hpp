#pragma once

// Stratified splitting, k-fold partitioning and confusion matrices.
//
// Within each class, rows are put in a canonical order (speaker_id, then
// sample_id, then row index) before the seeded shuffle, so a split depends
// on the rows present and not on the order they were read in.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dialectid/features.hpp"
#include "dialectid/labels.hpp"

namespace dialectid {

constexpr std::uint64_t kDefaultSplitSeed = 42;

struct SplitResult {
  std::vector<std::size_t> train_indices;  // ascending
  std::vector<std::size_t> test_indices;   // ascending
};

// Per class: round-half-up(test_fraction * n) rows to test, clamped to
// [1, n - 1]. Throws ClassTooSmall for a present class with fewer than 2 rows,
// OutOfRange unless 0 < test_fraction < 1.
SplitResult stratified_split(const Dataset& d, double test_fraction, std::uint64_t seed = kDefaultSplitSeed);

// k disjoint ascending folds covering all rows. Each class is dealt round
// robin; the starting fold carries over from one class to the next. Throws
// ClassTooSmall for a present class with fewer than k rows.
std::vector<std::vector<std::size_t>> stratified_k_fold(const Dataset& d, int k, std::uint64_t seed);

struct ConfusionMatrix {
  std::array<std::array<std::int64_t, kNumClasses>, kNumClasses> counts{};  // [true][predicted]
  std::array<Dialect, kNumClasses> class_names = kAllDialects;

  std::int64_t total() const;
};

// Throws LengthMismatch, OutOfRange for labels outside [0, 3).
ConfusionMatrix confusion_matrix(std::span<const int> truth, std::span<const int> predicted);

// Nonzero rows divided by their sums; zero rows stay zero.
std::array<std::array<double, kNumClasses>, kNumClasses> normalize_rows(const ConfusionMatrix& c);

// trace / total. Throws EmptyMatrix.
double accuracy(const ConfusionMatrix& c);

// Aligned text table of counts, or of row fractions when normalized.
std::string format_confusion_table(const ConfusionMatrix& c, bool normalized);
// `true_class,pred_Imphal,pred_Kakching,pred_Sekmai`, one row per true class.
std::string confusion_csv(const ConfusionMatrix& c, bool normalized);

}  // namespace dialectid
