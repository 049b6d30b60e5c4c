#pragma once

// Shared test helpers: temporary directories, independent oracles and small
// signal generators. Oracles here deliberately avoid the library's own code
// paths (direct sums, dense solves, eigenvalues, exhaustive search).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <span>
#include <vector>

#include <unistd.h>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "dialectid/audio.hpp"
#include "dialectid/forest.hpp"
#include "dialectid/rng.hpp"
#include "dialectid/textgrid.hpp"

namespace testing {

namespace fs = std::filesystem;

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("dialectid_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline dialectid::AudioSignal tone(double freq, double seconds, int rate, double amplitude = 0.5) {
  dialectid::AudioSignal s;
  s.sample_rate = rate;
  const auto n = static_cast<std::size_t>(std::llround(seconds * rate));
  s.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) s.samples[i] = amplitude * std::sin(2.0 * std::numbers::pi * freq * i / rate);
  return s;
}

inline dialectid::AudioSignal white_noise(double seconds, int rate, std::uint64_t seed, double sd = 0.2) {
  dialectid::Rng rng(seed);
  dialectid::AudioSignal s;
  s.sample_rate = rate;
  s.samples.resize(static_cast<std::size_t>(std::llround(seconds * rate)));
  for (double& x : s.samples) x = std::clamp(sd * rng.normal(), -1.0, 1.0);
  return s;
}

// ---- TextGrid generator ---------------------------------------------------------

// Labels mix vowels, consonants, silence, quotes, spaces and non-ASCII text.
inline dialectid::TextGrid random_textgrid(dialectid::Rng& rng) {
  static const char* const kLabels[] = {"", "a", "e", "i", "o", "u", "\xC9\x99", "t", "sil", "\xC9\x99i",
                                        "say \"hi\"", " a ", "k\xC3\xA4", "\xE0\xA6\x95", "x y z"};
  const auto pick_label = [&] { return std::string(kLabels[rng.below(std::size(kLabels))]); };
  // Times are multiples of 1/1024 plus an odd fraction so shortest round-trip
  // formatting is exercised on non-trivial doubles.
  const auto tick = [&](std::uint64_t k) { return static_cast<double>(k) / 1024.0 + static_cast<double>(k) * 1e-7; };

  dialectid::TextGrid g;
  const std::uint64_t span = 64 + rng.below(4096);
  g.x_min = 0.0;
  g.x_max = tick(span);
  const std::size_t n_tiers = 1 + rng.below(4);
  for (std::size_t t = 0; t < n_tiers; ++t) {
    dialectid::Tier tier;
    tier.name = "tier" + std::to_string(t) + (rng.below(2) ? "" : " \xC9\x99");
    tier.x_min = g.x_min;
    tier.x_max = g.x_max;
    if (rng.below(5) == 0) {
      tier.kind = dialectid::TierKind::point;
      std::uint64_t k = rng.below(8);
      while (true) {
        k += 1 + rng.below(span / 8 + 1);
        if (k > span) break;
        tier.points.push_back({tick(k), pick_label()});
      }
    } else {
      std::uint64_t k = 0;
      while (k < span) {
        std::uint64_t next = std::min(span, k + 1 + rng.below(span / 4 + 1));
        // Occasional gaps between intervals are legal.
        if (rng.below(6) == 0 && next < span) {
          k = next;
          continue;
        }
        tier.intervals.push_back({tick(k), tick(next), pick_label()});
        k = next;
      }
      if (tier.intervals.empty()) tier.intervals.push_back({g.x_min, g.x_max, pick_label()});
    }
    g.tiers.push_back(std::move(tier));
  }
  return g;
}

inline std::string minimal_textgrid(const std::string& tier_body, int declared_intervals, const std::string& header_extra = "") {
  return "File type = \"ooTextFile\"\nObject class = \"TextGrid\"\n" + header_extra +
         "\nxmin = 0\nxmax = 1\ntiers? <exists>\nsize = 1\nitem []:\n    item [1]:\n"
         "        class = \"IntervalTier\"\n        name = \"phoneme\"\n        xmin = 0\n        xmax = 1\n"
         "        intervals: size = " +
         std::to_string(declared_intervals) + "\n" + tier_body;
}

inline std::string interval_text(int k, const std::string& x0, const std::string& x1, const std::string& label) {
  return "        intervals [" + std::to_string(k) + "]:\n            xmin = " + x0 + "\n            xmax = " + x1 +
         "\n            text = \"" + label + "\"\n";
}

struct MalformedCase {
  std::string name;
  std::string bytes;
  std::string error_kind;  // prefix of what()
};

inline std::vector<MalformedCase> malformed_textgrids() {
  const std::string two = interval_text(1, "0", "0.5", "a") + interval_text(2, "0.5", "1", "");
  std::vector<MalformedCase> cases;
  cases.push_back({"empty file", "", "MalformedTextGrid"});
  cases.push_back({"missing header",
                   "xmin = 0\nxmax = 1\ntiers? <exists>\nsize = 1\nitem []:\n", "MalformedTextGrid"});
  cases.push_back({"declares 3 intervals, lists 2", minimal_textgrid(two, 3), "MalformedTextGrid"});
  cases.push_back({"lists more intervals than declared", minimal_textgrid(two, 1), "MalformedTextGrid"});
  cases.push_back({"non-numeric time",
                   minimal_textgrid(interval_text(1, "0", "half", "a") + interval_text(2, "0.5", "1", ""), 2),
                   "MalformedTextGrid"});
  cases.push_back({"short format",
                   "File type = \"ooTextFile\"\nObject class = \"TextGrid\"\n\n0\n1\n<exists>\n1\n\"IntervalTier\"\n"
                   "\"phoneme\"\n0\n1\n1\n0\n1\n\"a\"\n",
                   "MalformedTextGrid"});
  cases.push_back({"unterminated string",
                   minimal_textgrid("        intervals [1]:\n            xmin = 0\n            xmax = 1\n            text = \"a\n", 1), "MalformedTextGrid"});
  cases.push_back({"overlapping intervals",
                   minimal_textgrid(interval_text(1, "0", "0.6", "a") + interval_text(2, "0.5", "1", ""), 2),
                   "InvariantViolation"});
  cases.push_back({"invalid UTF-8", minimal_textgrid(interval_text(1, "0", "1", "\xC3\x28"), 1), "EncodingError"});
  cases.push_back({"odd-length UTF-16", std::string("\xFF\xFE\x46\x00\x69", 5), "EncodingError"});
  cases.push_back({"wrong object class",
                   "File type = \"ooTextFile\"\nObject class = \"Pitch 1\"\n\nxmin = 0\n", "MalformedTextGrid"});
  return cases;
}

// ---- DSP oracles ------------------------------------------------------------

inline std::vector<double> direct_autocorrelation(const std::vector<double>& x, std::size_t max_lag) {
  std::vector<double> r(max_lag + 1, 0.0);
  for (std::size_t tau = 0; tau <= max_lag; ++tau)
    for (std::size_t i = 0; i + tau < x.size(); ++i) r[tau] += x[i] * x[i + tau];
  return r;
}

// Dense solve of the Yule-Walker system R a = r[1..p].
inline std::vector<double> toeplitz_solve(const std::vector<double>& r, int p) {
  Eigen::MatrixXd R(p, p);
  Eigen::VectorXd rhs(p);
  for (int i = 0; i < p; ++i) {
    rhs(i) = r[i + 1];
    for (int j = 0; j < p; ++j) R(i, j) = r[static_cast<std::size_t>(std::abs(i - j))];
  }
  const Eigen::VectorXd a = R.fullPivLu().solve(rhs);
  return {a.data(), a.data() + p};
}

// Eigenvalues of the companion matrix of z^p - a1 z^(p-1) - ... - ap.
inline std::vector<std::complex<double>> companion_roots(const std::vector<double>& a) {
  const int p = static_cast<int>(a.size());
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(p, p);
  for (int j = 0; j < p; ++j) C(0, j) = a[j];
  for (int i = 1; i < p; ++i) C(i, i - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(C, false);
  std::vector<std::complex<double>> out;
  for (int i = 0; i < p; ++i) out.push_back(solver.eigenvalues()(i));
  return out;
}

// Largest distance from a root in `got` to its greedily matched partner.
inline double root_set_distance(std::vector<std::complex<double>> got, std::vector<std::complex<double>> want) {
  if (got.size() != want.size()) return INFINITY;
  double worst = 0.0;
  for (const auto& w : want) {
    auto best = std::min_element(got.begin(), got.end(),
                                 [&](const auto& x, const auto& y) { return std::abs(x - w) < std::abs(y - w); });
    worst = std::max(worst, std::abs(*best - w));
    got.erase(best);
  }
  return worst;
}

// Coefficients a1..ap (LPC sign convention) of prod (z - r_i).
inline std::vector<double> lpc_from_roots(const std::vector<std::complex<double>>& roots) {
  std::vector<std::complex<double>> poly = {1.0};
  for (const auto& r : roots) {
    std::vector<std::complex<double>> next(poly.size() + 1, 0.0);
    for (std::size_t i = 0; i < poly.size(); ++i) {
      next[i] += poly[i];
      next[i + 1] -= r * poly[i];
    }
    poly = next;
  }
  std::vector<double> a;
  for (std::size_t k = 1; k < poly.size(); ++k) a.push_back(-poly[k].real());
  return a;
}

// Power spectral density by averaged Blackman-windowed periodograms.
// Bin k corresponds to k * rate / n Hz.
inline std::vector<double> welch_psd(const std::vector<double>& x, std::size_t n) {
  std::vector<double> window(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = 2.0 * std::numbers::pi * i / (n - 1);
    window[i] = 0.42 - 0.5 * std::cos(t) + 0.08 * std::cos(2.0 * t);
  }
  Eigen::FFT<double> fft;
  std::vector<double> psd(n / 2 + 1, 0.0);
  std::vector<double> block(n);
  std::vector<std::complex<double>> spectrum;
  for (std::size_t start = 0; start + n <= x.size(); start += n / 2) {
    for (std::size_t i = 0; i < n; ++i) block[i] = x[start + i] * window[i];
    fft.fwd(spectrum, block);
    for (std::size_t k = 0; k <= n / 2; ++k) psd[k] += std::norm(spectrum[k]);
  }
  return psd;
}

// ---- CART oracle --------------------------------------------------------------
//
// Exhaustive search with exact rational Gini arithmetic. Features must hold
// integer values so midpoints are exact in any formula.

struct Fraction {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Fraction make(std::int64_t n, std::int64_t d) {
    const std::int64_t g = std::gcd(n, d);
    return {n / g, d / g};
  }
  friend Fraction operator-(Fraction a, Fraction b) { return make(a.num * b.den - b.num * a.den, a.den * b.den); }
  friend Fraction operator+(Fraction a, Fraction b) { return make(a.num * b.den + b.num * a.den, a.den * b.den); }
  friend Fraction operator*(Fraction a, Fraction b) { return make(a.num * b.num, a.den * b.den); }
  friend bool operator>(Fraction a, Fraction b) { return a.num * b.den > b.num * a.den; }
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

inline Fraction exact_gini(const std::vector<std::size_t>& rows, const dialectid::TrainingData& d) {
  std::vector<std::int64_t> counts(d.n_classes, 0);
  for (auto r : rows) ++counts[d.y[r]];
  const auto n = static_cast<std::int64_t>(rows.size());
  Fraction g = Fraction::make(1, 1);
  for (auto c : counts) g = g - Fraction::make(c * c, n * n);
  return g;
}

struct OracleSplit {
  int feature = -1;
  double threshold = 0.0;
  Fraction decrease;
};

inline std::optional<OracleSplit> brute_force_split(const std::vector<std::size_t>& rows, const std::vector<int>& features,
                                                    const dialectid::TrainingData& d) {
  if (rows.size() < 2) return std::nullopt;
  const Fraction parent = exact_gini(rows, d);
  const auto n = static_cast<std::int64_t>(rows.size());
  std::optional<OracleSplit> best;
  std::vector<int> sorted = features;
  std::sort(sorted.begin(), sorted.end());
  for (int f : sorted) {
    std::vector<double> values;
    for (auto r : rows) values.push_back(d.at(r, f));
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    for (std::size_t i = 0; i + 1 < values.size(); ++i) {
      const double t = (values[i] + values[i + 1]) / 2.0;
      std::vector<std::size_t> left, right;
      for (auto r : rows) (d.at(r, f) <= t ? left : right).push_back(r);
      const Fraction weighted =
          Fraction::make(static_cast<std::int64_t>(left.size()), n) * exact_gini(left, d) +
          Fraction::make(static_cast<std::int64_t>(right.size()), n) * exact_gini(right, d);
      const Fraction delta = parent - weighted;
      if (delta > Fraction{0, 1} && (!best || delta > best->decrease)) best = OracleSplit{f, t, delta};
    }
  }
  return best;
}

struct OracleNode {
  int feature = -1;
  double threshold = 0.0;
  int prediction = 0;
  int left = -1, right = -1;
};

// Full-feature CART without randomness: pre-order node list.
inline int brute_force_tree(const std::vector<std::size_t>& rows, const dialectid::TrainingData& d,
                            std::vector<OracleNode>& nodes) {
  const int index = static_cast<int>(nodes.size());
  nodes.emplace_back();
  std::vector<std::int64_t> counts(d.n_classes, 0);
  for (auto r : rows) ++counts[d.y[r]];
  int pred = 0;
  for (int c = 1; c < d.n_classes; ++c)
    if (counts[c] > counts[pred]) pred = c;
  nodes[index].prediction = pred;
  std::vector<int> all(d.n_features);
  std::iota(all.begin(), all.end(), 0);
  const auto split = brute_force_split(rows, all, d);
  if (!split) return index;
  std::vector<std::size_t> left, right;
  for (auto r : rows) (d.at(r, split->feature) <= split->threshold ? left : right).push_back(r);
  nodes[index].feature = split->feature;
  nodes[index].threshold = split->threshold;
  const int l = brute_force_tree(left, d, nodes);
  const int r = brute_force_tree(right, d, nodes);
  nodes[index].left = l;
  nodes[index].right = r;
  return index;
}

inline int oracle_predict(const std::vector<OracleNode>& nodes, std::span<const double> x) {
  int i = 0;
  while (nodes[i].feature >= 0) i = x[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
  return nodes[i].prediction;
}

// Random integer-valued dataset: rows x features in [0, levels), labels in [0, classes).
inline dialectid::TrainingData random_integer_data(dialectid::Rng& rng, std::size_t rows, std::size_t features,
                                                   int classes, int levels) {
  dialectid::TrainingData d;
  d.n_rows = rows;
  d.n_features = features;
  d.n_classes = classes;
  for (std::size_t i = 0; i < rows * features; ++i) d.x.push_back(static_cast<double>(rng.below(levels)));
  for (std::size_t i = 0; i < rows; ++i) d.y.push_back(static_cast<int>(rng.below(classes)));
  return d;
}

}  // namespace testing
