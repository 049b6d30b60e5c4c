#pragma once

// Praat TextGrid annotations (long "ooTextFile" format).

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dialectid/labels.hpp"

namespace dialectid {

struct Interval {
  double t_start = 0.0;
  double t_end = 0.0;
  std::string label;

  friend bool operator==(const Interval&, const Interval&) = default;
};

struct Point {
  double time = 0.0;
  std::string mark;

  friend bool operator==(const Point&, const Point&) = default;
};

enum class TierKind { interval, point };

struct Tier {
  std::string name;
  double x_min = 0.0;
  double x_max = 0.0;
  TierKind kind = TierKind::interval;
  std::vector<Interval> intervals;  // interval tiers
  std::vector<Point> points;        // point (TextTier) tiers

  friend bool operator==(const Tier&, const Tier&) = default;
};

struct TextGrid {
  double x_min = 0.0;
  double x_max = 0.0;
  std::vector<Tier> tiers;

  const Tier* find_tier(std::string_view name) const;

  friend bool operator==(const TextGrid&, const TextGrid&) = default;
};

struct VowelInterval {
  Interval interval;
  Vowel vowel = Vowel::a;
};

// Maps corpus-specific transcriptions (e.g. "aa", "@") onto the six vowels.
class AliasTable {
 public:
  AliasTable() = default;

  // One `label=vowel` pair per line; blank lines and `#` comments ignored.
  // Throws AliasTableError on a malformed line or a target outside the set.
  static AliasTable parse(std::string_view text);

  void add(std::string label, Vowel vowel);
  // Exact monophthong symbols always resolve; aliases are consulted after.
  std::optional<Vowel> resolve(std::string_view trimmed_label) const;
  std::size_t size() const { return aliases_.size(); }

 private:
  std::map<std::string, Vowel, std::less<>> aliases_;
};

// Throws MalformedTextGrid, EncodingError or InvariantViolation.
TextGrid parse_textgrid(std::span<const std::byte> raw);
TextGrid parse_textgrid(std::string_view utf8_text);

// Long-format UTF-8 text; parse_textgrid(serialize_textgrid(g)) == g.
std::string serialize_textgrid(const TextGrid& grid);

// Throws InvariantViolation describing the first violated rule.
void validate(const TextGrid& grid);

// Vowel-labelled intervals of an interval tier, in time order. Point tiers
// yield nothing. Throws UnknownTier.
std::vector<VowelInterval> vowel_intervals(const TextGrid& grid, std::string_view tier_name,
                                           const AliasTable& aliases = {});

// Converts UTF-8 / BOM-marked UTF-16 bytes to UTF-8 text. Throws EncodingError.
std::string decode_text(std::span<const std::byte> raw);

}  // namespace dialectid
