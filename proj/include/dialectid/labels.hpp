#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace dialectid {

// The six monophthongs analysed; diphthongs are never mapped to a Vowel.
enum class Vowel { schwa, e, i, o, u, a };
inline constexpr std::array<Vowel, 6> kAllVowels = {Vowel::schwa, Vowel::e, Vowel::i,
                                                    Vowel::o,     Vowel::u, Vowel::a};

// Fixed class order used for labels, confusion matrices and tie-breaking.
enum class Dialect { imphal = 0, kakching = 1, sekmai = 2 };
inline constexpr std::array<Dialect, 3> kAllDialects = {Dialect::imphal, Dialect::kakching,
                                                        Dialect::sekmai};
inline constexpr int kNumClasses = 3;

enum class Gender { male = 0, female = 1 };

// "ə" is written as UTF-8 (U+0259).
std::string_view vowel_symbol(Vowel v);
std::optional<Vowel> parse_vowel(std::string_view symbol);

std::string_view dialect_name(Dialect d);
// Case-insensitive match against Imphal / Kakching / Sekmai.
std::optional<Dialect> parse_dialect(std::string_view name);

std::string_view gender_name(Gender g);
// Accepts male/female/m/f in any case, and the numeric codes 0/1.
std::optional<Gender> parse_gender(std::string_view text);

inline int class_index(Dialect d) { return static_cast<int>(d); }

}  // namespace dialectid
