#include "dialectid/labels.hpp"

#include <algorithm>
#include <cctype>

namespace dialectid {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

std::string_view vowel_symbol(Vowel v) {
  switch (v) {
    case Vowel::schwa: return "\xC9\x99";
    case Vowel::e: return "e";
    case Vowel::i: return "i";
    case Vowel::o: return "o";
    case Vowel::u: return "u";
    case Vowel::a: return "a";
  }
  return "?";
}

std::optional<Vowel> parse_vowel(std::string_view symbol) {
  for (Vowel v : kAllVowels) {
    if (vowel_symbol(v) == symbol) return v;
  }
  return std::nullopt;
}

std::string_view dialect_name(Dialect d) {
  switch (d) {
    case Dialect::imphal: return "Imphal";
    case Dialect::kakching: return "Kakching";
    case Dialect::sekmai: return "Sekmai";
  }
  return "?";
}

std::optional<Dialect> parse_dialect(std::string_view name) {
  const std::string key = lower(name);
  for (Dialect d : kAllDialects) {
    if (lower(dialect_name(d)) == key) return d;
  }
  return std::nullopt;
}

std::string_view gender_name(Gender g) { return g == Gender::male ? "male" : "female"; }

std::optional<Gender> parse_gender(std::string_view text) {
  const std::string key = lower(text);
  if (key == "male" || key == "m" || key == "0") return Gender::male;
  if (key == "female" || key == "f" || key == "1") return Gender::female;
  return std::nullopt;
}

}  // namespace dialectid
