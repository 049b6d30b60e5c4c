#include "dialectid/textgrid.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>

#include "dialectid/errors.hpp"
#include "dialectid/text_util.hpp"

namespace dialectid {

namespace {

// ---------------------------------------------------------------------------
// Encoding

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string decode_utf16(std::span<const std::byte> raw, bool little_endian) {
  if (raw.size() % 2 != 0) throw EncodingError("UTF-16 input has an odd byte count");
  auto unit_at = [&](std::size_t i) {
    const auto b0 = static_cast<std::uint16_t>(raw[i]);
    const auto b1 = static_cast<std::uint16_t>(raw[i + 1]);
    return static_cast<std::uint16_t>(little_endian ? (b0 | (b1 << 8)) : ((b0 << 8) | b1));
  };
  std::string out;
  out.reserve(raw.size() / 2);
  for (std::size_t i = 0; i < raw.size(); i += 2) {
    const std::uint16_t unit = unit_at(i);
    if (unit >= 0xD800 && unit <= 0xDBFF) {
      if (i + 3 >= raw.size()) throw EncodingError("truncated UTF-16 surrogate pair");
      const std::uint16_t low = unit_at(i + 2);
      if (low < 0xDC00 || low > 0xDFFF) throw EncodingError("unpaired UTF-16 high surrogate");
      append_utf8(out, 0x10000 + ((static_cast<std::uint32_t>(unit) - 0xD800) << 10) + (low - 0xDC00));
      i += 2;
    } else if (unit >= 0xDC00 && unit <= 0xDFFF) {
      throw EncodingError("unpaired UTF-16 low surrogate");
    } else {
      append_utf8(out, unit);
    }
  }
  return out;
}

void validate_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t extra = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      extra = 1;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      extra = 2;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      extra = 3;
      cp = c & 0x07;
    } else {
      throw EncodingError("invalid UTF-8 lead byte at offset " + std::to_string(i));
    }
    if (i + extra >= s.size()) {
      throw EncodingError("truncated UTF-8 sequence at offset " + std::to_string(i));
    }
    for (std::size_t k = 1; k <= extra; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) {
        throw EncodingError("invalid UTF-8 continuation byte at offset " + std::to_string(i + k));
      }
      cp = (cp << 6) | (cc & 0x3F);
    }
    const std::uint32_t min_cp = extra == 1 ? 0x80 : extra == 2 ? 0x800 : 0x10000;
    if (cp < min_cp || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      throw EncodingError("invalid UTF-8 code point at offset " + std::to_string(i));
    }
    i += extra + 1;
  }
}

// ---------------------------------------------------------------------------
// Tokenizer: quoted strings ("" escapes a quote) and whitespace-separated words.

struct Token {
  std::string text;
  bool quoted = false;
  std::size_t line = 0;
};

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t line = 1;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (c == '\n') {
      ++line;
      ++i;
    } else if (c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v') {
      ++i;
    } else if (c == '"') {
      Token tok{{}, true, line};
      ++i;
      bool closed = false;
      while (i < text.size()) {
        if (text[i] == '"') {
          if (i + 1 < text.size() && text[i + 1] == '"') {
            tok.text.push_back('"');
            i += 2;
            continue;
          }
          ++i;
          closed = true;
          break;
        }
        if (text[i] == '\n') ++line;
        tok.text.push_back(text[i++]);
      }
      if (!closed) throw MalformedTextGrid("unterminated string starting on line " + std::to_string(tok.line));
      tokens.push_back(std::move(tok));
    } else {
      Token tok{{}, false, line};
      while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i])) && text[i] != '"') {
        tok.text.push_back(text[i++]);
      }
      tokens.push_back(std::move(tok));
    }
  }
  return tokens;
}

class Reader {
 public:
  explicit Reader(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  bool at_end() const { return pos_ >= tokens_.size(); }

  const Token* peek() const { return at_end() ? nullptr : &tokens_[pos_]; }

  bool peek_word(std::string_view word) const {
    const Token* t = peek();
    return t != nullptr && !t->quoted && t->text == word;
  }

  const Token& next(std::string_view context) {
    if (at_end()) throw MalformedTextGrid("unexpected end of file while reading " + std::string(context));
    return tokens_[pos_++];
  }

  void expect_word(std::string_view word) {
    const Token& t = next(word);
    if (t.quoted || t.text != word) {
      throw MalformedTextGrid("line " + std::to_string(t.line) + ": expected '" + std::string(word) +
                              "', found '" + t.text + "'");
    }
  }

  std::string read_string(std::string_view key) {
    const Token& t = next(key);
    if (!t.quoted) {
      throw MalformedTextGrid("line " + std::to_string(t.line) + ": expected a quoted string for " +
                              std::string(key));
    }
    return t.text;
  }

  double read_number(std::string_view key) {
    const Token& t = next(key);
    double value = 0.0;
    const char* first = t.text.data();
    const char* last = first + t.text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (t.quoted || ec != std::errc() || ptr != last || !std::isfinite(value)) {
      throw MalformedTextGrid("line " + std::to_string(t.line) + ": non-numeric value '" + t.text +
                              "' for " + std::string(key));
    }
    return value;
  }

  long read_count(std::string_view key) {
    const double v = read_number(key);
    if (v < 0 || v != std::floor(v) || v > 1e9) {
      throw MalformedTextGrid("invalid count for " + std::string(key));
    }
    return static_cast<long>(v);
  }

  // key = number
  double keyed_number(std::string_view key) {
    expect_word(key);
    expect_word("=");
    return read_number(key);
  }

  std::string keyed_string(std::string_view key) {
    expect_word(key);
    expect_word("=");
    return read_string(key);
  }

  // "[k]:" index tag after a list element name.
  void expect_index(std::string_view list, long k) {
    const Token& t = next(list);
    const std::string want = "[" + std::to_string(k) + "]:";
    if (t.quoted || t.text != want) {
      throw MalformedTextGrid("line " + std::to_string(t.line) + ": expected " + std::string(list) + " " +
                              want + ", found '" + t.text + "'");
    }
  }

 private:
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

// A list element header "<name> [k]:"; a mismatch here means the declared
// element count disagrees with the elements present.
void expect_element(Reader& in, std::string_view name, long k, long declared) {
  if (!in.peek_word(name)) {
    throw MalformedTextGrid(std::string(name) + " count mismatch: declared " + std::to_string(declared) +
                            ", found " + std::to_string(k - 1));
  }
  in.expect_word(name);
  in.expect_index(name, k);
}

Tier read_tier(Reader& in) {
  Tier tier;
  const std::string cls = in.keyed_string("class");
  if (cls == "IntervalTier") {
    tier.kind = TierKind::interval;
  } else if (cls == "TextTier") {
    tier.kind = TierKind::point;
  } else {
    throw MalformedTextGrid("unknown tier class \"" + cls + "\"");
  }
  tier.name = in.keyed_string("name");
  tier.x_min = in.keyed_number("xmin");
  tier.x_max = in.keyed_number("xmax");

  if (tier.kind == TierKind::interval) {
    in.expect_word("intervals:");
    in.expect_word("size");
    in.expect_word("=");
    const long n = in.read_count("intervals: size");
    tier.intervals.reserve(static_cast<std::size_t>(n));
    for (long k = 1; k <= n; ++k) {
      expect_element(in, "intervals", k, n);
      Interval iv;
      iv.t_start = in.keyed_number("xmin");
      iv.t_end = in.keyed_number("xmax");
      iv.label = in.keyed_string("text");
      tier.intervals.push_back(std::move(iv));
    }
    if (in.peek_word("intervals")) {
      throw MalformedTextGrid("intervals count mismatch: more intervals listed than the declared " +
                              std::to_string(n));
    }
  } else {
    in.expect_word("points:");
    in.expect_word("size");
    in.expect_word("=");
    const long n = in.read_count("points: size");
    for (long k = 1; k <= n; ++k) {
      expect_element(in, "points", k, n);
      Point p;
      if (in.peek_word("number")) {
        p.time = in.keyed_number("number");
      } else {
        p.time = in.keyed_number("time");
      }
      p.mark = in.keyed_string("mark");
      tier.points.push_back(std::move(p));
    }
    if (in.peek_word("points")) {
      throw MalformedTextGrid("points count mismatch: more points listed than the declared " +
                              std::to_string(n));
    }
  }
  return tier;
}

void append_number(std::string& out, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ptr);
}

void append_quoted(std::string& out, std::string_view s) {
  out.push_back('"');
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
}

void check_time(double t, const std::string& where) {
  if (!std::isfinite(t) || t < 0.0) {
    throw InvariantViolation(where + ": time " + std::to_string(t) + " is negative or not finite");
  }
}

}  // namespace

// ---------------------------------------------------------------------------

const Tier* TextGrid::find_tier(std::string_view name) const {
  for (const Tier& t : tiers) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

std::string decode_text(std::span<const std::byte> raw) {
  auto byte_at = [&](std::size_t i) { return static_cast<unsigned char>(raw[i]); };
  if (raw.size() >= 2 && byte_at(0) == 0xFF && byte_at(1) == 0xFE) {
    return decode_utf16(raw.subspan(2), true);
  }
  if (raw.size() >= 2 && byte_at(0) == 0xFE && byte_at(1) == 0xFF) {
    return decode_utf16(raw.subspan(2), false);
  }
  std::size_t skip = 0;
  if (raw.size() >= 3 && byte_at(0) == 0xEF && byte_at(1) == 0xBB && byte_at(2) == 0xBF) skip = 3;
  std::string text(reinterpret_cast<const char*>(raw.data()) + skip, raw.size() - skip);
  validate_utf8(text);
  return text;
}

void validate(const TextGrid& grid) {
  if (grid.tiers.empty()) throw InvariantViolation("a TextGrid needs at least one tier");
  check_time(grid.x_min, "TextGrid xmin");
  check_time(grid.x_max, "TextGrid xmax");
  if (!(grid.x_min < grid.x_max)) throw InvariantViolation("TextGrid xmin must be below xmax");
  std::set<std::string, std::less<>> names;
  for (const Tier& tier : grid.tiers) {
    const std::string where = "tier \"" + tier.name + "\"";
    if (!names.insert(tier.name).second) throw InvariantViolation("duplicate tier name \"" + tier.name + "\"");
    check_time(tier.x_min, where);
    check_time(tier.x_max, where);
    if (!(tier.x_min < tier.x_max)) throw InvariantViolation(where + ": xmin must be below xmax");
    double previous_end = tier.x_min;
    for (std::size_t k = 0; k < tier.intervals.size(); ++k) {
      const Interval& iv = tier.intervals[k];
      const std::string at = where + " interval " + std::to_string(k + 1);
      check_time(iv.t_start, at);
      check_time(iv.t_end, at);
      if (!(iv.t_start < iv.t_end)) throw InvariantViolation(at + ": start must be below end");
      if (iv.t_start < tier.x_min || iv.t_end > tier.x_max) {
        throw InvariantViolation(at + ": lies outside the tier range");
      }
      if (iv.t_start < previous_end) throw InvariantViolation(at + ": overlaps or precedes the previous interval");
      previous_end = iv.t_end;
    }
    double previous_time = tier.x_min;
    for (std::size_t k = 0; k < tier.points.size(); ++k) {
      const Point& p = tier.points[k];
      const std::string at = where + " point " + std::to_string(k + 1);
      check_time(p.time, at);
      if (p.time < previous_time || p.time > tier.x_max) {
        throw InvariantViolation(at + ": out of order or outside the tier range");
      }
      previous_time = p.time;
    }
  }
}

TextGrid parse_textgrid(std::span<const std::byte> raw) { return parse_textgrid(decode_text(raw)); }

TextGrid parse_textgrid(std::string_view utf8_text) {
  Reader in(tokenize(utf8_text));
  if (in.at_end()) throw MalformedTextGrid("empty file");
  try {
    in.expect_word("File");
    in.expect_word("type");
    in.expect_word("=");
    if (in.read_string("File type") != "ooTextFile") throw MalformedTextGrid("File type is not \"ooTextFile\"");
    in.expect_word("Object");
    in.expect_word("class");
    in.expect_word("=");
    if (in.read_string("Object class") != "TextGrid") throw MalformedTextGrid("Object class is not \"TextGrid\"");
  } catch (const MalformedTextGrid& e) {
    throw MalformedTextGrid(std::string("missing or invalid header (") + e.detail() + ")");
  }

  if (!in.peek_word("xmin")) {
    throw MalformedTextGrid("not a long-format TextGrid (short format is not supported)");
  }
  TextGrid grid;
  grid.x_min = in.keyed_number("xmin");
  grid.x_max = in.keyed_number("xmax");
  in.expect_word("tiers?");
  const Token& exists = in.next("tiers?");
  if (exists.quoted || exists.text != "<exists>") throw MalformedTextGrid("TextGrid has no tiers");
  in.expect_word("size");
  in.expect_word("=");
  const long n_tiers = in.read_count("size");
  in.expect_word("item");
  in.expect_word("[]:");
  for (long k = 1; k <= n_tiers; ++k) {
    expect_element(in, "item", k, n_tiers);
    grid.tiers.push_back(read_tier(in));
  }
  if (!in.at_end()) {
    const Token* t = in.peek();
    throw MalformedTextGrid("line " + std::to_string(t->line) + ": unexpected trailing content '" + t->text +
                            "' (tier count mismatch?)");
  }
  validate(grid);
  return grid;
}

std::string serialize_textgrid(const TextGrid& grid) {
  std::string out;
  out += "File type = \"ooTextFile\"\nObject class = \"TextGrid\"\n\n";
  out += "xmin = ";
  append_number(out, grid.x_min);
  out += " \nxmax = ";
  append_number(out, grid.x_max);
  out += " \ntiers? <exists> \nsize = " + std::to_string(grid.tiers.size()) + " \nitem []: \n";
  for (std::size_t k = 0; k < grid.tiers.size(); ++k) {
    const Tier& tier = grid.tiers[k];
    out += "    item [" + std::to_string(k + 1) + "]:\n";
    out += "        class = ";
    append_quoted(out, tier.kind == TierKind::interval ? "IntervalTier" : "TextTier");
    out += " \n        name = ";
    append_quoted(out, tier.name);
    out += " \n        xmin = ";
    append_number(out, tier.x_min);
    out += " \n        xmax = ";
    append_number(out, tier.x_max);
    out += " \n";
    if (tier.kind == TierKind::interval) {
      out += "        intervals: size = " + std::to_string(tier.intervals.size()) + " \n";
      for (std::size_t i = 0; i < tier.intervals.size(); ++i) {
        const Interval& iv = tier.intervals[i];
        out += "        intervals [" + std::to_string(i + 1) + "]:\n            xmin = ";
        append_number(out, iv.t_start);
        out += " \n            xmax = ";
        append_number(out, iv.t_end);
        out += " \n            text = ";
        append_quoted(out, iv.label);
        out += " \n";
      }
    } else {
      out += "        points: size = " + std::to_string(tier.points.size()) + " \n";
      for (std::size_t i = 0; i < tier.points.size(); ++i) {
        const Point& p = tier.points[i];
        out += "        points [" + std::to_string(i + 1) + "]:\n            number = ";
        append_number(out, p.time);
        out += " \n            mark = ";
        append_quoted(out, p.mark);
        out += " \n";
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

AliasTable AliasTable::parse(std::string_view text) {
  AliasTable table;
  std::size_t line_no = 0;
  for (std::string_view line : split_lines(text)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw AliasTableError("line " + std::to_string(line_no) + ": expected label=vowel");
    }
    const std::string_view label = trim(line.substr(0, eq));
    const std::string_view target = trim(line.substr(eq + 1));
    if (label.empty()) throw AliasTableError("line " + std::to_string(line_no) + ": empty label");
    const auto vowel = parse_vowel(target);
    if (!vowel) {
      throw AliasTableError("line " + std::to_string(line_no) + ": \"" + std::string(target) +
                            "\" is not one of the six monophthongs");
    }
    table.add(std::string(label), *vowel);
  }
  return table;
}

void AliasTable::add(std::string label, Vowel vowel) { aliases_[std::move(label)] = vowel; }

std::optional<Vowel> AliasTable::resolve(std::string_view trimmed_label) const {
  if (auto v = parse_vowel(trimmed_label)) return v;
  if (auto it = aliases_.find(trimmed_label); it != aliases_.end()) return it->second;
  return std::nullopt;
}

std::vector<VowelInterval> vowel_intervals(const TextGrid& grid, std::string_view tier_name,
                                           const AliasTable& aliases) {
  const Tier* tier = grid.find_tier(tier_name);
  if (tier == nullptr) throw UnknownTier("no tier named \"" + std::string(tier_name) + "\"");
  std::vector<VowelInterval> out;
  if (tier->kind != TierKind::interval) return out;
  for (const Interval& iv : tier->intervals) {
    if (auto v = aliases.resolve(trim(iv.label))) out.push_back({iv, *v});
  }
  return out;
}

}  // namespace dialectid
