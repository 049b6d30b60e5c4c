#include "dialectid/manifest.hpp"

#include <array>

#include "dialectid/errors.hpp"
#include "dialectid/text_util.hpp"

namespace dialectid {

namespace {

constexpr std::array<std::string_view, 5> kColumns = {"wav_path", "textgrid_path", "speaker_id", "gender",
                                                      "dialect"};

}  // namespace

std::vector<ManifestRow> parse_manifest(std::string_view text) {
  std::vector<ManifestRow> rows;
  const auto lines = split_lines(text);
  std::size_t first = 0;
  while (first < lines.size() && trim(lines[first]).empty()) ++first;
  if (first == lines.size()) return rows;

  std::array<std::size_t, 5> column{};
  std::vector<std::string> header;
  try {
    header = split_csv_record(lines[first]);
  } catch (const Error& e) {
    throw ManifestError(std::string("header: ") + e.what());
  }
  for (std::size_t c = 0; c < kColumns.size(); ++c) {
    bool found = false;
    for (std::size_t h = 0; h < header.size(); ++h) {
      if (trim(header[h]) == kColumns[c]) {
        column[c] = h;
        found = true;
      }
    }
    if (!found) throw ManifestError("missing column \"" + std::string(kColumns[c]) + "\"");
  }

  for (std::size_t li = first + 1; li < lines.size(); ++li) {
    if (trim(lines[li]).empty()) continue;
    const std::string where = "line " + std::to_string(li + 1);
    std::vector<std::string> fields;
    try {
      fields = split_csv_record(lines[li]);
    } catch (const Error& e) {
      throw ManifestError(where + ": " + e.what());
    }
    if (fields.size() != header.size()) {
      throw ManifestError(where + ": expected " + std::to_string(header.size()) + " fields, found " +
                          std::to_string(fields.size()));
    }
    auto field = [&](std::size_t c) { return std::string(trim(fields[column[c]])); };
    ManifestRow row;
    row.wav_path = field(0);
    row.textgrid_path = field(1);
    row.speaker_id = field(2);
    for (std::size_t c = 0; c < kColumns.size(); ++c) {
      if (field(c).empty()) throw ManifestError(where + ": empty " + std::string(kColumns[c]));
    }
    const auto gender = parse_gender(field(3));
    if (!gender) throw ManifestError(where + ": unknown gender \"" + field(3) + "\"");
    row.gender = *gender;
    const auto dialect = parse_dialect(field(4));
    if (!dialect) {
      throw ManifestError(where + ": unknown dialect \"" + field(4) + "\" (expected Imphal, Kakching or Sekmai)");
    }
    row.dialect = *dialect;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string write_manifest(const std::vector<ManifestRow>& rows) {
  std::string out = "wav_path,textgrid_path,speaker_id,gender,dialect\n";
  for (const ManifestRow& r : rows) {
    out += csv_field(r.wav_path) + "," + csv_field(r.textgrid_path) + "," + csv_field(r.speaker_id) + "," +
           std::string(gender_name(r.gender)) + "," + std::string(dialect_name(r.dialect)) + "\n";
  }
  return out;
}

}  // namespace dialectid
