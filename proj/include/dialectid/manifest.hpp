#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "dialectid/labels.hpp"

namespace dialectid {

// One corpus manifest row: header `wav_path,textgrid_path,speaker_id,gender,dialect`.
struct ManifestRow {
  std::string wav_path;
  std::string textgrid_path;
  std::string speaker_id;
  Gender gender = Gender::male;
  Dialect dialect = Dialect::imphal;
};

// Throws ManifestError on a missing column or field, or an unknown gender or
// dialect (only Imphal, Kakching and Sekmai are accepted).
std::vector<ManifestRow> parse_manifest(std::string_view text);
std::string write_manifest(const std::vector<ManifestRow>& rows);

}  // namespace dialectid
