#pragma once

// The 33-value vowel feature vector, feature datasets and their CSV form.
//
// Column layout (index: content):
//    0-5   F1 at six points (Hz)      18-23  F0 at six points (Hz)
//    6-11  F2 at six points (Hz)      24-29  energy at six points (dB)
//   12-17  F3 at six points (Hz)      30     duration (ms)
//                                     31     intensity (dB)
//                                     32     gender (0 male, 1 female)

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dialectid/acoustics.hpp"
#include "dialectid/audio.hpp"
#include "dialectid/labels.hpp"
#include "dialectid/manifest.hpp"
#include "dialectid/textgrid.hpp"

namespace dialectid {

inline constexpr std::size_t kNumFeatures = 33;
inline constexpr std::size_t kGenderColumn = 32;
inline constexpr double kMinSegmentSeconds = 0.010;

// Names of the 33 columns: f1_1..f1_6, f2_*, f3_*, f0_*, en_*, duration_ms,
// intensity_db, gender.
const std::vector<std::string>& feature_names();

enum class FeatureGroup { spectral, prosodic, all };

// spectral: 0-17 (18 columns); prosodic: 18-31 (14); all: 0-32 (33).
std::vector<std::size_t> group_columns(FeatureGroup g);
std::string_view group_name(FeatureGroup g);
std::optional<FeatureGroup> parse_group(std::string_view name);

struct VowelSegment {
  AudioSignal audio;  // the sliced vowel
  Vowel vowel = Vowel::a;
  double t_start = 0.0;
  double t_end = 0.0;
  std::string speaker_id;
  Gender gender = Gender::male;
  Dialect dialect = Dialect::imphal;
};

struct FeatureRow {
  std::string sample_id;
  Dialect dialect = Dialect::imphal;
  std::string speaker_id;
  Gender gender = Gender::male;
  Vowel vowel = Vowel::a;
  std::vector<double> values;  // width = Dataset::feature_names.size()
  bool unvoiced = false;       // no voiced pitch frame; F0 columns are zero

  friend bool operator==(const FeatureRow&, const FeatureRow&) = default;
};

struct Dataset {
  std::vector<FeatureRow> rows;
  std::vector<std::string> feature_names = dialectid::feature_names();
  std::array<Dialect, 3> class_names = kAllDialects;

  std::size_t width() const { return feature_names.size(); }
};

// A time-stamped value sequence (frame centres in seconds).
struct TimedValue {
  double time = 0.0;
  double value = 0.0;
};

// Values at t_i = t_start + (2i - 1)/12 (t_end - t_start), i = 1..6, each
// taken from the frame whose centre is nearest (earlier frame on ties).
// Throws EmptyTrack or OutOfRange (t_start >= t_end).
std::array<double, 6> sample_six(std::span<const TimedValue> track, double t_start, double t_end);

// Throws SegmentTooShort or NoValidFormantFrames.
FeatureRow extract_vowel_features(const VowelSegment& segment, const AcousticConfig& config = {});

struct BuildFailure {
  std::size_t manifest_row = 0;  // 0-based data row
  std::string path;
  std::string message;
};

struct BuildResult {
  Dataset dataset;
  std::vector<BuildFailure> failures;
};

struct BuildOptions {
  std::string tier_name = "phoneme";
  AliasTable aliases;
  AcousticConfig acoustics;
  unsigned threads = 0;
};

// One row per vowel interval per manifest file, in manifest order. Relative
// paths resolve against base_dir. Per-file and per-vowel failures are
// collected, never thrown. Sample ids are `<wav stem>#<k>` (k from 1).
BuildResult build_dataset(const std::vector<ManifestRow>& manifest, const std::filesystem::path& base_dir,
                          const BuildOptions& options);

// Header `sample_id,dialect,speaker_id,gender,vowel,<feature columns>`;
// gender is written 0/1 and the gender feature column is not repeated.
// Values use 6 significant digits.
std::string write_features_csv(const Dataset& d);
// Throws CsvFormatError.
Dataset read_features_csv(std::string_view text);

// Column projection; labels and metadata are unchanged.
Dataset select_group(const Dataset& d, FeatureGroup g);
// Projection by column name. Throws DimensionMismatch on an unknown name.
Dataset select_columns(const Dataset& d, std::span<const std::string> names);

struct VowelShare {
  std::size_t count = 0;
  double percent = 0.0;
};
// dialect -> vowel -> share; percentages sum to 100 per dialect.
using VowelDistribution = std::map<Dialect, std::map<Vowel, VowelShare>>;
VowelDistribution vowel_distribution(const Dataset& d);

struct VowelSpacePoint {
  double mean_f2 = 0.0;
  double mean_f1 = 0.0;
  std::size_t count = 0;
};
// Mean over rows of mean(f1_1..f1_6) and mean(f2_1..f2_6). Requires the
// F1/F2 columns to be present (throws DimensionMismatch otherwise).
using VowelSpace = std::map<Dialect, std::map<Vowel, VowelSpacePoint>>;
VowelSpace vowel_space(const Dataset& d);

}  // namespace dialectid
