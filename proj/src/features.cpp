#include "dialectid/features.hpp"

#include <algorithm>
#include <cmath>

#include "dialectid/errors.hpp"
#include "dialectid/parallel.hpp"
#include "dialectid/text_util.hpp"

namespace dialectid {

namespace {

constexpr std::array<std::string_view, 5> kMetaColumns = {"sample_id", "dialect", "speaker_id", "gender", "vowel"};

std::vector<std::string> make_feature_names() {
  std::vector<std::string> names;
  for (std::string_view prefix : {"f1", "f2", "f3", "f0", "en"}) {
    for (int i = 1; i <= 6; ++i) names.push_back(std::string(prefix) + "_" + std::to_string(i));
  }
  names.emplace_back("duration_ms");
  names.emplace_back("intensity_db");
  names.emplace_back("gender");
  return names;
}

std::size_t column_of(const Dataset& d, std::string_view name) {
  const auto it = std::find(d.feature_names.begin(), d.feature_names.end(), name);
  if (it == d.feature_names.end()) throw DimensionMismatch("dataset has no column \"" + std::string(name) + "\"");
  return static_cast<std::size_t>(it - d.feature_names.begin());
}

void put_six(std::vector<double>& values, std::size_t offset, const std::array<double, 6>& six) {
  std::copy(six.begin(), six.end(), values.begin() + static_cast<std::ptrdiff_t>(offset));
}

}  // namespace

const std::vector<std::string>& feature_names() {
  static const std::vector<std::string> names = make_feature_names();
  return names;
}

std::vector<std::size_t> group_columns(FeatureGroup g) {
  std::size_t first = 0;
  std::size_t last = kNumFeatures;
  switch (g) {
    case FeatureGroup::spectral: last = 18; break;
    case FeatureGroup::prosodic: first = 18; last = 32; break;
    case FeatureGroup::all: break;
  }
  std::vector<std::size_t> columns;
  for (std::size_t c = first; c < last; ++c) columns.push_back(c);
  return columns;
}

std::string_view group_name(FeatureGroup g) {
  switch (g) {
    case FeatureGroup::spectral: return "spectral";
    case FeatureGroup::prosodic: return "prosodic";
    case FeatureGroup::all: return "all";
  }
  return "?";
}

std::optional<FeatureGroup> parse_group(std::string_view name) {
  for (FeatureGroup g : {FeatureGroup::spectral, FeatureGroup::prosodic, FeatureGroup::all}) {
    if (group_name(g) == name) return g;
  }
  return std::nullopt;
}

std::array<double, 6> sample_six(std::span<const TimedValue> track, double t_start, double t_end) {
  if (track.empty()) throw EmptyTrack("cannot sample an empty track");
  if (!(t_start < t_end)) throw OutOfRange("sample_six needs t_start < t_end");
  std::array<double, 6> out{};
  for (int i = 1; i <= 6; ++i) {
    const double t = t_start + (2.0 * i - 1.0) / 12.0 * (t_end - t_start);
    std::size_t best = 0;
    double best_distance = std::abs(track[0].time - t);
    for (std::size_t k = 1; k < track.size(); ++k) {
      const double distance = std::abs(track[k].time - t);
      if (distance < best_distance) {
        best = k;
        best_distance = distance;
      }
    }
    out[static_cast<std::size_t>(i - 1)] = track[best].value;
  }
  return out;
}

FeatureRow extract_vowel_features(const VowelSegment& segment, const AcousticConfig& config) {
  const double duration = segment.t_end - segment.t_start;
  if (!(duration >= kMinSegmentSeconds) || segment.audio.samples.empty()) {
    throw SegmentTooShort("segment of " + std::to_string(duration * 1000.0) + " ms is shorter than 10 ms");
  }
  const AudioSignal& audio = segment.audio;
  const double span_end = audio.duration();

  FeatureRow row;
  row.dialect = segment.dialect;
  row.speaker_id = segment.speaker_id;
  row.gender = segment.gender;
  row.vowel = segment.vowel;
  row.values.assign(kNumFeatures, 0.0);

  std::array<std::vector<TimedValue>, 3> formants;
  for (const FormantFrame& f : formant_track(audio, config.formant)) {
    if (!f.valid) continue;
    formants[0].push_back({f.time, f.f1});
    formants[1].push_back({f.time, f.f2});
    formants[2].push_back({f.time, f.f3});
  }
  if (formants[0].empty()) throw NoValidFormantFrames("no frame of the segment produced three formants");
  for (std::size_t k = 0; k < 3; ++k) put_six(row.values, 6 * k, sample_six(formants[k], 0.0, span_end));

  std::vector<TimedValue> voiced;
  for (const PitchFrame& p : pitch_track(audio, config.pitch)) {
    if (p.f0 > 0.0) voiced.push_back({p.time, p.f0});
  }
  if (voiced.empty()) {
    row.unvoiced = true;
  } else {
    put_six(row.values, 18, sample_six(voiced, 0.0, span_end));
  }

  std::vector<TimedValue> energy;
  for (const EnergyFrame& e : energy_track(audio, config.energy)) energy.push_back({e.time, e.energy_db});
  put_six(row.values, 24, sample_six(energy, 0.0, span_end));

  row.values[30] = duration * 1000.0;
  row.values[31] = intensity_mean(audio);
  row.values[kGenderColumn] = segment.gender == Gender::female ? 1.0 : 0.0;
  return row;
}

BuildResult build_dataset(const std::vector<ManifestRow>& manifest, const std::filesystem::path& base_dir,
                          const BuildOptions& options) {
  struct FileResult {
    std::vector<FeatureRow> rows;
    std::vector<BuildFailure> failures;
  };
  std::vector<FileResult> per_file(manifest.size());

  auto resolve = [&](const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  };

  parallel_for(manifest.size(), options.threads, [&](std::size_t i) {
    const ManifestRow& entry = manifest[i];
    FileResult& out = per_file[i];
    std::vector<VowelInterval> intervals;
    AudioSignal audio;
    try {
      audio = read_wav(read_file_bytes(resolve(entry.wav_path)));
      const TextGrid grid = parse_textgrid(read_file_bytes(resolve(entry.textgrid_path)));
      intervals = vowel_intervals(grid, options.tier_name, options.aliases);
    } catch (const Error& e) {
      out.failures.push_back({i, entry.wav_path, e.what()});
      return;
    }
    const std::string stem = std::filesystem::path(entry.wav_path).stem().string();
    for (std::size_t k = 0; k < intervals.size(); ++k) {
      const VowelInterval& vi = intervals[k];
      try {
        VowelSegment seg;
        seg.audio = slice(audio, vi.interval.t_start, vi.interval.t_end);
        seg.vowel = vi.vowel;
        seg.t_start = vi.interval.t_start;
        seg.t_end = vi.interval.t_end;
        seg.speaker_id = entry.speaker_id;
        seg.gender = entry.gender;
        seg.dialect = entry.dialect;
        FeatureRow row = extract_vowel_features(seg, options.acoustics);
        row.sample_id = stem + "#" + std::to_string(k + 1);
        out.rows.push_back(std::move(row));
      } catch (const Error& e) {
        out.failures.push_back({i, entry.wav_path, "interval " + std::to_string(k + 1) + ": " + e.what()});
      }
    }
  });

  BuildResult result;
  for (FileResult& f : per_file) {
    for (FeatureRow& r : f.rows) result.dataset.rows.push_back(std::move(r));
    for (BuildFailure& b : f.failures) result.failures.push_back(std::move(b));
  }
  return result;
}

std::string write_features_csv(const Dataset& d) {
  if (d.feature_names != feature_names()) {
    throw DimensionMismatch("the features file holds the full 33-column layout only");
  }
  std::string out;
  for (std::size_t c = 0; c < kMetaColumns.size(); ++c) {
    if (c > 0) out += ",";
    out += kMetaColumns[c];
  }
  for (std::size_t c = 0; c < kGenderColumn; ++c) out += "," + d.feature_names[c];
  out += "\n";
  for (const FeatureRow& r : d.rows) {
    out += csv_field(r.sample_id);
    out += ",";
    out += dialect_name(r.dialect);
    out += "," + csv_field(r.speaker_id) + ",";
    out += r.gender == Gender::female ? "1" : "0";
    out += ",";
    out += vowel_symbol(r.vowel);
    for (std::size_t c = 0; c < kGenderColumn; ++c) out += "," + format_g(r.values[c], 6);
    out += "\n";
  }
  return out;
}

Dataset read_features_csv(std::string_view text) {
  Dataset d;
  const auto lines = split_lines(text);
  std::size_t first = 0;
  while (first < lines.size() && trim(lines[first]).empty()) ++first;
  if (first == lines.size()) throw CsvFormatError("missing header");

  std::vector<std::string> expected(kMetaColumns.begin(), kMetaColumns.end());
  expected.insert(expected.end(), d.feature_names.begin(), d.feature_names.begin() + kGenderColumn);
  std::vector<std::string> header = split_csv_record(lines[first]);
  for (auto& h : header) h = std::string(trim(h));
  if (header != expected) throw CsvFormatError("unexpected header (expected the 37-column features layout)");

  for (std::size_t li = first + 1; li < lines.size(); ++li) {
    if (trim(lines[li]).empty()) continue;
    const std::string where = "line " + std::to_string(li + 1);
    const std::vector<std::string> fields = split_csv_record(lines[li]);
    if (fields.size() != expected.size()) {
      throw CsvFormatError(where + ": expected " + std::to_string(expected.size()) + " columns, found " +
                           std::to_string(fields.size()));
    }
    FeatureRow r;
    r.sample_id = fields[0];
    const auto dialect = parse_dialect(trim(fields[1]));
    if (!dialect) throw CsvFormatError(where + ": unknown dialect \"" + fields[1] + "\"");
    r.dialect = *dialect;
    r.speaker_id = fields[2];
    long long gender = 0;
    if (!parse_int(fields[3], gender) || (gender != 0 && gender != 1)) {
      throw CsvFormatError(where + ": gender must be 0 or 1");
    }
    r.gender = gender == 1 ? Gender::female : Gender::male;
    const auto vowel = parse_vowel(trim(fields[4]));
    if (!vowel) throw CsvFormatError(where + ": unknown vowel \"" + fields[4] + "\"");
    r.vowel = *vowel;
    r.values.assign(kNumFeatures, 0.0);
    for (std::size_t c = 0; c < kGenderColumn; ++c) {
      if (!parse_double(fields[kMetaColumns.size() + c], r.values[c])) {
        throw CsvFormatError(where + ": unparseable number \"" + fields[kMetaColumns.size() + c] + "\" in " +
                             d.feature_names[c]);
      }
    }
    r.values[kGenderColumn] = static_cast<double>(gender);
    if (!(r.values[30] > 0.0)) throw CsvFormatError(where + ": duration_ms must be positive");
    r.unvoiced = std::all_of(r.values.begin() + 18, r.values.begin() + 24, [](double v) { return v == 0.0; });
    d.rows.push_back(std::move(r));
  }
  return d;
}

Dataset select_columns(const Dataset& d, std::span<const std::string> names) {
  std::vector<std::size_t> columns;
  for (const std::string& n : names) columns.push_back(column_of(d, n));
  Dataset out;
  out.class_names = d.class_names;
  out.feature_names.assign(names.begin(), names.end());
  out.rows.reserve(d.rows.size());
  for (const FeatureRow& r : d.rows) {
    FeatureRow projected = r;
    projected.values.clear();
    for (std::size_t c : columns) projected.values.push_back(r.values[c]);
    out.rows.push_back(std::move(projected));
  }
  return out;
}

Dataset select_group(const Dataset& d, FeatureGroup g) {
  if (g == FeatureGroup::all) return d;
  std::vector<std::string> names;
  for (std::size_t c : group_columns(g)) names.push_back(feature_names()[c]);
  return select_columns(d, names);
}

VowelDistribution vowel_distribution(const Dataset& d) {
  VowelDistribution table;
  std::map<Dialect, std::size_t> totals;
  for (const FeatureRow& r : d.rows) {
    ++table[r.dialect][r.vowel].count;
    ++totals[r.dialect];
  }
  for (auto& [dialect, vowels] : table) {
    for (auto& [vowel, share] : vowels) {
      share.percent = 100.0 * static_cast<double>(share.count) / static_cast<double>(totals[dialect]);
    }
  }
  return table;
}

VowelSpace vowel_space(const Dataset& d) {
  std::array<std::size_t, 6> f1{}, f2{};
  for (int i = 0; i < 6; ++i) {
    f1[static_cast<std::size_t>(i)] = column_of(d, "f1_" + std::to_string(i + 1));
    f2[static_cast<std::size_t>(i)] = column_of(d, "f2_" + std::to_string(i + 1));
  }
  VowelSpace space;
  for (const FeatureRow& r : d.rows) {
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < 6; ++i) {
      m1 += r.values[f1[i]];
      m2 += r.values[f2[i]];
    }
    VowelSpacePoint& p = space[r.dialect][r.vowel];
    p.mean_f1 += m1 / 6.0;
    p.mean_f2 += m2 / 6.0;
    ++p.count;
  }
  for (auto& [dialect, vowels] : space) {
    for (auto& [vowel, p] : vowels) {
      p.mean_f1 /= static_cast<double>(p.count);
      p.mean_f2 /= static_cast<double>(p.count);
    }
  }
  return space;
}

}  // namespace dialectid
