#pragma once

// Source-filter vowel synthesizer and seeded synthetic-corpus generator.
// The corpora stand in for annotated field recordings and give every
// acoustic and classification check a known ground truth.

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "dialectid/audio.hpp"
#include "dialectid/labels.hpp"
#include "dialectid/manifest.hpp"

namespace dialectid {

enum class SourceKind { pulse, noise };

struct VowelSpec {
  double f0 = 120.0;
  std::array<double, 3> formants{700.0, 1220.0, 2600.0};
  std::array<double, 3> bandwidths{60.0, 90.0, 120.0};
  double duration = 0.3;  // seconds
  double amplitude_rms = 0.1;
  int sample_rate = 16000;
  SourceKind source = SourceKind::pulse;
  std::uint64_t noise_seed = 0;  // noise source only
};

// Throws SpecInvalid.
void validate(const VowelSpec& spec);

// Impulse train at f0 (or white noise) through a glottal low-pass, the three
// requested DC-normalized two-pole resonators plus fixed ones at 3500 and
// 4500 Hz, then first-difference radiation, scaled to the requested RMS.
// Throws SpecInvalid.
AudioSignal synthesize_vowel(const VowelSpec& spec);

// Mean and standard deviation of the drawn parameters for one vowel.
struct VowelStats {
  double f0 = 125.0, f1 = 500.0, f2 = 1500.0, f3 = 2500.0, duration_ms = 130.0;
  double f0_sd = 8.0, f1_sd = 25.0, f2_sd = 50.0, f3_sd = 70.0, duration_sd_ms = 15.0;
};

struct DialectSpec {
  Dialect dialect = Dialect::imphal;
  std::array<VowelStats, 6> vowels;     // indexed like kAllVowels
  std::array<double, 6> vowel_mix{};    // probabilities, sum to 1
};

// Throws SpecInvalid when the vowel mix does not sum to 1.
void validate(const DialectSpec& spec);

// Preset corpora of known difficulty:
//   separated  - dialect means 3.5 SD apart in F1, F0 and duration
//   overlapped - 1 SD apart in F1, F2, F0 and duration
//   identical  - all three dialects share one distribution
// Throws SpecInvalid for an unknown name.
std::vector<DialectSpec> dialect_profile(std::string_view name);

struct CorpusOptions {
  int speakers_per_dialect = 15;
  int vowels_per_speaker = 24;
  std::uint64_t seed = 0;
  int sample_rate = 16000;
  double pad_seconds = 0.1;          // silence either side of the vowel
  double amplitude_rms = 0.1;
  double amplitude_jitter_db = 2.0;  // per-utterance level variation (SD)
  unsigned threads = 0;              // 0 = hardware concurrency
};

struct GroundTruthRow {
  std::string sample_id;
  double f0 = 0.0, f1 = 0.0, f2 = 0.0, f3 = 0.0, duration_ms = 0.0;
};

struct Corpus {
  std::filesystem::path manifest_path;
  std::filesystem::path ground_truth_path;
  std::vector<ManifestRow> rows;
  std::vector<GroundTruthRow> ground_truth;
};

// One utterance per (dialect, speaker, k): `<id>.wav` + `<id>.TextGrid` with a
// "phoneme" tier of three intervals ("", vowel, ""), plus manifest.csv and
// ground_truth.csv. Output bytes depend only on (specs, options minus
// threads). Throws IoError or SpecInvalid.
Corpus generate_corpus(const std::vector<DialectSpec>& specs, const CorpusOptions& options,
                       const std::filesystem::path& out_dir);

std::string write_ground_truth_csv(const std::vector<GroundTruthRow>& rows);
std::vector<GroundTruthRow> read_ground_truth_csv(std::string_view text);

}  // namespace dialectid
