#include "dialectid/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "dialectid/errors.hpp"
#include "dialectid/parallel.hpp"
#include "dialectid/rng.hpp"
#include "dialectid/text_util.hpp"
#include "dialectid/textgrid.hpp"

namespace dialectid {

namespace {

// Klatt-style two-pole resonator with unity gain at DC.
class Resonator {
 public:
  Resonator(double frequency, double bandwidth, double rate) {
    const double radius = std::exp(-std::numbers::pi * bandwidth / rate);
    b_ = 2.0 * radius * std::cos(2.0 * std::numbers::pi * frequency / rate);
    c_ = -radius * radius;
    a_ = 1.0 - b_ - c_;
  }

  double operator()(double x) {
    const double y = a_ * x + b_ * y1_ + c_ * y2_;
    y2_ = y1_;
    y1_ = y;
    return y;
  }

 private:
  double a_ = 0.0, b_ = 0.0, c_ = 0.0;
  double y1_ = 0.0, y2_ = 0.0;
};

constexpr std::uint64_t kSpeakerTag = 0x5350454B;  // per-speaker offset stream
constexpr double kMinDurationSeconds = 0.06;
constexpr double kMinFormantGap = 150.0;
constexpr std::array<double, 2> kUpperFormants = {3500.0, 4500.0};
constexpr std::array<double, 2> kUpperBandwidths = {250.0, 300.0};

// Upper formants are skipped when they would sit at or above Nyquist.
bool below_nyquist(double frequency, double rate) { return frequency < 0.5 * rate; }

VowelStats base_stats(Vowel v) {
  VowelStats s;
  switch (v) {
    case Vowel::schwa: s.f1 = 550; s.f2 = 1500; s.f3 = 2550; s.duration_ms = 120; break;
    case Vowel::e:     s.f1 = 450; s.f2 = 2000; s.f3 = 2650; s.duration_ms = 130; break;
    case Vowel::i:     s.f1 = 320; s.f2 = 2250; s.f3 = 2950; s.duration_ms = 115; break;
    case Vowel::o:     s.f1 = 500; s.f2 = 1000; s.f3 = 2500; s.duration_ms = 135; break;
    case Vowel::u:     s.f1 = 340; s.f2 = 900;  s.f3 = 2400; s.duration_ms = 120; break;
    case Vowel::a:     s.f1 = 720; s.f2 = 1250; s.f3 = 2600; s.duration_ms = 150; break;
  }
  return s;
}

std::string utterance_id(Dialect d, int speaker, int k) {
  char buf[64];
  std::string name(dialect_name(d));
  std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  std::snprintf(buf, sizeof buf, "%s_s%02d_u%03d", name.c_str(), speaker + 1, k + 1);
  return buf;
}

std::string speaker_label(Dialect d, int speaker) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_s%02d", std::string(dialect_name(d)).c_str(), speaker + 1);
  return buf;
}

}  // namespace

void validate(const VowelSpec& spec) {
  if (spec.sample_rate < kMinSampleRate || spec.sample_rate > kMaxSampleRate) {
    throw SpecInvalid("sample rate outside [8000, 48000]");
  }
  if (spec.source == SourceKind::pulse && !(spec.f0 >= 75.0 && spec.f0 <= 500.0)) {
    throw SpecInvalid("f0 " + std::to_string(spec.f0) + " Hz outside [75, 500]");
  }
  const auto& f = spec.formants;
  if (!(f[0] > 0.0 && f[0] < f[1] && f[1] < f[2] && f[2] < spec.sample_rate / 2.0)) {
    throw SpecInvalid("formants must satisfy 0 < F1 < F2 < F3 < rate/2");
  }
  for (double b : spec.bandwidths) {
    if (!(b > 0.0)) throw SpecInvalid("bandwidths must be positive");
  }
  if (!(spec.duration > 0.0) || std::llround(spec.duration * spec.sample_rate) < 1) {
    throw SpecInvalid("duration must cover at least one sample");
  }
  if (!(spec.amplitude_rms > 0.0 && spec.amplitude_rms < 1.0)) throw SpecInvalid("amplitude_rms must be in (0, 1)");
}

AudioSignal synthesize_vowel(const VowelSpec& spec) {
  validate(spec);
  const double rate = spec.sample_rate;
  const auto n = static_cast<std::size_t>(std::llround(spec.duration * rate));

  std::vector<double> source(n + 1, 0.0);
  if (spec.source == SourceKind::pulse) {
    // Pulses at t = k/f0, split linearly between the two nearest samples.
    const double period = rate / spec.f0;
    for (double t = 0.0; t < static_cast<double>(n); t += period) {
      const auto i = static_cast<std::size_t>(t);
      const double frac = t - static_cast<double>(i);
      source[i] += 1.0 - frac;
      source[i + 1] += frac;
    }
  } else {
    Rng rng(spec.noise_seed);
    for (std::size_t i = 0; i < n; ++i) source[i] = rng.normal();
  }
  source.resize(n);

  std::array<Resonator, 3> filters = {Resonator(spec.formants[0], spec.bandwidths[0], rate),
                                      Resonator(spec.formants[1], spec.bandwidths[1], rate),
                                      Resonator(spec.formants[2], spec.bandwidths[2], rate)};
  AudioSignal out;
  out.sample_rate = spec.sample_rate;
  out.samples.resize(n);
  double previous = 0.0;
  // Glottal tilt (-12 dB/oct above 100 Hz) and two fixed upper formants.
  // Without them LPC spends its spare poles on the bare spectral slope.
  Resonator glottal(0.0, 100.0, rate);
  Resonator f4(kUpperFormants[0], kUpperBandwidths[0], rate);
  Resonator f5(kUpperFormants[1], kUpperBandwidths[1], rate);
  for (std::size_t i = 0; i < n; ++i) {
    double y = glottal(source[i]);
    for (auto& f : filters) y = f(y);
    if (below_nyquist(kUpperFormants[0], rate)) y = f4(y);
    if (below_nyquist(kUpperFormants[1], rate)) y = f5(y);
    out.samples[i] = y - previous;
    previous = y;
  }

  double sum = 0.0;
  for (double x : out.samples) sum += x * x;
  const double rms = std::sqrt(sum / static_cast<double>(n));
  if (rms > 0.0) {
    const double gain = spec.amplitude_rms / rms;
    for (double& x : out.samples) x *= gain;
  }
  return out;
}

void validate(const DialectSpec& spec) {
  double total = 0.0;
  for (double p : spec.vowel_mix) {
    if (!(p >= 0.0)) throw SpecInvalid("vowel mix probabilities must be nonnegative");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw SpecInvalid("vowel mix must sum to 1");
}

std::vector<DialectSpec> dialect_profile(std::string_view name) {
  double f1_shift = 0.0, f2_shift = 0.0, f0_shift = 0.0, duration_shift = 0.0;
  if (name == "separated") {
    f1_shift = 3.5;
    f0_shift = 3.5;
    duration_shift = 3.5;
  } else if (name == "overlapped") {
    f1_shift = 1.0;
    f2_shift = 1.0;
    f0_shift = 1.0;
    duration_shift = 1.0;
  } else if (name != "identical") {
    throw SpecInvalid("unknown profile \"" + std::string(name) + "\" (separated, overlapped, identical)");
  }
  std::vector<DialectSpec> specs;
  for (Dialect d : kAllDialects) {
    const double k = class_index(d);
    DialectSpec spec;
    spec.dialect = d;
    spec.vowel_mix.fill(1.0 / 6.0);
    for (std::size_t v = 0; v < kAllVowels.size(); ++v) {
      VowelStats s = base_stats(kAllVowels[v]);
      s.f1 += k * f1_shift * s.f1_sd;
      s.f2 += k * f2_shift * s.f2_sd;
      s.f0 += k * f0_shift * s.f0_sd;
      s.duration_ms += k * duration_shift * s.duration_sd_ms;
      spec.vowels[v] = s;
    }
    specs.push_back(spec);
  }
  return specs;
}

Corpus generate_corpus(const std::vector<DialectSpec>& specs, const CorpusOptions& options,
                       const std::filesystem::path& out_dir) {
  if (options.speakers_per_dialect < 1 || options.vowels_per_speaker < 1) {
    throw SpecInvalid("speakers_per_dialect and vowels_per_speaker must be at least 1");
  }
  for (const DialectSpec& s : specs) validate(s);

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  struct Job {
    const DialectSpec* spec;
    int speaker;
    int index;
  };
  std::vector<Job> jobs;
  for (const DialectSpec& s : specs) {
    for (int sp = 0; sp < options.speakers_per_dialect; ++sp) {
      for (int k = 0; k < options.vowels_per_speaker; ++k) jobs.push_back({&s, sp, k});
    }
  }

  Corpus corpus;
  corpus.rows.resize(jobs.size());
  corpus.ground_truth.resize(jobs.size());

  parallel_for(jobs.size(), options.threads, [&](std::size_t j) {
    const Job& job = jobs[j];
    const Dialect dialect = job.spec->dialect;
    const auto d = static_cast<std::uint64_t>(class_index(dialect));
    const auto sp = static_cast<std::uint64_t>(job.speaker);

    // Speaker offsets: one standard-normal draw per parameter, scaled by half
    // the per-vowel SD, in the order f0, f1, f2, f3, duration.
    Rng speaker_rng = Rng::stream(options.seed, {d, sp, kSpeakerTag});
    std::array<double, 5> offset{};
    for (double& o : offset) o = 0.5 * speaker_rng.normal();

    // Utterance draws, in order: vowel, f0, f1, f2, f3, duration, level, noise seed.
    Rng rng = Rng::stream(options.seed, {d, sp, static_cast<std::uint64_t>(job.index)});
    const double u = rng.uniform();
    std::size_t v = 0;
    double cumulative = 0.0;
    for (; v + 1 < kAllVowels.size(); ++v) {
      cumulative += job.spec->vowel_mix[v];
      if (u < cumulative) break;
    }
    const VowelStats& st = job.spec->vowels[v];
    VowelSpec vs;
    vs.sample_rate = options.sample_rate;
    vs.f0 = std::clamp(rng.normal(st.f0 + offset[0] * st.f0_sd, st.f0_sd), 80.0, 450.0);
    double f1 = rng.normal(st.f1 + offset[1] * st.f1_sd, st.f1_sd);
    double f2 = rng.normal(st.f2 + offset[2] * st.f2_sd, st.f2_sd);
    double f3 = rng.normal(st.f3 + offset[3] * st.f3_sd, st.f3_sd);
    f1 = std::clamp(f1, 150.0, 1200.0);
    f2 = std::max(f2, f1 + kMinFormantGap);
    f3 = std::min(std::max(f3, f2 + kMinFormantGap), 0.45 * options.sample_rate);
    vs.formants = {f1, f2, f3};
    vs.duration = std::max(kMinDurationSeconds,
                           rng.normal(st.duration_ms + offset[4] * st.duration_sd_ms, st.duration_sd_ms) / 1000.0);
    vs.amplitude_rms = options.amplitude_rms * std::pow(10.0, rng.normal() * options.amplitude_jitter_db / 20.0);
    vs.noise_seed = rng.next_u64();

    const AudioSignal vowel = synthesize_vowel(vs);
    const auto pad = static_cast<std::size_t>(std::llround(options.pad_seconds * options.sample_rate));
    AudioSignal utterance;
    utterance.sample_rate = options.sample_rate;
    utterance.samples.assign(pad, 0.0);
    utterance.samples.insert(utterance.samples.end(), vowel.samples.begin(), vowel.samples.end());
    utterance.samples.resize(utterance.samples.size() + pad, 0.0);

    const double rate = options.sample_rate;
    const double t0 = static_cast<double>(pad) / rate;
    const double t1 = static_cast<double>(pad + vowel.samples.size()) / rate;
    const double total = static_cast<double>(utterance.samples.size()) / rate;
    TextGrid grid;
    grid.x_min = 0.0;
    grid.x_max = total;
    Tier tier;
    tier.name = "phoneme";
    tier.x_min = 0.0;
    tier.x_max = total;
    tier.intervals = {{0.0, t0, ""}, {t0, t1, std::string(vowel_symbol(kAllVowels[v]))}, {t1, total, ""}};
    grid.tiers.push_back(std::move(tier));

    const std::string id = utterance_id(dialect, job.speaker, job.index);
    write_file(out_dir / (id + ".wav"), write_wav(utterance));
    write_file(out_dir / (id + ".TextGrid"), serialize_textgrid(grid));

    ManifestRow& row = corpus.rows[j];
    row.wav_path = id + ".wav";
    row.textgrid_path = id + ".TextGrid";
    row.speaker_id = speaker_label(dialect, job.speaker);
    row.gender = (job.speaker + class_index(dialect)) % 2 == 0 ? Gender::male : Gender::female;
    row.dialect = dialect;

    GroundTruthRow& truth = corpus.ground_truth[j];
    truth.sample_id = id + "#1";
    truth.f0 = vs.f0;
    truth.f1 = f1;
    truth.f2 = f2;
    truth.f3 = f3;
    truth.duration_ms = (t1 - t0) * 1000.0;
  });

  corpus.manifest_path = out_dir / "manifest.csv";
  corpus.ground_truth_path = out_dir / "ground_truth.csv";
  write_file(corpus.manifest_path, write_manifest(corpus.rows));
  write_file(corpus.ground_truth_path, write_ground_truth_csv(corpus.ground_truth));
  return corpus;
}

std::string write_ground_truth_csv(const std::vector<GroundTruthRow>& rows) {
  std::string out = "sample_id,f0,f1,f2,f3,duration_ms\n";
  for (const GroundTruthRow& r : rows) {
    out += csv_field(r.sample_id);
    for (double v : {r.f0, r.f1, r.f2, r.f3, r.duration_ms}) out += "," + format_g(v, 10);
    out += "\n";
  }
  return out;
}

std::vector<GroundTruthRow> read_ground_truth_csv(std::string_view text) {
  std::vector<GroundTruthRow> rows;
  const auto lines = split_lines(text);
  if (lines.empty() || trim(lines[0]) != "sample_id,f0,f1,f2,f3,duration_ms") {
    throw CsvFormatError("unexpected ground-truth header");
  }
  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (trim(lines[li]).empty()) continue;
    const auto fields = split_csv_record(lines[li]);
    if (fields.size() != 6) throw CsvFormatError("line " + std::to_string(li + 1) + ": expected 6 columns");
    GroundTruthRow r;
    r.sample_id = fields[0];
    double* targets[] = {&r.f0, &r.f1, &r.f2, &r.f3, &r.duration_ms};
    for (std::size_t c = 0; c < 5; ++c) {
      if (!parse_double(fields[c + 1], *targets[c])) {
        throw CsvFormatError("line " + std::to_string(li + 1) + ": unparseable number");
      }
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace dialectid
