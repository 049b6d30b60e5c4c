#include "dialectid/config.hpp"

#include <functional>
#include <map>
#include <type_traits>

#include "dialectid/errors.hpp"
#include "dialectid/text_util.hpp"

namespace dialectid {

namespace {

struct Field {
  std::function<void(PipelineConfig&, std::string_view)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

double to_double(std::string_view text) {
  double v = 0.0;
  if (!parse_double(text, v)) throw ConfigError("not a number: '" + std::string(text) + "'");
  return v;
}

long long to_int(std::string_view text) {
  long long v = 0;
  if (!parse_int(text, v)) throw ConfigError("not an integer: '" + std::string(text) + "'");
  return v;
}

bool to_bool(std::string_view text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError("expected true or false, got '" + std::string(text) + "'");
}

template <typename T>
Field integer(T PipelineConfig::*section, int T::*member) {
  return {[=](PipelineConfig& c, std::string_view v) { (c.*section).*member = static_cast<int>(to_int(v)); },
          [=](const PipelineConfig& c) { return std::to_string((c.*section).*member); }};
}

const std::map<std::string, Field, std::less<>>& fields() {
  static const std::map<std::string, Field, std::less<>> table = [] {
    std::map<std::string, Field, std::less<>> t;
    const auto formant = [](auto member) {
      return Field{[=](PipelineConfig& c, std::string_view v) {
                     using M = std::remove_reference_t<decltype(c.acoustics.formant.*member)>;
                     if constexpr (std::is_same_v<M, int>) c.acoustics.formant.*member = static_cast<int>(to_int(v));
                     else c.acoustics.formant.*member = to_double(v);
                   },
                   [=](const PipelineConfig& c) {
                     using M = std::remove_cvref_t<decltype(c.acoustics.formant.*member)>;
                     if constexpr (std::is_same_v<M, int>) return std::to_string(c.acoustics.formant.*member);
                     else return format_shortest(c.acoustics.formant.*member);
                   }};
    };
    const auto pitch = [](double PitchConfig::*member) {
      return Field{[=](PipelineConfig& c, std::string_view v) { c.acoustics.pitch.*member = to_double(v); },
                   [=](const PipelineConfig& c) { return format_shortest(c.acoustics.pitch.*member); }};
    };
    const auto energy = [](double EnergyConfig::*member) {
      return Field{[=](PipelineConfig& c, std::string_view v) { c.acoustics.energy.*member = to_double(v); },
                   [=](const PipelineConfig& c) { return format_shortest(c.acoustics.energy.*member); }};
    };

    t["formant.analysis_rate"] = formant(&FormantConfig::analysis_rate);
    t["formant.pre_emphasis_hz"] = formant(&FormantConfig::pre_emphasis_hz);
    t["formant.frame_ms"] = formant(&FormantConfig::frame_ms);
    t["formant.hop_ms"] = formant(&FormantConfig::hop_ms);
    t["formant.lpc_order"] = formant(&FormantConfig::lpc_order);
    t["formant.min_hz"] = formant(&FormantConfig::min_frequency_hz);
    t["formant.max_hz"] = formant(&FormantConfig::max_frequency_hz);
    t["formant.max_bandwidth_hz"] = formant(&FormantConfig::max_bandwidth_hz);
    t["pitch.frame_ms"] = pitch(&PitchConfig::frame_ms);
    t["pitch.hop_ms"] = pitch(&PitchConfig::hop_ms);
    t["pitch.min_f0_hz"] = pitch(&PitchConfig::min_f0_hz);
    t["pitch.max_f0_hz"] = pitch(&PitchConfig::max_f0_hz);
    t["pitch.voicing_threshold"] = pitch(&PitchConfig::voicing_threshold);
    t["pitch.silence_gate"] = pitch(&PitchConfig::silence_gate);
    t["pitch.clip_level"] = pitch(&PitchConfig::clip_level);
    t["pitch.octave_ratio"] = pitch(&PitchConfig::octave_ratio);
    t["energy.frame_ms"] = energy(&EnergyConfig::frame_ms);
    t["energy.hop_ms"] = energy(&EnergyConfig::hop_ms);

    t["forest.n_estimators"] = integer(&PipelineConfig::forest, &ForestParams::n_estimators);
    t["forest.max_features"] = integer(&PipelineConfig::forest, &ForestParams::max_features);
    t["forest.min_samples_split"] = integer(&PipelineConfig::forest, &ForestParams::min_samples_split);
    t["forest.max_depth"] = {[](PipelineConfig& c, std::string_view v) {
                               if (v == "none") c.forest.max_depth.reset();
                               else c.forest.max_depth = static_cast<int>(to_int(v));
                             },
                             [](const PipelineConfig& c) {
                               return c.forest.max_depth ? std::to_string(*c.forest.max_depth) : std::string("none");
                             }};
    t["forest.bootstrap"] = {[](PipelineConfig& c, std::string_view v) { c.forest.bootstrap = to_bool(v); },
                             [](const PipelineConfig& c) { return std::string(c.forest.bootstrap ? "true" : "false"); }};
    t["forest.seed"] = {[](PipelineConfig& c, std::string_view v) {
                          const long long s = to_int(v);
                          if (s < 0) throw ConfigError("negative seed");
                          c.forest.seed = static_cast<std::uint64_t>(s);
                        },
                        [](const PipelineConfig& c) { return std::to_string(c.forest.seed); }};
    t["split.seed"] = {[](PipelineConfig& c, std::string_view v) {
                         const long long s = to_int(v);
                         if (s < 0) throw ConfigError("negative seed");
                         c.split_seed = static_cast<std::uint64_t>(s);
                       },
                       [](const PipelineConfig& c) { return std::to_string(c.split_seed); }};
    t["split.test_fraction"] = {[](PipelineConfig& c, std::string_view v) { c.test_fraction = to_double(v); },
                                [](const PipelineConfig& c) { return format_shortest(c.test_fraction); }};
    t["cv.folds"] = {[](PipelineConfig& c, std::string_view v) { c.cv_folds = static_cast<int>(to_int(v)); },
                     [](const PipelineConfig& c) { return std::to_string(c.cv_folds); }};
    t["tier"] = {[](PipelineConfig& c, std::string_view v) { c.tier_name = std::string(v); },
                 [](const PipelineConfig& c) { return c.tier_name; }};
    t["alias_table"] = {[](PipelineConfig& c, std::string_view v) { c.alias_table = std::string(v); },
                        [](const PipelineConfig& c) { return c.alias_table.string(); }};
    t["threads"] = {[](PipelineConfig& c, std::string_view v) {
                      const long long n = to_int(v);
                      if (n < 0) throw ConfigError("negative thread count");
                      c.threads = static_cast<unsigned>(n);
                    },
                    [](const PipelineConfig& c) { return std::to_string(c.threads); }};
    return t;
  }();
  return table;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

}  // namespace

void apply_config_value(PipelineConfig& c, std::string_view key, std::string_view value) {
  const auto it = fields().find(key);
  if (it == fields().end()) throw ConfigError("unknown key '" + std::string(key) + "'");
  try {
    it->second.set(c, value);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(key) + ": " + e.detail());
  }
}

PipelineConfig parse_config(std::string_view text, PipelineConfig base) {
  std::size_t line_no = 0;
  for (std::string_view line : split_lines(text)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    try {
      apply_config_value(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.detail());
    }
  }
  validate(base);
  return base;
}

void validate(const PipelineConfig& c) {
  const auto& f = c.acoustics.formant;
  require(f.analysis_rate >= 2000, "formant.analysis_rate must be at least 2000");
  require(f.pre_emphasis_hz > 0.0, "formant.pre_emphasis_hz must be positive");
  require(f.frame_ms > 0.0 && f.hop_ms > 0.0, "formant frame and hop must be positive");
  require(f.lpc_order >= 2, "formant.lpc_order must be at least 2");
  require(f.min_frequency_hz >= 0.0 && f.min_frequency_hz < f.max_frequency_hz,
          "formant.min_hz must be below formant.max_hz");
  require(f.max_frequency_hz <= 0.5 * f.analysis_rate, "formant.max_hz must not exceed half the analysis rate");
  require(f.max_bandwidth_hz > 0.0, "formant.max_bandwidth_hz must be positive");

  const auto& p = c.acoustics.pitch;
  require(p.frame_ms > 0.0 && p.hop_ms > 0.0, "pitch frame and hop must be positive");
  require(p.min_f0_hz > 0.0 && p.min_f0_hz < p.max_f0_hz, "pitch.min_f0_hz must be positive and below pitch.max_f0_hz");
  require(p.voicing_threshold >= 0.0 && p.voicing_threshold <= 1.0, "pitch.voicing_threshold must lie in [0, 1]");
  require(p.silence_gate >= 0.0 && p.silence_gate <= 1.0, "pitch.silence_gate must lie in [0, 1]");
  require(p.clip_level >= 0.0 && p.clip_level < 1.0, "pitch.clip_level must lie in [0, 1)");
  require(p.octave_ratio > 0.0 && p.octave_ratio <= 1.0, "pitch.octave_ratio must lie in (0, 1]");

  const auto& e = c.acoustics.energy;
  require(e.frame_ms > 0.0 && e.hop_ms > 0.0, "energy frame and hop must be positive");

  try {
    validate(c.forest);
  } catch (const ConfigError& err) {
    throw ConfigError(std::string("forest.") + err.detail());
  }
  require(c.test_fraction > 0.0 && c.test_fraction < 1.0, "split.test_fraction must lie in (0, 1)");
  require(c.cv_folds >= 2, "cv.folds must be at least 2");
  require(!c.tier_name.empty(), "tier must not be empty");
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [key, field] : fields()) keys.push_back(key);
  return keys;
}

std::string format_config(const PipelineConfig& c) {
  std::string out;
  for (const auto& [key, field] : fields()) out += key + " = " + field.get(c) + "\n";
  return out;
}

}  // namespace dialectid
