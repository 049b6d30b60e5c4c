#include <string>

#include "doctest.h"
#include "dialectid/config.hpp"
#include "dialectid/errors.hpp"

using namespace dialectid;

TEST_SUITE("config") {
  TEST_CASE("defaults match the module defaults") {
    const PipelineConfig c;
    CHECK_NOTHROW(validate(c));
    CHECK(c.acoustics.formant.analysis_rate == 10000);
    CHECK(c.acoustics.formant.lpc_order == 12);
    CHECK(c.acoustics.pitch.voicing_threshold == 0.45);
    CHECK(c.acoustics.pitch.silence_gate == 0.01);
    CHECK(c.forest.n_estimators == 400);
    CHECK(c.forest.max_features == 12);
    CHECK(c.split_seed == 42);
    CHECK(c.test_fraction == 0.2);
    CHECK(c.tier_name == "phoneme");
  }

  TEST_CASE("parse applies assignments and ignores comments") {
    const auto c = parse_config(
        "# thresholds\n"
        "pitch.voicing_threshold = 0.5   # stricter\n"
        "\n"
        "formant.lpc_order=14\n"
        "forest.max_depth = none\n"
        "forest.bootstrap = false\n"
        "split.seed = 7\n"
        "tier = words\n");
    CHECK(c.acoustics.pitch.voicing_threshold == 0.5);
    CHECK(c.acoustics.formant.lpc_order == 14);
    CHECK(!c.forest.max_depth);
    CHECK(!c.forest.bootstrap);
    CHECK(c.split_seed == 7);
    CHECK(c.tier_name == "words");
    CHECK(parse_config("forest.max_depth = 5\n").forest.max_depth == 5);
  }

  TEST_CASE("errors carry the line number") {
    const auto message = [](const std::string& text) {
      try {
        parse_config(text);
      } catch (const ConfigError& e) {
        return std::string(e.what());
      }
      return std::string("accepted");
    };
    CHECK(message("\n\nnot.a.key = 1\n").find("line 3") != std::string::npos);
    CHECK(message("pitch.min_f0_hz = fast\n").find("not a number") != std::string::npos);
    CHECK(message("formant.lpc_order = 12.5\n").find("line 1") != std::string::npos);
    CHECK(message("forest.bootstrap = maybe\n") != "accepted");
    CHECK(message("just words\n").find("key = value") != std::string::npos);
    CHECK(message("forest.seed = -3\n") != "accepted");
    CHECK(message("pitch.min_f0_hz = 600\n").find("min_f0") != std::string::npos);
    CHECK(message("split.test_fraction = 1\n") != "accepted");
    CHECK(message("forest.n_estimators = 0\n").find("forest.") != std::string::npos);
    CHECK(message("formant.max_hz = 6000\n") != "accepted");
    CHECK(message("cv.folds = 1\n") != "accepted");
    CHECK(message("bad = 1\n") == "ConfigError: line 1: unknown key 'bad'");
  }

  TEST_CASE("format_config round trips") {
    PipelineConfig c;
    c.acoustics.pitch.clip_level = 0.3;
    c.forest.max_depth = 9;
    c.test_fraction = 0.25;
    c.alias_table = "aliases.txt";
    const std::string text = format_config(c);
    const auto back = parse_config(text);
    CHECK(format_config(back) == text);
    CHECK(back.forest == c.forest);
    CHECK(back.alias_table == c.alias_table);
    for (const auto& key : config_keys()) CHECK(text.find(key + " = ") != std::string::npos);
  }
}
