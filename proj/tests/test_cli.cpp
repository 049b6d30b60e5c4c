#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "json.hpp"

#include "doctest.h"
#include "dialectid/cli.hpp"
#include "dialectid/features.hpp"
#include "dialectid/forest.hpp"
#include "dialectid/manifest.hpp"
#include "dialectid/text_util.hpp"
#include "support.hpp"

using namespace dialectid;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "dialectid");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::size_t count_lines(const std::string& text) { return split_lines(text).size(); }

// A small corpus plus its features, built once through the CLI.
struct Workspace {
  testing::TempDir dir{"cli"};
  std::string corpus, features;

  Workspace() {
    corpus = (dir / "corpus").string();
    features = (dir / "features.csv").string();
    const auto synth = run({"synth-corpus", "--profile", "separated", "--speakers", "5", "--vowels-per-speaker", "4",
                            "--seed", "7", "--out", corpus});
    REQUIRE(synth.code == 0);
    const auto extract = run({"extract", "--manifest", corpus + "/manifest.csv", "--out", features});
    REQUIRE(extract.code == 0);
  }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

Workspace& workspace() {
  static Workspace w;
  return w;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("usage errors exit 2") {
    CHECK(run({}).code == 2);
    CHECK(run({"dance"}).code == 2);
    const auto missing_out = run({"synth-corpus", "--profile", "separated"});
    CHECK(missing_out.code == 2);
    CHECK(missing_out.err.find("--out") != std::string::npos);
    CHECK(run({"synth-corpus", "--profile", "blended", "--out", "x"}).code == 2);
    CHECK(run({"train", "--features", "f.csv", "--out", "m.json", "--n-estimators", "0"}).code == 2);
    CHECK(run({"train", "--features", "f.csv", "--out", "m.json", "--config", "/nonexistent/cfg"}).code == 2);
  }

  TEST_CASE("help exits 0") {
    const auto r = run({"--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("synth-corpus") != std::string::npos);
    CHECK(run({"train", "--help"}).code == 0);
  }

  TEST_CASE("bad config values are usage errors") {
    testing::TempDir dir("cli_cfg");
    write_file(dir / "bad.cfg", std::string("pitch.voicing_threshold = 2\n"));
    const auto r = run({"synth-corpus", "--config", (dir / "bad.cfg").string(), "--out", (dir / "c").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("voicing_threshold") != std::string::npos);
  }

  TEST_CASE("synth-corpus") {
    testing::TempDir dir("cli_synth");
    const std::vector<std::string> args = {"synth-corpus", "--profile", "overlapped", "--speakers", "5",
                                           "--vowels-per-speaker", "4", "--seed", "7", "--threads", "2"};
    auto a = args, b = args;
    a.insert(a.end(), {"--out", (dir / "a").string()});
    b.insert(b.end(), {"--out", (dir / "b").string()});
    const auto ra = run(a);
    REQUIRE(ra.code == 0);
    CHECK(ra.out.find("wrote 60 utterances") != std::string::npos);
    CHECK(ra.out.find("manifest.csv") != std::string::npos);
    REQUIRE(run(b).code == 0);
    const std::string manifest = read_file_text(dir / "a" / "manifest.csv");
    CHECK(manifest == read_file_text(dir / "b" / "manifest.csv"));
    CHECK(parse_manifest(manifest).size() == 60);
    CHECK(read_file_text(dir / "a" / "ground_truth.csv") == read_file_text(dir / "b" / "ground_truth.csv"));
  }

  TEST_CASE("extract") {
    auto& w = workspace();
    const auto d = read_features_csv(read_file_text(w.features));
    CHECK(d.rows.size() == 60);

    // One unreadable WAV: 59 rows, one reported failure, still success.
    auto rows = parse_manifest(read_file_text(w.corpus + "/manifest.csv"));
    rows[0].wav_path = "missing.wav";
    const std::string broken = w.path("broken_manifest.csv");
    write_file(w.corpus + "/broken_manifest.csv", write_manifest(rows));
    const auto r = run({"extract", "--manifest", w.corpus + "/broken_manifest.csv", "--out", w.path("partial.csv")});
    CHECK(r.code == 0);
    CHECK(r.out.find("rows extracted: 59") != std::string::npos);
    CHECK(r.out.find("failures: 1") != std::string::npos);
    CHECK(r.err.find("missing.wav") != std::string::npos);
    CHECK(read_features_csv(read_file_text(w.path("partial.csv"))).rows.size() == 59);

    write_file(w.path("empty_manifest.csv"), std::string("wav_path,textgrid_path,speaker_id,gender,dialect\n"));
    CHECK(run({"extract", "--manifest", w.path("empty_manifest.csv"), "--out", w.path("none.csv")}).code == 1);
    CHECK(run({"extract", "--manifest", w.path("nope.csv"), "--out", w.path("none.csv")}).code == 1);
  }

  TEST_CASE("train, evaluate and importance") {
    auto& w = workspace();
    const std::string model = w.path("model.json");
    const auto t = run({"train", "--features", w.features, "--group", "all", "--n-estimators", "400", "--max-features",
                        "12", "--seed", "3", "--out", model});
    REQUIRE(t.code == 0);
    const auto j = nlohmann::json::parse(read_file_text(model));
    CHECK(j["params"]["n_estimators"] == 400);
    CHECK(j["params"]["max_features"] == 12);
    CHECK(j["feature_names"].size() == 33);
    CHECK(j["trees"].size() == 400);

    const auto split = nlohmann::json::parse(read_file_text(w.path("model.split.json")));
    CHECK(split["test"].size() == 12);  // 4 per class of 20
    CHECK(split["train"].size() == 48);

    SUBCASE("same seed gives the same file") {
      REQUIRE(run({"train", "--features", w.features, "--n-estimators", "400", "--seed", "3", "--threads", "3", "--out",
                   w.path("again.json")})
                  .code == 0);
      CHECK(read_file_text(w.path("again.json")) == read_file_text(model));
    }

    SUBCASE("spectral group") {
      REQUIRE(run({"train", "--features", w.features, "--group", "spectral", "--n-estimators", "20", "--out",
                   w.path("spectral.json")})
                  .code == 0);
      const auto m = load_model(read_file_text(w.path("spectral.json")));
      CHECK(m.n_features() == 18);
      CHECK(run({"evaluate", "--model", w.path("spectral.json"), "--features", w.features}).code == 0);
    }

    SUBCASE("evaluate") {
      const auto e = run({"evaluate", "--model", model, "--features", w.features, "--out", w.path("cm.csv")});
      REQUIRE(e.code == 0);
      CHECK(e.out.find("accuracy: ") != std::string::npos);
      CHECK(e.out.find("per-class recall") != std::string::npos);
      const std::string csv = read_file_text(w.path("cm.csv"));
      CHECK(csv.rfind("true_class,pred_Imphal,pred_Kakching,pred_Sekmai\n", 0) == 0);
      CHECK(count_lines(csv) == 4);
      CHECK(read_file_text(w.path("cm.counts.csv")).find("Imphal,") != std::string::npos);

      // A split record for a different number of rows is rejected.
      auto bad = split;
      bad["n_rows"] = 61;
      write_file(w.path("bad.split.json"), bad.dump());
      CHECK(run({"evaluate", "--model", model, "--features", w.features, "--split", w.path("bad.split.json")}).code == 1);
    }

    SUBCASE("importance") {
      const auto r = run({"importance", "--model", model, "--out", w.path("imp.csv")});
      REQUIRE(r.code == 0);
      CHECK(r.out.find("sum: 1.000000") != std::string::npos);
      CHECK(count_lines(read_file_text(w.path("imp.csv"))) == 34);
      write_file(w.path("corrupt.json"), read_file_text(model).substr(0, 100));
      const auto c = run({"importance", "--model", w.path("corrupt.json")});
      CHECK(c.code == 1);
      CHECK(c.err.find("ModelFormatError") != std::string::npos);
    }
  }

  TEST_CASE("importance ranks the deciding feature first") {
    testing::TempDir dir("cli_imp");
    Dataset d;
    Rng rng(2);
    for (int r = 0; r < 90; ++r) {
      FeatureRow row;
      row.dialect = kAllDialects[r % 3];
      row.speaker_id = "s" + std::to_string(r % 9);
      row.sample_id = "u" + std::to_string(r) + "#1";
      row.values.assign(33, 0.0);
      for (double& v : row.values) v = 100.0 + rng.normal();
      row.values[0] = 300.0 + 200.0 * (r % 3) + rng.uniform();
      row.values[30] = 100.0 + rng.uniform();
      row.values[32] = 0.0;
      d.rows.push_back(row);
    }
    write_file(dir / "f.csv", write_features_csv(d));
    REQUIRE(run({"train", "--features", (dir / "f.csv").string(), "--n-estimators", "50", "--out",
                 (dir / "m.json").string()})
                .code == 0);
    const auto r = run({"importance", "--model", (dir / "m.json").string()});
    REQUIRE(r.code == 0);
    CHECK(std::string(split_lines(r.out)[1]).rfind("1,f1_1,", 0) == 0);
  }

  TEST_CASE("grid-search") {
    auto& w = workspace();
    const auto full = run({"grid-search", "--features", w.features, "--folds", "3"});
    REQUIRE(full.code == 0);
    const auto lines = split_lines(full.out);
    std::size_t table_rows = 0;
    for (auto line : lines)
      if (!line.empty() && std::isdigit(static_cast<unsigned char>(line[0]))) ++table_rows;
    CHECK(table_rows == 9);
    CHECK(full.out.find("n_estimators,max_features,fold_1,fold_2,fold_3,mean") != std::string::npos);
    CHECK(run({"grid-search", "--features", w.features, "--folds", "3"}).out == full.out);

    const auto single = run({"grid-search", "--features", w.features, "--n-estimators-grid", "30", "--max-features-grid",
                             "5", "--folds", "2", "--out", w.path("best.json")});
    REQUIRE(single.code == 0);
    CHECK(single.out.find("best: n_estimators 30, max_features 5") != std::string::npos);
    CHECK(load_model(read_file_text(w.path("best.json"))).trees.size() == 30);

    CHECK(run({"grid-search", "--features", w.features, "--folds", "40"}).code == 1);
  }

  TEST_CASE("report") {
    auto& w = workspace();
    const std::string out_dir = w.path("report");
    const auto r = run({"report", "--features", w.features, "--out", out_dir});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("Imphal,20,5") != std::string::npos);
    const std::string space = read_file_text(out_dir + "/vowel_space.csv");
    CHECK(space.rfind("dialect,vowel,mean_f2,mean_f1\n", 0) == 0);
    CHECK(count_lines(space) - 1 <= 18);
    CHECK(read_file_text(out_dir + "/vowel_distribution.csv").rfind("dialect,vowel,count,percent\n", 0) == 0);

    write_file(w.path("empty.csv"), write_features_csv(Dataset{}));
    CHECK(run({"report", "--features", w.path("empty.csv")}).code == 1);
  }

  TEST_CASE("the installed binary maps exit codes") {
    const auto status = [](const std::string& args) {
      const int s = std::system((std::string(DIALECTID_CLI_PATH) + " " + args + " >/dev/null 2>&1").c_str());
      return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
    };
    CHECK(status("--help") == 0);
    CHECK(status("synth-corpus") == 2);
    CHECK(status("importance --model /nonexistent/model.json") == 1);
  }
}
