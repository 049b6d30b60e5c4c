#include "dialectid/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dialectid/config.hpp"
#include "dialectid/errors.hpp"
#include "dialectid/eval.hpp"
#include "dialectid/features.hpp"
#include "dialectid/forest.hpp"
#include "dialectid/manifest.hpp"
#include "dialectid/synth.hpp"
#include "dialectid/text_util.hpp"

namespace dialectid {

namespace fs = std::filesystem;

namespace {

// Options every subcommand accepts.
struct Common {
  std::string config_path;
  std::string out;
  long long seed = 0;
  unsigned threads = 0;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* threads_opt = nullptr;
};

void add_common(CLI::App* cmd, Common& c, bool out_required, const std::string& out_help) {
  cmd->add_option("--config", c.config_path, "key = value settings file")->check(CLI::ExistingFile);
  auto* out = cmd->add_option("--out", c.out, out_help);
  if (out_required) out->required();
  c.seed_opt = cmd->add_option("--seed", c.seed, "random seed")->check(CLI::NonNegativeNumber);
  c.threads_opt = cmd->add_option("--threads", c.threads, "worker threads (0 = all cores)");
}

PipelineConfig load_config(const Common& c) {
  PipelineConfig cfg;
  if (!c.config_path.empty()) cfg = parse_config(read_file_text(c.config_path));
  if (*c.threads_opt) cfg.threads = c.threads;
  return cfg;
}

fs::path split_path_for(const fs::path& model_path) {
  return model_path.parent_path() / (model_path.stem().string() + ".split.json");
}

std::string split_record_json(const SplitResult& s, std::size_t n_rows, std::uint64_t seed, double fraction) {
  nlohmann::ordered_json j;
  j["format"] = "dialectid-split";
  j["version"] = 1;
  j["seed"] = seed;
  j["test_fraction"] = fraction;
  j["n_rows"] = n_rows;
  j["train"] = s.train_indices;
  j["test"] = s.test_indices;
  return j.dump() + "\n";
}

SplitResult read_split_record(const fs::path& path, std::size_t n_rows) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file_text(path));
  } catch (const nlohmann::json::exception& e) {
    throw IoError("split record " + path.string() + " is not valid JSON: " + e.what());
  }
  try {
    if (j.at("format") != "dialectid-split" || j.at("version") != 1)
      throw IoError("split record " + path.string() + " has an unknown format or version");
    if (j.at("n_rows").get<std::size_t>() != n_rows)
      throw DimensionMismatch("split record covers " + j.at("n_rows").dump() + " rows but the features file has " +
                              std::to_string(n_rows));
    SplitResult s;
    s.train_indices = j.at("train").get<std::vector<std::size_t>>();
    s.test_indices = j.at("test").get<std::vector<std::size_t>>();
    for (auto i : s.test_indices)
      if (i >= n_rows) throw DimensionMismatch("split record index out of range");
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("split record " + path.string() + " is malformed: " + e.what());
  }
}

Dataset load_features(const std::string& path) {
  return read_features_csv(read_file_text(path));
}

std::vector<int> parse_int_list(const std::string& text, const char* what) {
  std::vector<int> out;
  for (const auto& field : split_csv_record(text)) {
    long long v = 0;
    if (!parse_int(trim(field), v) || v < 1) throw CLI::ValidationError(what, "expected positive integers");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

std::string format_percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * fraction);
  return buf;
}

// ---- subcommands ------------------------------------------------------------

struct SynthArgs {
  Common common;
  std::string profile = "separated";
  int speakers = 15;
  int vowels = 24;
  int sample_rate = 16000;
};

int cmd_synth_corpus(const SynthArgs& a, std::ostream& out) {
  const PipelineConfig cfg = load_config(a.common);
  CorpusOptions options;
  options.speakers_per_dialect = a.speakers;
  options.vowels_per_speaker = a.vowels;
  options.seed = static_cast<std::uint64_t>(a.common.seed);
  options.sample_rate = a.sample_rate;
  options.threads = cfg.threads;
  const Corpus corpus = generate_corpus(dialect_profile(a.profile), options, a.common.out);
  out << "wrote " << corpus.rows.size() << " utterances\n";
  out << "manifest: " << corpus.manifest_path.string() << "\n";
  out << "ground truth: " << corpus.ground_truth_path.string() << "\n";
  return kExitOk;
}

struct ExtractArgs {
  Common common;
  std::string manifest;
  std::string tier;
  std::string aliases;
};

int cmd_extract(const ExtractArgs& a, std::ostream& out, std::ostream& err) {
  PipelineConfig cfg = load_config(a.common);
  if (!a.tier.empty()) cfg.tier_name = a.tier;
  if (!a.aliases.empty()) cfg.alias_table = a.aliases;

  BuildOptions options;
  options.tier_name = cfg.tier_name;
  options.acoustics = cfg.acoustics;
  options.threads = cfg.threads;
  if (!cfg.alias_table.empty()) options.aliases = AliasTable::parse(read_file_text(cfg.alias_table));

  const fs::path manifest_path(a.manifest);
  const auto rows = parse_manifest(read_file_text(manifest_path));
  const BuildResult result = build_dataset(rows, manifest_path.parent_path(), options);

  for (const auto& f : result.failures) err << "failed: " << f.path << ": " << f.message << "\n";
  out << "files: " << rows.size() << ", rows extracted: " << result.dataset.rows.size()
      << ", failures: " << result.failures.size() << "\n";
  if (result.dataset.rows.empty()) {
    err << "error: no rows extracted\n";
    return kExitFailure;
  }
  write_file(a.common.out, write_features_csv(result.dataset));
  out << "features: " << a.common.out << "\n";
  return kExitOk;
}

struct ForestArgs {
  std::string group = "all";
  int n_estimators = 0;
  int max_features = 0;
  int min_samples_split = 0;
  std::string max_depth;
  bool no_bootstrap = false;
  long long split_seed = 0;
  double test_fraction = 0.0;
  CLI::Option* n_estimators_opt = nullptr;
  CLI::Option* max_features_opt = nullptr;
  CLI::Option* min_samples_split_opt = nullptr;
  CLI::Option* max_depth_opt = nullptr;
  CLI::Option* split_seed_opt = nullptr;
  CLI::Option* test_fraction_opt = nullptr;
};

void add_forest_options(CLI::App* cmd, ForestArgs& f, bool with_size) {
  cmd->add_option("--group", f.group, "feature group: all, spectral or prosodic")
      ->check(CLI::IsMember({"all", "spectral", "prosodic"}));
  if (with_size) {
    f.n_estimators_opt = cmd->add_option("--n-estimators", f.n_estimators, "number of trees")->check(CLI::PositiveNumber);
    f.max_features_opt =
        cmd->add_option("--max-features", f.max_features, "features tried per split")->check(CLI::PositiveNumber);
  }
  f.min_samples_split_opt = cmd->add_option("--min-samples-split", f.min_samples_split, "smallest splittable node");
  f.max_depth_opt = cmd->add_option("--max-depth", f.max_depth, "depth cap or 'none'");
  cmd->add_flag("--no-bootstrap", f.no_bootstrap, "train every tree on all rows");
  f.split_seed_opt = cmd->add_option("--split-seed", f.split_seed, "seed of the 80:20 split")->check(CLI::NonNegativeNumber);
  f.test_fraction_opt = cmd->add_option("--test-fraction", f.test_fraction, "held-out share per class");
}

void apply_forest_options(const ForestArgs& f, const Common& c, PipelineConfig& cfg) {
  if (f.n_estimators_opt && *f.n_estimators_opt) cfg.forest.n_estimators = f.n_estimators;
  if (f.max_features_opt && *f.max_features_opt) cfg.forest.max_features = f.max_features;
  if (*f.min_samples_split_opt) cfg.forest.min_samples_split = f.min_samples_split;
  if (*f.max_depth_opt) apply_config_value(cfg, "forest.max_depth", f.max_depth);
  if (f.no_bootstrap) cfg.forest.bootstrap = false;
  if (*c.seed_opt) cfg.forest.seed = static_cast<std::uint64_t>(c.seed);
  if (*f.split_seed_opt) cfg.split_seed = static_cast<std::uint64_t>(f.split_seed);
  if (*f.test_fraction_opt) cfg.test_fraction = f.test_fraction;
  validate(cfg);
}

void print_params(const ForestParams& p, std::size_t width, std::ostream& out) {
  out << "n_estimators: " << p.n_estimators << "\n";
  out << "max_features: " << p.max_features << " (effective " << std::min<std::size_t>(p.max_features, width) << ")\n";
  out << "min_samples_split: " << p.min_samples_split << "\n";
  out << "max_depth: " << (p.max_depth ? std::to_string(*p.max_depth) : std::string("none")) << "\n";
  out << "bootstrap: " << (p.bootstrap ? "true" : "false") << "\n";
  out << "seed: " << p.seed << "\n";
}

// Trains on the training rows of the split and writes model + split record.
void train_and_save(const Dataset& data, const SplitResult& split, const PipelineConfig& cfg, const fs::path& model_path,
                    std::ostream& out) {
  const Dataset train = [&] {
    Dataset t;
    t.feature_names = data.feature_names;
    for (auto i : split.train_indices) t.rows.push_back(data.rows[i]);
    return t;
  }();
  const auto model = train_forest(train, cfg.forest, cfg.threads);
  write_file(model_path, save_model(model));
  const fs::path split_path = split_path_for(model_path);
  write_file(split_path, split_record_json(split, data.rows.size(), cfg.split_seed, cfg.test_fraction));
  out << "model: " << model_path.string() << "\n";
  out << "split record: " << split_path.string() << "\n";
}

struct TrainArgs {
  Common common;
  std::string features;
  ForestArgs forest;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  PipelineConfig cfg = load_config(a.common);
  apply_forest_options(a.forest, a.common, cfg);
  const Dataset all = load_features(a.features);
  const Dataset data = select_group(all, *parse_group(a.forest.group));
  const SplitResult split = stratified_split(data, cfg.test_fraction, cfg.split_seed);
  out << "group: " << a.forest.group << " (" << data.width() << " features)\n";
  out << "rows: " << data.rows.size() << " (train " << split.train_indices.size() << ", test "
      << split.test_indices.size() << ")\n";
  print_params(cfg.forest, data.width(), out);
  train_and_save(data, split, cfg, a.common.out, out);
  return kExitOk;
}

struct EvaluateArgs {
  Common common;
  std::string model;
  std::string features;
  std::string split;
};

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
  const PipelineConfig cfg = load_config(a.common);
  const RandomForestModel model = load_model(read_file_text(a.model));
  const Dataset all = load_features(a.features);
  const Dataset data = select_columns(all, model.feature_names);
  const fs::path split_path = a.split.empty() ? split_path_for(a.model) : fs::path(a.split);
  const SplitResult split = read_split_record(split_path, data.rows.size());

  const TrainingData test = to_training_data(data, split.test_indices);
  const auto predicted = forest_predict_all(model, test, cfg.threads);
  const ConfusionMatrix cm = confusion_matrix(test.y, predicted);
  const auto normalized = normalize_rows(cm);

  out << "test rows: " << test.n_rows << "\n";
  out << "accuracy: " << format_g(accuracy(cm), 6) << " (" << format_percent(accuracy(cm)) << ")\n\n";
  out << "confusion matrix (counts)\n" << format_confusion_table(cm, false) << "\n";
  out << "confusion matrix (row-normalized)\n" << format_confusion_table(cm, true) << "\n";
  out << "per-class recall\n";
  for (int i = 0; i < kNumClasses; ++i)
    out << "  " << dialect_name(cm.class_names[i]) << ": " << format_g(normalized[i][i], 6) << "\n";
  if (!a.common.out.empty()) {
    write_file(a.common.out, confusion_csv(cm, true));
    const fs::path counts = fs::path(a.common.out).parent_path() / (fs::path(a.common.out).stem().string() + ".counts.csv");
    write_file(counts, confusion_csv(cm, false));
    out << "\nconfusion csv: " << a.common.out << "\n";
  }
  return kExitOk;
}

struct GridArgs {
  Common common;
  std::string features;
  ForestArgs forest;
  std::string trees = "100,200,400";
  std::string max_features = "4,6,12";
  int folds = 0;
  CLI::Option* folds_opt = nullptr;
};

int cmd_grid_search(const GridArgs& a, std::ostream& out) {
  PipelineConfig cfg = load_config(a.common);
  apply_forest_options(a.forest, a.common, cfg);
  if (*a.folds_opt) cfg.cv_folds = a.folds;
  validate(cfg);
  ParamGrid grid;
  grid.n_estimators = parse_int_list(a.trees, "--n-estimators-grid");
  grid.max_features = parse_int_list(a.max_features, "--max-features-grid");

  const Dataset data = select_group(load_features(a.features), *parse_group(a.forest.group));
  const SplitResult split = stratified_split(data, cfg.test_fraction, cfg.split_seed);
  Dataset train;
  train.feature_names = data.feature_names;
  for (auto i : split.train_indices) train.rows.push_back(data.rows[i]);

  const GridResult result = grid_search(train, grid, cfg.cv_folds, cfg.forest.seed, cfg.forest, cfg.threads);
  out << "cross-validation on " << train.rows.size() << " training rows, " << cfg.cv_folds << " folds\n";
  out << "n_estimators,max_features";
  for (int f = 0; f < cfg.cv_folds; ++f) out << ",fold_" << f + 1;
  out << ",mean\n";
  for (const auto& row : result.table) {
    out << row.params.n_estimators << "," << row.params.max_features;
    for (double acc : row.fold_accuracy) out << "," << format_g(acc, 6);
    out << "," << format_g(row.mean_accuracy, 6) << "\n";
  }
  out << "best: n_estimators " << result.best.n_estimators << ", max_features " << result.best.max_features << "\n";
  if (!a.common.out.empty()) {
    PipelineConfig best = cfg;
    best.forest = result.best;
    train_and_save(data, split, best, a.common.out, out);
  }
  return kExitOk;
}

struct ReportArgs {
  Common common;
  std::string features;
};

int cmd_report(const ReportArgs& a, std::ostream& out, std::ostream& err) {
  const Dataset data = load_features(a.features);
  if (data.rows.empty()) {
    err << "error: the features file has no rows\n";
    return kExitFailure;
  }

  out << "dataset summary\n";
  out << "dialect,rows,speakers\n";
  for (Dialect d : kAllDialects) {
    std::vector<std::string> speakers;
    std::size_t rows = 0;
    for (const auto& r : data.rows) {
      if (r.dialect != d) continue;
      ++rows;
      speakers.push_back(r.speaker_id);
    }
    std::sort(speakers.begin(), speakers.end());
    speakers.erase(std::unique(speakers.begin(), speakers.end()), speakers.end());
    out << dialect_name(d) << "," << rows << "," << speakers.size() << "\n";
  }

  std::string distribution = "dialect,vowel,count,percent\n";
  for (const auto& [dialect, vowels] : vowel_distribution(data)) {
    for (const auto& [vowel, share] : vowels) {
      distribution += std::string(dialect_name(dialect)) + "," + std::string(vowel_symbol(vowel)) + "," +
                      std::to_string(share.count) + "," + format_g(share.percent, 4) + "\n";
    }
  }
  out << "\nvowel distribution\n" << distribution;

  std::string space = "dialect,vowel,mean_f2,mean_f1\n";
  for (const auto& [dialect, vowels] : vowel_space(data)) {
    for (const auto& [vowel, point] : vowels) {
      space += std::string(dialect_name(dialect)) + "," + std::string(vowel_symbol(vowel)) + "," +
               format_g(point.mean_f2, 6) + "," + format_g(point.mean_f1, 6) + "\n";
    }
  }
  out << "\nvowel space\n" << space;

  if (!a.common.out.empty()) {
    const fs::path dir(a.common.out);
    fs::create_directories(dir);
    write_file(dir / "vowel_distribution.csv", distribution);
    write_file(dir / "vowel_space.csv", space);
    out << "\nwrote " << (dir / "vowel_distribution.csv").string() << " and " << (dir / "vowel_space.csv").string()
        << "\n";
  }
  return kExitOk;
}

struct ImportanceArgs {
  Common common;
  std::string model;
};

int cmd_importance(const ImportanceArgs& a, std::ostream& out) {
  const RandomForestModel model = load_model(read_file_text(a.model));
  const auto importance = feature_importances(model);
  std::vector<std::size_t> order(importance.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return importance[x] > importance[y]; });

  std::string csv = "rank,feature,importance\n";
  for (std::size_t r = 0; r < order.size(); ++r) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", importance[order[r]]);
    csv += std::to_string(r + 1) + "," + model.feature_names[order[r]] + "," + buf + "\n";
  }
  out << csv;
  char sum[64];
  std::snprintf(sum, sizeof sum, "%.6f", std::accumulate(importance.begin(), importance.end(), 0.0));
  out << "sum: " << sum << "\n";
  if (!a.common.out.empty()) write_file(a.common.out, csv);
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Vowel-based dialect identification: synthesis, feature extraction, random forest training and "
               "evaluation.",
               "dialectid"};
  app.failure_message(CLI::FailureMessage::help);
  app.require_subcommand(1);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth-corpus", "write a synthetic three-dialect corpus");
  add_common(synth_cmd, synth.common, true, "output directory");
  synth_cmd->add_option("--profile", synth.profile, "separated, overlapped or identical")
      ->check(CLI::IsMember({"separated", "overlapped", "identical"}));
  synth_cmd->add_option("--speakers", synth.speakers, "speakers per dialect")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--vowels-per-speaker", synth.vowels, "utterances per speaker")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--sample-rate", synth.sample_rate, "Hz")->check(CLI::Range(8000, 48000));

  ExtractArgs extract;
  auto* extract_cmd = app.add_subcommand("extract", "extract the 33 features from a manifest");
  add_common(extract_cmd, extract.common, true, "features CSV to write");
  extract_cmd->add_option("--manifest", extract.manifest, "manifest CSV")->required();
  extract_cmd->add_option("--tier", extract.tier, "interval tier holding vowel labels");
  extract_cmd->add_option("--aliases", extract.aliases, "alias table (label=vowel lines)");

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "split 80:20 and train a random forest");
  add_common(train_cmd, train.common, true, "model JSON to write (split record goes next to it)");
  train_cmd->add_option("--features", train.features, "features CSV")->required();
  add_forest_options(train_cmd, train.forest, true);

  EvaluateArgs evaluate;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "score a model on its held-out rows");
  add_common(evaluate_cmd, evaluate.common, false, "row-normalized confusion CSV to write");
  evaluate_cmd->add_option("--model", evaluate.model, "model JSON")->required();
  evaluate_cmd->add_option("--features", evaluate.features, "features CSV")->required();
  evaluate_cmd->add_option("--split", evaluate.split, "split record (default: <model>.split.json)");

  GridArgs grid;
  auto* grid_cmd = app.add_subcommand("grid-search", "cross-validate a parameter grid on the training rows");
  add_common(grid_cmd, grid.common, false, "write the winning model here");
  grid_cmd->add_option("--features", grid.features, "features CSV")->required();
  add_forest_options(grid_cmd, grid.forest, false);
  grid_cmd->add_option("--n-estimators-grid", grid.trees, "comma-separated tree counts");
  grid_cmd->add_option("--max-features-grid", grid.max_features, "comma-separated max_features values");
  grid.folds_opt = grid_cmd->add_option("--folds", grid.folds, "k for stratified k-fold")->check(CLI::Range(2, 1000));

  ReportArgs report;
  auto* report_cmd = app.add_subcommand("report", "vowel counts, vowel space and dataset summary");
  add_common(report_cmd, report.common, false, "directory for the CSV files");
  report_cmd->add_option("--features", report.features, "features CSV")->required();

  ImportanceArgs importance;
  auto* importance_cmd = app.add_subcommand("importance", "rank features by mean impurity decrease");
  add_common(importance_cmd, importance.common, false, "CSV to write");
  importance_cmd->add_option("--model", importance.model, "model JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*synth_cmd) return cmd_synth_corpus(synth, out);
    if (*extract_cmd) return cmd_extract(extract, out, err);
    if (*train_cmd) return cmd_train(train, out);
    if (*evaluate_cmd) return cmd_evaluate(evaluate, out);
    if (*grid_cmd) return cmd_grid_search(grid, out);
    if (*report_cmd) return cmd_report(report, out, err);
    if (*importance_cmd) return cmd_importance(importance, out);
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace dialectid
