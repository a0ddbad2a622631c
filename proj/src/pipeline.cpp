#include "emoeeg/pipeline.hpp"

#include "emoeeg/analysis.hpp"
#include "emoeeg/artifact.hpp"
#include "emoeeg/errors.hpp"
#include "emoeeg/eval.hpp"
#include "emoeeg/featext.hpp"
#include "emoeeg/json_eigen.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace emoeeg {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Collects what one stage wrote, in write order.
class StageWriter {
 public:
  StageWriter(const fs::path& out, std::string_view stage) : root_(out), stage_(stage) {
    fs::create_directories(root_ / stage_);
  }

  void write(const Artifact& artifact, const std::string& file) {
    const fs::path rel = fs::path(stage_) / file;
    write_artifact(artifact, root_ / rel);
    result.artifacts.push_back(rel);
  }

  void write_text(const std::string& text, const std::string& file) {
    const fs::path rel = fs::path(stage_) / file;
    std::ofstream os(root_ / rel, std::ios::binary);
    if (!os) throw Error(ErrorCode::PathError, "cannot write " + (root_ / rel).string());
    os << text;
    result.artifacts.push_back(rel);
  }

  void add_csv(const fs::path& rel) { result.artifacts.push_back(rel); }

  fs::path path(const std::string& file) const { return root_ / stage_ / file; }
  const std::string& stage() const { return stage_; }

  RunResult result;
  nlohmann::json timings = nlohmann::json::object();

 private:
  fs::path root_;
  std::string stage_;
};

EegRecording preprocess_recording(const PipelineConfig& config, const std::string& path,
                                  int* transient) {
  EegRecording rec = load_raw_eeg(path, config.sampling_rate);
  rec = bandpass_filter(rec, config.filter);
  int edge = config.filter.transient_samples();
  if (config.resample_rate > 0.0 && config.resample_rate != rec.sampling_rate) {
    const double ratio = config.resample_rate / rec.sampling_rate;
    rec = resample(rec, config.resample_rate);
    edge = static_cast<int>(std::ceil(edge * ratio));
  }
  if (transient) *transient = edge;
  return rec;
}

std::vector<std::string> recording_stems(const std::vector<std::string>& paths) {
  std::vector<std::string> stems;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    std::string stem = fs::path(paths[i]).stem().string();
    for (std::size_t j = 0; j < i; ++j) {
      if (fs::path(paths[j]).stem().string() == stem) {
        stem += "_" + std::to_string(i);
        break;
      }
    }
    stems.push_back(stem);
  }
  return stems;
}

void require_raw(const PipelineConfig& config, bool need_labels) {
  require(!config.raw_eeg.empty(), ErrorCode::InvalidConfig,
          "dataio.raw_eeg lists no recordings");
  if (need_labels) {
    require(config.raw_labels.size() == config.raw_eeg.size(), ErrorCode::InvalidConfig,
            "dataio.raw_labels must give one label per raw_eeg entry");
  }
}

LabeledDataset features_from_raw(const PipelineConfig& config) {
  require_raw(config, true);
  LabeledDataset all;
  std::vector<Eigen::MatrixXd> blocks;
  Eigen::Index rows = 0;
  for (std::size_t i = 0; i < config.raw_eeg.size(); ++i) {
    const EegRecording rec = preprocess_recording(config, config.raw_eeg[i], nullptr);
    LabeledDataset part =
        extract_features(rec, config.windows, config.welch, encode_label(config.raw_labels[i]));
    if (i == 0) {
      all.feature_names = part.feature_names;
    } else {
      require(part.feature_names == all.feature_names, ErrorCode::DimensionMismatch,
              "recording " + config.raw_eeg[i] + " has different channels");
    }
    rows += part.n_samples();
    blocks.push_back(std::move(part.features));
    all.labels.insert(all.labels.end(), part.labels.begin(), part.labels.end());
  }
  all.features.resize(rows, static_cast<Eigen::Index>(all.feature_names.size()));
  Eigen::Index at = 0;
  for (const auto& b : blocks) {
    all.features.middleRows(at, b.rows()) = b;
    at += b.rows();
  }
  all.validate();
  return all;
}

void run_preprocess(const PipelineConfig& config, StageWriter& w) {
  require_raw(config, false);
  const auto stems = recording_stems(config.raw_eeg);
  for (std::size_t i = 0; i < config.raw_eeg.size(); ++i) {
    int transient = 0;
    const EegRecording rec = preprocess_recording(config, config.raw_eeg[i], &transient);
    w.write(make_artifact(rec, transient), "timeseries_" + stems[i] + ".json");
    w.write(make_artifact(welch_psd(rec, config.welch)), "psd_" + stems[i] + ".json");
  }
  w.result.summary = "preprocessed " + std::to_string(config.raw_eeg.size()) + " recording(s)\n";
}

void run_features(const PipelineConfig& config, StageWriter& w) {
  const LabeledDataset ds = features_from_raw(config);
  write_feature_dataset(ds, w.path("features.csv"), config.label_column);
  w.add_csv(fs::path(w.stage()) / "features.csv");
  w.result.summary = "extracted " + std::to_string(ds.n_samples()) + " windows x " +
                     std::to_string(ds.n_features()) + " features\n";
}

void run_analyze(const PipelineConfig& config, StageWriter& w) {
  const LabeledDataset ds = load_pipeline_dataset(config);

  auto start = Clock::now();
  w.write(make_artifact(correlation_matrix(ds.features, ds.feature_names)), "correlation.json");
  w.timings["correlation_seconds"] = seconds_since(start);

  start = Clock::now();
  const SignificanceSummary summary = significance_summary(ds, config.alpha);
  w.write(make_artifact(summary), "significance.json");
  w.timings["significance_seconds"] = seconds_since(start);

  std::ostringstream text;
  for (int c = 0; c < kNumClasses; ++c) {
    const auto& pc = summary.per_class[static_cast<std::size_t>(c)];
    text << label_name(c) << ": " << pc.significant << " significant, " << pc.non_significant
         << " not significant\n";
  }

  // The embedding runs on a stratified subsample of standardized rows.
  const auto rows = stratified_subsample(ds.labels, static_cast<std::size_t>(config.tsne_max_rows),
                                         config.seed);
  const LabeledDataset sub = ds.select_rows(rows);
  const double limit = (static_cast<double>(sub.n_samples()) - 1.0) / 3.0;
  if (!(config.tsne_perplexity < limit)) {
    std::ostringstream note;
    note << "t-SNE skipped: perplexity " << config.tsne_perplexity << " is infeasible for "
         << sub.n_samples() << " rows (needs < (n - 1) / 3)";
    w.result.notices.push_back(note.str());
  } else {
    start = Clock::now();
    const Eigen::MatrixXd x = apply_standardizer(fit_standardizer(sub.features), sub.features);
    w.write(make_artifact(tsne_embed(x, config.tsne_params(), sub.labels)), "embedding.json");
    w.timings["tsne_seconds"] = seconds_since(start);
  }
  w.result.summary = text.str();
}

nlohmann::json training_log(const TrainedModel& model) {
  nlohmann::json log = {{"model", std::string(model_key(kind_of(model)))}};
  if (const auto* lr = std::get_if<LogRegModel>(&model)) {
    log["epochs"] = lr->epochs;
    log["converged"] = lr->converged;
    log["loss_history"] = lr->training_history;
  } else if (const auto* svm = std::get_if<SvmEnsemble>(&model)) {
    nlohmann::json pairs = nlohmann::json::array();
    for (std::size_t k = 0; k < kClassPairs.size(); ++k) {
      const auto& m = svm->models[k];
      pairs.push_back({{"positive_class", kClassPairs[k].first},
                       {"negative_class", kClassPairs[k].second},
                       {"support_vectors", m.support_vectors.rows()},
                       {"bias", m.bias},
                       {"gamma", m.gamma}});
    }
    log["pairwise"] = pairs;
  } else if (const auto* rf = std::get_if<RandomForestModel>(&model)) {
    std::vector<int> depths, nodes;
    for (const auto& t : rf->trees) {
      depths.push_back(t.depth());
      nodes.push_back(static_cast<int>(t.nodes.size()));
    }
    log["trees"] = rf->trees.size();
    log["mtry"] = rf->mtry;
    log["depths"] = depths;
    log["node_counts"] = nodes;
  }
  return log;
}

// With svm_grid set, SVM configs take the cross-validated C and gamma.
std::vector<ModelConfig> resolve_models(const PipelineConfig& config, const PreparedSplit& prepared,
                                        StageWriter& w, std::string& note) {
  auto models = config.model_configs();
  const bool has_svm = std::any_of(models.begin(), models.end(),
                                   [](const ModelConfig& m) { return m.kind == ModelKind::Svm; });
  if (!config.svm_grid || !has_svm) return models;
  const auto start = Clock::now();
  const SvmGridResult grid =
      grid_search_svm(prepared.train_standardized, prepared.train.labels, config.svm, 3, config.seed);
  w.timings["svm_grid_seconds"] = seconds_since(start);

  nlohmann::json points = nlohmann::json::array();
  for (const auto& pt : grid.points) {
    points.push_back({{"C", pt.C}, {"gamma", pt.gamma}, {"cv_accuracy", pt.cv_accuracy}});
  }
  Artifact a;
  a.kind = "svm_grid";
  a.payload = {{"folds", grid.folds},
               {"points", points},
               {"best", {{"C", grid.best.C}, {"gamma", grid.best.gamma}}}};
  w.write(a, "svm_grid.json");
  for (auto& m : models) {
    if (m.kind != ModelKind::Svm) continue;
    m.svm.C = grid.best.C;
    m.svm.gamma = grid.best.gamma;
  }
  std::ostringstream text;
  text << "SVM grid (" << grid.folds << "-fold): C=" << grid.best.C << " gamma=" << grid.best.gamma
       << '\n';
  note = text.str();
  return models;
}

void run_train(const PipelineConfig& config, StageWriter& w) {
  const LabeledDataset ds = load_pipeline_dataset(config);
  const SplitIndices split = stratified_split(ds.labels, config.test_fraction, config.seed);
  const PreparedSplit prepared =
      prepare_split(ds, split, {config.significant_only, config.alpha});

  std::string grid_note;
  const auto models = resolve_models(config, prepared, w, grid_note);
  nlohmann::json logs = nlohmann::json::array();
  for (const auto& mc : models) {
    const bool standardized = uses_standardized_features(mc.kind);
    const auto start = Clock::now();
    const TrainedModel model =
        train_model(mc, standardized ? prepared.train_standardized : prepared.train.features,
                    prepared.train.labels);
    w.timings[std::string(model_key(mc.kind)) + "_train_seconds"] = seconds_since(start);

    Artifact a;
    a.kind = "model";
    a.payload = {{"model", model_to_json(model)},
                 {"standardized_input", standardized},
                 {"feature_names", prepared.train.feature_names},
                 {"kept_columns", prepared.kept_columns},
                 {"standardizer",
                  {{"means", jsonio::vector_to_json(prepared.standardizer.means)},
                   {"scales", jsonio::vector_to_json(prepared.standardizer.scales)}}},
                 {"train_rows", split.train_rows},
                 {"seed", config.seed}};
    w.write(a, "model_" + std::string(model_key(mc.kind)) + ".json");
    logs.push_back(training_log(model));
  }
  Artifact log;
  log.kind = "training_log";
  log.payload = {{"models", logs}, {"train_rows", split.train_rows.size()}};
  w.write(log, "training_log.json");
  w.result.summary = grid_note + "trained " + std::to_string(logs.size()) + " model(s) on " +
                     std::to_string(split.train_rows.size()) + " rows\n";
}

void write_report(const EvaluationReport& report,
                  const std::string& report_name, StageWriter& w) {
  w.write(make_artifact(report), report_name);
  for (const auto& row : report.rows) {
    w.write(make_artifact(row.confusion, row.kind),
            "confusion_" + std::string(model_key(row.kind)) + ".json");
    w.timings[std::string(model_key(row.kind)) + "_train_seconds"] = row.train_seconds;
  }
  const std::string table = render_table(report);
  w.write_text(table, "table.txt");
  w.result.summary += table;
}

void run_models(const PipelineConfig& config, const std::string& report_name, StageWriter& w) {
  const LabeledDataset ds = load_pipeline_dataset(config);
  const SplitIndices split = stratified_split(ds.labels, config.test_fraction, config.seed);
  const CompareOptions options{config.significant_only, config.alpha};
  std::vector<ModelConfig> models = config.model_configs();
  if (config.svm_grid) {
    std::string note;
    models = resolve_models(config, prepare_split(ds, split, options), w, note);
    w.result.summary = note;
  }
  write_report(compare_models(ds, split, models, options), report_name, w);
}

void run_evaluate(const PipelineConfig& config, StageWriter& w) {
  require(config.model != "all", ErrorCode::InvalidConfig,
          "evaluate needs a single model (--model lr|svm|rf)");
  run_models(config, "report.json", w);
}

void run_compare(const PipelineConfig& config, StageWriter& w) {
  run_models(config, "comparison.json", w);
}

void update_manifest(const PipelineConfig& config, std::string_view stage, const StageWriter& w,
                     double total_seconds) {
  const fs::path path = fs::path(config.out) / "manifest.json";
  nlohmann::json manifest;
  {
    std::ifstream in(path);
    if (in) {
      try {
        manifest = nlohmann::json::parse(in);
      } catch (const nlohmann::json::exception&) {
        manifest = nullptr;
      }
    }
  }
  if (!manifest.is_object() || !manifest.contains("runs") || !manifest["runs"].is_object()) {
    manifest = {{"schema_version", kArtifactSchemaVersion},
                {"kind", "manifest"},
                {"runs", nlohmann::json::object()}};
  }
  nlohmann::json checksums = nlohmann::json::object();
  for (const auto& rel : w.result.artifacts) {
    checksums[rel.generic_string()] = file_checksum(fs::path(config.out) / rel);
  }
  nlohmann::json timings = w.timings;
  timings["total_seconds"] = total_seconds;
  manifest["runs"][std::string(stage)] = {{"config_toml", to_toml(config)},
                                          {"config", config_to_json(config)},
                                          {"seed", config.seed},
                                          {"artifacts", checksums},
                                          {"timings", timings},
                                          {"notices", w.result.notices},
                                          {"finished_at", utc_timestamp()}};
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::PathError, "cannot write " + path.string());
  os << manifest.dump(2) << '\n';
}

}  // namespace

LabeledDataset load_pipeline_dataset(const PipelineConfig& config) {
  if (!config.dataset.empty()) return load_feature_dataset(config.dataset, config.label_column);
  require(!config.raw_eeg.empty(), ErrorCode::InvalidConfig,
          "no input: set dataio.dataset or dataio.raw_eeg");
  return features_from_raw(config);
}

std::string file_checksum(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot read " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

RunResult run_subcommand(std::string_view name, const PipelineConfig& config) {
  validate(config);
  const auto start = Clock::now();
  StageWriter w(config.out, name);
  if (name == "preprocess") {
    run_preprocess(config, w);
  } else if (name == "features") {
    run_features(config, w);
  } else if (name == "analyze") {
    run_analyze(config, w);
  } else if (name == "train") {
    run_train(config, w);
  } else if (name == "evaluate") {
    run_evaluate(config, w);
  } else if (name == "compare") {
    run_compare(config, w);
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown subcommand '" + std::string(name) + "'");
  }
  update_manifest(config, name, w, seconds_since(start));
  return w.result;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"EEG emotion classification pipeline"};
  app.name("emoeeg");
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::string config_path, out_dir, model, dataset;
  std::uint64_t seed = 0;
  double test_fraction = 0.0, alpha = 0.0, filter_low = 0.0, filter_high = 0.0;
  bool significant_only = false;
  auto* o_config = app.add_option("--config", config_path, "Pipeline config file")
                       ->check(CLI::ExistingFile);
  auto* o_out = app.add_option("--out", out_dir, "Output directory");
  auto* o_seed = app.add_option("--seed", seed, "Seed for split, forest, SMO and t-SNE");
  auto* o_frac = app.add_option("--test-fraction", test_fraction, "Held-out fraction per class");
  auto* o_model = app.add_option("--model", model, "Model selection")
                      ->check(CLI::IsMember({"lr", "svm", "rf", "all"}));
  auto* o_alpha = app.add_option("--alpha", alpha, "Significance level");
  auto* o_low = app.add_option("--filter-low", filter_low, "Band-pass low edge (Hz)");
  auto* o_high = app.add_option("--filter-high", filter_high, "Band-pass high edge (Hz)");
  auto* o_sig = app.add_flag("--significant-only", significant_only,
                             "Train on features significant on the training rows");
  bool svm_grid = false;
  auto* o_grid = app.add_flag("--svm-grid", svm_grid, "Cross-validate SVM C and gamma on the training rows");
  auto* o_data = app.add_option("--dataset", dataset, "Feature CSV (overrides dataio.dataset)");

  app.add_subcommand("preprocess", "Filter and resample raw recordings; write signal and PSD");
  app.add_subcommand("features", "Extract windowed features from raw recordings into a CSV");
  app.add_subcommand("analyze", "Correlation, t-test significance and t-SNE embedding");
  app.add_subcommand("train", "Train the selected model(s) and serialize them");
  app.add_subcommand("evaluate", "Train and evaluate one model on the held-out split");
  app.add_subcommand("compare", "Train and compare all selected models");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  const std::string stage = app.get_subcommands().front()->get_name();
  try {
    PipelineConfig config = o_config->count() ? load_config(config_path) : PipelineConfig{};
    if (o_out->count()) config.out = out_dir;
    if (o_seed->count()) config.seed = seed;
    if (o_frac->count()) config.test_fraction = test_fraction;
    if (o_model->count()) config.model = model;
    if (o_alpha->count()) config.alpha = alpha;
    if (o_low->count()) config.filter.low_hz = filter_low;
    if (o_high->count()) config.filter.high_hz = filter_high;
    if (o_sig->count()) config.significant_only = significant_only;
    if (o_data->count()) config.dataset = dataset;
    if (o_grid->count()) config.svm_grid = svm_grid;

    const RunResult result = run_subcommand(stage, config);
    out << result.summary;
    for (const auto& n : result.notices) err << "notice: " << n << '\n';
    return 0;
  } catch (const Error& e) {
    nlohmann::json record = {{"error", to_string(e.code())},
                             {"message", e.what()},
                             {"subcommand", stage}};
    if (e.row()) record["row"] = *e.row();
    if (e.column()) record["column"] = *e.column();
    err << record.dump() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << nlohmann::json{{"error", "internal"}, {"message", e.what()}, {"subcommand", stage}}.dump()
        << '\n';
    return 1;
  }
}

}  // namespace emoeeg
