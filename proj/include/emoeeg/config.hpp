#pragma once

#include "emoeeg/analysis.hpp"
#include "emoeeg/dsp.hpp"
#include "emoeeg/featext.hpp"
#include "emoeeg/models.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace emoeeg {

// All pipeline settings. Sections of the config file mirror the modules:
//
//   [dataio]   dataset, label_column, raw_eeg, raw_labels, sampling_rate
//   [dsp]      filter_low, filter_high, filter_order, resample_rate,
//              welch_segment, welch_overlap
//   [featext]  window_seconds, offsets
//   [analysis] alpha, significant_only, tsne_perplexity, tsne_iterations,
//              tsne_max_rows
//   [models]   model, lr_lambda, lr_learning_rate, lr_max_epochs,
//              lr_tolerance, svm_c, svm_gamma, svm_tol, svm_max_passes,
//              svm_grid, rf_trees, rf_mtry, rf_max_depth, rf_min_leaf,
//              rf_threads
//   [eval]     test_fraction, seed
//   [cli]      out
//
// `seed` drives the split, forest bootstraps, SMO scan offsets, and the
// t-SNE subsample and initialization.
struct PipelineConfig {
  std::string dataset;
  std::string label_column = "label";
  std::vector<std::string> raw_eeg;
  std::vector<std::string> raw_labels;
  double sampling_rate = 150.0;

  FilterSpec filter;
  double resample_rate = 150.0;  // 0 keeps the input rate
  WelchParams welch;

  WindowPlan windows;

  double alpha = 0.05;
  bool significant_only = false;
  double tsne_perplexity = 30.0;
  int tsne_iterations = 1000;
  int tsne_max_rows = 1000;

  std::string model = "all";  // lr | svm | rf | all
  LogRegParams logreg;
  SvmParams svm;
  bool svm_grid = false;  // replace svm_c/svm_gamma by a cross-validated choice
  ForestParams forest;

  double test_fraction = 0.3;
  std::uint64_t seed = 42;

  std::string out = "out";

  std::vector<ModelConfig> model_configs() const;
  TsneParams tsne_params() const;

  bool operator==(const PipelineConfig&) const = default;
};

// Strict parser for the TOML subset used here: [section] headers,
// `key = value` with quoted strings, numbers, booleans and flat arrays, and
// '#' comments. Unknown sections or keys are rejected.
PipelineConfig parse_config(std::string_view text);
PipelineConfig load_config(const std::filesystem::path& path);

// Canonical text form; parse_config(to_toml(c)) == c.
std::string to_toml(const PipelineConfig& config);

nlohmann::json config_to_json(const PipelineConfig& config);

void validate(const PipelineConfig& config);

}  // namespace emoeeg
