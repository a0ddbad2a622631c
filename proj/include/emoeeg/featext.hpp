#pragma once

#include "emoeeg/dataio.hpp"
#include "emoeeg/dsp.hpp"

#include <Eigen/Core>

#include <string>
#include <vector>

namespace emoeeg {

struct WindowPlan {
  double window_seconds = 1.0;
  std::vector<double> offsets_seconds = {0.0, 0.5};

  bool operator==(const WindowPlan&) const = default;
};

struct Window {
  double offset_seconds = 0.0;
  double start_seconds = 0.0;
  Eigen::Index start_sample = 0;
  Eigen::MatrixXd samples;  // n_channels x window length
};

// Non-overlapping windows per offset stream, ordered by (offset, start time).
// Trailing partial windows are dropped.
std::vector<Window> sliding_windows(const EegRecording& recording, const WindowPlan& plan);

inline constexpr int kFeaturesPerChannel = 12;

// mean, std, min, max, range, skewness, kurtosis, then the five band powers.
std::vector<std::string> window_feature_names(const std::vector<std::string>& channel_names);

// Per-channel descriptors of one window. The Welch segment is clamped to the
// window length. Std is the sample (n-1) estimate; skewness and excess
// kurtosis use population moments and are 0 for a constant channel.
Eigen::VectorXd window_features(const Window& window, double sampling_rate,
                                const WelchParams& psd_config);

// Featurizes every window of a recording; all rows carry `label`.
LabeledDataset extract_features(const EegRecording& recording, const WindowPlan& plan,
                                const WelchParams& psd_config, int label);

struct Standardizer {
  Eigen::VectorXd means;
  Eigen::VectorXd scales;              // 1 for constant columns
  std::vector<bool> constant_columns;  // passed through centered, unscaled

  Eigen::Index n_features() const { return means.size(); }
};

Standardizer fit_standardizer(const Eigen::Ref<const Eigen::MatrixXd>& train_features);

Eigen::MatrixXd apply_standardizer(const Standardizer& standardizer,
                                   const Eigen::Ref<const Eigen::MatrixXd>& features);

}  // namespace emoeeg
