#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace emoeeg {

inline constexpr int kNumClasses = 3;

// Fixed class encoding: NEGATIVE=0, NEUTRAL=1, POSITIVE=2.
inline constexpr std::array<std::string_view, kNumClasses> kLabelNames = {"NEGATIVE", "NEUTRAL",
                                                                         "POSITIVE"};

std::string_view label_name(int label);

// Case-insensitive class name, or an already-encoded "0"/"1"/"2".
// Throws ErrorCode::UnknownLabel otherwise.
int encode_label(std::string_view text);

using ClassCounts = std::array<std::size_t, kNumClasses>;

struct LabeledDataset {
  Eigen::MatrixXd features;  // n_samples x n_features
  std::vector<std::string> feature_names;
  std::vector<int> labels;

  Eigen::Index n_samples() const { return features.rows(); }
  Eigen::Index n_features() const { return features.cols(); }
  ClassCounts class_counts() const;

  // Checks shape agreement, finite values, label range and unique names.
  void validate() const;

  LabeledDataset select_rows(const std::vector<Eigen::Index>& rows) const;
  LabeledDataset select_columns(const std::vector<Eigen::Index>& columns) const;
};

struct EegRecording {
  std::vector<std::string> channel_names;
  Eigen::MatrixXd samples;  // n_channels x n_samples
  double sampling_rate = 0.0;

  Eigen::Index n_channels() const { return samples.rows(); }
  Eigen::Index n_samples() const { return samples.cols(); }
  double duration() const { return static_cast<double>(n_samples()) / sampling_rate; }

  void validate() const;
};

struct SyntheticSpec {
  int n_per_class = 50;
  int n_features = 4;
  double class_separation = 0.0;
  std::uint64_t seed = 0;
};

LabeledDataset load_feature_dataset(const std::filesystem::path& path,
                                    std::string_view label_column = "label");

void write_feature_dataset(const LabeledDataset& dataset, const std::filesystem::path& path,
                           std::string_view label_column = "label");

EegRecording load_raw_eeg(const std::filesystem::path& path, double sampling_rate);

void write_raw_eeg(const EegRecording& recording, const std::filesystem::path& path);

// Unit-variance isotropic Gaussian classes. For n_features >= 2 the class
// means sit on an equilateral triangle of side class_separation centred at the
// origin, placed so that on every feature each class mean differs from the
// average of the other two. With a single feature the means are -sep, 0, +sep.
LabeledDataset generate_synthetic(const SyntheticSpec& spec);

Eigen::MatrixXd class_means(const SyntheticSpec& spec);

}  // namespace emoeeg
