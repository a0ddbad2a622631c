#include "emoeeg/dataio.hpp"

#include "emoeeg/csv.hpp"
#include "emoeeg/errors.hpp"
#include "emoeeg/random.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <unordered_set>

namespace emoeeg {

namespace {

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](unsigned char x, unsigned char y) {
           return std::tolower(x) == std::tolower(y);
         });
}

std::string_view trimmed(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

void require_unique(const std::vector<std::string>& names, const char* what) {
  std::unordered_set<std::string> seen;
  for (const auto& n : names) {
    if (!seen.insert(n).second) {
      throw Error(ErrorCode::DuplicateName, std::string("duplicate ") + what + " name: " + n,
                  std::nullopt, n);
    }
  }
}

double parse_cell(const std::string& cell, std::size_t row, const std::string& column) {
  const auto value = csv::parse_number(cell);
  if (!value) {
    throw Error(ErrorCode::NonNumericCell,
                "non-numeric value '" + cell + "' at row " + std::to_string(row) + ", column " +
                    column,
                row, column);
  }
  if (!std::isfinite(*value)) {
    throw Error(ErrorCode::NonFiniteCell,
                "non-finite value '" + cell + "' at row " + std::to_string(row) + ", column " +
                    column,
                row, column);
  }
  return *value;
}

void ensure_parent_exists(const std::filesystem::path& path) {
  const auto parent = path.parent_path();
  std::error_code ec;
  if (!parent.empty() && !std::filesystem::is_directory(parent, ec)) {
    throw Error(ErrorCode::PathError, "directory does not exist: " + parent.string());
  }
}

}  // namespace

std::string_view label_name(int label) {
  require(label >= 0 && label < kNumClasses, ErrorCode::UnknownLabel,
          "label out of range: " + std::to_string(label));
  return kLabelNames[static_cast<std::size_t>(label)];
}

int encode_label(std::string_view text) {
  const auto t = trimmed(text);
  for (int c = 0; c < kNumClasses; ++c) {
    if (iequals(t, kLabelNames[static_cast<std::size_t>(c)])) return c;
    if (t == std::to_string(c)) return c;
  }
  throw Error(ErrorCode::UnknownLabel, "unknown label value: '" + std::string(t) + "'");
}

ClassCounts LabeledDataset::class_counts() const {
  ClassCounts counts{};
  for (int y : labels) {
    if (y >= 0 && y < kNumClasses) ++counts[static_cast<std::size_t>(y)];
  }
  return counts;
}

void LabeledDataset::validate() const {
  require(static_cast<Eigen::Index>(labels.size()) == features.rows(),
          ErrorCode::DimensionMismatch, "label count does not match feature rows");
  require(static_cast<Eigen::Index>(feature_names.size()) == features.cols(),
          ErrorCode::DimensionMismatch, "feature name count does not match feature columns");
  require(features.allFinite(), ErrorCode::NonFiniteCell, "dataset contains NaN/Inf");
  for (int y : labels) {
    require(y >= 0 && y < kNumClasses, ErrorCode::UnknownLabel,
            "label out of range: " + std::to_string(y));
  }
  require_unique(feature_names, "feature");
}

LabeledDataset LabeledDataset::select_rows(const std::vector<Eigen::Index>& rows) const {
  LabeledDataset out;
  out.feature_names = feature_names;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
  out.labels.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.features.row(static_cast<Eigen::Index>(i)) = features.row(rows[i]);
    out.labels.push_back(labels[static_cast<std::size_t>(rows[i])]);
  }
  return out;
}

LabeledDataset LabeledDataset::select_columns(const std::vector<Eigen::Index>& columns) const {
  LabeledDataset out;
  out.labels = labels;
  out.features.resize(features.rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    out.features.col(static_cast<Eigen::Index>(j)) = features.col(columns[j]);
    out.feature_names.push_back(feature_names[static_cast<std::size_t>(columns[j])]);
  }
  return out;
}

void EegRecording::validate() const {
  require(sampling_rate > 0.0, ErrorCode::InvalidArgument, "sampling rate must be positive");
  require(static_cast<Eigen::Index>(channel_names.size()) == samples.rows(),
          ErrorCode::DimensionMismatch, "channel name count does not match sample rows");
  require_unique(channel_names, "channel");
}

LabeledDataset load_feature_dataset(const std::filesystem::path& path,
                                    std::string_view label_column) {
  const csv::Table table = csv::read(path);
  const auto label_it = std::find(table.header.begin(), table.header.end(), label_column);
  if (label_it == table.header.end()) {
    throw Error(ErrorCode::MissingColumn,
                "label column '" + std::string(label_column) + "' not found in " + path.string(),
                std::nullopt, std::string(label_column));
  }
  const auto label_idx = static_cast<std::size_t>(label_it - table.header.begin());

  LabeledDataset ds;
  for (std::size_t j = 0; j < table.header.size(); ++j) {
    if (j != label_idx) ds.feature_names.push_back(table.header[j]);
  }
  require_unique(ds.feature_names, "feature");

  const auto n = static_cast<Eigen::Index>(table.rows.size());
  ds.features.resize(n, static_cast<Eigen::Index>(ds.feature_names.size()));
  ds.labels.reserve(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    const std::size_t row_no = i + 2;
    try {
      ds.labels.push_back(encode_label(row[label_idx]));
    } catch (const Error& e) {
      throw Error(ErrorCode::UnknownLabel,
                  std::string(e.what()) + " at row " + std::to_string(row_no), row_no,
                  std::string(label_column));
    }
    Eigen::Index col = 0;
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j == label_idx) continue;
      ds.features(static_cast<Eigen::Index>(i), col++) = parse_cell(row[j], row_no, table.header[j]);
    }
  }
  return ds;
}

void write_feature_dataset(const LabeledDataset& dataset, const std::filesystem::path& path,
                           std::string_view label_column) {
  dataset.validate();
  ensure_parent_exists(path);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::PathError, "cannot write: " + path.string());
  for (const auto& name : dataset.feature_names) out << csv::quote_if_needed(name) << ',';
  out << csv::quote_if_needed(label_column) << '\n';
  for (Eigen::Index i = 0; i < dataset.n_samples(); ++i) {
    for (Eigen::Index j = 0; j < dataset.n_features(); ++j) {
      out << csv::format_number(dataset.features(i, j)) << ',';
    }
    out << label_name(dataset.labels[static_cast<std::size_t>(i)]) << '\n';
  }
  if (!out) throw Error(ErrorCode::PathError, "write failed: " + path.string());
}

EegRecording load_raw_eeg(const std::filesystem::path& path, double sampling_rate) {
  require(sampling_rate > 0.0, ErrorCode::InvalidArgument, "sampling rate must be positive");
  const csv::Table table = csv::read(path);
  if (table.rows.empty()) throw Error(ErrorCode::EmptyFile, "no samples in " + path.string());

  EegRecording rec;
  rec.channel_names = table.header;
  rec.sampling_rate = sampling_rate;
  require_unique(rec.channel_names, "channel");
  const auto n_ch = static_cast<Eigen::Index>(table.header.size());
  const auto n_s = static_cast<Eigen::Index>(table.rows.size());
  rec.samples.resize(n_ch, n_s);
  for (Eigen::Index t = 0; t < n_s; ++t) {
    const auto& row = table.rows[static_cast<std::size_t>(t)];
    for (Eigen::Index c = 0; c < n_ch; ++c) {
      rec.samples(c, t) = parse_cell(row[static_cast<std::size_t>(c)],
                                     static_cast<std::size_t>(t) + 2,
                                     table.header[static_cast<std::size_t>(c)]);
    }
  }
  return rec;
}

void write_raw_eeg(const EegRecording& recording, const std::filesystem::path& path) {
  recording.validate();
  ensure_parent_exists(path);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::PathError, "cannot write: " + path.string());
  for (std::size_t c = 0; c < recording.channel_names.size(); ++c) {
    out << (c ? "," : "") << csv::quote_if_needed(recording.channel_names[c]);
  }
  out << '\n';
  for (Eigen::Index t = 0; t < recording.n_samples(); ++t) {
    for (Eigen::Index c = 0; c < recording.n_channels(); ++c) {
      out << (c ? "," : "") << csv::format_number(recording.samples(c, t));
    }
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::PathError, "write failed: " + path.string());
}

Eigen::MatrixXd class_means(const SyntheticSpec& spec) {
  const Eigen::Index d = spec.n_features;
  Eigen::MatrixXd means = Eigen::MatrixXd::Zero(kNumClasses, d);
  const double radius = spec.class_separation / std::sqrt(3.0);
  if (d == 1) {
    for (int c = 0; c < kNumClasses; ++c) means(c, 0) = (c - 1) * spec.class_separation;
    return means;
  }
  if (d == 2) {
    // Triangle rotated 15 degrees off both axes: no vertex projects to zero.
    const double phase = std::numbers::pi / 12.0;
    for (int c = 0; c < kNumClasses; ++c) {
      const double theta = phase + 2.0 * std::numbers::pi * c / 3.0;
      means(c, 0) = radius * std::cos(theta);
      means(c, 1) = radius * std::sin(theta);
    }
    return means;
  }
  // Feature j points at vertex j % 3: class (j % 3) sits at +radius * rho_j,
  // the other two at -radius * rho_j / 2. Loadings are split evenly within
  // each vertex group so the three groups carry equal weight, which keeps the
  // triangle equilateral for any d >= 3.
  std::array<Eigen::Index, kNumClasses> group{};
  for (Eigen::Index j = 0; j < d; ++j) ++group[static_cast<std::size_t>(j % 3)];
  for (Eigen::Index j = 0; j < d; ++j) {
    const int owner = static_cast<int>(j % 3);
    const double rho = std::sqrt((2.0 / 3.0) / static_cast<double>(group[static_cast<std::size_t>(owner)]));
    for (int c = 0; c < kNumClasses; ++c) {
      means(c, j) = radius * rho * (c == owner ? 1.0 : -0.5);
    }
  }
  return means;
}

LabeledDataset generate_synthetic(const SyntheticSpec& spec) {
  require(spec.n_per_class >= 2, ErrorCode::InvalidArgument, "n_per_class must be >= 2");
  require(spec.n_features >= 1, ErrorCode::InvalidArgument, "n_features must be >= 1");
  require(spec.class_separation >= 0.0 && std::isfinite(spec.class_separation),
          ErrorCode::InvalidArgument, "class_separation must be finite and >= 0");

  const Eigen::MatrixXd means = class_means(spec);
  LabeledDataset ds;
  const Eigen::Index n = static_cast<Eigen::Index>(kNumClasses) * spec.n_per_class;
  ds.features.resize(n, spec.n_features);
  ds.labels.reserve(static_cast<std::size_t>(n));
  for (int j = 0; j < spec.n_features; ++j) ds.feature_names.push_back("f" + std::to_string(j));

  Rng rng(spec.seed);
  Eigen::Index row = 0;
  for (int c = 0; c < kNumClasses; ++c) {
    for (int k = 0; k < spec.n_per_class; ++k, ++row) {
      for (Eigen::Index j = 0; j < spec.n_features; ++j) {
        ds.features(row, j) = means(c, j) + rng.normal();
      }
      ds.labels.push_back(c);
    }
  }
  return ds;
}

}  // namespace emoeeg
