#include "emoeeg/featext.hpp"

#include "emoeeg/errors.hpp"

#include <cmath>

namespace emoeeg {

namespace {

Eigen::Index to_samples(double seconds, double fs) {
  return static_cast<Eigen::Index>(std::llround(seconds * fs));
}

}  // namespace

std::vector<Window> sliding_windows(const EegRecording& recording, const WindowPlan& plan) {
  recording.validate();
  require(plan.window_seconds > 0.0, ErrorCode::InvalidArgument, "window length must be > 0");
  require(!plan.offsets_seconds.empty(), ErrorCode::InvalidArgument, "no window offsets given");
  for (double o : plan.offsets_seconds) {
    require(o >= 0.0 && o < plan.window_seconds, ErrorCode::InvalidArgument,
            "window offsets must lie in [0, window length)");
  }
  const double fs = recording.sampling_rate;
  const Eigen::Index len = to_samples(plan.window_seconds, fs);
  const Eigen::Index n = recording.n_samples();
  require(len >= 1 && n >= len, ErrorCode::TooShort,
          "recording of " + std::to_string(recording.duration()) + " s is shorter than one " +
              std::to_string(plan.window_seconds) + " s window");

  std::vector<Window> windows;
  for (double offset : plan.offsets_seconds) {
    const Eigen::Index first = to_samples(offset, fs);
    for (Eigen::Index start = first; start + len <= n; start += len) {
      Window w;
      w.offset_seconds = offset;
      w.start_sample = start;
      w.start_seconds = static_cast<double>(start) / fs;
      w.samples = recording.samples.middleCols(start, len);
      windows.push_back(std::move(w));
    }
  }
  return windows;
}

std::vector<std::string> window_feature_names(const std::vector<std::string>& channel_names) {
  static const char* stats[] = {"mean", "std", "min", "max", "range", "skewness", "kurtosis"};
  std::vector<std::string> names;
  for (const auto& ch : channel_names) {
    for (const char* s : stats) names.push_back(ch + "_" + s);
    for (const auto& band : default_bands()) names.push_back(ch + "_power_" + band.name);
  }
  return names;
}

Eigen::VectorXd window_features(const Window& window, double sampling_rate,
                                const WelchParams& psd_config) {
  const Eigen::Index len = window.samples.cols();
  require(len >= 8, ErrorCode::TooShort, "window needs at least 8 samples per channel");

  WelchParams params = psd_config;
  params.segment_length =
      static_cast<int>(std::min<Eigen::Index>(params.segment_length, len));
  const double nyquist = sampling_rate / 2.0;

  Eigen::VectorXd out(window.samples.rows() * kFeaturesPerChannel);
  Eigen::Index k = 0;
  for (Eigen::Index c = 0; c < window.samples.rows(); ++c) {
    const Eigen::VectorXd x = window.samples.row(c).transpose();
    const double n = static_cast<double>(len);
    const double mean = x.mean();
    const Eigen::ArrayXd centered = x.array() - mean;
    const double m2 = centered.square().mean();
    const double m3 = centered.cube().mean();
    const double m4 = centered.square().square().mean();
    const double sample_std = std::sqrt(centered.square().sum() / (n - 1.0));
    // Relative floor so rounding noise in a constant channel reads as zero spread.
    const bool flat = m2 <= 1e-24 * std::max(1.0, mean * mean);

    out(k++) = mean;
    out(k++) = flat ? 0.0 : sample_std;
    out(k++) = x.minCoeff();
    out(k++) = x.maxCoeff();
    out(k++) = x.maxCoeff() - x.minCoeff();
    out(k++) = flat ? 0.0 : m3 / std::pow(m2, 1.5);
    out(k++) = flat ? 0.0 : m4 / (m2 * m2) - 3.0;

    PsdEstimate psd;
    psd.segment_length = params.segment_length;
    psd.overlap_fraction = params.overlap_fraction;
    const Eigen::Index n_bins = params.segment_length / 2 + 1;
    psd.frequencies_hz = Eigen::VectorXd::LinSpaced(n_bins, 0.0,
                                                    static_cast<double>(n_bins - 1) *
                                                        sampling_rate / params.segment_length);
    psd.power = welch_density(x, sampling_rate, params).transpose();
    for (const auto& band : default_bands()) {
      // Bands above the window's Nyquist contribute nothing.
      if (band.low_hz >= nyquist) {
        out(k++) = 0.0;
        continue;
      }
      BandDefinition clipped = band;
      clipped.high_hz = std::min(band.high_hz, psd.frequencies_hz(n_bins - 1));
      out(k++) = band_power(psd, clipped)(0);
    }
  }
  return out;
}

LabeledDataset extract_features(const EegRecording& recording, const WindowPlan& plan,
                                const WelchParams& psd_config, int label) {
  label_name(label);
  const auto windows = sliding_windows(recording, plan);
  LabeledDataset ds;
  ds.feature_names = window_feature_names(recording.channel_names);
  ds.features.resize(static_cast<Eigen::Index>(windows.size()),
                     static_cast<Eigen::Index>(ds.feature_names.size()));
  for (std::size_t i = 0; i < windows.size(); ++i) {
    ds.features.row(static_cast<Eigen::Index>(i)) =
        window_features(windows[i], recording.sampling_rate, psd_config).transpose();
    ds.labels.push_back(label);
  }
  return ds;
}

Standardizer fit_standardizer(const Eigen::Ref<const Eigen::MatrixXd>& train) {
  require(train.rows() >= 1 && train.cols() >= 1, ErrorCode::InvalidArgument,
          "cannot fit a standardizer on an empty matrix");
  Standardizer s;
  s.means = train.colwise().mean().transpose();
  s.scales = Eigen::VectorXd::Ones(train.cols());
  s.constant_columns.assign(static_cast<std::size_t>(train.cols()), true);
  if (train.rows() < 2) return s;
  const double denom = static_cast<double>(train.rows() - 1);
  for (Eigen::Index j = 0; j < train.cols(); ++j) {
    const double var = (train.col(j).array() - s.means(j)).square().sum() / denom;
    const double sd = std::sqrt(var);
    if (sd > 1e-12 * std::max(1.0, std::abs(s.means(j)))) {
      s.scales(j) = sd;
      s.constant_columns[static_cast<std::size_t>(j)] = false;
    }
  }
  return s;
}

Eigen::MatrixXd apply_standardizer(const Standardizer& s,
                                   const Eigen::Ref<const Eigen::MatrixXd>& features) {
  require(features.cols() == s.n_features(), ErrorCode::DimensionMismatch,
          "standardizer fitted on " + std::to_string(s.n_features()) + " features, got " +
              std::to_string(features.cols()));
  return (features.rowwise() - s.means.transpose()).array().rowwise() /
         s.scales.transpose().array();
}

}  // namespace emoeeg
