#include "emoeeg/dsp.hpp"

#include "emoeeg/errors.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace emoeeg {

namespace {

using cplx = std::complex<double>;

cplx bilinear(cplx s, double fs) { return (2.0 * fs + s) / (2.0 * fs - s); }

double prewarp(double f, double fs) { return 2.0 * fs * std::tan(std::numbers::pi * f / fs); }

// Left-half-plane poles of the normalized analog Butterworth prototype.
std::vector<cplx> prototype_poles(int order) {
  std::vector<cplx> poles;
  for (int k = 1; k <= order; ++k) {
    const double angle = std::numbers::pi * (2.0 * k + order - 1.0) / (2.0 * order);
    poles.emplace_back(std::cos(angle), std::sin(angle));
  }
  return poles;
}

// Groups digital poles into conjugate pairs (upper half plane representative)
// and leftover real poles.
void pair_poles(const std::vector<cplx>& poles, std::vector<cplx>& complex_upper,
                std::vector<double>& real_poles) {
  constexpr double kImagTol = 1e-12;
  for (const auto& p : poles) {
    if (std::abs(p.imag()) <= kImagTol) {
      real_poles.push_back(p.real());
    } else if (p.imag() > 0.0) {
      complex_upper.push_back(p);
    }
  }
  std::sort(complex_upper.begin(), complex_upper.end(),
            [](const cplx& a, const cplx& b) { return std::abs(a) < std::abs(b); });
  std::sort(real_poles.begin(), real_poles.end());
}

void normalize_gain(SosFilter& sos, double freq_hz, double fs) {
  const double mag = std::abs(frequency_response(sos, freq_hz, fs));
  const double k = 1.0 / mag;
  sos.front().b0 *= k;
  sos.front().b1 *= k;
  sos.front().b2 *= k;
}

// Steady-state section states for a unit step input (transposed direct form II).
std::vector<std::array<double, 2>> step_initial_states(const SosFilter& sos) {
  std::vector<std::array<double, 2>> zi;
  double scale = 1.0;
  for (const auto& s : sos) {
    const double den = 1.0 + s.a1 + s.a2;
    const double g = std::abs(den) > 1e-300 ? (s.b0 + s.b1 + s.b2) / den : 0.0;
    zi.push_back({scale * (g - s.b0), scale * (s.b2 - s.a2 * g)});
    scale *= g;
  }
  return zi;
}

Eigen::VectorXd run_sections(const SosFilter& sos, const Eigen::Ref<const Eigen::VectorXd>& x,
                             std::vector<std::array<double, 2>> state) {
  Eigen::VectorXd y = x;
  for (std::size_t k = 0; k < sos.size(); ++k) {
    const auto& s = sos[k];
    double z1 = state[k][0];
    double z2 = state[k][1];
    for (Eigen::Index t = 0; t < y.size(); ++t) {
      const double in = y(t);
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      y(t) = out;
    }
  }
  return y;
}

Eigen::VectorXd periodic_hann(Eigen::Index n) {
  Eigen::VectorXd w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    w(i) = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                static_cast<double>(n));
  }
  return w;
}

}  // namespace

const std::array<BandDefinition, 5>& default_bands() {
  static const std::array<BandDefinition, 5> bands = {{
      {"delta", 0.5, 4.0},
      {"theta", 4.0, 8.0},
      {"alpha", 8.0, 13.0},
      {"beta", 13.0, 30.0},
      {"gamma", 30.0, 45.0},
  }};
  return bands;
}

SosFilter butterworth_bandpass(int order, double low_hz, double high_hz, double fs) {
  require(order >= 1, ErrorCode::InvalidArgument, "filter order must be >= 1");
  require(fs > 0.0, ErrorCode::InvalidArgument, "sampling rate must be positive");
  require(low_hz > 0.0 && low_hz < high_hz && high_hz < fs / 2.0, ErrorCode::InvalidArgument,
          "band-pass edges must satisfy 0 < low < high < Nyquist (" + std::to_string(fs / 2.0) +
              " Hz)");

  const double w1 = prewarp(low_hz, fs);
  const double w2 = prewarp(high_hz, fs);
  const double bw = w2 - w1;
  const double w0_sq = w1 * w2;

  std::vector<cplx> digital;
  for (const auto& p : prototype_poles(order)) {
    const cplx half = p * bw / 2.0;
    const cplx root = std::sqrt(half * half - w0_sq);
    digital.push_back(bilinear(half + root, fs));
    digital.push_back(bilinear(half - root, fs));
  }

  std::vector<cplx> upper;
  std::vector<double> reals;
  pair_poles(digital, upper, reals);

  SosFilter sos;
  for (const auto& p : upper) {
    sos.push_back({1.0, 0.0, -1.0, -2.0 * p.real(), std::norm(p)});
  }
  for (std::size_t i = 0; i + 1 < reals.size(); i += 2) {
    sos.push_back({1.0, 0.0, -1.0, -(reals[i] + reals[i + 1]), reals[i] * reals[i + 1]});
  }
  const double center_hz = std::atan(std::sqrt(w0_sq) / (2.0 * fs)) * fs / std::numbers::pi;
  normalize_gain(sos, center_hz, fs);
  return sos;
}

SosFilter butterworth_lowpass(int order, double cutoff_hz, double fs) {
  require(order >= 1, ErrorCode::InvalidArgument, "filter order must be >= 1");
  require(cutoff_hz > 0.0 && cutoff_hz < fs / 2.0, ErrorCode::InvalidArgument,
          "low-pass cutoff must lie in (0, Nyquist)");
  const double wc = prewarp(cutoff_hz, fs);
  std::vector<cplx> digital;
  for (const auto& p : prototype_poles(order)) digital.push_back(bilinear(wc * p, fs));

  std::vector<cplx> upper;
  std::vector<double> reals;
  pair_poles(digital, upper, reals);

  SosFilter sos;
  for (const auto& p : upper) sos.push_back({1.0, 2.0, 1.0, -2.0 * p.real(), std::norm(p)});
  for (double r : reals) sos.push_back({1.0, 1.0, 0.0, -r, 0.0});
  normalize_gain(sos, 0.0, fs);
  return sos;
}

std::complex<double> frequency_response(const SosFilter& sos, double freq_hz, double fs) {
  const cplx zinv = std::polar(1.0, -2.0 * std::numbers::pi * freq_hz / fs);
  const cplx zinv2 = zinv * zinv;
  cplx h = 1.0;
  for (const auto& s : sos) {
    h *= (s.b0 + s.b1 * zinv + s.b2 * zinv2) / (1.0 + s.a1 * zinv + s.a2 * zinv2);
  }
  return h;
}

Eigen::VectorXd sosfilt(const SosFilter& sos, const Eigen::Ref<const Eigen::VectorXd>& x) {
  return run_sections(sos, x, std::vector<std::array<double, 2>>(sos.size(), {0.0, 0.0}));
}

Eigen::VectorXd filtfilt(const SosFilter& sos, const Eigen::Ref<const Eigen::VectorXd>& x) {
  const Eigen::Index n = x.size();
  require(n >= 2, ErrorCode::TooShort, "signal too short to filter");
  const Eigen::Index pad =
      std::min<Eigen::Index>(3 * (2 * static_cast<Eigen::Index>(sos.size()) + 1), n - 1);

  Eigen::VectorXd ext(n + 2 * pad);
  for (Eigen::Index i = 0; i < pad; ++i) {
    ext(i) = 2.0 * x(0) - x(pad - i);
    ext(n + pad + i) = 2.0 * x(n - 1) - x(n - 2 - i);
  }
  ext.segment(pad, n) = x;

  const auto zi = step_initial_states(sos);
  auto scaled = [&zi](double v) {
    auto s = zi;
    for (auto& st : s) {
      st[0] *= v;
      st[1] *= v;
    }
    return s;
  };

  Eigen::VectorXd fwd = run_sections(sos, ext, scaled(ext(0)));
  Eigen::VectorXd rev = fwd.reverse();
  Eigen::VectorXd back = run_sections(sos, rev, scaled(rev(0)));
  return back.reverse().segment(pad, n);
}

EegRecording bandpass_filter(const EegRecording& recording, const FilterSpec& spec) {
  recording.validate();
  const double nyquist = recording.sampling_rate / 2.0;
  require(spec.high_hz < nyquist, ErrorCode::InvalidArgument,
          "band edge " + std::to_string(spec.high_hz) + " Hz at or above Nyquist " +
              std::to_string(nyquist) + " Hz");
  require(recording.n_samples() > 3 * spec.order, ErrorCode::TooShort,
          "recording too short for a stable order-" + std::to_string(spec.order) + " filter");

  const SosFilter sos =
      butterworth_bandpass(spec.order, spec.low_hz, spec.high_hz, recording.sampling_rate);
  EegRecording out = recording;
  for (Eigen::Index c = 0; c < recording.n_channels(); ++c) {
    out.samples.row(c) = filtfilt(sos, recording.samples.row(c).transpose()).transpose();
  }
  return out;
}

EegRecording resample(const EegRecording& recording, double target_rate) {
  recording.validate();
  require(target_rate > 0.0 && std::isfinite(target_rate), ErrorCode::InvalidArgument,
          "target rate must be positive");
  if (target_rate == recording.sampling_rate) return recording;

  const Eigen::Index n = recording.n_samples();
  require(n >= 1, ErrorCode::TooShort, "cannot resample an empty recording");

  Eigen::MatrixXd source = recording.samples;
  if (target_rate < recording.sampling_rate && n > 12) {
    const SosFilter aa = butterworth_lowpass(4, 0.45 * target_rate, recording.sampling_rate);
    for (Eigen::Index c = 0; c < source.rows(); ++c) {
      source.row(c) = filtfilt(aa, source.row(c).transpose()).transpose();
    }
  }

  const double ratio = recording.sampling_rate / target_rate;
  const auto n_out = static_cast<Eigen::Index>(
      std::llround(static_cast<double>(n) * target_rate / recording.sampling_rate));
  EegRecording out;
  out.channel_names = recording.channel_names;
  out.sampling_rate = target_rate;
  out.samples.resize(recording.n_channels(), n_out);
  for (Eigen::Index k = 0; k < n_out; ++k) {
    const double pos = static_cast<double>(k) * ratio;
    const auto i = static_cast<Eigen::Index>(std::floor(pos));
    if (i >= n - 1) {
      out.samples.col(k) = source.col(n - 1);
    } else {
      const double frac = pos - static_cast<double>(i);
      out.samples.col(k) = (1.0 - frac) * source.col(i) + frac * source.col(i + 1);
    }
  }
  return out;
}

Eigen::VectorXd welch_density(const Eigen::Ref<const Eigen::VectorXd>& x, double fs,
                              const WelchParams& params) {
  const Eigen::Index seg = params.segment_length;
  require(seg >= 8, ErrorCode::InvalidArgument, "segment length must be >= 8");
  require(seg <= x.size(), ErrorCode::TooShort,
          "segment length " + std::to_string(seg) + " exceeds signal length " +
              std::to_string(x.size()));
  require(params.overlap_fraction >= 0.0 && params.overlap_fraction < 1.0,
          ErrorCode::InvalidArgument, "overlap fraction must lie in [0, 1)");
  require(fs > 0.0, ErrorCode::InvalidArgument, "sampling rate must be positive");

  const auto noverlap =
      static_cast<Eigen::Index>(std::floor(params.overlap_fraction * static_cast<double>(seg)));
  const Eigen::Index step = std::max<Eigen::Index>(1, seg - noverlap);
  const Eigen::Index n_segments = 1 + (x.size() - seg) / step;
  const Eigen::Index n_bins = seg / 2 + 1;
  const Eigen::VectorXd window = periodic_hann(seg);
  const double scale = 1.0 / (fs * window.squaredNorm());
  const double df = fs / static_cast<double>(seg);

  Eigen::FFT<double> fft;
  std::vector<double> buffer(static_cast<std::size_t>(seg));
  std::vector<std::complex<double>> spectrum;
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(n_bins);

  for (Eigen::Index s = 0; s < n_segments; ++s) {
    const auto segment = x.segment(s * step, seg);
    const double mean = segment.mean();
    for (Eigen::Index i = 0; i < seg; ++i) {
      buffer[static_cast<std::size_t>(i)] = (segment(i) - mean) * window(i);
    }
    fft.fwd(spectrum, buffer);
    for (Eigen::Index k = 0; k < n_bins; ++k) {
      double p = std::norm(spectrum[static_cast<std::size_t>(k)]) * scale;
      const bool nyquist_bin = (seg % 2 == 0) && k == seg / 2;
      if (k != 0 && !nyquist_bin) p *= 2.0;
      acc(k) += p;
    }
    acc(0) += mean * mean / df;
  }
  return acc / static_cast<double>(n_segments);
}

PsdEstimate welch_psd(const EegRecording& recording, const WelchParams& params) {
  recording.validate();
  PsdEstimate psd;
  psd.channel_names = recording.channel_names;
  psd.segment_length = params.segment_length;
  psd.overlap_fraction = params.overlap_fraction;
  const Eigen::Index n_bins = params.segment_length / 2 + 1;
  psd.frequencies_hz.resize(n_bins);
  for (Eigen::Index k = 0; k < n_bins; ++k) {
    psd.frequencies_hz(k) =
        static_cast<double>(k) * recording.sampling_rate / static_cast<double>(params.segment_length);
  }
  psd.power.resize(recording.n_channels(), n_bins);
  for (Eigen::Index c = 0; c < recording.n_channels(); ++c) {
    psd.power.row(c) =
        welch_density(recording.samples.row(c).transpose(), recording.sampling_rate, params)
            .transpose();
  }
  return psd;
}

Eigen::VectorXd band_power(const PsdEstimate& psd, const BandDefinition& band) {
  require(band.low_hz >= 0.0 && band.low_hz < band.high_hz, ErrorCode::InvalidArgument,
          "band '" + band.name + "' must satisfy 0 <= low < high");
  const Eigen::Index n_bins = psd.frequencies_hz.size();
  require(n_bins >= 2, ErrorCode::InvalidArgument, "PSD has fewer than two bins");
  const double nyquist = psd.frequencies_hz(n_bins - 1);
  const double eps = 1e-9 * std::max(1.0, nyquist);
  require(band.high_hz <= nyquist + eps, ErrorCode::InvalidArgument,
          "band '" + band.name + "' extends beyond the PSD range (Nyquist " +
              std::to_string(nyquist) + " Hz)");

  Eigen::VectorXd out = Eigen::VectorXd::Zero(psd.power.rows());
  Eigen::Index prev = -1;
  for (Eigen::Index k = 0; k < n_bins; ++k) {
    const double f = psd.frequencies_hz(k);
    if (f < band.low_hz - eps || f > band.high_hz + eps) continue;
    if (prev >= 0) {
      const double h = f - psd.frequencies_hz(prev);
      out += 0.5 * h * (psd.power.col(prev) + psd.power.col(k));
    }
    prev = k;
  }
  return out;
}

Eigen::VectorXd total_power(const PsdEstimate& psd) {
  return psd.power.rowwise().sum() * psd.resolution();
}

}  // namespace emoeeg
