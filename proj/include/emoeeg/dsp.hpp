#pragma once

#include "emoeeg/dataio.hpp"

#include <Eigen/Core>

#include <array>
#include <complex>
#include <string>
#include <vector>

namespace emoeeg {

struct BandDefinition {
  std::string name;
  double low_hz = 0.0;
  double high_hz = 0.0;
};

// Delta 0.5-4, Theta 4-8, Alpha 8-13, Beta 13-30, Gamma 30-45 Hz.
const std::array<BandDefinition, 5>& default_bands();

struct FilterSpec {
  double low_hz = 0.5;
  double high_hz = 45.0;
  int order = 4;

  // Samples at each end of a filtered signal that carry start-up transients.
  int transient_samples() const { return 3 * order; }

  bool operator==(const FilterSpec&) const = default;
};

// One second-order section, a0 normalized to 1.
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
};

using SosFilter = std::vector<Biquad>;

// Digital Butterworth designs via the bilinear transform with pre-warped
// edges. The band-pass prototype of order N yields N sections (2N poles) with
// unit gain at the geometric centre frequency; the low-pass has unit DC gain.
SosFilter butterworth_bandpass(int order, double low_hz, double high_hz, double sampling_rate);
SosFilter butterworth_lowpass(int order, double cutoff_hz, double sampling_rate);

std::complex<double> frequency_response(const SosFilter& sos, double freq_hz,
                                        double sampling_rate);

Eigen::VectorXd sosfilt(const SosFilter& sos, const Eigen::Ref<const Eigen::VectorXd>& x);

// Forward-backward filtering with odd-reflection padding and steady-state
// initial conditions; the result has zero phase and squared magnitude.
Eigen::VectorXd filtfilt(const SosFilter& sos, const Eigen::Ref<const Eigen::VectorXd>& x);

EegRecording bandpass_filter(const EegRecording& recording, const FilterSpec& spec);

// Linear interpolation onto the new grid; downsampling is preceded by a
// zero-phase order-4 Butterworth low-pass at 0.45 * target_rate.
EegRecording resample(const EegRecording& recording, double target_rate);

struct WelchParams {
  int segment_length = 150;
  double overlap_fraction = 0.5;

  bool operator==(const WelchParams&) const = default;
};

struct PsdEstimate {
  std::vector<std::string> channel_names;
  Eigen::VectorXd frequencies_hz;  // 0 .. Nyquist, step fs / segment_length
  Eigen::MatrixXd power;           // n_channels x n_bins, units^2 / Hz
  int segment_length = 0;
  double overlap_fraction = 0.0;

  double resolution() const {
    return frequencies_hz.size() > 1 ? frequencies_hz(1) - frequencies_hz(0) : 0.0;
  }
};

// One-sided Welch estimate for a single signal: periodic Hann window, mean
// averaging over segments, density scaling. Each segment's mean is taken out
// before windowing and its power is booked entirely to the 0 Hz bin, so
// sum(P) * df equals the mean square of the signal.
Eigen::VectorXd welch_density(const Eigen::Ref<const Eigen::VectorXd>& x, double sampling_rate,
                              const WelchParams& params);

PsdEstimate welch_psd(const EegRecording& recording, const WelchParams& params);

// Trapezoidal integral over the grid frequencies inside [low_hz, high_hz].
// Band edges that fall on the grid make adjacent bands exactly additive.
Eigen::VectorXd band_power(const PsdEstimate& psd, const BandDefinition& band);

// Rectangle-rule integral sum(P) * df per channel, the discrete counterpart of
// Parseval's relation for this estimator.
Eigen::VectorXd total_power(const PsdEstimate& psd);

}  // namespace emoeeg
