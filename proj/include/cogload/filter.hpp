#pragma once

#include "cogload/bands.hpp"
#include "cogload/types.hpp"

#include <Eigen/Core>

#include <vector>

namespace cogload {

/// Butterworth band-pass, applied zero-phase (forward pass, then a second
/// pass over the time-reversed output). `order` is the low-pass prototype
/// order; the band-pass realization has 2*order poles.
struct FilterSpec {
  int order = 4;  // positive even
};

/// One second-order section, direct form II transposed.
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
};

/// A designed band-pass as a cascade of biquads. Stateless application only;
/// safe for concurrent use.
struct BiquadCascade {
  std::vector<Biquad> sections;
  double max_pole_radius = 0.0;

  /// Samples for the slowest pole to decay to 1e-8, used as the reflect
  /// padding length for zero-phase application.
  Eigen::Index settle_samples() const;
};

/// Designs the band-pass via the analog prototype, band transform, and
/// bilinear mapping; gain is normalized to exactly 1 at the geometric center
/// frequency. Throws validation_error when the band is invalid for the rate
/// or the design is unstable.
BiquadCascade design_bandpass(double low_hz, double high_hz, double rate_hz,
                              const FilterSpec& spec = {});

/// Single forward pass, zero initial state.
Eigen::VectorXd filter_forward(const BiquadCascade& cascade, const Eigen::VectorXd& x);

/// Zero-phase two-pass filtering with repeated odd-reflection padding of one
/// settle length at each end (the extension tiles the signal, so padding may
/// exceed the signal length).
Eigen::VectorXd filtfilt(const BiquadCascade& cascade, const Eigen::VectorXd& x);

/// Per-channel zero-phase band-pass; rows are channels.
Eigen::MatrixXd bandpass(const Eigen::MatrixXd& channels_by_samples, const BandDef& band,
                         double rate_hz, const FilterSpec& spec = {});

Recording bandpass(const Recording& rec, const BandDef& band, const FilterSpec& spec = {});
EpochSet bandpass(const EpochSet& epochs, const BandDef& band, const FilterSpec& spec = {});

}  // namespace cogload
