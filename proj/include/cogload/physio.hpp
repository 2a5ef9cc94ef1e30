#pragma once

#include "cogload/features.hpp"

#include <Eigen/Core>

namespace cogload {

/// R-peak times and the RR intervals between them, in seconds. Intervals
/// outside 0.3-2.0 s are physiologically implausible; they are counted, not
/// rejected.
struct RRSeries {
  std::vector<double> r_peak_times;
  std::vector<double> rr_intervals;
  int n_implausible = 0;
};

/// Beat detection on a single ECG channel: 5-20 Hz band-pass, squared, peaks
/// above half the rolling 2 s maximum, 250 ms refractory. The window must be
/// at least 3 s long; fewer than 2 peaks is an error.
RRSeries detect_r_peaks(const Eigen::VectorXd& ecg_window, double rate_hz);

/// HR (bpm), low-frequency HRV power, and RMSSD (ms). RMSSD needs >= 3 RR
/// intervals; the low-frequency power needs a >= 10 s window and is computed
/// on the RR tachogram resampled to 4 Hz, band 0.003-0.1 Hz.
FeatureVector ecg_features(const RRSeries& rr, double window_seconds);

/// Mean amplitude, skin conductance response power (0.5-2 Hz), and skin
/// conductance level power (0.1-0.5 Hz). Needs a >= 10 s window.
FeatureVector gsr_features(const Eigen::VectorXd& gsr_window, double rate_hz);

}  // namespace cogload
