#include "cogload/physio.hpp"

#include "cogload/bandpower.hpp"
#include "cogload/errors.hpp"
#include "cogload/filter.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

namespace cogload {

namespace {

/// Centered rolling maximum over a window of `half` samples on each side,
/// monotone-deque, O(n).
Eigen::VectorXd rolling_max(const Eigen::VectorXd& x, Eigen::Index half) {
  const auto n = x.size();
  Eigen::VectorXd out(n);
  std::deque<Eigen::Index> dq;
  Eigen::Index right = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index hi = std::min(n - 1, i + half);
    for (; right <= hi; ++right) {
      while (!dq.empty() && x[dq.back()] <= x[right]) dq.pop_back();
      dq.push_back(right);
    }
    const Eigen::Index lo = i - half;
    while (!dq.empty() && dq.front() < lo) dq.pop_front();
    out[i] = x[dq.front()];
  }
  return out;
}

}  // namespace

RRSeries detect_r_peaks(const Eigen::VectorXd& ecg_window, double rate_hz) {
  if (!(rate_hz > 0.0)) throw validation_error("detect_r_peaks rate_hz must be positive");
  const double duration = static_cast<double>(ecg_window.size()) / rate_hz;
  if (duration < 3.0) {
    throw validation_error("ECG window of " + std::to_string(duration) +
                           " s is too short for beat detection (needs 3 s)");
  }
  // A constant trace has no beats; skip straight to the error instead of
  // thresholding numerical dust.
  const double spread = ecg_window.maxCoeff() - ecg_window.minCoeff();
  if (spread <= 0.0) throw data_error("insufficient beats: flat ECG signal");

  const auto qrs = design_bandpass(5.0, 20.0, rate_hz);
  const Eigen::VectorXd squared = filtfilt(qrs, ecg_window).array().square();

  const auto half_window = static_cast<Eigen::Index>(std::llround(rate_hz));  // +-1 s
  const Eigen::VectorXd roll = rolling_max(squared, half_window);
  const double floor = 1e-9 * squared.maxCoeff();

  const auto refractory = static_cast<Eigen::Index>(std::llround(0.25 * rate_hz));
  std::vector<Eigen::Index> peaks;
  // Strongest sample of each contiguous supra-threshold run is a candidate;
  // candidates inside the refractory span keep whichever is larger.
  Eigen::Index i = 0;
  const auto n = squared.size();
  while (i < n) {
    const double thr = 0.5 * roll[i];
    if (squared[i] >= thr && roll[i] > floor) {
      Eigen::Index best = i;
      Eigen::Index j = i;
      while (j < n && squared[j] >= 0.5 * roll[j] && roll[j] > floor) {
        if (squared[j] > squared[best]) best = j;
        ++j;
      }
      if (!peaks.empty() && best - peaks.back() < refractory) {
        if (squared[best] > squared[peaks.back()]) peaks.back() = best;
      } else {
        peaks.push_back(best);
      }
      i = j;
    } else {
      ++i;
    }
  }

  if (peaks.size() < 2) throw data_error("insufficient beats: fewer than 2 R peaks detected");

  RRSeries rr;
  for (const auto p : peaks) {
    rr.r_peak_times.push_back(static_cast<double>(p) / rate_hz);
  }
  for (std::size_t k = 1; k < rr.r_peak_times.size(); ++k) {
    const double interval = rr.r_peak_times[k] - rr.r_peak_times[k - 1];
    rr.rr_intervals.push_back(interval);
    if (interval < 0.3 || interval > 2.0) ++rr.n_implausible;
  }
  return rr;
}

FeatureVector ecg_features(const RRSeries& rr, double window_seconds) {
  if (rr.rr_intervals.size() < 3) {
    throw data_error("ECG features need at least 3 RR intervals, got " +
                     std::to_string(rr.rr_intervals.size()));
  }
  if (window_seconds < 10.0) {
    throw validation_error("low-frequency HRV needs a window of at least 10 s");
  }

  double mean_rr = 0.0;
  for (const double v : rr.rr_intervals) mean_rr += v;
  mean_rr /= static_cast<double>(rr.rr_intervals.size());
  const double hr_bpm = 60.0 / mean_rr;

  double ssq = 0.0;
  for (std::size_t i = 1; i < rr.rr_intervals.size(); ++i) {
    const double d = rr.rr_intervals[i] - rr.rr_intervals[i - 1];
    ssq += d * d;
  }
  const double rmssd_ms =
      1000.0 * std::sqrt(ssq / static_cast<double>(rr.rr_intervals.size() - 1));

  // RR tachogram: interval value at the time of the closing beat, linearly
  // interpolated onto a 4 Hz grid, constant beyond the ends.
  constexpr double kResampleHz = 4.0;
  const double t0 = rr.r_peak_times[1];
  const double t1 = rr.r_peak_times.back();
  const auto n_grid = std::max<Eigen::Index>(
      8, static_cast<Eigen::Index>(std::floor((t1 - t0) * kResampleHz)) + 1);
  Eigen::VectorXd tach(n_grid);
  std::size_t seg = 1;
  for (Eigen::Index g = 0; g < n_grid; ++g) {
    const double t = t0 + static_cast<double>(g) / kResampleHz;
    while (seg + 1 < rr.r_peak_times.size() && rr.r_peak_times[seg + 1] < t) ++seg;
    const double ta = rr.r_peak_times[seg];
    if (t <= ta || seg + 1 >= rr.r_peak_times.size()) {
      tach[g] = rr.rr_intervals[seg - 1];
    } else {
      const double tb = rr.r_peak_times[seg + 1];
      const double frac = (t - ta) / (tb - ta);
      tach[g] = rr.rr_intervals[seg - 1] +
                frac * (rr.rr_intervals[seg] - rr.rr_intervals[seg - 1]);
    }
  }
  // 10 s tachograms cannot hold a cycle of the 0.003 Hz floor; that
  // compromise is owned here, so the minimum-cycles gate is bypassed.
  const double hrv_lf =
      detail::band_power_between_unchecked(tach, 0.003, 0.1, kResampleHz);

  FeatureVector out;
  out.values.resize(3);
  out.values << hr_bpm, hrv_lf, rmssd_ms;
  out.names = {"ECG:hr_bpm", "ECG:hrv_lf", "ECG:rmssd_ms"};
  return out;
}

FeatureVector gsr_features(const Eigen::VectorXd& gsr_window, double rate_hz) {
  if (gsr_window.size() == 0) throw validation_error("GSR window is empty");
  if (!(rate_hz > 0.0)) throw validation_error("gsr_features rate_hz must be positive");
  const double duration = static_cast<double>(gsr_window.size()) / rate_hz;
  if (duration < 10.0) {
    throw validation_error("GSR window of " + std::to_string(duration) +
                           " s is too short for SCR/SCL bands (needs 10 s)");
  }
  FeatureVector out;
  out.values.resize(3);
  out.values << gsr_window.mean(),
      band_power_between(gsr_window, 0.5, 2.0, rate_hz),
      band_power_between(gsr_window, 0.1, 0.5, rate_hz);
  out.names = {"GSR:mean_amplitude", "GSR:scr_power", "GSR:scl_power"};
  return out;
}

}  // namespace cogload
