#pragma once

#include "cogload/bands.hpp"
#include "cogload/types.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <vector>

namespace cogload {

/// One band-limited EEG source: white noise with class-dependent variance,
/// band-passed, projected through a fixed spatial pattern.
struct SynthSource {
  BandDef band;
  Eigen::VectorXd pattern;  // over EEG channels, unit norm
  double variance_low = 1.0;
  double variance_high = 1.0;
};

/// Broadband noise along a fixed direction, present only in use sessions.
/// Exercises the invariant-CSP path: the direction shows up as the leading
/// component of the covariance shift between contexts.
struct ContextShift {
  Eigen::VectorXd direction;  // unit norm
  double variance = 0.0;
};

struct EcgParams {
  double base_rr_s = 1.0;
  double jitter_low_s = 0.015;   // per-beat RR standard deviation, low class
  double jitter_high_s = 0.05;
  double peak_amplitude = 1.0;
  double noise_std = 0.02;
};

struct GsrParams {
  double baseline_us = 2.0;
  double scr_rate_low_hz = 0.1;  // conductance-response events per second
  double scr_rate_high_hz = 0.35;
  double scr_amplitude_us = 0.6;
  double noise_std = 0.01;
};

struct SynthConfig {
  std::uint64_t seed = 42;
  double rate_hz = 256.0;  // must support the gamma band (> 80 Hz)
  int n_eeg_channels = 30;
  std::vector<SynthSource> sources;
  double noise_variance = 1.0;
  std::optional<ContextShift> context_shift;
  EcgParams ecg;
  GsrParams gsr;

  // Calibration protocol: alternating low/high blocks of letter events.
  int n_blocks = 6;
  int letters_per_block = 60;
  double letter_spacing_s = 2.0;

  // Use sessions: one segment per task, workload level in [0,1] each.
  std::vector<double> task_loads = {0.15, 0.65, 0.25, 0.25, 1.0, 0.5, 0.35};
  double task_seconds = 60.0;
};

void validate(const SynthConfig& cfg);

/// Per-segment ground truth: the workload level driving the generator and
/// its binary class (level >= 0.5).
struct GroundTruthSegment {
  std::int64_t start_sample = 0;
  std::int64_t end_sample = 0;
  double level = 0.0;
  int label = 0;
};

struct SynthSession {
  Recording recording;  // EEG channels + 1 ECG + 1 GSR
  EventList events;
  std::optional<TaskIntervals> tasks;
  std::vector<GroundTruthSegment> ground_truth;
  std::vector<double> ecg_peak_times_s;  // generator truth for detector scoring

  int label_at(std::int64_t sample) const;
  double level_at(std::int64_t sample) const;
};

/// The default electrode montage (30 standard scalp positions) plus ECG and
/// GSR channels.
std::vector<std::string> default_eeg_labels();

/// Deterministic spatial patterns over the default montage: weight 1 on the
/// named channel group, normalized.
Eigen::VectorXd frontal_pattern();
Eigen::VectorXd parietal_pattern();
Eigen::VectorXd central_pattern();

/// Default effect placement: frontal theta and central beta/gamma variance
/// rise with workload, parietal alpha falls, delta carries no effect. The
/// high-band effects are stronger, so the all5 configuration outperforms
/// low3 downstream.
SynthConfig default_synth_config(std::uint64_t seed);

/// Same protocol with every class effect removed (EEG variances, RR jitter,
/// and SCR rates equal across classes).
SynthConfig null_synth_config(std::uint64_t seed);

/// Default config plus a strong fixed-direction context shift in the use
/// session and binary task loads, for calibration-to-use transfer tests.
SynthConfig transfer_synth_config(std::uint64_t seed);

/// 6 blocks x 60 letters at 2 s spacing, alternating low/high; 360 events.
SynthSession gen_calibration(const SynthConfig& cfg);

/// Back-to-back task segments whose source variances interpolate between the
/// class extremes according to task_loads.
SynthSession gen_use_session(const SynthConfig& cfg);

}  // namespace cogload
