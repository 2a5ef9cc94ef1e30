#include "cogload/synth.hpp"

#include "cogload/errors.hpp"
#include "cogload/filter.hpp"
#include "cogload/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace cogload {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<GroundTruthSegment> calibration_segments(const SynthConfig& cfg) {
  const auto block_samples = static_cast<std::int64_t>(
      std::llround(cfg.letters_per_block * cfg.letter_spacing_s * cfg.rate_hz));
  std::vector<GroundTruthSegment> segments;
  for (int b = 0; b < cfg.n_blocks; ++b) {
    GroundTruthSegment seg;
    seg.start_sample = b * block_samples;
    seg.end_sample = (b + 1) * block_samples;
    seg.label = b % 2;  // alternating 0-back / 2-back
    seg.level = static_cast<double>(seg.label);
    segments.push_back(seg);
  }
  return segments;
}

std::vector<GroundTruthSegment> use_segments(const SynthConfig& cfg) {
  const auto task_samples =
      static_cast<std::int64_t>(std::llround(cfg.task_seconds * cfg.rate_hz));
  std::vector<GroundTruthSegment> segments;
  for (std::size_t i = 0; i < cfg.task_loads.size(); ++i) {
    GroundTruthSegment seg;
    seg.start_sample = static_cast<std::int64_t>(i) * task_samples;
    seg.end_sample = seg.start_sample + task_samples;
    seg.level = cfg.task_loads[i];
    seg.label = cfg.task_loads[i] >= 0.5 ? 1 : 0;
    segments.push_back(seg);
  }
  return segments;
}

double segment_level(const std::vector<GroundTruthSegment>& segments, std::int64_t sample) {
  for (const auto& seg : segments) {
    if (sample >= seg.start_sample && sample < seg.end_sample) return seg.level;
  }
  return segments.back().level;
}

/// EEG, one channel block: band-limited sources with level-driven variance
/// plus white sensor noise (plus the context shift when present).
Eigen::MatrixXd synth_eeg(const SynthConfig& cfg,
                          const std::vector<GroundTruthSegment>& segments,
                          std::int64_t n_samples, rng::Engine& engine) {
  const auto n_eeg = cfg.n_eeg_channels;
  Eigen::MatrixXd eeg = Eigen::MatrixXd::Zero(n_eeg, n_samples);

  for (const auto& source : cfg.sources) {
    Eigen::VectorXd wave(n_samples);
    for (std::int64_t t = 0; t < n_samples; ++t) {
      const double level = segment_level(segments, t);
      const double var =
          source.variance_low + level * (source.variance_high - source.variance_low);
      wave[t] = std::sqrt(var) * rng::gaussian(engine);
    }
    const auto cascade = design_bandpass(source.band.low_hz, source.band.high_hz, cfg.rate_hz);
    wave = filtfilt(cascade, wave);
    eeg.noalias() += source.pattern * wave.transpose();
  }

  const double noise_std = std::sqrt(cfg.noise_variance);
  for (int c = 0; c < n_eeg; ++c) {
    for (std::int64_t t = 0; t < n_samples; ++t) {
      eeg(c, t) += noise_std * rng::gaussian(engine);
    }
  }

  if (cfg.context_shift) {
    const double shift_std = std::sqrt(cfg.context_shift->variance);
    Eigen::VectorXd wave(n_samples);
    for (std::int64_t t = 0; t < n_samples; ++t) {
      wave[t] = shift_std * rng::gaussian(engine);
    }
    eeg.noalias() += cfg.context_shift->direction * wave.transpose();
  }
  return eeg;
}

/// Pulse train with level-dependent RR jitter; Gaussian R-wave bumps.
Eigen::VectorXd synth_ecg(const SynthConfig& cfg,
                          const std::vector<GroundTruthSegment>& segments,
                          std::int64_t n_samples, rng::Engine& engine,
                          std::vector<double>* peak_times) {
  Eigen::VectorXd ecg = Eigen::VectorXd::Zero(n_samples);
  const double duration = static_cast<double>(n_samples) / cfg.rate_hz;
  const double sigma_s = 0.012;  // R-wave width
  double t = 0.4;
  while (t < duration) {
    peak_times->push_back(t);
    const auto center = static_cast<std::int64_t>(std::llround(t * cfg.rate_hz));
    const auto span = static_cast<std::int64_t>(std::llround(5.0 * sigma_s * cfg.rate_hz));
    for (std::int64_t i = std::max<std::int64_t>(0, center - span);
         i <= std::min(n_samples - 1, center + span); ++i) {
      const double dt = (static_cast<double>(i) / cfg.rate_hz) - t;
      ecg[i] += cfg.ecg.peak_amplitude * std::exp(-dt * dt / (2.0 * sigma_s * sigma_s));
    }
    const double level =
        segment_level(segments, std::min(center, n_samples - 1));
    const double jitter =
        cfg.ecg.jitter_low_s + level * (cfg.ecg.jitter_high_s - cfg.ecg.jitter_low_s);
    const double rr = std::max(0.3, cfg.ecg.base_rr_s + jitter * rng::gaussian(engine));
    t += rr;
  }
  for (std::int64_t i = 0; i < n_samples; ++i) {
    ecg[i] += cfg.ecg.noise_std * rng::gaussian(engine);
  }
  return ecg;
}

/// Baseline plus slow drift plus exponential-decay conductance responses at
/// a level-dependent Poisson rate.
Eigen::VectorXd synth_gsr(const SynthConfig& cfg,
                          const std::vector<GroundTruthSegment>& segments,
                          std::int64_t n_samples, rng::Engine& engine) {
  const double duration = static_cast<double>(n_samples) / cfg.rate_hz;
  Eigen::VectorXd gsr = Eigen::VectorXd::Constant(n_samples, cfg.gsr.baseline_us);

  // Slow drift below the SCL band.
  const double phase1 = kTwoPi * rng::uniform01(engine);
  const double phase2 = kTwoPi * rng::uniform01(engine);
  for (std::int64_t i = 0; i < n_samples; ++i) {
    const double t = static_cast<double>(i) / cfg.rate_hz;
    gsr[i] += 0.15 * std::sin(kTwoPi * 0.02 * t + phase1) +
              0.08 * std::sin(kTwoPi * 0.045 * t + phase2);
  }

  // Conductance responses: fast rise, ~1 s decay.
  double t = 0.0;
  while (t < duration) {
    const auto sample = static_cast<std::int64_t>(std::llround(t * cfg.rate_hz));
    const double level = segment_level(segments, std::min(sample, n_samples - 1));
    const double rate = cfg.gsr.scr_rate_low_hz +
                        level * (cfg.gsr.scr_rate_high_hz - cfg.gsr.scr_rate_low_hz);
    t += rng::exponential(engine, std::max(1e-6, rate));
    if (t >= duration) break;
    const auto onset = static_cast<std::int64_t>(std::llround(t * cfg.rate_hz));
    const auto span = static_cast<std::int64_t>(std::llround(8.0 * cfg.rate_hz));
    for (std::int64_t i = onset; i <= std::min(n_samples - 1, onset + span); ++i) {
      const double dt = (static_cast<double>(i) / cfg.rate_hz) - t;
      gsr[i] += cfg.gsr.scr_amplitude_us * (1.0 - std::exp(-dt / 0.1)) * std::exp(-dt / 1.0);
    }
  }
  for (std::int64_t i = 0; i < n_samples; ++i) {
    gsr[i] += cfg.gsr.noise_std * rng::gaussian(engine);
  }
  return gsr;
}

SynthSession assemble_session(const SynthConfig& cfg,
                              const std::vector<GroundTruthSegment>& segments,
                              std::int64_t n_samples) {
  rng::Engine engine(cfg.seed);
  SynthSession session;
  session.ground_truth = segments;

  const auto eeg = synth_eeg(cfg, segments, n_samples, engine);
  const auto ecg = synth_ecg(cfg, segments, n_samples, engine, &session.ecg_peak_times_s);
  const auto gsr = synth_gsr(cfg, segments, n_samples, engine);

  Recording rec;
  rec.rate_hz = cfg.rate_hz;
  const auto labels = default_eeg_labels();
  for (int c = 0; c < cfg.n_eeg_channels; ++c) {
    rec.channel_labels.push_back(
        c < static_cast<int>(labels.size()) ? labels[static_cast<std::size_t>(c)]
                                            : "EEG" + std::to_string(c + 1));
    rec.modalities.push_back(Modality::EEG);
  }
  rec.channel_labels.push_back("ECG");
  rec.modalities.push_back(Modality::ECG);
  rec.channel_labels.push_back("GSR");
  rec.modalities.push_back(Modality::GSR);

  rec.samples.resize(cfg.n_eeg_channels + 2, n_samples);
  rec.samples.topRows(cfg.n_eeg_channels) = eeg;
  rec.samples.row(cfg.n_eeg_channels) = ecg.transpose();
  rec.samples.row(cfg.n_eeg_channels + 1) = gsr.transpose();
  validate(rec);
  session.recording = std::move(rec);
  return session;
}

Eigen::VectorXd pattern_for_prefixes(const std::vector<std::string>& prefixes) {
  const auto labels = default_eeg_labels();
  Eigen::VectorXd p = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (const auto& prefix : prefixes) {
      if (labels[i].rfind(prefix, 0) == 0) {
        p[static_cast<Eigen::Index>(i)] = 1.0;
        break;
      }
    }
  }
  return p / p.norm();
}

}  // namespace

void validate(const SynthConfig& cfg) {
  if (!(cfg.rate_hz > 80.0)) {
    throw validation_error("synth rate_hz must exceed 80 Hz to carry the gamma band");
  }
  if (cfg.n_eeg_channels < 2) throw validation_error("synth needs at least 2 EEG channels");
  if (cfg.noise_variance < 0.0) throw validation_error("noise variance must be >= 0");
  for (const auto& s : cfg.sources) {
    if (s.variance_low < 0.0 || s.variance_high < 0.0) {
      throw validation_error("source variances must be >= 0");
    }
    if (s.pattern.size() != cfg.n_eeg_channels) {
      throw validation_error("source pattern length must equal the EEG channel count");
    }
    if (!(s.pattern.norm() > 0.0)) throw validation_error("source pattern must be non-zero");
  }
  if (cfg.context_shift) {
    if (cfg.context_shift->direction.size() != cfg.n_eeg_channels) {
      throw validation_error("context shift direction length must equal the EEG channel count");
    }
    if (cfg.context_shift->variance < 0.0) {
      throw validation_error("context shift variance must be >= 0");
    }
  }
  if (cfg.n_blocks < 2 || cfg.letters_per_block < 1 || !(cfg.letter_spacing_s > 0.0)) {
    throw validation_error("calibration protocol parameters must be positive");
  }
  if (cfg.task_loads.empty()) throw validation_error("task_loads must be non-empty");
  for (const double l : cfg.task_loads) {
    if (l < 0.0 || l > 1.0) throw validation_error("task loads must lie in [0,1]");
  }
  if (!(cfg.task_seconds > 0.0)) throw validation_error("task_seconds must be positive");
}

int SynthSession::label_at(std::int64_t sample) const {
  for (const auto& seg : ground_truth) {
    if (sample >= seg.start_sample && sample < seg.end_sample) return seg.label;
  }
  return ground_truth.back().label;
}

double SynthSession::level_at(std::int64_t sample) const {
  return segment_level(ground_truth, sample);
}

std::vector<std::string> default_eeg_labels() {
  return {"C6",  "CP4", "CPz", "CP3", "P5",  "P3",  "P1",  "Pz",  "P2",  "P4",
          "P6",  "PO7", "PO8", "Oz",  "F3",  "Fz",  "F4",  "FT8", "FC6", "FC4",
          "FCz", "FC3", "FC5", "FT7", "C5",  "C3",  "C1",  "Cz",  "C2",  "C4"};
}

Eigen::VectorXd frontal_pattern() { return pattern_for_prefixes({"F"}); }
Eigen::VectorXd parietal_pattern() { return pattern_for_prefixes({"P", "Oz"}); }
Eigen::VectorXd central_pattern() { return pattern_for_prefixes({"C"}); }

SynthConfig default_synth_config(std::uint64_t seed) {
  SynthConfig cfg;
  cfg.seed = seed;
  const auto& bands = analysis_bands();
  cfg.sources = {
      {bands[0], Eigen::VectorXd::Constant(30, 1.0 / std::sqrt(30.0)), 1.0, 1.0},
      {bands[1], frontal_pattern(), 1.0, 2.6},
      {bands[2], parietal_pattern(), 2.2, 0.9},
      {bands[3], central_pattern(), 0.8, 2.0},
      {bands[4], central_pattern(), 0.7, 1.9},
  };
  return cfg;
}

SynthConfig null_synth_config(std::uint64_t seed) {
  SynthConfig cfg = default_synth_config(seed);
  for (auto& s : cfg.sources) s.variance_high = s.variance_low;
  cfg.ecg.jitter_high_s = cfg.ecg.jitter_low_s;
  cfg.gsr.scr_rate_high_hz = cfg.gsr.scr_rate_low_hz;
  return cfg;
}

SynthConfig transfer_synth_config(std::uint64_t seed) {
  SynthConfig cfg = default_synth_config(seed);
  Eigen::VectorXd direction = frontal_pattern() + parietal_pattern();
  cfg.context_shift = ContextShift{direction / direction.norm(), 12.0};
  cfg.task_loads = {0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0};
  return cfg;
}

SynthSession gen_calibration(const SynthConfig& cfg) {
  validate(cfg);
  SynthConfig calib_cfg = cfg;
  calib_cfg.context_shift.reset();  // shifts belong to the use context only
  const auto segments = calibration_segments(calib_cfg);
  const auto n_samples = segments.back().end_sample;
  auto session = assemble_session(calib_cfg, segments, n_samples);

  const auto spacing =
      static_cast<std::int64_t>(std::llround(cfg.letter_spacing_s * cfg.rate_hz));
  for (int b = 0; b < cfg.n_blocks; ++b) {
    const auto& seg = segments[static_cast<std::size_t>(b)];
    for (int l = 0; l < cfg.letters_per_block; ++l) {
      session.events.events.push_back(
          {seg.start_sample + l * spacing, seg.label == 0 ? "0-back" : "2-back"});
    }
  }
  validate(session.events);
  return session;
}

SynthSession gen_use_session(const SynthConfig& cfg) {
  validate(cfg);
  const auto segments = use_segments(cfg);
  const auto n_samples = segments.back().end_sample;
  auto session = assemble_session(cfg, segments, n_samples);

  TaskIntervals tasks;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    tasks.intervals.push_back({static_cast<int>(i + 1), segments[i].start_sample,
                               segments[i].end_sample, true});
  }
  validate(tasks);
  session.tasks = std::move(tasks);
  return session;
}

}  // namespace cogload
