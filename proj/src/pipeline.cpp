#include "cogload/pipeline.hpp"

#include "cogload/bandpower.hpp"
#include "cogload/errors.hpp"
#include "cogload/stats.hpp"
#include "cogload/version.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cogload {

std::string to_string(Normalization n) {
  return n == Normalization::MinMax ? "minmax" : "clipped";
}

Normalization normalization_from_string(const std::string& s) {
  if (s == "minmax") return Normalization::MinMax;
  if (s == "clipped") return Normalization::PercentileClipped;
  throw validation_error("unknown normalization '" + s + "' (expected minmax|clipped)");
}

void validate(const PipelineConfig& config) {
  if (config.n_csp_filters < 2 || config.n_csp_filters % 2 != 0) {
    throw validation_error("csp filter count must be a positive even integer");
  }
  if (!(config.window_seconds > 0.0)) {
    throw validation_error("window_seconds must be positive");
  }
  if (!(config.step_seconds > 0.0)) throw validation_error("step_seconds must be positive");
  if (config.lambda < 0.0) throw validation_error("lambda must be non-negative");
  if (config.k_pc < 1) throw validation_error("k_pc must be positive");
  if (config.modalities.empty()) {
    throw validation_error("at least one modality must be selected");
  }
  if (config.filter.order < 2 || config.filter.order % 2 != 0) {
    throw validation_error("filter order must be a positive even integer");
  }
  const bool physio = config.modalities.count(Modality::ECG) ||
                      config.modalities.count(Modality::GSR);
  if (physio && config.window_seconds < 10.0) {
    throw validation_error("ECG/GSR features need windows of at least 10 s");
  }
}

PreparedEpochs prepare_epochs(const EpochSet& epochs, const PipelineConfig& config) {
  validate(epochs);
  validate(config);

  PreparedEpochs prep;
  prep.rate_hz = epochs.rate_hz;
  prep.window_seconds = epochs.window_seconds;
  prep.t_start_s = epochs.t_start_s;
  prep.labels = epochs.labels;

  const bool use_eeg = config.modalities.count(Modality::EEG) > 0;
  if (use_eeg) {
    prep.bands = bands_of(config.band_set);
    const auto eeg_rows = epochs.channels_of(Modality::EEG);
    if (eeg_rows.empty()) throw data_error("recording has no EEG channels");
    prep.n_eeg = static_cast<Eigen::Index>(eeg_rows.size());

    prep.scatter.resize(prep.bands.size());
    prep.cov_unit.resize(prep.bands.size());
    for (auto& v : prep.scatter) v.resize(epochs.trials());
    for (auto& v : prep.cov_unit) v.resize(epochs.trials());

    for (std::size_t t = 0; t < epochs.trials(); ++t) {
      Eigen::MatrixXd eeg(prep.n_eeg, epochs.window_samples());
      for (std::size_t r = 0; r < eeg_rows.size(); ++r) {
        eeg.row(static_cast<Eigen::Index>(r)) = epochs.data[t].row(eeg_rows[r]);
      }
      for (std::size_t b = 0; b < prep.bands.size(); ++b) {
        const Eigen::MatrixXd filtered =
            bandpass(eeg, prep.bands[b], epochs.rate_hz, config.filter);
        const auto s = static_cast<double>(filtered.cols());
        const Eigen::MatrixXd scatter = filtered * filtered.transpose() / s;
        prep.scatter[b][t] = scatter;
        // Centered unit-trace covariance derived from the same pass.
        const Eigen::VectorXd mean = filtered.rowwise().mean();
        Eigen::MatrixXd cov =
            (s * scatter - s * (mean * mean.transpose())) / (s - 1.0);
        cov = ((cov + cov.transpose()) / 2.0).eval();
        const double tr = cov.trace();
        if (!(tr > 0.0)) {
          throw data_error("rank-0 epoch after band-pass; cannot estimate covariance");
        }
        prep.cov_unit[b][t] = cov / tr;
      }
    }
    for (std::size_t b = 0; b < prep.bands.size(); ++b) {
      for (int f = 0; f < config.n_csp_filters; ++f) {
        prep.eeg_feature_names.push_back("EEG:" + prep.bands[b].name + ":csp" +
                                         std::to_string(f));
      }
    }
  }

  const bool use_ecg = config.modalities.count(Modality::ECG) > 0;
  const bool use_gsr = config.modalities.count(Modality::GSR) > 0;
  if (use_ecg || use_gsr) {
    std::optional<Eigen::Index> ecg_row;
    std::optional<Eigen::Index> gsr_row;
    if (use_ecg) {
      const auto rows = epochs.channels_of(Modality::ECG);
      if (rows.empty()) throw data_error("ECG features requested but no ECG channel present");
      ecg_row = rows.front();
    }
    if (use_gsr) {
      const auto rows = epochs.channels_of(Modality::GSR);
      if (rows.empty()) throw data_error("GSR features requested but no GSR channel present");
      gsr_row = rows.front();
    }

    FeatureMatrix physio;
    physio.t_start_s = epochs.t_start_s;
    physio.labels = epochs.labels;
    std::vector<FeatureVector> rows;
    rows.reserve(epochs.trials());
    for (std::size_t t = 0; t < epochs.trials(); ++t) {
      std::vector<FeatureMatrix> parts;
      FeatureVector combined;
      if (ecg_row) {
        const Eigen::VectorXd ecg = epochs.data[t].row(*ecg_row).transpose();
        const auto rr = detect_r_peaks(ecg, epochs.rate_hz);
        const auto fv = ecg_features(rr, epochs.window_seconds);
        combined.values.conservativeResize(combined.values.size() + fv.values.size());
        combined.values.tail(fv.values.size()) = fv.values;
        combined.names.insert(combined.names.end(), fv.names.begin(), fv.names.end());
      }
      if (gsr_row) {
        const Eigen::VectorXd gsr = epochs.data[t].row(*gsr_row).transpose();
        const auto fv = gsr_features(gsr, epochs.rate_hz);
        combined.values.conservativeResize(combined.values.size() + fv.values.size());
        combined.values.tail(fv.values.size()) = fv.values;
        combined.names.insert(combined.names.end(), fv.names.begin(), fv.names.end());
      }
      rows.push_back(std::move(combined));
    }
    physio.names = rows.front().names;
    physio.rows.resize(static_cast<Eigen::Index>(rows.size()),
                       rows.front().values.size());
    for (std::size_t t = 0; t < rows.size(); ++t) {
      physio.rows.row(static_cast<Eigen::Index>(t)) = rows[t].values.transpose();
    }
    validate(physio);
    prep.physio = std::move(physio);
  }
  return prep;
}

CovMatrix prepared_covariance(const PreparedEpochs& prep, std::size_t band_index,
                              const std::vector<std::size_t>& trials) {
  if (band_index >= prep.cov_unit.size()) throw validation_error("band index out of range");
  if (trials.size() < 2) {
    throw data_error("covariance estimation needs at least 2 epochs");
  }
  const auto& per_trial = prep.cov_unit[band_index];
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(prep.n_eeg, prep.n_eeg);
  for (const auto t : trials) acc += per_trial[t];
  acc /= static_cast<double>(trials.size());
  acc = ((acc + acc.transpose()) / 2.0).eval();
  return CovMatrix{acc, static_cast<int>(trials.size())};
}

FeatureMatrix features_on_prepared(const PreparedEpochs& prep,
                                   const std::vector<CspModel>& models,
                                   const PipelineConfig& config,
                                   const std::vector<std::size_t>& trials) {
  FeatureMatrix out;
  Eigen::Index eeg_width = 0;
  const bool use_eeg = !prep.bands.empty();
  if (use_eeg) {
    if (models.size() != prep.bands.size()) {
      throw validation_error("one spatial model per band required");
    }
    for (const auto& m : models) eeg_width += m.n_filters();
    out.names = prep.eeg_feature_names;
  }
  Eigen::Index width = eeg_width;
  if (prep.physio) {
    width += prep.physio->width();
    out.names.insert(out.names.end(), prep.physio->names.begin(), prep.physio->names.end());
  }

  out.rows.resize(static_cast<Eigen::Index>(trials.size()), width);
  std::vector<int> labels;
  for (std::size_t i = 0; i < trials.size(); ++i) {
    const auto t = trials[i];
    out.t_start_s.push_back(prep.t_start_s[t]);
    if (prep.labels) labels.push_back((*prep.labels)[t]);
    Eigen::Index col = 0;
    for (std::size_t b = 0; b < prep.bands.size(); ++b) {
      const auto& scatter = prep.scatter[b][t];
      for (Eigen::Index f = 0; f < models[b].n_filters(); ++f) {
        const Eigen::VectorXd w = models[b].filters.row(f).transpose();
        const double power = w.dot(scatter * w);
        if (config.log_power) {
          if (!(power > 0.0)) {
            throw data_error("non-positive band power before log in band '" +
                             prep.bands[b].name + "'");
          }
          out.rows(static_cast<Eigen::Index>(i), col) = std::log(power);
        } else {
          out.rows(static_cast<Eigen::Index>(i), col) = power;
        }
        ++col;
      }
    }
    if (prep.physio) {
      out.rows.row(static_cast<Eigen::Index>(i)).tail(prep.physio->width()) =
          prep.physio->rows.row(static_cast<Eigen::Index>(t));
    }
  }
  if (prep.labels) out.labels = std::move(labels);
  validate(out);
  return out;
}

FittedPipeline fit_on_prepared(const PreparedEpochs& prep,
                               const std::vector<std::size_t>& train_trials,
                               const std::vector<int>& labels, const PipelineConfig& config,
                               const std::vector<PenaltyMatrix>* penalties) {
  if (labels.size() != prep.trials()) {
    throw validation_error("label vector length does not match prepared trials");
  }
  std::vector<std::size_t> low;
  std::vector<std::size_t> high;
  for (const auto t : train_trials) {
    (labels[t] == 1 ? high : low).push_back(t);
  }
  if (low.size() < 2 || high.size() < 2) {
    throw data_error("training needs at least 2 trials per class (got " +
                     std::to_string(low.size()) + " / " + std::to_string(high.size()) + ")");
  }

  FittedPipeline fitted;
  for (std::size_t b = 0; b < prep.bands.size(); ++b) {
    const auto c1 = prepared_covariance(prep, b, high);
    const auto c0 = prepared_covariance(prep, b, low);
    if (config.regularization == CspRegularization::Kind::Invariant) {
      if (!penalties || penalties->size() != prep.bands.size()) {
        throw validation_error("invariant CSP requires one penalty per band");
      }
      fitted.models.push_back(csp_train_regularized(c1, c0, (*penalties)[b], config.lambda,
                                                    config.n_csp_filters, prep.bands[b]));
    } else {
      fitted.models.push_back(csp_train(c1, c0, config.n_csp_filters, prep.bands[b]));
    }
  }

  // Features over the training trials only; labels read at those indices.
  auto features = features_on_prepared(prep, fitted.models, config, train_trials);
  std::vector<int> train_labels;
  train_labels.reserve(train_trials.size());
  for (const auto t : train_trials) train_labels.push_back(labels[t]);
  features.labels = std::move(train_labels);
  fitted.lda = slda_train(features);
  fitted.feature_names = features.names;
  return fitted;
}

Eigen::VectorXd scores_on_prepared(const PreparedEpochs& prep, const FittedPipeline& fitted,
                                   const PipelineConfig& config,
                                   const std::vector<std::size_t>& trials) {
  const auto features = features_on_prepared(prep, fitted.models, config, trials);
  return slda_score(fitted.lda, features);
}

namespace {

std::vector<std::size_t> all_trials(std::size_t n) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  return idx;
}

}  // namespace

/// Penalty matrices (one per band) from calibration and use-context
/// covariances, both pooled over all windows.
std::vector<PenaltyMatrix> context_penalties(const PreparedEpochs& calib,
                                             const Recording& use_recording,
                                             const PipelineConfig& config) {
  auto use_windows = slide(use_recording, config.window_seconds, config.window_seconds);
  PipelineConfig eeg_only = config;
  eeg_only.modalities = {Modality::EEG};
  const auto use_prep = prepare_epochs(use_windows, eeg_only);

  std::vector<PenaltyMatrix> penalties;
  const auto calib_all = all_trials(calib.trials());
  const auto use_all = all_trials(use_prep.trials());
  for (std::size_t b = 0; b < calib.bands.size(); ++b) {
    const auto c_calib = prepared_covariance(calib, b, calib_all);
    const auto c_use = prepared_covariance(use_prep, b, use_all);
    penalties.push_back(pc_difference(c_calib, c_use, config.k_pc));
  }
  return penalties;
}

WorkloadClassifier train_workload(const EpochSet& calib_epochs, const PipelineConfig& config,
                                  const std::optional<Recording>& use_recording,
                                  std::uint64_t seed) {
  validate(config);
  if (!calib_epochs.labels) {
    throw validation_error("calibration epochs must be labeled");
  }
  if (config.regularization == CspRegularization::Kind::Invariant && !use_recording) {
    throw validation_error(
        "invariant CSP requires the use-context recording (offline covariance)");
  }

  const auto prep = prepare_epochs(calib_epochs, config);
  std::vector<PenaltyMatrix> penalties;
  if (config.regularization == CspRegularization::Kind::Invariant) {
    penalties = context_penalties(prep, *use_recording, config);
  }

  const auto trials = all_trials(prep.trials());
  const auto fitted = fit_on_prepared(prep, trials, *calib_epochs.labels, config,
                                      penalties.empty() ? nullptr : &penalties);

  WorkloadClassifier clf;
  clf.config = config;
  clf.band_models = fitted.models;
  clf.lda = fitted.lda;
  clf.channel_labels = calib_epochs.channel_labels;
  clf.channel_modalities = calib_epochs.modalities;
  clf.feature_names = fitted.feature_names;
  clf.provenance.seed = seed;
  clf.provenance.n_low = static_cast<int>(calib_epochs.trials_of(0).size());
  clf.provenance.n_high = static_cast<int>(calib_epochs.trials_of(1).size());
  clf.provenance.gamma = fitted.lda.gamma;
  clf.provenance.dropped_features = fitted.lda.dropped_names;
  clf.provenance.version = kVersion;
  return clf;
}

namespace {

void check_channel_layout(const WorkloadClassifier& clf, const Recording& rec) {
  std::vector<std::string> expected;
  for (std::size_t i = 0; i < clf.channel_modalities.size(); ++i) {
    if (clf.channel_modalities[i] == Modality::EEG) expected.push_back(clf.channel_labels[i]);
  }
  std::vector<std::string> actual;
  for (std::size_t i = 0; i < rec.modalities.size(); ++i) {
    if (rec.modalities[i] == Modality::EEG) actual.push_back(rec.channel_labels[i]);
  }
  if (clf.config.modalities.count(Modality::EEG) && expected != actual) {
    throw data_error("recording EEG channels do not match the channels the classifier was "
                     "calibrated on");
  }
}

}  // namespace

WorkloadIndexSeries estimate_series(const WorkloadClassifier& clf, const Recording& rec,
                                    double window_seconds, double step_seconds) {
  check_channel_layout(clf, rec);
  const auto windows = slide(rec, window_seconds, step_seconds);
  PipelineConfig config = clf.config;
  config.window_seconds = window_seconds;
  config.step_seconds = step_seconds;
  const auto prep = prepare_epochs(windows, config);

  WorkloadIndexSeries series;
  series.t_start_s = windows.t_start_s;
  series.window_seconds = window_seconds;
  FittedPipeline fitted{clf.band_models, clf.lda, clf.feature_names};
  series.raw = scores_on_prepared(prep, fitted, config, all_trials(prep.trials()));
  series.index = normalize_index(series.raw, clf.config.normalization);
  return series;
}

Eigen::VectorXd normalize_index(const Eigen::VectorXd& raw, Normalization kind) {
  if (raw.size() == 0) throw validation_error("normalize_index of an empty score list");
  double lo;
  double hi;
  if (kind == Normalization::MinMax) {
    lo = raw.minCoeff();
    hi = raw.maxCoeff();
  } else {
    lo = percentile(raw, 0.02);
    hi = percentile(raw, 0.98);
  }
  if (hi <= lo) return Eigen::VectorXd::Zero(raw.size());
  Eigen::VectorXd out = (2.0 * (raw.array() - lo) / (hi - lo) - 1.0).matrix();
  if (kind == Normalization::PercentileClipped) {
    out = out.cwiseMax(-1.0).cwiseMin(1.0);
  }
  return out;
}

}  // namespace cogload
