#pragma once

#include "cogload/csp.hpp"
#include "cogload/epochs.hpp"
#include "cogload/features.hpp"
#include "cogload/lda.hpp"
#include "cogload/physio.hpp"

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace cogload {

enum class Normalization { MinMax, PercentileClipped };

std::string to_string(Normalization n);
Normalization normalization_from_string(const std::string& s);

/// End-to-end pipeline parameters. Defaults follow the standard protocol:
/// five bands, 6 spatial filters per band, 2 s windows stepped by 1 s,
/// EEG only, plain CSP.
struct PipelineConfig {
  BandSet band_set = BandSet::All5;
  int n_csp_filters = 6;
  double window_seconds = 2.0;
  double step_seconds = 1.0;
  CspRegularization::Kind regularization = CspRegularization::Kind::None;
  double lambda = 1.0;  // invariant-CSP penalty weight
  int k_pc = 3;         // invariant-CSP shift components
  std::set<Modality> modalities = {Modality::EEG};
  bool log_power = true;
  Normalization normalization = Normalization::MinMax;
  FilterSpec filter;
};

void validate(const PipelineConfig& config);

/// Band-filtered derivatives of an epoch set, computed once and shared by
/// training, cross-validation folds, and permutation iterations. Per band
/// and trial it holds the uncentered scatter X X^T / S (band power of a
/// filter w is w^T scatter w) and the unit-trace sample covariance; physio
/// features are label-independent and cached alongside.
struct PreparedEpochs {
  std::vector<BandDef> bands;
  double rate_hz = 0.0;
  double window_seconds = 0.0;
  Eigen::Index n_eeg = 0;
  std::vector<double> t_start_s;
  std::optional<std::vector<int>> labels;
  std::vector<std::vector<Eigen::MatrixXd>> scatter;   // [band][trial]
  std::vector<std::vector<Eigen::MatrixXd>> cov_unit;  // [band][trial]
  std::optional<FeatureMatrix> physio;
  std::vector<std::string> eeg_feature_names;

  std::size_t trials() const { return t_start_s.size(); }
};

PreparedEpochs prepare_epochs(const EpochSet& epochs, const PipelineConfig& config);

/// Class covariance over a trial subset from the prepared cache.
CovMatrix prepared_covariance(const PreparedEpochs& prep, std::size_t band_index,
                              const std::vector<std::size_t>& trials);

/// CSP banks plus discriminant, the product of one training pass.
struct FittedPipeline {
  std::vector<CspModel> models;
  LdaModel lda;
  std::vector<std::string> feature_names;
};

/// Trains CSP (optionally penalized per band) and sLDA on the given trials,
/// reading `labels` at those indices. The shared core behind train_workload,
/// cross_validate, and permutation_test.
FittedPipeline fit_on_prepared(const PreparedEpochs& prep,
                               const std::vector<std::size_t>& train_trials,
                               const std::vector<int>& labels, const PipelineConfig& config,
                               const std::vector<PenaltyMatrix>* penalties = nullptr);

/// Feature rows for a trial subset under the given spatial models.
FeatureMatrix features_on_prepared(const PreparedEpochs& prep,
                                   const std::vector<CspModel>& models,
                                   const PipelineConfig& config,
                                   const std::vector<std::size_t>& trials);

Eigen::VectorXd scores_on_prepared(const PreparedEpochs& prep, const FittedPipeline& fitted,
                                   const PipelineConfig& config,
                                   const std::vector<std::size_t>& trials);

/// Per-band penalty matrices from the covariance shift between the prepared
/// calibration epochs and a use-context recording (pooled over
/// non-overlapping windows of the whole session).
std::vector<PenaltyMatrix> context_penalties(const PreparedEpochs& calib,
                                             const Recording& use_recording,
                                             const PipelineConfig& config);

struct Provenance {
  std::uint64_t seed = 0;
  int n_low = 0;
  int n_high = 0;
  double gamma = 0.0;
  std::vector<std::string> dropped_features;
  std::string version;
};

/// Trained end-to-end classifier: per-band spatial filter banks, the
/// discriminant, and the channel layout it expects. Immutable once trained;
/// scoring is pure.
struct WorkloadClassifier {
  PipelineConfig config;
  std::vector<CspModel> band_models;
  LdaModel lda;
  std::vector<std::string> channel_labels;
  std::vector<Modality> channel_modalities;
  std::vector<std::string> feature_names;
  Provenance provenance;
};

/// Timestamped classifier output over a session: raw discriminant scores and
/// the session-normalized workload index in [-1, +1].
struct WorkloadIndexSeries {
  std::vector<double> t_start_s;
  double window_seconds = 0.0;
  Eigen::VectorXd raw;
  Eigen::VectorXd index;
};

/// Full calibration: per band, class covariances -> (regularized) CSP; then
/// band-power features (plus configured physio features) -> sLDA. Invariant
/// CSP requires the use-context recording, whose covariance is estimated
/// over non-overlapping windows of the whole session.
WorkloadClassifier train_workload(const EpochSet& calib_epochs, const PipelineConfig& config,
                                  const std::optional<Recording>& use_recording = std::nullopt,
                                  std::uint64_t seed = 0);

/// Sliding-window scores over a recording, normalized over this session's
/// scores only.
WorkloadIndexSeries estimate_series(const WorkloadClassifier& clf, const Recording& rec,
                                    double window_seconds, double step_seconds);

/// Affine map sending min -> -1 and max -> +1 (all zeros when the input is
/// constant). The percentile-clipped variant maps the 2nd/98th percentiles
/// instead and clips.
Eigen::VectorXd normalize_index(const Eigen::VectorXd& raw,
                                Normalization kind = Normalization::MinMax);

}  // namespace cogload
