#pragma once

#include "cogload/pipeline.hpp"
#include "cogload/stats.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace cogload {

struct CvResult {
  std::vector<double> fold_accuracies;
  double mean_accuracy = 0.0;
  std::vector<int> fold_test_counts;
  std::vector<int> fold_test_low;
  std::vector<int> fold_test_high;
  std::uint64_t seed = 0;
  std::string config_summary;
};

/// Scores one trial of a prepared epoch set; used to swap the real pipeline
/// for a reference classifier in tests.
using TrialScorer = std::function<double(std::size_t trial)>;
/// Builds a scorer from the training trials (labels read at those indices).
using TrainerFn = std::function<TrialScorer(const PreparedEpochs& prep,
                                            const std::vector<std::size_t>& train_trials,
                                            const std::vector<int>& labels)>;

/// Stratified k-fold cross-validation of the full pipeline: per fold, class
/// covariances, CSP, and sLDA are fitted strictly on the training trials and
/// accuracy is measured on the held-out fold. Band filtering is cached
/// across folds (it is label-free). Fold assignment comes from a seeded
/// per-class shuffle dealt round-robin, so class counts per fold are
/// balanced within 1.
CvResult cross_validate(const EpochSet& epochs, int k, const PipelineConfig& config,
                        std::uint64_t seed,
                        const std::optional<Recording>& use_recording = std::nullopt,
                        const TrainerFn& trainer = {});

struct TaskSummary {
  int task_id = 0;
  std::optional<double> mean_index;  // absent when excluded
  int window_count = 0;
  bool included = false;
  std::string note;  // exclusion reason, empty when included
};

/// Mean normalized workload per included task, over windows whose start time
/// lies inside the task interval. Flagged-out, out-of-range, and windowless
/// tasks are excluded with a note, never fatal.
std::vector<TaskSummary> task_average(const WorkloadIndexSeries& series,
                                      const TaskIntervals& tasks, double rate_hz);

struct PermutationResult {
  std::vector<int> task_ids;        // included tasks, in interval order
  Eigen::VectorXd real_task_means;  // per included task
  Eigen::MatrixXd perm_task_means;  // n_perm x tasks
  Eigen::VectorXd fitted_mean;
  Eigen::MatrixXd fitted_cov;  // ridged sample covariance of the vectors
  double mahalanobis_sq = 0.0;
  double p_value = 1.0;      // chi-squared upper tail at mahalanobis_sq
  double p_empirical = 1.0;  // rank of the real distance among permutations
  int n_permutations = 0;
  std::uint64_t seed = 0;
};

/// Label-shuffling significance test of the per-task workload profile.
/// Permutation i retrains the full pipeline on labels shuffled with seed^i
/// (class counts conserved) and recomputes the task-mean vector; a
/// multivariate normal is fitted to the permutation vectors and the real
/// vector's squared Mahalanobis distance is converted to a p-value through
/// the chi-squared upper tail. Iterations are independent and may run on
/// n_threads; results are bit-identical for any thread count.
PermutationResult permutation_test(const EpochSet& calib, const Recording& use_recording,
                                   const TaskIntervals& tasks, const PipelineConfig& config,
                                   int n_perm, std::uint64_t seed, int n_threads = 1);

struct QuarterResult {
  std::vector<int> task_ids;
  std::vector<double> first_quarter_means;
  std::vector<double> last_quarter_means;
  WilcoxonResult wilcoxon;
};

/// Mean workload over the first and last quarter of each included task's
/// windows, with a Wilcoxon signed-rank test on the per-task differences.
/// Tasks with fewer than 4 windows are skipped.
QuarterResult quarter_compare(const WorkloadIndexSeries& series, const TaskIntervals& tasks,
                              double rate_hz);

}  // namespace cogload
