#include "cogload/eval.hpp"

#include "cogload/errors.hpp"
#include "cogload/rng.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace cogload {

namespace {

std::vector<std::size_t> all_trials(std::size_t n) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  return idx;
}

std::string summarize_config(const PipelineConfig& c) {
  std::string s = "band_set=" + to_string(c.band_set);
  s += ",filters=" + std::to_string(c.n_csp_filters);
  s += ",window=" + std::to_string(c.window_seconds);
  s += ",reg=";
  s += c.regularization == CspRegularization::Kind::Invariant ? "invariant" : "none";
  return s;
}

}  // namespace

CvResult cross_validate(const EpochSet& epochs, int k, const PipelineConfig& config,
                        std::uint64_t seed, const std::optional<Recording>& use_recording,
                        const TrainerFn& trainer) {
  if (k < 2) throw validation_error("cross-validation needs k >= 2");
  if (!epochs.labels) throw validation_error("cross-validation needs labeled epochs");
  if (config.regularization == CspRegularization::Kind::Invariant && !use_recording) {
    throw validation_error("invariant CSP requires the use-context recording");
  }

  const auto& labels = *epochs.labels;
  std::vector<std::size_t> low;
  std::vector<std::size_t> high;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    (labels[i] == 1 ? high : low).push_back(i);
  }
  if (static_cast<int>(low.size()) < k || static_cast<int>(high.size()) < k) {
    throw data_error("each class needs at least k trials for k-fold CV (got " +
                     std::to_string(low.size()) + " / " + std::to_string(high.size()) + ")");
  }

  // Seeded per-class shuffle dealt round-robin into folds.
  rng::Engine engine(seed);
  rng::shuffle(low, engine);
  rng::shuffle(high, engine);
  std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < low.size(); ++i) {
    folds[i % static_cast<std::size_t>(k)].push_back(low[i]);
  }
  for (std::size_t i = 0; i < high.size(); ++i) {
    folds[i % static_cast<std::size_t>(k)].push_back(high[i]);
  }

  const auto prep = prepare_epochs(epochs, config);
  std::vector<PenaltyMatrix> penalties;
  if (config.regularization == CspRegularization::Kind::Invariant) {
    penalties = context_penalties(prep, *use_recording, config);
  }

  CvResult result;
  result.seed = seed;
  result.config_summary = summarize_config(config);
  for (int f = 0; f < k; ++f) {
    const auto& test = folds[static_cast<std::size_t>(f)];
    std::vector<std::size_t> train;
    for (int g = 0; g < k; ++g) {
      if (g == f) continue;
      const auto& fold = folds[static_cast<std::size_t>(g)];
      train.insert(train.end(), fold.begin(), fold.end());
    }
    std::sort(train.begin(), train.end());

    TrialScorer scorer;
    if (trainer) {
      scorer = trainer(prep, train, labels);
    } else {
      const auto fitted = fit_on_prepared(prep, train, labels, config,
                                          penalties.empty() ? nullptr : &penalties);
      scorer = [&prep, &config, fitted](std::size_t trial) {
        return scores_on_prepared(prep, fitted, config, {trial})[0];
      };
    }

    int correct = 0;
    int n_low_test = 0;
    int n_high_test = 0;
    for (const auto t : test) {
      const int predicted = scorer(t) > 0.0 ? 1 : 0;
      if (predicted == labels[t]) ++correct;
      (labels[t] == 1 ? n_high_test : n_low_test)++;
    }
    result.fold_accuracies.push_back(static_cast<double>(correct) /
                                     static_cast<double>(test.size()));
    result.fold_test_counts.push_back(static_cast<int>(test.size()));
    result.fold_test_low.push_back(n_low_test);
    result.fold_test_high.push_back(n_high_test);
  }
  result.mean_accuracy = 0.0;
  for (const double a : result.fold_accuracies) result.mean_accuracy += a;
  result.mean_accuracy /= static_cast<double>(k);
  return result;
}

namespace {

struct TaskWindows {
  int task_id = 0;
  std::vector<Eigen::Index> window_indices;
  bool included = false;
  std::string note;
};

std::vector<TaskWindows> collect_task_windows(const WorkloadIndexSeries& series,
                                              const TaskIntervals& tasks, double rate_hz) {
  validate(tasks);
  if (series.t_start_s.empty()) throw validation_error("empty workload series");
  const double horizon = series.t_start_s.back() + series.window_seconds;

  std::vector<TaskWindows> out;
  for (const auto& task : tasks.intervals) {
    TaskWindows tw;
    tw.task_id = task.task_id;
    if (!task.included) {
      tw.note = "flagged excluded";
      out.push_back(tw);
      continue;
    }
    const double start_s = static_cast<double>(task.start_sample) / rate_hz;
    const double end_s = static_cast<double>(task.end_sample) / rate_hz;
    if (end_s > horizon + 1e-9 || start_s < series.t_start_s.front() - 1e-9) {
      tw.note = "outside series range";
      out.push_back(tw);
      continue;
    }
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(series.t_start_s.size()); ++i) {
      const double t = series.t_start_s[static_cast<std::size_t>(i)];
      if (t >= start_s && t < end_s) tw.window_indices.push_back(i);
    }
    if (tw.window_indices.empty()) {
      tw.note = "no windows inside interval";
      out.push_back(tw);
      continue;
    }
    tw.included = true;
    out.push_back(tw);
  }
  return out;
}

}  // namespace

std::vector<TaskSummary> task_average(const WorkloadIndexSeries& series,
                                      const TaskIntervals& tasks, double rate_hz) {
  std::vector<TaskSummary> out;
  for (const auto& tw : collect_task_windows(series, tasks, rate_hz)) {
    TaskSummary s;
    s.task_id = tw.task_id;
    s.included = tw.included;
    s.note = tw.note;
    s.window_count = static_cast<int>(tw.window_indices.size());
    if (tw.included) {
      double sum = 0.0;
      for (const auto i : tw.window_indices) sum += series.index[i];
      s.mean_index = sum / static_cast<double>(tw.window_indices.size());
    }
    out.push_back(s);
  }
  return out;
}

PermutationResult permutation_test(const EpochSet& calib, const Recording& use_recording,
                                   const TaskIntervals& tasks, const PipelineConfig& config,
                                   int n_perm, std::uint64_t seed, int n_threads) {
  if (n_perm < 100) {
    throw validation_error("permutation test needs n_perm >= 100, got " +
                           std::to_string(n_perm));
  }
  if (!calib.labels) throw validation_error("permutation test needs labeled calibration epochs");
  if (n_threads < 1) throw validation_error("n_threads must be >= 1");

  const auto calib_prep = prepare_epochs(calib, config);
  const auto windows = slide(use_recording, config.window_seconds, config.step_seconds);
  const auto use_prep = prepare_epochs(windows, config);
  std::vector<PenaltyMatrix> penalties;
  if (config.regularization == CspRegularization::Kind::Invariant) {
    penalties = context_penalties(calib_prep, use_recording, config);
  }
  const auto* penalty_ptr = penalties.empty() ? nullptr : &penalties;

  const auto calib_trials = all_trials(calib_prep.trials());
  const auto use_trials = all_trials(use_prep.trials());

  // The scoring grid is fixed, so task membership is resolved once.
  WorkloadIndexSeries probe;
  probe.t_start_s = windows.t_start_s;
  probe.window_seconds = config.window_seconds;
  probe.raw = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(windows.trials()));
  probe.index = probe.raw;
  const auto task_windows = collect_task_windows(probe, tasks, use_recording.rate_hz);
  std::vector<TaskWindows> included;
  for (const auto& tw : task_windows) {
    if (tw.included) included.push_back(tw);
  }
  if (included.size() < 2) {
    throw data_error("permutation test needs at least 2 included tasks, got " +
                     std::to_string(included.size()));
  }
  const auto d = static_cast<Eigen::Index>(included.size());

  const auto task_means_for = [&](const std::vector<int>& labels) -> Eigen::VectorXd {
    const auto fitted =
        fit_on_prepared(calib_prep, calib_trials, labels, config, penalty_ptr);
    const Eigen::VectorXd raw = scores_on_prepared(use_prep, fitted, config, use_trials);
    const Eigen::VectorXd index = normalize_index(raw, config.normalization);
    Eigen::VectorXd means(d);
    for (Eigen::Index j = 0; j < d; ++j) {
      double sum = 0.0;
      for (const auto i : included[static_cast<std::size_t>(j)].window_indices) {
        sum += index[i];
      }
      means[j] = sum / static_cast<double>(
                           included[static_cast<std::size_t>(j)].window_indices.size());
    }
    return means;
  };

  PermutationResult result;
  result.seed = seed;
  result.n_permutations = n_perm;
  for (const auto& tw : included) result.task_ids.push_back(tw.task_id);
  result.real_task_means = task_means_for(*calib.labels);

  // Permutation i reshuffles the label multiset with engine seed^i, so
  // iterations are order-free and can run on any number of threads with
  // bit-identical output.
  result.perm_task_means.resize(n_perm, d);
  std::atomic<int> next{0};
  const auto worker = [&]() {
    for (int i = next.fetch_add(1); i < n_perm; i = next.fetch_add(1)) {
      std::vector<int> shuffled = *calib.labels;
      rng::Engine engine(seed ^ static_cast<std::uint64_t>(i + 1));
      rng::shuffle(shuffled, engine);
      result.perm_task_means.row(i) = task_means_for(shuffled).transpose();
    }
  };
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  // Multivariate normal fit with a small ridge.
  result.fitted_mean = result.perm_task_means.colwise().mean().transpose();
  const Eigen::MatrixXd centered =
      result.perm_task_means.rowwise() - result.fitted_mean.transpose();
  Eigen::MatrixXd cov =
      centered.transpose() * centered / static_cast<double>(n_perm - 1);
  cov = ((cov + cov.transpose()) / 2.0).eval();
  cov += (1e-9 * cov.trace() / static_cast<double>(d)) *
         Eigen::MatrixXd::Identity(d, d);
  result.fitted_cov = cov;

  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw numeric_error(
        "permutation covariance is singular even after ridging; increase n_perm");
  }
  const Eigen::VectorXd delta = result.real_task_means - result.fitted_mean;
  result.mahalanobis_sq = delta.dot(llt.solve(delta));
  result.p_value = chi_squared_upper_tail(result.mahalanobis_sq, static_cast<int>(d));

  int n_ge = 0;
  for (int i = 0; i < n_perm; ++i) {
    const Eigen::VectorXd di =
        result.perm_task_means.row(i).transpose() - result.fitted_mean;
    if (di.dot(llt.solve(di)) >= result.mahalanobis_sq) ++n_ge;
  }
  result.p_empirical = static_cast<double>(1 + n_ge) / static_cast<double>(n_perm + 1);
  return result;
}

QuarterResult quarter_compare(const WorkloadIndexSeries& series, const TaskIntervals& tasks,
                              double rate_hz) {
  QuarterResult out;
  std::vector<double> diffs;
  for (const auto& tw : collect_task_windows(series, tasks, rate_hz)) {
    if (!tw.included) continue;
    const auto n = tw.window_indices.size();
    if (n < 4) continue;
    const auto q = n / 4;
    double first = 0.0;
    double last = 0.0;
    for (std::size_t i = 0; i < q; ++i) first += series.index[tw.window_indices[i]];
    for (std::size_t i = n - q; i < n; ++i) last += series.index[tw.window_indices[i]];
    first /= static_cast<double>(q);
    last /= static_cast<double>(q);
    out.task_ids.push_back(tw.task_id);
    out.first_quarter_means.push_back(first);
    out.last_quarter_means.push_back(last);
    diffs.push_back(last - first);
  }
  if (diffs.empty()) {
    throw data_error("quarter comparison needs at least one included task with >= 4 windows");
  }
  out.wilcoxon = wilcoxon_signed_rank(diffs);
  return out;
}

}  // namespace cogload
