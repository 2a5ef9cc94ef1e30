#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cogload/epochs.hpp"
#include "cogload/errors.hpp"
#include "cogload/eval.hpp"
#include "cogload/rng.hpp"
#include "cogload/synth.hpp"

#include <cmath>

using namespace cogload;

namespace {

/// Labeled epochs of white noise whose class-1 trials are scaled; a large
/// scale makes the pipeline separable, scale 1 makes the labels pure noise.
EpochSet noise_epochs(int per_class, int channels, int samples, double rate,
                      double class1_scale, rng::Engine& engine) {
  EpochSet out;
  out.rate_hz = rate;
  out.window_seconds = static_cast<double>(samples) / rate;
  for (int c = 0; c < channels; ++c) {
    out.channel_labels.push_back("e" + std::to_string(c));
    out.modalities.push_back(Modality::EEG);
  }
  std::vector<int> labels;
  for (int t = 0; t < 2 * per_class; ++t) {
    const int y = t % 2;
    Eigen::MatrixXd trial(channels, samples);
    for (Eigen::Index i = 0; i < channels; ++i) {
      for (Eigen::Index j = 0; j < samples; ++j) trial(i, j) = rng::gaussian(engine);
    }
    if (y == 1) trial *= class1_scale;
    out.data.push_back(trial);
    labels.push_back(y);
    out.t_start_s.push_back(static_cast<double>(t) * out.window_seconds);
  }
  out.labels = std::move(labels);
  return out;
}

PipelineConfig low3_config(int filters = 4) {
  PipelineConfig config;
  config.band_set = BandSet::Low3;
  config.n_csp_filters = filters;
  return config;
}

SynthConfig small_synth(std::uint64_t seed, bool effect) {
  SynthConfig cfg;
  cfg.seed = seed;
  cfg.rate_hz = 96.0;
  cfg.n_eeg_channels = 6;
  cfg.n_blocks = 4;
  cfg.letters_per_block = 15;
  const auto& bands = analysis_bands();
  Eigen::VectorXd p1 = Eigen::VectorXd::Zero(6);
  p1[0] = p1[1] = 1.0 / std::sqrt(2.0);
  Eigen::VectorXd p2 = Eigen::VectorXd::Zero(6);
  p2[2] = p2[3] = 1.0 / std::sqrt(2.0);
  const double hi1 = effect ? 3.5 : 1.0;
  const double lo2 = effect ? 2.5 : 1.0;
  cfg.sources = {
      {bands[1], p1, 1.0, hi1},
      {bands[2], p2, lo2, 1.0},
  };
  cfg.task_loads = {0.1, 0.9, 0.2, 1.0, 0.3};
  cfg.task_seconds = 24.0;
  return cfg;
}

WorkloadIndexSeries series_from(const std::vector<double>& index, double window_s,
                                double step_s) {
  WorkloadIndexSeries s;
  s.window_seconds = window_s;
  s.raw.resize(static_cast<Eigen::Index>(index.size()));
  s.index.resize(static_cast<Eigen::Index>(index.size()));
  for (std::size_t i = 0; i < index.size(); ++i) {
    s.t_start_s.push_back(static_cast<double>(i) * step_s);
    s.raw[static_cast<Eigen::Index>(i)] = index[i];
    s.index[static_cast<Eigen::Index>(i)] = index[i];
  }
  return s;
}

}  // namespace

TEST_CASE("chance_level matches exact binomial tails") {
  SUBCASE("(10, 0.01) is exactly 1.0") {
    const auto c = chance_level(10, 0.01);
    CHECK(c.k_min == 10);
    CHECK(c.threshold == 1.0);
    CHECK(c.tail_p == doctest::Approx(1.0 / 1024.0).epsilon(1e-12));
  }
  SUBCASE("(360, 0.01) brackets 0.569") {
    const auto c = chance_level(360, 0.01);
    CHECK(c.k_min == 203);
    CHECK(c.threshold >= 0.56);
    CHECK(c.threshold <= 0.58);
  }
  SUBCASE("large n approaches 1/2") {
    CHECK(chance_level(10000, 0.01).threshold < 0.52);
  }
  SUBCASE("alpha 0.5 sits just above one half") {
    const auto c = chance_level(5, 0.5);
    CHECK(c.threshold == doctest::Approx(0.6));
    CHECK(c.tail_p <= 0.5);
  }
  SUBCASE("monotone: non-increasing in n, non-decreasing as alpha shrinks") {
    double prev = 1.0;
    for (const int n : {20, 40, 80, 160, 320, 640}) {
      const double t = chance_level(n, 0.01).threshold;
      CHECK(t <= prev + 1e-12);
      prev = t;
    }
    CHECK(chance_level(100, 0.001).threshold >= chance_level(100, 0.01).threshold);
    CHECK(chance_level(100, 0.01).threshold >= chance_level(100, 0.05).threshold);
  }
  SUBCASE("invalid arguments") {
    CHECK_THROWS_AS(chance_level(0, 0.01), validation_error);
    CHECK_THROWS_AS(chance_level(10, 0.0), validation_error);
    CHECK_THROWS_AS(chance_level(10, 1.0), validation_error);
  }
}

TEST_CASE("stratified cross-validation fold bookkeeping") {
  rng::Engine engine(80);
  const auto epochs = noise_epochs(180, 4, 96, 96.0, 8.0, engine);
  const auto result = cross_validate(epochs, 2, low3_config(), 17);

  REQUIRE(result.fold_accuracies.size() == 2);
  CHECK(result.fold_test_counts[0] == 180);
  CHECK(result.fold_test_counts[1] == 180);
  CHECK(result.fold_test_low[0] == 90);
  CHECK(result.fold_test_high[0] == 90);
  CHECK(result.fold_test_low[1] == 90);
  CHECK(result.fold_test_high[1] == 90);
  CHECK(result.mean_accuracy ==
        doctest::Approx((result.fold_accuracies[0] + result.fold_accuracies[1]) / 2.0));
  // An 8x amplitude difference is trivially separable.
  CHECK(result.mean_accuracy == 1.0);

  SUBCASE("class too small for k") {
    const auto tiny = noise_epochs(2, 4, 96, 96.0, 1.0, engine);
    CHECK_THROWS_AS(cross_validate(tiny, 3, low3_config(), 0), data_error);
  }
  SUBCASE("k below 2") {
    CHECK_THROWS_AS(cross_validate(epochs, 1, low3_config(), 0), validation_error);
  }
}

TEST_CASE("shuffled labels keep CV accuracy inside the chance band") {
  rng::Engine data_engine(81);
  auto epochs = noise_epochs(60, 4, 96, 96.0, 4.0, data_engine);
  const double band = chance_level(120, 0.01).threshold;

  int in_band = 0;
  for (std::uint64_t rep = 0; rep < 20; ++rep) {
    auto shuffled = epochs;
    rng::Engine label_engine(1000 + rep);
    rng::shuffle(*shuffled.labels, label_engine);
    const auto result = cross_validate(shuffled, 2, low3_config(), rep);
    if (result.mean_accuracy >= 1.0 - band && result.mean_accuracy <= band) ++in_band;
  }
  CHECK(in_band >= 18);
}

TEST_CASE("constant classifier scores the majority-class fraction exactly") {
  rng::Engine engine(82);
  // 80 low / 40 high, k = 2: folds of 40/20 each.
  EpochSet epochs = noise_epochs(40, 4, 96, 96.0, 1.0, engine);
  auto more = noise_epochs(20, 4, 96, 96.0, 1.0, engine);
  for (std::size_t t = 0; t < more.trials(); ++t) {
    if ((*more.labels)[t] == 0) {
      epochs.data.push_back(more.data[t]);
      epochs.labels->push_back(0);
      epochs.t_start_s.push_back(100.0 + static_cast<double>(t));
    }
  }

  const TrainerFn constant_trainer =
      [](const PreparedEpochs& prep, const std::vector<std::size_t>& train,
         const std::vector<int>& labels) -> TrialScorer {
    (void)prep;
    int n1 = 0;
    for (const auto t : train) n1 += labels[t];
    const double score = 2 * n1 >= static_cast<int>(train.size()) ? 1.0 : -1.0;
    return [score](std::size_t) { return score; };
  };
  const auto result =
      cross_validate(epochs, 2, low3_config(), 5, std::nullopt, constant_trainer);
  // Majority class (low) is 2/3 of every stratified test fold.
  CHECK(result.mean_accuracy == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("task_average respects inclusion flags and ranges") {
  // 40 windows at 1 s step, index ramping up.
  std::vector<double> idx(40);
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = -1.0 + 0.05 * static_cast<double>(i);
  const auto series = series_from(idx, 2.0, 1.0);
  const double rate = 10.0;

  TaskIntervals tasks;
  tasks.intervals = {
      {1, 0, 100, true},     // 0-10 s
      {2, 100, 200, true},   // 10-20 s
      {3, 200, 300, false},  // flagged out
      {4, 300, 405, true},   // runs past the series horizon
      {5, 390, 400, true},   // inside, 39-40 s
  };
  const auto summaries = task_average(series, tasks, rate);
  REQUIRE(summaries.size() == 5);

  CHECK(summaries[0].included);
  CHECK(summaries[0].window_count == 10);
  // Windows 0..9: mean of -1.0 + 0.05*(0..9).
  CHECK(*summaries[0].mean_index == doctest::Approx(-1.0 + 0.05 * 4.5));
  CHECK(summaries[1].included);
  CHECK(*summaries[1].mean_index == doctest::Approx(-1.0 + 0.05 * 14.5));

  CHECK(!summaries[2].included);
  CHECK(!summaries[2].mean_index.has_value());
  CHECK(summaries[2].note == "flagged excluded");

  CHECK(!summaries[3].included);
  CHECK(summaries[3].note == "outside series range");

  CHECK(summaries[4].included);
  CHECK(summaries[4].window_count == 1);

  SUBCASE("constant index gives that constant as the task mean") {
    const auto flat = series_from(std::vector<double>(40, 0.5), 2.0, 1.0);
    const auto s = task_average(flat, tasks, rate);
    CHECK(*s[0].mean_index == doctest::Approx(0.5));
  }
}

TEST_CASE("wilcoxon signed-rank matches hand enumeration") {
  SUBCASE("six all-positive differences: W = 0, exact p = 2/64") {
    const auto r = wilcoxon_signed_rank({1, 2, 3, 4, 5, 6});
    CHECK(r.w == 0.0);
    CHECK(r.p_value == doctest::Approx(0.03125).epsilon(1e-12));
    CHECK(!r.degenerate);
  }
  SUBCASE("hand table for n = 6") {
    // One negative difference of rank 1: W = 1, p = 4/64.
    const auto r1 = wilcoxon_signed_rank({-1, 2, 3, 4, 5, 6});
    CHECK(r1.w == 1.0);
    CHECK(r1.p_value == doctest::Approx(4.0 / 64.0).epsilon(1e-12));
    // One negative difference of rank 2: W = 2, p = 6/64.
    const auto r2 = wilcoxon_signed_rank({1, -2, 3, 4, 5, 6});
    CHECK(r2.w == 2.0);
    CHECK(r2.p_value == doctest::Approx(6.0 / 64.0).epsilon(1e-12));
  }
  SUBCASE("symmetric alternating differences sit at the null expectation") {
    const auto r = wilcoxon_signed_rank({0.5, -0.5, 0.5, -0.5, 0.5, -0.5});
    CHECK(r.w == doctest::Approx(6.0 * 7.0 / 4.0));  // n(n+1)/4
    CHECK(r.p_value == doctest::Approx(1.0));
  }
  SUBCASE("all zeros is degenerate with p = 1") {
    const auto r = wilcoxon_signed_rank({0, 0, 0});
    CHECK(r.degenerate);
    CHECK(r.p_value == 1.0);
    CHECK(r.n_nonzero == 0);
  }
  SUBCASE("normal approximation with ties beyond 12 pairs") {
    std::vector<double> diffs;
    for (int i = 0; i < 20; ++i) diffs.push_back(i % 2 == 0 ? 1.0 : -1.0);
    const auto r = wilcoxon_signed_rank(diffs);
    CHECK(r.p_value > 0.5);  // perfectly balanced
    std::vector<double> one_sided;
    for (int i = 0; i < 20; ++i) one_sided.push_back(static_cast<double>(i + 1));
    CHECK(wilcoxon_signed_rank(one_sided).p_value < 1e-3);
  }
}

TEST_CASE("quarter_compare averages the first and last quarter per task") {
  // Task of 16 windows: index rises linearly from 0 to 1.5 within the task.
  std::vector<double> idx(16);
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = 0.1 * static_cast<double>(i);
  const auto series = series_from(idx, 2.0, 1.0);
  TaskIntervals tasks;
  tasks.intervals = {{1, 0, 160, true}};
  const auto r = quarter_compare(series, tasks, 10.0);
  REQUIRE(r.task_ids.size() == 1);
  // First quarter: windows 0..3 -> mean 0.15; last: 12..15 -> mean 1.35.
  CHECK(r.first_quarter_means[0] == doctest::Approx(0.15));
  CHECK(r.last_quarter_means[0] == doctest::Approx(1.35));
  REQUIRE(r.wilcoxon.n_nonzero == 1);

  SUBCASE("flat series is degenerate") {
    const auto flat = series_from(std::vector<double>(16, 0.25), 2.0, 1.0);
    const auto rf = quarter_compare(flat, tasks, 10.0);
    CHECK(rf.wilcoxon.degenerate);
    CHECK(rf.wilcoxon.p_value == 1.0);
  }
  SUBCASE("tasks with fewer than 4 windows are skipped") {
    TaskIntervals tiny;
    tiny.intervals = {{1, 0, 30, true}};
    CHECK_THROWS_AS(quarter_compare(series_from({0.1, 0.2, 0.3}, 2.0, 1.0), tiny, 10.0),
                    data_error);
  }
}

TEST_CASE("permutation test on a small synthetic transfer") {
  const auto cfg = small_synth(90, true);
  const auto calib = gen_calibration(cfg);
  const auto use = gen_use_session(cfg);
  const auto epochs = epoch(calib.recording, calib.events, 2.0, 0.0);
  auto config = low3_config();
  config.step_seconds = 2.0;

  const auto result =
      permutation_test(epochs, use.recording, *use.tasks, config, 100, 424242);
  CHECK(result.n_permutations == 100);
  CHECK(result.task_ids.size() == 5);
  CHECK(result.perm_task_means.rows() == 100);
  CHECK(result.mahalanobis_sq > 0.0);
  // Planted per-task loads should be far outside the null cloud.
  CHECK(result.p_value < 0.05);
  CHECK(result.p_empirical <= 0.05);

  SUBCASE("fixed seed is bit-identical across thread counts") {
    const auto threaded =
        permutation_test(epochs, use.recording, *use.tasks, config, 100, 424242, 3);
    CHECK((threaded.perm_task_means - result.perm_task_means).cwiseAbs().maxCoeff() == 0.0);
    CHECK(threaded.mahalanobis_sq == result.mahalanobis_sq);
    CHECK(threaded.p_value == result.p_value);
  }
  SUBCASE("order-preserving task relabeling leaves the p-value unchanged") {
    auto renamed = *use.tasks;
    for (auto& t : renamed.intervals) t.task_id *= 3;
    const auto r2 = permutation_test(epochs, use.recording, renamed, config, 100, 424242);
    CHECK(r2.p_value == result.p_value);
    CHECK(r2.mahalanobis_sq == result.mahalanobis_sq);
  }
  SUBCASE("n_perm below 100 is rejected") {
    CHECK_THROWS_AS(permutation_test(epochs, use.recording, *use.tasks, config, 50, 1),
                    validation_error);
  }
}

TEST_CASE("permutation test stays calm on a null session") {
  const auto cfg = small_synth(91, false);
  const auto calib = gen_calibration(cfg);
  const auto use = gen_use_session(cfg);
  const auto epochs = epoch(calib.recording, calib.events, 2.0, 0.0);
  auto config = low3_config();
  config.step_seconds = 2.0;
  const auto result = permutation_test(epochs, use.recording, *use.tasks, config, 100, 7);
  CHECK(result.p_value > 0.05);
}

TEST_CASE("chi-squared tail behaves at the boundaries") {
  CHECK(chi_squared_upper_tail(0.0, 5) == 1.0);
  CHECK(chi_squared_upper_tail(1e-12, 5) == doctest::Approx(1.0));
  // Monotone decreasing in the statistic.
  double prev = 1.0;
  for (double x = 0.5; x < 30.0; x += 0.5) {
    const double p = chi_squared_upper_tail(x, 5);
    CHECK(p < prev);
    prev = p;
  }
  // Known value: P(chi2_2 > 5.991) = 0.05.
  CHECK(chi_squared_upper_tail(5.991464547107979, 2) == doctest::Approx(0.05).epsilon(1e-9));
}
