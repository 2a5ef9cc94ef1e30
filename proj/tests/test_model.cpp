#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cogload/epochs.hpp"
#include "cogload/errors.hpp"
#include "cogload/model_io.hpp"
#include "cogload/pipeline.hpp"
#include "cogload/rng.hpp"
#include "cogload/io.hpp"
#include "cogload/synth.hpp"
#include "cogload/version.hpp"

#include <cmath>
#include <filesystem>

using namespace cogload;

namespace {

FeatureMatrix gaussian_classes(int per_class, const Eigen::VectorXd& mu0,
                               const Eigen::VectorXd& mu1, double noise,
                               rng::Engine& engine) {
  const auto d = mu0.size();
  FeatureMatrix f;
  f.rows.resize(2 * per_class, d);
  std::vector<int> labels;
  for (int i = 0; i < 2 * per_class; ++i) {
    const int y = i < per_class ? 0 : 1;
    labels.push_back(y);
    for (Eigen::Index j = 0; j < d; ++j) {
      f.rows(i, j) = (y == 0 ? mu0[j] : mu1[j]) + noise * rng::gaussian(engine);
    }
    f.t_start_s.push_back(static_cast<double>(i));
  }
  f.labels = labels;
  for (Eigen::Index j = 0; j < d; ++j) f.names.push_back("f" + std::to_string(j));
  return f;
}

/// Small fast synthetic protocol: 6 EEG channels at 96 Hz.
SynthConfig small_config(std::uint64_t seed) {
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
  Eigen::VectorXd p3 = Eigen::VectorXd::Zero(6);
  p3[4] = p3[5] = 1.0 / std::sqrt(2.0);
  cfg.sources = {
      {bands[1], p1, 1.0, 3.5},
      {bands[2], p2, 2.5, 0.8},
      {bands[3], p3, 0.8, 2.5},
  };
  cfg.task_loads = {1.0, 1.0};
  cfg.task_seconds = 30.0;
  return cfg;
}

PipelineConfig small_pipeline() {
  PipelineConfig config;
  config.band_set = BandSet::Low3;
  config.n_csp_filters = 4;
  return config;
}

}  // namespace

TEST_CASE("slda separates well-separated classes and stays at chance on null data") {
  rng::Engine engine(60);

  SUBCASE("two 1-D classes at -1 and +1") {
    Eigen::VectorXd mu0(1), mu1(1);
    mu0 << -1.0;
    mu1 << 1.0;
    const auto f = gaussian_classes(20, mu0, mu1, 0.05, engine);
    const auto model = slda_train(f);
    const auto scores = slda_score(model, f);
    for (Eigen::Index i = 0; i < f.n_rows(); ++i) {
      CHECK((scores[i] > 0.0 ? 1 : 0) == (*f.labels)[static_cast<std::size_t>(i)]);
    }
  }
  SUBCASE("identical class distributions give ~50% training accuracy") {
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(4);
    const auto f = gaussian_classes(200, mu, mu, 1.0, engine);
    const auto model = slda_train(f);
    const auto scores = slda_score(model, f);
    int correct = 0;
    for (Eigen::Index i = 0; i < f.n_rows(); ++i) {
      if ((scores[i] > 0.0 ? 1 : 0) == (*f.labels)[static_cast<std::size_t>(i)]) ++correct;
    }
    const double accuracy = static_cast<double>(correct) / static_cast<double>(f.n_rows());
    CHECK(accuracy > 0.4);
    CHECK(accuracy < 0.72);  // binomial noise band around 1/2 on 400 samples
  }
}

TEST_CASE("gamma 0 reproduces closed-form LDA weights on 2-D data") {
  rng::Engine engine(61);
  Eigen::VectorXd mu0(2), mu1(2);
  mu0 << 0.0, 1.0;
  mu1 << 2.0, -1.0;
  const auto f = gaussian_classes(100, mu0, mu1, 0.8, engine);
  const auto model = slda_train(f, 0.0);
  CHECK(model.gamma == 0.0);

  // Independent route: standardize, class means, pooled covariance with
  // divisor n-2, invert the 2x2 by the adjugate formula.
  const auto n = f.n_rows();
  Eigen::MatrixXd x(n, 2);
  for (Eigen::Index j = 0; j < 2; ++j) {
    const double mean = f.rows.col(j).mean();
    const double sd = std::sqrt((f.rows.col(j).array() - mean).square().sum() /
                                static_cast<double>(n - 1));
    x.col(j) = (f.rows.col(j).array() - mean) / sd;
  }
  Eigen::Vector2d m0 = Eigen::Vector2d::Zero(), m1 = Eigen::Vector2d::Zero();
  int n0 = 0, n1 = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if ((*f.labels)[static_cast<std::size_t>(i)] == 1) {
      m1 += x.row(i).transpose();
      ++n1;
    } else {
      m0 += x.row(i).transpose();
      ++n0;
    }
  }
  m0 /= n0;
  m1 /= n1;
  Eigen::Matrix2d s = Eigen::Matrix2d::Zero();
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Vector2d z =
        x.row(i).transpose() -
        ((*f.labels)[static_cast<std::size_t>(i)] == 1 ? m1 : m0);
    s += z * z.transpose();
  }
  s /= static_cast<double>(n - 2);
  const double det = s(0, 0) * s(1, 1) - s(0, 1) * s(1, 0);
  Eigen::Matrix2d inv;
  inv << s(1, 1), -s(0, 1), -s(1, 0), s(0, 0);
  inv /= det;
  const Eigen::Vector2d expected_w = inv * (m1 - m0);
  CHECK((model.weights - expected_w).cwiseAbs().maxCoeff() < 1e-10);
  const double expected_bias = -expected_w.dot((m0 + m1) / 2.0);
  CHECK(model.bias == doctest::Approx(expected_bias).epsilon(1e-10));
}

TEST_CASE("slda score identities") {
  rng::Engine engine(62);
  Eigen::VectorXd mu0(3), mu1(3);
  mu0 << 0, 0, 0;
  mu1 << 1, 2, -1;
  const auto f = gaussian_classes(50, mu0, mu1, 0.5, engine);
  const auto model = slda_train(f);

  SUBCASE("midpoint of the standardized class means scores zero") {
    // Recover the unstandardized midpoint by scoring the average of the
    // class means in original units.
    Eigen::VectorXd m0 = Eigen::VectorXd::Zero(3), m1 = Eigen::VectorXd::Zero(3);
    for (Eigen::Index i = 0; i < f.n_rows(); ++i) {
      ((*f.labels)[static_cast<std::size_t>(i)] == 1 ? m1 : m0) += f.rows.row(i).transpose();
    }
    m0 /= 50.0;
    m1 /= 50.0;
    CHECK(std::abs(slda_score(model, Eigen::VectorXd((m0 + m1) / 2.0))) < 1e-10);
    CHECK(slda_score(model, m1) > 0.0);
    CHECK(slda_score(model, m0) < 0.0);
  }
  SUBCASE("batch scoring equals per-row scoring") {
    const auto batch = slda_score(model, f);
    for (Eigen::Index i = 0; i < f.n_rows(); ++i) {
      CHECK(batch[i] == slda_score(model, Eigen::VectorXd(f.rows.row(i).transpose())));
    }
  }
  SUBCASE("width mismatch is an error") {
    CHECK_THROWS_AS(slda_score(model, Eigen::VectorXd::Zero(2)), validation_error);
  }
}

TEST_CASE("shrinkage pulls weights toward the standardized mean difference") {
  rng::Engine engine(63);
  Eigen::VectorXd mu0(4), mu1(4);
  mu0 << 0, 0, 0, 0;
  mu1 << 1, 0.5, -0.5, 2;
  const auto f = gaussian_classes(60, mu0, mu1, 0.7, engine);
  const auto full = slda_train(f, 1.0);

  // At gamma 1 the covariance is a scaled identity, so weights align with
  // the standardized mean difference.
  Eigen::VectorXd m0 = Eigen::VectorXd::Zero(4), m1 = Eigen::VectorXd::Zero(4);
  for (Eigen::Index i = 0; i < f.n_rows(); ++i) {
    Eigen::VectorXd z(4);
    for (Eigen::Index j = 0; j < 4; ++j) {
      z[j] = (f.rows(i, j) - full.means[j]) / full.stds[j];
    }
    ((*f.labels)[static_cast<std::size_t>(i)] == 1 ? m1 : m0) += z;
  }
  m0 /= 60.0;
  m1 /= 60.0;
  const Eigen::VectorXd diff = m1 - m0;
  const double cosine = full.weights.dot(diff) / (full.weights.norm() * diff.norm());
  CHECK(cosine == doctest::Approx(1.0).epsilon(1e-6));

  SUBCASE("analytic gamma lies in [0,1] and grows with dimension pressure") {
    const auto model = slda_train(f);
    CHECK(model.gamma >= 0.0);
    CHECK(model.gamma <= 1.0);
  }
}

TEST_CASE("zero-variance features are dropped and recorded") {
  rng::Engine engine(64);
  Eigen::VectorXd mu0(2), mu1(2);
  mu0 << -1, 0;
  mu1 << 1, 0;
  auto f = gaussian_classes(30, mu0, mu1, 0.3, engine);
  // Append a constant column.
  f.rows.conservativeResize(Eigen::NoChange, 3);
  f.rows.col(2).setConstant(7.7);
  f.names.push_back("stuck");
  f.rows.col(1) = f.rows.col(0);  // keep width 3 meaningful

  const auto model = slda_train(f);
  REQUIRE(model.dropped_names.size() == 1);
  CHECK(model.dropped_names[0] == "stuck");
  CHECK(model.kept.size() == 2);
  CHECK(model.input_width == 3);
  // Scoring still accepts the full width.
  CHECK_NOTHROW(slda_score(model, Eigen::VectorXd::Zero(3)));

  SUBCASE("all features constant is an error") {
    FeatureMatrix flat;
    flat.rows = Eigen::MatrixXd::Constant(10, 2, 1.0);
    flat.names = {"a", "b"};
    flat.labels = std::vector<int>{0, 0, 0, 0, 0, 1, 1, 1, 1, 1};
    flat.t_start_s.assign(10, 0.0);
    for (int i = 0; i < 10; ++i) flat.t_start_s[static_cast<std::size_t>(i)] = i;
    CHECK_THROWS_AS(slda_train(flat), data_error);
  }
}

TEST_CASE("per-feature affine rescaling leaves decisions unchanged") {
  rng::Engine engine(65);
  Eigen::VectorXd mu0(3), mu1(3);
  mu0 << 0, 1, -1;
  mu1 << 1, 0, 1;
  const auto train = gaussian_classes(40, mu0, mu1, 0.6, engine);
  const auto test = gaussian_classes(40, mu0, mu1, 0.6, engine);

  const auto base_model = slda_train(train);
  const Eigen::VectorXd base_scores = slda_score(base_model, test);

  FeatureMatrix train_scaled = train;
  FeatureMatrix test_scaled = test;
  const Eigen::Vector3d scale(5.0, 0.01, -3.0);
  const Eigen::Vector3d offset(100.0, -2.0, 0.5);
  for (Eigen::Index j = 0; j < 3; ++j) {
    train_scaled.rows.col(j) = scale[j] * train.rows.col(j).array() + offset[j];
    test_scaled.rows.col(j) = scale[j] * test.rows.col(j).array() + offset[j];
  }
  const auto scaled_model = slda_train(train_scaled);
  const Eigen::VectorXd scaled_scores = slda_score(scaled_model, test_scaled);
  for (Eigen::Index i = 0; i < base_scores.size(); ++i) {
    CHECK((base_scores[i] > 0.0) == (scaled_scores[i] > 0.0));
  }
}

TEST_CASE("normalize_index maps scores into [-1, +1]") {
  SUBCASE("affine arithmetic") {
    Eigen::VectorXd raw(3);
    raw << -3.0, 0.0, 1.0;
    const auto idx = normalize_index(raw);
    CHECK(idx[0] == doctest::Approx(-1.0));
    CHECK(idx[1] == doctest::Approx(0.5));
    CHECK(idx[2] == doctest::Approx(1.0));
  }
  SUBCASE("constant scores map to zero") {
    const Eigen::VectorXd raw = Eigen::VectorXd::Constant(5, 2.5);
    CHECK(normalize_index(raw).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("symmetric input stays symmetric") {
    Eigen::VectorXd raw(3);
    raw << -4.0, 0.0, 4.0;
    const auto idx = normalize_index(raw);
    CHECK(idx[0] == doctest::Approx(-1.0));
    CHECK(idx[1] == doctest::Approx(0.0));
    CHECK(idx[2] == doctest::Approx(1.0));
  }
  SUBCASE("rank order is preserved") {
    rng::Engine engine(66);
    Eigen::VectorXd raw(50);
    for (Eigen::Index i = 0; i < raw.size(); ++i) raw[i] = rng::gaussian(engine);
    const auto idx = normalize_index(raw);
    for (Eigen::Index i = 0; i < raw.size(); ++i) {
      for (Eigen::Index j = 0; j < raw.size(); ++j) {
        if (raw[i] < raw[j]) CHECK(idx[i] < idx[j]);
      }
    }
  }
  SUBCASE("clipped variant clips outliers to the ends") {
    Eigen::VectorXd raw(101);
    for (Eigen::Index i = 0; i < 101; ++i) raw[i] = static_cast<double>(i);
    raw[100] = 1e6;  // outlier
    const auto idx = normalize_index(raw, Normalization::PercentileClipped);
    CHECK(idx.maxCoeff() == 1.0);
    CHECK(idx.minCoeff() == -1.0);
    CHECK(idx[99] == 1.0);  // clipped alongside the outlier
  }
  SUBCASE("empty input is an error") {
    CHECK_THROWS_AS(normalize_index(Eigen::VectorXd()), validation_error);
  }
}

TEST_CASE("train_workload end to end on a small synthetic protocol") {
  const auto session = gen_calibration(small_config(71));
  const auto epochs = epoch(session.recording, session.events, 2.0, 0.0);
  REQUIRE(epochs.trials() == 60);

  const auto config = small_pipeline();
  const auto clf = train_workload(epochs, config, std::nullopt, 71);
  CHECK(clf.band_models.size() == 3);
  CHECK(clf.lda.input_width == 12);  // 3 bands x 4 filters
  CHECK(clf.provenance.n_low == 30);
  CHECK(clf.provenance.n_high == 30);
  CHECK(clf.provenance.version == std::string(kVersion));

  // Training-set separation should be strong on this effect size.
  const auto prep = prepare_epochs(epochs, config);
  std::vector<std::size_t> all(epochs.trials());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  FittedPipeline fitted{clf.band_models, clf.lda, clf.feature_names};
  const auto scores = scores_on_prepared(prep, fitted, config, all);
  int correct = 0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    if ((scores[static_cast<Eigen::Index>(i)] > 0.0 ? 1 : 0) == (*epochs.labels)[i]) {
      ++correct;
    }
  }
  CHECK(static_cast<double>(correct) / 60.0 > 0.9);

  SUBCASE("unlabeled epochs cannot train") {
    auto unlabeled = epochs;
    unlabeled.labels.reset();
    CHECK_THROWS_AS(train_workload(unlabeled, config, std::nullopt, 0), validation_error);
  }
  SUBCASE("invariant CSP without a use recording is an error") {
    auto invariant = config;
    invariant.regularization = CspRegularization::Kind::Invariant;
    CHECK_THROWS_AS(train_workload(epochs, invariant, std::nullopt, 0), validation_error);
  }
}

TEST_CASE("estimate_series on a high-workload session") {
  const auto cfg = small_config(72);
  const auto calib = gen_calibration(cfg);
  const auto epochs = epoch(calib.recording, calib.events, 2.0, 0.0);
  const auto clf = train_workload(epochs, small_pipeline(), std::nullopt, 72);

  const auto use = gen_use_session(cfg);  // both tasks at full load
  const auto series = estimate_series(clf, use.recording, 2.0, 1.0);
  REQUIRE(series.raw.size() == series.index.size());
  CHECK(series.index.minCoeff() >= -1.0);
  CHECK(series.index.maxCoeff() <= 1.0);
  // Raw scores should skew positive on an all-high session.
  int positive = 0;
  for (Eigen::Index i = 0; i < series.raw.size(); ++i) {
    if (series.raw[i] > 0.0) ++positive;
  }
  CHECK(static_cast<double>(positive) / static_cast<double>(series.raw.size()) > 0.7);

  SUBCASE("identical sessions give identical series") {
    const auto again = estimate_series(clf, use.recording, 2.0, 1.0);
    CHECK((series.raw - again.raw).cwiseAbs().maxCoeff() == 0.0);
    CHECK((series.index - again.index).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("recording shorter than one window is an error") {
    Recording brief = use.recording;
    brief.samples = brief.samples.leftCols(10).eval();
    CHECK_THROWS_AS(estimate_series(clf, brief, 2.0, 1.0), validation_error);
  }
  SUBCASE("channel layout mismatch is an error") {
    Recording renamed = use.recording;
    renamed.channel_labels[0] = "XX";
    CHECK_THROWS_AS(estimate_series(clf, renamed, 2.0, 1.0), data_error);
  }
}

TEST_CASE("classifier file round trip preserves scores bit for bit") {
  const auto cfg = small_config(73);
  const auto calib = gen_calibration(cfg);
  const auto epochs = epoch(calib.recording, calib.events, 2.0, 0.0);
  const auto clf = train_workload(epochs, small_pipeline(), std::nullopt, 73);

  const auto path = std::filesystem::temp_directory_path() / "cogload_model_test.cogload";
  save_classifier(clf, path);
  const auto loaded = load_classifier(path);

  CHECK(loaded.provenance.seed == 73);
  CHECK(loaded.band_models.size() == clf.band_models.size());
  CHECK(loaded.feature_names == clf.feature_names);
  for (std::size_t b = 0; b < clf.band_models.size(); ++b) {
    CHECK((loaded.band_models[b].filters - clf.band_models[b].filters)
              .cwiseAbs()
              .maxCoeff() == 0.0);
  }
  CHECK(loaded.lda.bias == clf.lda.bias);
  CHECK((loaded.lda.weights - clf.lda.weights).cwiseAbs().maxCoeff() == 0.0);

  const auto use = gen_use_session(cfg);
  const auto s1 = estimate_series(clf, use.recording, 2.0, 2.0);
  const auto s2 = estimate_series(loaded, use.recording, 2.0, 2.0);
  CHECK((s1.raw - s2.raw).cwiseAbs().maxCoeff() == 0.0);

  SUBCASE("tampered files are rejected") {
    auto text = read_text(path);
    const auto pos = text.find("\"bias\"");
    REQUIRE(pos != std::string::npos);
    text[pos + 1] = 'B';
    const auto bad = std::filesystem::temp_directory_path() / "cogload_model_bad.cogload";
    write_text_atomic(bad, text);
    CHECK_THROWS_WITH_AS(load_classifier(bad), doctest::Contains("checksum"), data_error);
  }
}
