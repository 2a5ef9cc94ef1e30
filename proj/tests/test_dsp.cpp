#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cogload/bandpower.hpp"
#include "cogload/errors.hpp"
#include "cogload/filter.hpp"
#include "cogload/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace cogload;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Eigen::VectorXd sinusoid(double freq_hz, double amplitude, double rate_hz, double seconds) {
  const auto n = static_cast<Eigen::Index>(std::llround(seconds * rate_hz));
  Eigen::VectorXd x(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x[i] = amplitude * std::sin(kTwoPi * freq_hz * static_cast<double>(i) / rate_hz);
  }
  return x;
}

const BandDef& theta() { return analysis_bands()[1]; }

/// RMS-derived amplitude over the central 80% of the signal.
double central_amplitude(const Eigen::VectorXd& y) {
  const auto n = y.size();
  const auto margin = n / 10;
  const auto mid = y.segment(margin, n - 2 * margin);
  return std::sqrt(2.0 * mid.squaredNorm() / static_cast<double>(mid.size()));
}

}  // namespace

TEST_CASE("passband identity: 5 Hz through theta") {
  const auto x = sinusoid(5.0, 1.0, 256.0, 10.0);
  const auto cascade = design_bandpass(theta().low_hz, theta().high_hz, 256.0);
  const auto y = filtfilt(cascade, x);
  CHECK(central_amplitude(y) == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("stopband rejection: 20 Hz through theta") {
  const auto x = sinusoid(20.0, 1.0, 256.0, 10.0);
  const auto cascade = design_bandpass(theta().low_hz, theta().high_hz, 256.0);
  const auto y = filtfilt(cascade, x);
  const auto n = y.size();
  CHECK(y.segment(n / 10, n - n / 5).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("white noise passes the band-equivalent fraction of its power") {
  // Two-pass filtering narrows the effective width to about 90% of the
  // nominal bandwidth; the 15% tolerance absorbs that plus estimation noise.
  rng::Engine engine(11);
  const double rate = 256.0;
  const auto n = static_cast<Eigen::Index>(rate * 100.0);
  Eigen::VectorXd x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = rng::gaussian(engine);

  for (const auto& band : analysis_bands()) {
    const auto cascade = design_bandpass(band.low_hz, band.high_hz, rate);
    const auto y = filtfilt(cascade, x);
    const double ratio = y.squaredNorm() / x.squaredNorm();
    const double nominal = (band.high_hz - band.low_hz) / (rate / 2.0);
    CHECK_MESSAGE(std::abs(ratio / nominal - 1.0) < 0.15,
                  "band ", band.name, " ratio ", ratio, " nominal ", nominal);
  }
}

TEST_CASE("band_power identities") {
  SUBCASE("sinusoid over integer periods gives A^2/2") {
    const auto x = sinusoid(4.0, 3.0, 256.0, 1.0);  // 4 full periods
    CHECK(band_power(x) == doctest::Approx(4.5).epsilon(1e-9));
  }
  SUBCASE("all zeros give 0") {
    const Eigen::VectorXd zeros = Eigen::VectorXd::Zero(100);
    CHECK(band_power(zeros) == 0.0);
  }
  SUBCASE("constant c gives c^2") {
    const Eigen::VectorXd constant = Eigen::VectorXd::Constant(64, -1.5);
    CHECK(band_power(constant) == doctest::Approx(2.25));
  }
  SUBCASE("invariant under sign flip and permutation") {
    rng::Engine engine(3);
    Eigen::VectorXd x(257);
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng::gaussian(engine);
    const double reference = band_power(x);
    CHECK(band_power(Eigen::VectorXd(-x)) == doctest::Approx(reference).epsilon(1e-12));
    std::vector<double> shuffled(x.data(), x.data() + x.size());
    rng::shuffle(shuffled, engine);
    Eigen::VectorXd xs = Eigen::Map<Eigen::VectorXd>(shuffled.data(), x.size());
    CHECK(band_power(xs) == doctest::Approx(reference).epsilon(1e-12));
  }
  SUBCASE("per-channel on a matrix") {
    Eigen::MatrixXd m(2, 4);
    m << 1, 1, 1, 1, 2, -2, 2, -2;
    const auto p = band_power(m);
    CHECK(p[0] == doctest::Approx(1.0));
    CHECK(p[1] == doctest::Approx(4.0));
  }
  SUBCASE("empty window is an error") {
    CHECK_THROWS_AS(band_power(Eigen::MatrixXd()), validation_error);
  }
}

TEST_CASE("zero-phase filtering keeps symmetric inputs symmetric") {
  const double rate = 256.0;
  const auto n = static_cast<Eigen::Index>(rate * 4.0);
  // A symmetric burst with real passband content: 5 Hz cosine under a
  // Gaussian window, centered on the midpoint.
  Eigen::VectorXd x(n);
  const double center = static_cast<double>(n - 1) / 2.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = (static_cast<double>(i) - center) / rate;
    x[i] = std::cos(kTwoPi * 5.0 * d) * std::exp(-d * d / (2.0 * 0.3 * 0.3));
  }
  const auto cascade = design_bandpass(theta().low_hz, theta().high_hz, rate);
  const auto y = filtfilt(cascade, x);
  const double scale = y.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < n / 2; ++i) {
    CHECK(std::abs(y[i] - y[n - 1 - i]) <= 1e-6 * scale);
  }
}

TEST_CASE("filtering is linear") {
  rng::Engine engine(5);
  const auto n = 1024;
  Eigen::VectorXd x(n);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x[i] = rng::gaussian(engine);
    y[i] = rng::gaussian(engine);
  }
  const double a = 2.5;
  const double b = -0.75;
  const auto cascade = design_bandpass(7.0, 13.0, 256.0);
  const Eigen::VectorXd lhs = filtfilt(cascade, a * x + b * y);
  const Eigen::VectorXd rhs = a * filtfilt(cascade, x) + b * filtfilt(cascade, y);
  const double scale = lhs.cwiseAbs().maxCoeff();
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-9 * scale);
}

TEST_CASE("the five band powers of a broadband signal sum below total power") {
  rng::Engine engine(13);
  Eigen::VectorXd x(static_cast<Eigen::Index>(256.0 * 30.0));
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng::gaussian(engine);
  const double total = band_power(x);
  double banded = 0.0;
  for (const auto& band : analysis_bands()) {
    const auto cascade = design_bandpass(band.low_hz, band.high_hz, 256.0);
    banded += band_power(Eigen::VectorXd(filtfilt(cascade, x)));
  }
  CHECK(banded < total);
}

TEST_CASE("band_power_between places sinusoids in the right bands") {
  const double rate = 32.0;
  const auto one_hz = sinusoid(1.0, 2.0, rate, 10.0);
  const double a2_half = 2.0;  // A^2/2 for A = 2

  CHECK(band_power_between(one_hz, 0.5, 2.0, rate) ==
        doctest::Approx(a2_half).epsilon(0.05));
  CHECK(band_power_between(one_hz, 0.1, 0.5, rate) < 0.05 * a2_half);

  const auto slow = sinusoid(0.3, 2.0, rate, 10.0);
  CHECK(band_power_between(slow, 0.1, 0.5, rate) == doctest::Approx(a2_half).epsilon(0.10));
  CHECK(band_power_between(slow, 0.5, 2.0, rate) < 0.05 * a2_half);
}

TEST_CASE("band_power_between minimum-cycles gate") {
  const double rate = 32.0;
  const auto x = sinusoid(1.0, 1.0, rate, 10.0);
  // 0.1 Hz low edge on a 10 s window: one cycle, accepted by the relaxed rule.
  CHECK_NOTHROW(band_power_between(x, 0.1, 0.5, rate));
  // 0.05 Hz low edge: below the relaxed rule's floor.
  CHECK_THROWS_AS(band_power_between(x, 0.05, 0.5, rate), validation_error);
  // 1 Hz low edge on a 1.5 s window: fewer than two cycles.
  const auto brief = sinusoid(1.0, 1.0, rate, 1.5);
  CHECK_THROWS_AS(band_power_between(brief, 1.0, 2.0, rate), validation_error);
  CHECK_NOTHROW(band_power_between(sinusoid(1.0, 1.0, rate, 2.0), 1.0, 2.0, rate));
}

TEST_CASE("design validation names the band and rate") {
  SUBCASE("band too near Nyquist") {
    try {
      bandpass(Eigen::MatrixXd::Zero(1, 100), {"gamma", 26.0, 40.0}, 64.0);
      FAIL("expected validation_error");
    } catch (const validation_error& e) {
      const std::string msg = e.what();
      CHECK(msg.find("gamma") != std::string::npos);
      CHECK(msg.find("64") != std::string::npos);
    }
  }
  SUBCASE("inverted and degenerate edges") {
    CHECK_THROWS_AS(design_bandpass(6.0, 4.0, 256.0), validation_error);
    CHECK_THROWS_AS(design_bandpass(0.0, 4.0, 256.0), validation_error);
  }
  SUBCASE("odd or tiny order") {
    CHECK_THROWS_AS(design_bandpass(4.0, 6.0, 256.0, FilterSpec{3}), validation_error);
    CHECK_THROWS_AS(design_bandpass(4.0, 6.0, 256.0, FilterSpec{0}), validation_error);
  }
}

TEST_CASE("bandpass preserves container shape") {
  Recording rec;
  rec.rate_hz = 256.0;
  rec.channel_labels = {"a", "b"};
  rec.modalities = {Modality::EEG, Modality::EEG};
  rec.samples = Eigen::MatrixXd::Random(2, 1024);
  const auto filtered = bandpass(rec, theta());
  CHECK(filtered.samples.rows() == 2);
  CHECK(filtered.samples.cols() == 1024);
  CHECK(filtered.channel_labels == rec.channel_labels);
}
