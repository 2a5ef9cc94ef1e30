#include "cogload/filter.hpp"

#include "cogload/errors.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

namespace cogload {

namespace {

using cplx = std::complex<double>;

std::string band_text(double low_hz, double high_hz, double rate_hz) {
  return "band " + std::to_string(low_hz) + "-" + std::to_string(high_hz) +
         " Hz at rate " + std::to_string(rate_hz) + " Hz";
}

// Evaluates the cascade response at normalized angular frequency w.
cplx response_at(const std::vector<Biquad>& sections, double w) {
  const cplx z1 = std::polar(1.0, -w);
  const cplx z2 = z1 * z1;
  cplx h = 1.0;
  for (const auto& s : sections) {
    h *= (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
  }
  return h;
}

}  // namespace

Eigen::Index BiquadCascade::settle_samples() const {
  if (max_pole_radius <= 0.0 || max_pole_radius >= 1.0) return 1;
  const double n = std::log(1e-8) / std::log(max_pole_radius);
  return static_cast<Eigen::Index>(std::min(2e6, std::ceil(n)));
}

BiquadCascade design_bandpass(double low_hz, double high_hz, double rate_hz,
                              const FilterSpec& spec) {
  if (spec.order < 2 || spec.order % 2 != 0) {
    throw validation_error("filter order must be a positive even integer >= 2");
  }
  if (!(rate_hz > 0.0)) throw validation_error("filter rate_hz must be positive");
  const double nyquist = rate_hz / 2.0;
  if (!(low_hz > 0.0) || !(low_hz < high_hz) || !(high_hz < nyquist)) {
    throw validation_error("invalid or unstable band-pass design: " +
                           band_text(low_hz, high_hz, rate_hz) +
                           " (need 0 < low < high < rate/2)");
  }

  const int n = spec.order;
  // Prototype low-pass poles on the unit left-half circle.
  std::vector<cplx> proto;
  for (int k = 1; k <= n; ++k) {
    const double phi =
        std::numbers::pi * (2.0 * k + n - 1.0) / (2.0 * n);
    proto.emplace_back(std::cos(phi), std::sin(phi));
  }

  // Prewarped analog band edges for the bilinear mapping.
  const double fs2 = 2.0 * rate_hz;
  const double warp_low = fs2 * std::tan(std::numbers::pi * low_hz / rate_hz);
  const double warp_high = fs2 * std::tan(std::numbers::pi * high_hz / rate_hz);
  const double bw = warp_high - warp_low;
  const double w0_sq = warp_low * warp_high;

  // Low-pass to band-pass: each prototype pole splits into a pair.
  std::vector<cplx> analog_poles;
  for (const auto& p : proto) {
    const cplx term = p * (bw / 2.0);
    const cplx root = std::sqrt(term * term - w0_sq);
    analog_poles.push_back(term + root);
    analog_poles.push_back(term - root);
  }

  // Bilinear transform into the z-plane.
  std::vector<cplx> digital_poles;
  double max_radius = 0.0;
  for (const auto& s : analog_poles) {
    const cplx z = (fs2 + s) / (fs2 - s);
    digital_poles.push_back(z);
    max_radius = std::max(max_radius, std::abs(z));
  }
  if (max_radius >= 1.0 - 1e-12) {
    throw validation_error("unstable band-pass design: " + band_text(low_hz, high_hz, rate_hz));
  }

  // The pole set is closed under conjugation (real coefficients). Build each
  // section from one upper-half-plane pole and its conjugate: a1 = -2 Re(p),
  // a2 = |p|^2. Real poles (very wide bands) are paired among themselves.
  // The band-pass zeros are n at z=+1 and n at z=-1, one of each per
  // section: numerator (z-1)(z+1) = z^2 - 1.
  constexpr double kImagTol = 1e-12;
  std::vector<cplx> upper;
  std::vector<double> real_poles;
  for (const auto& z : digital_poles) {
    if (z.imag() > kImagTol) {
      upper.push_back(z);
    } else if (z.imag() >= -kImagTol) {
      real_poles.push_back(z.real());
    }
  }
  if (upper.size() * 2 + real_poles.size() != digital_poles.size() ||
      real_poles.size() % 2 != 0) {
    throw numeric_error("band-pass pole set is not conjugate-symmetric: " +
                        band_text(low_hz, high_hz, rate_hz));
  }
  // Sections with poles nearest the unit circle last, for dynamic range.
  std::sort(upper.begin(), upper.end(), [](const cplx& a, const cplx& b) {
    const double ra = std::abs(a), rb = std::abs(b);
    if (ra != rb) return ra < rb;
    return a.real() < b.real();
  });
  std::sort(real_poles.begin(), real_poles.end(),
            [](double a, double b) { return std::abs(a) < std::abs(b); });

  BiquadCascade cascade;
  cascade.max_pole_radius = max_radius;
  for (const auto& p : upper) {
    Biquad s;
    s.b0 = 1.0;
    s.b1 = 0.0;
    s.b2 = -1.0;
    s.a1 = -2.0 * p.real();
    s.a2 = std::norm(p);
    cascade.sections.push_back(s);
  }
  for (std::size_t i = 0; i + 1 < real_poles.size(); i += 2) {
    Biquad s;
    s.b0 = 1.0;
    s.b1 = 0.0;
    s.b2 = -1.0;
    s.a1 = -(real_poles[i] + real_poles[i + 1]);
    s.a2 = real_poles[i] * real_poles[i + 1];
    cascade.sections.push_back(s);
  }

  // Normalize to unit gain at the geometric center frequency.
  const double w_center = 2.0 * std::atan(std::sqrt(w0_sq) / fs2);
  const double mag = std::abs(response_at(cascade.sections, w_center));
  if (!(mag > 0.0) || !std::isfinite(mag)) {
    throw numeric_error("degenerate band-pass response: " + band_text(low_hz, high_hz, rate_hz));
  }
  const double section_gain = std::pow(1.0 / mag, 1.0 / n);
  for (auto& s : cascade.sections) {
    s.b0 *= section_gain;
    s.b1 *= section_gain;
    s.b2 *= section_gain;
  }
  return cascade;
}

Eigen::VectorXd filter_forward(const BiquadCascade& cascade, const Eigen::VectorXd& x) {
  Eigen::VectorXd y = x;
  for (const auto& s : cascade.sections) {
    double z1 = 0.0, z2 = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double in = y[i];
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      y[i] = out;
    }
  }
  return y;
}

namespace {

/// Value of the repeated odd-reflection extension of x at (possibly
/// out-of-range) index j. Reflecting about both endpoints tiles the signal
/// with period 2(n-1); every full period adds the offset 2(x[n-1]-x[0]), so
/// the extension stays continuous for any padding length.
double reflect_extension(const Eigen::VectorXd& x, Eigen::Index j) {
  const Eigen::Index n = x.size();
  if (n == 1) return x[0];
  const Eigen::Index period = 2 * (n - 1);
  Eigen::Index m = j / period;
  Eigen::Index k = j - m * period;
  if (k < 0) {
    k += period;
    m -= 1;
  }
  const double base = k < n ? x[k] : 2.0 * x[n - 1] - x[period - k];
  return base + 2.0 * static_cast<double>(m) * (x[n - 1] - x[0]);
}

}  // namespace

Eigen::VectorXd filtfilt(const BiquadCascade& cascade, const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  if (n == 0) throw validation_error("cannot filter an empty signal");
  const Eigen::Index pad = cascade.settle_samples();

  Eigen::VectorXd ext(n + 2 * pad);
  for (Eigen::Index i = 0; i < ext.size(); ++i) {
    ext[i] = reflect_extension(x, i - pad);
  }

  Eigen::VectorXd y = filter_forward(cascade, ext);
  y.reverseInPlace();
  y = filter_forward(cascade, y);
  y.reverseInPlace();
  return y.segment(pad, n);
}

Eigen::MatrixXd bandpass(const Eigen::MatrixXd& channels_by_samples, const BandDef& band,
                         double rate_hz, const FilterSpec& spec) {
  if (!channels_by_samples.allFinite()) {
    throw data_error("band-pass input contains non-finite values");
  }
  BiquadCascade cascade;
  try {
    cascade = design_bandpass(band.low_hz, band.high_hz, rate_hz, spec);
  } catch (const validation_error& e) {
    throw validation_error("band '" + band.name + "': " + e.what());
  }
  Eigen::MatrixXd out(channels_by_samples.rows(), channels_by_samples.cols());
  for (Eigen::Index c = 0; c < channels_by_samples.rows(); ++c) {
    out.row(c) = filtfilt(cascade, channels_by_samples.row(c).transpose()).transpose();
  }
  return out;
}

Recording bandpass(const Recording& rec, const BandDef& band, const FilterSpec& spec) {
  Recording out = rec;
  out.samples = bandpass(rec.samples, band, rec.rate_hz, spec);
  return out;
}

EpochSet bandpass(const EpochSet& epochs, const BandDef& band, const FilterSpec& spec) {
  EpochSet out = epochs;
  for (auto& trial : out.data) {
    trial = bandpass(trial, band, epochs.rate_hz, spec);
  }
  return out;
}

}  // namespace cogload
