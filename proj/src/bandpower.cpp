#include "cogload/bandpower.hpp"

#include "cogload/errors.hpp"

#include <string>

namespace cogload {

Eigen::VectorXd band_power(const Eigen::MatrixXd& window) {
  if (window.size() == 0) throw validation_error("band_power of an empty window");
  return window.array().square().rowwise().mean();
}

namespace detail {

double band_power_between_unchecked(const Eigen::VectorXd& window, double low_hz,
                                    double high_hz, double rate_hz,
                                    const FilterSpec& spec) {
  if (window.size() == 0) throw validation_error("band_power_between of an empty window");
  const auto cascade = design_bandpass(low_hz, high_hz, rate_hz, spec);
  return band_power(Eigen::VectorXd(filtfilt(cascade, window)));
}

}  // namespace detail

double band_power_between(const Eigen::VectorXd& window, double low_hz, double high_hz,
                          double rate_hz, const FilterSpec& spec) {
  if (window.size() == 0) throw validation_error("band_power_between of an empty window");
  if (!(low_hz > 0.0)) throw validation_error("band_power_between low edge must be positive");
  const double duration = static_cast<double>(window.size()) / rate_hz;
  const double cycles = duration * low_hz;
  const bool relaxed = low_hz >= 0.1 && duration >= 10.0 && cycles >= 1.0;
  if (cycles < 2.0 && !relaxed) {
    throw validation_error("window of " + std::to_string(duration) +
                           " s is too short for a " + std::to_string(low_hz) +
                           " Hz band edge (needs two cycles)");
  }
  return detail::band_power_between_unchecked(window, low_hz, high_hz, rate_hz, spec);
}

}  // namespace cogload
