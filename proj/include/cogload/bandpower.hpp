#pragma once

#include "cogload/filter.hpp"

#include <Eigen/Core>

namespace cogload {

/// Mean of squared samples per channel (rows). No mean removal.
Eigen::VectorXd band_power(const Eigen::MatrixXd& window);

inline double band_power(const Eigen::VectorXd& window) {
  return window.squaredNorm() / static_cast<double>(window.size());
}

/// Band power of the band-pass-filtered window. The window must hold at
/// least two cycles of low_hz; for bands whose low edge is >= 0.1 Hz a
/// single cycle suffices on windows of >= 10 s (the convention for slow
/// skin-conductance bands).
double band_power_between(const Eigen::VectorXd& window, double low_hz, double high_hz,
                          double rate_hz, const FilterSpec& spec = {});

namespace detail {
/// Same computation without the minimum-cycles gate; used by the HRV
/// low-frequency feature, whose 10 s windows are far shorter than two cycles
/// of its 0.003 Hz floor by deliberate compromise.
double band_power_between_unchecked(const Eigen::VectorXd& window, double low_hz,
                                    double high_hz, double rate_hz,
                                    const FilterSpec& spec = {});
}  // namespace detail

}  // namespace cogload
