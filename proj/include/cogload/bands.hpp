#pragma once

#include <string>
#include <vector>

namespace cogload {

struct BandDef {
  std::string name;
  double low_hz = 0.0;
  double high_hz = 0.0;
};

/// The five analysis bands, in frequency order.
inline const std::vector<BandDef>& analysis_bands() {
  static const std::vector<BandDef> bands = {
      {"delta", 1.0, 3.0},  {"theta", 4.0, 6.0},  {"alpha", 7.0, 13.0},
      {"beta", 14.0, 25.0}, {"gamma", 26.0, 40.0},
  };
  return bands;
}

enum class BandSet { Low3, All5 };

std::string to_string(BandSet s);
BandSet band_set_from_string(const std::string& s);

/// low3 = delta, theta, alpha; all5 adds beta and gamma.
std::vector<BandDef> bands_of(BandSet set);

}  // namespace cogload
