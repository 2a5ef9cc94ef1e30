#include "cogload/bands.hpp"

#include "cogload/errors.hpp"

namespace cogload {

std::string to_string(BandSet s) { return s == BandSet::Low3 ? "low3" : "all5"; }

BandSet band_set_from_string(const std::string& s) {
  if (s == "low3") return BandSet::Low3;
  if (s == "all5") return BandSet::All5;
  throw validation_error("unknown band set '" + s + "' (expected low3|all5)");
}

std::vector<BandDef> bands_of(BandSet set) {
  const auto& all = analysis_bands();
  if (set == BandSet::Low3) return {all.begin(), all.begin() + 3};
  return all;
}

}  // namespace cogload
