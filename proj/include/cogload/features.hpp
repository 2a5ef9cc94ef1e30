#pragma once

#include "cogload/csp.hpp"
#include "cogload/filter.hpp"
#include "cogload/types.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace cogload {

struct FeatureVector {
  Eigen::VectorXd values;
  std::vector<std::string> names;
};

/// One row per window/trial. Feature order is a fixed total order (bands in
/// frequency order, filters in model order, physio features in documented
/// order), so identical inputs produce identical matrices bit for bit.
struct FeatureMatrix {
  Eigen::MatrixXd rows;  // windows x features
  std::vector<std::string> names;
  std::optional<std::vector<int>> labels;
  std::vector<double> t_start_s;

  Eigen::Index n_rows() const { return rows.rows(); }
  Eigen::Index width() const { return rows.cols(); }
};

void validate(const FeatureMatrix& m);

/// Per epoch and band: band-pass, project through the band's spatial filters,
/// take the mean squared amplitude per virtual channel, and (by default)
/// natural-log transform. Width = bands x filters per band. Models must be
/// supplied in the band order of `set`.
FeatureMatrix eeg_features(const EpochSet& epochs, const std::vector<CspModel>& models,
                           BandSet set, bool log_power = true,
                           const FilterSpec& spec = {});

/// Horizontal concatenation of feature blocks with aligned windows.
FeatureMatrix fuse(const std::vector<FeatureMatrix>& parts);

/// CSV export: header row of feature names plus optional label / t_start_s
/// columns.
void save_features_csv(const FeatureMatrix& m, const std::filesystem::path& path);

}  // namespace cogload
