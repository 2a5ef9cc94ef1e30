#pragma once

#include "cogload/features.hpp"

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

namespace cogload {

/// Linear discriminant with shrinkage-regularized pooled covariance.
/// Standardization parameters come from the training data; features whose
/// training standard deviation is zero are dropped and recorded. Positive
/// scores mean class 1 (high workload).
struct LdaModel {
  Eigen::VectorXd weights;  // over kept features
  double bias = 0.0;
  double gamma = 0.0;  // shrinkage toward the scaled identity, in [0,1]
  Eigen::VectorXd means;   // per kept feature
  Eigen::VectorXd stds;    // per kept feature, > 0
  std::vector<Eigen::Index> kept;  // indices into the original feature order
  std::vector<std::string> dropped_names;
  Eigen::Index input_width = 0;
};

/// Trains on labeled rows. The shrinkage intensity comes from the
/// Ledoit-Wolf analytic formula applied to the pooled within-class scatter,
/// clipped to [0,1]; pass force_gamma to pin it (0 recovers plain LDA).
LdaModel slda_train(const FeatureMatrix& features,
                    std::optional<double> force_gamma = std::nullopt);

/// Discriminant score w^T standardized(x) + bias for one original-width row.
double slda_score(const LdaModel& model, const Eigen::VectorXd& features);

/// Row-wise scores; identical to scoring each row alone.
Eigen::VectorXd slda_score(const LdaModel& model, const FeatureMatrix& features);

}  // namespace cogload
