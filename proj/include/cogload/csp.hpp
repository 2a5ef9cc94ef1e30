#pragma once

#include "cogload/bands.hpp"
#include "cogload/types.hpp"

#include <Eigen/Core>

#include <optional>
#include <vector>

namespace cogload {

/// Symmetric PSD channel covariance, averaged over trials with each per-trial
/// covariance normalized to unit trace first.
struct CovMatrix {
  Eigen::MatrixXd values;
  int n_trials_aggregated = 0;
};

void validate(const CovMatrix& cov);

/// Rank-k penalty built from the principal components of a covariance
/// difference; the directions along which signals shift between contexts.
struct PenaltyMatrix {
  Eigen::MatrixXd values;
  int k_components = 0;
  std::vector<double> component_eigenvalues;
  bool no_shift = false;  // difference was numerically zero
};

struct CspRegularization {
  enum class Kind { None, Invariant } kind = Kind::None;
  double lambda = 0.0;
  int k_components = 0;
};

/// Spatial filter bank for one band. Rows of `filters` are filters w, applied
/// as virtual channels w^T x. The first half of the rows comes from the
/// large-eigenvalue end (descending), the second half from the small end
/// (ascending). Eigenvalues live in [0, 1]; for invariant-regularized models
/// the second-half entries are 1 minus the eigenvalue of the complementary
/// problem that produced the filter.
struct CspModel {
  Eigen::MatrixXd filters;  // n_filters x channels
  Eigen::VectorXd eigenvalues;
  BandDef band;
  CspRegularization regularization;

  Eigen::Index n_filters() const { return filters.rows(); }
  Eigen::Index channels() const { return filters.cols(); }
};

/// Average of per-epoch sample covariances (channel means removed, unit-trace
/// normalized) over the trials of one class. Needs >= 2 trials of the class
/// and >= 2 channels; an all-constant epoch is an error.
CovMatrix class_covariance(const EpochSet& epochs, int label);

/// Same aggregation over an explicit trial subset (empty = all trials).
CovMatrix pooled_covariance(const EpochSet& epochs,
                            const std::vector<std::size_t>& trial_indices = {});

/// Solves C1 w = lambda (C1 + C0) w and keeps n_filters/2 eigenvectors from
/// each end of the spectrum. Filters are scaled so w^T (C1+C0) w = 1 and
/// sign-fixed so the largest-magnitude coefficient is positive.
CspModel csp_train(const CovMatrix& c1, const CovMatrix& c0, int n_filters,
                   const BandDef& band = {});

/// Principal components of the trace-normalized covariance difference
/// C_use - C_calib; P is the sum of the k strongest components' outer
/// products.
PenaltyMatrix pc_difference(const CovMatrix& c_calib, const CovMatrix& c_use, int k);

/// Invariant CSP: the large half maximizes w^T C1 w / w^T (C1+C0+lambda P) w,
/// the small half does the same with C0 in the numerator. Filters scaled so
/// the denominator equals 1.
CspModel csp_train_regularized(const CovMatrix& c1, const CovMatrix& c0,
                               const PenaltyMatrix& p, double lambda, int n_filters,
                               const BandDef& band = {});

/// Projects epochs through the filter bank: output channel i is filter row i
/// dotted with the input channels, per sample.
EpochSet apply_spatial(const CspModel& model, const EpochSet& epochs);

}  // namespace cogload
