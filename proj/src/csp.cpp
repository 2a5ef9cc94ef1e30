#include "cogload/csp.hpp"

#include "cogload/errors.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <string>

namespace cogload {

namespace {

constexpr double kRidgeEps = 1e-8;

/// Per-epoch sample covariance: channel means removed, divisor S-1, then
/// normalized to unit trace.
Eigen::MatrixXd epoch_covariance(const Eigen::MatrixXd& trial) {
  const auto samples = trial.cols();
  if (samples < 2) throw validation_error("epoch too short for covariance estimation");
  const Eigen::VectorXd mean = trial.rowwise().mean();
  const Eigen::MatrixXd centered = trial.colwise() - mean;
  Eigen::MatrixXd cov =
      centered * centered.transpose() / static_cast<double>(samples - 1);
  const double tr = cov.trace();
  if (!(tr > 0.0)) {
    throw data_error("rank-0 epoch (all channels constant); cannot normalize covariance");
  }
  cov /= tr;
  return cov;
}

CovMatrix aggregate_covariance(const EpochSet& epochs,
                               const std::vector<std::size_t>& trials) {
  if (trials.size() < 2) {
    throw data_error("covariance estimation needs at least 2 epochs, got " +
                     std::to_string(trials.size()));
  }
  if (epochs.channels() < 2) {
    throw validation_error("covariance estimation needs at least 2 channels");
  }
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(epochs.channels(), epochs.channels());
  for (const auto t : trials) {
    acc += epoch_covariance(epochs.data[t]);
  }
  acc /= static_cast<double>(trials.size());
  acc = ((acc + acc.transpose()) / 2.0).eval();
  CovMatrix out{acc, static_cast<int>(trials.size())};
  validate(out);
  return out;
}

/// One side of the CSP spectrum: the n_keep strongest eigenvectors of
/// numerator w = mu * denominator w, scaled so w^T denominator_exact w = 1
/// and sign-fixed. Returns filters in descending mu order together with each
/// filter's exact Rayleigh quotient.
struct SpectrumSide {
  Eigen::MatrixXd filters;    // n_keep x channels
  Eigen::VectorXd quotients;  // numerator quotient against denominator_exact
};

SpectrumSide strongest_side(const Eigen::MatrixXd& numerator,
                            const Eigen::MatrixXd& denominator_exact, int n_keep) {
  const auto dim = numerator.rows();
  const double tr = denominator_exact.trace();

  // Ridge only when the composite is numerically unsafe: an unconditional
  // epsilon breaks the B-orthogonality of the filters at the same 1e-8
  // level the model guarantees it.
  Eigen::MatrixXd solve_matrix = denominator_exact;
  {
    Eigen::LLT<Eigen::MatrixXd> probe(denominator_exact);
    bool safe = probe.info() == Eigen::Success;
    if (safe) {
      const double min_pivot = probe.matrixLLT().diagonal().minCoeff();
      safe = min_pivot * min_pivot > 1e-10 * tr / static_cast<double>(dim);
    }
    if (!safe) {
      double eps = kRidgeEps * tr / static_cast<double>(dim);
      bool ridged_ok = false;
      for (int attempt = 0; attempt < 6 && !ridged_ok; ++attempt) {
        solve_matrix = denominator_exact + eps * Eigen::MatrixXd::Identity(dim, dim);
        ridged_ok = Eigen::LLT<Eigen::MatrixXd>(solve_matrix).info() == Eigen::Success;
        eps *= 100.0;
      }
      if (!ridged_ok) {
        throw numeric_error("composite covariance is indefinite even after ridging");
      }
    }
  }

  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(numerator, solve_matrix);
  if (solver.info() != Eigen::Success) {
    throw numeric_error("generalized eigensolver failed (composite matrix indefinite?)");
  }

  SpectrumSide side;
  side.filters.resize(n_keep, dim);
  side.quotients.resize(n_keep);
  for (int i = 0; i < n_keep; ++i) {
    // Eigenvalues ascend; take from the top.
    Eigen::VectorXd w = solver.eigenvectors().col(dim - 1 - i);
    const double denom = w.dot(denominator_exact * w);
    if (!(denom > 0.0)) {
      throw numeric_error("filter has non-positive composite variance; matrices degenerate");
    }
    w /= std::sqrt(denom);
    // Largest-magnitude coefficient made positive (eigenvectors are
    // sign-ambiguous; fixed for reproducible output).
    Eigen::Index imax = 0;
    w.cwiseAbs().maxCoeff(&imax);
    if (w[imax] < 0.0) w = -w;
    side.filters.row(i) = w.transpose();
    side.quotients[i] = w.dot(numerator * w) / w.dot(denominator_exact * w);
  }
  return side;
}

void check_filter_request(const CovMatrix& c1, const CovMatrix& c0, int n_filters) {
  if (c1.values.rows() != c0.values.rows()) {
    throw validation_error("class covariance dimensions do not match");
  }
  if (n_filters < 2 || n_filters % 2 != 0) {
    throw validation_error("n_filters must be a positive even integer");
  }
  if (n_filters > c1.values.rows()) {
    throw validation_error("n_filters (" + std::to_string(n_filters) +
                           ") exceeds channel count (" + std::to_string(c1.values.rows()) +
                           ")");
  }
}

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

}  // namespace

void validate(const CovMatrix& cov) {
  const auto n = cov.values.rows();
  if (n < 1 || cov.values.cols() != n) throw validation_error("covariance must be square");
  if ((cov.values - cov.values.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
    throw validation_error("covariance is not symmetric");
  }
  const double tr = cov.values.trace();
  if (!(tr > 0.0)) throw validation_error("covariance trace must be positive");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov.values,
                                                    Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-8 * tr) {
    throw validation_error("covariance is not positive semi-definite");
  }
  if (cov.n_trials_aggregated < 1) {
    throw validation_error("covariance must aggregate at least one trial");
  }
}

CovMatrix class_covariance(const EpochSet& epochs, int label) {
  return aggregate_covariance(epochs, epochs.trials_of(label));
}

CovMatrix pooled_covariance(const EpochSet& epochs,
                            const std::vector<std::size_t>& trial_indices) {
  if (!trial_indices.empty()) return aggregate_covariance(epochs, trial_indices);
  std::vector<std::size_t> all(epochs.trials());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return aggregate_covariance(epochs, all);
}

CspModel csp_train(const CovMatrix& c1, const CovMatrix& c0, int n_filters,
                   const BandDef& band) {
  check_filter_request(c1, c0, n_filters);
  const Eigen::MatrixXd composite = c1.values + c0.values;
  const int half = n_filters / 2;

  const auto top = strongest_side(c1.values, composite, half);
  const auto bottom = strongest_side(c0.values, composite, half);

  CspModel model;
  model.band = band;
  model.filters.resize(n_filters, composite.rows());
  model.eigenvalues.resize(n_filters);
  model.filters.topRows(half) = top.filters;
  model.filters.bottomRows(half) = bottom.filters;
  for (int i = 0; i < half; ++i) {
    model.eigenvalues[i] = clamp01(top.quotients[i]);
    // The small end is reported as the C1-side eigenvalue 1 - mu0, ascending.
    model.eigenvalues[half + i] = clamp01(1.0 - bottom.quotients[i]);
  }
  return model;
}

PenaltyMatrix pc_difference(const CovMatrix& c_calib, const CovMatrix& c_use, int k) {
  if (c_calib.values.rows() != c_use.values.rows()) {
    throw validation_error("covariance dimensions do not match");
  }
  const auto dim = c_calib.values.rows();
  if (k < 1) throw validation_error("k must be positive");
  if (k > dim) {
    throw validation_error("k (" + std::to_string(k) + ") exceeds channel count (" +
                           std::to_string(dim) + ")");
  }
  const Eigen::MatrixXd delta =
      c_use.values / c_use.values.trace() - c_calib.values / c_calib.values.trace();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(delta);
  if (es.info() != Eigen::Success) throw numeric_error("eigendecomposition of shift failed");

  // Strongest components by |eigenvalue|.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(dim));
  for (Eigen::Index i = 0; i < dim; ++i) order[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::abs(es.eigenvalues()[a]) > std::abs(es.eigenvalues()[b]);
  });

  PenaltyMatrix p;
  p.k_components = k;
  p.values = Eigen::MatrixXd::Zero(dim, dim);
  for (int i = 0; i < k; ++i) {
    const auto idx = order[static_cast<std::size_t>(i)];
    const Eigen::VectorXd v = es.eigenvectors().col(idx);
    p.values += v * v.transpose();
    p.component_eigenvalues.push_back(es.eigenvalues()[idx]);
  }
  p.values = ((p.values + p.values.transpose()) / 2.0).eval();
  p.no_shift = true;
  for (const double ev : p.component_eigenvalues) {
    if (std::abs(ev) > 1e-12) p.no_shift = false;
  }
  return p;
}

CspModel csp_train_regularized(const CovMatrix& c1, const CovMatrix& c0,
                               const PenaltyMatrix& p, double lambda, int n_filters,
                               const BandDef& band) {
  check_filter_request(c1, c0, n_filters);
  if (lambda < 0.0) throw validation_error("lambda must be non-negative");
  if (p.values.rows() != c1.values.rows()) {
    throw validation_error("penalty dimensions do not match covariances");
  }
  const Eigen::MatrixXd denom = c1.values + c0.values + lambda * p.values;
  const int half = n_filters / 2;

  const auto top = strongest_side(c1.values, denom, half);
  const auto bottom = strongest_side(c0.values, denom, half);

  CspModel model;
  model.band = band;
  model.regularization = {CspRegularization::Kind::Invariant, lambda, p.k_components};
  model.filters.resize(n_filters, denom.rows());
  model.eigenvalues.resize(n_filters);
  model.filters.topRows(half) = top.filters;
  model.filters.bottomRows(half) = bottom.filters;
  for (int i = 0; i < half; ++i) {
    model.eigenvalues[i] = clamp01(top.quotients[i]);
    model.eigenvalues[half + i] = clamp01(1.0 - bottom.quotients[i]);
  }
  return model;
}

EpochSet apply_spatial(const CspModel& model, const EpochSet& epochs) {
  if (epochs.channels() != model.channels()) {
    throw validation_error("epoch channel count (" + std::to_string(epochs.channels()) +
                           ") does not match spatial model (" +
                           std::to_string(model.channels()) + ")");
  }
  EpochSet out;
  out.window_seconds = epochs.window_seconds;
  out.rate_hz = epochs.rate_hz;
  out.labels = epochs.labels;
  out.t_start_s = epochs.t_start_s;
  for (Eigen::Index i = 0; i < model.n_filters(); ++i) {
    out.channel_labels.push_back(model.band.name + ":csp" + std::to_string(i));
    out.modalities.push_back(Modality::EEG);
  }
  out.data.reserve(epochs.trials());
  for (const auto& trial : epochs.data) {
    out.data.push_back(model.filters * trial);
  }
  return out;
}

}  // namespace cogload
