#include "cogload/lda.hpp"

#include "cogload/errors.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <string>

namespace cogload {

LdaModel slda_train(const FeatureMatrix& features, std::optional<double> force_gamma) {
  validate(features);
  if (!features.labels) throw validation_error("sLDA training needs labeled features");
  const auto n = features.n_rows();
  if (features.width() < 1) throw validation_error("sLDA training needs at least one feature");

  std::vector<Eigen::Index> class0;
  std::vector<Eigen::Index> class1;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int y = (*features.labels)[static_cast<std::size_t>(i)];
    if (y == 0) {
      class0.push_back(i);
    } else if (y == 1) {
      class1.push_back(i);
    } else {
      throw validation_error("sLDA labels must be 0 or 1, got " + std::to_string(y));
    }
  }
  if (class0.size() < 2 || class1.size() < 2) {
    throw data_error("sLDA needs at least 2 samples per class (got " +
                     std::to_string(class0.size()) + " / " + std::to_string(class1.size()) +
                     ")");
  }

  LdaModel model;
  model.input_width = features.width();

  // Standardization from the full training set; zero-variance features are
  // dropped and recorded rather than fatal.
  const Eigen::VectorXd mean_all = features.rows.colwise().mean().transpose();
  Eigen::VectorXd std_all(features.width());
  for (Eigen::Index j = 0; j < features.width(); ++j) {
    const double var =
        (features.rows.col(j).array() - mean_all[j]).square().sum() /
        static_cast<double>(n - 1);
    std_all[j] = std::sqrt(var);
  }
  for (Eigen::Index j = 0; j < features.width(); ++j) {
    // "Zero" variance up to accumulation noise on a constant column.
    const double floor = 1e-12 * std::max(1.0, std::abs(mean_all[j]));
    if (std_all[j] > floor) {
      model.kept.push_back(j);
    } else {
      model.dropped_names.push_back(features.names[static_cast<std::size_t>(j)]);
    }
  }
  const auto d = static_cast<Eigen::Index>(model.kept.size());
  if (d == 0) throw data_error("all features have zero variance; nothing to train on");

  model.means.resize(d);
  model.stds.resize(d);
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const auto src = model.kept[static_cast<std::size_t>(j)];
    model.means[j] = mean_all[src];
    model.stds[j] = std_all[src];
    x.col(j) = (features.rows.col(src).array() - model.means[j]) / model.stds[j];
  }

  Eigen::VectorXd mu0 = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd mu1 = Eigen::VectorXd::Zero(d);
  for (const auto i : class0) mu0 += x.row(i).transpose();
  for (const auto i : class1) mu1 += x.row(i).transpose();
  mu0 /= static_cast<double>(class0.size());
  mu1 /= static_cast<double>(class1.size());

  // Pooled within-class scatter, unbiased divisor n - 2.
  Eigen::MatrixXd z(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int y = (*features.labels)[static_cast<std::size_t>(i)];
    z.row(i) = x.row(i) - (y == 1 ? mu1 : mu0).transpose();
  }
  const Eigen::MatrixXd pooled =
      z.transpose() * z / static_cast<double>(n - 2);

  double gamma;
  if (force_gamma) {
    gamma = *force_gamma;
    if (gamma < 0.0 || gamma > 1.0) {
      throw validation_error("forced shrinkage gamma must lie in [0,1]");
    }
  } else {
    // Ledoit-Wolf analytic intensity on the centered rows: the ratio of the
    // estimation variance of the sample covariance to its dispersion around
    // the scaled identity.
    const Eigen::MatrixXd s = z.transpose() * z / static_cast<double>(n);
    const double mu = s.trace() / static_cast<double>(d);
    const double dispersion =
        (s - mu * Eigen::MatrixXd::Identity(d, d)).squaredNorm() / static_cast<double>(d);
    double beta_sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::MatrixXd outer = z.row(i).transpose() * z.row(i);
      beta_sum += (outer - s).squaredNorm() / static_cast<double>(d);
    }
    const double beta =
        std::min(dispersion, beta_sum / (static_cast<double>(n) * static_cast<double>(n)));
    gamma = dispersion > 0.0 ? beta / dispersion : 1.0;
    gamma = std::min(1.0, std::max(0.0, gamma));
  }

  const double nu = pooled.trace() / static_cast<double>(d);
  const Eigen::MatrixXd shrunk =
      (1.0 - gamma) * pooled + gamma * nu * Eigen::MatrixXd::Identity(d, d);

  Eigen::LLT<Eigen::MatrixXd> llt(shrunk);
  if (llt.info() != Eigen::Success) {
    throw numeric_error("shrunk covariance is not positive definite; cannot solve LDA");
  }
  model.weights = llt.solve(mu1 - mu0);
  model.bias = -model.weights.dot((mu0 + mu1) / 2.0);
  model.gamma = gamma;
  if (!model.weights.allFinite() || !std::isfinite(model.bias)) {
    throw numeric_error("LDA produced non-finite weights");
  }
  return model;
}

double slda_score(const LdaModel& model, const Eigen::VectorXd& features) {
  if (features.size() != model.input_width) {
    throw validation_error("feature width " + std::to_string(features.size()) +
                           " does not match model width " +
                           std::to_string(model.input_width));
  }
  double score = model.bias;
  for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(model.kept.size()); ++j) {
    const auto src = model.kept[static_cast<std::size_t>(j)];
    score += model.weights[j] * (features[src] - model.means[j]) / model.stds[j];
  }
  return score;
}

Eigen::VectorXd slda_score(const LdaModel& model, const FeatureMatrix& features) {
  Eigen::VectorXd scores(features.n_rows());
  for (Eigen::Index i = 0; i < features.n_rows(); ++i) {
    scores[i] = slda_score(model, Eigen::VectorXd(features.rows.row(i).transpose()));
  }
  return scores;
}

}  // namespace cogload
