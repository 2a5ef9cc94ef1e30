#include "cogload/features.hpp"

#include "cogload/bandpower.hpp"
#include "cogload/errors.hpp"
#include "cogload/io.hpp"

#include <cmath>
#include <string>

namespace cogload {

void validate(const FeatureMatrix& m) {
  if (m.rows.cols() != static_cast<Eigen::Index>(m.names.size())) {
    throw validation_error("feature name count does not match matrix width");
  }
  if (!m.rows.allFinite()) throw validation_error("feature matrix contains non-finite values");
  if (m.labels && static_cast<Eigen::Index>(m.labels->size()) != m.rows.rows()) {
    throw validation_error("feature label count does not match row count");
  }
  if (static_cast<Eigen::Index>(m.t_start_s.size()) != m.rows.rows()) {
    throw validation_error("feature timestamp count does not match row count");
  }
}

FeatureMatrix eeg_features(const EpochSet& epochs, const std::vector<CspModel>& models,
                           BandSet set, bool log_power, const FilterSpec& spec) {
  const auto bands = bands_of(set);
  if (models.size() != bands.size()) {
    throw validation_error("need one spatial model per band: expected " +
                           std::to_string(bands.size()) + ", got " +
                           std::to_string(models.size()));
  }
  const auto eeg_rows = epochs.channels_of(Modality::EEG);
  if (eeg_rows.empty()) throw validation_error("epochs carry no EEG channels");

  Eigen::Index width = 0;
  for (std::size_t b = 0; b < bands.size(); ++b) {
    if (models[b].band.name != bands[b].name) {
      throw validation_error("spatial model order does not match band set: expected '" +
                             bands[b].name + "', got '" + models[b].band.name + "'");
    }
    if (models[b].channels() != static_cast<Eigen::Index>(eeg_rows.size())) {
      throw validation_error("spatial model for band '" + bands[b].name +
                             "' does not match EEG channel count");
    }
    width += models[b].n_filters();
  }

  FeatureMatrix out;
  out.labels = epochs.labels;
  out.t_start_s = epochs.t_start_s;
  for (std::size_t b = 0; b < bands.size(); ++b) {
    for (Eigen::Index f = 0; f < models[b].n_filters(); ++f) {
      out.names.push_back("EEG:" + bands[b].name + ":csp" + std::to_string(f));
    }
  }
  out.rows.resize(static_cast<Eigen::Index>(epochs.trials()), width);

  // Mean squared amplitude of the filtered projection w^T x equals the
  // quadratic form w^T (X X^T / S) w; the scatter form is reused across all
  // filters of a band.
  for (std::size_t t = 0; t < epochs.trials(); ++t) {
    Eigen::MatrixXd eeg(eeg_rows.size(), epochs.window_samples());
    for (std::size_t r = 0; r < eeg_rows.size(); ++r) {
      eeg.row(static_cast<Eigen::Index>(r)) = epochs.data[t].row(eeg_rows[r]);
    }
    Eigen::Index col = 0;
    for (std::size_t b = 0; b < bands.size(); ++b) {
      const Eigen::MatrixXd filtered = bandpass(eeg, bands[b], epochs.rate_hz, spec);
      const Eigen::MatrixXd scatter =
          filtered * filtered.transpose() / static_cast<double>(filtered.cols());
      for (Eigen::Index f = 0; f < models[b].n_filters(); ++f) {
        const Eigen::VectorXd w = models[b].filters.row(f).transpose();
        const double power = w.dot(scatter * w);
        if (log_power) {
          if (!(power > 0.0)) {
            throw data_error("non-positive band power before log (all-zero window?) in band '" +
                             bands[b].name + "'");
          }
          out.rows(static_cast<Eigen::Index>(t), col) = std::log(power);
        } else {
          out.rows(static_cast<Eigen::Index>(t), col) = power;
        }
        ++col;
      }
    }
  }
  validate(out);
  return out;
}

FeatureMatrix fuse(const std::vector<FeatureMatrix>& parts) {
  if (parts.empty()) throw validation_error("fuse needs at least one feature matrix");
  const auto n = parts.front().n_rows();
  Eigen::Index width = 0;
  for (const auto& p : parts) {
    if (p.n_rows() != n) {
      throw validation_error("fuse: row counts differ (" + std::to_string(p.n_rows()) +
                             " vs " + std::to_string(n) + ")");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(p.t_start_s[static_cast<std::size_t>(i)] -
                   parts.front().t_start_s[static_cast<std::size_t>(i)]) > 1e-9) {
        throw validation_error("fuse: window timestamps are not aligned");
      }
    }
    width += p.width();
  }

  FeatureMatrix out;
  out.rows.resize(n, width);
  out.t_start_s = parts.front().t_start_s;
  out.labels = parts.front().labels;
  Eigen::Index col = 0;
  for (const auto& p : parts) {
    out.rows.middleCols(col, p.width()) = p.rows;
    out.names.insert(out.names.end(), p.names.begin(), p.names.end());
    col += p.width();
  }
  validate(out);
  return out;
}

void save_features_csv(const FeatureMatrix& m, const std::filesystem::path& path) {
  validate(m);
  std::string out;
  for (std::size_t i = 0; i < m.names.size(); ++i) {
    if (i) out += ',';
    out += m.names[i];
  }
  if (m.labels) out += ",label";
  out += ",t_start_s\n";
  for (Eigen::Index r = 0; r < m.n_rows(); ++r) {
    for (Eigen::Index c = 0; c < m.width(); ++c) {
      if (c) out += ',';
      out += format_double(m.rows(r, c));
    }
    if (m.labels) {
      out += ',';
      out += std::to_string((*m.labels)[static_cast<std::size_t>(r)]);
    }
    out += ',';
    out += format_double(m.t_start_s[static_cast<std::size_t>(r)]);
    out += '\n';
  }
  write_text_atomic(path, out);
}

}  // namespace cogload
