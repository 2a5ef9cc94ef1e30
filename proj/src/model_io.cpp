#include "cogload/model_io.hpp"

#include "cogload/errors.hpp"
#include "cogload/io.hpp"

#include <json.hpp>

#include <cinttypes>
#include <cstdio>

namespace cogload {

namespace {

using nlohmann::json;

constexpr const char* kModelMarker = "# cogload-model v1";

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const auto n_rows = static_cast<Eigen::Index>(j.size());
  if (n_rows == 0) return {};
  const auto n_cols = static_cast<Eigen::Index>(j.at(0).size());
  Eigen::MatrixXd m(n_rows, n_cols);
  for (Eigen::Index r = 0; r < n_rows; ++r) {
    const auto& row = j.at(static_cast<std::size_t>(r));
    if (static_cast<Eigen::Index>(row.size()) != n_cols) {
      throw data_error("model file: ragged matrix");
    }
    for (Eigen::Index c = 0; c < n_cols; ++c) {
      m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
    }
  }
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Eigen::VectorXd vector_from_json(const json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    v[i] = j.at(static_cast<std::size_t>(i)).get<double>();
  }
  return v;
}

json config_to_json(const PipelineConfig& c) {
  json j;
  j["band_set"] = to_string(c.band_set);
  j["n_csp_filters"] = c.n_csp_filters;
  j["window_seconds"] = c.window_seconds;
  j["step_seconds"] = c.step_seconds;
  j["regularization"] =
      c.regularization == CspRegularization::Kind::Invariant ? "invariant" : "none";
  j["lambda"] = c.lambda;
  j["k_pc"] = c.k_pc;
  json mods = json::array();
  for (const auto m : c.modalities) mods.push_back(to_string(m));
  j["modalities"] = mods;
  j["log_power"] = c.log_power;
  j["normalization"] = to_string(c.normalization);
  j["filter_order"] = c.filter.order;
  return j;
}

PipelineConfig config_from_json(const json& j) {
  PipelineConfig c;
  c.band_set = band_set_from_string(j.at("band_set").get<std::string>());
  c.n_csp_filters = j.at("n_csp_filters").get<int>();
  c.window_seconds = j.at("window_seconds").get<double>();
  c.step_seconds = j.at("step_seconds").get<double>();
  c.regularization = j.at("regularization").get<std::string>() == "invariant"
                         ? CspRegularization::Kind::Invariant
                         : CspRegularization::Kind::None;
  c.lambda = j.at("lambda").get<double>();
  c.k_pc = j.at("k_pc").get<int>();
  c.modalities.clear();
  for (const auto& m : j.at("modalities")) {
    c.modalities.insert(modality_from_string(m.get<std::string>()));
  }
  c.log_power = j.at("log_power").get<bool>();
  c.normalization = normalization_from_string(j.at("normalization").get<std::string>());
  c.filter.order = j.at("filter_order").get<int>();
  return c;
}

}  // namespace

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (const unsigned char byte : data) {
    hash ^= byte;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string classifier_to_string(const WorkloadClassifier& clf) {
  json j;
  j["config"] = config_to_json(clf.config);
  j["channel_labels"] = clf.channel_labels;
  json mods = json::array();
  for (const auto m : clf.channel_modalities) mods.push_back(to_string(m));
  j["channel_modalities"] = mods;
  j["feature_names"] = clf.feature_names;

  json banks = json::array();
  for (const auto& model : clf.band_models) {
    json b;
    b["band"] = {{"name", model.band.name},
                 {"low_hz", model.band.low_hz},
                 {"high_hz", model.band.high_hz}};
    b["filters"] = matrix_to_json(model.filters);
    b["eigenvalues"] = vector_to_json(model.eigenvalues);
    b["regularization"] = {
        {"kind",
         model.regularization.kind == CspRegularization::Kind::Invariant ? "invariant"
                                                                         : "none"},
        {"lambda", model.regularization.lambda},
        {"k", model.regularization.k_components}};
    banks.push_back(std::move(b));
  }
  j["csp"] = banks;

  json lda;
  lda["weights"] = vector_to_json(clf.lda.weights);
  lda["bias"] = clf.lda.bias;
  lda["gamma"] = clf.lda.gamma;
  lda["means"] = vector_to_json(clf.lda.means);
  lda["stds"] = vector_to_json(clf.lda.stds);
  json kept = json::array();
  for (const auto k : clf.lda.kept) kept.push_back(static_cast<std::int64_t>(k));
  lda["kept"] = kept;
  lda["dropped_names"] = clf.lda.dropped_names;
  lda["input_width"] = static_cast<std::int64_t>(clf.lda.input_width);
  j["lda"] = lda;

  json prov;
  prov["seed"] = clf.provenance.seed;
  prov["n_low"] = clf.provenance.n_low;
  prov["n_high"] = clf.provenance.n_high;
  prov["gamma"] = clf.provenance.gamma;
  prov["dropped_features"] = clf.provenance.dropped_features;
  prov["version"] = clf.provenance.version;
  j["provenance"] = prov;

  const std::string body = j.dump(2);
  char checksum[32];
  std::snprintf(checksum, sizeof(checksum), "%016" PRIx64, fnv1a64(body));
  std::string out = kModelMarker;
  out += "\n# checksum=";
  out += checksum;
  out += '\n';
  out += body;
  out += '\n';
  return out;
}

WorkloadClassifier classifier_from_string(const std::string& text) {
  const auto first_nl = text.find('\n');
  if (first_nl == std::string::npos ||
      text.substr(0, first_nl) != kModelMarker) {
    throw data_error("model file: missing '# cogload-model v1' marker");
  }
  const auto second_nl = text.find('\n', first_nl + 1);
  const std::string checksum_line =
      text.substr(first_nl + 1, second_nl - first_nl - 1);
  constexpr const char* kPrefix = "# checksum=";
  if (second_nl == std::string::npos || checksum_line.rfind(kPrefix, 0) != 0) {
    throw data_error("model file: missing checksum line");
  }
  std::string body = text.substr(second_nl + 1);
  if (!body.empty() && body.back() == '\n') body.pop_back();
  char expected[32];
  std::snprintf(expected, sizeof(expected), "%016" PRIx64, fnv1a64(body));
  if (checksum_line.substr(std::string(kPrefix).size()) != expected) {
    throw data_error("model file: checksum mismatch (file corrupted or edited)");
  }

  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception& e) {
    throw data_error(std::string("model file: invalid JSON body: ") + e.what());
  }

  try {
    WorkloadClassifier clf;
    clf.config = config_from_json(j.at("config"));
    clf.channel_labels = j.at("channel_labels").get<std::vector<std::string>>();
    for (const auto& m : j.at("channel_modalities")) {
      clf.channel_modalities.push_back(modality_from_string(m.get<std::string>()));
    }
    clf.feature_names = j.at("feature_names").get<std::vector<std::string>>();

    for (const auto& b : j.at("csp")) {
      CspModel model;
      model.band.name = b.at("band").at("name").get<std::string>();
      model.band.low_hz = b.at("band").at("low_hz").get<double>();
      model.band.high_hz = b.at("band").at("high_hz").get<double>();
      model.filters = matrix_from_json(b.at("filters"));
      model.eigenvalues = vector_from_json(b.at("eigenvalues"));
      const auto& reg = b.at("regularization");
      model.regularization.kind = reg.at("kind").get<std::string>() == "invariant"
                                      ? CspRegularization::Kind::Invariant
                                      : CspRegularization::Kind::None;
      model.regularization.lambda = reg.at("lambda").get<double>();
      model.regularization.k_components = reg.at("k").get<int>();
      clf.band_models.push_back(std::move(model));
    }

    const auto& lda = j.at("lda");
    clf.lda.weights = vector_from_json(lda.at("weights"));
    clf.lda.bias = lda.at("bias").get<double>();
    clf.lda.gamma = lda.at("gamma").get<double>();
    clf.lda.means = vector_from_json(lda.at("means"));
    clf.lda.stds = vector_from_json(lda.at("stds"));
    for (const auto& k : lda.at("kept")) {
      clf.lda.kept.push_back(static_cast<Eigen::Index>(k.get<std::int64_t>()));
    }
    clf.lda.dropped_names = lda.at("dropped_names").get<std::vector<std::string>>();
    clf.lda.input_width = static_cast<Eigen::Index>(lda.at("input_width").get<std::int64_t>());

    const auto& prov = j.at("provenance");
    clf.provenance.seed = prov.at("seed").get<std::uint64_t>();
    clf.provenance.n_low = prov.at("n_low").get<int>();
    clf.provenance.n_high = prov.at("n_high").get<int>();
    clf.provenance.gamma = prov.at("gamma").get<double>();
    clf.provenance.dropped_features =
        prov.at("dropped_features").get<std::vector<std::string>>();
    clf.provenance.version = prov.at("version").get<std::string>();
    return clf;
  } catch (const json::exception& e) {
    throw data_error(std::string("model file: missing or malformed field: ") + e.what());
  }
}

void save_classifier(const WorkloadClassifier& clf, const std::filesystem::path& path) {
  write_text_atomic(path, classifier_to_string(clf));
}

WorkloadClassifier load_classifier(const std::filesystem::path& path) {
  return classifier_from_string(read_text(path));
}

}  // namespace cogload
