#pragma once

#include "cogload/pipeline.hpp"

#include <filesystem>
#include <string>

namespace cogload {

/// Classifier file: a `# cogload-model v1` marker line, a `# checksum=` line
/// (FNV-1a 64 over the JSON body), then the JSON document holding config,
/// band definitions, filter matrices, eigenvalues, LDA parameters,
/// standardization vectors, and provenance. Doubles are serialized with
/// round-trip precision, so a saved and reloaded classifier scores
/// bit-identically.
void save_classifier(const WorkloadClassifier& clf, const std::filesystem::path& path);
WorkloadClassifier load_classifier(const std::filesystem::path& path);

std::string classifier_to_string(const WorkloadClassifier& clf);
WorkloadClassifier classifier_from_string(const std::string& text);

std::uint64_t fnv1a64(const std::string& data);

}  // namespace cogload
