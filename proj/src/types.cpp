#include "cogload/types.hpp"

#include "cogload/errors.hpp"

#include <algorithm>
#include <cmath>

namespace cogload {

std::string to_string(Modality m) {
  switch (m) {
    case Modality::EEG: return "EEG";
    case Modality::ECG: return "ECG";
    case Modality::GSR: return "GSR";
    case Modality::OTHER: return "OTHER";
  }
  return "OTHER";
}

Modality modality_from_string(const std::string& s) {
  if (s == "EEG") return Modality::EEG;
  if (s == "ECG") return Modality::ECG;
  if (s == "GSR") return Modality::GSR;
  if (s == "OTHER") return Modality::OTHER;
  throw data_error("unknown modality tag '" + s + "' (expected EEG|ECG|GSR|OTHER)");
}

std::vector<Eigen::Index> Recording::channels_of(Modality m) const {
  std::vector<Eigen::Index> idx;
  for (std::size_t i = 0; i < modalities.size(); ++i) {
    if (modalities[i] == m) idx.push_back(static_cast<Eigen::Index>(i));
  }
  return idx;
}

void validate(const Recording& rec) {
  if (!(rec.rate_hz > 0.0)) {
    throw validation_error("recording rate_hz must be positive");
  }
  const auto n = static_cast<std::size_t>(rec.samples.rows());
  if (n == 0) {
    throw validation_error("recording must have at least one channel");
  }
  if (rec.channel_labels.size() != n || rec.modalities.size() != n) {
    throw validation_error("channel label/modality count must equal channel count");
  }
  for (const auto& label : rec.channel_labels) {
    if (label.empty()) throw validation_error("channel labels must be non-empty");
    if (label.find(',') != std::string::npos) {
      throw validation_error("channel label '" + label + "' must not contain commas");
    }
  }
  if (rec.samples.cols() < 1) {
    throw validation_error("recording must contain at least one sample");
  }
  if (!rec.samples.allFinite()) {
    throw validation_error("recording contains non-finite sample values");
  }
}

void validate(const EventList& ev) {
  std::int64_t prev = -1;
  for (const auto& e : ev.events) {
    if (e.onset_sample < 0) throw validation_error("event onsets must be non-negative");
    if (e.onset_sample <= prev) {
      throw validation_error("event onsets must be strictly increasing");
    }
    prev = e.onset_sample;
  }
}

void validate(const TaskIntervals& tasks) {
  std::vector<int> ids;
  std::vector<std::pair<std::int64_t, std::int64_t>> spans;
  for (const auto& t : tasks.intervals) {
    if (t.task_id <= 0) throw validation_error("task ids must be positive");
    if (t.start_sample >= t.end_sample) {
      throw validation_error("task interval start must precede end");
    }
    if (t.start_sample < 0) throw validation_error("task intervals must start at sample >= 0");
    ids.push_back(t.task_id);
    spans.emplace_back(t.start_sample, t.end_sample);
  }
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
    throw validation_error("task ids must be unique");
  }
  std::sort(spans.begin(), spans.end());
  for (std::size_t i = 1; i < spans.size(); ++i) {
    if (spans[i].first < spans[i - 1].second) {
      throw validation_error("task intervals must not overlap");
    }
  }
}

std::vector<Eigen::Index> EpochSet::channels_of(Modality m) const {
  std::vector<Eigen::Index> idx;
  for (std::size_t i = 0; i < modalities.size(); ++i) {
    if (modalities[i] == m) idx.push_back(static_cast<Eigen::Index>(i));
  }
  return idx;
}

std::vector<std::size_t> EpochSet::trials_of(int label) const {
  if (!labels) throw validation_error("epoch set carries no labels");
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < labels->size(); ++i) {
    if ((*labels)[i] == label) idx.push_back(i);
  }
  return idx;
}

void validate(const EpochSet& epochs) {
  if (!(epochs.rate_hz > 0.0)) throw validation_error("epoch set rate_hz must be positive");
  if (!(epochs.window_seconds > 0.0)) {
    throw validation_error("epoch window_seconds must be positive");
  }
  const auto expected = static_cast<Eigen::Index>(
      std::llround(epochs.window_seconds * epochs.rate_hz));
  for (const auto& trial : epochs.data) {
    if (trial.cols() != expected) {
      throw validation_error("epoch window length does not match window_seconds * rate_hz");
    }
    if (trial.rows() != static_cast<Eigen::Index>(epochs.channel_labels.size())) {
      throw validation_error("epoch channel count does not match channel metadata");
    }
  }
  if (epochs.labels && epochs.labels->size() != epochs.data.size()) {
    throw validation_error("label count must equal trial count");
  }
  if (epochs.t_start_s.size() != epochs.data.size()) {
    throw validation_error("timestamp count must equal trial count");
  }
}

}  // namespace cogload
