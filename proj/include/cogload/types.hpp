#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cogload {

enum class Modality { EEG, ECG, GSR, OTHER };

std::string to_string(Modality m);
Modality modality_from_string(const std::string& s);

/// Multichannel time series. Rows are channels, columns are sample instants.
/// EEG/ECG values are in microvolts, GSR in microsiemens. All types in this
/// header are immutable by convention once validated; operations on them are
/// pure functions, so sharing across threads is safe.
struct Recording {
  double rate_hz = 0.0;
  std::vector<std::string> channel_labels;
  std::vector<Modality> modalities;
  Eigen::MatrixXd samples;  // channels x time

  Eigen::Index channels() const { return samples.rows(); }
  Eigen::Index length() const { return samples.cols(); }
  double duration_s() const { return static_cast<double>(length()) / rate_hz; }

  /// Row indices of all channels carrying the given modality tag.
  std::vector<Eigen::Index> channels_of(Modality m) const;
};

/// Throws validation_error on broken invariants (rate, shape, finiteness).
void validate(const Recording& rec);

struct Event {
  std::int64_t onset_sample = 0;
  std::string label;
};

/// Stimulus onsets, strictly increasing.
struct EventList {
  std::vector<Event> events;

  std::size_t size() const { return events.size(); }
};

void validate(const EventList& ev);

struct TaskInterval {
  int task_id = 0;  // positive, unique
  std::int64_t start_sample = 0;
  std::int64_t end_sample = 0;
  bool included = true;
};

/// Non-overlapping task extents over a use-session recording.
struct TaskIntervals {
  std::vector<TaskInterval> intervals;

  std::size_t size() const { return intervals.size(); }
};

void validate(const TaskIntervals& tasks);

/// Fixed-length windows cut from a recording: one channels x window_samples
/// matrix per trial, optional binary labels (0 = low workload, 1 = high),
/// and the start time of each window in seconds.
struct EpochSet {
  std::vector<Eigen::MatrixXd> data;  // trials, each channels x window_samples
  std::optional<std::vector<int>> labels;
  std::vector<double> t_start_s;
  double window_seconds = 0.0;
  double rate_hz = 0.0;
  std::vector<std::string> channel_labels;
  std::vector<Modality> modalities;

  std::size_t trials() const { return data.size(); }
  Eigen::Index channels() const { return data.empty() ? 0 : data.front().rows(); }
  Eigen::Index window_samples() const { return data.empty() ? 0 : data.front().cols(); }

  std::vector<Eigen::Index> channels_of(Modality m) const;
  /// Trial indices of one class; requires labels.
  std::vector<std::size_t> trials_of(int label) const;
};

void validate(const EpochSet& epochs);

}  // namespace cogload
