#pragma once

#include "cogload/types.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cogload {

/// Maps event labels to binary workload classes. The default matches the
/// calibration protocol labels but any naming can be supplied.
using LabelMap = std::map<std::string, int>;

inline LabelMap default_label_map() { return {{"0-back", 0}, {"2-back", 1}}; }

/// Why an event produced no epoch.
enum class DropReason { OutOfRange, UnmappedLabel };

struct DroppedEvent {
  std::size_t event_index = 0;
  DropReason reason = DropReason::OutOfRange;
};

struct EpochReport {
  std::size_t n_events = 0;
  std::size_t n_retained = 0;
  std::vector<DroppedEvent> dropped;
};

/// Cuts one window per event at [onset + offset, onset + offset + window).
/// Events whose window falls outside the recording, or whose label is missing
/// from the map, are dropped and reported rather than fatal; zero retained
/// events is an error. Pass std::nullopt as label_map to produce unlabeled
/// epochs (no label-based drops).
EpochSet epoch(const Recording& rec, const EventList& ev, double window_seconds,
               double offset_seconds, const std::optional<LabelMap>& label_map,
               EpochReport* report = nullptr);

inline EpochSet epoch(const Recording& rec, const EventList& ev, double window_seconds,
                      double offset_seconds = 0.0) {
  return epoch(rec, ev, window_seconds, offset_seconds, default_label_map());
}

/// Unlabeled windows at offsets 0, step, 2*step, ... while fully inside the
/// recording; each carries its start timestamp.
EpochSet slide(const Recording& rec, double window_seconds, double step_seconds);

/// Groups consecutive same-label events into blocks (extent = first onset to
/// last onset + one inter-event gap) and emits non-overlapping window-start
/// events tiling each block. Used to re-window a calibration run at a window
/// longer than the stimulus spacing: the standard protocol of 6 blocks x 60
/// events at 2 s spacing tiles into 12 windows of 10 s per block.
EventList tile_blocks(const EventList& ev, double window_seconds, double rate_hz);

}  // namespace cogload
