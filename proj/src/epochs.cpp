#include "cogload/epochs.hpp"

#include "cogload/errors.hpp"

#include <algorithm>
#include <cmath>

namespace cogload {

EpochSet epoch(const Recording& rec, const EventList& ev, double window_seconds,
               double offset_seconds, const std::optional<LabelMap>& label_map,
               EpochReport* report) {
  validate(rec);
  validate(ev);
  if (!(window_seconds > 0.0)) throw validation_error("epoch window must be positive");

  const auto win = static_cast<std::int64_t>(std::llround(window_seconds * rec.rate_hz));
  const auto offset = static_cast<std::int64_t>(std::llround(offset_seconds * rec.rate_hz));
  if (win < 1) throw validation_error("epoch window shorter than one sample");

  EpochSet out;
  out.window_seconds = window_seconds;
  out.rate_hz = rec.rate_hz;
  out.channel_labels = rec.channel_labels;
  out.modalities = rec.modalities;
  std::vector<int> labels;

  EpochReport rep;
  rep.n_events = ev.events.size();
  for (std::size_t i = 0; i < ev.events.size(); ++i) {
    const auto& e = ev.events[i];
    const auto start = e.onset_sample + offset;
    if (start < 0 || start + win > rec.length()) {
      rep.dropped.push_back({i, DropReason::OutOfRange});
      continue;
    }
    int label = -1;
    if (label_map) {
      const auto it = label_map->find(e.label);
      if (it == label_map->end()) {
        rep.dropped.push_back({i, DropReason::UnmappedLabel});
        continue;
      }
      label = it->second;
    }
    out.data.push_back(rec.samples.block(0, start, rec.channels(), win));
    out.t_start_s.push_back(static_cast<double>(start) / rec.rate_hz);
    if (label_map) labels.push_back(label);
  }
  rep.n_retained = out.data.size();
  if (report) *report = rep;
  if (out.data.empty()) {
    throw data_error("no events produced epochs (all " + std::to_string(rep.n_events) +
                     " events dropped)");
  }
  if (label_map) out.labels = std::move(labels);
  return out;
}

EpochSet slide(const Recording& rec, double window_seconds, double step_seconds) {
  validate(rec);
  if (!(window_seconds > 0.0)) throw validation_error("slide window must be positive");
  if (!(step_seconds > 0.0)) throw validation_error("slide step must be positive");

  const auto win = static_cast<std::int64_t>(std::llround(window_seconds * rec.rate_hz));
  const auto step =
      std::max<std::int64_t>(1, static_cast<std::int64_t>(std::llround(step_seconds * rec.rate_hz)));
  if (win > rec.length()) {
    throw validation_error("slide window (" + std::to_string(win) +
                           " samples) exceeds recording length (" +
                           std::to_string(rec.length()) + ")");
  }

  EpochSet out;
  out.window_seconds = window_seconds;
  out.rate_hz = rec.rate_hz;
  out.channel_labels = rec.channel_labels;
  out.modalities = rec.modalities;
  for (std::int64_t start = 0; start + win <= rec.length(); start += step) {
    out.data.push_back(rec.samples.block(0, start, rec.channels(), win));
    out.t_start_s.push_back(static_cast<double>(start) / rec.rate_hz);
  }
  return out;
}

EventList tile_blocks(const EventList& ev, double window_seconds, double rate_hz) {
  validate(ev);
  if (ev.events.empty()) throw validation_error("cannot tile an empty event list");
  if (!(window_seconds > 0.0)) throw validation_error("tile window must be positive");
  if (!(rate_hz > 0.0)) throw validation_error("tile rate_hz must be positive");

  // Median inter-event gap stands in for the stimulus spacing when a block
  // holds a single event.
  std::vector<std::int64_t> gaps;
  for (std::size_t i = 1; i < ev.events.size(); ++i) {
    gaps.push_back(ev.events[i].onset_sample - ev.events[i - 1].onset_sample);
  }
  std::int64_t global_gap = 0;
  if (!gaps.empty()) {
    auto sorted = gaps;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    global_gap = sorted[sorted.size() / 2];
  }

  const auto win = static_cast<std::int64_t>(std::llround(window_seconds * rate_hz));
  EventList out;
  std::size_t block_begin = 0;
  while (block_begin < ev.events.size()) {
    std::size_t block_end = block_begin + 1;
    while (block_end < ev.events.size() &&
           ev.events[block_end].label == ev.events[block_begin].label) {
      ++block_end;
    }
    std::int64_t gap = global_gap;
    if (block_end - block_begin >= 2) {
      std::vector<std::int64_t> block_gaps;
      for (std::size_t i = block_begin + 1; i < block_end; ++i) {
        block_gaps.push_back(ev.events[i].onset_sample - ev.events[i - 1].onset_sample);
      }
      std::nth_element(block_gaps.begin(), block_gaps.begin() + block_gaps.size() / 2,
                       block_gaps.end());
      gap = block_gaps[block_gaps.size() / 2];
    }
    const auto start = ev.events[block_begin].onset_sample;
    const auto block_stop = ev.events[block_end - 1].onset_sample + gap;
    for (std::int64_t s = start; s + win <= block_stop; s += win) {
      out.events.push_back({s, ev.events[block_begin].label});
    }
    block_begin = block_end;
  }
  if (out.events.empty()) {
    throw data_error("tile window does not fit inside any block");
  }
  return out;
}

}  // namespace cogload
