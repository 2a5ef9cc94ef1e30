#pragma once

#include "cogload/types.hpp"

#include <filesystem>
#include <string>

namespace cogload {

/// Text formats, UTF-8 with LF line endings. Every file starts with a
/// `# cogload-<kind> v1` marker line. Floats are written with the shortest
/// representation that parses back to the identical double, so
/// load(write(x)) == x bit for bit.
///
/// Recording:
///   # cogload-recording v1
///   # rate_hz=<real>
///   # channels=<comma list>
///   # modalities=<comma list of EEG|ECG|GSR|OTHER>
///   <one comma-separated row per sample instant, column order = channels>
///
/// Events:   `# cogload-events v1` then `onset_sample,label` lines.
/// Tasks:    `# cogload-tasks v1` then `task_id,start_sample,end_sample,included(0|1)`.

Recording load_recording(const std::filesystem::path& path);
void save_recording(const Recording& rec, const std::filesystem::path& path);

EventList load_events(const std::filesystem::path& path);
void save_events(const EventList& ev, const std::filesystem::path& path);

TaskIntervals load_tasks(const std::filesystem::path& path);
void save_tasks(const TaskIntervals& tasks, const std::filesystem::path& path);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);
/// Strict full-string double parse; throws data_error.
double parse_double(const std::string& s);

/// Writes whole-file content via a temp file + rename so readers never see
/// partial output.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_text(const std::filesystem::path& path);

}  // namespace cogload
