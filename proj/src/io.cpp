#include "cogload/io.hpp"

#include "cogload/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <system_error>
#include <vector>

namespace cogload {

namespace {

constexpr const char* kRecordingMarker = "# cogload-recording v1";
constexpr const char* kEventsMarker = "# cogload-events v1";
constexpr const char* kTasksMarker = "# cogload-tasks v1";

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::int64_t parse_int(const std::string& s, const char* what) {
  std::int64_t v = 0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last) {
    throw data_error(std::string("malformed integer for ") + what + ": '" + s + "'");
  }
  return v;
}

struct Lines {
  std::vector<std::string> lines;
  explicit Lines(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open file: " + path.string());
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      lines.push_back(line);
    }
  }
};

void require_marker(const Lines& f, const char* marker, const std::filesystem::path& path) {
  if (f.lines.empty() || f.lines.front() != marker) {
    throw data_error(path.string() + ": missing format marker '" + marker + "'");
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last) {
    throw data_error("malformed real value: '" + s + "'");
  }
  return v;
}

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw data_error("cannot write file: " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw data_error("short write to file: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw data_error("cannot rename " + tmp.string() + " to " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Recording load_recording(const std::filesystem::path& path) {
  Lines f(path);
  require_marker(f, kRecordingMarker, path);

  std::map<std::string, std::string> header;
  std::size_t row = 1;
  for (; row < f.lines.size(); ++row) {
    const auto& line = f.lines[row];
    if (line.empty() || line.front() != '#') break;
    const auto body = line.substr(1);
    const auto eq = body.find('=');
    if (eq == std::string::npos) continue;  // plain comment
    auto key = body.substr(0, eq);
    // trim spaces around the key
    while (!key.empty() && key.front() == ' ') key.erase(key.begin());
    while (!key.empty() && key.back() == ' ') key.pop_back();
    if (header.count(key)) {
      throw data_error(path.string() + ": duplicate header key '" + key + "'");
    }
    header[key] = body.substr(eq + 1);
  }
  for (const char* key : {"rate_hz", "channels", "modalities"}) {
    if (!header.count(key)) {
      throw data_error(path.string() + ": missing header key '" + std::string(key) + "'");
    }
  }

  Recording rec;
  rec.rate_hz = parse_double(header["rate_hz"]);
  rec.channel_labels = split(header["channels"], ',');
  for (const auto& tag : split(header["modalities"], ',')) {
    rec.modalities.push_back(modality_from_string(tag));
  }
  const auto n_channels = rec.channel_labels.size();
  if (n_channels == 0 || (n_channels == 1 && rec.channel_labels[0].empty())) {
    throw data_error(path.string() + ": header declares zero channels");
  }
  if (rec.modalities.size() != n_channels) {
    throw data_error(path.string() + ": modality count does not match channel count");
  }

  std::vector<double> values;
  std::size_t n_rows = 0;
  for (; row < f.lines.size(); ++row) {
    const auto& line = f.lines[row];
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != n_channels) {
      throw data_error(path.string() + ": line " + std::to_string(row + 1) + " has " +
                       std::to_string(cells.size()) + " values, expected " +
                       std::to_string(n_channels));
    }
    for (const auto& cell : cells) {
      const double v = parse_double(cell);
      if (!std::isfinite(v)) {
        throw data_error(path.string() + ": non-finite value at line " +
                         std::to_string(row + 1));
      }
      values.push_back(v);
    }
    ++n_rows;
  }
  if (n_rows == 0) throw data_error(path.string() + ": recording has no sample rows");

  rec.samples.resize(static_cast<Eigen::Index>(n_channels), static_cast<Eigen::Index>(n_rows));
  for (std::size_t t = 0; t < n_rows; ++t) {
    for (std::size_t c = 0; c < n_channels; ++c) {
      rec.samples(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(t)) =
          values[t * n_channels + c];
    }
  }
  try {
    validate(rec);
  } catch (const validation_error& e) {
    throw data_error(path.string() + ": " + e.what());
  }
  return rec;
}

void save_recording(const Recording& rec, const std::filesystem::path& path) {
  validate(rec);
  std::string out;
  out.reserve(static_cast<std::size_t>(rec.samples.size()) * 20);
  out += kRecordingMarker;
  out += "\n# rate_hz=";
  out += format_double(rec.rate_hz);
  out += "\n# channels=";
  for (std::size_t i = 0; i < rec.channel_labels.size(); ++i) {
    if (i) out += ',';
    out += rec.channel_labels[i];
  }
  out += "\n# modalities=";
  for (std::size_t i = 0; i < rec.modalities.size(); ++i) {
    if (i) out += ',';
    out += to_string(rec.modalities[i]);
  }
  out += '\n';
  const auto channels = rec.samples.rows();
  const auto length = rec.samples.cols();
  for (Eigen::Index t = 0; t < length; ++t) {
    for (Eigen::Index c = 0; c < channels; ++c) {
      if (c) out += ',';
      out += format_double(rec.samples(c, t));
    }
    out += '\n';
  }
  write_text_atomic(path, out);
}

EventList load_events(const std::filesystem::path& path) {
  Lines f(path);
  require_marker(f, kEventsMarker, path);
  EventList ev;
  for (std::size_t row = 1; row < f.lines.size(); ++row) {
    const auto& line = f.lines[row];
    if (line.empty() || line.front() == '#') continue;
    const auto cells = split(line, ',');
    if (cells.size() != 2) {
      throw data_error(path.string() + ": line " + std::to_string(row + 1) +
                       " must be 'onset_sample,label'");
    }
    ev.events.push_back({parse_int(cells[0], "onset_sample"), cells[1]});
  }
  try {
    validate(ev);
  } catch (const validation_error& e) {
    throw data_error(path.string() + ": " + e.what());
  }
  return ev;
}

void save_events(const EventList& ev, const std::filesystem::path& path) {
  validate(ev);
  std::string out = kEventsMarker;
  out += '\n';
  for (const auto& e : ev.events) {
    if (e.label.find(',') != std::string::npos || e.label.find('\n') != std::string::npos) {
      throw validation_error("event label '" + e.label + "' must not contain ',' or newline");
    }
    out += std::to_string(e.onset_sample);
    out += ',';
    out += e.label;
    out += '\n';
  }
  write_text_atomic(path, out);
}

TaskIntervals load_tasks(const std::filesystem::path& path) {
  Lines f(path);
  require_marker(f, kTasksMarker, path);
  TaskIntervals tasks;
  for (std::size_t row = 1; row < f.lines.size(); ++row) {
    const auto& line = f.lines[row];
    if (line.empty() || line.front() == '#') continue;
    const auto cells = split(line, ',');
    if (cells.size() != 4) {
      throw data_error(path.string() + ": line " + std::to_string(row + 1) +
                       " must be 'task_id,start_sample,end_sample,included'");
    }
    TaskInterval t;
    t.task_id = static_cast<int>(parse_int(cells[0], "task_id"));
    t.start_sample = parse_int(cells[1], "start_sample");
    t.end_sample = parse_int(cells[2], "end_sample");
    const auto inc = parse_int(cells[3], "included");
    if (inc != 0 && inc != 1) {
      throw data_error(path.string() + ": included flag must be 0 or 1");
    }
    t.included = inc == 1;
    tasks.intervals.push_back(t);
  }
  try {
    validate(tasks);
  } catch (const validation_error& e) {
    throw data_error(path.string() + ": " + e.what());
  }
  return tasks;
}

void save_tasks(const TaskIntervals& tasks, const std::filesystem::path& path) {
  validate(tasks);
  std::string out = kTasksMarker;
  out += '\n';
  for (const auto& t : tasks.intervals) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%d,%lld,%lld,%d\n", t.task_id,
                  static_cast<long long>(t.start_sample),
                  static_cast<long long>(t.end_sample), t.included ? 1 : 0);
    out += buf;
  }
  write_text_atomic(path, out);
}

}  // namespace cogload
