#include "ppffm/catalogue.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ppffm/errors.hpp"
#include "ppffm/rng.hpp"

namespace ppffm {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& s, std::size_t line) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw FormatError("trailing characters after number '" + s + "'", line);
    return v;
  } catch (const FormatError&) {
    throw;
  } catch (const std::exception&) {
    throw FormatError("cannot parse number '" + s + "'", line);
  }
}

double unit_to_days(const std::string& unit, std::size_t line) {
  if (unit == "days" || unit == "day" || unit == "d") return 1.0;
  if (unit == "hours" || unit == "hour" || unit == "h") return 1.0 / 24.0;
  if (unit == "minutes" || unit == "minute" || unit == "min") return 1.0 / 1440.0;
  if (unit == "seconds" || unit == "second" || unit == "s") return 1.0 / 86400.0;
  throw FormatError("unknown unit '" + unit + "' (expected days/hours/minutes/seconds)", line);
}

void format_time(char* buf, std::size_t n, double v) {
  std::snprintf(buf, n, "%.17g", v);
}

}  // namespace

EventCatalogue::EventCatalogue(std::vector<double> events, double window_start,
                               double window_end,
                               std::optional<double> eruption_time,
                               std::string label)
    : events_(std::move(events)),
      window_start_(window_start),
      window_end_(window_end),
      eruption_time_(eruption_time),
      label_(std::move(label)) {
  if (!(window_start_ <= window_end_))
    throw ValidationError("catalogue: window_start must not exceed window_end");
  for (std::size_t i = 0; i + 1 < events_.size(); ++i) {
    if (events_[i + 1] == events_[i])
      throw ValidationError("catalogue: duplicate event time at index " + std::to_string(i + 1));
    if (events_[i + 1] < events_[i])
      throw ValidationError("catalogue: event times not increasing at index " + std::to_string(i + 1));
  }
  if (!events_.empty()) {
    if (events_.front() < window_start_)
      throw ValidationError("catalogue: first event precedes window_start");
    if (events_.back() > window_end_)
      throw ValidationError("catalogue: last event exceeds window_end");
  }
  if (eruption_time_ && !events_.empty() && *eruption_time_ <= events_.back())
    throw ValidationError("catalogue: eruption_time must be later than the last event");
}

EventCatalogue load_catalogue(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");

  const bool csv = path.extension() == ".csv";
  double scale = 1.0;  // declared unit -> days
  double origin = 0.0;  // in the declared unit
  std::optional<double> eruption, wstart, wend;
  std::string label;
  std::vector<double> raw_times;

  std::string line;
  std::size_t lineno = 0;
  bool csv_header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty()) continue;
    if (t[0] == '#') {
      std::string body = trim(t.substr(1));
      auto eq = body.find('=');
      if (eq == std::string::npos) continue;  // plain comment
      std::string key = trim(body.substr(0, eq));
      std::string value = trim(body.substr(eq + 1));
      if (key == "unit") {
        scale = unit_to_days(value, lineno);
      } else if (key == "origin") {
        origin = parse_double(value, lineno);
      } else if (key == "eruption_time") {
        eruption = parse_double(value, lineno);
      } else if (key == "window_start") {
        wstart = parse_double(value, lineno);
      } else if (key == "window_end") {
        wend = parse_double(value, lineno);
      } else if (key == "label") {
        label = value;
      } else if (key == "command" || key == "config" || key == "seed" ||
                 key == "version") {
        // Provenance echo written by the CLI; carried, not interpreted.
      } else {
        throw FormatError("unknown metadata key '" + key + "'", lineno);
      }
      continue;
    }
    if (csv && !csv_header_seen) {
      csv_header_seen = true;
      std::string low;
      for (char c : t) low += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      if (low == "time") continue;
      throw FormatError("CSV catalogue must have a single 'time' column", lineno);
    }
    raw_times.push_back(parse_double(t, lineno));
  }
  if (in.bad()) throw FormatError("I/O error reading '" + path.string() + "'");

  auto convert = [&](double v) { return (v - origin) * scale; };
  std::vector<double> events;
  events.reserve(raw_times.size());
  for (double v : raw_times) events.push_back(convert(v));

  double ws = wstart ? convert(*wstart)
                     : (events.empty() ? 0.0 : events.front());
  double we = wend ? convert(*wend) : (events.empty() ? ws : events.back());
  std::optional<double> er;
  if (eruption) er = convert(*eruption);
  if (label.empty()) label = path.stem().string();

  return EventCatalogue(std::move(events), ws, we, er, std::move(label));
}

void save_catalogue(const EventCatalogue& cat, const std::filesystem::path& path,
                    const std::map<std::string, std::string>& extra_metadata) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write '" + path.string() + "'");
  char buf[64];
  out << "# unit=days\n";
  format_time(buf, sizeof buf, cat.window_start());
  out << "# window_start=" << buf << "\n";
  format_time(buf, sizeof buf, cat.window_end());
  out << "# window_end=" << buf << "\n";
  if (cat.eruption_time()) {
    format_time(buf, sizeof buf, *cat.eruption_time());
    out << "# eruption_time=" << buf << "\n";
  }
  if (!cat.label().empty()) out << "# label=" << cat.label() << "\n";
  for (const auto& [k, v] : extra_metadata) out << "# " << k << "=" << v << "\n";
  if (path.extension() == ".csv") out << "time\n";
  for (double e : cat.events()) {
    format_time(buf, sizeof buf, e);
    out << buf << "\n";
  }
  if (!out) throw FormatError("I/O error writing '" + path.string() + "'");
}

EventCatalogue window(const EventCatalogue& cat, double start, double end) {
  if (!(start < end)) throw ValidationError("window: start must precede end");
  std::vector<double> kept;
  kept.reserve(cat.size());
  for (double e : cat.events())
    if (e >= start && e <= end) kept.push_back(e);
  return EventCatalogue(std::move(kept), start, end, cat.eruption_time(), cat.label());
}

EventCatalogue thin(const EventCatalogue& cat, const ThinningSpec& spec,
                    bool exact_count) {
  if (spec.fraction < 0.0 || spec.fraction > 1.0)
    throw ValidationError("thin: fraction must lie in [0, 1]");
  Rng rng = Rng(spec.seed).stream("thin");
  std::vector<double> kept;
  kept.reserve(cat.size());
  if (!exact_count) {
    for (double e : cat.events())
      if (rng.uniform01() >= spec.fraction) kept.push_back(e);
  } else {
    const std::size_t n = cat.size();
    const auto n_remove =
        static_cast<std::size_t>(std::llround(spec.fraction * static_cast<double>(n)));
    // Partial Fisher-Yates over indices picks n_remove removals uniformly.
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t i = 0; i < n_remove && i < n; ++i) {
      const auto j = i + static_cast<std::size_t>(rng.uniform01() * static_cast<double>(n - i));
      std::swap(idx[i], idx[std::min(j, n - 1)]);
    }
    std::vector<bool> removed(n, false);
    for (std::size_t i = 0; i < n_remove && i < n; ++i) removed[idx[i]] = true;
    for (std::size_t i = 0; i < n; ++i)
      if (!removed[i]) kept.push_back(cat.events()[i]);
  }
  return EventCatalogue(std::move(kept), cat.window_start(), cat.window_end(),
                        cat.eruption_time(), cat.label());
}

}  // namespace ppffm
