#ifndef PPFFM_CATALOGUE_HPP_
#define PPFFM_CATALOGUE_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ppffm {

// An ordered set of event times in days, relative to the catalogue origin,
// together with the observation window and (when known) the eruption time.
// Immutable after construction: every operation returns a new catalogue, so
// values can be shared freely across parallel workers.
class EventCatalogue {
 public:
  // Validates the invariants: strictly increasing events,
  // window_start <= events.front(), events.back() <= window_end,
  // eruption_time (if present) > events.back(). Throws ValidationError.
  EventCatalogue(std::vector<double> events, double window_start,
                 double window_end,
                 std::optional<double> eruption_time = std::nullopt,
                 std::string label = {});

  const std::vector<double>& events() const { return events_; }
  double window_start() const { return window_start_; }
  double window_end() const { return window_end_; }
  std::optional<double> eruption_time() const { return eruption_time_; }
  const std::string& label() const { return label_; }

  std::size_t size() const { return events_.size(); }
  bool empty() const { return events_.empty(); }
  double span() const { return window_end_ - window_start_; }

 private:
  std::vector<double> events_;
  double window_start_;
  double window_end_;
  std::optional<double> eruption_time_;
  std::string label_;
};

struct ThinningSpec {
  double fraction = 0.0;      // removal probability per event, in [0, 1]
  std::uint64_t seed = 0;
};

// Canonical event-file format: UTF-8 text, '#'-prefixed header lines with
// key=value metadata (unit, origin, eruption_time, window_start, window_end,
// label), then one event time per line. Also accepts single-column CSV with
// a "time" header. Times are converted to days relative to the declared
// origin. Throws FormatError (with line number) or ValidationError.
EventCatalogue load_catalogue(const std::filesystem::path& path);

// Writes the canonical text format with 17-significant-digit times, so a
// save/load round trip reproduces the events bit-exactly.
void save_catalogue(const EventCatalogue& cat, const std::filesystem::path& path,
                    const std::map<std::string, std::string>& extra_metadata = {});

// Restriction to [start, end]: events outside are dropped and the window is
// reset to [start, end]. An empty result is permitted.
EventCatalogue window(const EventCatalogue& cat, double start, double end);

// Synthetic degradation: each event removed independently with probability
// spec.fraction (Bernoulli, the default) or, with exact_count set, exactly
// round(fraction * n) events removed at uniform positions. Deterministic
// given the seed.
EventCatalogue thin(const EventCatalogue& cat, const ThinningSpec& spec,
                    bool exact_count = false);

}  // namespace ppffm

#endif  // PPFFM_CATALOGUE_HPP_
