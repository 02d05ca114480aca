#ifndef PPFFM_SIMULATOR_HPP_
#define PPFFM_SIMULATOR_HPP_

#include <cstdint>
#include <vector>

#include "ppffm/catalogue.hpp"
#include "ppffm/rate_models.hpp"

namespace ppffm {

struct SimulationSpec {
  ModelConfig model;
  PowerLawRate rate;
  double start = 0.0;
  double end = 0.0;  // horizon, strictly before rate.t_f
  std::uint64_t seed = 1;
  std::size_t max_events = 2000000;  // runaway guard

  void validate() const;  // throws ValidationError
};

struct SimulationResult {
  EventCatalogue catalogue;
  bool truncated = false;  // max_events reached before the horizon
  // Unit-law draws paired 1:1 with the catalogue events; the rescaling
  // self-test recovers each from consecutive event times.
  std::vector<double> drawn_z;
};

// Inverts the rescaling: the unique s > prev with c * Lambda(prev, s) = z,
// where c is the family's rescale factor. For p < 1 a draw can exceed the
// finite remaining measure before t_f; that case returns +infinity (no
// further event before failure). Throws std::domain_error for prev >= t_f
// or z < 0.
double next_event_time(const ModelConfig& model, const PowerLawRate& rate,
                       double prev, double z);

// Renewal simulation: repeatedly draw z from the family's unit ISI law and
// invert. Deterministic given spec.seed. The returned catalogue's window is
// [start, end] and it carries t_f as its eruption time.
SimulationResult simulate(const SimulationSpec& spec);

}  // namespace ppffm

#endif  // PPFFM_SIMULATOR_HPP_
