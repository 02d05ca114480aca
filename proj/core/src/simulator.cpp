#include "ppffm/simulator.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "ppffm/errors.hpp"
#include "ppffm/rng.hpp"

namespace ppffm {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double draw_unit_isi(const ModelConfig& model, Rng& rng) {
  switch (model.family) {
    case Family::IP:
      return rng.exponential();
    case Family::IG:
      return rng.gamma(model.shape);
    case Family::IW:
      return rng.weibull(model.shape);
    case Family::IIG:
      return rng.inverse_gaussian(model.shape);
  }
  return rng.exponential();
}

}  // namespace

void SimulationSpec::validate() const {
  model.validate();
  if (!(rate.k > 0.0) || !(rate.p > 0.0) || !std::isfinite(rate.t_f)) {
    throw ValidationError("simulation rate needs k > 0, p > 0, finite t_f");
  }
  if (!(start < end)) {
    throw ValidationError("simulation window must have start < end");
  }
  if (!(end < rate.t_f)) {
    throw ValidationError("simulation horizon must precede the failure time");
  }
  if (max_events == 0) {
    throw ValidationError("max_events must be positive");
  }
}

double next_event_time(const ModelConfig& model, const PowerLawRate& rate,
                       double prev, double z) {
  if (prev >= rate.t_f) {
    throw std::domain_error("previous event at or after failure time");
  }
  if (z < 0.0) {
    throw std::domain_error("rescaled interval draw must be nonnegative");
  }
  if (z == 0.0) return prev;

  const double c = model.rescale_factor();
  const double a = rate.t_f - prev;  // time to failure at the previous event
  double s;
  if (std::abs(rate.p - 1.0) <= 1e-12) {
    // Lambda = k ln(a/b): invert directly.
    s = rate.t_f - a * std::exp(-z / (c * rate.k));
  } else {
    // b^(1-p) = a^(1-p) (1 + q) with q = z (p-1) / (c k a^(1-p)); q <= -1
    // (possible only for p < 1) means the draw exhausts the remaining
    // measure before t_f.
    const double one_m_p = 1.0 - rate.p;
    const double q = z * (rate.p - 1.0) /
                     (c * rate.k * std::exp(one_m_p * std::log(a)));
    if (q <= -1.0) return kInf;
    s = rate.t_f - a * std::exp(std::log1p(q) / one_m_p);
  }
  // Rounding can land exactly on t_f when the true solution is within one
  // ulp of it; keep the contract s < t_f.
  if (s >= rate.t_f) {
    s = std::nextafter(rate.t_f, -kInf);
  }
  return s;
}

SimulationResult simulate(const SimulationSpec& spec) {
  spec.validate();
  Rng rng = Rng(spec.seed).stream("sim");

  std::vector<double> events;
  std::vector<double> drawn;
  bool truncated = false;
  double prev = spec.start;
  for (;;) {
    const double z = draw_unit_isi(spec.model, rng);
    const double s = next_event_time(spec.model, spec.rate, prev, z);
    if (!(s < spec.end)) break;
    // Guard against a degenerate draw that fails to advance time once the
    // gap shrinks below representable resolution.
    if (s <= prev) {
      truncated = true;
      break;
    }
    events.push_back(s);
    drawn.push_back(z);
    prev = s;
    if (events.size() >= spec.max_events) {
      truncated = true;
      break;
    }
  }

  EventCatalogue cat(std::move(events), spec.start, spec.end, spec.rate.t_f,
                     "sim-" + std::string(family_name(spec.model.family)));
  return SimulationResult{std::move(cat), truncated, std::move(drawn)};
}

}  // namespace ppffm
