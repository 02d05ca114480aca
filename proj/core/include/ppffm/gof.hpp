#ifndef PPFFM_GOF_HPP_
#define PPFFM_GOF_HPP_

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "ppffm/catalogue.hpp"
#include "ppffm/inference.hpp"
#include "ppffm/rate_models.hpp"

namespace ppffm {

// Time-rescaled intervals of a catalogue under a fitted model. Under the
// true parameters z follows the family's unit ISI law, tau is
// exponential(1), and u is uniform on [0, 1).
struct RescaledSeries {
  std::vector<double> z;    // intensity-rescaled, c * Lambda per interval
  std::vector<double> tau;  // rate-rescaled, -ln S per interval
  std::vector<double> u;    // 1 - exp(-tau), clamped below 1
  // Intervals whose survival underflowed to zero before clamping.
  std::vector<std::size_t> underflow_intervals;

  std::size_t size() const { return tau.size(); }
};

// Exponential Q-Q construction: empirical order statistics of tau against
// the exponential quantiles at plotting positions b_m = (m - 1/2) / M.
struct QQData {
  std::vector<double> b;
  std::vector<double> model_q;      // -log(1 - b_m)
  std::vector<double> empirical_q;  // sorted tau
  bool sqrt_transformed = false;    // both axes square-rooted
};

// Kolmogorov-Smirnov construction on the uniforms, with the asymptotic
// two-sided bounds c / sqrt(M).
struct KSData {
  std::vector<double> b;
  std::vector<double> u_sorted;
  double d_stat = 0.0;
  double bound95 = 0.0;
  double bound99 = 0.0;
  bool pass95 = false;
  bool pass99 = false;
};

struct AcfData {
  std::vector<double> r;  // lags 1..max_lag
  double band95 = 0.0;
  double band99 = 0.0;
};

struct ZHistData {
  std::vector<double> bin_lo;
  std::vector<double> bin_hi;
  std::vector<std::size_t> count;
  std::vector<double> overlay;  // unit ISI density at bin centres
};

// One simulated replicate of the envelope: data drawn at a posterior sample,
// rescaled under its own generating parameters.
struct EnvelopeReplicate {
  bool failed = false;
  ModelParams params;
  std::size_t n_events = 0;
  QQData qq;
  KSData ks;
};

// Rescales every inter-event interval, the first anchored at the window
// start (an event exactly there is skipped as a zero-length interval).
// Requires >= 2 resulting intervals and all events before rate.t_f.
RescaledSeries rescale(const ModelConfig& model, const PowerLawRate& rate,
                       const EventCatalogue& cat);

QQData qq(const RescaledSeries& series, bool sqrt_transform = false);

KSData ks(const RescaledSeries& series);

// Consecutive pairs (u_m, u_{m+1}) in time order, for lag-1 dependence plots.
std::vector<std::pair<double, double>> neighbour_pairs(const RescaledSeries& series);

// Sample autocorrelation of tau at lags 1..max_lag with white-noise bands
// +/- z / sqrt(M). Throws NumericError when tau is constant.
AcfData autocorrelation(const RescaledSeries& series, std::size_t max_lag);

// Equal-width histogram of z over [0, max(z)] with the model's unit ISI
// density at bin centres for overlay.
ZHistData z_histogram(const RescaledSeries& series, const ModelConfig& model,
                      std::size_t bins);

// Simulates n_sims catalogues over cat's window at parameter vectors drawn
// from the posterior chains, optionally thins each, and rescales every
// replicate under its own parameters. Replicates whose simulation or
// rescaling fails are marked rather than dropped. The degrade spec's seed
// field is ignored; all randomness derives from `seed`.
std::vector<EnvelopeReplicate> simulation_envelope(
    const ModelConfig& model, const PosteriorRun& posterior,
    const EventCatalogue& cat, std::size_t n_sims,
    const std::optional<ThinningSpec>& degrade, std::uint64_t seed);

}  // namespace ppffm

#endif  // PPFFM_GOF_HPP_
