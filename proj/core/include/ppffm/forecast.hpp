#ifndef PPFFM_FORECAST_HPP_
#define PPFFM_FORECAST_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ppffm/catalogue.hpp"
#include "ppffm/inference.hpp"
#include "ppffm/rate_models.hpp"

namespace ppffm {

// One pseudo-prospective fitting window. A window is skipped (not fitted)
// below the minimum event count and failed when its MCMC run errored; both
// keep the series going.
struct ForecastWindow {
  double data_end = 0.0;  // days; the window always starts at the catalogue start
  std::size_t n_events = 0;
  bool skipped = false;
  bool failed = false;
  std::string error;

  ParamSummary k;
  ParamSummary t_f;
  ParamSummary p;
  ParamSummary shape;  // constant 1 for IP
  double periodicity_mean = 1.0;
  double periodicity_lo = 1.0;
  double periodicity_hi = 1.0;
  double rhat_max = 0.0;

  bool usable() const { return !skipped && !failed; }
};

struct ForecastSeries {
  ModelConfig model;
  std::optional<double> tf_true;  // catalogue eruption time when known
  std::vector<ForecastWindow> windows;
};

// Experiment plumbing shared with the CLI: which sweeps to run and their
// settings. Individual operations below take the relevant pieces directly.
struct ExperimentSpec {
  std::size_t n_windows = 50;
  std::size_t min_events = 20;
  std::vector<double> cutoffs;  // days before the eruption time
  std::optional<double> fix_tf;
  std::size_t cutoff_sim_reps = 100;
  std::optional<ThinningSpec> thinning;
  std::vector<double> alpha_sweep;
  bool sweep_fit_ip = false;
  std::vector<PriorSpec> prior_variants;
};

struct PeriodicityPoint {
  double data_end = 0.0;
  bool usable = false;
  double mean = 1.0;
  double lo = 1.0;
  double hi = 1.0;
};

struct PeriodicityTrack {
  std::vector<PeriodicityPoint> points;
  std::string note;  // set for IP, where periodicity is fixed at 1
};

// Per-cutoff refit plus expected-versus-observed event counts in 15-minute
// bins spanning the catalogue start to its eruption time.
struct CutoffResult {
  double cutoff_days = 0.0;
  double data_end = 0.0;
  ForecastWindow fit;
  std::vector<double> bin_lo;
  std::vector<double> bin_hi;
  std::vector<double> expected;       // mean simulated count per bin
  std::vector<std::size_t> observed;  // catalogue count per bin
};

struct PairedForecast {
  ForecastSeries original;
  ForecastSeries thinned;
  // Per-window thinned-minus-original mean t_f; NaN where either side is
  // unusable.
  std::vector<double> tf_mean_diff;
};

struct AlphaSweepArm {
  double alpha = 1.0;
  std::uint64_t sim_seed = 0;
  std::size_t n_events = 0;
  ForecastSeries ig_fit;
  std::optional<ForecastSeries> ip_fit;
};

struct PriorSensitivity {
  std::vector<PriorSpec> variants;
  std::vector<ForecastSeries> series;  // aligned with variants
  // tf_mean_diff[v][w]: variant v minus variant 0 at window w; NaN where
  // either side is unusable.
  std::vector<std::vector<double>> tf_mean_diff;
};

// Splits the catalogue span into n_windows equal slices and refits on the
// cumulative data up to each slice end. Window k's sub-catalogue and its
// seed stream depend only on k, so any window can be reproduced in
// isolation. threads > 1 distributes windows (each window's chains then run
// serially); otherwise windows run in order with parallel chains.
ForecastSeries pseudo_prospective(const ModelConfig& model, const PriorSpec& prior,
                                  const EventCatalogue& cat, const SamplerConfig& cfg,
                                  std::size_t n_windows, std::size_t min_events = 20,
                                  unsigned threads = 0);

// The periodicity evolution stored in a series, as its own track.
PeriodicityTrack periodicity_track(const ForecastSeries& series);

// Per-window t_f credible-interval widths; NaN for skipped or failed
// windows.
std::vector<double> tf_hpdi_widths(const ForecastSeries& series);

// Refits with data truncated at each cutoff before the eruption time
// (optionally with t_f pinned to fix_tf), then simulates sim_reps catalogues
// from posterior draws to build expected event counts per 15-minute bin.
// Requires the catalogue to carry an eruption time.
std::vector<CutoffResult> cutoff_experiment(
    const ModelConfig& model, const PriorSpec& prior, const EventCatalogue& cat,
    const SamplerConfig& cfg, const std::vector<double>& cutoffs,
    std::optional<double> fix_tf, std::size_t min_events = 20,
    std::size_t sim_reps = 100, unsigned threads = 0);

// Pseudo-prospective series on the catalogue and on a thinned copy, with
// identical window boundaries and seeds so differences isolate the thinning.
PairedForecast incompleteness_experiment(const ModelConfig& model,
                                         const PriorSpec& prior,
                                         const EventCatalogue& cat,
                                         const SamplerConfig& cfg,
                                         const ThinningSpec& thinning,
                                         std::size_t n_windows,
                                         std::size_t min_events = 20,
                                         unsigned threads = 0);

// For each alpha: simulate an IG catalogue over [sim_start, sim_end] at the
// given rate, then run pseudo-prospective IG fits (and optionally IP fits on
// the same data). Arms parallelize.
std::vector<AlphaSweepArm> alpha_sensitivity(
    const PowerLawRate& rate, const std::vector<double>& alphas,
    const PriorSpec& prior, const SamplerConfig& cfg, double sim_start,
    double sim_end, std::size_t n_windows, bool fit_ip = false,
    std::size_t min_events = 20, unsigned threads = 0);

// Matched-window fits under each prior variant (>= 2), with per-window mean
// t_f differences against the first variant.
PriorSensitivity prior_sensitivity(const ModelConfig& model,
                                   const EventCatalogue& cat,
                                   const SamplerConfig& cfg,
                                   const std::vector<PriorSpec>& variants,
                                   std::size_t n_windows,
                                   std::size_t min_events = 20,
                                   unsigned threads = 0);

}  // namespace ppffm

#endif  // PPFFM_FORECAST_HPP_
