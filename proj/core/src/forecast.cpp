#include "ppffm/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <thread>

#include "ppffm/errors.hpp"
#include "ppffm/rng.hpp"
#include "ppffm/simulator.hpp"

namespace ppffm {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kQuarterHourDays = 15.0 / 1440.0;

// Runs fn(0..n-1), at most `threads` at a time; sequential for threads <= 1.
// The first exception wins and is rethrown after all workers finish.
void parallel_for(std::size_t n, unsigned threads,
                  const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> failures(n);
  auto guarded = [&](std::size_t i) {
    try {
      fn(i);
    } catch (...) {
      failures[i] = std::current_exception();
    }
  };
  for (std::size_t first = 0; first < n; first += threads) {
    std::vector<std::thread> pool;
    const std::size_t last = std::min<std::size_t>(first + threads, n);
    for (std::size_t i = first; i < last; ++i) pool.emplace_back(guarded, i);
    for (auto& t : pool) t.join();
  }
  for (const auto& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }
}

ParamSummary constant_summary(const char* name, double value) {
  ParamSummary s;
  s.name = name;
  s.mean = value;
  s.sd = 0.0;
  s.hpdi_lo = value;
  s.hpdi_hi = value;
  return s;
}

void fill_window_from_run(ForecastWindow* w, const PosteriorRun& run) {
  w->k = run.summary("k");
  w->t_f = run.summary("t_f");
  w->p = run.summary("p");
  if (run.model.family == Family::IP) {
    w->shape = constant_summary("shape", 1.0);
    w->periodicity_mean = w->periodicity_lo = w->periodicity_hi = 1.0;
  } else {
    w->shape = run.summary("shape");
    std::vector<double> per = run.pooled(run.param_index("shape"));
    for (auto& v : per) {
      v = periodicity(ModelConfig{run.model.family, v});
    }
    double sum = 0.0;
    for (double v : per) sum += v;
    w->periodicity_mean = sum / static_cast<double>(per.size());
    const auto interval = hpdi(per, 0.95);
    w->periodicity_lo = interval.first;
    w->periodicity_hi = interval.second;
  }
  w->rhat_max = run.rhat_max();
}

// Fits one cumulative window; failures are recorded on the window so the
// surrounding series keeps going.
ForecastWindow fit_window(const ModelConfig& model, const PriorSpec& prior,
                          const EventCatalogue& sub, const SamplerConfig& cfg,
                          std::size_t min_events, unsigned chain_threads,
                          double data_end) {
  ForecastWindow w;
  w.data_end = data_end;
  w.n_events = sub.size();
  if (sub.size() < min_events) {
    w.skipped = true;
    return w;
  }
  try {
    const PosteriorRun run = run_mcmc(model, prior, sub, cfg, chain_threads);
    fill_window_from_run(&w, run);
  } catch (const std::exception& e) {
    w.failed = true;
    w.error = e.what();
  }
  return w;
}

std::vector<double> window_ends(const EventCatalogue& cat, std::size_t n_windows) {
  std::vector<double> ends(n_windows);
  const double start = cat.window_start();
  const double span = cat.span();
  for (std::size_t k = 1; k <= n_windows; ++k) {
    ends[k - 1] = (k == n_windows)
                      ? cat.window_end()
                      : start + span * static_cast<double>(k) /
                                    static_cast<double>(n_windows);
  }
  return ends;
}

}  // namespace

ForecastSeries pseudo_prospective(const ModelConfig& model, const PriorSpec& prior,
                                  const EventCatalogue& cat, const SamplerConfig& cfg,
                                  std::size_t n_windows, std::size_t min_events,
                                  unsigned threads) {
  if (n_windows < 2) {
    throw ValidationError("pseudo-prospective run needs n_windows >= 2");
  }
  if (!(cat.span() > 0.0)) {
    throw ValidationError("catalogue window must span positive duration");
  }
  model.validate();
  prior.validate();
  cfg.validate();

  ForecastSeries series;
  series.model = model;
  series.tf_true = cat.eruption_time();
  series.windows.resize(n_windows);
  const std::vector<double> ends = window_ends(cat, n_windows);

  const bool windows_parallel = threads > 1;
  parallel_for(n_windows, threads, [&](std::size_t i) {
    SamplerConfig window_cfg = cfg;
    window_cfg.seed = derive_seed(cfg.seed, "window/" + std::to_string(i + 1));
    const EventCatalogue sub = window(cat, cat.window_start(), ends[i]);
    series.windows[i] =
        fit_window(model, prior, sub, window_cfg, min_events,
                   windows_parallel ? 1 : threads, ends[i]);
  });
  return series;
}

PeriodicityTrack periodicity_track(const ForecastSeries& series) {
  PeriodicityTrack track;
  if (series.model.family == Family::IP) {
    track.note = "IP periodicity is fixed at 1";
  }
  track.points.reserve(series.windows.size());
  for (const auto& w : series.windows) {
    PeriodicityPoint pt;
    pt.data_end = w.data_end;
    pt.usable = w.usable();
    if (pt.usable) {
      pt.mean = w.periodicity_mean;
      pt.lo = w.periodicity_lo;
      pt.hi = w.periodicity_hi;
    }
    track.points.push_back(pt);
  }
  return track;
}

std::vector<double> tf_hpdi_widths(const ForecastSeries& series) {
  std::vector<double> widths;
  widths.reserve(series.windows.size());
  for (const auto& w : series.windows) {
    widths.push_back(w.usable() ? w.t_f.hpdi_hi - w.t_f.hpdi_lo : kNaN);
  }
  return widths;
}

std::vector<CutoffResult> cutoff_experiment(
    const ModelConfig& model, const PriorSpec& prior, const EventCatalogue& cat,
    const SamplerConfig& cfg, const std::vector<double>& cutoffs,
    std::optional<double> fix_tf, std::size_t min_events, std::size_t sim_reps,
    unsigned threads) {
  if (!cat.eruption_time()) {
    throw ValidationError(
        "cutoff experiment needs a catalogue with an eruption time");
  }
  if (cutoffs.empty()) {
    throw ValidationError("cutoff experiment needs at least one cutoff");
  }
  for (double c : cutoffs) {
    if (!(c > 0.0)) throw ValidationError("cutoffs must be positive durations");
  }
  model.validate();
  prior.validate();
  cfg.validate();

  const double eruption = *cat.eruption_time();
  const double start = cat.window_start();
  const std::size_t n_bins = static_cast<std::size_t>(
      std::ceil((eruption - start) / kQuarterHourDays));
  std::vector<double> bin_lo(n_bins), bin_hi(n_bins);
  for (std::size_t b = 0; b < n_bins; ++b) {
    bin_lo[b] = start + kQuarterHourDays * static_cast<double>(b);
    bin_hi[b] = start + kQuarterHourDays * static_cast<double>(b + 1);
  }
  auto bin_of = [&](double t) {
    auto idx = static_cast<std::size_t>((t - start) / kQuarterHourDays);
    return std::min(idx, n_bins - 1);
  };
  std::vector<std::size_t> observed(n_bins, 0);
  for (double t : cat.events()) ++observed[bin_of(t)];

  std::vector<CutoffResult> results(cutoffs.size());
  const bool arms_parallel = threads > 1;
  parallel_for(cutoffs.size(), threads, [&](std::size_t i) {
    CutoffResult& res = results[i];
    res.cutoff_days = cutoffs[i];
    res.data_end = eruption - cutoffs[i];
    res.bin_lo = bin_lo;
    res.bin_hi = bin_hi;
    res.observed = observed;
    res.fit.data_end = res.data_end;

    if (!(res.data_end > start)) {
      res.fit.failed = true;
      res.fit.error = "cutoff precedes the catalogue start";
      return;
    }
    const std::uint64_t arm_seed =
        derive_seed(cfg.seed, "cutoff/" + std::to_string(i));
    SamplerConfig arm_cfg = cfg;
    arm_cfg.seed = arm_seed;
    PriorSpec arm_prior = prior;
    if (fix_tf) arm_prior.pinned_tf = *fix_tf;

    const EventCatalogue sub = window(cat, start, res.data_end);
    res.fit.n_events = sub.size();
    if (sub.size() < min_events) {
      res.fit.skipped = true;
      return;
    }
    PosteriorRun run;
    try {
      run = run_mcmc(model, arm_prior, sub, arm_cfg,
                     arms_parallel ? 1 : threads);
    } catch (const std::exception& e) {
      res.fit.failed = true;
      res.fit.error = e.what();
      return;
    }
    fill_window_from_run(&res.fit, run);

    // Expected counts: average event histograms over catalogues simulated
    // at parameter vectors drawn from the chain.
    res.expected.assign(n_bins, 0.0);
    for (std::size_t rep = 0; rep < sim_reps; ++rep) {
      const std::string tag = "rep/" + std::to_string(rep);
      Rng rng = Rng(arm_seed).stream(tag);
      std::size_t chain = static_cast<std::size_t>(
          rng.uniform01() * static_cast<double>(run.chains.size()));
      chain = std::min(chain, run.chains.size() - 1);
      const std::size_t rows = run.chains[chain].rows;
      std::size_t row = static_cast<std::size_t>(
          rng.uniform01() * static_cast<double>(rows));
      row = std::min(row, rows - 1);
      const ModelParams q = run.draw(chain, row);

      // The replicate's own t_f may precede the eruption; simulate to just
      // before whichever horizon comes first.
      const double horizon = std::min(
          eruption, std::nextafter(q.t_f, -std::numeric_limits<double>::infinity()));
      if (!(horizon > start)) continue;
      SimulationSpec spec;
      spec.model = ModelConfig{model.family, q.shape};
      spec.rate = PowerLawRate{q.k, q.t_f, q.p};
      spec.start = start;
      spec.end = horizon;
      spec.seed = derive_seed(arm_seed, tag + "/sim");
      const SimulationResult sim = simulate(spec);
      for (double t : sim.catalogue.events()) res.expected[bin_of(t)] += 1.0;
    }
    for (auto& e : res.expected) e /= static_cast<double>(sim_reps);
  });
  return results;
}

PairedForecast incompleteness_experiment(const ModelConfig& model,
                                         const PriorSpec& prior,
                                         const EventCatalogue& cat,
                                         const SamplerConfig& cfg,
                                         const ThinningSpec& thinning,
                                         std::size_t n_windows,
                                         std::size_t min_events,
                                         unsigned threads) {
  if (!(thinning.fraction >= 0.0 && thinning.fraction < 1.0)) {
    throw ValidationError("thinning fraction must lie in [0, 1)");
  }
  const EventCatalogue degraded = thin(cat, thinning);

  PairedForecast paired;
  paired.original = pseudo_prospective(model, prior, cat, cfg, n_windows,
                                       min_events, threads);
  paired.thinned = pseudo_prospective(model, prior, degraded, cfg, n_windows,
                                      min_events, threads);
  paired.tf_mean_diff.resize(n_windows, kNaN);
  for (std::size_t w = 0; w < n_windows; ++w) {
    const ForecastWindow& a = paired.original.windows[w];
    const ForecastWindow& b = paired.thinned.windows[w];
    if (a.usable() && b.usable()) {
      paired.tf_mean_diff[w] = b.t_f.mean - a.t_f.mean;
    }
  }
  return paired;
}

std::vector<AlphaSweepArm> alpha_sensitivity(
    const PowerLawRate& rate, const std::vector<double>& alphas,
    const PriorSpec& prior, const SamplerConfig& cfg, double sim_start,
    double sim_end, std::size_t n_windows, bool fit_ip,
    std::size_t min_events, unsigned threads) {
  if (alphas.empty()) {
    throw ValidationError("alpha sweep needs at least one alpha");
  }
  for (double a : alphas) {
    if (!(a > 0.0)) throw ValidationError("alpha values must be positive");
  }

  std::vector<AlphaSweepArm> arms(alphas.size());
  const bool arms_parallel = threads > 1;
  const unsigned inner_threads = arms_parallel ? 1 : threads;
  parallel_for(alphas.size(), threads, [&](std::size_t i) {
    AlphaSweepArm& arm = arms[i];
    arm.alpha = alphas[i];
    const std::string tag = "alpha/" + std::to_string(i);
    arm.sim_seed = derive_seed(cfg.seed, tag + "/sim");

    SimulationSpec spec;
    spec.model = ModelConfig{Family::IG, arm.alpha};
    spec.rate = rate;
    spec.start = sim_start;
    spec.end = sim_end;
    spec.seed = arm.sim_seed;
    const EventCatalogue data = simulate(spec).catalogue;
    arm.n_events = data.size();

    SamplerConfig ig_cfg = cfg;
    ig_cfg.seed = derive_seed(cfg.seed, tag + "/ig");
    arm.ig_fit = pseudo_prospective(ModelConfig{Family::IG, arm.alpha}, prior,
                                    data, ig_cfg, n_windows, min_events,
                                    inner_threads);
    if (fit_ip) {
      SamplerConfig ip_cfg = cfg;
      ip_cfg.seed = derive_seed(cfg.seed, tag + "/ip");
      arm.ip_fit = pseudo_prospective(ModelConfig{Family::IP, 1.0}, prior, data,
                                      ip_cfg, n_windows, min_events,
                                      inner_threads);
    }
  });
  return arms;
}

PriorSensitivity prior_sensitivity(const ModelConfig& model,
                                   const EventCatalogue& cat,
                                   const SamplerConfig& cfg,
                                   const std::vector<PriorSpec>& variants,
                                   std::size_t n_windows,
                                   std::size_t min_events,
                                   unsigned threads) {
  if (variants.size() < 2) {
    throw ValidationError("prior sensitivity needs at least two variants");
  }

  PriorSensitivity out;
  out.variants = variants;
  out.series.resize(variants.size());
  const bool arms_parallel = threads > 1;
  const unsigned inner_threads = arms_parallel ? 1 : threads;
  parallel_for(variants.size(), threads, [&](std::size_t v) {
    // Same cfg.seed for every variant: matched windows, matched chains.
    out.series[v] = pseudo_prospective(model, variants[v], cat, cfg, n_windows,
                                       min_events, inner_threads);
  });

  out.tf_mean_diff.assign(variants.size(), std::vector<double>(n_windows, kNaN));
  for (std::size_t v = 0; v < variants.size(); ++v) {
    for (std::size_t w = 0; w < n_windows; ++w) {
      const ForecastWindow& base = out.series[0].windows[w];
      const ForecastWindow& cur = out.series[v].windows[w];
      if (base.usable() && cur.usable()) {
        out.tf_mean_diff[v][w] = cur.t_f.mean - base.t_f.mean;
      }
    }
  }
  return out;
}

}  // namespace ppffm
