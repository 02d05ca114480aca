#include "ppffm/forecast.hpp"

#include <cmath>
#include <vector>

#include "doctest.h"
#include "ppffm/errors.hpp"
#include "ppffm/rng.hpp"
#include "ppffm/simulator.hpp"

using namespace ppffm;

namespace {

const PowerLawRate kTruthRate{295.382, 1.321, 1.286};
const ModelConfig kTruthModel{Family::IG, 2.256};

EventCatalogue benchmark(double end = 1.0, std::uint64_t seed = 1) {
  SimulationSpec spec;
  spec.model = kTruthModel;
  spec.rate = kTruthRate;
  spec.start = 0.0;
  spec.end = end;
  spec.seed = seed;
  return simulate(spec).catalogue;
}

SamplerConfig quick_config(std::uint64_t seed = 29) {
  SamplerConfig cfg;
  cfg.iterations = 700;
  cfg.burn_in = 200;
  cfg.chains = 2;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_SUITE_BEGIN("forecast");

TEST_CASE("pseudo-prospective windows slice the span evenly") {
  const EventCatalogue cat = benchmark();
  const std::size_t n = 6;
  const ForecastSeries series =
      pseudo_prospective(kTruthModel, PriorSpec{}, cat, quick_config(), n, 20);

  REQUIRE(series.windows.size() == n);
  REQUIRE(series.tf_true.has_value());
  CHECK(*series.tf_true == 1.321);
  for (std::size_t i = 0; i < n; ++i) {
    const double expect = cat.window_start() +
                          cat.span() * double(i + 1) / double(n);
    CHECK(series.windows[i].data_end == doctest::Approx(expect).epsilon(1e-12));
  }
  CHECK(series.windows[n - 1].data_end == cat.window_end());
  CHECK(series.windows[n - 1].n_events == cat.size());

  // Cumulative windows never lose events.
  for (std::size_t i = 1; i < n; ++i) {
    CHECK(series.windows[i].n_events >= series.windows[i - 1].n_events);
  }

  for (const auto& w : series.windows) {
    if (!w.usable()) continue;
    CHECK(w.t_f.mean > w.data_end);
    CHECK(w.t_f.hpdi_hi >= w.t_f.hpdi_lo);
    CHECK(w.rhat_max > 0.9);
    CHECK(w.k.name == "k");
  }
}

TEST_CASE("sparse early windows are skipped, not fitted") {
  // A high event-count floor forces early windows out.
  const EventCatalogue cat = benchmark();
  const ForecastSeries series = pseudo_prospective(
      kTruthModel, PriorSpec{}, cat, quick_config(), 5, cat.size() / 2);
  CHECK(series.windows.front().skipped);
  CHECK_FALSE(series.windows.back().skipped);
  for (const auto& w : series.windows) {
    if (w.skipped) {
      CHECK(w.n_events < cat.size() / 2);
      CHECK_FALSE(w.usable());
      CHECK(w.rhat_max == 0.0);
    }
  }
}

TEST_CASE("each window is reproducible in isolation from its seed stream") {
  const EventCatalogue cat = benchmark();
  const SamplerConfig cfg = quick_config(31);
  const std::size_t n = 4;
  const ForecastSeries series =
      pseudo_prospective(kTruthModel, PriorSpec{}, cat, cfg, n, 20);

  const std::size_t i = 2;  // third window
  REQUIRE(series.windows[i].usable());
  SamplerConfig solo_cfg = cfg;
  solo_cfg.seed = derive_seed(cfg.seed, "window/" + std::to_string(i + 1));
  const EventCatalogue sub =
      window(cat, cat.window_start(), series.windows[i].data_end);
  const PosteriorRun solo = run_mcmc(kTruthModel, PriorSpec{}, sub, solo_cfg);
  CHECK(series.windows[i].t_f.mean == solo.summary("t_f").mean);
  CHECK(series.windows[i].t_f.hpdi_lo == solo.summary("t_f").hpdi_lo);
  CHECK(series.windows[i].k.sd == solo.summary("k").sd);

  // Distributing windows across threads cannot change any result.
  const ForecastSeries threaded =
      pseudo_prospective(kTruthModel, PriorSpec{}, cat, cfg, n, 20, 4);
  for (std::size_t w = 0; w < n; ++w) {
    CHECK(threaded.windows[w].t_f.mean == series.windows[w].t_f.mean);
    CHECK(threaded.windows[w].p.sd == series.windows[w].p.sd);
  }
}

TEST_CASE("window periodicity summarizes the mapped shape draws") {
  const EventCatalogue cat = benchmark();
  const SamplerConfig cfg = quick_config(37);
  const ForecastSeries series =
      pseudo_prospective(kTruthModel, PriorSpec{}, cat, cfg, 3, 20);
  const std::size_t i = 2;
  REQUIRE(series.windows[i].usable());

  SamplerConfig solo_cfg = cfg;
  solo_cfg.seed = derive_seed(cfg.seed, "window/" + std::to_string(i + 1));
  const PosteriorRun solo = run_mcmc(
      kTruthModel, PriorSpec{},
      window(cat, cat.window_start(), series.windows[i].data_end), solo_cfg);
  std::vector<double> mapped = solo.pooled(solo.param_index("shape"));
  for (auto& v : mapped) v = periodicity({Family::IG, v});
  double mean = 0.0;
  for (double v : mapped) mean += v;
  mean /= double(mapped.size());
  CHECK(series.windows[i].periodicity_mean == doctest::Approx(mean).epsilon(1e-12));

  const PeriodicityTrack track = periodicity_track(series);
  REQUIRE(track.points.size() == 3);
  CHECK(track.note.empty());
  CHECK(track.points[i].usable);
  CHECK(track.points[i].mean == series.windows[i].periodicity_mean);
  CHECK(track.points[i].lo <= track.points[i].mean);
  CHECK(track.points[i].hi >= track.points[i].mean);
}

TEST_CASE("IP series pin periodicity at one and say so") {
  const EventCatalogue cat = benchmark(0.9);
  const ForecastSeries series =
      pseudo_prospective({Family::IP, 1.0}, PriorSpec{}, cat, quick_config(), 3, 20);
  const PeriodicityTrack track = periodicity_track(series);
  CHECK(track.note == "IP periodicity is fixed at 1");
  for (const auto& pt : track.points) {
    CHECK(pt.mean == 1.0);
    CHECK(pt.lo == 1.0);
    CHECK(pt.hi == 1.0);
  }
  for (const auto& w : series.windows) {
    if (w.usable()) {
      CHECK(w.shape.mean == 1.0);
      CHECK(w.shape.sd == 0.0);
    }
  }
}

TEST_CASE("tf_hpdi_widths reports widths and NaN for unusable windows") {
  const EventCatalogue cat = benchmark();
  const ForecastSeries series = pseudo_prospective(
      kTruthModel, PriorSpec{}, cat, quick_config(), 5, cat.size() / 2);
  const std::vector<double> widths = tf_hpdi_widths(series);
  REQUIRE(widths.size() == 5);
  for (std::size_t i = 0; i < widths.size(); ++i) {
    if (series.windows[i].usable()) {
      CHECK(widths[i] ==
            series.windows[i].t_f.hpdi_hi - series.windows[i].t_f.hpdi_lo);
      CHECK(widths[i] >= 0.0);
    } else {
      CHECK(std::isnan(widths[i]));
    }
  }
}

TEST_CASE("pseudo-prospective input validation") {
  const EventCatalogue cat = benchmark(0.9);
  CHECK_THROWS_AS(pseudo_prospective(kTruthModel, PriorSpec{}, cat,
                                     quick_config(), 1, 20),
                  ValidationError);
  SamplerConfig bad = quick_config();
  bad.chains = 1;
  CHECK_THROWS_AS(pseudo_prospective(kTruthModel, PriorSpec{}, cat, bad, 3, 20),
                  ValidationError);
}

TEST_CASE("cutoff experiment pins t_f and bins the expected counts") {
  const EventCatalogue cat = benchmark(1.2);
  const std::vector<double> cutoffs = {0.35, 0.25};
  const auto results = cutoff_experiment(kTruthModel, PriorSpec{}, cat,
                                         quick_config(41), cutoffs, 1.321, 20, 10);
  REQUIRE(results.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    const CutoffResult& res = results[i];
    CHECK(res.cutoff_days == cutoffs[i]);
    CHECK(res.data_end == doctest::Approx(1.321 - cutoffs[i]).epsilon(1e-12));
    REQUIRE(res.fit.usable());
    // Pinned t_f collapses its marginal to the fixed point.
    CHECK(res.fit.t_f.mean == 1.321);
    CHECK(res.fit.t_f.sd == 0.0);
    CHECK(res.fit.t_f.hpdi_lo == 1.321);

    // Quarter-hour bins span the catalogue start to the eruption time.
    REQUIRE(!res.bin_lo.empty());
    REQUIRE(res.bin_lo.size() == res.bin_hi.size());
    REQUIRE(res.bin_lo.size() == res.expected.size());
    REQUIRE(res.bin_lo.size() == res.observed.size());
    CHECK(res.bin_lo.front() == cat.window_start());
    CHECK(res.bin_hi.back() >= 1.321 - 1e-12);
    const double quarter_hour = 15.0 / 1440.0;
    for (std::size_t b = 0; b + 1 < res.bin_lo.size(); ++b) {
      CHECK(res.bin_hi[b] - res.bin_lo[b] == doctest::Approx(quarter_hour).epsilon(1e-12));
      CHECK(res.bin_lo[b + 1] == res.bin_hi[b]);
    }

    // Observed counts are the catalogue's own histogram.
    std::size_t total = 0;
    for (std::size_t b = 0; b < res.observed.size(); ++b) total += res.observed[b];
    CHECK(total == cat.size());
    for (double e : res.expected) CHECK(e >= 0.0);
  }

  // More data (smaller cutoff) keeps more events.
  CHECK(results[1].fit.n_events > results[0].fit.n_events);
}

TEST_CASE("cutoff experiment validation and over-truncation") {
  const EventCatalogue no_eruption({0.1, 0.2, 0.5}, 0.0, 1.0);
  CHECK_THROWS_AS(cutoff_experiment(kTruthModel, PriorSpec{}, no_eruption,
                                    quick_config(), {0.1}, std::nullopt),
                  ValidationError);
  const EventCatalogue cat = benchmark(1.2);
  CHECK_THROWS_AS(cutoff_experiment(kTruthModel, PriorSpec{}, cat,
                                    quick_config(), {}, std::nullopt),
                  ValidationError);
  CHECK_THROWS_AS(cutoff_experiment(kTruthModel, PriorSpec{}, cat,
                                    quick_config(), {-0.1}, std::nullopt),
                  ValidationError);

  // A cutoff deep enough to starve the window is skipped, not an error.
  const auto starved = cutoff_experiment(kTruthModel, PriorSpec{}, cat,
                                         quick_config(), {1.30}, 1.321, 20, 5);
  REQUIRE(starved.size() == 1);
  CHECK(starved[0].fit.skipped);
}

TEST_CASE("incompleteness experiment pairs windows exactly") {
  const EventCatalogue cat = benchmark();
  const SamplerConfig cfg = quick_config(43);

  const PairedForecast zero = incompleteness_experiment(
      kTruthModel, PriorSpec{}, cat, cfg, ThinningSpec{0.0, 5}, 4, 20);
  REQUIRE(zero.original.windows.size() == 4);
  REQUIRE(zero.thinned.windows.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(zero.original.windows[i].data_end == zero.thinned.windows[i].data_end);
    if (zero.original.windows[i].usable()) {
      // Thinning nothing must reproduce the original fit exactly.
      CHECK(zero.tf_mean_diff[i] == 0.0);
      CHECK(zero.original.windows[i].t_f.mean == zero.thinned.windows[i].t_f.mean);
    }
  }

  const PairedForecast thinned = incompleteness_experiment(
      kTruthModel, PriorSpec{}, cat, cfg, ThinningSpec{0.3, 5}, 4, 20);
  bool any_nonzero = false;
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(thinned.thinned.windows[i].n_events <=
          thinned.original.windows[i].n_events);
    if (thinned.original.windows[i].usable() &&
        thinned.thinned.windows[i].usable()) {
      CHECK(thinned.tf_mean_diff[i] ==
            doctest::Approx(thinned.thinned.windows[i].t_f.mean -
                            thinned.original.windows[i].t_f.mean)
                .epsilon(1e-14));
      any_nonzero = any_nonzero || thinned.tf_mean_diff[i] != 0.0;
    }
  }
  CHECK(any_nonzero);

  CHECK_THROWS_AS(incompleteness_experiment(kTruthModel, PriorSpec{}, cat, cfg,
                                            ThinningSpec{1.0, 5}, 4, 20),
                  ValidationError);
}

TEST_CASE("alpha sensitivity simulates and fits each arm deterministically") {
  PriorSpec prior;
  const SamplerConfig cfg = quick_config(47);
  PowerLawRate rate = kTruthRate;
  rate.k = 120.0;  // fewer events per arm keeps the sweep quick
  const std::vector<double> alphas = {1.0, 5.0};
  const auto arms =
      alpha_sensitivity(rate, alphas, prior, cfg, 0.0, 1.0, 3, true, 20);
  REQUIRE(arms.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(arms[i].alpha == alphas[i]);
    CHECK(arms[i].sim_seed ==
          derive_seed(cfg.seed, "alpha/" + std::to_string(i) + "/sim"));
    CHECK(arms[i].n_events > 0);
    CHECK(arms[i].ig_fit.windows.size() == 3);
    REQUIRE(arms[i].ip_fit.has_value());
    CHECK(arms[i].ip_fit->windows.size() == 3);
    CHECK(arms[i].ig_fit.model.family == Family::IG);
    CHECK(arms[i].ip_fit->model.family == Family::IP);
  }

  const auto again =
      alpha_sensitivity(rate, alphas, prior, cfg, 0.0, 1.0, 3, true, 20);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(arms[i].n_events == again[i].n_events);
    for (std::size_t w = 0; w < 3; ++w) {
      CHECK(arms[i].ig_fit.windows[w].t_f.mean ==
            again[i].ig_fit.windows[w].t_f.mean);
    }
  }

  const auto no_ip =
      alpha_sensitivity(rate, {2.0}, prior, cfg, 0.0, 1.0, 3, false, 20);
  CHECK_FALSE(no_ip[0].ip_fit.has_value());

  CHECK_THROWS_AS(alpha_sensitivity(rate, {}, prior, cfg, 0.0, 1.0, 3),
                  ValidationError);
  CHECK_THROWS_AS(alpha_sensitivity(rate, {-1.0}, prior, cfg, 0.0, 1.0, 3),
                  ValidationError);
}

TEST_CASE("prior sensitivity measures matched-window shifts") {
  const EventCatalogue cat = benchmark();
  const SamplerConfig cfg = quick_config(53);
  PriorSpec base;

  const PriorSensitivity same =
      prior_sensitivity(kTruthModel, cat, cfg, {base, base}, 3, 20);
  REQUIRE(same.series.size() == 2);
  REQUIRE(same.tf_mean_diff.size() == 2);
  for (std::size_t w = 0; w < 3; ++w) {
    if (same.series[0].windows[w].usable()) {
      CHECK(same.tf_mean_diff[1][w] == 0.0);
    }
  }

  // A p prior that cannot reach the true exponent pulls the fit with it.
  PriorSpec narrow = base;
  narrow.p_kind = PPriorKind::Uniform;
  narrow.p_box = {0.5, 0.9};
  const PriorSensitivity shifted =
      prior_sensitivity(kTruthModel, cat, cfg, {base, narrow}, 3, 20);
  bool some_window = false;
  for (std::size_t w = 0; w < 3; ++w) {
    const auto& win = shifted.series[1].windows[w];
    if (!win.usable()) continue;
    some_window = true;
    CHECK(win.p.hpdi_hi <= 0.9);
    CHECK(win.p.hpdi_lo >= 0.5);
    CHECK(shifted.tf_mean_diff[1][w] != 0.0);
  }
  CHECK(some_window);

  CHECK_THROWS_AS(prior_sensitivity(kTruthModel, cat, cfg, {base}, 3, 20),
                  ValidationError);
}

TEST_SUITE_END();
