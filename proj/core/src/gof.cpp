#include "ppffm/gof.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ppffm/errors.hpp"
#include "ppffm/rng.hpp"
#include "ppffm/simulator.hpp"

namespace ppffm {
namespace {

std::vector<double> plotting_positions(std::size_t m) {
  std::vector<double> b(m);
  for (std::size_t i = 0; i < m; ++i) {
    b[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(m);
  }
  return b;
}

}  // namespace

RescaledSeries rescale(const ModelConfig& model, const PowerLawRate& rate,
                       const EventCatalogue& cat) {
  model.validate();
  if (!cat.empty() && cat.events().back() >= rate.t_f) {
    throw ValidationError("all events must precede the failure time");
  }
  const double c = model.rescale_factor();

  RescaledSeries series;
  double prev = cat.window_start();
  const auto& events = cat.events();
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (i == 0 && events[i] == prev) continue;  // zero-length first interval
    const double big_lambda = integrated_intensity(rate, prev, events[i]);
    const double log_s = isi_log_survival_at(model, big_lambda);
    const double tau = -log_s;
    double u = -std::expm1(log_s);
    if (u >= 1.0) u = std::nextafter(1.0, 0.0);
    if (std::exp(log_s) == 0.0) {
      series.underflow_intervals.push_back(series.tau.size());
    }
    series.z.push_back(c * big_lambda);
    series.tau.push_back(tau);
    series.u.push_back(u);
    prev = events[i];
  }
  if (series.size() < 2) {
    throw ValidationError("rescaling needs at least two intervals");
  }
  return series;
}

QQData qq(const RescaledSeries& series, bool sqrt_transform) {
  const std::size_t m = series.size();
  if (m < 2) throw ValidationError("Q-Q needs at least two intervals");

  QQData out;
  out.b = plotting_positions(m);
  out.model_q.resize(m);
  out.empirical_q = series.tau;
  std::sort(out.empirical_q.begin(), out.empirical_q.end());
  for (std::size_t i = 0; i < m; ++i) {
    out.model_q[i] = -std::log1p(-out.b[i]);
  }
  if (sqrt_transform) {
    for (auto& v : out.model_q) v = std::sqrt(v);
    for (auto& v : out.empirical_q) v = std::sqrt(v);
    out.sqrt_transformed = true;
  }
  return out;
}

KSData ks(const RescaledSeries& series) {
  const std::size_t m = series.size();
  if (m < 5) throw ValidationError("K-S needs at least five intervals");

  KSData out;
  out.b = plotting_positions(m);
  out.u_sorted = series.u;
  std::sort(out.u_sorted.begin(), out.u_sorted.end());
  for (std::size_t i = 0; i < m; ++i) {
    out.d_stat = std::max(out.d_stat, std::abs(out.u_sorted[i] - out.b[i]));
  }
  const double root_m = std::sqrt(static_cast<double>(m));
  out.bound95 = 1.36 / root_m;
  out.bound99 = 1.63 / root_m;
  out.pass95 = out.d_stat <= out.bound95;
  out.pass99 = out.d_stat <= out.bound99;
  return out;
}

std::vector<std::pair<double, double>> neighbour_pairs(const RescaledSeries& series) {
  const std::size_t m = series.size();
  if (m < 2) throw ValidationError("pair plot needs at least two intervals");
  std::vector<std::pair<double, double>> pairs;
  pairs.reserve(m - 1);
  for (std::size_t i = 0; i + 1 < m; ++i) {
    pairs.emplace_back(series.u[i], series.u[i + 1]);
  }
  return pairs;
}

AcfData autocorrelation(const RescaledSeries& series, std::size_t max_lag) {
  const std::size_t m = series.size();
  if (max_lag == 0) throw ValidationError("autocorrelation needs max_lag >= 1");
  if (m <= max_lag) {
    throw ValidationError("autocorrelation needs more intervals than lags");
  }

  double mean = 0.0;
  for (double v : series.tau) mean += v;
  mean /= static_cast<double>(m);
  double denom = 0.0;
  for (double v : series.tau) denom += (v - mean) * (v - mean);
  if (!(denom > 0.0)) {
    throw NumericError("autocorrelation undefined for constant series");
  }

  AcfData out;
  out.r.resize(max_lag);
  for (std::size_t lag = 1; lag <= max_lag; ++lag) {
    double num = 0.0;
    for (std::size_t i = 0; i + lag < m; ++i) {
      num += (series.tau[i] - mean) * (series.tau[i + lag] - mean);
    }
    out.r[lag - 1] = num / denom;
  }
  const double root_m = std::sqrt(static_cast<double>(m));
  out.band95 = 1.96 / root_m;
  out.band99 = 2.576 / root_m;
  return out;
}

ZHistData z_histogram(const RescaledSeries& series, const ModelConfig& model,
                      std::size_t bins) {
  const std::size_t m = series.size();
  if (m < 10) throw ValidationError("z histogram needs at least ten intervals");
  if (bins == 0) throw ValidationError("z histogram needs at least one bin");
  const double z_max = *std::max_element(series.z.begin(), series.z.end());
  if (!(z_max > 0.0)) {
    throw ValidationError("z histogram needs a positive range");
  }

  ZHistData out;
  const double width = z_max / static_cast<double>(bins);
  out.bin_lo.resize(bins);
  out.bin_hi.resize(bins);
  out.count.assign(bins, 0);
  out.overlay.resize(bins);
  for (std::size_t i = 0; i < bins; ++i) {
    out.bin_lo[i] = width * static_cast<double>(i);
    out.bin_hi[i] = width * static_cast<double>(i + 1);
    const double centre = 0.5 * (out.bin_lo[i] + out.bin_hi[i]);
    out.overlay[i] = std::exp(unit_isi_log_density(model, centre));
  }
  for (double z : series.z) {
    std::size_t idx = static_cast<std::size_t>(z / width);
    if (idx >= bins) idx = bins - 1;  // z == z_max lands in the last bin
    ++out.count[idx];
  }
  return out;
}

std::vector<EnvelopeReplicate> simulation_envelope(
    const ModelConfig& model, const PosteriorRun& posterior,
    const EventCatalogue& cat, std::size_t n_sims,
    const std::optional<ThinningSpec>& degrade, std::uint64_t seed) {
  if (posterior.chains.empty() || posterior.total_draws() == 0) {
    throw ValidationError("simulation envelope needs posterior draws");
  }
  if (n_sims == 0) {
    throw ValidationError("simulation envelope needs n_sims >= 1");
  }

  std::vector<EnvelopeReplicate> replicates(n_sims);
  for (std::size_t i = 0; i < n_sims; ++i) {
    EnvelopeReplicate& rep = replicates[i];
    const std::string tag = "envelope/" + std::to_string(i);
    Rng rng = Rng(seed).stream(tag);

    // Uniform draw over (chain, row) pairs.
    std::size_t chain = static_cast<std::size_t>(
        rng.uniform01() * static_cast<double>(posterior.chains.size()));
    chain = std::min(chain, posterior.chains.size() - 1);
    const std::size_t rows = posterior.chains[chain].rows;
    std::size_t row =
        static_cast<std::size_t>(rng.uniform01() * static_cast<double>(rows));
    row = std::min(row, rows - 1);
    rep.params = posterior.draw(chain, row);

    try {
      SimulationSpec spec;
      spec.model = ModelConfig{model.family, rep.params.shape};
      spec.rate = PowerLawRate{rep.params.k, rep.params.t_f, rep.params.p};
      spec.start = cat.window_start();
      spec.end = cat.window_end();
      spec.seed = derive_seed(seed, tag + "/sim");
      EventCatalogue replicate_cat = simulate(spec).catalogue;
      if (degrade) {
        ThinningSpec t = *degrade;
        t.seed = derive_seed(seed, tag + "/thin");
        replicate_cat = thin(replicate_cat, t);
      }
      rep.n_events = replicate_cat.size();
      const RescaledSeries series =
          rescale(spec.model, spec.rate, replicate_cat);
      rep.qq = qq(series, false);
      rep.ks = ks(series);
    } catch (const std::exception&) {
      rep.failed = true;
    }
  }
  return replicates;
}

}  // namespace ppffm
