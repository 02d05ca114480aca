#include "ppffm/inference.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "ppffm/errors.hpp"
#include "ppffm/mcmc.hpp"
#include "ppffm/special_functions.hpp"

namespace ppffm {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Mapping between the sampler's unconstrained coordinates and constrained
// parameters: log k, log(t_f - s_last), log p (or identity p under the
// uniform prior), log shape. Pinned t_f is excluded from the vector.
struct ParamMap {
  int ik = -1;
  int itf = -1;
  int ip = -1;
  int ishape = -1;
  std::size_t dim = 0;
  double s_last = 0.0;
  std::optional<double> pinned_tf;
  bool log_p = true;

  ModelParams to_params(const std::vector<double>& theta) const {
    ModelParams q;
    q.k = std::exp(theta[ik]);
    q.t_f = pinned_tf ? *pinned_tf : s_last + std::exp(theta[itf]);
    q.p = log_p ? std::exp(theta[ip]) : theta[ip];
    q.shape = (ishape >= 0) ? std::exp(theta[ishape]) : 1.0;
    return q;
  }

  std::vector<double> to_theta(const ModelParams& q) const {
    std::vector<double> theta(dim);
    theta[ik] = std::log(q.k);
    if (itf >= 0) theta[itf] = std::log(q.t_f - s_last);
    theta[ip] = log_p ? std::log(q.p) : q.p;
    if (ishape >= 0) theta[ishape] = std::log(q.shape);
    return theta;
  }

  // log |d(params)/d(theta)| for the change of variables.
  double log_jacobian(const std::vector<double>& theta) const {
    double j = theta[ik];
    if (itf >= 0) j += theta[itf];
    if (log_p) j += theta[ip];
    if (ishape >= 0) j += theta[ishape];
    return j;
  }
};

ParamMap make_param_map(const ModelConfig& model, const PriorSpec& prior,
                        double s_last) {
  ParamMap m;
  m.s_last = s_last;
  m.pinned_tf = prior.pinned_tf;
  m.log_p = prior.p_kind == PPriorKind::LogNormal;
  int next = 0;
  m.ik = next++;
  if (!m.pinned_tf) m.itf = next++;
  m.ip = next++;
  if (model.family != Family::IP) m.ishape = next++;
  m.dim = static_cast<std::size_t>(next);
  return m;
}

// Log prior density over the constrained parameters; -infinity outside the
// support. tf_box holds the resolved absolute bounds.
double log_prior(const ModelConfig& model, const ModelParams& q,
                 const PriorSpec& prior, const UniformPrior& tf_box) {
  if (!std::isfinite(q.k) || !prior.k.contains(q.k)) return -kInf;
  double lp = prior.k.log_density(q.k);
  if (prior.pinned_tf) {
    if (q.t_f != *prior.pinned_tf) return -kInf;
  } else {
    if (!std::isfinite(q.t_f) || !tf_box.contains(q.t_f)) return -kInf;
    lp += tf_box.log_density(q.t_f);
  }
  const double pd = prior.log_density_p(q.p);
  if (!std::isfinite(pd)) return -kInf;
  lp += pd;
  if (model.family != Family::IP) {
    if (!std::isfinite(q.shape) || !prior.shape.contains(q.shape)) return -kInf;
    lp += prior.shape.log_density(q.shape);
  }
  return lp;
}

std::vector<double> column(const ChainDraws& chain, std::size_t col) {
  std::vector<double> out(chain.rows);
  for (std::size_t r = 0; r < chain.rows; ++r) out[r] = chain.at(r, col);
  return out;
}

double mean_of(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double sample_sd(const std::vector<double>& x, double mu) {
  if (x.size() < 2) return 0.0;
  double s = 0.0;
  for (double v : x) s += (v - mu) * (v - mu);
  return std::sqrt(s / static_cast<double>(x.size() - 1));
}

}  // namespace

double UniformPrior::log_density(double x) const {
  if (!contains(x) || !(hi > lo)) return -kInf;
  return -std::log(hi - lo);
}

UniformPrior PriorSpec::tf_bounds(double s_last) const {
  if (tf_is_absolute) return tf;
  return UniformPrior{s_last + tf.lo, s_last + tf.hi};
}

double PriorSpec::log_density_p(double p) const {
  if (p_kind == PPriorKind::Uniform) return p_box.log_density(p);
  if (!(p > 0.0) || !std::isfinite(p)) return -kInf;
  const double z = (std::log(p) - p_mu) / p_sigma;
  return -std::log(p * p_sigma) - 0.5 * std::log(2.0 * kPi) - 0.5 * z * z;
}

void PriorSpec::validate() const {
  auto check_box = [](const UniformPrior& b, const char* what, bool positive) {
    if (!std::isfinite(b.lo) || !std::isfinite(b.hi) || !(b.lo < b.hi)) {
      throw ValidationError(std::string(what) +
                            " prior bounds must be finite with lo < hi");
    }
    if (positive && !(b.lo > 0.0)) {
      throw ValidationError(std::string(what) +
                            " prior lower bound must be positive");
    }
  };
  check_box(k, "k", false);
  if (k.lo < 0.0) throw ValidationError("k prior lower bound must be >= 0");
  check_box(tf, "t_f", !tf_is_absolute);
  if (p_kind == PPriorKind::Uniform) {
    check_box(p_box, "p", true);
  } else if (!(p_sigma > 0.0) || !std::isfinite(p_sigma) ||
             !std::isfinite(p_mu)) {
    throw ValidationError("lognormal p prior needs finite mu and sigma > 0");
  }
  check_box(shape, "shape", true);
  if (pinned_tf && !std::isfinite(*pinned_tf)) {
    throw ValidationError("pinned t_f must be finite");
  }
}

void SamplerConfig::validate() const {
  if (iterations == 0 || burn_in >= iterations) {
    throw ValidationError("sampler needs burn_in < iterations");
  }
  if (chains < 2) {
    throw ValidationError("at least two chains are required for diagnostics");
  }
  if (!(target_acceptance > 0.0 && target_acceptance < 1.0)) {
    throw ValidationError("target acceptance must lie in (0, 1)");
  }
}

std::vector<double> PosteriorRun::pooled(std::size_t param) const {
  std::vector<double> out;
  out.reserve(total_draws());
  for (const auto& chain : chains) {
    for (std::size_t r = 0; r < chain.rows; ++r) out.push_back(chain.at(r, param));
  }
  return out;
}

std::size_t PosteriorRun::param_index(const std::string& name) const {
  for (std::size_t i = 0; i < param_names.size(); ++i) {
    if (param_names[i] == name) return i;
  }
  throw ValidationError("unknown parameter '" + name + "'");
}

const ParamSummary& PosteriorRun::summary(const std::string& name) const {
  return summaries[param_index(name)];
}

ModelParams PosteriorRun::draw(std::size_t chain, std::size_t row) const {
  const ChainDraws& c = chains[chain];
  ModelParams q;
  q.k = c.at(row, 0);
  q.t_f = c.at(row, 1);
  q.p = c.at(row, 2);
  q.shape = (c.cols > 3) ? c.at(row, 3) : 1.0;
  return q;
}

std::size_t PosteriorRun::total_draws() const {
  std::size_t n = 0;
  for (const auto& chain : chains) n += chain.rows;
  return n;
}

double PosteriorRun::rhat_max() const {
  double m = 0.0;
  for (double r : rhat) m = std::max(m, r);
  return m;
}

double log_posterior(const ModelConfig& model, const ModelParams& params,
                     const PriorSpec& prior, const EventCatalogue& cat,
                     bool censor_tail) {
  if (cat.empty()) throw ValidationError("posterior requires events");
  prior.validate();
  const UniformPrior tf_box = prior.tf_bounds(cat.events().back());
  const double lp = log_prior(model, params, prior, tf_box);
  if (!std::isfinite(lp)) return -kInf;
  const ModelConfig m{model.family, params.shape};
  const PowerLawRate rate{params.k, params.t_f, params.p};
  const double ll = log_likelihood(m, rate, cat, censor_tail);
  if (!std::isfinite(ll)) return -kInf;
  return lp + ll;
}

PosteriorRun run_mcmc(const ModelConfig& model, const PriorSpec& prior,
                      const EventCatalogue& cat, const SamplerConfig& cfg,
                      unsigned threads, bool censor_tail) {
  if (cat.empty()) throw ValidationError("cannot fit an empty catalogue");
  prior.validate();
  cfg.validate();
  const double s_last = cat.events().back();
  const UniformPrior tf_box = prior.tf_bounds(s_last);
  if (prior.pinned_tf) {
    if (*prior.pinned_tf <= s_last) {
      throw ValidationError("pinned t_f must exceed the last fitted event");
    }
  } else if (tf_box.lo <= s_last) {
    throw ValidationError("t_f prior must lie beyond the last fitted event");
  }

  const ParamMap map = make_param_map(model, prior, s_last);
  auto target = [&model, &prior, &cat, &map, &tf_box,
                 censor_tail](const std::vector<double>& theta) -> double {
    const ModelParams q = map.to_params(theta);
    const double lp = log_prior(model, q, prior, tf_box);
    if (!std::isfinite(lp)) return -kInf;
    const ModelConfig m{model.family, q.shape};
    const PowerLawRate rate{q.k, q.t_f, q.p};
    const double ll = log_likelihood(m, rate, cat, censor_tail);
    if (!std::isfinite(ll)) return -kInf;
    return lp + ll + map.log_jacobian(theta);
  };

  // Proposal covariance from a Laplace approximation at the MAP point. A
  // failed Hessian (boundary MAP, flat direction) falls back to a small
  // isotropic proposal that burn-in adaptation then reshapes.
  ModelParams start;
  start.k = std::sqrt(prior.k.lo > 0.0 ? prior.k.lo * prior.k.hi
                                       : 0.25 * prior.k.hi);
  if (prior.pinned_tf) {
    start.t_f = *prior.pinned_tf;
  } else {
    start.t_f =
        s_last + std::sqrt((tf_box.lo - s_last) * (tf_box.hi - s_last));
  }
  start.p = map.log_p ? std::exp(prior.p_mu - prior.p_sigma * prior.p_sigma)
                      : 0.5 * (prior.p_box.lo + prior.p_box.hi);
  start.shape = std::sqrt(prior.shape.lo * prior.shape.hi);

  std::vector<double> theta0 = map.to_theta(start);
  if (!std::isfinite(target(theta0))) {
    // Mid-prior point is degenerate on this catalogue; scan prior draws for
    // a finite starting point instead.
    Rng scan = Rng(cfg.seed).stream("map-init");
    bool found = false;
    for (int attempt = 0; attempt < 1000 && !found; ++attempt) {
      ModelParams q;
      q.k = prior.k.lo + scan.uniform01() * prior.k.width();
      q.t_f = prior.pinned_tf
                  ? *prior.pinned_tf
                  : tf_box.lo + scan.uniform01() * tf_box.width();
      q.p = map.log_p ? std::exp(prior.p_mu + prior.p_sigma * scan.normal())
                      : prior.p_box.lo + scan.uniform01() * prior.p_box.width();
      q.shape = prior.shape.lo + scan.uniform01() * prior.shape.width();
      std::vector<double> th = map.to_theta(q);
      if (std::isfinite(target(th))) {
        theta0 = std::move(th);
        found = true;
      }
    }
    if (!found) {
      throw ConvergenceError(
          "no finite-posterior starting point found in 1000 prior draws");
    }
  }

  auto negative_target = [&target](const std::vector<double>& th) {
    return -target(th);
  };
  const std::vector<double> map_point =
      nelder_mead(negative_target, theta0, 0.3, 1e-9, 400 * map.dim);

  SquareMatrix proposal_cov(map.dim);
  bool have_cov = false;
  SquareMatrix hessian(map.dim);
  if (finite_difference_hessian(negative_target, map_point, 1e-4, &hessian)) {
    have_cov = try_invert_spd(hessian, &proposal_cov);
  }
  if (have_cov) {
    for (std::size_t i = 0; i < map.dim && have_cov; ++i) {
      if (!(proposal_cov(i, i) > 0.0) || !std::isfinite(proposal_cov(i, i))) {
        have_cov = false;
      }
    }
  }
  if (!have_cov) {
    proposal_cov = SquareMatrix::identity(map.dim);
    for (std::size_t i = 0; i < map.dim; ++i) proposal_cov(i, i) = 0.01;
  }
  const SquareMatrix jitter_factor = robust_cholesky(proposal_cov);

  McmcOptions opts;
  opts.iterations = cfg.iterations;
  opts.burn_in = cfg.burn_in;
  opts.target_acceptance = cfg.target_acceptance;

  const std::size_t n_params = (model.family == Family::IP) ? 3 : 4;
  std::vector<ChainDraws> chains(cfg.chains);
  std::vector<double> acceptance(cfg.chains, 0.0);
  std::vector<std::vector<double>> scale_traces(cfg.chains);
  std::vector<std::exception_ptr> failures(cfg.chains);

  auto run_one = [&](std::size_t c) {
    try {
      Rng rng = Rng(cfg.seed).stream("chain/" + std::to_string(c));
      // Overdispersed starts around the MAP point: jitter at three times the
      // Laplace scale keeps chains inside the basin a random-walk proposal
      // can traverse while still separating them enough for rhat to mean
      // something. Prior draws are hopeless here; in a box prior spanning
      // orders of magnitude they start so far out that no practical burn-in
      // reaches the bulk.
      std::vector<double> init;
      bool found = false;
      for (int attempt = 0; attempt < 100 && !found; ++attempt) {
        std::vector<double> th = map_point;
        for (std::size_t j = 0; j < map.dim; ++j) {
          const double xi = rng.normal();
          for (std::size_t i = j; i < map.dim; ++i) {
            th[i] += 3.0 * jitter_factor(i, j) * xi;
          }
        }
        if (std::isfinite(target(th))) {
          init = std::move(th);
          found = true;
        }
      }
      if (!found) {
        throw ConvergenceError("chain " + std::to_string(c) +
                               " found no finite-posterior start near the "
                               "MAP point in 100 attempts");
      }
      ChainResult res = run_chain(target, std::move(init), proposal_cov, opts, rng);

      ChainDraws out;
      out.rows = res.rows();
      out.cols = n_params;
      out.data.resize(out.rows * n_params);
      std::vector<double> theta(map.dim);
      for (std::size_t r = 0; r < out.rows; ++r) {
        for (std::size_t j = 0; j < map.dim; ++j) theta[j] = res.at(r, j);
        const ModelParams q = map.to_params(theta);
        out.data[r * n_params + 0] = q.k;
        out.data[r * n_params + 1] = q.t_f;
        out.data[r * n_params + 2] = q.p;
        if (n_params > 3) out.data[r * n_params + 3] = q.shape;
      }
      chains[c] = std::move(out);
      acceptance[c] = res.acceptance_rate;
      scale_traces[c] = std::move(res.scale_trace);
    } catch (...) {
      failures[c] = std::current_exception();
    }
  };

  unsigned n_threads = threads;
  if (n_threads == 0) n_threads = std::thread::hardware_concurrency();
  if (n_threads == 0) n_threads = 1;
  n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(cfg.chains));
  if (n_threads <= 1) {
    for (std::size_t c = 0; c < cfg.chains; ++c) run_one(c);
  } else {
    for (std::size_t first = 0; first < cfg.chains; first += n_threads) {
      std::vector<std::thread> pool;
      const std::size_t last = std::min<std::size_t>(first + n_threads, cfg.chains);
      for (std::size_t c = first; c < last; ++c) {
        pool.emplace_back(run_one, c);
      }
      for (auto& t : pool) t.join();
    }
  }
  for (const auto& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }

  PosteriorRun run;
  run.model = model;
  run.config = cfg;
  run.prior = prior;
  run.tf_bounds_used = prior.pinned_tf
                           ? UniformPrior{*prior.pinned_tf, *prior.pinned_tf}
                           : tf_box;
  run.last_event = s_last;
  run.param_names = {"k", "t_f", "p"};
  if (n_params > 3) run.param_names.push_back("shape");
  run.chains = std::move(chains);
  run.acceptance_rates = std::move(acceptance);
  run.scale_traces = std::move(scale_traces);

  for (std::size_t j = 0; j < n_params; ++j) {
    std::vector<double> all = run.pooled(j);
    ParamSummary s;
    s.name = run.param_names[j];
    const auto [cmin, cmax] = std::minmax_element(all.begin(), all.end());
    if (*cmin == *cmax) {
      // Constant column (pinned t_f): report the constant exactly instead of
      // letting summation noise leak into the mean and sd.
      s.mean = *cmin;
      s.sd = 0.0;
      s.hpdi_lo = s.hpdi_hi = *cmin;
    } else {
      s.mean = mean_of(all);
      s.sd = sample_sd(all, s.mean);
      const auto interval = hpdi(all, 0.95);
      s.hpdi_lo = interval.first;
      s.hpdi_hi = interval.second;
    }
    run.summaries.push_back(s);

    const bool pinned_col = (j == 1 && prior.pinned_tf.has_value());
    if (pinned_col) {
      run.rhat.push_back(1.0);
    } else {
      std::vector<std::vector<double>> per_chain;
      per_chain.reserve(run.chains.size());
      for (const auto& chain : run.chains) per_chain.push_back(column(chain, j));
      run.rhat.push_back(gelman_rubin(per_chain));
    }
  }

  run.correlations.assign(n_params, std::vector<double>(n_params, 0.0));
  std::vector<std::vector<double>> cols;
  std::vector<double> means(n_params), sds(n_params);
  for (std::size_t j = 0; j < n_params; ++j) {
    cols.push_back(run.pooled(j));
    means[j] = run.summaries[j].mean;
    sds[j] = run.summaries[j].sd;
  }
  for (std::size_t i = 0; i < n_params; ++i) {
    run.correlations[i][i] = 1.0;
    for (std::size_t j = 0; j < i; ++j) {
      if (sds[i] == 0.0 || sds[j] == 0.0) continue;
      double cov = 0.0;
      for (std::size_t r = 0; r < cols[i].size(); ++r) {
        cov += (cols[i][r] - means[i]) * (cols[j][r] - means[j]);
      }
      cov /= static_cast<double>(cols[i].size() - 1);
      run.correlations[i][j] = run.correlations[j][i] = cov / (sds[i] * sds[j]);
    }
  }
  return run;
}

double gelman_rubin(const std::vector<std::vector<double>>& chains) {
  const std::size_t m = chains.size();
  if (m < 2) throw ValidationError("Gelman-Rubin needs at least two chains");
  const std::size_t n = chains.front().size();
  if (n < 10) throw ValidationError("Gelman-Rubin needs chains of length >= 10");
  for (const auto& chain : chains) {
    if (chain.size() != n) {
      throw ValidationError("Gelman-Rubin needs equal-length chains");
    }
  }

  std::vector<double> chain_mean(m);
  double grand = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    chain_mean[j] = mean_of(chains[j]);
    grand += chain_mean[j];
  }
  grand /= static_cast<double>(m);

  double w = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    double s2 = 0.0;
    for (double v : chains[j]) s2 += (v - chain_mean[j]) * (v - chain_mean[j]);
    w += s2 / static_cast<double>(n - 1);
  }
  w /= static_cast<double>(m);
  if (!(w > 0.0)) {
    throw NumericError("Gelman-Rubin undefined: zero within-chain variance");
  }

  double b_over_n = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    b_over_n += (chain_mean[j] - grand) * (chain_mean[j] - grand);
  }
  b_over_n /= static_cast<double>(m - 1);

  const double nn = static_cast<double>(n);
  const double v_hat = (nn - 1.0) / nn * w + b_over_n;
  return std::sqrt(v_hat / w);
}

std::pair<double, double> hpdi(std::vector<double> samples, double mass) {
  if (samples.empty()) throw ValidationError("HPDI needs samples");
  if (!(mass > 0.0 && mass <= 1.0)) {
    throw ValidationError("HPDI mass must lie in (0, 1]");
  }
  std::sort(samples.begin(), samples.end());
  const std::size_t n = samples.size();
  // ceil(mass * n) points, guarding against 0.95 * 100 landing a hair above
  // the integer it represents.
  std::size_t m = static_cast<std::size_t>(
      std::ceil(mass * static_cast<double>(n) - 1e-9));
  m = std::min(std::max<std::size_t>(m, 1), n);

  std::size_t best = 0;
  double best_width = kInf;
  for (std::size_t i = 0; i + m <= n; ++i) {
    const double width = samples[i + m - 1] - samples[i];
    if (width < best_width) {
      best_width = width;
      best = i;
    }
  }
  return {samples[best], samples[best + m - 1]};
}

}  // namespace ppffm
