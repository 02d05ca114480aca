#ifndef PPFFM_INFERENCE_HPP_
#define PPFFM_INFERENCE_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ppffm/catalogue.hpp"
#include "ppffm/rate_models.hpp"

namespace ppffm {

// A point in parameter space. shape is 1 for the IP family (its implicit
// alpha) and the family's alpha/phi/psi otherwise.
struct ModelParams {
  double k = 1.0;
  double t_f = 1.0;
  double p = 1.0;
  double shape = 1.0;
};

struct UniformPrior {
  double lo = 0.0;
  double hi = 1.0;

  bool contains(double x) const { return x >= lo && x <= hi; }
  double log_density(double x) const;
  double width() const { return hi - lo; }
};

enum class PPriorKind { LogNormal, Uniform };

// Priors for (k, t_f, p, shape). The t_f box is expressed as an offset from
// the last fitted event unless tf_is_absolute is set; resolve the actual
// bounds with tf_bounds(s_last). pinned_tf replaces sampling of t_f
// entirely (used by cutoff experiments with a known eruption time).
struct PriorSpec {
  UniformPrior k{1.0, 5000.0};
  UniformPrior tf{1e-4, 2.0};
  bool tf_is_absolute = false;
  PPriorKind p_kind = PPriorKind::LogNormal;
  double p_mu = 0.1;     // lognormal log-mean
  double p_sigma = 0.25;  // lognormal log-sd
  UniformPrior p_box{0.5, 2.0};
  UniformPrior shape{1e-2, 1e3};
  std::optional<double> pinned_tf;

  UniformPrior tf_bounds(double s_last) const;
  double log_density_p(double p) const;
  void validate() const;  // throws ValidationError
};

struct SamplerConfig {
  std::size_t iterations = 20000;
  std::size_t burn_in = 1000;
  std::size_t chains = 4;
  std::uint64_t seed = 1;
  double target_acceptance = 0.3;

  void validate() const;  // throws ValidationError
};

struct ChainDraws {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // row-major

  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

struct ParamSummary {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  double hpdi_lo = 0.0;
  double hpdi_hi = 0.0;
};

struct PosteriorRun {
  ModelConfig model;
  SamplerConfig config;
  PriorSpec prior;
  UniformPrior tf_bounds_used;  // absolute bounds after resolution
  double last_event = 0.0;      // s_last of the fitted catalogue

  std::vector<std::string> param_names;  // k, t_f, p and shape unless IP
  std::vector<ChainDraws> chains;        // post-burn-in constrained draws
  std::vector<double> acceptance_rates;  // per chain
  // Per-chain proposal-scale traces over all iterations; constant after
  // burn-in, which the adaptation-freeze test asserts.
  std::vector<std::vector<double>> scale_traces;

  std::vector<ParamSummary> summaries;            // aligned with param_names
  std::vector<double> rhat;                       // aligned with param_names
  std::vector<std::vector<double>> correlations;  // param x param

  std::vector<double> pooled(std::size_t param) const;
  const ParamSummary& summary(const std::string& name) const;
  std::size_t param_index(const std::string& name) const;  // throws if absent
  ModelParams draw(std::size_t chain, std::size_t row) const;
  std::size_t total_draws() const;
  double rhat_max() const;
};

// Log posterior density (likelihood plus proper log prior densities) at a
// constrained-space point; -infinity outside the prior support. This is the
// density in (k, t_f, p, shape) space; the sampler applies its own change
// of variables internally.
double log_posterior(const ModelConfig& model, const ModelParams& params,
                     const PriorSpec& prior, const EventCatalogue& cat,
                     bool censor_tail = false);

// Adaptive-Metropolis posterior sampling. Chains run in parallel (threads =
// 0 picks hardware concurrency) on unconstrained coordinates with Jacobian
// corrections, each seeded from its own named stream of cfg.seed and started
// at an independent prior draw with finite posterior. The proposal
// covariance is seeded from a Laplace approximation at the MAP point.
// Throws ConvergenceError when a chain cannot initialize or stalls.
PosteriorRun run_mcmc(const ModelConfig& model, const PriorSpec& prior,
                      const EventCatalogue& cat, const SamplerConfig& cfg,
                      unsigned threads = 0, bool censor_tail = false);

// Potential scale reduction factor across >= 2 equal-length chains; throws
// NumericError when the within-chain variance is zero.
double gelman_rubin(const std::vector<std::vector<double>>& chains);

// Narrowest contiguous interval of sorted samples holding ceil(mass * n)
// points; ties resolved toward the earliest start.
std::pair<double, double> hpdi(std::vector<double> samples, double mass);

}  // namespace ppffm

#endif  // PPFFM_INFERENCE_HPP_
