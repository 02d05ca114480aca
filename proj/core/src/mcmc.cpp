#include "ppffm/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ppffm/errors.hpp"

namespace ppffm {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Running mean and scatter matrix for the Haario-style covariance update.
struct RunningCov {
  explicit RunningCov(std::size_t n)
      : count(0), mean(n, 0.0), scatter(n) {}

  void add(const std::vector<double>& x) {
    ++count;
    const std::size_t n = mean.size();
    std::vector<double> delta(n);
    for (std::size_t i = 0; i < n; ++i) {
      delta[i] = x[i] - mean[i];
      mean[i] += delta[i] / static_cast<double>(count);
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        scatter(i, j) += delta[i] * (x[j] - mean[j]);
      }
    }
  }

  SquareMatrix covariance() const {
    const std::size_t n = mean.size();
    SquareMatrix c(n);
    if (count < 2) return SquareMatrix::identity(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        c(i, j) = c(j, i) = scatter(i, j) / static_cast<double>(count - 1);
      }
    }
    return c;
  }

  std::size_t count;
  std::vector<double> mean;
  SquareMatrix scatter;
};

}  // namespace

SquareMatrix SquareMatrix::identity(std::size_t n) {
  SquareMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

bool try_cholesky(const SquareMatrix& a, SquareMatrix* lower) {
  const std::size_t n = a.size();
  SquareMatrix l(n);
  for (std::size_t j = 0; j < n; ++j) {
    double diag = a(j, j);
    for (std::size_t k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
    if (!(diag > 0.0) || !std::isfinite(diag)) return false;
    l(j, j) = std::sqrt(diag);
    for (std::size_t i = j + 1; i < n; ++i) {
      double sum = a(i, j);
      for (std::size_t k = 0; k < j; ++k) sum -= l(i, k) * l(j, k);
      l(i, j) = sum / l(j, j);
    }
  }
  *lower = l;
  return true;
}

SquareMatrix robust_cholesky(SquareMatrix a) {
  const std::size_t n = a.size();
  SquareMatrix l(n);
  if (try_cholesky(a, &l)) return l;
  double trace = 0.0;
  for (std::size_t i = 0; i < n; ++i) trace += std::abs(a(i, i));
  double jitter = (trace > 0.0 ? trace / static_cast<double>(n) : 1.0) * 1e-10;
  for (int attempt = 0; attempt < 12; ++attempt) {
    SquareMatrix b = a;
    for (std::size_t i = 0; i < n; ++i) b(i, i) += jitter;
    if (try_cholesky(b, &l)) return l;
    jitter *= 10.0;
  }
  throw NumericError("covariance matrix is not positive definite");
}

bool try_invert_spd(const SquareMatrix& a, SquareMatrix* inverse) {
  const std::size_t n = a.size();
  SquareMatrix l(n);
  if (!try_cholesky(a, &l)) return false;
  // Solve L L^T X = I column by column.
  SquareMatrix inv(n);
  std::vector<double> y(n);
  for (std::size_t col = 0; col < n; ++col) {
    for (std::size_t i = 0; i < n; ++i) {
      double sum = (i == col) ? 1.0 : 0.0;
      for (std::size_t k = 0; k < i; ++k) sum -= l(i, k) * y[k];
      y[i] = sum / l(i, i);
    }
    for (std::size_t ii = n; ii-- > 0;) {
      double sum = y[ii];
      for (std::size_t k = ii + 1; k < n; ++k) sum -= l(k, ii) * inv(k, col);
      inv(ii, col) = sum / l(ii, ii);
    }
  }
  *inverse = inv;
  return true;
}

std::vector<double> nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                std::vector<double> start, double step,
                                double tol, std::size_t max_evals) {
  const std::size_t n = start.size();
  std::size_t evals = 0;
  auto eval = [&](const std::vector<double>& x) {
    ++evals;
    const double v = f(x);
    return std::isnan(v) ? kInf : v;
  };

  std::vector<std::vector<double>> simplex(n + 1, start);
  std::vector<double> value(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    simplex[i + 1][i] += (start[i] != 0.0) ? step * std::abs(start[i]) : step;
  }
  for (std::size_t i = 0; i <= n; ++i) value[i] = eval(simplex[i]);

  std::vector<std::size_t> order(n + 1);
  while (evals < max_evals) {
    for (std::size_t i = 0; i <= n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return value[a] < value[b]; });
    const std::size_t best = order[0];
    const std::size_t worst = order[n];
    const std::size_t second_worst = order[n - 1];
    if (std::isfinite(value[worst]) &&
        value[worst] - value[best] < tol * (std::abs(value[best]) + tol)) {
      break;
    }

    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j];
    }
    for (std::size_t j = 0; j < n; ++j) centroid[j] /= static_cast<double>(n);

    auto blend = [&](double coef) {
      std::vector<double> x(n);
      for (std::size_t j = 0; j < n; ++j) {
        x[j] = centroid[j] + coef * (simplex[worst][j] - centroid[j]);
      }
      return x;
    };

    std::vector<double> reflected = blend(-1.0);
    const double fr = eval(reflected);
    if (fr < value[best]) {
      std::vector<double> expanded = blend(-2.0);
      const double fe = eval(expanded);
      if (fe < fr) {
        simplex[worst] = std::move(expanded);
        value[worst] = fe;
      } else {
        simplex[worst] = std::move(reflected);
        value[worst] = fr;
      }
    } else if (fr < value[second_worst]) {
      simplex[worst] = std::move(reflected);
      value[worst] = fr;
    } else {
      const bool outside = fr < value[worst];
      std::vector<double> contracted = blend(outside ? -0.5 : 0.5);
      const double fc = eval(contracted);
      if (fc < std::min(fr, value[worst])) {
        simplex[worst] = std::move(contracted);
        value[worst] = fc;
      } else {
        // Shrink toward the best vertex.
        for (std::size_t i = 0; i <= n; ++i) {
          if (i == best) continue;
          for (std::size_t j = 0; j < n; ++j) {
            simplex[i][j] = simplex[best][j] + 0.5 * (simplex[i][j] - simplex[best][j]);
          }
          value[i] = eval(simplex[i]);
        }
      }
    }
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    if (value[i] < value[best]) best = i;
  }
  return simplex[best];
}

bool finite_difference_hessian(const std::function<double(const std::vector<double>&)>& f,
                               const std::vector<double>& x, double h,
                               SquareMatrix* hessian) {
  const std::size_t n = x.size();
  std::vector<double> steps(n);
  for (std::size_t i = 0; i < n; ++i) {
    steps[i] = h * std::max(1.0, std::abs(x[i]));
  }
  const double f0 = f(x);
  if (!std::isfinite(f0)) return false;

  SquareMatrix hess(n);
  std::vector<double> y = x;
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = x[i] + steps[i];
    const double fp = f(y);
    y[i] = x[i] - steps[i];
    const double fm = f(y);
    y[i] = x[i];
    if (!std::isfinite(fp) || !std::isfinite(fm)) return false;
    hess(i, i) = (fp - 2.0 * f0 + fm) / (steps[i] * steps[i]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      y[i] = x[i] + steps[i];
      y[j] = x[j] + steps[j];
      const double fpp = f(y);
      y[j] = x[j] - steps[j];
      const double fpm = f(y);
      y[i] = x[i] - steps[i];
      const double fmm = f(y);
      y[j] = x[j] + steps[j];
      const double fmp = f(y);
      y[i] = x[i];
      y[j] = x[j];
      if (!std::isfinite(fpp) || !std::isfinite(fpm) || !std::isfinite(fmp) ||
          !std::isfinite(fmm)) {
        return false;
      }
      hess(i, j) = hess(j, i) = (fpp - fpm - fmp + fmm) / (4.0 * steps[i] * steps[j]);
    }
  }
  *hessian = hess;
  return true;
}

ChainResult run_chain(const LogDensityFn& log_density, std::vector<double> init,
                      const SquareMatrix& proposal_cov, const McmcOptions& opts,
                      Rng& rng) {
  const std::size_t dim = init.size();
  if (dim == 0) throw ValidationError("empty parameter vector");
  if (opts.burn_in >= opts.iterations) {
    throw ValidationError("burn-in must be shorter than the chain");
  }

  double current_lp = log_density(init);
  if (!std::isfinite(current_lp)) {
    throw ConvergenceError("initial point has non-finite log density");
  }

  SquareMatrix factor = robust_cholesky(proposal_cov);
  double log_scale = std::log(2.38 / std::sqrt(static_cast<double>(dim)));

  ChainResult result;
  result.dim = dim;
  result.draws.reserve((opts.iterations - opts.burn_in) * dim);
  result.scale_trace.reserve(opts.iterations);

  RunningCov running(dim);
  running.add(init);

  std::vector<double> current = std::move(init);
  std::vector<double> proposal(dim), noise(dim);
  std::size_t consecutive_rejects = 0;
  std::size_t kept_accepts = 0;
  // Covariance adaptation starts once the running estimate has some support
  // and refreshes periodically; the global scale moves every iteration.
  const std::size_t cov_warmup = 10 * dim;
  const std::size_t refactor_every = 25;

  for (std::size_t iter = 0; iter < opts.iterations; ++iter) {
    const bool adapting = iter < opts.burn_in;
    const double scale = std::exp(log_scale);

    for (std::size_t i = 0; i < dim; ++i) noise[i] = rng.normal();
    for (std::size_t i = 0; i < dim; ++i) {
      double shift = 0.0;
      for (std::size_t j = 0; j <= i; ++j) shift += factor(i, j) * noise[j];
      proposal[i] = current[i] + scale * shift;
    }

    const double proposal_lp = log_density(proposal);
    double accept_prob = 0.0;
    if (proposal_lp > -kInf) {
      accept_prob = std::min(1.0, std::exp(proposal_lp - current_lp));
    }
    if (rng.uniform01() < accept_prob) {
      current.swap(proposal);
      current_lp = proposal_lp;
      consecutive_rejects = 0;
      if (!adapting) ++kept_accepts;
    } else {
      ++consecutive_rejects;
      if (consecutive_rejects >= opts.stall_limit) {
        throw ConvergenceError(
            "chain stalled: " + std::to_string(opts.stall_limit) +
            " consecutive rejections");
      }
    }

    if (adapting) {
      // Robbins-Monro drift of the global scale toward the target
      // acceptance rate, with a decaying gain.
      const double gain =
          1.0 / std::pow(static_cast<double>(iter + 1), 0.6);
      log_scale += gain * (accept_prob - opts.target_acceptance);
      running.add(current);
      if (running.count > cov_warmup &&
          (iter % refactor_every == refactor_every - 1 ||
           iter + 1 == opts.burn_in)) {
        SquareMatrix cov = running.covariance();
        for (std::size_t i = 0; i < dim; ++i) cov(i, i) += 1e-12;
        factor = robust_cholesky(cov);
      }
    } else {
      result.draws.insert(result.draws.end(), current.begin(), current.end());
    }
    result.scale_trace.push_back(std::exp(log_scale));
  }

  const std::size_t kept = opts.iterations - opts.burn_in;
  result.acceptance_rate =
      static_cast<double>(kept_accepts) / static_cast<double>(kept);
  return result;
}

}  // namespace ppffm
