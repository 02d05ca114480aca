#ifndef PPFFM_MCMC_HPP_
#define PPFFM_MCMC_HPP_

#include <cstddef>
#include <functional>
#include <vector>

#include "ppffm/rng.hpp"

namespace ppffm {

// Generic adaptive random-walk Metropolis machinery. Everything in here is
// target-agnostic; the FFM-specific posterior lives in inference.

using LogDensityFn = std::function<double(const std::vector<double>&)>;

// Small dense square matrix, sized for parameter vectors (dim <= ~10).
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t n) : n_(n), a_(n * n, 0.0) {}
  static SquareMatrix identity(std::size_t n);

  std::size_t size() const { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }

 private:
  std::size_t n_ = 0;
  std::vector<double> a_;
};

// Lower-triangular Cholesky factor; false if the matrix is not positive
// definite (input is read as its lower triangle).
bool try_cholesky(const SquareMatrix& a, SquareMatrix* lower);

// Cholesky with escalating diagonal jitter; throws NumericError if the
// matrix cannot be salvaged.
SquareMatrix robust_cholesky(SquareMatrix a);

// Inverse of a symmetric positive definite matrix via its Cholesky factor;
// false on failure.
bool try_invert_spd(const SquareMatrix& a, SquareMatrix* inverse);

// Nelder-Mead minimization, used to seed the proposal covariance from a
// Laplace approximation. Stops when the simplex collapses below `tol` in
// function value or `max_evals` is exhausted. Returns the best point.
std::vector<double> nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                std::vector<double> start, double step,
                                double tol, std::size_t max_evals);

// Central-difference Hessian of f at x with per-coordinate relative step h.
// Returns false if any stencil evaluation is non-finite.
bool finite_difference_hessian(const std::function<double(const std::vector<double>&)>& f,
                               const std::vector<double>& x, double h,
                               SquareMatrix* hessian);

struct McmcOptions {
  std::size_t iterations = 20000;
  std::size_t burn_in = 1000;
  double target_acceptance = 0.3;
  // Give up after this many consecutive rejections; a healthy chain at the
  // target rate rejects ~30 in a row with probability ~1e-5.
  std::size_t stall_limit = 5000;
};

struct ChainResult {
  std::size_t dim = 0;
  // Post-burn-in draws, row-major: (iterations - burn_in) rows of dim.
  std::vector<double> draws;
  double acceptance_rate = 0.0;  // post burn-in
  // Global proposal scale at every iteration; constant after burn-in by
  // construction, which tests assert.
  std::vector<double> scale_trace;

  std::size_t rows() const { return dim == 0 ? 0 : draws.size() / dim; }
  double at(std::size_t row, std::size_t col) const {
    return draws[row * dim + col];
  }
};

// Adaptive random-walk Metropolis from `init` (which must have finite log
// density). Proposal is N(0, (s*L)(s*L)^T) where L starts as the Cholesky
// factor of `proposal_cov` and, together with the global scale s, adapts
// during burn-in only: s by Robbins-Monro toward the target acceptance, L
// from the running draw covariance. Throws ConvergenceError on a stalled
// chain or non-finite initial density.
ChainResult run_chain(const LogDensityFn& log_density, std::vector<double> init,
                      const SquareMatrix& proposal_cov, const McmcOptions& opts,
                      Rng& rng);

}  // namespace ppffm

#endif  // PPFFM_MCMC_HPP_
