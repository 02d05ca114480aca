#include "ppffm/mcmc.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "ppffm/errors.hpp"
#include "ppffm/rng.hpp"
#include "support/oracles.hpp"

using namespace ppffm;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> chain_column(const ChainResult& res, std::size_t col) {
  std::vector<double> out(res.rows());
  for (std::size_t r = 0; r < res.rows(); ++r) out[r] = res.at(r, col);
  return out;
}

}  // namespace

TEST_SUITE_BEGIN("mcmc");

TEST_CASE("cholesky factors and rejects matrices correctly") {
  SquareMatrix a(2);
  a(0, 0) = 4.0;
  a(0, 1) = a(1, 0) = 2.0;
  a(1, 1) = 3.0;
  SquareMatrix l;
  REQUIRE(try_cholesky(a, &l));
  CHECK(l(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(l(1, 0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(l(1, 1) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(l(0, 1) == 0.0);

  SquareMatrix indef(2);
  indef(0, 0) = 1.0;
  indef(0, 1) = indef(1, 0) = 5.0;
  indef(1, 1) = 1.0;
  CHECK_FALSE(try_cholesky(indef, &l));

  // robust_cholesky jitters a semidefinite matrix into factorability.
  SquareMatrix semi(2);
  semi(0, 0) = 1.0;
  CHECK_NOTHROW(robust_cholesky(semi));

  SquareMatrix nan(2);
  nan(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(robust_cholesky(nan), NumericError);
}

TEST_CASE("SPD inverse via cholesky") {
  SquareMatrix a(2);
  a(0, 0) = 4.0;
  a(0, 1) = a(1, 0) = 2.0;
  a(1, 1) = 3.0;
  SquareMatrix inv;
  REQUIRE(try_invert_spd(a, &inv));
  CHECK(inv(0, 0) == doctest::Approx(0.375).epsilon(1e-13));
  CHECK(inv(0, 1) == doctest::Approx(-0.25).epsilon(1e-13));
  CHECK(inv(1, 0) == doctest::Approx(-0.25).epsilon(1e-13));
  CHECK(inv(1, 1) == doctest::Approx(0.5).epsilon(1e-13));

  SquareMatrix indef(2);
  indef(0, 0) = 1.0;
  indef(0, 1) = indef(1, 0) = 5.0;
  indef(1, 1) = 1.0;
  CHECK_FALSE(try_invert_spd(indef, &inv));
}

TEST_CASE("nelder_mead minimizes smooth functions") {
  auto quadratic = [](const std::vector<double>& x) {
    return (x[0] - 3.0) * (x[0] - 3.0) + (x[1] + 1.0) * (x[1] + 1.0);
  };
  const auto q = nelder_mead(quadratic, {0.0, 0.0}, 0.5, 1e-12, 2000);
  CHECK(q[0] == doctest::Approx(3.0).epsilon(1e-4));
  CHECK(q[1] == doctest::Approx(-1.0).epsilon(1e-4));

  auto rosenbrock = [](const std::vector<double>& x) {
    const double a = 1.0 - x[0];
    const double b = x[1] - x[0] * x[0];
    return a * a + 100.0 * b * b;
  };
  const auto r = nelder_mead(rosenbrock, {-1.2, 1.0}, 0.5, 1e-14, 5000);
  CHECK(r[0] == doctest::Approx(1.0).epsilon(1e-2));
  CHECK(r[1] == doctest::Approx(1.0).epsilon(1e-2));
}

TEST_CASE("finite difference hessian of a quadratic is exact") {
  auto f = [](const std::vector<double>& x) {
    return x[0] * x[0] + 3.0 * x[1] * x[1] + x[0] * x[1];
  };
  SquareMatrix h;
  REQUIRE(finite_difference_hessian(f, {0.7, -0.3}, 1e-4, &h));
  CHECK(h(0, 0) == doctest::Approx(2.0).epsilon(1e-5));
  CHECK(h(1, 1) == doctest::Approx(6.0).epsilon(1e-5));
  CHECK(h(0, 1) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(h(1, 0) == doctest::Approx(1.0).epsilon(1e-4));

  auto partial = [](const std::vector<double>& x) { return std::sqrt(x[0]); };
  CHECK_FALSE(finite_difference_hessian(partial, {1e-9}, 0.5, &h));
}

TEST_CASE("run_chain samples a 1-D Gaussian at the target acceptance") {
  auto target = [](const std::vector<double>& x) { return -0.5 * x[0] * x[0]; };
  McmcOptions opts;
  opts.iterations = 40000;
  opts.burn_in = 4000;
  Rng rng(401);
  const ChainResult res =
      run_chain(target, {2.5}, SquareMatrix::identity(1), opts, rng);

  REQUIRE(res.dim == 1);
  REQUIRE(res.rows() == opts.iterations - opts.burn_in);
  const auto x = chain_column(res, 0);
  CHECK(std::abs(oracles::mean(x)) < 0.1);
  CHECK(std::abs(oracles::variance(x) - 1.0) < 0.1);
  CHECK(res.acceptance_rate > 0.15);
  CHECK(res.acceptance_rate < 0.45);

  // Scale adapts during burn-in, then freezes.
  REQUIRE(res.scale_trace.size() == opts.iterations);
  const double frozen = res.scale_trace[opts.burn_in];
  for (std::size_t i = opts.burn_in; i < res.scale_trace.size(); ++i) {
    REQUIRE(res.scale_trace[i] == frozen);
  }
  CHECK(res.scale_trace[10] != res.scale_trace[0]);
}

TEST_CASE("run_chain recovers a correlated 2-D Gaussian") {
  // Target: mean (1, -2), covariance [[1, 0.8], [0.8, 2]].
  const double det = 1.0 * 2.0 - 0.8 * 0.8;
  auto target = [det](const std::vector<double>& x) {
    const double dx = x[0] - 1.0;
    const double dy = x[1] + 2.0;
    return -0.5 * (2.0 * dx * dx - 2.0 * 0.8 * dx * dy + 1.0 * dy * dy) / det;
  };
  McmcOptions opts;
  opts.iterations = 60000;
  opts.burn_in = 6000;
  Rng rng(402);
  const ChainResult res =
      run_chain(target, {0.0, 0.0}, SquareMatrix::identity(2), opts, rng);

  const auto x = chain_column(res, 0);
  const auto y = chain_column(res, 1);
  CHECK(std::abs(oracles::mean(x) - 1.0) < 0.1);
  CHECK(std::abs(oracles::mean(y) + 2.0) < 0.15);
  CHECK(std::abs(oracles::variance(x) - 1.0) < 0.15);
  CHECK(std::abs(oracles::variance(y) - 2.0) < 0.3);
  const double corr = oracles::correlation(x, y);
  CHECK(std::abs(corr - 0.8 / std::sqrt(2.0)) < 0.05);
}

TEST_CASE("a stalled chain raises ConvergenceError") {
  // Finite only within an invisible ball around the start, so every
  // proposal is rejected.
  auto target = [](const std::vector<double>& x) {
    return std::abs(x[0]) < 1e-280 ? 0.0 : -kInf;
  };
  McmcOptions opts;
  opts.iterations = 20000;
  opts.burn_in = 1000;
  opts.stall_limit = 2000;
  Rng rng(403);
  CHECK_THROWS_AS(run_chain(target, {0.0}, SquareMatrix::identity(1), opts, rng),
                  ConvergenceError);
}

TEST_CASE("a non-finite start is rejected outright") {
  auto target = [](const std::vector<double>&) { return -kInf; };
  McmcOptions opts;
  Rng rng(404);
  CHECK_THROWS_AS(run_chain(target, {0.0}, SquareMatrix::identity(1), opts, rng),
                  ConvergenceError);
}

TEST_SUITE_END();
