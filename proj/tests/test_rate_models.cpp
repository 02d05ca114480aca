#include "ppffm/rate_models.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/inverse_gaussian.hpp>
#include <boost/math/distributions/weibull.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "doctest.h"
#include "ppffm/errors.hpp"
#include "ppffm/rng.hpp"
#include "support/oracles.hpp"

using namespace ppffm;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Random parameter sets covering the regimes the closed forms switch
// between, including exponents within 1e-4 of the logarithmic branch.
struct RandomCase {
  PowerLawRate rate;
  double s_m = 0.0;
  double s = 0.0;
};

RandomCase random_case(Rng& rng, bool near_one) {
  RandomCase c;
  c.rate.k = 0.5 + 499.5 * rng.uniform01();
  c.rate.t_f = 0.5 + 2.5 * rng.uniform01();
  c.rate.p = near_one ? 1.0 + 2e-4 * (rng.uniform01() - 0.5)
                      : 0.2 + 2.8 * rng.uniform01();
  const double a = c.rate.t_f * rng.uniform01() * 0.9;
  const double b = a + (c.rate.t_f - a) * (0.05 + 0.9 * rng.uniform01());
  c.s_m = a;
  c.s = std::min(b, c.rate.t_f * (1.0 - 1e-9));
  return c;
}

// Smallest s with ln S(s | s_m) below the cutoff, by bisection; brackets
// the point where essentially all ISI mass has been spent.
double survival_horizon(const ModelConfig& model, const PowerLawRate& rate,
                        double s_m, double log_s_cut) {
  double lo = s_m;
  double hi = rate.t_f - 1e-12 * rate.t_f;
  if (isi_log_survival(model, rate, {s_m, hi}) > log_s_cut) return hi;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (isi_log_survival(model, rate, {s_m, mid}) > log_s_cut) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

}  // namespace

TEST_SUITE_BEGIN("rate_models");

TEST_CASE("intensity follows the inverse power law") {
  const PowerLawRate rate{1.0, 2.0, 2.0};
  CHECK(intensity(rate, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(intensity(rate, 1.9) == doctest::Approx(100.0).epsilon(1e-12));
  CHECK_THROWS_AS(intensity(rate, 2.0), std::domain_error);
  CHECK_THROWS_AS(intensity(rate, 2.5), std::domain_error);
}

TEST_CASE("integrated intensity closed form hits the textbook values") {
  CHECK(integrated_intensity({1.0, 2.0, 2.0}, 0.5, 0.5) == 0.0);
  CHECK(integrated_intensity({1.0, 2.0, 2.0}, 0.0, 1.0) ==
        doctest::Approx(0.5).epsilon(1e-14));
  CHECK(integrated_intensity({1.0, 2.0, 1.0}, 0.0, 1.0) ==
        doctest::Approx(0.6931471805599453).epsilon(1e-14));
}

TEST_CASE("integrated intensity matches adaptive quadrature") {
  Rng rng(101);
  for (int i = 0; i < 300; ++i) {
    const RandomCase c = random_case(rng, i % 3 == 0);
    const double closed = integrated_intensity(c.rate, c.s_m, c.s);
    const double quad = oracles::integrate(
        [&](double t) { return intensity(c.rate, t); }, c.s_m, c.s, 1e-12);
    CAPTURE(c.rate.k);
    CAPTURE(c.rate.t_f);
    CAPTURE(c.rate.p);
    CAPTURE(c.s_m);
    CAPTURE(c.s);
    CHECK(std::abs(closed - quad) <= 1e-8 * std::abs(quad));
  }
}

TEST_CASE("integrated intensity is additive over adjacent intervals") {
  Rng rng(102);
  for (int i = 0; i < 300; ++i) {
    const RandomCase c = random_case(rng, i % 4 == 0);
    const double mid = c.s_m + (c.s - c.s_m) * rng.uniform01();
    const double whole = integrated_intensity(c.rate, c.s_m, c.s);
    const double split = integrated_intensity(c.rate, c.s_m, mid) +
                         integrated_intensity(c.rate, mid, c.s);
    CHECK(std::abs(whole - split) <= 1e-10 * whole);
  }
}

TEST_CASE("integrated intensity is continuous through p = 1") {
  const PowerLawRate below{3.0, 2.0, 1.0 - 1e-13};
  const PowerLawRate at{3.0, 2.0, 1.0};
  const PowerLawRate above{3.0, 2.0, 1.0 + 1e-13};
  const double v = integrated_intensity(at, 0.2, 1.7);
  CHECK(integrated_intensity(below, 0.2, 1.7) == doctest::Approx(v).epsilon(1e-11));
  CHECK(integrated_intensity(above, 0.2, 1.7) == doctest::Approx(v).epsilon(1e-11));
}

TEST_CASE("ISI log densities reproduce the worked examples") {
  const PowerLawRate rate{1.0, 2.0, 2.0};
  const IntervalContext ctx{0.0, 1.0};  // Lambda = 0.5, lambda(1) = 1

  CHECK(log_isi_density({Family::IP, 1.0}, rate, ctx) ==
        doctest::Approx(-0.5).epsilon(1e-13));
  CHECK(log_isi_density({Family::IG, 2.0}, rate, ctx) ==
        doctest::Approx(-0.30685281944005469).epsilon(1e-13));
  // For IIG with Lambda equal to psi the exponential factor drops out and
  // f = lambda * (2 pi psi^3)^(-1/2); here Lambda = 0.5.
  CHECK(log_isi_density({Family::IIG, 0.5}, rate, ctx) ==
        doctest::Approx(-0.5 * std::log(2.0 * 3.14159265358979323846 * 0.125))
            .epsilon(1e-13));
}

TEST_CASE("IG at alpha 1 and IW at phi 1 collapse to the Poisson family") {
  Rng rng(103);
  for (int i = 0; i < 200; ++i) {
    const RandomCase c = random_case(rng, i % 5 == 0);
    const IntervalContext ctx{c.s_m, c.s};
    const double ip = log_isi_density({Family::IP, 1.0}, c.rate, ctx);
    const double ig = log_isi_density({Family::IG, 1.0}, c.rate, ctx);
    const double iw = log_isi_density({Family::IW, 1.0}, c.rate, ctx);
    CHECK(std::abs(ig - ip) <= 1e-10 * std::max(1.0, std::abs(ip)));
    CHECK(std::abs(iw - ip) <= 1e-10 * std::max(1.0, std::abs(ip)));

    const double sp = isi_log_survival({Family::IP, 1.0}, c.rate, ctx);
    CHECK(std::abs(isi_log_survival({Family::IG, 1.0}, c.rate, ctx) - sp) <=
          1e-10 * std::max(1.0, std::abs(sp)));
    CHECK(std::abs(isi_log_survival({Family::IW, 1.0}, c.rate, ctx) - sp) <=
          1e-10 * std::max(1.0, std::abs(sp)));
  }
}

TEST_CASE("ISI density integrates to one against the survival tail") {
  // quad of f over (s_m, H] plus S(H) should give unit mass; H is chosen
  // where the survival is ~1e-9, so the 1e-6 tolerance probes the density
  // and survival implementations against each other.
  const std::vector<ModelConfig> models = {
      {Family::IP, 1.0}, {Family::IG, 2.256}, {Family::IG, 0.4},
      {Family::IW, 0.7}, {Family::IW, 2.5},   {Family::IIG, 0.8},
      {Family::IIG, 3.0}};
  const std::vector<PowerLawRate> rates = {
      {295.382, 1.321, 1.286}, {5.0, 2.0, 2.0}, {20.0, 1.5, 1.05}};
  for (const auto& model : models) {
    for (const auto& rate : rates) {
      const double s_m = 0.3 * rate.t_f;
      const double hi = survival_horizon(model, rate, s_m, std::log(1e-9));
      const double mass = oracles::integrate(
          [&](double s) { return std::exp(log_isi_density(model, rate, {s_m, s})); },
          s_m, hi, 1e-10);
      const double tail = std::exp(isi_log_survival(model, rate, {s_m, hi}));
      CAPTURE(family_name(model.family));
      CAPTURE(model.shape);
      CAPTURE(rate.p);
      CHECK(mass + tail == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
}

TEST_CASE("unit ISI density matches the Boost reference densities") {
  for (double z : {0.05, 0.3, 1.0, 2.0, 6.0}) {
    CAPTURE(z);
    CHECK(unit_isi_log_density({Family::IP, 1.0}, z) ==
          doctest::Approx(-z).epsilon(1e-13));
    CHECK(unit_isi_log_density({Family::IG, 2.256}, z) ==
          doctest::Approx(std::log(boost::math::pdf(
                              boost::math::gamma_distribution<double>(2.256, 1.0), z)))
              .epsilon(1e-12));
    CHECK(unit_isi_log_density({Family::IW, 1.7}, z) ==
          doctest::Approx(std::log(boost::math::pdf(
                              boost::math::weibull_distribution<double>(1.7, 1.0), z)))
              .epsilon(1e-12));
    CHECK(unit_isi_log_density({Family::IIG, 0.9}, z) ==
          doctest::Approx(std::log(boost::math::pdf(
                              boost::math::inverse_gaussian_distribution<double>(0.9, 1.0), z)))
              .epsilon(1e-12));
  }
}

TEST_CASE("log likelihood sums the interval densities") {
  const PowerLawRate rate{1.0, 2.0, 2.0};
  const ModelConfig ip{Family::IP, 1.0};

  const EventCatalogue one({1.0}, 0.0, 1.0);
  CHECK(log_likelihood(ip, rate, one) == doctest::Approx(-0.5).epsilon(1e-13));

  const EventCatalogue three({0.4, 0.9, 1.3}, 0.0, 1.5);
  const ModelConfig ig{Family::IG, 2.256};
  double expect = log_isi_density(ig, rate, {0.0, 0.4}) +
                  log_isi_density(ig, rate, {0.4, 0.9}) +
                  log_isi_density(ig, rate, {0.9, 1.3});
  CHECK(log_likelihood(ig, rate, three) == doctest::Approx(expect).epsilon(1e-13));

  // The censored variant adds the survival of the open tail interval.
  expect += isi_log_survival(ig, rate, {1.3, 1.5});
  CHECK(log_likelihood(ig, rate, three, true) ==
        doctest::Approx(expect).epsilon(1e-13));

  // An event at the window start contributes no interval.
  const EventCatalogue anchored({0.0, 0.4}, 0.0, 0.5);
  CHECK(log_likelihood(ip, rate, anchored) ==
        doctest::Approx(log_isi_density(ip, rate, {0.0, 0.4})).epsilon(1e-13));
}

TEST_CASE("log likelihood returns -infinity outside the domain") {
  const ModelConfig ig{Family::IG, 2.0};
  const EventCatalogue cat({0.4, 0.9}, 0.0, 1.0);
  CHECK(log_likelihood(ig, {1.0, 0.9, 2.0}, cat) == -kInf);   // t_f inside data
  CHECK(log_likelihood(ig, {1.0, 0.9 + 1e-12, 2.0}, cat) != -kInf);
  CHECK(log_likelihood(ig, {-1.0, 2.0, 2.0}, cat) == -kInf);  // k <= 0
  CHECK(log_likelihood(ig, {1.0, 2.0, -0.5}, cat) == -kInf);  // p <= 0
  CHECK(log_likelihood({Family::IG, -2.0}, {1.0, 2.0, 2.0}, cat) == -kInf);
  // Censoring needs the whole window before t_f, not just the events.
  CHECK(log_likelihood(ig, {1.0, 1.0 - 1e-9, 2.0}, cat, false) != -kInf);
  CHECK(log_likelihood(ig, {1.0, 1.0 - 1e-9, 2.0}, cat, true) == -kInf);
  CHECK(log_likelihood(ig, {1.0, 2.5, 2.0}, EventCatalogue({0.4}, 0.0, 2.5), true) ==
        -kInf);
  CHECK_THROWS_AS(log_likelihood(ig, {1.0, 2.0, 2.0}, EventCatalogue({}, 0.0, 1.0)),
                  ValidationError);
}

TEST_CASE("survival is one at the interval start and decays monotonically") {
  const PowerLawRate rate{5.0, 2.0, 1.3};
  for (const ModelConfig model : {ModelConfig{Family::IP, 1.0},
                                  ModelConfig{Family::IG, 2.256},
                                  ModelConfig{Family::IW, 0.8},
                                  ModelConfig{Family::IIG, 1.5}}) {
    CAPTURE(family_name(model.family));
    CHECK(isi_survival(model, rate, {0.5, 0.5}) == 1.0);
    double prev = 1.0;
    for (int i = 1; i <= 200; ++i) {
      const double s = 0.5 + (1.999 - 0.5) * i / 200.0;
      const double cur = isi_survival(model, rate, {0.5, s});
      CHECK(cur <= prev);
      CHECK(cur > 0.0);
      CHECK(cur <= 1.0);
      prev = cur;
    }
  }
}

TEST_CASE("survival matches its log form and the worked value") {
  const PowerLawRate rate{1.0, 2.0, 2.0};
  const IntervalContext ctx{0.0, 1.0};  // Lambda = 0.5
  CHECK(isi_survival({Family::IP, 1.0}, rate, ctx) ==
        doctest::Approx(0.60653065971263342).epsilon(1e-13));
  Rng rng(104);
  for (int i = 0; i < 100; ++i) {
    const RandomCase c = random_case(rng, false);
    for (const ModelConfig model : {ModelConfig{Family::IG, 1.7},
                                    ModelConfig{Family::IW, 1.2},
                                    ModelConfig{Family::IIG, 0.6}}) {
      const IntervalContext cc{c.s_m, c.s};
      const double s_lin = isi_survival(model, c.rate, cc);
      const double s_log = isi_log_survival(model, c.rate, cc);
      if (s_lin > 1e-290) {
        CHECK(std::log(s_lin) == doctest::Approx(s_log).epsilon(1e-9));
      }
      const double lam = integrated_intensity(c.rate, c.s_m, c.s);
      CHECK(isi_log_survival_at(model, lam) == doctest::Approx(s_log).epsilon(1e-12));
    }
  }
}

TEST_CASE("survival clamps underflow and reports it") {
  // Push Lambda so far out that S underflows a double.
  const PowerLawRate rate{5000.0, 2.0, 2.0};
  bool underflow = false;
  const double s = isi_survival({Family::IP, 1.0}, rate, {0.0, 1.999999}, &underflow);
  CHECK(underflow);
  CHECK(s > 0.0);
  CHECK(s <= std::numeric_limits<double>::min() * 2);
  // The log form keeps full accuracy there.
  const double ls = isi_log_survival({Family::IP, 1.0}, rate, {0.0, 1.999999});
  const double lam = integrated_intensity(rate, 0.0, 1.999999);
  CHECK(ls == doctest::Approx(-lam).epsilon(1e-12));
}

TEST_CASE("hazard equals the negative slope of the log survival") {
  const PowerLawRate rate{8.0, 1.5, 1.286};
  const double h = 1e-6;
  for (const ModelConfig model : {ModelConfig{Family::IP, 1.0},
                                  ModelConfig{Family::IG, 2.256},
                                  ModelConfig{Family::IW, 1.4},
                                  ModelConfig{Family::IIG, 0.9}}) {
    for (double s : {0.4, 0.8, 1.2}) {
      const double slope =
          (isi_log_survival(model, rate, {0.2, s + h}) -
           isi_log_survival(model, rate, {0.2, s - h})) /
          (2.0 * h);
      const double hazard = std::exp(log_isi_density(model, rate, {0.2, s}) -
                                     isi_log_survival(model, rate, {0.2, s}));
      CAPTURE(family_name(model.family));
      CAPTURE(s);
      CHECK(std::abs(-slope - hazard) <= 1e-5 * hazard);
    }
  }
}

TEST_CASE("periodicity is the mean over sd of the unit ISI law") {
  CHECK(periodicity({Family::IP, 1.0}) == 1.0);
  CHECK(periodicity({Family::IG, 4.0}) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(periodicity({Family::IG, 1.0}) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(periodicity({Family::IIG, 0.25}) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(periodicity({Family::IW, 1.0}) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(periodicity({Family::IW, 2.0}) ==
        doctest::Approx(1.9130583802711008).epsilon(1e-12));
  for (double phi : {0.6, 3.5}) {
    const double m = boost::math::tgamma(1.0 + 1.0 / phi);
    const double v = boost::math::tgamma(1.0 + 2.0 / phi) - m * m;
    CHECK(periodicity({Family::IW, phi}) ==
          doctest::Approx(m / std::sqrt(v)).epsilon(1e-10));
  }
}

TEST_CASE("rescale factor follows the family") {
  CHECK(ModelConfig{Family::IP, 1.0}.rescale_factor() == 1.0);
  CHECK(ModelConfig{Family::IG, 2.256}.rescale_factor() == 2.256);
  CHECK(ModelConfig{Family::IW, 0.7}.rescale_factor() == 0.7);
  CHECK(ModelConfig{Family::IIG, 4.0}.rescale_factor() == 1.0);
  CHECK_THROWS_AS((ModelConfig{Family::IG, 0.0}.validate()), ValidationError);
  CHECK_THROWS_AS((ModelConfig{Family::IW, -1.0}.validate()), ValidationError);
}

TEST_CASE("family names round-trip and parse case-insensitively") {
  for (Family f : {Family::IP, Family::IG, Family::IW, Family::IIG}) {
    CHECK(family_from_name(family_name(f)) == f);
  }
  CHECK(family_from_name("ig") == Family::IG);
  CHECK(family_from_name("Iig") == Family::IIG);
  CHECK_THROWS_WITH_AS(family_from_name("gamma"),
                       "unknown model family 'gamma' (expected IP, IG, IW, or IIG)",
                       ValidationError);
}

TEST_SUITE_END();
