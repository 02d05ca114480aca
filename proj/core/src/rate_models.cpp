#include "ppffm/rate_models.hpp"

#include <cctype>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ppffm/errors.hpp"
#include "ppffm/special_functions.hpp"

namespace ppffm {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Below this distance from p = 1 the generic closed form is a 0/0 limit and
// the logarithmic branch takes over. The expm1 formulation is accurate right
// up to the switch, so the threshold only needs to catch the singularity.
constexpr double kLogBranchEps = 1e-12;

bool rate_ok(const PowerLawRate& rate) {
  return std::isfinite(rate.k) && rate.k > 0.0 && std::isfinite(rate.p) &&
         rate.p > 0.0 && std::isfinite(rate.t_f);
}

double log_intensity(const PowerLawRate& rate, double t) {
  return std::log(rate.k) - rate.p * std::log(rate.t_f - t);
}

// ln f for one interval given the already computed Lambda and ln lambda(s).
// Shape == 1 products are guarded so the IG/IW reductions to IP hold without
// producing 0 * log(0) at zero-length intervals.
double log_density_from_parts(const ModelConfig& model, double lambda_log,
                              double big_lambda) {
  switch (model.family) {
    case Family::IP:
      return lambda_log - big_lambda;
    case Family::IG: {
      const double a = model.shape;
      const double power = (a == 1.0) ? 0.0 : (a - 1.0) * std::log(a * big_lambda);
      return std::log(a) + lambda_log - log_gamma(a) + power - a * big_lambda;
    }
    case Family::IW: {
      const double phi = model.shape;
      const double power =
          (phi == 1.0) ? 0.0 : (phi - 1.0) * std::log(phi * big_lambda);
      return 2.0 * std::log(phi) + lambda_log + power -
             std::pow(phi * big_lambda, phi);
    }
    case Family::IIG: {
      const double psi = model.shape;
      const double dev = big_lambda - psi;
      return lambda_log - 0.5 * std::log(2.0 * kPi * big_lambda) -
             std::log(big_lambda) - dev * dev / (2.0 * psi * psi * big_lambda);
    }
  }
  return -kInf;
}

double log_survival_from_lambda(const ModelConfig& model, double big_lambda) {
  switch (model.family) {
    case Family::IP:
      return -big_lambda;
    case Family::IG:
      return log_gamma_q(model.shape, model.shape * big_lambda);
    case Family::IW:
      return -std::pow(model.shape * big_lambda, model.shape);
    case Family::IIG:
      return inverse_gaussian_log_survival(big_lambda, model.shape);
  }
  return -kInf;
}

}  // namespace

const char* family_name(Family f) {
  switch (f) {
    case Family::IP:
      return "IP";
    case Family::IG:
      return "IG";
    case Family::IW:
      return "IW";
    case Family::IIG:
      return "IIG";
  }
  return "?";
}

Family family_from_name(const std::string& name) {
  std::string upper;
  upper.reserve(name.size());
  for (char c : name)
    upper += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (upper == "IP") return Family::IP;
  if (upper == "IG") return Family::IG;
  if (upper == "IW") return Family::IW;
  if (upper == "IIG") return Family::IIG;
  throw ValidationError("unknown model family '" + name +
                        "' (expected IP, IG, IW, or IIG)");
}

double ModelConfig::rescale_factor() const {
  switch (family) {
    case Family::IP:
    case Family::IIG:
      return 1.0;
    case Family::IG:
    case Family::IW:
      return shape;
  }
  return 1.0;
}

void ModelConfig::validate() const {
  if (family != Family::IP && !(std::isfinite(shape) && shape > 0.0)) {
    throw ValidationError(std::string("shape parameter for ") +
                          family_name(family) + " must be positive");
  }
}

double intensity(const PowerLawRate& rate, double t) {
  if (t >= rate.t_f) {
    throw std::domain_error("intensity undefined at or after failure time");
  }
  return rate.k * std::pow(rate.t_f - t, -rate.p);
}

double integrated_intensity(const PowerLawRate& rate, double s_m, double s) {
  if (s >= rate.t_f) {
    throw std::domain_error(
        "integrated intensity undefined at or after failure time");
  }
  if (s < s_m) {
    throw std::domain_error("integration interval is reversed");
  }
  const double a = rate.t_f - s_m;  // time to failure at interval start
  const double b = rate.t_f - s;   // time to failure at interval end
  if (std::abs(rate.p - 1.0) <= kLogBranchEps) {
    return rate.k * std::log(a / b);
  }
  // Lambda = k/(p-1) * [b^(1-p) - a^(1-p)]; factoring out a^(1-p) turns the
  // difference into expm1 of (1-p) ln(b/a), which never cancels.
  const double one_m_p = 1.0 - rate.p;
  return rate.k / (rate.p - 1.0) * std::pow(a, one_m_p) *
         std::expm1(one_m_p * std::log(b / a));
}

double log_isi_density(const ModelConfig& model, const PowerLawRate& rate,
                       const IntervalContext& ctx) {
  const double big_lambda = integrated_intensity(rate, ctx.prev_event, ctx.current);
  const double result =
      log_density_from_parts(model, log_intensity(rate, ctx.current), big_lambda);
  if (std::isnan(result)) {
    throw NumericError("ISI log density is not a number");
  }
  return result;
}

double log_likelihood(const ModelConfig& model, const PowerLawRate& rate,
                      const EventCatalogue& cat, bool censor_tail) {
  if (cat.empty()) {
    throw ValidationError("log likelihood requires at least one event");
  }
  if (!rate_ok(rate)) return -kInf;
  if (model.family != Family::IP &&
      !(std::isfinite(model.shape) && model.shape > 0.0)) {
    return -kInf;
  }
  const auto& events = cat.events();
  if (events.back() >= rate.t_f || (censor_tail && cat.window_end() >= rate.t_f)) {
    return -kInf;
  }

  // Terms that do not change across intervals are hoisted out of the loop;
  // this function sits in the sampler's hot path.
  const double shape = model.shape;
  const double log_k = std::log(rate.k);
  double const_part = 0.0;
  switch (model.family) {
    case Family::IP:
      const_part = log_k;
      break;
    case Family::IG:
      const_part = std::log(shape) + log_k - log_gamma(shape);
      break;
    case Family::IW:
      const_part = 2.0 * std::log(shape) + log_k;
      break;
    case Family::IIG:
      const_part = log_k - 0.5 * std::log(2.0 * kPi);
      break;
  }

  const bool log_branch = std::abs(rate.p - 1.0) <= kLogBranchEps;
  const double one_m_p = 1.0 - rate.p;
  const double k_over_pm1 = log_branch ? 0.0 : rate.k / (rate.p - 1.0);

  double total = 0.0;
  double prev = cat.window_start();
  // Across the interval (s_{i-1}, s_i] the time-to-failure shrinks from
  // ttf_prev to ttf. Both ln(ttf) and ttf^(1-p) are shared with the next
  // interval, so each is computed once and carried forward; the power term
  // advances by the exact factor exp((1-p) dlog) already needed for Lambda.
  double log_ttf_prev = std::log(rate.t_f - prev);
  double pow_prev = log_branch ? 1.0 : std::exp(one_m_p * log_ttf_prev);
  for (std::size_t i = 0; i < events.size(); ++i) {
    const double s = events[i];
    if (i == 0 && s == prev) continue;  // event exactly at the window start
    const double log_ttf = std::log(rate.t_f - s);
    double big_lambda;
    if (log_branch) {
      big_lambda = rate.k * (log_ttf_prev - log_ttf);
    } else {
      const double growth = std::expm1(one_m_p * (log_ttf - log_ttf_prev));
      big_lambda = k_over_pm1 * pow_prev * growth;
      pow_prev += pow_prev * growth;
    }
    double term = const_part - rate.p * log_ttf;
    switch (model.family) {
      case Family::IP:
        term -= big_lambda;
        break;
      case Family::IG:
        if (shape != 1.0) term += (shape - 1.0) * std::log(shape * big_lambda);
        term -= shape * big_lambda;
        break;
      case Family::IW:
        if (shape != 1.0) term += (shape - 1.0) * std::log(shape * big_lambda);
        term -= std::pow(shape * big_lambda, shape);
        break;
      case Family::IIG: {
        const double dev = big_lambda - shape;
        term -= 1.5 * std::log(big_lambda) +
                dev * dev / (2.0 * shape * shape * big_lambda);
        break;
      }
    }
    total += term;
    log_ttf_prev = log_ttf;
  }
  if (censor_tail && cat.window_end() > events.back()) {
    const double big_lambda =
        integrated_intensity(rate, events.back(), cat.window_end());
    total += log_survival_from_lambda(model, big_lambda);
  }
  if (std::isnan(total)) return -kInf;
  return total;
}

double isi_survival(const ModelConfig& model, const PowerLawRate& rate,
                    const IntervalContext& ctx, bool* underflow) {
  if (underflow != nullptr) *underflow = false;
  const double log_s = isi_log_survival(model, rate, ctx);
  const double s = std::exp(log_s);
  if (s > 0.0) return s;
  if (underflow != nullptr) *underflow = true;
  return std::numeric_limits<double>::min();
}

double isi_log_survival(const ModelConfig& model, const PowerLawRate& rate,
                        const IntervalContext& ctx) {
  const double big_lambda =
      integrated_intensity(rate, ctx.prev_event, ctx.current);
  return log_survival_from_lambda(model, big_lambda);
}

double isi_log_survival_at(const ModelConfig& model, double big_lambda) {
  if (big_lambda < 0.0) {
    throw std::domain_error("integrated intensity must be nonnegative");
  }
  return log_survival_from_lambda(model, big_lambda);
}

double periodicity(const ModelConfig& model) {
  switch (model.family) {
    case Family::IP:
      return 1.0;
    case Family::IG:
      return std::sqrt(model.shape);
    case Family::IIG:
      return 1.0 / std::sqrt(model.shape);
    case Family::IW: {
      const double phi = model.shape;
      const double m1 = std::exp(log_gamma(1.0 + 1.0 / phi));
      const double m2 = std::exp(log_gamma(1.0 + 2.0 / phi));
      return m1 / std::sqrt(m2 - m1 * m1);
    }
  }
  return 1.0;
}

double unit_isi_log_density(const ModelConfig& model, double z) {
  if (z < 0.0) return -kInf;
  switch (model.family) {
    case Family::IP:
      return -z;
    case Family::IG: {
      const double a = model.shape;
      const double power = (a == 1.0) ? 0.0 : (a - 1.0) * std::log(z);
      return power - z - log_gamma(a);
    }
    case Family::IW: {
      const double phi = model.shape;
      const double power = (phi == 1.0) ? 0.0 : (phi - 1.0) * std::log(z);
      return std::log(phi) + power - std::pow(z, phi);
    }
    case Family::IIG: {
      const double psi = model.shape;
      const double dev = z - psi;
      return -0.5 * std::log(2.0 * kPi * z) - std::log(z) -
             dev * dev / (2.0 * psi * psi * z);
    }
  }
  return -kInf;
}

}  // namespace ppffm
