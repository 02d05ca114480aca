#ifndef PPFFM_RATE_MODELS_HPP_
#define PPFFM_RATE_MODELS_HPP_

#include <string>

#include "ppffm/catalogue.hpp"

namespace ppffm {

// Power-law event intensity lambda(t) = k * (t_f - t)^(-p): the rate grows
// without bound as t approaches the failure time t_f.
struct PowerLawRate {
  double k = 1.0;    // amplitude, events/day at unit time-to-failure
  double t_f = 1.0;  // failure (eruption) time, days
  double p = 1.0;    // acceleration exponent
};

// Inter-spike-interval family. Each family fixes the distribution of the
// intensity-rescaled interval z: Gamma(alpha,1) for IG, Exp(1) for IP,
// unit-scale Weibull(phi) for IW, inverse-Gaussian(psi, dispersion 1) for
// IIG.
enum class Family { IP, IG, IW, IIG };

const char* family_name(Family f);
Family family_from_name(const std::string& name);  // throws ValidationError

struct ModelConfig {
  Family family = Family::IP;
  double shape = 1.0;  // alpha (IG), phi (IW), psi (IIG); ignored for IP

  // Multiplier c in the rescaling z = c * Lambda: alpha for IG, phi for IW,
  // 1 for IP and IIG.
  double rescale_factor() const;
  void validate() const;  // throws ValidationError on shape <= 0
};

// One inter-event interval (s_m, s], with prev_event < current.
struct IntervalContext {
  double prev_event = 0.0;
  double current = 0.0;
};

// lambda(t); throws std::domain_error at or after t_f.
double intensity(const PowerLawRate& rate, double t);

// Lambda(s_m, s) = integral of lambda over [s_m, s], in closed form.
// Uses an expm1 formulation that stays accurate through p -> 1, with the
// logarithmic limit k*ln((t_f-s_m)/(t_f-s)) as the p == 1 branch.
double integrated_intensity(const PowerLawRate& rate, double s_m, double s);

// ln f(s | s_m) for the chosen family.
double log_isi_density(const ModelConfig& model, const PowerLawRate& rate,
                       const IntervalContext& ctx);

// Sum of ln f over consecutive intervals, with the window start acting as
// virtual origin of the first interval. Returns -infinity (a sampler
// sentinel, not an exception) when any event lies at or beyond t_f or a
// parameter is out of range. With censor_tail the open interval from the
// last event to the window end contributes its log survival.
double log_likelihood(const ModelConfig& model, const PowerLawRate& rate,
                      const EventCatalogue& cat, bool censor_tail = false);

// Survival S(s | s_m) = 1 - F(s | s_m), in (0, 1]. Underflow is clamped to
// the smallest positive normal double; *underflow (when given) reports the
// clamp.
double isi_survival(const ModelConfig& model, const PowerLawRate& rate,
                    const IntervalContext& ctx, bool* underflow = nullptr);

// ln S(s | s_m), exact where S itself would underflow. The rescaled
// interval tau = -ln S is exponential(1) under the true model.
double isi_log_survival(const ModelConfig& model, const PowerLawRate& rate,
                        const IntervalContext& ctx);

// Same survival as a function of the integrated intensity alone (the ISI
// distributions depend on the interval only through Lambda).
double isi_log_survival_at(const ModelConfig& model, double big_lambda);

// Ratio of ISI mean to ISI standard deviation under the unit rescaled law:
// 1 (IP), sqrt(alpha) (IG), 1/sqrt(psi) (IIG), and the Weibull moment ratio
// for IW.
double periodicity(const ModelConfig& model);

// ln h(z): density of the unit rescaled interval (Gamma / Exp / Weibull /
// inverse-Gaussian); used for histogram overlays.
double unit_isi_log_density(const ModelConfig& model, double z);

}  // namespace ppffm

#endif  // PPFFM_RATE_MODELS_HPP_
