#include "emkin/kinetics.hpp"

#include "emkin/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace emkin {

namespace {

KineticsState advance(const KineticsState& s, const KineticsDerivative& d, double h) {
  return {s.t + h,
          s.n_e + h * d.n_e,
          s.n_a + h * d.n_a,
          s.n_b + h * d.n_b,
          s.cap_n_a + h * d.cap_n_a,
          s.cap_n_b + h * d.cap_n_b,
          s.cap_n_f + h * d.cap_n_f};
}

bool finite(const KineticsState& s) {
  return std::isfinite(s.n_e) && std::isfinite(s.n_a) && std::isfinite(s.n_b) &&
         std::isfinite(s.cap_n_a) && std::isfinite(s.cap_n_b) && std::isfinite(s.cap_n_f);
}

KineticsState rk4_step(const KineticsState& s, double h, const RatePair& rates, const ChannelRates& ch) {
  const auto k1 = derivative(s, rates, ch);
  const auto k2 = derivative(advance(s, k1, 0.5 * h), rates, ch);
  const auto k3 = derivative(advance(s, k2, 0.5 * h), rates, ch);
  const auto k4 = derivative(advance(s, k3, h), rates, ch);
  auto combine = [h](double y, double a, double b, double c, double d) {
    return y + h / 6.0 * (a + 2.0 * b + 2.0 * c + d);
  };
  return {s.t + h,
          combine(s.n_e, k1.n_e, k2.n_e, k3.n_e, k4.n_e),
          combine(s.n_a, k1.n_a, k2.n_a, k3.n_a, k4.n_a),
          combine(s.n_b, k1.n_b, k2.n_b, k3.n_b, k4.n_b),
          combine(s.cap_n_a, k1.cap_n_a, k2.cap_n_a, k3.cap_n_a, k4.cap_n_a),
          combine(s.cap_n_b, k1.cap_n_b, k2.cap_n_b, k3.cap_n_b, k4.cap_n_b),
          combine(s.cap_n_f, k1.cap_n_f, k2.cap_n_f, k3.cap_n_f, k4.cap_n_f)};
}

} // namespace

void IntegratorConfig::validate() const {
  std::ostringstream msg;
  if (!(step > 0.0) || !std::isfinite(step))
    msg << "integrator step must be > 0, got " << step;
  else if (!(t_end >= 0.0) || !std::isfinite(t_end))
    msg << "integrator t_end must be >= 0, got " << t_end;
  else if (!(n_0 > 0.0) || !std::isfinite(n_0))
    msg << "n_0 must be > 0, got " << n_0;
  else if (stride < 1)
    msg << "output stride must be >= 1, got " << stride;
  else
    return;
  throw InvalidParameter(msg.str());
}

KineticsDerivative derivative(const KineticsState& s, const RatePair& rates, const ChannelRates& ch) {
  const double ga = rates.gamma_a(), gb = rates.gamma_b();
  return {-ch.gamma_f * s.n_e,
          ch.channel_b * s.n_e - ga * s.n_a,
          ch.channel_a * s.n_e - gb * s.n_b,
          ch.channel_a * s.n_e + ga * s.n_a,
          ch.channel_b * s.n_e + gb * s.n_b,
          ch.gamma_f * s.n_e};
}

KineticsDerivative derivative(const KineticsState& state, const RatePair& rates) {
  return derivative(state, rates, ChannelRates::compatible(rates));
}

std::vector<KineticsState> integrate(const KineticsState& initial, const RatePair& rates,
                                     const IntegratorConfig& cfg, const ChannelRates& channels) {
  cfg.validate();
  // The equations are linear in n_0: evolve fractions, scale at output.
  const double n0 = cfg.n_0;
  KineticsState s{initial.t,           initial.n_e / n0,     initial.n_a / n0,    initial.n_b / n0,
                  initial.cap_n_a / n0, initial.cap_n_b / n0, initial.cap_n_f / n0};
  auto scaled = [n0](const KineticsState& f) {
    return KineticsState{f.t, f.n_e * n0, f.n_a * n0, f.n_b * n0, f.cap_n_a * n0, f.cap_n_b * n0,
                         f.cap_n_f * n0};
  };

  const double span = cfg.t_end - initial.t;
  const auto n_steps = span <= 0.0 ? 0L : static_cast<long>(std::ceil(span / cfg.step - 1e-9));
  std::vector<KineticsState> out;
  out.reserve(static_cast<std::size_t>(n_steps / cfg.stride + 2));
  out.push_back(scaled(s));
  for (long k = 1; k <= n_steps; ++k) {
    const double t_next = k == n_steps ? cfg.t_end : initial.t + static_cast<double>(k) * cfg.step;
    s = rk4_step(s, t_next - s.t, rates, channels);
    s.t = t_next;
    if (!finite(s)) {
      std::ostringstream msg;
      msg << "non-finite population at t = " << t_next;
      throw IntegrationBlowup(msg.str());
    }
    if (k % cfg.stride == 0 || k == n_steps)
      out.push_back(scaled(s));
  }
  return out;
}

std::vector<KineticsState> integrate(const KineticsState& initial, const RatePair& rates,
                                     const IntegratorConfig& cfg) {
  return integrate(initial, rates, cfg, ChannelRates::compatible(rates));
}

KineticsState closed_form_state(double t, const RatePair& rates, double n_0) {
  return {t,
          n_0 * entangled_survival(t, rates),
          n_0 * intermediate_population(t, rates, Channel::A),
          n_0 * intermediate_population(t, rates, Channel::B),
          n_0 * single_type_cdf(t, rates.gamma_a()),
          n_0 * single_type_cdf(t, rates.gamma_b()),
          n_0 * first_emission_cdf_entangled(t, rates)};
}

double max_deviation_from_closed_form(const std::vector<KineticsState>& states, const RatePair& rates,
                                      double n_0) {
  double worst = 0.0;
  for (const auto& s : states) {
    const auto c = closed_form_state(s.t, rates, n_0);
    worst = std::max({worst, std::abs(s.n_e - c.n_e), std::abs(s.n_a - c.n_a),
                      std::abs(s.n_b - c.n_b), std::abs(s.cap_n_a - c.cap_n_a),
                      std::abs(s.cap_n_b - c.cap_n_b), std::abs(s.cap_n_f - c.cap_n_f)});
  }
  return worst;
}

} // namespace emkin
