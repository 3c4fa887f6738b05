#pragma once

// Rate equations for entangled pairs, their intermediate single-atom
// populations, and the cumulative photon counts, integrated with classical RK4.

#include "emkin/analytic.hpp"

#include <vector>

namespace emkin {

/// Populations at time t. Evolved as fractions of n_0 and scaled on output.
struct KineticsState {
  double t = 0.0;
  double n_e = 0.0;
  double n_a = 0.0;
  double n_b = 0.0;
  double cap_n_a = 0.0;
  double cap_n_b = 0.0;
  double cap_n_f = 0.0;

  static KineticsState initial(double n_0) { return {0.0, n_0, 0.0, 0.0, 0.0, 0.0, 0.0}; }

  /// 2 n_e + n_a + n_b + N_A + N_B, equal to 2 n_0 for compatible rates.
  double excitation_total() const noexcept { return 2.0 * n_e + n_a + n_b + cap_n_a + cap_n_b; }
  /// N_f + n_e, equal to n_0.
  double pair_total() const noexcept { return cap_n_f + n_e; }
};

struct KineticsDerivative {
  double n_e, n_a, n_b, cap_n_a, cap_n_b, cap_n_f;
};

/// First-emission rates used by the equations. The default is the compatible
/// solution (channel rates equal to single-atom rates, gamma_f = their sum).
struct ChannelRates {
  double channel_a;
  double channel_b;
  double gamma_f;

  static ChannelRates compatible(const RatePair& rates) {
    return {rates.gamma_a(), rates.gamma_b(), rates.gamma_f()};
  }
};

struct IntegratorConfig {
  double step;
  double t_end;
  double n_0 = 1.0;
  /// Keep every `stride`-th step in the output (the final state is always kept).
  int stride = 1;

  void validate() const;
};

KineticsDerivative derivative(const KineticsState& state, const RatePair& rates,
                              const ChannelRates& channels);
KineticsDerivative derivative(const KineticsState& state, const RatePair& rates);

/// Fixed-step RK4 from `initial` to cfg.t_end. Time points are k*step exactly;
/// the last step is shortened to land on t_end. Throws IntegrationBlowup on a
/// non-finite value.
std::vector<KineticsState> integrate(const KineticsState& initial, const RatePair& rates,
                                     const IntegratorConfig& cfg, const ChannelRates& channels);
std::vector<KineticsState> integrate(const KineticsState& initial, const RatePair& rates,
                                     const IntegratorConfig& cfg);

/// Closed-form state at time t (per n_0, then scaled).
KineticsState closed_form_state(double t, const RatePair& rates, double n_0 = 1.0);

/// Largest absolute component deviation from the closed form, over all states.
double max_deviation_from_closed_form(const std::vector<KineticsState>& states, const RatePair& rates,
                                      double n_0);

} // namespace emkin
