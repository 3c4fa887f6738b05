#include "emkin/errors.hpp"
#include "emkin/kinetics.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace emkin;

namespace {

const RatePair kRef{1.0, 1.5};

// Frozen from tests/oracles/frozen_values.py
constexpr double kExpM25 = 0.082084998623898795170;
constexpr double kNaAtOne = 0.28579444254754352643;
constexpr double kOneMinusInvE = 0.63212055882855767840;

double max_conservation_error(const std::vector<KineticsState>& states, double n0) {
  double worst = 0.0;
  for (const auto& s : states)
    worst = std::max({worst, std::abs(s.excitation_total() - 2.0 * n0), std::abs(s.pair_total() - n0)});
  return worst;
}

const KineticsState& at_time(const std::vector<KineticsState>& states, double t) {
  for (const auto& s : states)
    if (std::abs(s.t - t) < 1e-12)
      return s;
  FAIL("time point missing");
  return states.front();
}

} // namespace

TEST_CASE("derivative at the initial state") {
  const double n0 = 1000.0;
  const auto d = derivative(KineticsState::initial(n0), kRef);
  CHECK(d.n_e == -2.5 * n0);
  CHECK(d.n_a == 1.5 * n0);
  CHECK(d.n_b == 1.0 * n0);
  CHECK(d.cap_n_a == 1.0 * n0);
  CHECK(d.cap_n_b == 1.5 * n0);
  CHECK(d.cap_n_f == 2.5 * n0);

  const auto zero = derivative(KineticsState{}, kRef);
  CHECK(zero.n_e == 0.0);
  CHECK(zero.n_a == 0.0);
  CHECK(zero.cap_n_f == 0.0);
}

TEST_CASE("conserved quantities have zero derivative") {
  std::mt19937_64 eng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const RatePair r(0.01 + 10 * u(eng), 0.01 + 10 * u(eng));
    const KineticsState s{0.0, u(eng), u(eng), u(eng), u(eng), u(eng), u(eng)};
    const auto d = derivative(s, r);
    CHECK(2 * d.n_e + d.n_a + d.n_b + d.cap_n_a + d.cap_n_b == doctest::Approx(0.0).epsilon(1e-13).scale(r.gamma_f()));
    CHECK(d.cap_n_f + d.n_e == doctest::Approx(0.0).scale(r.gamma_f()));
  }
}

TEST_CASE("integration reproduces the closed-form populations") {
  const IntegratorConfig cfg{1e-3, 4.0, 1.0};
  const auto states = integrate(KineticsState::initial(1.0), kRef, cfg);
  CHECK(states.size() == 4001);
  CHECK(states.back().t == 4.0);
  const auto& s1 = at_time(states, 1.0);
  CHECK(std::abs(s1.n_e - kExpM25) < 1e-9);
  CHECK(std::abs(s1.n_a - kNaAtOne) < 1e-9);
  CHECK(std::abs(s1.cap_n_a - kOneMinusInvE) < 1e-9);
  CHECK(max_deviation_from_closed_form(states, kRef, 1.0) < 1e-9);
  CHECK(max_conservation_error(states, 1.0) < 1e-9);
}

TEST_CASE("populations scale linearly with n0") {
  const double n0 = 1e6;
  const auto states = integrate(KineticsState::initial(n0), kRef, {1e-3, 4.0, n0, 10});
  CHECK(states.size() == 401);
  CHECK(max_deviation_from_closed_form(states, kRef, n0) < 1e-9 * n0);
  CHECK(max_conservation_error(states, n0) < 1e-9 * n0);
}

TEST_CASE("fourth-order convergence") {
  double err[3];
  const double steps[3] = {4e-3, 2e-3, 1e-3};
  for (int i = 0; i < 3; ++i)
    err[i] = max_deviation_from_closed_form(integrate(KineticsState::initial(1.0), kRef, {steps[i], 4.0, 1.0}),
                                            kRef, 1.0);
  CHECK(err[0] / err[1] == doctest::Approx(16.0).epsilon(0.1));
  CHECK(err[1] / err[2] == doctest::Approx(16.0).epsilon(0.1));
}

TEST_CASE("a perturbed first-emission rate contradicts the single-type law") {
  auto channels = ChannelRates::compatible(kRef);
  channels.gamma_f *= 0.96;
  const auto states = integrate(KineticsState::initial(1.0), kRef, {1e-3, 4.0 / kRef.gamma_f(), 1.0}, channels);
  double worst = 0.0;
  for (const auto& s : states)
    worst = std::max(worst, std::abs(s.cap_n_a - single_type_cdf(s.t, 1.0)));
  CHECK(worst > 1e-3);
}

TEST_CASE("short final step lands on t_end") {
  const auto states = integrate(KineticsState::initial(1.0), kRef, {0.3, 1.0, 1.0});
  CHECK(states.size() == 5);
  CHECK(states.back().t == 1.0);
  CHECK(std::abs(states.back().n_e - std::exp(-2.5)) < 1e-3);
  CHECK(integrate(KineticsState::initial(1.0), kRef, {0.1, 0.0, 1.0}).size() == 1);
}

TEST_CASE("invalid configurations and blowup") {
  CHECK_THROWS_AS(integrate(KineticsState::initial(1.0), kRef, {0.0, 1.0, 1.0}), InvalidParameter);
  CHECK_THROWS_AS(integrate(KineticsState::initial(1.0), kRef, {0.1, -1.0, 1.0}), InvalidParameter);
  CHECK_THROWS_AS(integrate(KineticsState::initial(1.0), kRef, {0.1, 1.0, 0.0}), InvalidParameter);
  // explicit RK4 far outside its stability region
  const RatePair stiff(1e3, 1e3);
  CHECK_THROWS_AS(integrate(KineticsState::initial(1.0), stiff, {1.0, 2000.0, 1.0}), IntegrationBlowup);
}
