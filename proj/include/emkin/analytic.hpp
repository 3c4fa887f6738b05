#pragma once

// Closed-form emission kinetics for a pair of excited atoms A and B.
//
// All distributions are normalized per initial pair (n_0 = 1). Rates are in
// inverse time units of the caller's choosing.

#include <functional>

namespace emkin {

enum class Channel { A, B };

constexpr Channel other(Channel c) noexcept { return c == Channel::A ? Channel::B : Channel::A; }

/// Single-atom emission rates of the two atoms.
class RatePair {
public:
  RatePair(double gamma_a, double gamma_b);

  double gamma_a() const noexcept { return gamma_a_; }
  double gamma_b() const noexcept { return gamma_b_; }
  double gamma(Channel c) const noexcept { return c == Channel::A ? gamma_a_ : gamma_b_; }

  /// Rate of the first emission of an entangled pair.
  double gamma_f() const noexcept { return gamma_a_ + gamma_b_; }

  /// Rate of first emissions in channel c. Equal to the single-atom rate.
  double channel_rate(Channel c) const noexcept { return gamma(c); }

  RatePair swapped() const { return {gamma_b_, gamma_a_}; }

private:
  double gamma_a_;
  double gamma_b_;
};

enum class WindowMode { GridBin, Pairwise };

/// Which expression is used for the probability of an emission inside a window.
enum class WindowVariant { Taylor, Exact };

struct WindowConfig {
  double tau;
  WindowMode mode = WindowMode::GridBin;

  explicit WindowConfig(double tau, WindowMode mode = WindowMode::GridBin);

  /// tau * gamma_a * gamma_b < gamma_a + gamma_b
  bool within_validity_bound(const RatePair& rates) const noexcept;
};

/// Product-state model normalized over the post-selected ensemble.
struct NormalizedWindowModel {
  RatePair rates;
  WindowConfig window;
  double alpha;
};

struct ChannelSolution {
  double channel_a;
  double channel_b;
  double gamma_f;
  int iterations;
};

struct WindowProbability {
  double value;
  /// Set when the first-order expression exceeds 1.
  bool breakdown;
};

double first_emission_rate(const RatePair& rates);

/// Solves the four compatibility relations between time-ordered and direct
/// emission derivatives for (channel_a, channel_b, gamma_f) by Gauss-Newton
/// iteration on the residuals. Throws SolverFailure if it does not converge to
/// the admissible root (gamma_f distinct from both single rates, positive
/// channel rates).
ChannelSolution solve_compatibility(const RatePair& rates);

/// n_e(t) / n_0
double entangled_survival(double t, const RatePair& rates);
/// N_f(t) / n_0 for entangled pairs.
double first_emission_cdf_entangled(double t, const RatePair& rates);
/// N_i(t) / n_0
double single_type_cdf(double t, double gamma_i);
/// n_i(t) / n_0: atoms of type `which` left excited after their partner emitted first.
double intermediate_population(double t, const RatePair& rates, Channel which);

/// (1/n_0) dN_i/dt from the two-channel rate equations, with explicit channel
/// rates and first-emission rate so that non-compatible choices can be probed.
double emission_derivative_ordered(double t, const RatePair& rates, Channel which,
                                   double channel_i, double channel_j, double gamma_f);
double emission_derivative_ordered(double t, const RatePair& rates, Channel which);
double emission_derivative_direct(double t, double gamma_i);

/// N_s(t) / n_0
double second_emission_cdf(double t, const RatePair& rates);

WindowProbability window_prob_taylor(double t, double tau, double gamma_i);
/// Exact probability of emission in [t - tau/2, t + tau/2], clipped at 0.
double window_prob_exact(double t, double tau, double gamma_i);

double product_one_emission_unnormalized(double t, const RatePair& rates, const WindowConfig& window,
                                         WindowVariant variant = WindowVariant::Taylor);

/// Throws WindowTooWide when the validity bound fails.
NormalizedWindowModel normalization_alpha(const RatePair& rates, const WindowConfig& window);

/// Integral of P^un(t, tau)/tau over [0, inf) by adaptive quadrature, for either variant.
double one_emission_mass_quadrature(const RatePair& rates, const WindowConfig& window,
                                    WindowVariant variant = WindowVariant::Taylor);

double product_first_pdf(double t, const NormalizedWindowModel& model);
double product_first_cdf(double t, const NormalizedWindowModel& model);

/// Largest tau for which product_first_pdf is nonnegative on [0, inf):
/// (gamma_a + gamma_b) / (2 gamma_a gamma_b).
double product_pdf_positivity_tau(const RatePair& rates);

/// Product-state law built from exact window probabilities and normalized by
/// quadrature instead of the closed-form alpha.
class ExactWindowProductLaw {
public:
  ExactWindowProductLaw(const RatePair& rates, const WindowConfig& window);

  double mass() const noexcept { return mass_; }
  double pdf(double t) const;
  double cdf(double t) const;

private:
  RatePair rates_;
  WindowConfig window_;
  double mass_;
};

/// Probability that the two emissions of a product pair are coincident under
/// the window's mode (same grid bin, or closer than tau).
double coincidence_probability(const RatePair& rates, const WindowConfig& window);

/// Integration horizon for normalization checks: 40 / min(gamma_a, gamma_b).
double quadrature_horizon(const RatePair& rates);

} // namespace emkin
