#include "emkin/analytic.hpp"

#include "emkin/errors.hpp"

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace emkin {

namespace {

void require_time(double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    std::ostringstream msg;
    msg << "time must be finite and >= 0, got " << t;
    throw DomainError(msg.str());
  }
}

void require_rate(double gamma, const char* name) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    std::ostringstream msg;
    msg << name << " must be a finite positive rate, got " << gamma;
    throw InvalidParameter(msg.str());
  }
}

template <class F>
double integrate(F f, double a, double b) {
  using boost::math::quadrature::gauss_kronrod;
  double error = 0.0;
  return gauss_kronrod<double, 61>::integrate(f, a, b, 12, 1e-11, &error);
}

// Panels [0, 1/g, 2/g, 4/g, ...] so that the fastest exponential is resolved
// even when the horizon is set by the slowest one. `kink` is an extra breakpoint.
template <class F>
double integrate_decaying(F f, double b, double fastest_rate, double kink = 0.0) {
  std::vector<double> cuts{0.0};
  for (double c = 1.0 / fastest_rate; c < b; c *= 2.0)
    cuts.push_back(c);
  if (kink > 0.0 && kink < b)
    cuts.push_back(kink);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t i = 1; i < cuts.size(); ++i)
    if (cuts[i] > cuts[i - 1])
      total += integrate(f, cuts[i - 1], cuts[i]);
  return total;
}

} // namespace

RatePair::RatePair(double gamma_a, double gamma_b) : gamma_a_(gamma_a), gamma_b_(gamma_b) {
  require_rate(gamma_a, "gamma_a");
  require_rate(gamma_b, "gamma_b");
}

WindowConfig::WindowConfig(double tau_, WindowMode mode_) : tau(tau_), mode(mode_) {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    std::ostringstream msg;
    msg << "window tau must be finite and > 0, got " << tau;
    throw InvalidParameter(msg.str());
  }
}

bool WindowConfig::within_validity_bound(const RatePair& rates) const noexcept {
  return tau * rates.gamma_a() * rates.gamma_b() < rates.gamma_a() + rates.gamma_b();
}

double first_emission_rate(const RatePair& rates) { return rates.gamma_a() + rates.gamma_b(); }

ChannelSolution solve_compatibility(const RatePair& rates) {
  const double ga = rates.gamma_a();
  const double gb = rates.gamma_b();
  const double scale = std::max(ga, gb);

  // Denominators cleared: the relations become polynomial, which adds the
  // inadmissible roots gamma_f = gamma_a or gamma_f = gamma_b.
  auto residual = [&](const Eigen::Vector3d& x) {
    const double ca = x[0], cb = x[1], gf = x[2];
    Eigen::Vector4d r;
    r << cb - (gf - ga), ca - (gf - gb), (ca * (gf - ga) - ga * cb) / scale,
        (cb * (gf - gb) - gb * ca) / scale;
    return r;
  };
  auto jacobian = [&](const Eigen::Vector3d& x) {
    const double ca = x[0], cb = x[1], gf = x[2];
    Eigen::Matrix<double, 4, 3> j;
    j << 0.0, 1.0, -1.0,
         1.0, 0.0, -1.0,
         (gf - ga) / scale, -ga / scale, ca / scale,
         -gb / scale, (gf - gb) / scale, cb / scale;
    return j;
  };

  Eigen::Vector3d x(scale, scale, 2.0 * scale + std::min(ga, gb));
  double cost = residual(x).squaredNorm();
  int iter = 0;
  for (; iter < 200; ++iter) {
    const auto r = residual(x);
    const Eigen::Vector3d step = jacobian(x).colPivHouseholderQr().solve(-r);
    double lambda = 1.0;
    Eigen::Vector3d trial = x + step;
    double trial_cost = residual(trial).squaredNorm();
    while (trial_cost > cost && lambda > 1e-6) {
      lambda *= 0.5;
      trial = x + lambda * step;
      trial_cost = residual(trial).squaredNorm();
    }
    const double moved = (trial - x).norm();
    x = trial;
    cost = trial_cost;
    if (moved <= 1e-15 * scale || std::sqrt(cost) <= 1e-16 * scale) {
      ++iter;
      break;
    }
  }

  const double ca = x[0], cb = x[1], gf = x[2];
  const double root_tol = 1e-9 * scale;
  if (!(std::sqrt(cost) <= 1e-12 * scale) || !(ca > 0.0) || !(cb > 0.0) ||
      std::abs(gf - ga) < root_tol || std::abs(gf - gb) < root_tol) {
    std::ostringstream msg;
    msg << "compatibility solve did not reach the admissible root (residual " << std::sqrt(cost)
        << ", x = " << ca << ", " << cb << ", " << gf << ")";
    throw SolverFailure(msg.str());
  }
  return {ca, cb, gf, iter};
}

double entangled_survival(double t, const RatePair& rates) {
  require_time(t);
  return std::exp(-rates.gamma_f() * t);
}

double first_emission_cdf_entangled(double t, const RatePair& rates) {
  require_time(t);
  return -std::expm1(-rates.gamma_f() * t);
}

double single_type_cdf(double t, double gamma_i) {
  require_time(t);
  require_rate(gamma_i, "gamma_i");
  return -std::expm1(-gamma_i * t);
}

double intermediate_population(double t, const RatePair& rates, Channel which) {
  require_time(t);
  const double gi = rates.gamma(which);
  const double gj = rates.channel_rate(other(which));
  const double gf = rates.gamma_f();
  // gi - gf = -gamma_j, never zero for positive rates
  return gj / (gi - gf) * (std::exp(-gf * t) - std::exp(-gi * t));
}

double emission_derivative_ordered(double t, const RatePair& rates, Channel which, double channel_i,
                                   double channel_j, double gamma_f) {
  require_time(t);
  const double gi = rates.gamma(which);
  const double ef = std::exp(-gamma_f * t);
  return channel_i * ef + gi * channel_j / (gi - gamma_f) * (ef - std::exp(-gi * t));
}

double emission_derivative_ordered(double t, const RatePair& rates, Channel which) {
  return emission_derivative_ordered(t, rates, which, rates.channel_rate(which),
                                     rates.channel_rate(other(which)), rates.gamma_f());
}

double emission_derivative_direct(double t, double gamma_i) {
  require_time(t);
  require_rate(gamma_i, "gamma_i");
  return gamma_i * std::exp(-gamma_i * t);
}

double second_emission_cdf(double t, const RatePair& rates) {
  return single_type_cdf(t, rates.gamma_a()) + single_type_cdf(t, rates.gamma_b()) -
         first_emission_cdf_entangled(t, rates);
}

WindowProbability window_prob_taylor(double t, double tau, double gamma_i) {
  require_time(t);
  require_rate(gamma_i, "gamma_i");
  if (!(tau >= 0.0))
    throw InvalidParameter("window tau must be >= 0");
  const double p = tau * gamma_i * std::exp(-gamma_i * t);
  return {p, p > 1.0};
}

double window_prob_exact(double t, double tau, double gamma_i) {
  require_time(t);
  require_rate(gamma_i, "gamma_i");
  if (!(tau >= 0.0))
    throw InvalidParameter("window tau must be >= 0");
  const double lo = std::max(0.0, t - 0.5 * tau);
  const double hi = t + 0.5 * tau;
  // e^{-g lo} - e^{-g hi} = e^{-g lo} (1 - e^{-g (hi - lo)})
  return -std::exp(-gamma_i * lo) * std::expm1(-gamma_i * (hi - lo));
}

double product_one_emission_unnormalized(double t, const RatePair& rates, const WindowConfig& window,
                                         WindowVariant variant) {
  double pa, pb;
  if (variant == WindowVariant::Taylor) {
    pa = window_prob_taylor(t, window.tau, rates.gamma_a()).value;
    pb = window_prob_taylor(t, window.tau, rates.gamma_b()).value;
  } else {
    pa = window_prob_exact(t, window.tau, rates.gamma_a());
    pb = window_prob_exact(t, window.tau, rates.gamma_b());
  }
  return pa + pb - 2.0 * pa * pb;
}

NormalizedWindowModel normalization_alpha(const RatePair& rates, const WindowConfig& window) {
  if (!window.within_validity_bound(rates)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "window too wide: requires tau*gamma_a*gamma_b < gamma_a+gamma_b, got "
        << window.tau * rates.gamma_a() * rates.gamma_b() << " >= " << rates.gamma_a() + rates.gamma_b();
    throw WindowTooWide(msg.str());
  }
  const double ga = rates.gamma_a(), gb = rates.gamma_b();
  const double inv_alpha = 2.0 - 2.0 * window.tau * ga * gb / (ga + gb);
  return {rates, window, 1.0 / inv_alpha};
}

double quadrature_horizon(const RatePair& rates) {
  return 40.0 / std::min(rates.gamma_a(), rates.gamma_b());
}

double one_emission_mass_quadrature(const RatePair& rates, const WindowConfig& window,
                                    WindowVariant variant) {
  const double horizon = quadrature_horizon(rates);
  auto integrand = [&](double t) {
    return product_one_emission_unnormalized(t, rates, window, variant) / window.tau;
  };
  const double fastest = std::max(rates.gamma_a(), rates.gamma_b());
  if (variant == WindowVariant::Taylor)
    return integrate_decaying(integrand, horizon, fastest);
  // kink where the exact window stops being clipped at zero
  return integrate_decaying(integrand, horizon, fastest, 0.5 * window.tau);
}

double product_first_pdf(double t, const NormalizedWindowModel& model) {
  require_time(t);
  const double ga = model.rates.gamma_a(), gb = model.rates.gamma_b();
  return model.alpha * (ga * std::exp(-ga * t) + gb * std::exp(-gb * t) -
                        2.0 * model.window.tau * ga * gb * std::exp(-(ga + gb) * t));
}

double product_first_cdf(double t, const NormalizedWindowModel& model) {
  require_time(t);
  const double ga = model.rates.gamma_a(), gb = model.rates.gamma_b();
  const double cross = 2.0 * model.window.tau * ga * gb / (ga + gb);
  // alpha * (2 - cross) == 1, so the constant term folds into the expm1 terms
  return -model.alpha * (std::expm1(-ga * t) + std::expm1(-gb * t) - cross * std::expm1(-(ga + gb) * t));
}

double product_pdf_positivity_tau(const RatePair& rates) {
  return (rates.gamma_a() + rates.gamma_b()) / (2.0 * rates.gamma_a() * rates.gamma_b());
}

ExactWindowProductLaw::ExactWindowProductLaw(const RatePair& rates, const WindowConfig& window)
    : rates_(rates), window_(window),
      mass_(one_emission_mass_quadrature(rates, window, WindowVariant::Exact)) {}

double ExactWindowProductLaw::pdf(double t) const {
  return product_one_emission_unnormalized(t, rates_, window_, WindowVariant::Exact) /
         (window_.tau * mass_);
}

double ExactWindowProductLaw::cdf(double t) const {
  require_time(t);
  if (t == 0.0)
    return 0.0;
  auto integrand = [&](double s) { return pdf(s); };
  const double fastest = std::max(rates_.gamma_a(), rates_.gamma_b());
  return std::min(1.0, integrate_decaying(integrand, t, fastest, 0.5 * window_.tau));
}

double coincidence_probability(const RatePair& rates, const WindowConfig& window) {
  const double ga = rates.gamma_a(), gb = rates.gamma_b(), tau = window.tau;
  if (window.mode == WindowMode::GridBin) {
    // sum_k P(A in bin k) P(B in bin k), a geometric series in e^{-(ga+gb) tau}
    return std::expm1(-ga * tau) * std::expm1(-gb * tau) / -std::expm1(-(ga + gb) * tau);
  }
  const double gf = ga + gb;
  return -(ga / gf) * std::expm1(-gb * tau) - (gb / gf) * std::expm1(-ga * tau);
}

} // namespace emkin
