#include "commands.hpp"

#include "emkin/analytic.hpp"
#include "emkin/errors.hpp"
#include "emkin/estimation.hpp"
#include "emkin/kinetics.hpp"
#include "emkin/montecarlo.hpp"
#include "emkin/wavefunction.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace emkin;
namespace fs = std::filesystem;

namespace {

const RatePair kRef{1.0, 1.5};
constexpr double kRefTau = 5.0 / 6.0;
constexpr std::size_t kMillion = 1000000;

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double a = 0, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

Outcome compatibility() {
  const auto sol = solve_compatibility(kRef);
  const double sol_err = std::max({std::abs(sol.channel_a - 1.0), std::abs(sol.channel_b - 1.5),
                                   std::abs(sol.gamma_f - 2.5)});
  double deriv_err = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double t = 4.0 * k / 999.0;
    for (Channel c : {Channel::A, Channel::B})
      deriv_err = std::max(deriv_err, std::abs(emission_derivative_ordered(t, kRef, c) -
                                               emission_derivative_direct(t, kRef.gamma(c))));
  }
  return {sol_err < 1e-10 && deriv_err < 1e-12,
          fmt("solution error %.2e (tol 1e-10), derivative mismatch %.2e (tol 1e-12)", sol_err, deriv_err)};
}

Outcome kinetics() {
  const auto init = KineticsState::initial(1.0);
  const auto states = integrate(init, kRef, {1e-3, 4.0});
  const double dev = max_deviation_from_closed_form(states, kRef, 1.0);
  double cons = 0.0;
  for (const auto& s : states)
    cons = std::max({cons, std::abs(s.excitation_total() - 2.0), std::abs(s.pair_total() - 1.0)});
  std::vector<double> errs;
  for (double h : {4e-3, 2e-3, 1e-3})
    errs.push_back(max_deviation_from_closed_form(integrate(init, kRef, {h, 4.0}), kRef, 1.0));
  const double order = 0.5 * (std::log2(errs[0] / errs[1]) + std::log2(errs[1] / errs[2]));
  return {dev < 1e-9 && cons < 1e-9 && std::abs(order - 4.0) <= 0.3,
          fmt("closed-form deviation %.2e, conservation %.2e (tol 1e-9), order %.3f (4.0 +- 0.3)", dev, cons,
              order)};
}

std::vector<EmissionRecord> entangled_run(int workers) {
  return simulate({kMillion, kRef, PairKind::Entangled, WindowConfig(kRefTau), 20240501}, workers);
}

Outcome entangled_law() {
  const auto times = first_emission_times(entangled_run(0));
  const auto fit = mle_exponential(times);
  const auto fractions = channel_fractions(entangled_run(0));
  const double ks = ks_distance(times, [](double t) { return -std::expm1(-2.5 * t); });
  const double crit = ks_critical_value(times.size(), 0.01);
  const double frac_tol = 3.0 * std::sqrt(0.24) / 1e3;
  return {std::abs(fit.rate_estimate - 2.5) <= 0.0075 && std::abs(fractions.a - 0.4) <= frac_tol && ks < crit,
          fmt("rate %.5f in [2.4925, 2.5075], A fraction %.5f (0.4 +- %.5f), ", fit.rate_estimate, fractions.a,
              frac_tol) +
              fmt("KS %.5f < %.5f", ks, crit)};
}

Outcome product_law() {
  const WindowConfig window(0.02);
  const auto records = simulate({kMillion, kRef, PairKind::Product, window, 777});
  const auto sel = postselect(records, window);
  auto times = one_emission_times(sel.kept);
  std::sort(times.begin(), times.end());

  // exact-window law tabulated densely, linear interpolation between nodes
  const ExactWindowProductLaw law(kRef, window);
  const double horizon = times.back();
  const std::size_t nodes = 20001;
  std::vector<double> cdf(nodes);
  const double dt = horizon / static_cast<double>(nodes - 1);
  for (std::size_t k = 0; k < nodes; ++k)
    cdf[k] = law.cdf(dt * static_cast<double>(k));
  const auto law_cdf = [&](double t) {
    const double u = t / dt;
    const auto k = std::min(static_cast<std::size_t>(u), nodes - 2);
    const double f = u - static_cast<double>(k);
    return cdf[k] + f * (cdf[k + 1] - cdf[k]);
  };
  const double sup = ks_distance(times, law_cdf);

  const double p = coincidence_probability(kRef, window);
  const double rate = static_cast<double>(sel.summary.discarded) / static_cast<double>(records.size());
  const double sigma = std::sqrt(p * (1 - p) / static_cast<double>(records.size()));
  return {sup < 0.005 && std::abs(rate - p) <= 3 * sigma,
          fmt("sup-distance %.5f (tol 0.005), coincidence %.6f vs %.6f (3 sigma %.6f)", sup, rate, p, 3 * sigma)};
}

Outcome normalization() {
  const WindowConfig window(kRefTau);
  const double mass = one_emission_mass_quadrature(kRef, window);
  const double alpha = normalization_alpha(kRef, window).alpha;
  bool threw = false;
  try {
    normalization_alpha(kRef, WindowConfig(5.0 / 3.0));
  } catch (const WindowTooWide&) {
    threw = true;
  }
  return {std::abs(mass - 1.0) < 1e-6 && std::abs(alpha - 1.0) < 1e-12 && threw,
          fmt("quadrature mass %.10f (tol 1e-6), alpha - 1 = %.2e (tol 1e-12), ", mass, alpha - 1.0) +
              (threw ? "tau=5/3 rejected" : "tau=5/3 accepted")};
}

Outcome first_emission_curves() {
  std::ostringstream out, err;
  const int code = cli::run({"analytic", "--gamma-a", "1", "--gamma-b", "1.5", "--tau", "0.8333333333333334",
                             "--n-points", "1000"},
                            out, err);
  if (code != 0)
    return {false, "analytic exited with " + std::to_string(code) + ": " + err.str()};
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  std::size_t rows = 0, ordered = 0, fastest = 0;
  while (std::getline(in, line)) {
    std::vector<double> v;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ','))
      v.push_back(std::stod(cell));
    ++rows;
    ordered += v[1] >= v[2];
    fastest += v[1] >= v[2] && v[1] >= v[3] && v[1] >= v[4];
  }
  return {rows == 1000 && ordered == rows && fastest == rows,
          fmt("%.0f rows, entangled >= product on %.0f, entangled highest on %.0f", static_cast<double>(rows),
              static_cast<double>(ordered), static_cast<double>(fastest))};
}

Outcome discrimination() {
  constexpr std::size_t n = 10000;
  constexpr int trials = 100;
  const WindowConfig window(kRefTau);
  const double keep = 1.0 - coincidence_probability(kRef, window);
  const auto product_pairs = static_cast<std::size_t>(1.2 * static_cast<double>(n) / (2.0 * keep)) + 100;
  int ent_ok = 0, prod_ok = 0;
  for (int k = 0; k < trials; ++k) {
    const auto ent = first_emission_times(
        simulate({n, kRef, PairKind::Entangled, window, 5000 + static_cast<std::uint64_t>(k)}));
    ent_ok += discriminate(ent, kRef, window).preferred == EmissionLaw::Entangled;

    const auto recs = simulate({product_pairs, kRef, PairKind::Product, window, 9000 + static_cast<std::uint64_t>(k)});
    auto prod = one_emission_times(postselect(recs, window).kept);
    if (prod.size() < n)
      return {false, "product run produced too few isolated photons"};
    prod.resize(n);
    prod_ok += discriminate(prod, kRef, window).preferred == EmissionLaw::Product;
  }
  return {ent_ok >= 99 && prod_ok >= 99,
          fmt("entangled correct %.0f/100, product correct %.0f/100 (need >= 99 each)", ent_ok, prod_ok)};
}

Outcome exchange_symmetry() {
  const Grid1D grid(-20.0, 20.0, 256);
  auto phi0 = [](double x) { return Complex(oscillator_orbital(0, x, 1.0)); };
  auto phi1 = [](double x) { return Complex(oscillator_orbital(1, x, 1.0)); };
  const auto psi = antisymmetrize(TwoParticleAmplitude::product(grid, phi0, phi1)).state;
  const double n0f = antisymmetrize(psi).coefficient;
  const auto evolved = free_propagate(psi, 1.0);
  const double defect = symmetry_defects(evolved).antisymmetric;
  const double norm_change = std::abs(evolved.norm() - psi.norm());
  bool raised = false;
  try {
    antisymmetrize(TwoParticleAmplitude::product(grid, phi0, phi0));
  } catch (const DegenerateAntisymmetrization&) {
    raised = true;
  }
  return {std::abs(n0f - 0.5) < 1e-10 && defect < 1e-10 && norm_change < 1e-12 && raised,
          fmt("N0F - 1/2 = %.2e, defect %.2e (tol 1e-10), norm change %.2e (tol 1e-12), ", n0f - 0.5, defect,
              norm_change) +
              (raised ? "symmetric input raised" : "symmetric input accepted")};
}

Outcome determinism(const fs::path& work) {
  fs::create_directories(work);
  std::vector<std::string> contents;
  for (int workers : {1, 2, 8}) {
    const auto path = work / ("records_w" + std::to_string(workers) + ".csv");
    {
      std::ofstream out(path, std::ios::binary);
      write_records_csv(out, entangled_run(workers));
    }
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    contents.push_back(s.str());
  }
  const bool same = contents[0] == contents[1] && contents[0] == contents[2];
  return {same && !contents[0].empty(),
          fmt("1/2/8 workers: %.0f bytes each, ", static_cast<double>(contents[0].size())) +
              (same ? "identical" : "different")};
}

} // namespace

int main(int argc, char** argv) {
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "emkin_acceptance";
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "compatibility", 1, compatibility},
      {2, "kinetics vs closed form", 5, kinetics},
      {3, "entangled exponential law", 30, entangled_law},
      {4, "post-selected product law", 30, product_law},
      {5, "normalization", 0, normalization},
      {6, "first-emission curves", 0, first_emission_curves},
      {7, "discrimination power", 60, discrimination},
      {8, "exchange symmetry", 10, exchange_symmetry},
      {9, "determinism across workers", 0, [&] { return determinism(work); }},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_budget = c.budget_s <= 0 || secs < c.budget_s;
    const bool pass = o.pass && in_budget;
    failures += !pass;
    std::printf("[%s] %d %s: %s; %.2f s%s\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs,
                in_budget ? "" : fmt(" (budget %.0f s)", c.budget_s).c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
