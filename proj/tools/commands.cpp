#include "commands.hpp"

#include "emkin/analytic.hpp"
#include "emkin/errors.hpp"
#include "emkin/estimation.hpp"
#include "emkin/kinetics.hpp"
#include "emkin/montecarlo.hpp"
#include "emkin/series.hpp"
#include "emkin/wavefunction.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#ifndef EMKIN_VERSION
#define EMKIN_VERSION "0.0.0"
#endif

namespace emkin::cli {

namespace {

using nlohmann::json;

const std::map<std::string, WindowMode> kModes{{"grid-bin", WindowMode::GridBin},
                                               {"pairwise", WindowMode::Pairwise}};
const std::map<std::string, WindowVariant> kVariants{{"taylor", WindowVariant::Taylor},
                                                     {"exact", WindowVariant::Exact}};
const std::map<std::string, PairKind> kKinds{{"entangled", PairKind::Entangled},
                                             {"product", PairKind::Product}};

template <class Map>
std::string key_of(const Map& m, typename Map::mapped_type v) {
  for (const auto& [k, val] : m)
    if (val == v)
      return k;
  return "";
}

/// Parameters in declaration order; replayed as --name=value.
struct Manifest {
  std::string subcommand;
  std::vector<std::pair<std::string, std::string>> params;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> outputs;

  void add(const std::string& name, double v) { params.emplace_back(name, format_double(v)); }
  void add(const std::string& name, const std::string& v) { params.emplace_back(name, v); }
  void add(const std::string& name, std::uint64_t v) { params.emplace_back(name, std::to_string(v)); }
  void add(const std::string& name, bool v) { params.emplace_back(name, v ? "true" : "false"); }

  json to_json() const {
    json p = json::object();
    json argv = json::array({subcommand});
    for (const auto& [k, v] : params) {
      p[k] = v;
      argv.push_back("--" + k + "=" + v);
    }
    json j{{"subcommand", subcommand},
           {"version", EMKIN_VERSION},
           {"parameters", p},
           {"argv", argv},
           {"outputs", outputs}};
    j["seed"] = seed ? json(*seed) : json(nullptr);
    return j;
  }
};

class Output {
public:
  Output(const std::string& path, std::ostream& fallback) : path_(path) {
    if (path == "-") {
      stream_ = &fallback;
    } else {
      file_.open(path, std::ios::binary | std::ios::trunc);
      if (!file_)
        throw InvalidParameter("cannot open output file '" + path + "'");
      stream_ = &file_;
    }
  }
  std::ostream& stream() { return *stream_; }
  void close() {
    if (file_.is_open()) {
      file_.close();
      if (!file_)
        throw std::runtime_error("failed writing '" + path_ + "'");
    } else {
      stream_->flush();
    }
  }

private:
  std::string path_;
  std::ofstream file_;
  std::ostream* stream_;
};

void write_json(const std::string& path, const json& j, std::ostream& fallback) {
  Output o(path, fallback);
  o.stream() << j.dump(2) << '\n';
  o.close();
}

/// Manifest goes next to the primary output; stdout runs have none unless asked.
void write_manifest(Manifest m, const std::string& primary, const std::string& explicit_path,
                    std::ostream& out) {
  std::string path = explicit_path;
  if (path.empty()) {
    if (primary == "-")
      return;
    path = primary + ".manifest.json";
  }
  write_json(path, m.to_json(), out);
}

struct RateFlags {
  double gamma_a = 1.0;
  double gamma_b = 1.5;
  double tau = 0.1;
  std::string mode = "grid-bin";
  std::string variant = "taylor";
};

void add_rate_flags(CLI::App* sub, RateFlags& f, bool with_window, bool with_variant) {
  sub->add_option("--gamma-a", f.gamma_a, "Single-atom emission rate of atom A")->capture_default_str();
  sub->add_option("--gamma-b", f.gamma_b, "Single-atom emission rate of atom B")->capture_default_str();
  if (with_window) {
    sub->add_option("--tau", f.tau, "Coincidence window width")->capture_default_str();
    sub->add_option("--mode", f.mode, "Post-selection window mode")
        ->check(CLI::IsMember({"grid-bin", "pairwise"}))
        ->capture_default_str();
  }
  if (with_variant)
    sub->add_option("--window-variant", f.variant, "Window probability expression")
        ->check(CLI::IsMember({"taylor", "exact"}))
        ->capture_default_str();
}

void record_rates(Manifest& m, const RateFlags& f, bool with_window, bool with_variant) {
  m.add("gamma-a", f.gamma_a);
  m.add("gamma-b", f.gamma_b);
  if (with_window) {
    m.add("tau", f.tau);
    m.add("mode", f.mode);
  }
  if (with_variant)
    m.add("window-variant", f.variant);
}

// ---- analytic -------------------------------------------------------------

struct AnalyticArgs {
  RateFlags rates{.tau = 5.0 / 6.0};
  double t_max = 0.0;
  std::size_t n_points = 1000;
  std::string out = "-";
  std::string manifest;
};

int cmd_analytic(const AnalyticArgs& a, std::ostream& out) {
  const RatePair rates(a.rates.gamma_a, a.rates.gamma_b);
  const WindowConfig window(a.rates.tau, kModes.at(a.rates.mode));
  const double t_max = a.t_max > 0.0 ? a.t_max : 8.0 / std::min(rates.gamma_a(), rates.gamma_b());
  if (a.n_points < 2)
    throw InvalidParameter("--n-points must be >= 2");

  const auto grid = uniform_grid(0.0, t_max, a.n_points);
  std::vector<double> nf_e, nf_p, n_a, n_b;
  std::function<double(double)> product_cdf;
  std::optional<ExactWindowProductLaw> exact;
  if (kVariants.at(a.rates.variant) == WindowVariant::Taylor) {
    const auto model = normalization_alpha(rates, window);
    product_cdf = [model](double t) { return product_first_cdf(t, model); };
  } else {
    exact.emplace(rates, window);
    product_cdf = [&exact](double t) { return exact->cdf(t); };
  }
  for (double t : grid) {
    nf_e.push_back(first_emission_cdf_entangled(t, rates));
    nf_p.push_back(product_cdf(t));
    n_a.push_back(single_type_cdf(t, rates.gamma_a()));
    n_b.push_back(single_type_cdf(t, rates.gamma_b()));
  }
  BinnedSeries series;
  series.time = grid;
  series.add_column("nf_entangled", std::move(nf_e));
  series.add_column("nf_product", std::move(nf_p));
  series.add_column("n_a", std::move(n_a));
  series.add_column("n_b", std::move(n_b));

  Output o(a.out, out);
  series.write_csv(o.stream());
  o.close();

  Manifest m{"analytic", {}, std::nullopt, {a.out}};
  record_rates(m, a.rates, true, true);
  m.add("t-max", t_max);
  m.add("n-points", static_cast<std::uint64_t>(a.n_points));
  m.add("out", a.out);
  write_manifest(m, a.out, a.manifest, out);
  return kSuccess;
}

// ---- simulate -------------------------------------------------------------

struct SimulateArgs {
  RateFlags rates;
  std::string kind = "entangled";
  std::size_t n_pairs = 100000;
  std::uint64_t seed = 1;
  int workers = 0;
  std::string out;
  std::string summary;
  std::string samples;
  std::string manifest;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  const SimConfig cfg{a.n_pairs, RatePair(a.rates.gamma_a, a.rates.gamma_b), kKinds.at(a.kind),
                      WindowConfig(a.rates.tau, kModes.at(a.rates.mode)), a.seed};
  const auto records = simulate(cfg, a.workers);

  PostSelection selection;
  std::vector<double> samples;
  if (cfg.kind == PairKind::Product) {
    selection = postselect(records, cfg.window);
    samples = one_emission_times(selection.kept);
  } else {
    selection.summary = {records.size(), 0, 0.0};
    samples = first_emission_times(records);
  }
  const auto channels = channel_fractions(records);

  const std::string summary_path = a.summary.empty() ? a.out + ".summary.json" : a.summary;
  const std::string samples_path = a.samples.empty() ? a.out + ".samples.csv" : a.samples;

  {
    Output o(a.out, out);
    write_records_csv(o.stream(), records);
    o.close();
  }
  {
    Output o(samples_path, out);
    write_sample_times(o.stream(), samples);
    o.close();
  }
  json summary{{"kind", a.kind},
               {"n_pairs", cfg.n_pairs},
               {"kept", selection.summary.kept},
               {"discarded", selection.summary.discarded},
               {"empirical_coincidence_rate", selection.summary.empirical_coincidence_rate},
               {"channel_a_fraction", channels.a},
               {"channel_b_fraction", channels.b},
               {"n_samples", samples.size()}};
  if (cfg.kind == PairKind::Product)
    summary["expected_coincidence_rate"] = coincidence_probability(cfg.rates, cfg.window);
  write_json(summary_path, summary, out);

  Manifest m{"simulate", {}, a.seed, {a.out, summary_path, samples_path}};
  record_rates(m, a.rates, true, false);
  m.add("kind", a.kind);
  m.add("n-pairs", static_cast<std::uint64_t>(a.n_pairs));
  m.add("seed", a.seed);
  m.add("out", a.out);
  m.add("summary", summary_path);
  m.add("samples", samples_path);
  write_manifest(m, a.out, a.manifest, out);
  return kSuccess;
}

// ---- fit / discriminate ---------------------------------------------------

std::vector<double> load_samples(const std::string& path) {
  if (path == "-")
    return read_sample_times(std::cin);
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw InvalidData("cannot open sample file '" + path + "'");
  return read_sample_times(in);
}

ModelComparison compare(const std::vector<double>& times, const RateFlags& f) {
  const RatePair rates(f.gamma_a, f.gamma_b);
  const WindowConfig window(f.tau, kModes.at(f.mode));
  if (kVariants.at(f.variant) == WindowVariant::Taylor)
    return discriminate(times, rates, window);
  const ExactWindowProductLaw law(rates, window);
  double ll_p = 0.0;
  for (double t : times) {
    const double p = law.pdf(t);
    if (!(p > 0.0))
      throw ModelInapplicable("exact-window product density is not positive at t = " + format_double(t));
    ll_p += std::log(p);
  }
  const double ll_e = log_likelihood_exponential(times, rates.gamma_f());
  return {ll_e, ll_p, ll_e - ll_p >= 0.0 ? EmissionLaw::Entangled : EmissionLaw::Product, ll_e - ll_p};
}

struct FitArgs {
  RateFlags rates{.tau = 5.0 / 6.0};
  std::string in = "-";
  std::string out = "-";
  bool compare = false;
  std::string manifest;
};

int cmd_fit(const FitArgs& a, bool comparison_only, std::ostream& out) {
  const auto times = load_samples(a.in);
  json result = json::object();
  if (!comparison_only)
    result["fit"] = mle_exponential(times);
  if (comparison_only || a.compare)
    result["comparison"] = compare(times, a.rates);
  write_json(a.out, result, out);

  Manifest m{comparison_only ? "discriminate" : "fit", {}, std::nullopt, {a.out}};
  m.add("in", a.in);
  if (comparison_only || a.compare)
    record_rates(m, a.rates, true, true);
  if (!comparison_only)
    m.add("compare", a.compare);
  m.add("out", a.out);
  write_manifest(m, a.out, a.manifest, out);
  return kSuccess;
}

// ---- kinetics -------------------------------------------------------------

struct KineticsArgs {
  RateFlags rates;
  double step = 1e-3;
  double t_end = 4.0;
  double n_0 = 1.0;
  int stride = 1;
  double gamma_f_scale = 1.0;
  std::string out = "-";
  std::string manifest;
};

int cmd_kinetics(const KineticsArgs& a, std::ostream& out) {
  const RatePair rates(a.rates.gamma_a, a.rates.gamma_b);
  auto channels = ChannelRates::compatible(rates);
  channels.gamma_f *= a.gamma_f_scale;
  const IntegratorConfig cfg{a.step, a.t_end, a.n_0, a.stride};
  const auto states = integrate(KineticsState::initial(a.n_0), rates, cfg, channels);

  BinnedSeries series;
  std::vector<double> n_e, n_a, n_b, cap_a, cap_b, cap_f;
  for (const auto& s : states) {
    series.time.push_back(s.t);
    n_e.push_back(s.n_e);
    n_a.push_back(s.n_a);
    n_b.push_back(s.n_b);
    cap_a.push_back(s.cap_n_a);
    cap_b.push_back(s.cap_n_b);
    cap_f.push_back(s.cap_n_f);
  }
  series.add_column("n_e", std::move(n_e));
  series.add_column("n_a", std::move(n_a));
  series.add_column("n_b", std::move(n_b));
  series.add_column("cap_n_a", std::move(cap_a));
  series.add_column("cap_n_b", std::move(cap_b));
  series.add_column("cap_n_f", std::move(cap_f));
  Output o(a.out, out);
  series.write_csv(o.stream());
  o.close();

  Manifest m{"kinetics", {}, std::nullopt, {a.out}};
  record_rates(m, a.rates, false, false);
  m.add("step", a.step);
  m.add("t-end", a.t_end);
  m.add("n0", a.n_0);
  m.add("stride", static_cast<std::uint64_t>(a.stride));
  m.add("gamma-f-scale", a.gamma_f_scale);
  m.add("out", a.out);
  write_manifest(m, a.out, a.manifest, out);
  return kSuccess;
}

// ---- wavefunction ---------------------------------------------------------

struct WavefunctionArgs {
  std::string check = "antisymmetry-preservation";
  std::size_t n = 256;
  double x_min = -20.0;
  double x_max = 20.0;
  double time = 1.0;
  double sigma = 1.0;
  std::string in;
  std::string export_path;
  std::string out = "-";
  std::string manifest;
};

TwoParticleAmplitude slater(const Grid1D& grid, double sigma) {
  auto phi0 = [sigma](double x) { return Complex(oscillator_orbital(0, x, sigma)); };
  auto phi1 = [sigma](double x) { return Complex(oscillator_orbital(1, x, sigma)); };
  return antisymmetrize(TwoParticleAmplitude::product(grid, phi0, phi1)).state;
}

int cmd_wavefunction(const WavefunctionArgs& a, std::ostream& out) {
  const Grid1D grid(a.x_min, a.x_max, a.n);
  json report{{"check", a.check}, {"n", a.n}, {"x_min", a.x_min}, {"x_max", a.x_max}};
  bool pass = false;
  std::optional<TwoParticleAmplitude> final_state;

  try {
    if (a.check == "antisymmetry-preservation") {
      const auto psi = slater(grid, a.sigma);
      const auto evolved = free_propagate(psi, a.time);
      const auto before = symmetry_defects(psi);
      const auto after = symmetry_defects(evolved);
      report["time"] = a.time;
      report["antisymmetric_defect_initial"] = before.antisymmetric;
      report["antisymmetric_defect_final"] = after.antisymmetric;
      report["norm_change"] = std::abs(evolved.norm() - psi.norm());
      report["tolerance"] = 1e-10;
      pass = after.antisymmetric < 1e-10;
      final_state = evolved;
    } else if (a.check == "norm-preservation") {
      const auto psi = slater(grid, a.sigma);
      const auto evolved = free_propagate(psi, a.time);
      report["time"] = a.time;
      report["norm_initial"] = psi.norm();
      report["norm_final"] = evolved.norm();
      report["tolerance"] = 1e-12;
      pass = std::abs(evolved.norm() - psi.norm()) < 1e-12;
      final_state = evolved;
    } else if (a.check == "n0f-antisymmetric") {
      const auto psi = slater(grid, a.sigma);
      const auto result = antisymmetrize(psi);
      report["swap_overlap_re"] = swap_overlap(psi).real();
      report["swap_overlap_im"] = swap_overlap(psi).imag();
      report["n0f"] = result.coefficient;
      report["expected_n0f"] = 0.5;
      report["tolerance"] = 1e-10;
      pass = std::abs(result.coefficient - 0.5) < 1e-10;
      final_state = result.state;
    } else if (a.check == "n0f-symmetric-input") {
      auto phi0 = [s = a.sigma](double x) { return Complex(oscillator_orbital(0, x, s)); };
      const auto psi = TwoParticleAmplitude::product(grid, phi0, phi0).normalized();
      report["swap_overlap_re"] = swap_overlap(psi).real();
      final_state = psi;
      antisymmetrize(psi);
      pass = true;
    } else if (a.check == "gaussian-spreading") {
      auto phi0 = [s = a.sigma](double x) { return Complex(oscillator_orbital(0, x, s)); };
      const auto psi = TwoParticleAmplitude::product(grid, phi0, phi0).normalized();
      const auto evolved = free_propagate(psi, a.time);
      const double expected = a.sigma * std::sqrt(1.0 + a.time * a.time / std::pow(a.sigma, 4));
      report["time"] = a.time;
      report["width_final"] = marginal_width_x(evolved);
      report["width_expected"] = expected;
      report["tolerance"] = 1e-8;
      pass = std::abs(marginal_width_x(evolved) - expected) < 1e-8;
      final_state = evolved;
    } else if (a.check == "defects") {
      if (a.in.empty())
        throw InvalidParameter("check 'defects' needs --in <amplitude file>");
      std::ifstream in(a.in, std::ios::binary);
      if (!in)
        throw InvalidData("cannot open amplitude file '" + a.in + "'");
      const auto psi = read_amplitude(in);
      const auto d = symmetry_defects(psi);
      report["n"] = psi.grid().n;
      report["norm"] = psi.norm();
      report["symmetric_defect"] = d.symmetric;
      report["antisymmetric_defect"] = d.antisymmetric;
      report["swap_overlap_re"] = swap_overlap(psi).real();
      report["swap_overlap_im"] = swap_overlap(psi).imag();
      pass = true;
    } else {
      throw InvalidParameter("unknown check '" + a.check + "'");
    }
  } catch (const DegenerateAntisymmetrization& e) {
    report["error"] = e.what();
    pass = false;
  }
  report["pass"] = pass;
  write_json(a.out, report, out);

  std::vector<std::string> outputs{a.out};
  if (!a.export_path.empty() && final_state) {
    Output o(a.export_path, out);
    write_amplitude(o.stream(), *final_state);
    o.close();
    outputs.push_back(a.export_path);
  }

  Manifest m{"wavefunction", {}, std::nullopt, outputs};
  m.add("check", a.check);
  m.add("n", static_cast<std::uint64_t>(a.n));
  m.add("x-min", a.x_min);
  m.add("x-max", a.x_max);
  m.add("time", a.time);
  m.add("sigma", a.sigma);
  if (!a.in.empty())
    m.add("in", a.in);
  if (!a.export_path.empty())
    m.add("export", a.export_path);
  m.add("out", a.out);
  write_manifest(m, a.out, a.manifest, out);
  return pass ? kSuccess : kFailure;
}

std::vector<std::string> replay_args(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw InvalidData("cannot open manifest '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw InvalidData(std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!j.contains("argv") || !j["argv"].is_array() || j["argv"].empty())
    throw InvalidData("manifest has no argv array");
  auto args = j["argv"].get<std::vector<std::string>>();
  if (args.front() == "replay")
    throw InvalidData("manifest cannot replay itself");
  return args;
}

// Inserts `--key=value` for each config-file entry not already given on the command line.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::string path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size())
      path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0)
      path = args[i].substr(9);
  }
  if (path.empty())
    return args;
  std::ifstream probe(path);
  if (!probe)
    throw InvalidData("cannot open config file '" + path + "'");
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigINI().from_file(path);
  } catch (const CLI::Error& e) {
    throw InvalidData("cannot parse config file '" + path + "': " + e.what());
  }
  const auto given = [&](const std::string& name) {
    const auto flag = "--" + name;
    return std::any_of(args.begin() + 1, args.end(),
                       [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
  };
  std::vector<std::string> expanded{args.front()};
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--" || item.inputs.empty())
      continue;
    if (!item.parents.empty() && item.parents != std::vector<std::string>{args.front()})
      continue;
    if (given(item.name))
      continue;
    expanded.push_back("--" + item.name + "=" + CLI::detail::join(item.inputs, ","));
  }
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config") {
      ++i;
      continue;
    }
    if (args[i].rfind("--config=", 0) != 0)
      expanded.push_back(args[i]);
  }
  return expanded;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, int depth);

int parse_and_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, int depth) {
  CLI::App app{"Emission kinetics of entangled and product-state atom pairs", "emkin"};
  app.require_subcommand(1);
  app.set_version_flag("--version", EMKIN_VERSION);

  AnalyticArgs analytic;
  auto* s_analytic = app.add_subcommand("analytic", "First-emission curves N_f, N_f^p, N_A, N_B as CSV");
  add_rate_flags(s_analytic, analytic.rates, true, true);
  s_analytic->add_option("--t-max", analytic.t_max, "End of the time grid (default 8/min(gamma_a, gamma_b))");
  s_analytic->add_option("--n-points", analytic.n_points, "Number of grid points")->capture_default_str();
  s_analytic->add_option("--out", analytic.out, "Output CSV ('-' for stdout)")->capture_default_str();
  s_analytic->add_option("--manifest", analytic.manifest, "Run manifest path");

  SimulateArgs sim;
  auto* s_sim = app.add_subcommand("simulate", "Monte Carlo pair histories with post-selection");
  add_rate_flags(s_sim, sim.rates, true, false);
  s_sim->add_option("--kind", sim.kind, "Initial state")
      ->check(CLI::IsMember({"entangled", "product"}))
      ->capture_default_str();
  s_sim->add_option("--n-pairs", sim.n_pairs, "Number of pairs")->capture_default_str();
  s_sim->add_option("--seed", sim.seed, "Random seed")->capture_default_str();
  s_sim->add_option("--workers", sim.workers, "OpenMP threads (0 = default); output does not depend on it");
  s_sim->add_option("--out", sim.out, "Records CSV")->required();
  s_sim->add_option("--summary", sim.summary, "Summary JSON (default <out>.summary.json)");
  s_sim->add_option("--samples", sim.samples, "Post-selected emission times CSV (default <out>.samples.csv)");
  s_sim->add_option("--manifest", sim.manifest, "Run manifest path");

  FitArgs fit;
  auto* s_fit = app.add_subcommand("fit", "Exponential MLE of sample times, optionally with model comparison");
  add_rate_flags(s_fit, fit.rates, true, true);
  s_fit->add_option("--in", fit.in, "Sample CSV with a t_first column ('-' for stdin)")->capture_default_str();
  s_fit->add_option("--out", fit.out, "Result JSON ('-' for stdout)")->capture_default_str();
  s_fit->add_flag("--compare", fit.compare, "Also compare entangled and product laws");
  s_fit->add_option("--manifest", fit.manifest, "Run manifest path");

  FitArgs disc;
  auto* s_disc = app.add_subcommand("discriminate", "Entangled vs product law on sample times");
  add_rate_flags(s_disc, disc.rates, true, true);
  s_disc->add_option("--in", disc.in, "Sample CSV with a t_first column ('-' for stdin)")->capture_default_str();
  s_disc->add_option("--out", disc.out, "Result JSON ('-' for stdout)")->capture_default_str();
  s_disc->add_option("--manifest", disc.manifest, "Run manifest path");

  KineticsArgs kin;
  auto* s_kin = app.add_subcommand("kinetics", "Integrate the population rate equations (RK4)");
  add_rate_flags(s_kin, kin.rates, false, false);
  s_kin->add_option("--step", kin.step, "Integrator step")->capture_default_str();
  s_kin->add_option("--t-end", kin.t_end, "Final time")->capture_default_str();
  s_kin->add_option("--n0", kin.n_0, "Initial number of entangled pairs")->capture_default_str();
  s_kin->add_option("--stride", kin.stride, "Write every k-th step")->capture_default_str();
  s_kin->add_option("--gamma-f-scale", kin.gamma_f_scale, "Multiply the first-emission rate (probe)")
      ->capture_default_str();
  s_kin->add_option("--out", kin.out, "Output CSV ('-' for stdout)")->capture_default_str();
  s_kin->add_option("--manifest", kin.manifest, "Run manifest path");

  WavefunctionArgs wf;
  auto* s_wf = app.add_subcommand("wavefunction", "Exchange-symmetry checks on two-particle amplitudes");
  s_wf->add_option("--check", wf.check, "Check to run")
      ->check(CLI::IsMember({"antisymmetry-preservation", "norm-preservation", "n0f-antisymmetric",
                             "n0f-symmetric-input", "gaussian-spreading", "defects"}))
      ->capture_default_str();
  s_wf->add_option("--n", wf.n, "Grid points per axis")->capture_default_str();
  s_wf->add_option("--x-min", wf.x_min, "Grid start")->capture_default_str();
  s_wf->add_option("--x-max", wf.x_max, "Grid end")->capture_default_str();
  s_wf->add_option("--time", wf.time, "Propagation time")->capture_default_str();
  s_wf->add_option("--sigma", wf.sigma, "Orbital width")->capture_default_str();
  s_wf->add_option("--in", wf.in, "Amplitude file for --check defects");
  s_wf->add_option("--export", wf.export_path, "Write the resulting amplitude here");
  s_wf->add_option("--out", wf.out, "Report JSON ('-' for stdout)")->capture_default_str();
  s_wf->add_option("--manifest", wf.manifest, "Run manifest path");

  std::string manifest_path;
  auto* s_replay = app.add_subcommand("replay", "Re-run the invocation recorded in a manifest");
  s_replay->add_option("manifest", manifest_path, "Manifest JSON")->required();

  std::string config_path;
  for (auto* sub : {s_analytic, s_sim, s_fit, s_disc, s_kin, s_wf})
    sub->add_option("--config", config_path, "key = value parameter file; flags override it");

  const auto expanded = args.empty() ? args : expand_config(args);
  try {
    std::vector<std::string> reversed(expanded.rbegin(), expanded.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kInvalidParameters;
  }

  if (s_analytic->parsed())
    return cmd_analytic(analytic, out);
  if (s_sim->parsed())
    return cmd_simulate(sim, out);
  if (s_fit->parsed())
    return cmd_fit(fit, false, out);
  if (s_disc->parsed())
    return cmd_fit(disc, true, out);
  if (s_kin->parsed())
    return cmd_kinetics(kin, out);
  if (s_wf->parsed())
    return cmd_wavefunction(wf, out);
  if (depth > 0)
    throw InvalidData("nested replay");
  return dispatch(replay_args(manifest_path), out, err, depth + 1);
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, int depth) {
  try {
    return parse_and_run(args, out, err, depth);
  } catch (const InvalidParameter& e) {
    err << "invalid parameters: " << e.what() << '\n';
    return kInvalidParameters;
  } catch (const InvalidData& e) {
    err << "invalid data: " << e.what() << '\n';
    return kInvalidData;
  } catch (const ModelInapplicable& e) {
    err << "model inapplicable: " << e.what() << '\n';
    return kModelInapplicable;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  return dispatch(args, out, err, 0);
}

} // namespace emkin::cli
