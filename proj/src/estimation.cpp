#include "emkin/estimation.hpp"

#include "emkin/errors.hpp"
#include "emkin/series.hpp"

#include <omp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace emkin {

namespace {

constexpr std::size_t kChunk = 1 << 14;

void require_samples(std::span<const double> times) {
  if (times.empty())
    throw InvalidData("no samples");
  for (double t : times) {
    if (!(t > 0.0) || !std::isfinite(t)) {
      std::ostringstream msg;
      msg << "sample times must be finite and > 0, got " << t;
      throw InvalidData(msg.str());
    }
  }
}

double log_density(double t, const NormalizedWindowModel& model) {
  const double p = product_first_pdf(t, model);
  return p > 0.0 ? std::log(p) : std::nan("");
}

[[noreturn]] void throw_inapplicable(double t, const NormalizedWindowModel& model) {
  std::ostringstream msg;
  msg.precision(17);
  msg << "product-state density is not positive at t = " << t << " (pdf = " << product_first_pdf(t, model)
      << ", tau = " << model.window.tau << ")";
  throw ModelInapplicable(msg.str());
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos)
      break;
    start = comma + 1;
  }
  return fields;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

} // namespace

FitResult mle_exponential(std::span<const double> times) {
  require_samples(times);
  double sum = 0.0;
  for (double t : times)
    sum += t;
  const double n = static_cast<double>(times.size());
  const double rate = n / sum;
  return {rate, rate / std::sqrt(n), log_likelihood_exponential(times, rate), times.size()};
}

double log_likelihood_exponential(std::span<const double> times, double rate) {
  double sum = 0.0;
  for (double t : times)
    sum += t;
  return static_cast<double>(times.size()) * std::log(rate) - rate * sum;
}

double ks_distance(std::span<const double> times, const std::function<double(double)>& cdf) {
  if (times.empty())
    throw InvalidData("no samples");
  std::vector<double> sorted(times.begin(), times.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_critical_value(std::size_t n, double alpha) {
  return std::sqrt(-0.5 * std::log(0.5 * alpha)) / std::sqrt(static_cast<double>(n));
}

double log_likelihood_product(std::span<const double> times, const NormalizedWindowModel& model) {
  require_samples(times);
  const std::size_t n_chunks = (times.size() + kChunk - 1) / kChunk;
  std::vector<double> partial(n_chunks, 0.0);
  const auto chunks = static_cast<std::int64_t>(n_chunks);
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < chunks; ++c) {
    const std::size_t lo = static_cast<std::size_t>(c) * kChunk;
    const std::size_t hi = std::min(times.size(), lo + kChunk);
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i)
      s += log_density(times[i], model);
    partial[static_cast<std::size_t>(c)] = s;
  }
  double total = 0.0;
  for (double s : partial)
    total += s;
  if (std::isnan(total)) {
    for (double t : times)
      if (!(product_first_pdf(t, model) > 0.0))
        throw_inapplicable(t, model);
  }
  return total;
}

double log_likelihood_product_serial(std::span<const double> times, const NormalizedWindowModel& model) {
  require_samples(times);
  double total = 0.0;
  for (double t : times) {
    const double p = product_first_pdf(t, model);
    if (!(p > 0.0))
      throw_inapplicable(t, model);
    total += std::log(p);
  }
  return total;
}

ModelComparison discriminate(std::span<const double> times, const RatePair& rates,
                             const WindowConfig& window) {
  require_samples(times);
  const auto model = normalization_alpha(rates, window);
  const double ll_e = log_likelihood_exponential(times, rates.gamma_f());
  const double ll_p = log_likelihood_product(times, model);
  const double ratio = ll_e - ll_p;
  return {ll_e, ll_p, ratio >= 0.0 ? EmissionLaw::Entangled : EmissionLaw::Product, ratio};
}

std::vector<double> read_sample_times(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line).empty())
    throw InvalidData("empty sample file: expected a header row with a t_first column");
  const auto header = split(line);
  const auto it = std::find_if(header.begin(), header.end(),
                               [](std::string_view h) { return trim(h) == "t_first"; });
  if (it == header.end())
    throw InvalidData("sample file header has no t_first column");
  const auto col = static_cast<std::size_t>(it - header.begin());

  std::vector<double> times;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty())
      continue;
    const auto fields = split(line);
    if (col >= fields.size())
      throw InvalidData("line " + std::to_string(line_no) + ": missing t_first field");
    const auto field = trim(fields[col]);
    double value = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
    if (res.ec != std::errc{} || res.ptr != field.data() + field.size())
      throw InvalidData("line " + std::to_string(line_no) + ": cannot parse '" + std::string(field) + "'");
    times.push_back(value);
  }
  if (times.empty())
    throw InvalidData("sample file has no data rows");
  return times;
}

void write_sample_times(std::ostream& out, std::span<const double> times) {
  out << "t_first\n";
  for (double t : times)
    out << format_double(t) << '\n';
}

const char* to_string(EmissionLaw law) { return law == EmissionLaw::Entangled ? "entangled" : "product"; }

void to_json(nlohmann::json& j, const FitResult& fit) {
  j = nlohmann::json{{"rate_estimate", fit.rate_estimate},
                     {"std_error", fit.std_error},
                     {"log_likelihood", fit.log_likelihood},
                     {"n_samples", fit.n_samples}};
}

void to_json(nlohmann::json& j, const ModelComparison& cmp) {
  j = nlohmann::json{{"ll_entangled", cmp.ll_entangled},
                     {"ll_product", cmp.ll_product},
                     {"preferred", to_string(cmp.preferred)},
                     {"log_likelihood_ratio", cmp.log_likelihood_ratio}};
}

} // namespace emkin
