#include "emkin/montecarlo.hpp"

#include "emkin/errors.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <ostream>

namespace emkin {

void SimConfig::validate() const {
  if (n_pairs == 0)
    throw InvalidParameter("n_pairs must be > 0");
}

EmissionRecord sample_entangled_pair(const RatePair& rates, PairStream& rng, std::uint64_t pair_id) {
  const double t_first = rng.exponential(rates.gamma_f());
  // distinguishable channels: probabilities add
  const Channel first = rng.uniform_open() * rates.gamma_f() < rates.gamma_a() ? Channel::A : Channel::B;
  const Channel second = other(first);
  const double t_second = t_first + rng.exponential(rates.gamma(second));
  return {pair_id, t_first, first, t_second, second};
}

EmissionRecord sample_product_pair(const RatePair& rates, PairStream& rng, std::uint64_t pair_id) {
  const double t_a = rng.exponential(rates.gamma_a());
  const double t_b = rng.exponential(rates.gamma_b());
  if (t_a <= t_b)
    return {pair_id, t_a, Channel::A, t_b, Channel::B};
  return {pair_id, t_b, Channel::B, t_a, Channel::A};
}

EmissionRecord sample_pair(const SimConfig& cfg, std::uint64_t pair_id) {
  PairStream rng(cfg.seed, pair_id);
  return cfg.kind == PairKind::Entangled ? sample_entangled_pair(cfg.rates, rng, pair_id)
                                         : sample_product_pair(cfg.rates, rng, pair_id);
}

std::vector<EmissionRecord> simulate_serial(const SimConfig& cfg) {
  cfg.validate();
  std::vector<EmissionRecord> out;
  out.reserve(cfg.n_pairs);
  for (std::size_t i = 0; i < cfg.n_pairs; ++i)
    out.push_back(sample_pair(cfg, i));
  return out;
}

std::vector<EmissionRecord> simulate(const SimConfig& cfg, int workers) {
  cfg.validate();
  std::vector<EmissionRecord> out(cfg.n_pairs);
  const auto n = static_cast<std::int64_t>(cfg.n_pairs);
  const int threads = workers > 0 ? workers : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(threads)
  for (std::int64_t i = 0; i < n; ++i)
    out[static_cast<std::size_t>(i)] = sample_pair(cfg, static_cast<std::uint64_t>(i));
  return out;
}

bool is_coincident(const EmissionRecord& rec, const WindowConfig& window) {
  if (window.mode == WindowMode::GridBin)
    return std::floor(rec.t_first / window.tau) == std::floor(rec.t_second / window.tau);
  return rec.t_second - rec.t_first < window.tau;
}

PostSelection postselect(std::span<const EmissionRecord> records, const WindowConfig& window) {
  PostSelection result;
  result.kept.reserve(records.size());
  for (const auto& r : records) {
    if (is_coincident(r, window))
      ++result.summary.discarded;
    else
      result.kept.push_back(r);
  }
  result.summary.kept = result.kept.size();
  if (!records.empty())
    result.summary.empirical_coincidence_rate =
        static_cast<double>(result.summary.discarded) / static_cast<double>(records.size());
  return result;
}

std::vector<double> one_emission_times(std::span<const EmissionRecord> kept) {
  std::vector<double> times;
  times.reserve(2 * kept.size());
  for (const auto& r : kept) {
    times.push_back(r.t_first);
    times.push_back(r.t_second);
  }
  return times;
}

std::vector<double> first_emission_times(std::span<const EmissionRecord> records) {
  std::vector<double> times;
  times.reserve(records.size());
  for (const auto& r : records)
    times.push_back(r.t_first);
  return times;
}

BinnedSeries empirical_cdf(std::span<const double> samples, std::span<const double> grid) {
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n_grid = static_cast<std::int64_t>(grid.size());
  std::vector<double> values(grid.size(), 0.0);
  const double n = static_cast<double>(sorted.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n_grid; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const auto below = std::upper_bound(sorted.begin(), sorted.end(), grid[idx]) - sorted.begin();
    values[idx] = sorted.empty() ? 0.0 : static_cast<double>(below) / n;
  }
  BinnedSeries series;
  series.time.assign(grid.begin(), grid.end());
  series.add_column("cdf", std::move(values));
  return series;
}

BinnedSeries empirical_first_cdf(std::span<const EmissionRecord> kept, std::span<const double> grid) {
  const auto times = first_emission_times(kept);
  return empirical_cdf(times, grid);
}

ChannelFractions channel_fractions(std::span<const EmissionRecord> records) {
  if (records.empty())
    return {};
  const auto n_a = std::count_if(records.begin(), records.end(),
                                 [](const EmissionRecord& r) { return r.channel_first == Channel::A; });
  const double n = static_cast<double>(records.size());
  return {static_cast<double>(n_a) / n, static_cast<double>(records.size() - static_cast<std::size_t>(n_a)) / n};
}

void write_records_csv(std::ostream& out, std::span<const EmissionRecord> records) {
  out << "pair_id,t_first,channel_first,t_second,channel_second\n";
  std::string line;
  for (const auto& r : records) {
    line.clear();
    line += std::to_string(r.pair_id);
    line += ',';
    line += format_double(r.t_first);
    line += r.channel_first == Channel::A ? ",A," : ",B,";
    line += format_double(r.t_second);
    line += r.channel_second == Channel::A ? ",A\n" : ",B\n";
    out << line;
  }
}

} // namespace emkin
