#pragma once

// Monte Carlo histories of atom pairs prepared either entangled or in a
// product state, with coincidence-window post-selection.
//
// simulate() is the OpenMP kernel; simulate_serial() is the reference it must
// reproduce bit for bit.

#include "emkin/analytic.hpp"
#include "emkin/rng.hpp"
#include "emkin/series.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace emkin {

enum class PairKind { Entangled, Product };

struct EmissionRecord {
  std::uint64_t pair_id;
  double t_first;
  Channel channel_first;
  double t_second;
  Channel channel_second;
};

struct SimConfig {
  std::size_t n_pairs;
  RatePair rates;
  PairKind kind;
  WindowConfig window;
  std::uint64_t seed;

  void validate() const;
};

struct PostSelectionSummary {
  std::size_t kept = 0;
  std::size_t discarded = 0;
  double empirical_coincidence_rate = 0.0;
};

struct PostSelection {
  std::vector<EmissionRecord> kept;
  PostSelectionSummary summary;
};

struct ChannelFractions {
  double a = 0.0;
  double b = 0.0;
};

/// First emission at rate gamma_a + gamma_b in channel A with probability
/// gamma_a / (gamma_a + gamma_b); the surviving atom then decays at its own
/// single-atom rate.
EmissionRecord sample_entangled_pair(const RatePair& rates, PairStream& rng, std::uint64_t pair_id = 0);

/// Two independent single-atom decays, ordered by time (ties go to A).
EmissionRecord sample_product_pair(const RatePair& rates, PairStream& rng, std::uint64_t pair_id = 0);

EmissionRecord sample_pair(const SimConfig& cfg, std::uint64_t pair_id);

std::vector<EmissionRecord> simulate_serial(const SimConfig& cfg);
/// workers <= 0 uses the OpenMP default.
std::vector<EmissionRecord> simulate(const SimConfig& cfg, int workers = 0);

bool is_coincident(const EmissionRecord& rec, const WindowConfig& window);

PostSelection postselect(std::span<const EmissionRecord> records, const WindowConfig& window);

/// Emission times that the one-emission law describes: both photons of every
/// record, since each is alone in its window once coincidences are removed.
std::vector<double> one_emission_times(std::span<const EmissionRecord> kept);
std::vector<double> first_emission_times(std::span<const EmissionRecord> records);

/// Fraction of samples <= each grid point. Column name `cdf`.
BinnedSeries empirical_cdf(std::span<const double> samples, std::span<const double> grid);
/// Empirical CDF of t_first over the kept records.
BinnedSeries empirical_first_cdf(std::span<const EmissionRecord> kept, std::span<const double> grid);

ChannelFractions channel_fractions(std::span<const EmissionRecord> records);

/// Header `pair_id,t_first,channel_first,t_second,channel_second`.
void write_records_csv(std::ostream& out, std::span<const EmissionRecord> records);

} // namespace emkin
