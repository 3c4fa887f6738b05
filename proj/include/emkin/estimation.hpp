#pragma once

// Rate fitting and entangled-vs-product discrimination on first-photon times.

#include "emkin/analytic.hpp"

#include <json.hpp>

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace emkin {

struct FitResult {
  double rate_estimate;
  double std_error;
  double log_likelihood;
  std::size_t n_samples;
};

enum class EmissionLaw { Entangled, Product };

struct ModelComparison {
  double ll_entangled;
  double ll_product;
  EmissionLaw preferred;
  /// ll_entangled - ll_product; entangled is preferred when >= 0.
  double log_likelihood_ratio;
};

/// Exponential MLE: rate = 1 / mean. Throws InvalidData on empty input or a
/// non-positive time.
FitResult mle_exponential(std::span<const double> times);

double log_likelihood_exponential(std::span<const double> times, double rate);

/// Two-sided sup |F_n - F| over the sorted samples.
double ks_distance(std::span<const double> times, const std::function<double(double)>& cdf);

/// Asymptotic KS critical value sqrt(-ln(alpha/2)/2) / sqrt(n).
double ks_critical_value(std::size_t n, double alpha = 0.01);

/// Sum of ln product_first_pdf over the samples, reduced in fixed-size chunks
/// so the result is bit-identical for any thread count. Throws
/// ModelInapplicable if the density is not positive at some sample.
double log_likelihood_product(std::span<const double> times, const NormalizedWindowModel& model);
double log_likelihood_product_serial(std::span<const double> times, const NormalizedWindowModel& model);

/// Compares the entangled law (exponential at gamma_a + gamma_b) with the
/// post-selected product law, both with known rates and window.
ModelComparison discriminate(std::span<const double> times, const RatePair& rates,
                             const WindowConfig& window);

/// Reads the `t_first` column of a CSV with a header row. Throws InvalidData
/// when the column is missing, a value does not parse, or there are no rows.
std::vector<double> read_sample_times(std::istream& in);
void write_sample_times(std::ostream& out, std::span<const double> times);

const char* to_string(EmissionLaw law);

void to_json(nlohmann::json& j, const FitResult& fit);
void to_json(nlohmann::json& j, const ModelComparison& cmp);

} // namespace emkin
