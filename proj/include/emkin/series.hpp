#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace emkin {

/// Time grid plus named value columns, written as CSV.
struct BinnedSeries {
  std::vector<double> time;
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;

  void add_column(std::string name, std::vector<double> values);
  const std::vector<double>& column(const std::string& name) const;

  /// Header `t,<names...>`, one row per time point, 17 significant digits.
  void write_csv(std::ostream& out) const;
};

/// Locale-independent %.17g.
std::string format_double(double value);

/// n points uniformly spaced on [t0, t1] including both ends.
std::vector<double> uniform_grid(double t0, double t1, std::size_t n);

} // namespace emkin
