#include "emkin/series.hpp"

#include "emkin/errors.hpp"

#include <charconv>
#include <ostream>

namespace emkin {

void BinnedSeries::add_column(std::string name, std::vector<double> values) {
  if (values.size() != time.size())
    throw InvalidParameter("column '" + name + "' length does not match the time grid");
  names.push_back(std::move(name));
  columns.push_back(std::move(values));
}

const std::vector<double>& BinnedSeries::column(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name)
      return columns[i];
  throw InvalidParameter("no column named '" + name + "'");
}

void BinnedSeries::write_csv(std::ostream& out) const {
  out << 't';
  for (const auto& n : names)
    out << ',' << n;
  out << '\n';
  for (std::size_t r = 0; r < time.size(); ++r) {
    out << format_double(time[r]);
    for (const auto& c : columns)
      out << ',' << format_double(c[r]);
    out << '\n';
  }
}

std::string format_double(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  return {buf, res.ptr};
}

std::vector<double> uniform_grid(double t0, double t1, std::size_t n) {
  std::vector<double> grid(n);
  if (n == 1) {
    grid[0] = t0;
    return grid;
  }
  const double h = (t1 - t0) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i)
    grid[i] = t0 + h * static_cast<double>(i);
  if (n > 1)
    grid.back() = t1;
  return grid;
}

} // namespace emkin
