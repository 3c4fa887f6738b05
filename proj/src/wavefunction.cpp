#include "emkin/wavefunction.hpp"

#include "emkin/errors.hpp"
#include "emkin/series.hpp"

#include <fftw3.h>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <memory>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

namespace emkin {

namespace {

double weighted_norm(const Grid1D& g, std::span<const Complex> v) {
  double s = 0.0;
  for (std::size_t i = 0; i < g.n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < g.n; ++j)
      row += g.weight(j) * std::norm(v[i * g.n + j]);
    s += g.weight(i) * row;
  }
  return std::sqrt(s);
}

struct PlanDeleter {
  void operator()(fftw_plan_s* p) const noexcept { fftw_destroy_plan(p); }
};
using Plan = std::unique_ptr<fftw_plan_s, PlanDeleter>;

Plan make_plan(std::size_t n, Complex* data, int sign) {
  auto* buf = reinterpret_cast<fftw_complex*>(data);
  const int dim = static_cast<int>(n);
  return Plan(fftw_plan_dft_2d(dim, dim, buf, buf, sign, FFTW_ESTIMATE));
}

double wavenumber(std::size_t m, std::size_t n, double period) {
  const auto signed_m = m <= n / 2 ? static_cast<double>(m) : static_cast<double>(m) - static_cast<double>(n);
  return 2.0 * std::numbers::pi * signed_m / period;
}

} // namespace

Grid1D::Grid1D(double x_min_, double x_max_, std::size_t n_) : x_min(x_min_), x_max(x_max_), n(n_) {
  if (!(x_max > x_min) || !std::isfinite(x_min) || !std::isfinite(x_max))
    throw InvalidParameter("grid requires finite x_max > x_min");
  if (n < 16)
    throw InvalidParameter("grid requires at least 16 points, got " + std::to_string(n));
}

TwoParticleAmplitude::TwoParticleAmplitude(Grid1D grid, std::vector<Complex> values)
    : grid_(grid), values_(std::move(values)), norm_(0.0) {
  if (values_.size() != grid_.n * grid_.n)
    throw InvalidParameter("amplitude needs n*n values");
  for (const auto& v : values_)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw InvalidParameter("amplitude values must be finite");
  norm_ = weighted_norm(grid_, values_);
}

TwoParticleAmplitude TwoParticleAmplitude::from_function(const Grid1D& grid,
                                                         const std::function<Complex(double, double)>& psi) {
  std::vector<Complex> v(grid.n * grid.n);
  for (std::size_t i = 0; i < grid.n; ++i)
    for (std::size_t j = 0; j < grid.n; ++j)
      v[i * grid.n + j] = psi(grid.x(i), grid.x(j));
  return {grid, std::move(v)};
}

TwoParticleAmplitude TwoParticleAmplitude::product(const Grid1D& grid, const std::function<Complex(double)>& f,
                                                   const std::function<Complex(double)>& g) {
  std::vector<Complex> fx(grid.n), gy(grid.n);
  for (std::size_t i = 0; i < grid.n; ++i) {
    fx[i] = f(grid.x(i));
    gy[i] = g(grid.x(i));
  }
  std::vector<Complex> v(grid.n * grid.n);
  for (std::size_t i = 0; i < grid.n; ++i)
    for (std::size_t j = 0; j < grid.n; ++j)
      v[i * grid.n + j] = fx[i] * gy[j];
  return {grid, std::move(v)};
}

TwoParticleAmplitude TwoParticleAmplitude::normalized() const {
  if (!(norm_ > 0.0))
    throw InvalidParameter("cannot normalize a zero amplitude");
  std::vector<Complex> v(values_);
  for (auto& z : v)
    z /= norm_;
  return {grid_, std::move(v)};
}

TwoParticleAmplitude TwoParticleAmplitude::exchanged() const {
  const std::size_t n = grid_.n;
  std::vector<Complex> v(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      v[i * n + j] = values_[j * n + i];
  return {grid_, std::move(v)};
}

double TwoParticleAmplitude::max_abs() const noexcept {
  double m = 0.0;
  for (const auto& z : values_)
    m = std::max(m, std::abs(z));
  return m;
}

double TwoParticleAmplitude::boundary_amplitude() const noexcept {
  const std::size_t n = grid_.n;
  double m = 0.0;
  for (std::size_t k = 0; k < n; ++k)
    m = std::max({m, std::abs(at(0, k)), std::abs(at(n - 1, k)), std::abs(at(k, 0)), std::abs(at(k, n - 1))});
  return norm_ > 0.0 ? m / norm_ : m;
}

Complex inner_product(const TwoParticleAmplitude& a, const TwoParticleAmplitude& b) {
  if (!(a.grid() == b.grid()))
    throw InvalidParameter("inner product of amplitudes on different grids");
  const auto& g = a.grid();
  Complex s = 0.0;
  for (std::size_t i = 0; i < g.n; ++i) {
    Complex row = 0.0;
    for (std::size_t j = 0; j < g.n; ++j)
      row += g.weight(j) * std::conj(a.at(i, j)) * b.at(i, j);
    s += g.weight(i) * row;
  }
  return s;
}

Complex swap_overlap(const TwoParticleAmplitude& psi) {
  if (!(psi.norm() > 0.0))
    throw InvalidParameter("swap overlap of a zero amplitude");
  return inner_product(psi, psi.exchanged()) / (psi.norm() * psi.norm());
}

Antisymmetrized antisymmetrize(const TwoParticleAmplitude& psi) {
  const auto unit = psi.normalized();
  const double denom = 2.0 - 2.0 * swap_overlap(unit).real();
  if (!(denom > kDegenerateAntisymmetrization)) {
    std::ostringstream msg;
    msg << "antisymmetrization of a symmetric state: 2 - 2 Re<Psi(x,y)|Psi(y,x)> = " << denom
        << " is below " << kDegenerateAntisymmetrization << ", normalization coefficient diverges";
    throw DegenerateAntisymmetrization(msg.str());
  }
  const double coefficient = 1.0 / std::sqrt(denom);
  const std::size_t n = unit.grid().n;
  std::vector<Complex> v(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      v[i * n + j] = coefficient * (unit.at(i, j) - unit.at(j, i));
  return {TwoParticleAmplitude(unit.grid(), std::move(v)), coefficient};
}

TwoParticleAmplitude free_propagate(const TwoParticleAmplitude& psi, double t) {
  if (!std::isfinite(t))
    throw InvalidParameter("propagation time must be finite");
  if (psi.boundary_amplitude() > kBoundaryTolerance) {
    std::ostringstream msg;
    msg << "grid too small: edge amplitude " << psi.boundary_amplitude() << " exceeds " << kBoundaryTolerance;
    throw GridTooSmall(msg.str());
  }
  if (t == 0.0)
    return psi;

  const auto& g = psi.grid();
  const std::size_t n = g.n;
  const double period = g.spacing() * static_cast<double>(n);
  std::vector<Complex> buf(psi.values().begin(), psi.values().end());

  std::vector<Complex> phase_1d(n);
  for (std::size_t m = 0; m < n; ++m) {
    const double k = wavenumber(m, n, period);
    phase_1d[m] = std::polar(1.0, -0.5 * k * k * t);
  }

  const auto forward = make_plan(n, buf.data(), FFTW_FORWARD);
  const auto backward = make_plan(n, buf.data(), FFTW_BACKWARD);
  fftw_execute(forward.get());
  const double scale = 1.0 / static_cast<double>(n * n);
  const auto rows = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < rows; ++i) {
    const auto r = static_cast<std::size_t>(i);
    for (std::size_t j = 0; j < n; ++j)
      buf[r * n + j] *= phase_1d[r] * phase_1d[j] * scale;
  }
  fftw_execute(backward.get());
  return {g, std::move(buf)};
}

SymmetryDefects symmetry_defects(const TwoParticleAmplitude& psi) {
  const double scale = psi.max_abs();
  if (!(scale > 0.0))
    throw InvalidParameter("symmetry defects of a zero amplitude");
  const std::size_t n = psi.grid().n;
  double sym = 0.0, anti = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      sym = std::max(sym, std::abs(psi.at(i, j) - psi.at(j, i)));
      anti = std::max(anti, std::abs(psi.at(i, j) + psi.at(j, i)));
    }
  return {sym / scale, anti / scale};
}

double oscillator_orbital(int k, double x, double sigma, double x0) {
  const double u = (x - x0) / sigma;
  const double phi0 = std::pow(std::numbers::pi * sigma * sigma, -0.25) * std::exp(-0.5 * u * u);
  switch (k) {
  case 0:
    return phi0;
  case 1:
    return std::numbers::sqrt2 * u * phi0;
  default:
    throw InvalidParameter("only orbitals 0 and 1 are provided");
  }
}

double marginal_width_x(const TwoParticleAmplitude& psi) {
  const auto& g = psi.grid();
  double mass = 0.0, first = 0.0, second = 0.0;
  for (std::size_t i = 0; i < g.n; ++i) {
    double rho = 0.0;
    for (std::size_t j = 0; j < g.n; ++j)
      rho += g.weight(j) * std::norm(psi.at(i, j));
    const double w = g.weight(i) * rho;
    const double x = g.x(i);
    mass += w;
    first += w * x;
    second += w * x * x;
  }
  const double mean = first / mass;
  return std::sqrt(2.0 * (second / mass - mean * mean));
}

void write_amplitude(std::ostream& out, const TwoParticleAmplitude& psi) {
  const auto& g = psi.grid();
  out << nlohmann::json{{"x_min", g.x_min}, {"x_max", g.x_max}, {"n", g.n}}.dump() << '\n';
  out << "x_index,y_index,re,im\n";
  for (std::size_t i = 0; i < g.n; ++i)
    for (std::size_t j = 0; j < g.n; ++j) {
      const auto z = psi.at(i, j);
      out << i << ',' << j << ',' << format_double(z.real()) << ',' << format_double(z.imag()) << '\n';
    }
}

TwoParticleAmplitude read_amplitude(std::istream& in) {
  std::string line;
  if (!std::getline(in, line))
    throw InvalidData("amplitude file is empty");
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidData(std::string("amplitude grid header is not JSON: ") + e.what());
  }
  if (!meta.contains("x_min") || !meta.contains("x_max") || !meta.contains("n"))
    throw InvalidData("amplitude grid header needs x_min, x_max and n");
  const Grid1D grid(meta["x_min"].get<double>(), meta["x_max"].get<double>(), meta["n"].get<std::size_t>());
  if (!std::getline(in, line) || line.rfind("x_index,y_index,re,im", 0) != 0)
    throw InvalidData("amplitude file missing header x_index,y_index,re,im");

  std::vector<Complex> v(grid.n * grid.n);
  std::vector<bool> seen(v.size(), false);
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty())
      continue;
    std::size_t i = 0, j = 0;
    double re = 0.0, im = 0.0;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    auto next = [&](auto& value) {
      const auto res = std::from_chars(p, end, value);
      if (res.ec != std::errc{})
        throw InvalidData("malformed amplitude row: " + line);
      p = res.ptr;
      if (p != end && *p == ',')
        ++p;
    };
    next(i);
    next(j);
    next(re);
    next(im);
    if (i >= grid.n || j >= grid.n)
      throw InvalidData("amplitude index out of range: " + line);
    v[i * grid.n + j] = {re, im};
    seen[i * grid.n + j] = true;
    ++rows;
  }
  if (rows != v.size() || !std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }))
    throw InvalidData("amplitude file does not cover every grid node");
  return {grid, std::move(v)};
}

} // namespace emkin
