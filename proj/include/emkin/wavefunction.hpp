#pragma once

// Two-particle centre-of-mass amplitudes on a square 1-D x 1-D grid:
// exchange symmetry, antisymmetrization with its normalization coefficient,
// and free evolution with a spectral propagator (hbar = m = 1).

#include <complex>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace emkin {

using Complex = std::complex<double>;

struct Grid1D {
  double x_min;
  double x_max;
  std::size_t n;

  Grid1D(double x_min, double x_max, std::size_t n);

  double spacing() const noexcept { return (x_max - x_min) / static_cast<double>(n - 1); }
  double x(std::size_t i) const noexcept { return x_min + spacing() * static_cast<double>(i); }
  /// Trapezoid weight of node i.
  double weight(std::size_t i) const noexcept {
    return (i == 0 || i + 1 == n) ? 0.5 * spacing() : spacing();
  }

  bool operator==(const Grid1D&) const = default;
};

/// Psi(x_i, y_j) stored row-major at i * n + j.
class TwoParticleAmplitude {
public:
  TwoParticleAmplitude(Grid1D grid, std::vector<Complex> values);

  static TwoParticleAmplitude from_function(const Grid1D& grid,
                                            const std::function<Complex(double, double)>& psi);
  /// f(x) g(y)
  static TwoParticleAmplitude product(const Grid1D& grid, const std::function<Complex(double)>& f,
                                      const std::function<Complex(double)>& g);

  const Grid1D& grid() const noexcept { return grid_; }
  std::span<const Complex> values() const noexcept { return values_; }
  Complex at(std::size_t i, std::size_t j) const noexcept { return values_[i * grid_.n + j]; }
  double norm() const noexcept { return norm_; }

  TwoParticleAmplitude normalized() const;
  /// Psi(y, x)
  TwoParticleAmplitude exchanged() const;
  double max_abs() const noexcept;
  /// Largest |Psi| on the grid edge, relative to the norm.
  double boundary_amplitude() const noexcept;

private:
  Grid1D grid_;
  std::vector<Complex> values_;
  double norm_;
};

/// Trapezoid quadrature of conj(a) b.
Complex inner_product(const TwoParticleAmplitude& a, const TwoParticleAmplitude& b);

/// <Psi(x,y)|Psi(y,x)> of the normalized state.
Complex swap_overlap(const TwoParticleAmplitude& psi);

/// Below this, 2 - 2 Re<Psi(x,y)|Psi(y,x)> is treated as zero.
inline constexpr double kDegenerateAntisymmetrization = 1e-8;

struct Antisymmetrized {
  TwoParticleAmplitude state;
  /// 1 / sqrt(2 - 2 Re<Psi(x,y)|Psi(y,x)>)
  double coefficient;
};

/// N (Psi(x,y) - Psi(y,x)) of the normalized input. Throws
/// DegenerateAntisymmetrization when the input is symmetric to tolerance.
Antisymmetrized antisymmetrize(const TwoParticleAmplitude& psi);

/// Evolution under the free two-particle Hamiltonian for time t, via
/// momentum-space phase exp(-i (kx^2 + ky^2) t / 2). The grid is treated as
/// periodic; throws GridTooSmall if the input amplitude on the edge exceeds
/// kBoundaryTolerance.
TwoParticleAmplitude free_propagate(const TwoParticleAmplitude& psi, double t);

inline constexpr double kBoundaryTolerance = 1e-10;

struct SymmetryDefects {
  /// max |Psi(x,y) - Psi(y,x)| / max |Psi|
  double symmetric;
  /// max |Psi(x,y) + Psi(y,x)| / max |Psi|
  double antisymmetric;
};

SymmetryDefects symmetry_defects(const TwoParticleAmplitude& psi);

/// k-th harmonic-oscillator orbital (k = 0, 1) of width sigma centred at x0:
/// phi_0 = (pi sigma^2)^(-1/4) exp(-(x-x0)^2 / (2 sigma^2)).
double oscillator_orbital(int k, double x, double sigma, double x0 = 0.0);

/// sqrt(2) times the standard deviation of the x-marginal of |Psi|^2, which
/// equals sigma for phi_0 of width sigma.
double marginal_width_x(const TwoParticleAmplitude& psi);

/// Line 1: JSON grid object {"x_min","x_max","n"}; line 2: header
/// `x_index,y_index,re,im`; then one row per node.
void write_amplitude(std::ostream& out, const TwoParticleAmplitude& psi);
TwoParticleAmplitude read_amplitude(std::istream& in);

} // namespace emkin
