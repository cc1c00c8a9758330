#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

namespace sonolab::pilot {

/// Complex wavefunction sampled on a uniform periodic grid at one instant.
///
/// The domain is [x_min, x_max) per axis with spacing (x_max - x_min)/samples;
/// sample j sits at x_min + j*dx (FFT layout, no duplicated endpoint). 2D
/// values are row-major: values[ix * samples[1] + iy].
struct WavefunctionGrid {
  int dims = 1;
  std::array<double, 2> x_min{0.0, 0.0};
  std::array<double, 2> x_max{1.0, 1.0};
  std::array<int, 2> samples{0, 1};  // samples[1] stays 1 in 1D
  std::vector<std::complex<double>> values;
  double mass = 1.0;
  double hbar = 1.0;

  void validate() const;

  double dx(int axis) const {
    return (x_max[axis] - x_min[axis]) / samples[axis];
  }
  double x_of(int axis, int idx) const { return x_min[axis] + idx * dx(axis); }
  std::complex<double> at(int ix, int iy = 0) const {
    return values[static_cast<std::size_t>(ix) * samples[1] + iy];
  }

  /// Cell volume elements: dx in 1D, dx*dy in 2D.
  double cell_volume() const;
  /// L2 norm sqrt(sum |psi|^2 dV).
  double norm() const;
  double max_abs() const;
  /// Probability-weighted mean and standard deviation along an axis.
  std::array<double, 2> moments(int axis) const;
};

/// Normalized Gaussian packet exp(-(x-x0)^2/(4 sigma^2) + i k0 x); sigma is
/// the standard deviation of |psi|^2.
WavefunctionGrid gaussian_packet_1d(double x_lo, double x_hi, int samples,
                                    double x0, double sigma, double k0,
                                    double mass = 1.0, double hbar = 1.0);

/// Draw n positions from |psi|^2 by inverse CDF over the cells (uniform
/// within a cell). 1D grids only. uniforms must lie in [0, 1).
std::vector<double> sample_positions_1d(const WavefunctionGrid& grid,
                                        const std::vector<double>& uniforms);

/// Kolmogorov-Smirnov distance between sample positions and the |psi|^2
/// distribution of a 1D grid. samples need not be sorted.
double ks_distance_1d(const WavefunctionGrid& grid, std::vector<double> samples);

/// Kolmogorov-Smirnov distance between samples and an arbitrary model CDF.
double ks_distance(std::vector<double> samples,
                   const std::function<double(double)>& cdf);

}  // namespace sonolab::pilot
