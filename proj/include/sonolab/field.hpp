#pragma once

#include <complex>
#include <functional>
#include <span>
#include <vector>

#include "sonolab/vec3.hpp"

namespace sonolab::field {

/// Ring-excitation mode of the carrier field.
///
/// The source is a circular filament of radius ring_radius in the z=0 plane.
/// m counts windings of the tube phase (poloidal), n windings around the ring
/// (toroidal); k_r is the carrier wavenumber and omega0 the carrier frequency.
/// Amplitudes are linear throughout, so amplitude just scales outputs.
struct SononMode {
  int m = 1;
  int n = 0;
  double k_r = 1.0;
  double ring_radius = 1.0;
  double omega0 = 1.0;
  double amplitude = 1.0;

  void validate() const;
};

/// Spherical Bessel function j_m for m in {0,1,2,3}, x >= 0.
/// Closed forms in sin/cos lose digits to cancellation for small x, so below
/// x = 2 the power series is summed adaptively instead.
double spherical_bessel(int m, double x);

/// Far-field radial form sin(k_r r)/r. Requires r > 0.
double chi_far_field(double r, double k_r);

/// Field of one ring mode at point p and time t.
///
/// xi(p,t) = A exp(-i omega0 t) integral_0^2pi exp(-i(m theta' - n phi))
///           j_m(k_r sigma) k_r R dphi
/// with sigma the distance from p to the ring point at angle phi and theta'
/// the poloidal angle of p about the ring core. The integrand is periodic
/// and smooth, so the uniform trapezoid rule converges spectrally; nodes
/// defaults to 512 which is far past convergence for k_r R of order one.
std::complex<double> sonon_field(const SononMode& mode, const Vec3& p, double t,
                                 int nodes = 512);

using FieldSampler = std::function<std::complex<double>(const Vec3&, double)>;

/// |laplacian(f) - (1/c^2) d^2f/dt^2| by second-order central differences,
/// spatial step h and time step h/c. Meaningful only while h resolves the
/// field's oscillation (h * wavenumber well below 1).
double wave_residual(const FieldSampler& f, const Vec3& p, double t, double h,
                     double c = 1.0);

/// omega^2 - c^2 k^2 - omega0^2. Zero on the mass shell.
double kg_dispersion_residual(double omega, double k, double c, double omega0);

/// Envelope of r'|xi(r')| over one half-period window [r - pi/(2 k_r),
/// r + pi/(2 k_r)] along direction dir, sampled at window_samples points.
/// Tracks the slowly varying amplitude of the standing far-field pattern
/// without landing on its zeros.
double far_field_envelope(const SononMode& mode, double r, const Vec3& dir,
                          int nodes = 512, int window_samples = 64);

struct FarFieldDeviation {
  double r = 0.0;
  /// |envelope(r)/envelope(r_ref) - 1|
  double deviation = 0.0;
};

/// Deviation of the field's envelope from the far-field 1/r law, each radius
/// normalized against r_ref. Decreases toward zero as r grows.
std::vector<FarFieldDeviation> far_field_deviation(const SononMode& mode,
                                                   std::span<const double> radii,
                                                   double r_ref, const Vec3& dir,
                                                   int nodes = 512);

struct FieldScanRow {
  double r = 0.0;
  std::complex<double> xi;
  double chi = 0.0;      // sin(k_r r)/r
  double rel_dev = 0.0;  // | r|xi| - s|sin(k_r r)| | / s, s = envelope at r_max
};

/// Radial scan of |xi| against the far-field form along dir at t=0.
std::vector<FieldScanRow> field_scan(const SononMode& mode, double r_min,
                                     double r_max, int count, const Vec3& dir,
                                     int nodes = 512);

}  // namespace sonolab::field
