#include "sonolab/field.hpp"

#include <cmath>

#include "sonolab/errors.hpp"

namespace sonolab::field {

namespace {

constexpr double kTwoPi = 6.283185307179586476925287;

// (2m+1)!! for m = 0..3
constexpr double kOddFactorial[4] = {1.0, 3.0, 15.0, 105.0};

double bessel_series(int m, double x) {
  // j_m(x) = x^m/(2m+1)!! * sum_s t_s,  t_0 = 1,
  // t_{s+1} = t_s * (-x^2/2) / ((s+1)(2m+2s+3))
  const double x2h = 0.5 * x * x;
  double term = 1.0;
  double sum = 1.0;
  for (int s = 0; s < 40; ++s) {
    term *= -x2h / ((s + 1.0) * (2.0 * m + 2.0 * s + 3.0));
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  double xm = 1.0;
  for (int i = 0; i < m; ++i) xm *= x;
  return xm / kOddFactorial[m] * sum;
}

}  // namespace

void SononMode::validate() const {
  if (m < 0 || m > 3) throw ConfigError("mode index m must be in 0..3");
  if (n < 0) throw ConfigError("mode index n must be non-negative");
  if (m == 0 && n == 0) throw ConfigError("mode (0,0) carries no structure");
  if (!(k_r > 0.0)) throw ConfigError("k_r must be positive");
  if (!(ring_radius > 0.0)) throw ConfigError("ring_radius must be positive");
  if (!(omega0 > 0.0)) throw ConfigError("omega0 must be positive");
  if (!(amplitude > 0.0)) throw ConfigError("amplitude must be positive");
}

double spherical_bessel(int m, double x) {
  if (m < 0 || m > 3) throw ConfigError("spherical_bessel supports m in 0..3");
  if (!(x >= 0.0)) throw ConfigError("spherical_bessel requires x >= 0");
  // The closed forms cancel badly for small x (worst for m = 3, where the
  // leading 15/x^4 terms collapse seven digits near x = 0.5); the series
  // converges in a handful of terms anywhere below the crossover.
  if (x < 2.0) return bessel_series(m, x);

  const double s = std::sin(x);
  const double c = std::cos(x);
  const double ix = 1.0 / x;
  switch (m) {
    case 0:
      return s * ix;
    case 1:
      return s * ix * ix - c * ix;
    case 2:
      return (3.0 * ix * ix * ix - ix) * s - 3.0 * ix * ix * c;
    default:
      return (15.0 * ix * ix * ix * ix - 6.0 * ix * ix) * s -
             (15.0 * ix * ix * ix - ix) * c;
  }
}

double chi_far_field(double r, double k_r) {
  if (!(r > 0.0)) throw ConfigError("chi_far_field requires r > 0");
  if (!(k_r > 0.0)) throw ConfigError("chi_far_field requires k_r > 0");
  return std::sin(k_r * r) / r;
}

std::complex<double> sonon_field(const SononMode& mode, const Vec3& p, double t,
                                 int nodes) {
  mode.validate();
  if (nodes < 8) throw ConfigError("quadrature needs at least 8 nodes");

  const double R = mode.ring_radius;
  const double rho = std::hypot(p.x, p.y);
  // Distance from p to the source circle; every quadrature node is at least
  // this far away, so checking it once guards the whole loop.
  if (!(std::hypot(rho - R, p.z) > 0.0)) {
    throw ContractError("field point lies on the source ring");
  }
  // Poloidal angle of p about the ring core circle.
  const double theta = std::atan2(p.z, rho - R);

  const double w = kTwoPi / nodes;
  double re = 0.0, im = 0.0;
  for (int j = 0; j < nodes; ++j) {
    const double phi = w * j;
    const double dx = p.x - R * std::cos(phi);
    const double dy = p.y - R * std::sin(phi);
    const double sigma = std::sqrt(dx * dx + dy * dy + p.z * p.z);
    const double jm = spherical_bessel(mode.m, mode.k_r * sigma);
    const double arg = mode.n * phi - mode.m * theta;
    re += jm * std::cos(arg);
    im += jm * std::sin(arg);
  }
  const double scale = mode.amplitude * mode.k_r * R * w;
  std::complex<double> ring(re * scale, im * scale);
  // Carrier factor applied once; field(p,t) = field(p,0) * exp(-i omega0 t)
  // holds to rounding by construction.
  const std::complex<double> carrier(std::cos(mode.omega0 * t),
                                     -std::sin(mode.omega0 * t));
  return ring * carrier;
}

double wave_residual(const FieldSampler& f, const Vec3& p, double t, double h,
                     double c) {
  if (!(h > 0.0)) throw ConfigError("wave_residual requires h > 0");
  if (!(c > 0.0)) throw ConfigError("wave_residual requires c > 0");

  const double ht = h / c;
  const std::complex<double> f0 = f(p, t);
  std::complex<double> lap = -6.0 * f0;
  lap += f({p.x + h, p.y, p.z}, t) + f({p.x - h, p.y, p.z}, t);
  lap += f({p.x, p.y + h, p.z}, t) + f({p.x, p.y - h, p.z}, t);
  lap += f({p.x, p.y, p.z + h}, t) + f({p.x, p.y, p.z - h}, t);
  lap /= h * h;

  std::complex<double> dtt = f(p, t + ht) - 2.0 * f0 + f(p, t - ht);
  dtt /= ht * ht;

  return std::abs(lap - dtt / (c * c));
}

double kg_dispersion_residual(double omega, double k, double c, double omega0) {
  return omega * omega - c * c * k * k - omega0 * omega0;
}

namespace {

Vec3 unit_direction(const Vec3& dir) {
  const double n = dir.norm();
  if (!(n > 0.0)) throw ConfigError("direction must be non-zero");
  return dir * (1.0 / n);
}

}  // namespace

double far_field_envelope(const SononMode& mode, double r, const Vec3& dir,
                          int nodes, int window_samples) {
  mode.validate();
  if (window_samples < 8) throw ConfigError("envelope needs >= 8 window samples");
  const Vec3 u = unit_direction(dir);
  const double half = 0.5 * 3.141592653589793238462643 / mode.k_r;
  if (!(r - half > 0.0)) throw ConfigError("envelope window extends to r <= 0");

  double best = 0.0;
  for (int i = 0; i < window_samples; ++i) {
    const double ri = r - half + (2.0 * half) * i / (window_samples - 1);
    const double a = ri * std::abs(sonon_field(mode, u * ri, 0.0, nodes));
    if (a > best) best = a;
  }
  return best;
}

std::vector<FarFieldDeviation> far_field_deviation(const SononMode& mode,
                                                   std::span<const double> radii,
                                                   double r_ref, const Vec3& dir,
                                                   int nodes) {
  const double ref = far_field_envelope(mode, r_ref, dir, nodes);
  if (!(ref > 0.0)) throw AnalysisError("far-field reference envelope vanished");
  std::vector<FarFieldDeviation> out;
  out.reserve(radii.size());
  for (double r : radii) {
    const double env = far_field_envelope(mode, r, dir, nodes);
    out.push_back({r, std::abs(env / ref - 1.0)});
  }
  return out;
}

std::vector<FieldScanRow> field_scan(const SononMode& mode, double r_min,
                                     double r_max, int count, const Vec3& dir,
                                     int nodes) {
  mode.validate();
  if (!(r_min > 0.0) || !(r_max > r_min)) {
    throw ConfigError("field_scan requires 0 < r_min < r_max");
  }
  if (count < 2) throw ConfigError("field_scan requires count >= 2");
  const Vec3 u = unit_direction(dir);
  const double s = far_field_envelope(mode, r_max, u, nodes);
  if (!(s > 0.0)) throw AnalysisError("field_scan normalization vanished");

  std::vector<FieldScanRow> rows;
  rows.reserve(count);
  for (int i = 0; i < count; ++i) {
    FieldScanRow row;
    row.r = r_min + (r_max - r_min) * i / (count - 1);
    row.xi = sonon_field(mode, u * row.r, 0.0, nodes);
    row.chi = chi_far_field(row.r, mode.k_r);
    row.rel_dev =
        std::abs(row.r * std::abs(row.xi) -
                 s * std::abs(std::sin(mode.k_r * row.r))) / s;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace sonolab::field
