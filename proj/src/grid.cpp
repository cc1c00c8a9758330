#include "sonolab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "sonolab/errors.hpp"

namespace sonolab::pilot {

void WavefunctionGrid::validate() const {
  if (dims != 1 && dims != 2) throw ConfigError("grid dims must be 1 or 2");
  for (int a = 0; a < dims; ++a) {
    if (samples[a] < 64) throw ConfigError("grid needs >= 64 samples per axis");
    if (!(x_max[a] > x_min[a])) throw ConfigError("grid extent must be positive");
  }
  if (dims == 1 && samples[1] != 1) {
    throw ConfigError("1D grid must have samples[1] == 1");
  }
  if (values.size() !=
      static_cast<std::size_t>(samples[0]) * static_cast<std::size_t>(samples[1])) {
    throw ConfigError("grid value count does not match sample counts");
  }
  if (!(mass > 0.0) || !(hbar > 0.0)) throw ConfigError("mass, hbar must be positive");
  const double n = norm();
  if (!std::isfinite(n) || !(n > 0.0)) {
    throw ConfigError("grid norm must be finite and positive");
  }
}

double WavefunctionGrid::cell_volume() const {
  double v = dx(0);
  if (dims == 2) v *= dx(1);
  return v;
}

double WavefunctionGrid::norm() const {
  double acc = 0.0;
  for (const auto& v : values) acc += std::norm(v);
  return std::sqrt(acc * cell_volume());
}

double WavefunctionGrid::max_abs() const {
  double best = 0.0;
  for (const auto& v : values) best = std::max(best, std::abs(v));
  return best;
}

std::array<double, 2> WavefunctionGrid::moments(int axis) const {
  double w_sum = 0.0, m1 = 0.0;
  for (int ix = 0; ix < samples[0]; ++ix) {
    for (int iy = 0; iy < samples[1]; ++iy) {
      const double w = std::norm(at(ix, iy));
      const double x = x_of(axis, axis == 0 ? ix : iy);
      w_sum += w;
      m1 += w * x;
    }
  }
  m1 /= w_sum;
  double m2 = 0.0;
  for (int ix = 0; ix < samples[0]; ++ix) {
    for (int iy = 0; iy < samples[1]; ++iy) {
      const double w = std::norm(at(ix, iy));
      const double x = x_of(axis, axis == 0 ? ix : iy);
      m2 += w * (x - m1) * (x - m1);
    }
  }
  return {m1, std::sqrt(m2 / w_sum)};
}

WavefunctionGrid gaussian_packet_1d(double x_lo, double x_hi, int samples,
                                    double x0, double sigma, double k0,
                                    double mass, double hbar) {
  if (!(sigma > 0.0)) throw ConfigError("packet sigma must be positive");
  WavefunctionGrid g;
  g.dims = 1;
  g.x_min = {x_lo, 0.0};
  g.x_max = {x_hi, 1.0};
  g.samples = {samples, 1};
  g.mass = mass;
  g.hbar = hbar;
  g.values.resize(samples);
  const double dx = g.dx(0);
  for (int j = 0; j < samples; ++j) {
    const double x = x_lo + j * dx;
    const double u = (x - x0) / sigma;
    const double env = std::exp(-0.25 * u * u);
    g.values[j] = std::complex<double>(env * std::cos(k0 * x),
                                       env * std::sin(k0 * x));
  }
  const double n = g.norm();
  for (auto& v : g.values) v /= n;
  g.validate();
  return g;
}

std::vector<double> sample_positions_1d(const WavefunctionGrid& grid,
                                        const std::vector<double>& uniforms) {
  grid.validate();
  if (grid.dims != 1) throw ConfigError("sampling requires a 1D grid");
  const int n = grid.samples[0];
  const double dx = grid.dx(0);
  std::vector<double> cdf(n + 1, 0.0);
  for (int j = 0; j < n; ++j) cdf[j + 1] = cdf[j] + std::norm(grid.values[j]);
  const double total = cdf[n];
  if (!(total > 0.0)) throw ConfigError("cannot sample from zero density");

  std::vector<double> out;
  out.reserve(uniforms.size());
  for (double u : uniforms) {
    if (!(u >= 0.0) || !(u < 1.0)) throw ConfigError("uniforms must lie in [0,1)");
    const double target = u * total;
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
    int j = static_cast<int>(it - cdf.begin()) - 1;
    j = std::clamp(j, 0, n - 1);
    const double mass_j = cdf[j + 1] - cdf[j];
    const double frac = mass_j > 0.0 ? (target - cdf[j]) / mass_j : 0.5;
    out.push_back(grid.x_of(0, j) + frac * dx);
  }
  return out;
}

double ks_distance_1d(const WavefunctionGrid& grid, std::vector<double> samples) {
  grid.validate();
  if (grid.dims != 1) throw ConfigError("KS distance requires a 1D grid");
  if (samples.empty()) throw ConfigError("KS distance of empty sample set");
  const int n = grid.samples[0];
  const double dx = grid.dx(0);
  std::vector<double> cdf(n + 1, 0.0);
  for (int j = 0; j < n; ++j) cdf[j + 1] = cdf[j] + std::norm(grid.values[j]);
  const double total = cdf[n];

  auto model_cdf = [&](double x) {
    if (x <= grid.x_min[0]) return 0.0;
    if (x >= grid.x_min[0] + n * dx) return 1.0;
    const double s = (x - grid.x_min[0]) / dx;
    const int j = std::min(static_cast<int>(s), n - 1);
    const double frac = s - j;
    return (cdf[j] + frac * (cdf[j + 1] - cdf[j])) / total;
  };

  return ks_distance(std::move(samples), model_cdf);
}

double ks_distance(std::vector<double> samples,
                   const std::function<double(double)>& cdf) {
  if (samples.empty()) throw ConfigError("KS distance of empty sample set");
  std::sort(samples.begin(), samples.end());
  const double m = static_cast<double>(samples.size());
  double ks = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    ks = std::max(ks, std::abs((i + 1) / m - f));
    ks = std::max(ks, std::abs(i / m - f));
  }
  return ks;
}

}  // namespace sonolab::pilot
