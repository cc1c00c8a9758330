#include "sonolab/guidance.hpp"

#include <algorithm>
#include <cmath>

namespace sonolab::pilot {

namespace {

struct LocalField {
  std::complex<double> psi;
  std::array<std::complex<double>, 2> grad;
};

// psi and its central-difference gradient, both interpolated to p.
// Periodic neighbor indexing matches the spectral propagator's topology.
LocalField interpolate(const WavefunctionGrid& g, const std::array<double, 2>& p) {
  const int n0 = g.samples[0];
  const int n1 = g.samples[1];
  const double dx0 = g.dx(0);

  const double s0 = (p[0] - g.x_min[0]) / dx0;
  int j0 = static_cast<int>(std::floor(s0));
  double f0 = s0 - j0;
  if (j0 < 0) {
    j0 = 0;
    f0 = 0.0;
  }
  if (j0 > n0 - 1) {
    j0 = n0 - 1;
    f0 = 1.0;
  }

  auto wrap = [](int i, int n) { return (i % n + n) % n; };

  if (g.dims == 1) {
    auto val = [&](int j) { return g.values[wrap(j, n0)]; };
    auto grad = [&](int j) {
      return (val(j + 1) - val(j - 1)) / (2.0 * dx0);
    };
    LocalField out;
    out.psi = (1.0 - f0) * val(j0) + f0 * val(j0 + 1);
    out.grad[0] = (1.0 - f0) * grad(j0) + f0 * grad(j0 + 1);
    out.grad[1] = 0.0;
    return out;
  }

  const double dx1 = g.dx(1);
  const double s1 = (p[1] - g.x_min[1]) / dx1;
  int j1 = static_cast<int>(std::floor(s1));
  double f1 = s1 - j1;
  if (j1 < 0) {
    j1 = 0;
    f1 = 0.0;
  }
  if (j1 > n1 - 1) {
    j1 = n1 - 1;
    f1 = 1.0;
  }
  auto val = [&](int ix, int iy) {
    return g.values[static_cast<std::size_t>(wrap(ix, n0)) * n1 + wrap(iy, n1)];
  };
  auto gx = [&](int ix, int iy) {
    return (val(ix + 1, iy) - val(ix - 1, iy)) / (2.0 * dx0);
  };
  auto gy = [&](int ix, int iy) {
    return (val(ix, iy + 1) - val(ix, iy - 1)) / (2.0 * dx1);
  };

  auto bilerp = [&](auto&& f) {
    return (1.0 - f0) * ((1.0 - f1) * f(j0, j1) + f1 * f(j0, j1 + 1)) +
           f0 * ((1.0 - f1) * f(j0 + 1, j1) + f1 * f(j0 + 1, j1 + 1));
  };

  LocalField out;
  out.psi = bilerp(val);
  out.grad[0] = bilerp(gx);
  out.grad[1] = bilerp(gy);
  return out;
}

bool point_inside(const WavefunctionGrid& g, const std::array<double, 2>& p) {
  for (int a = 0; a < g.dims; ++a) {
    if (!(p[a] >= g.x_min[a]) || !(p[a] < g.x_max[a])) return false;
  }
  return true;
}

std::array<double, 2> velocity_from_field(const WavefunctionGrid& g,
                                          const LocalField& lf) {
  const std::complex<double> ratio0 = lf.grad[0] / lf.psi;
  std::array<double, 2> v{g.hbar / g.mass * ratio0.imag(), 0.0};
  if (g.dims == 2) {
    const std::complex<double> ratio1 = lf.grad[1] / lf.psi;
    v[1] = g.hbar / g.mass * ratio1.imag();
  }
  return v;
}

}  // namespace

double guidance_velocity(const WavefunctionGrid& grid, double x) {
  grid.validate();
  if (grid.dims != 1) throw ConfigError("guidance_velocity expects a 1D grid");
  const std::array<double, 2> p{x, 0.0};
  if (!point_inside(grid, p)) throw ConfigError("position outside grid extents");
  const LocalField lf = interpolate(grid, p);
  if (std::abs(lf.psi) <= 1e-12 * grid.max_abs()) {
    throw NodeProximityError("guidance velocity undefined near a node");
  }
  return velocity_from_field(grid, lf)[0];
}

std::array<double, 2> guidance_velocity_2d(const WavefunctionGrid& grid,
                                           const std::array<double, 2>& p) {
  grid.validate();
  if (grid.dims != 2) throw ConfigError("guidance_velocity_2d expects a 2D grid");
  if (!point_inside(grid, p)) throw ConfigError("position outside grid extents");
  const LocalField lf = interpolate(grid, p);
  if (std::abs(lf.psi) <= 1e-12 * grid.max_abs()) {
    throw NodeProximityError("guidance velocity undefined near a node");
  }
  return velocity_from_field(grid, lf);
}

GridSequenceVelocity::GridSequenceVelocity(const PropagationResult& seq)
    : seq_(seq) {
  if (seq.snapshots.empty()) throw ConfigError("empty snapshot sequence");
  node_eps_.reserve(seq.snapshots.size());
  for (const auto& s : seq.snapshots) node_eps_.push_back(1e-12 * s.max_abs());
}

int GridSequenceVelocity::dims() const { return seq_.snapshots.front().dims; }

bool GridSequenceVelocity::inside(const std::array<double, 2>& x) const {
  return point_inside(seq_.snapshots.front(), x);
}

double GridSequenceVelocity::step_scale() const {
  const auto& g = seq_.snapshots.front();
  double s = g.dx(0);
  if (g.dims == 2) s = std::min(s, g.dx(1));
  return s;
}

bool GridSequenceVelocity::velocity(const std::array<double, 2>& x, double t,
                                    std::array<double, 2>& v) const {
  const auto& times = seq_.times;
  const double t_lo = times.front();
  const double t_hi = times.back();
  double tc = std::clamp(t, t_lo, t_hi);

  std::size_t k = std::upper_bound(times.begin(), times.end(), tc) - times.begin();
  if (k > 0) --k;
  if (k >= times.size() - 1) k = times.size() >= 2 ? times.size() - 2 : 0;

  auto eval = [&](std::size_t idx, std::array<double, 2>& out) {
    const auto& g = seq_.snapshots[idx];
    const LocalField lf = interpolate(g, x);
    if (std::abs(lf.psi) <= node_eps_[idx]) return false;
    out = velocity_from_field(g, lf);
    return true;
  };

  if (times.size() == 1) return eval(0, v);

  std::array<double, 2> va{}, vb{};
  if (!eval(k, va) || !eval(k + 1, vb)) return false;
  const double span = times[k + 1] - times[k];
  const double u = span > 0.0 ? (tc - times[k]) / span : 0.0;
  v[0] = (1.0 - u) * va[0] + u * vb[0];
  v[1] = (1.0 - u) * va[1] + u * vb[1];
  return true;
}

namespace {

enum class StepOutcome { ok, node, exited };

StepOutcome rk4_attempt(const VelocityProvider& field,
                        const std::array<double, 2>& x, double t, double h,
                        double travel_cap, std::array<double, 2>& out) {
  std::array<std::array<double, 2>, 4> k{};
  const std::array<double, 2> offsets{0.5 * h, h};

  auto stage = [&](const std::array<double, 2>& p, double ts,
                   std::array<double, 2>& kv) {
    if (!field.inside(p)) return StepOutcome::exited;
    if (!field.velocity(p, ts, kv)) return StepOutcome::node;
    if (std::hypot(kv[0], kv[1]) * h > travel_cap) return StepOutcome::node;
    return StepOutcome::ok;
  };

  StepOutcome st = stage(x, t, k[0]);
  if (st != StepOutcome::ok) return st;
  std::array<double, 2> p1{x[0] + offsets[0] * k[0][0], x[1] + offsets[0] * k[0][1]};
  st = stage(p1, t + offsets[0], k[1]);
  if (st != StepOutcome::ok) return st;
  std::array<double, 2> p2{x[0] + offsets[0] * k[1][0], x[1] + offsets[0] * k[1][1]};
  st = stage(p2, t + offsets[0], k[2]);
  if (st != StepOutcome::ok) return st;
  std::array<double, 2> p3{x[0] + offsets[1] * k[2][0], x[1] + offsets[1] * k[2][1]};
  st = stage(p3, t + offsets[1], k[3]);
  if (st != StepOutcome::ok) return st;

  out = {x[0] + h / 6.0 * (k[0][0] + 2.0 * k[1][0] + 2.0 * k[2][0] + k[3][0]),
         x[1] + h / 6.0 * (k[0][1] + 2.0 * k[1][1] + 2.0 * k[2][1] + k[3][1])};
  if (!field.inside(out)) return StepOutcome::exited;
  return StepOutcome::ok;
}

}  // namespace

Trajectory integrate_trajectory(const VelocityProvider& field,
                                const std::array<double, 2>& x0, double t0,
                                double t1, double dt, const IntegrateOptions& opts) {
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  if (!(t1 > t0)) throw ConfigError("t1 must exceed t0");
  if (!field.inside(x0)) throw ConfigError("x0 outside the velocity field domain");

  Trajectory traj;
  traj.times.push_back(t0);
  traj.positions.push_back(x0);

  const double h_min = dt / static_cast<double>(1 << opts.max_halvings);
  std::array<double, 2> x = x0;
  double t = t0;

  // Output times come from the step index, not accumulation; repeated
  // addition of dt drifts below t1 and would emit a stray final sample.
  for (long step = 1; t < t1 - 1e-12 * dt; ++step) {
    const double t_next = std::min(t0 + static_cast<double>(step) * dt, t1);
    // Adaptive sub-steps across [t, t_next]; positions recorded only at the
    // base boundaries.
    double tc = t;
    std::array<double, 2> xc = x;
    double h = t_next - tc;
    while (tc < t_next - 1e-12 * dt) {
      h = std::min(h, t_next - tc);
      const double cap = opts.cells_per_step * field.step_scale();
      std::array<double, 2> xn{};
      const StepOutcome st = rk4_attempt(field, xc, tc, h, cap, xn);
      if (st == StepOutcome::exited) {
        traj.status = TrajectoryStatus::exited;
        return traj;
      }
      if (st == StepOutcome::node) {
        h *= 0.5;
        if (h < h_min) {
          throw TrajectoryAbortError(
              "step underflow near a wavefunction node", traj);
        }
        continue;
      }
      xc = xn;
      tc += h;
      h *= 2.0;  // regrow after success, capped at the interval remainder
    }
    x = xc;
    t = t_next;
    traj.times.push_back(t);
    traj.positions.push_back(x);
  }
  return traj;
}

}  // namespace sonolab::pilot
