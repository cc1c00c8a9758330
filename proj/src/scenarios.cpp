#include "sonolab/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>
#include <utility>

#include "sonolab/errors.hpp"
#include "sonolab/rng.hpp"

#ifdef SONOLAB_HAVE_OPENMP
#include <omp.h>
#endif

namespace sonolab::pilot {

namespace {

bool is_even_multiple(double coarse, double fine) {
  if (!(fine > 0.0) || !(coarse > 0.0)) return false;
  const double ratio = coarse / fine;
  const double rounded = std::round(ratio / 2.0) * 2.0;
  return rounded >= 2.0 && std::abs(ratio - rounded) < 1e-9 * rounded;
}

}  // namespace

void ScenarioSpec::validate() const {
  if (!(hbar > 0.0) || !(mass > 0.0))
    throw ConfigError("hbar and mass must be positive");
  if (!(t_final > 0.0)) throw ConfigError("t_final must be positive");
  if (!(traj_dt > 0.0)) throw ConfigError("traj_dt must be positive");
  if (histogram_bins < 2) throw ConfigError("histogram needs >= 2 bins");
  if (kind == ScenarioKind::plane_wave) {
    if (!(window_width > 0.0)) throw ConfigError("window_width must be positive");
    if (!std::isfinite(wavenumber)) throw ConfigError("wavenumber must be finite");
    if (!(domain_max > domain_min)) throw ConfigError("domain must be nonempty");
    return;
  }
  if (!(domain_max > domain_min)) throw ConfigError("domain must be nonempty");
  if (samples < 64) throw ConfigError("grid needs >= 64 samples per axis");
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  if (!is_even_multiple(traj_dt, dt))
    throw ConfigError("traj_dt must be an even multiple of dt");
  if (!(sigma0 > 0.0)) throw ConfigError("sigma0 must be positive");
  if (kind == ScenarioKind::double_slit) {
    if (!(slit_separation > 0.0))
      throw ConfigError("slit_separation must be positive");
    if (!(slit_width > 0.0)) throw ConfigError("slit_width must be positive");
  }
  if (kind == ScenarioKind::barrier) {
    if (barrier_height < 0.0)
      throw ConfigError("barrier_height must be nonnegative");
    if (!(barrier_width > 0.0))
      throw ConfigError("barrier_width must be positive");
    if (barrier_width >= 0.5 * (domain_max - domain_min))
      throw ConfigError("barrier must sit inside the grid interior");
  }
}

ScenarioSpec default_scenario(ScenarioKind kind) {
  ScenarioSpec s;
  s.kind = kind;
  switch (kind) {
    case ScenarioKind::plane_wave:
      s.domain_min = -50.0;
      s.domain_max = 50.0;
      s.wavenumber = 1.0;
      s.window_width = 20.0;
      s.x0 = 0.0;
      s.t_final = 10.0;
      s.traj_dt = 0.1;
      break;
    case ScenarioKind::gaussian_free:
      s.domain_min = -40.0;
      s.domain_max = 40.0;
      s.samples = 1024;
      s.sigma0 = 1.0;
      s.x0 = 0.0;
      s.v0 = 0.0;
      s.t_final = 6.0;
      s.dt = 0.01;
      s.traj_dt = 0.02;
      break;
    case ScenarioKind::double_slit:
      s.domain_min = -48.0;
      s.domain_max = 48.0;
      s.samples = 2048;
      s.slit_separation = 6.0;
      s.slit_width = 1.0;
      s.t_final = 12.0;
      s.dt = 0.01;
      s.traj_dt = 0.02;
      break;
    case ScenarioKind::barrier:
      // dx = barrier_width/7 exactly, with x = 0 on a grid node, so the
      // barrier indicator always covers the same 7 nodes.
      s.samples = 4096;
      s.domain_min = -2048.0 / 7.0;
      s.domain_max = 2048.0 / 7.0;
      s.sigma0 = 10.0;
      s.x0 = -50.0;
      s.v0 = 1.0;
      s.barrier_height = 1.0;
      s.barrier_width = 1.0;
      s.t_final = 120.0;
      s.dt = 0.025;
      s.traj_dt = 0.25;
      break;
  }
  return s;
}

WavefunctionGrid initial_state(const ScenarioSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case ScenarioKind::plane_wave:
      throw ConfigError("plane_wave has no grid state");
    case ScenarioKind::gaussian_free:
    case ScenarioKind::barrier: {
      const double k0 = spec.mass * spec.v0 / spec.hbar;
      return gaussian_packet_1d(spec.domain_min, spec.domain_max, spec.samples,
                                spec.x0, spec.sigma0, k0, spec.mass, spec.hbar);
    }
    case ScenarioKind::double_slit: {
      const double half = 0.5 * spec.slit_separation;
      WavefunctionGrid a =
          gaussian_packet_1d(spec.domain_min, spec.domain_max, spec.samples,
                             -half, spec.slit_width, 0.0, spec.mass, spec.hbar);
      const WavefunctionGrid b =
          gaussian_packet_1d(spec.domain_min, spec.domain_max, spec.samples,
                             half, spec.slit_width, 0.0, spec.mass, spec.hbar);
      for (int j = 0; j < spec.samples; ++j) a.values[j] += b.values[j];
      const double nrm = a.norm();
      for (auto& v : a.values) v /= nrm;
      return a;
    }
  }
  throw ConfigError("unknown scenario kind");
}

PotentialFn scenario_potential(const ScenarioSpec& spec) {
  if (spec.kind == ScenarioKind::barrier) {
    const double v0 = spec.barrier_height;
    const double edge = 0.5 * spec.barrier_width + 1e-12;
    return [v0, edge](double x, double) {
      return std::abs(x) <= edge ? v0 : 0.0;
    };
  }
  return [](double, double) { return 0.0; };
}

namespace {

struct GridEnsemble {
  PropagationResult propagation;
  std::vector<double> sample_times;
  std::vector<Trajectory> trajectories;
  int n_complete = 0;
  int n_aborted = 0;
  int n_exited = 0;
};

GridEnsemble integrate_grid_ensemble(const ScenarioSpec& spec, int n_traj,
                                     std::uint64_t seed) {
  const WavefunctionGrid psi0 = initial_state(spec);
  const PotentialFn potential = scenario_potential(spec);

  const int steps = static_cast<int>(std::round(spec.t_final / spec.dt));
  const int stride =
      static_cast<int>(std::round(spec.traj_dt / (2.0 * spec.dt)));

  PropagateOptions opts;
  opts.snapshot_stride = stride;
  opts.absorbing_mask = spec.absorbing;

  GridEnsemble out;
  out.propagation = propagate(psi0, potential, spec.dt, steps, opts);

  std::vector<double> uniforms(static_cast<std::size_t>(n_traj));
  for (int i = 0; i < n_traj; ++i)
    uniforms[i] = Rng::stream(seed, static_cast<std::uint64_t>(i)).uniform01();
  const std::vector<double> starts = sample_positions_1d(psi0, uniforms);

  const GridSequenceVelocity field(out.propagation);
  out.trajectories.resize(static_cast<std::size_t>(n_traj));

#ifdef SONOLAB_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (int i = 0; i < n_traj; ++i) {
    try {
      out.trajectories[i] = integrate_trajectory(
          field, {starts[i], 0.0}, 0.0, spec.t_final, spec.traj_dt);
    } catch (const TrajectoryAbortError& e) {
      Trajectory partial = e.partial();
      partial.status = TrajectoryStatus::aborted;
      out.trajectories[i] = std::move(partial);
    }
  }

  for (const Trajectory& tr : out.trajectories) {
    switch (tr.status) {
      case TrajectoryStatus::complete: ++out.n_complete; break;
      case TrajectoryStatus::exited: ++out.n_exited; break;
      case TrajectoryStatus::aborted: ++out.n_aborted; break;
    }
  }
  if (out.n_aborted * 100 > n_traj)
    throw AnalysisError("ensemble quality: more than 1% of trajectories "
                        "aborted near wavefunction nodes");

  out.sample_times.reserve(static_cast<std::size_t>(
      std::lround(spec.t_final / spec.traj_dt)) + 1);
  for (const Trajectory& tr : out.trajectories) {
    if (tr.status == TrajectoryStatus::complete) {
      out.sample_times = tr.times;
      break;
    }
  }
  if (out.sample_times.empty() && !out.trajectories.empty())
    out.sample_times = out.trajectories.front().times;
  return out;
}

void fill_histogram(EnsembleResult& res, const ScenarioSpec& spec,
                    const WavefunctionGrid* final_state) {
  const int bins = spec.histogram_bins;
  const double lo = spec.domain_min;
  const double hi = spec.domain_max;
  const double width = (hi - lo) / bins;
  res.bin_centers.assign(static_cast<std::size_t>(bins), 0.0);
  res.bin_counts.assign(static_cast<std::size_t>(bins), 0.0);
  res.bin_probability.assign(static_cast<std::size_t>(bins), 0.0);
  for (int b = 0; b < bins; ++b)
    res.bin_centers[b] = lo + (b + 0.5) * width;
  for (double x : res.final_positions) {
    int b = static_cast<int>((x - lo) / width);
    b = std::clamp(b, 0, bins - 1);
    res.bin_counts[b] += 1.0;
  }
  if (final_state != nullptr) {
    const double dx = final_state->dx(0);
    const double total = final_state->norm() * final_state->norm();
    for (int j = 0; j < final_state->samples[0]; ++j) {
      const double x = final_state->x_of(0, j);
      int b = static_cast<int>((x - lo) / width);
      b = std::clamp(b, 0, bins - 1);
      res.bin_probability[b] += std::norm(final_state->values[j]) * dx / total;
    }
  }
}

EnsembleResult run_plane_wave_ensemble(const ScenarioSpec& spec, int n_traj,
                                       std::uint64_t seed) {
  const double v = spec.hbar * spec.wavenumber / spec.mass;
  const double lo0 = spec.x0 - 0.5 * spec.window_width;
  const AnalyticVelocity field(
      1, [v](const std::array<double, 2>&, double) {
        return std::array<double, 2>{v, 0.0};
      });

  EnsembleResult res;
  res.trajectories.reserve(static_cast<std::size_t>(n_traj));
  for (int i = 0; i < n_traj; ++i) {
    const double u =
        Rng::stream(seed, static_cast<std::uint64_t>(i)).uniform01();
    const double start = lo0 + u * spec.window_width;
    res.trajectories.push_back(integrate_trajectory(
        field, {start, 0.0}, 0.0, spec.t_final, spec.traj_dt));
    res.final_positions.push_back(res.trajectories.back().positions.back()[0]);
  }
  res.n_complete = n_traj;
  res.sample_times = res.trajectories.front().times;

  const double lo_t = lo0 + v * spec.t_final;
  const double w = spec.window_width;
  res.ks_final = ks_distance(res.final_positions, [lo_t, w](double x) {
    return std::clamp((x - lo_t) / w, 0.0, 1.0);
  });

  fill_histogram(res, spec, nullptr);
  // The advected window is the exact density; express it as mass per bin.
  const int bins = spec.histogram_bins;
  const double width = (spec.domain_max - spec.domain_min) / bins;
  for (int b = 0; b < bins; ++b) {
    const double bl = spec.domain_min + b * width;
    const double overlap =
        std::max(0.0, std::min(bl + width, lo_t + w) - std::max(bl, lo_t));
    res.bin_probability[b] = overlap / w;
  }
  return res;
}

}  // namespace

EnsembleResult run_ensemble(const ScenarioSpec& spec, int n_traj,
                            std::uint64_t seed) {
  spec.validate();
  if (n_traj < 1) throw ConfigError("ensemble needs at least one trajectory");
  if (spec.kind == ScenarioKind::plane_wave)
    return run_plane_wave_ensemble(spec, n_traj, seed);

  GridEnsemble ens = integrate_grid_ensemble(spec, n_traj, seed);

  EnsembleResult res;
  res.sample_times = std::move(ens.sample_times);
  res.n_complete = ens.n_complete;
  res.n_aborted = ens.n_aborted;
  res.n_exited = ens.n_exited;
  res.masked_probability = ens.propagation.masked_probability;
  res.norm_drift = ens.propagation.final_norm_drift;
  res.final_state = ens.propagation.snapshots.back();
  res.trajectories = std::move(ens.trajectories);
  for (const Trajectory& tr : res.trajectories)
    if (tr.status == TrajectoryStatus::complete)
      res.final_positions.push_back(tr.positions.back()[0]);

  if (!res.final_positions.empty())
    res.ks_final = ks_distance_1d(res.final_state, res.final_positions);
  fill_histogram(res, spec, &res.final_state);
  return res;
}

TunnelingResult tunneling_transmission(const ScenarioSpec& spec, int n_traj,
                                       std::uint64_t seed) {
  spec.validate();
  if (spec.kind != ScenarioKind::barrier)
    throw ConfigError("transmission analysis requires the barrier scenario");
  const double kinetic = 0.5 * spec.mass * spec.v0 * spec.v0 +
                         spec.hbar * spec.hbar /
                             (8.0 * spec.mass * spec.sigma0 * spec.sigma0);
  // height == 0 is the no-barrier limit; only the genuine over-barrier
  // regime is refused.
  if (spec.barrier_height > 0.0 && kinetic >= spec.barrier_height)
    throw ConfigError("packet mean energy must sit below the barrier height");

  GridEnsemble ens = integrate_grid_ensemble(spec, n_traj, seed);

  TunnelingResult out;
  out.barrier_edge = 0.5 * spec.barrier_width;
  out.n_complete = ens.n_complete;
  out.n_aborted = ens.n_aborted;
  out.n_exited = ens.n_exited;
  if (ens.n_complete == 0)
    throw AnalysisError("ensemble quality: no trajectory completed");

  int past = 0;
  for (const Trajectory& tr : ens.trajectories)
    if (tr.status == TrajectoryStatus::complete &&
        tr.positions.back()[0] > out.barrier_edge)
      ++past;
  const double n = static_cast<double>(ens.n_complete);
  out.trajectory_fraction = past / n;
  out.mc_stderr = std::sqrt(
      std::max(0.0, out.trajectory_fraction * (1.0 - out.trajectory_fraction)) /
      n);

  const WavefunctionGrid& fin = ens.propagation.snapshots.back();
  const double dx = fin.dx(0);
  const double total = fin.norm() * fin.norm();
  double mass_past = 0.0;
  for (int j = 0; j < fin.samples[0]; ++j)
    if (fin.x_of(0, j) > out.barrier_edge)
      mass_past += std::norm(fin.values[j]) * dx;
  out.wave_fraction = mass_past / total;
  return out;
}

}  // namespace sonolab::pilot
