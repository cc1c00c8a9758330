#pragma once

#include <cstdint>
#include <vector>

#include "sonolab/guidance.hpp"
#include "sonolab/grid.hpp"
#include "sonolab/propagate.hpp"

namespace sonolab::pilot {

enum class ScenarioKind { plane_wave, gaussian_free, double_slit, barrier };

/// One self-contained experiment: initial wavefunction, potential, and the
/// propagation/trajectory cadence. Units are natural (hbar = m = 1 by
/// default); traj_dt must be an even multiple of dt so that snapshots land
/// on RK4 stage times.
struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::gaussian_free;
  double hbar = 1.0;
  double mass = 1.0;
  double domain_min = -40.0;
  double domain_max = 40.0;
  int samples = 1024;
  double t_final = 6.0;
  double dt = 0.01;
  double traj_dt = 0.02;
  bool absorbing = false;

  double wavenumber = 1.0;     // plane_wave
  double window_width = 20.0;  // plane_wave initial support

  double sigma0 = 1.0;  // packet width (std of |psi|^2)
  double x0 = 0.0;      // packet center
  double v0 = 0.0;      // packet velocity

  double slit_separation = 6.0;  // double_slit, center to center
  double slit_width = 1.0;       // double_slit, per-packet sigma

  double barrier_height = 1.0;
  double barrier_width = 1.0;

  int histogram_bins = 64;

  void validate() const;
};

ScenarioSpec default_scenario(ScenarioKind kind);

/// Initial wavefunction for grid-backed scenarios. plane_wave is handled
/// analytically by run_ensemble and has no grid state.
WavefunctionGrid initial_state(const ScenarioSpec& spec);

PotentialFn scenario_potential(const ScenarioSpec& spec);

struct EnsembleResult {
  std::vector<double> sample_times;
  std::vector<Trajectory> trajectories;  // all, including exited/aborted
  std::vector<double> final_positions;   // completed trajectories only
  int n_complete = 0;
  int n_aborted = 0;
  int n_exited = 0;
  double ks_final = 0.0;  // KS distance of final positions vs |psi(T)|^2
  std::vector<double> bin_centers;
  std::vector<double> bin_counts;
  std::vector<double> bin_probability;  // |psi(T)|^2 mass per bin
  double masked_probability = 0.0;
  double norm_drift = 0.0;
  WavefunctionGrid final_state;  // empty for plane_wave
};

/// Propagates the scenario once, samples initial positions from |psi(0)|^2
/// with per-trajectory RNG streams, and integrates every trajectory against
/// the shared snapshot sequence. Aborted trajectories above 1% of n_traj
/// raise AnalysisError.
EnsembleResult run_ensemble(const ScenarioSpec& spec, int n_traj,
                            std::uint64_t seed);

struct TunnelingResult {
  double trajectory_fraction = 0.0;  // completed trajectories past the barrier
  double wave_fraction = 0.0;        // |psi(T)|^2 mass past the barrier
  double mc_stderr = 0.0;
  double barrier_edge = 0.0;
  int n_complete = 0;
  int n_aborted = 0;
  int n_exited = 0;
};

/// Barrier-scenario transmission via both estimators. Requires the packet's
/// mean energy below the barrier height.
TunnelingResult tunneling_transmission(const ScenarioSpec& spec, int n_traj,
                                       std::uint64_t seed);

}  // namespace sonolab::pilot
