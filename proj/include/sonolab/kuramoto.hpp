#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sonolab/vec3.hpp"

namespace sonolab::sync {

enum class KernelKind { uniform, inverse_r, carrier, table };

/// Distance dependence of the pairwise coupling. "carrier" is the signed
/// standing-wave form sin(k_r r)/r; "table" interpolates user samples
/// linearly and clamps outside their range.
struct CouplingKernel {
  KernelKind kind = KernelKind::uniform;
  double k_r = 1.0;  // carrier only
  std::vector<std::pair<double, double>> samples;  // table only, sorted by r

  double operator()(double r) const;
  void validate() const;
};

/// Phase oscillators at fixed spatial positions.
/// dtheta_i/dt = omega_i + sum_{j != i} K kernel(r_ij) sin(theta_j - theta_i)
/// Couplings are not divided by N; K carries the full scale.
struct OscillatorNetwork {
  std::vector<Vec3> positions;
  std::vector<double> natural_freqs;
  std::vector<double> phases;  // kept wrapped to [0, 2pi)
  double coupling = 1.0;
  CouplingKernel kernel;

  void validate() const;
  std::size_t size() const { return positions.size(); }
};

double wrap_phase(double theta);

/// One RK4 step with phases re-wrapped to [0, 2pi). Throws StepError when
/// dt * max|dtheta/dt| reaches 0.1 rad; the dynamics are unresolved past that.
OscillatorNetwork step_network(const OscillatorNetwork& net, double dt);

struct OrderParameter {
  double r = 0.0;
  double mean_phase = 0.0;
};

/// Magnitude and angle of the mean phasor (1/N) sum exp(i theta_j).
OrderParameter order_parameter(std::span<const double> phases);

struct PhaseHistory {
  std::vector<double> times;
  // [sample][oscillator], accumulated without wrapping so phase differences
  // can be tracked across the analysis window.
  std::vector<std::vector<double>> phases;
};

/// Integrate in place, recording every record_stride steps (and the final
/// state). net.phases ends wrapped; the history accumulates unwrapped.
PhaseHistory integrate_network(OscillatorNetwork& net, double t_end, double dt,
                               int record_stride = 1);

struct CoherenceReport {
  int cluster_count = 0;
  std::vector<std::vector<int>> clusters;  // oscillator indices, each sorted
  bool locked = false;                     // single cluster
  std::vector<double> trace_times;
  std::vector<double> trace_r;
  std::vector<double> trace_mean_phase;
};

/// Frequency clusters over the trailing window: a pair belongs together when
/// its phase difference varies by less than tol (rad) across the window;
/// clusters are the transitive closure. Needs at least two recorded samples
/// inside the window.
CoherenceReport detect_clusters(const PhaseHistory& history, double window,
                                double tol = 0.1);

/// |omega_1 - omega_2| below which an isolated pair at distance r locks.
double pair_lock_threshold(double coupling, const CouplingKernel& kernel,
                           double r);

/// Isoceles triangle with given apex angle, constant perimeter; apex on the
/// y axis, base on the x axis. 180 degrees degenerates to three collinear
/// points: the apex lands midway between the base endpoints.
std::vector<Vec3> triangle_vertices(double apex_angle_deg, double perimeter);

std::vector<Vec3> tetrahedron_vertices(double edge);

/// Square with the same mean pairwise distance as a regular tetrahedron of
/// the given edge length.
std::vector<Vec3> square_vertices_matched(double tetra_edge);

double mean_pair_distance(std::span<const Vec3> positions);

struct SyncTrial {
  double final_r = 0.0;  // order parameter averaged over the analysis window
  int cluster_count = 0;
};

struct EnsembleStats {
  std::string label;
  double mean_r = 0.0;
  double std_r = 0.0;
  double stderr_r = 0.0;
  std::vector<double> p_clusters;  // p_clusters[k-1] = fraction with k clusters
  std::vector<SyncTrial> trials;
};

struct SweepConfig {
  double coupling = 1.0;
  CouplingKernel kernel{KernelKind::inverse_r};
  double perimeter = 3.0;
  // Natural frequency spread; unset means 5% of the coupling rate at the
  // mean pair distance.
  std::optional<double> jitter_sigma;
  int trials = 200;
  std::uint64_t seed = 0;
  // Time scales relative to rate = K kernel(mean r) + jitter sigma. The
  // jitter term keeps the scales finite for K = 0 control runs.
  double dt_scale = 0.01;
  double transient_scale = 100.0;
  double window_scale = 20.0;
  double cluster_tol = 0.1;
};

double effective_jitter_sigma(std::span<const Vec3> positions,
                              const SweepConfig& cfg);

/// Random-phase, random-frequency trials on a fixed geometry. stream_base
/// offsets the per-trial RNG streams so sweep points stay independent.
EnsembleStats run_geometry_ensemble(std::span<const Vec3> positions,
                                    const SweepConfig& cfg,
                                    std::uint64_t stream_base,
                                    const std::string& label);

struct TriangleSweepResult {
  std::vector<double> angles_deg;
  std::vector<EnsembleStats> per_angle;
  double z_90_vs_180 = 0.0;
  std::string verdict;  // direction of the 90 vs 180 effect, if resolved
};

TriangleSweepResult triangle_sweep(const SweepConfig& cfg,
                                   std::span<const double> angles_deg);

struct ShapeComparison {
  EnsembleStats tetrahedron;
  EnsembleStats square;
  double matched_mean_distance = 0.0;
  double z = 0.0;
  std::string verdict;
};

/// Regular tetrahedron vs coplanar square at equal mean pairwise distance.
ShapeComparison tetrahedron_comparison(double edge, const SweepConfig& cfg);

}  // namespace sonolab::sync
