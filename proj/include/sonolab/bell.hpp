#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "sonolab/vec3.hpp"

namespace sonolab::bell {

inline constexpr double speed_of_light = 299792458.0;       // m/s
inline constexpr double planck_h = 6.62607015e-34;          // J s

/// Spacetime layout of a two-wing correlation experiment. Distances in
/// meters, times in seconds. path_lengths are the fiber/waveguide paths the
/// particles actually travel; the straight-line detector separation is what
/// the timing analysis cares about.
struct ExperimentGeometry {
  std::string name;
  Vec3 source;
  std::array<Vec3, 2> detectors;
  std::array<double, 2> path_lengths{};
  std::optional<double> setting_switch_time;
  std::optional<double> measurement_window;
  std::string notes;

  void validate() const;

  static ExperimentGeometry from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct WindowComparison {
  std::string window;   // "setting_switch" or "measurement"
  double value_s = 0.0;
  // True when the window is shorter than the straight-line light time d/c,
  // i.e. light between the detectors cannot span it.
  bool shorter_than_light_time = false;
};

struct AuditReport {
  std::string experiment;
  double detector_separation_m = 0.0;          // straight-line d
  double separation_light_time_s = 0.0;        // d/c
  std::array<double, 2> source_detector_m{};   // straight-line source legs
  std::array<double, 2> fiber_path_m{};
  double fiber_path_total_m = 0.0;             // D
  std::array<double, 2> fiber_light_time_s{};
  // Relative amplitude of a 1/r carrier bridging the detectors; context
  // only, no cutoff is applied. Absent when d = 0.
  std::optional<double> carrier_amplitude_scale;
  std::vector<WindowComparison> comparisons;
  std::string classification;  // chi_loophole_open | chi_loophole_closed | indeterminate
  std::string notes;

  nlohmann::json to_json() const;
};

/// Pure timing analysis of one geometry: compares d/c against every provided
/// window. Open when d = 0 or no provided window is shorter than d/c; closed
/// when every provided window is shorter; indeterminate when timing data is
/// absent or mixed.
AuditReport audit_experiment(const ExperimentGeometry& geom,
                             double c = speed_of_light);

/// Computations-per-second bound mc^2/h for a computer of the given mass.
double bremermann_limit(double mass_kg);

struct Settings {
  double a = 0.0, a_alt = 0.0, b = 0.0, b_alt = 0.0;  // analyzer angles, rad
};

struct TrialRecord {
  double setting_a = 0.0, setting_b = 0.0;
  int outcome_a = 0, outcome_b = 0;  // +1 / -1
  std::optional<double> hidden;      // shared phase, when the model has one
};

enum class ModelKind { deterministic_table, shared_phase, quantum_oracle };

struct LocalModelSpec {
  ModelKind kind = ModelKind::shared_phase;
  // deterministic_table only: outcomes {A(a), A(a'), B(b), B(b')}.
  std::array<int, 4> table{1, 1, 1, 1};
  bool communication_allowed = false;
};

/// Photon-polarization correlation cos 2(a-b) of a maximally entangled pair.
double quantum_correlation(double a, double b);

/// Outcomes of the shared-phase polarizer model for one hidden phase:
/// A = sign(cos 2(a - lambda)), B = -sign(cos 2(b - lambda)).
std::pair<int, int> shared_phase_outcomes(double a, double b, double lambda);

/// Runs trials_per_pair trials for each of the four CHSH setting pairs.
/// Per-trial RNG streams derive from (seed, global trial index), so results
/// do not depend on evaluation order. quantum_oracle requires
/// communication_allowed.
std::vector<TrialRecord> simulate_local_model(const LocalModelSpec& model,
                                              const Settings& settings,
                                              int trials_per_pair,
                                              std::uint64_t seed);

struct PairCorrelation {
  std::string label;  // ab, ab', a'b, a'b'
  double e = 0.0;
  double stderr_e = 0.0;
  long n = 0;
};

struct CHSHResult {
  std::array<PairCorrelation, 4> pairs;
  double s = 0.0;
  double s_err = 0.0;
};

/// CHSH statistic S = E(a,b) - E(a,b') + E(a',b) + E(a',b') from trial
/// records, errors by binomial propagation. Needs >= 100 trials per pair.
CHSHResult chsh(std::span<const TrialRecord> trials, const Settings& settings);

struct LhvStrategy {
  std::array<int, 4> table;  // A(a), A(a'), B(b), B(b')
  double s = 0.0;
};

/// All 16 deterministic strategies with their exact S values.
std::vector<LhvStrategy> lhv_strategies();

/// Maximum S over deterministic local strategies; 2 for any settings.
double brute_force_lhv_max(const Settings& settings);

}  // namespace sonolab::bell
