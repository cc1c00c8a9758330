#pragma once

#include <array>
#include <functional>
#include <vector>

#include "sonolab/errors.hpp"
#include "sonolab/grid.hpp"
#include "sonolab/propagate.hpp"

namespace sonolab::pilot {

/// |psi| at the requested point is below the node threshold; the velocity
/// field is undefined there.
class NodeProximityError : public Error {
 public:
  explicit NodeProximityError(const std::string& msg) : Error(msg) {}
};

/// Drift velocity (hbar/m) Im(grad psi / psi) at x, with grad psi from
/// central differences on the periodic grid and both psi and grad psi
/// interpolated linearly to x. Node threshold: 1e-12 * max|psi|.
double guidance_velocity(const WavefunctionGrid& grid, double x);

/// 2D variant; bilinear interpolation per component.
std::array<double, 2> guidance_velocity_2d(const WavefunctionGrid& grid,
                                           const std::array<double, 2>& p);

enum class TrajectoryStatus { complete, exited, aborted };

struct Trajectory {
  std::vector<double> times;
  std::vector<std::array<double, 2>> positions;  // [1] stays 0 in 1D
  TrajectoryStatus status = TrajectoryStatus::complete;
};

/// Raised when step halving bottoms out near a node; carries the path up to
/// the last completed output time.
class TrajectoryAbortError : public Error {
 public:
  TrajectoryAbortError(const std::string& msg, Trajectory partial)
      : Error(msg), partial_(std::move(partial)) {}
  const Trajectory& partial() const { return partial_; }

 private:
  Trajectory partial_;
};

/// Velocity field for trajectory integration. Implementations return false
/// from velocity() near nodes instead of throwing; the integrator reacts by
/// shrinking its step.
class VelocityProvider {
 public:
  virtual ~VelocityProvider() = default;
  virtual int dims() const = 0;
  virtual bool velocity(const std::array<double, 2>& x, double t,
                        std::array<double, 2>& v) const = 0;
  virtual bool inside(const std::array<double, 2>& x) const = 0;
  /// Length scale for the per-step travel cap; +inf disables the cap.
  virtual double step_scale() const = 0;
};

/// Closed-form velocity field (plane wave, free packet oracles).
class AnalyticVelocity final : public VelocityProvider {
 public:
  using Fn = std::function<std::array<double, 2>(const std::array<double, 2>&, double)>;
  AnalyticVelocity(int dims, Fn fn) : dims_(dims), fn_(std::move(fn)) {}
  int dims() const override { return dims_; }
  bool velocity(const std::array<double, 2>& x, double t,
                std::array<double, 2>& v) const override {
    v = fn_(x, t);
    return true;
  }
  bool inside(const std::array<double, 2>&) const override { return true; }
  double step_scale() const override { return 1e300; }

 private:
  int dims_;
  Fn fn_;
};

/// Velocity from a propagation snapshot sequence, linear in time between
/// snapshots. The sequence must outlive the provider.
class GridSequenceVelocity final : public VelocityProvider {
 public:
  explicit GridSequenceVelocity(const PropagationResult& seq);
  int dims() const override;
  bool velocity(const std::array<double, 2>& x, double t,
                std::array<double, 2>& v) const override;
  bool inside(const std::array<double, 2>& x) const override;
  double step_scale() const override;

 private:
  const PropagationResult& seq_;
  std::vector<double> node_eps_;  // per snapshot
};

struct IntegrateOptions {
  int max_halvings = 10;        // dt_min = dt / 2^10
  double cells_per_step = 2.0;  // velocity cap: |v| h <= cells_per_step * dx
};

/// RK4 integration of dx/dt = v(x, t) from t0 to t1 with output every dt.
/// Steps halve near nodes or when the travel cap trips; exhausting the
/// halving budget raises TrajectoryAbortError with the partial path. Leaving
/// the provider's domain ends the path with status exited.
Trajectory integrate_trajectory(const VelocityProvider& field,
                                const std::array<double, 2>& x0, double t0,
                                double t1, double dt,
                                const IntegrateOptions& opts = {});

}  // namespace sonolab::pilot
