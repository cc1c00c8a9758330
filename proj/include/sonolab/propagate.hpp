#pragma once

#include <functional>
#include <vector>

#include "sonolab/grid.hpp"

namespace sonolab::pilot {

/// Static potential sampler; the y argument is ignored for 1D grids.
using PotentialFn = std::function<double(double x, double y)>;

struct PropagateOptions {
  int snapshot_stride = 1;  // keep every stride-th step (plus the initial state)
  bool absorbing_mask = false;
  double mask_fraction = 0.1;     // tapered share of the domain per edge pair
  double norm_drift_tol = 1e-6;   // relative; checked only without the mask
};

struct PropagationResult {
  std::vector<WavefunctionGrid> snapshots;  // snapshots[0] is the initial state
  std::vector<double> times;
  double masked_probability = 0.0;   // total probability removed by the mask
  double final_norm_drift = 0.0;     // |norm/norm0 - 1| at the end
};

/// Split-step spectral propagation of i hbar dpsi/dt = -hbar^2/2m lap psi + V psi.
///
/// Strang splitting: half potential kick, exact kinetic evolution in k-space,
/// half kick; the scheme is norm-preserving, so any drift beyond
/// norm_drift_tol means the state has broken down (NaN injection, unbounded
/// potential) and raises PropagationError. The optional absorbing mask is a
/// cosine taper over the outer mask_fraction of each axis, applied every
/// step; removed probability is accumulated, not silently lost.
PropagationResult propagate(const WavefunctionGrid& psi0, const PotentialFn& potential,
                            double dt, int steps, const PropagateOptions& opts = {});

}  // namespace sonolab::pilot
