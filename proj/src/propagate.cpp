#include "sonolab/propagate.hpp"

#include <fftw3.h>

#include <cmath>

#include "sonolab/errors.hpp"

namespace sonolab::pilot {

namespace {

constexpr double kPi = 3.141592653589793238462643;

// FFT wavenumbers 2*pi*j/L with the negative half mapped to j - n.
std::vector<double> fft_wavenumbers(int n, double length) {
  std::vector<double> k(n);
  const double base = 2.0 * kPi / length;
  for (int j = 0; j < n; ++j) {
    const int jj = j <= n / 2 ? j : j - n;
    k[j] = base * jj;
  }
  return k;
}

class SplitStepPlan {
 public:
  SplitStepPlan(const WavefunctionGrid& g, double dt)
      : n0_(g.samples[0]), n1_(g.samples[1]), size_(g.values.size()) {
    buf_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * size_));
    if (!buf_) throw PropagationError("fftw buffer allocation failed");
    // FFTW_ESTIMATE keeps plans deterministic (no timing-based choices).
    if (g.dims == 1) {
      fwd_ = fftw_plan_dft_1d(n0_, buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
      bwd_ = fftw_plan_dft_1d(n0_, buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
    } else {
      fwd_ = fftw_plan_dft_2d(n0_, n1_, buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
      bwd_ = fftw_plan_dft_2d(n0_, n1_, buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    if (!fwd_ || !bwd_) throw PropagationError("fftw plan creation failed");

    // Kinetic phase per step: exp(-i hbar k^2 dt / 2m).
    const auto k0 = fft_wavenumbers(n0_, g.x_max[0] - g.x_min[0]);
    const auto k1 = g.dims == 2
                        ? fft_wavenumbers(n1_, g.x_max[1] - g.x_min[1])
                        : std::vector<double>{0.0};
    kinetic_.resize(size_);
    for (int ix = 0; ix < n0_; ++ix) {
      for (int iy = 0; iy < n1_; ++iy) {
        const double k2 = k0[ix] * k0[ix] + k1[iy] * k1[iy];
        const double phase = -g.hbar * k2 * dt / (2.0 * g.mass);
        kinetic_[static_cast<std::size_t>(ix) * n1_ + iy] =
            std::complex<double>(std::cos(phase), std::sin(phase));
      }
    }
  }

  ~SplitStepPlan() {
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
    fftw_free(buf_);
  }

  SplitStepPlan(const SplitStepPlan&) = delete;
  SplitStepPlan& operator=(const SplitStepPlan&) = delete;

  void kinetic_step(std::vector<std::complex<double>>& psi) {
    for (std::size_t i = 0; i < size_; ++i) {
      buf_[i][0] = psi[i].real();
      buf_[i][1] = psi[i].imag();
    }
    fftw_execute(fwd_);
    for (std::size_t i = 0; i < size_; ++i) {
      const std::complex<double> v(buf_[i][0], buf_[i][1]);
      const std::complex<double> w = v * kinetic_[i];
      buf_[i][0] = w.real();
      buf_[i][1] = w.imag();
    }
    fftw_execute(bwd_);
    const double inv = 1.0 / static_cast<double>(size_);
    for (std::size_t i = 0; i < size_; ++i) {
      psi[i] = std::complex<double>(buf_[i][0] * inv, buf_[i][1] * inv);
    }
  }

 private:
  int n0_, n1_;
  std::size_t size_;
  fftw_complex* buf_ = nullptr;
  fftw_plan fwd_ = nullptr, bwd_ = nullptr;
  std::vector<std::complex<double>> kinetic_;
};

}  // namespace

PropagationResult propagate(const WavefunctionGrid& psi0, const PotentialFn& potential,
                            double dt, int steps, const PropagateOptions& opts) {
  psi0.validate();
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  if (steps < 0) throw ConfigError("steps must be non-negative");
  if (opts.snapshot_stride < 1) throw ConfigError("snapshot_stride must be >= 1");
  if (opts.absorbing_mask &&
      (!(opts.mask_fraction > 0.0) || !(opts.mask_fraction < 0.5))) {
    throw ConfigError("mask_fraction must lie in (0, 0.5)");
  }

  PropagationResult res;
  res.snapshots.push_back(psi0);
  res.times.push_back(0.0);
  if (steps == 0) return res;

  const int n0 = psi0.samples[0];
  const int n1 = psi0.samples[1];

  // Half-step potential kick phases exp(-i V dt / 2 hbar).
  std::vector<std::complex<double>> half_kick(psi0.values.size());
  for (int ix = 0; ix < n0; ++ix) {
    for (int iy = 0; iy < n1; ++iy) {
      const double v = potential(psi0.x_of(0, ix),
                                 psi0.dims == 2 ? psi0.x_of(1, iy) : 0.0);
      if (!std::isfinite(v)) throw ConfigError("potential must be bounded");
      const double phase = -v * dt / (2.0 * psi0.hbar);
      half_kick[static_cast<std::size_t>(ix) * n1 + iy] =
          std::complex<double>(std::cos(phase), std::sin(phase));
    }
  }

  // Optional cosine taper: 1 in the interior, falling to 0 at the edges over
  // the outer mask_fraction of each axis.
  std::vector<double> mask;
  if (opts.absorbing_mask) {
    mask.assign(psi0.values.size(), 1.0);
    for (int ix = 0; ix < n0; ++ix) {
      for (int iy = 0; iy < n1; ++iy) {
        double m = 1.0;
        for (int axis = 0; axis < psi0.dims; ++axis) {
          const int idx = axis == 0 ? ix : iy;
          const int n = psi0.samples[axis];
          const double edge = opts.mask_fraction * n;
          const double from_edge = std::min<double>(idx, n - 1 - idx);
          if (from_edge < edge) {
            const double s = from_edge / edge;  // 0 at boundary, 1 inside
            m *= 0.5 * (1.0 - std::cos(kPi * s));
          }
        }
        mask[static_cast<std::size_t>(ix) * n1 + iy] = m;
      }
    }
  }

  SplitStepPlan plan(psi0, dt);
  WavefunctionGrid cur = psi0;
  const double vol = psi0.cell_volume();
  const double norm0_sq = [&] {
    double acc = 0.0;
    for (const auto& v : cur.values) acc += std::norm(v);
    return acc * vol;
  }();

  for (int s = 1; s <= steps; ++s) {
    for (std::size_t i = 0; i < cur.values.size(); ++i) {
      cur.values[i] *= half_kick[i];
    }
    plan.kinetic_step(cur.values);
    for (std::size_t i = 0; i < cur.values.size(); ++i) {
      cur.values[i] *= half_kick[i];
    }
    if (opts.absorbing_mask) {
      double before = 0.0, after = 0.0;
      for (std::size_t i = 0; i < cur.values.size(); ++i) {
        before += std::norm(cur.values[i]);
        cur.values[i] *= mask[i];
        after += std::norm(cur.values[i]);
      }
      res.masked_probability += (before - after) * vol / norm0_sq;
    } else {
      double acc = 0.0;
      for (const auto& v : cur.values) acc += std::norm(v);
      const double drift = std::abs(acc * vol / norm0_sq - 1.0);
      res.final_norm_drift = drift;
      if (!(drift < opts.norm_drift_tol) || !std::isfinite(acc)) {
        throw PropagationError("norm drift exceeds tolerance: propagation unstable");
      }
    }
    if (s % opts.snapshot_stride == 0 || s == steps) {
      res.snapshots.push_back(cur);
      res.times.push_back(s * dt);
    }
  }
  return res;
}

}  // namespace sonolab::pilot
