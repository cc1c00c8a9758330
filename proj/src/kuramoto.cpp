#include "sonolab/kuramoto.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "sonolab/errors.hpp"
#include "sonolab/rng.hpp"

namespace sonolab::sync {

namespace {
constexpr double kPi = 3.141592653589793238462643;
constexpr double kTwoPi = 6.283185307179586476925287;
}  // namespace

void CouplingKernel::validate() const {
  if (kind == KernelKind::carrier && !(k_r > 0.0)) {
    throw ConfigError("carrier kernel requires k_r > 0");
  }
  if (kind == KernelKind::table) {
    if (samples.size() < 2) throw ConfigError("table kernel needs >= 2 samples");
    for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
      if (!(samples[i].first < samples[i + 1].first)) {
        throw ConfigError("table kernel samples must have increasing r");
      }
    }
    if (!(samples.front().first > 0.0)) {
      throw ConfigError("table kernel samples must have r > 0");
    }
  }
}

double CouplingKernel::operator()(double r) const {
  if (!(r > 0.0)) throw ConfigError("kernel evaluated at non-positive distance");
  switch (kind) {
    case KernelKind::uniform:
      return 1.0;
    case KernelKind::inverse_r:
      return 1.0 / r;
    case KernelKind::carrier:
      return std::sin(k_r * r) / r;
    case KernelKind::table: {
      if (r <= samples.front().first) return samples.front().second;
      if (r >= samples.back().first) return samples.back().second;
      auto it = std::upper_bound(
          samples.begin(), samples.end(), r,
          [](double v, const std::pair<double, double>& s) { return v < s.first; });
      const auto& hi = *it;
      const auto& lo = *(it - 1);
      const double f = (r - lo.first) / (hi.first - lo.first);
      return lo.second + f * (hi.second - lo.second);
    }
  }
  throw ConfigError("unknown kernel kind");
}

void OscillatorNetwork::validate() const {
  const std::size_t n = positions.size();
  if (n < 2) throw ConfigError("network needs at least 2 oscillators");
  if (natural_freqs.size() != n || phases.size() != n) {
    throw ConfigError("network arrays must have matching lengths");
  }
  for (double th : phases) {
    if (!(th >= 0.0) || !(th < kTwoPi)) {
      throw ConfigError("phases must be reduced to [0, 2pi)");
    }
  }
  kernel.validate();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!(distance(positions[i], positions[j]) > 0.0)) {
        throw ConfigError("oscillator positions must be distinct");
      }
    }
  }
  if (!std::isfinite(coupling)) throw ConfigError("coupling must be finite");
}

namespace {

// Pairwise coupling matrix K * kernel(r_ij); zero diagonal.
std::vector<double> coupling_matrix(const OscillatorNetwork& net) {
  const std::size_t n = net.size();
  std::vector<double> k(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v =
          net.coupling * net.kernel(distance(net.positions[i], net.positions[j]));
      k[i * n + j] = v;
      k[j * n + i] = v;
    }
  }
  return k;
}

void rhs(const std::vector<double>& kmat, const std::vector<double>& omega,
         const std::vector<double>& theta, std::vector<double>& out) {
  const std::size_t n = omega.size();
  for (std::size_t i = 0; i < n; ++i) {
    double acc = omega[i];
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      acc += kmat[i * n + j] * std::sin(theta[j] - theta[i]);
    }
    out[i] = acc;
  }
}

class Stepper {
 public:
  explicit Stepper(const OscillatorNetwork& net)
      : kmat_(coupling_matrix(net)),
        omega_(net.natural_freqs),
        n_(net.size()),
        k1_(n_), k2_(n_), k3_(n_), k4_(n_), tmp_(n_) {}

  // One classical RK4 step in place. Returns max|dtheta/dt| at the first stage.
  double step(std::vector<double>& theta, double dt) {
    rhs(kmat_, omega_, theta, k1_);
    double peak = 0.0;
    for (std::size_t i = 0; i < n_; ++i) peak = std::max(peak, std::abs(k1_[i]));
    if (dt * peak >= 0.1) {
      throw StepError("phase step dt*max|dtheta/dt| reaches 0.1 rad");
    }
    for (std::size_t i = 0; i < n_; ++i) tmp_[i] = theta[i] + 0.5 * dt * k1_[i];
    rhs(kmat_, omega_, tmp_, k2_);
    for (std::size_t i = 0; i < n_; ++i) tmp_[i] = theta[i] + 0.5 * dt * k2_[i];
    rhs(kmat_, omega_, tmp_, k3_);
    for (std::size_t i = 0; i < n_; ++i) tmp_[i] = theta[i] + dt * k3_[i];
    rhs(kmat_, omega_, tmp_, k4_);
    for (std::size_t i = 0; i < n_; ++i) {
      theta[i] += dt / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
    }
    return peak;
  }

 private:
  std::vector<double> kmat_, omega_;
  std::size_t n_;
  std::vector<double> k1_, k2_, k3_, k4_, tmp_;
};

}  // namespace

double wrap_phase(double theta) {
  double w = std::fmod(theta, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  if (w >= kTwoPi) w = 0.0;  // fmod rounding can land exactly on 2pi
  return w;
}

OscillatorNetwork step_network(const OscillatorNetwork& net, double dt) {
  net.validate();
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  OscillatorNetwork out = net;
  Stepper s(net);
  s.step(out.phases, dt);
  for (double& th : out.phases) th = wrap_phase(th);
  return out;
}

OrderParameter order_parameter(std::span<const double> phases) {
  if (phases.empty()) throw ConfigError("order parameter of empty phase set");
  double re = 0.0, im = 0.0;
  for (double th : phases) {
    re += std::cos(th);
    im += std::sin(th);
  }
  re /= phases.size();
  im /= phases.size();
  return {std::hypot(re, im), std::atan2(im, re)};
}

PhaseHistory integrate_network(OscillatorNetwork& net, double t_end, double dt,
                               int record_stride) {
  net.validate();
  if (!(dt > 0.0) || !(t_end > 0.0)) throw ConfigError("need t_end, dt > 0");
  if (record_stride < 1) throw ConfigError("record_stride must be >= 1");

  const long steps = std::lround(std::ceil(t_end / dt - 1e-9));
  Stepper s(net);
  // The history accumulates phases without wrapping so that windowed phase
  // differences are meaningful; the network state itself stays wrapped.
  std::vector<double> theta = net.phases;
  PhaseHistory h;
  h.times.push_back(0.0);
  h.phases.push_back(theta);
  for (long k = 0; k < steps; ++k) {
    s.step(theta, dt);
    if ((k + 1) % record_stride == 0 || k + 1 == steps) {
      h.times.push_back((k + 1) * dt);
      h.phases.push_back(theta);
    }
  }
  net.phases = theta;
  for (double& th : net.phases) th = wrap_phase(th);
  return h;
}

CoherenceReport detect_clusters(const PhaseHistory& history, double window,
                                double tol) {
  if (history.times.size() < 2) throw ConfigError("history needs >= 2 samples");
  if (!(window > 0.0) || !(tol > 0.0)) throw ConfigError("need window, tol > 0");
  const double t_end = history.times.back();
  std::size_t first = history.times.size();
  for (std::size_t k = 0; k < history.times.size(); ++k) {
    if (history.times[k] >= t_end - window - 1e-12) {
      first = k;
      break;
    }
  }
  if (history.times.size() - first < 2) {
    throw AnalysisError("analysis window holds fewer than 2 samples");
  }

  const std::size_t n = history.phases.front().size();
  // Union-find over oscillators; pairs join when their phase difference
  // stays within tol across the window.
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double lo = 1e300, hi = -1e300;
      for (std::size_t k = first; k < history.times.size(); ++k) {
        const double d = history.phases[k][i] - history.phases[k][j];
        lo = std::min(lo, d);
        hi = std::max(hi, d);
      }
      if (hi - lo < tol) {
        parent[find(static_cast<int>(i))] = find(static_cast<int>(j));
      }
    }
  }

  CoherenceReport rep;
  std::vector<std::vector<int>> groups(n);
  for (std::size_t i = 0; i < n; ++i) {
    groups[find(static_cast<int>(i))].push_back(static_cast<int>(i));
  }
  for (auto& g : groups) {
    if (!g.empty()) rep.clusters.push_back(std::move(g));
  }
  std::sort(rep.clusters.begin(), rep.clusters.end());
  rep.cluster_count = static_cast<int>(rep.clusters.size());
  rep.locked = rep.cluster_count == 1;
  for (std::size_t k = first; k < history.times.size(); ++k) {
    const auto op = order_parameter(history.phases[k]);
    rep.trace_times.push_back(history.times[k]);
    rep.trace_r.push_back(op.r);
    rep.trace_mean_phase.push_back(op.mean_phase);
  }
  return rep;
}

double pair_lock_threshold(double coupling, const CouplingKernel& kernel,
                           double r) {
  kernel.validate();
  return 2.0 * std::abs(coupling * kernel(r));
}

std::vector<Vec3> triangle_vertices(double apex_angle_deg, double perimeter) {
  if (!(apex_angle_deg > 0.0) || !(apex_angle_deg <= 180.0)) {
    throw ConfigError("apex angle must be in (0, 180] degrees");
  }
  if (!(perimeter > 0.0)) throw ConfigError("perimeter must be positive");
  const double half = 0.5 * apex_angle_deg * kPi / 180.0;
  const double leg = perimeter / (2.0 * (1.0 + std::sin(half)));
  const double base_half = leg * std::sin(half);
  const double height = leg * std::cos(half);
  return {{-base_half, 0.0, 0.0}, {base_half, 0.0, 0.0}, {0.0, height, 0.0}};
}

std::vector<Vec3> tetrahedron_vertices(double edge) {
  if (!(edge > 0.0)) throw ConfigError("edge must be positive");
  const double s = edge / (2.0 * std::sqrt(2.0));
  return {{s, s, s}, {s, -s, -s}, {-s, s, -s}, {-s, -s, s}};
}

std::vector<Vec3> square_vertices_matched(double tetra_edge) {
  if (!(tetra_edge > 0.0)) throw ConfigError("edge must be positive");
  // Tetrahedron mean pairwise distance is the edge itself; square of side a
  // has mean a(2+sqrt 2)/3.
  const double side = 3.0 * tetra_edge / (2.0 + std::sqrt(2.0));
  const double h = 0.5 * side;
  return {{-h, -h, 0.0}, {h, -h, 0.0}, {h, h, 0.0}, {-h, h, 0.0}};
}

double mean_pair_distance(std::span<const Vec3> positions) {
  if (positions.size() < 2) throw ConfigError("need >= 2 positions");
  double acc = 0.0;
  std::size_t cnt = 0;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    for (std::size_t j = i + 1; j < positions.size(); ++j) {
      acc += distance(positions[i], positions[j]);
      ++cnt;
    }
  }
  return acc / cnt;
}

namespace {

SyncTrial run_single_trial(std::span<const Vec3> positions,
                           const SweepConfig& cfg, double sigma, Rng rng) {
  const std::size_t n = positions.size();
  OscillatorNetwork net;
  net.positions.assign(positions.begin(), positions.end());
  net.coupling = cfg.coupling;
  net.kernel = cfg.kernel;
  net.natural_freqs.resize(n);
  net.phases.resize(n);
  for (std::size_t i = 0; i < n; ++i) net.phases[i] = rng.uniform(0.0, kTwoPi);
  for (std::size_t i = 0; i < n; ++i) {
    net.natural_freqs[i] = sigma * rng.normal();
  }

  const double rate = std::abs(cfg.coupling) *
                          std::abs(cfg.kernel(mean_pair_distance(positions))) +
                      sigma;
  if (!(rate > 0.0)) throw ConfigError("coupling and jitter are both zero");
  const double dt = cfg.dt_scale / rate;
  const double window = cfg.window_scale / rate;
  const double t_end = cfg.transient_scale / rate + window;
  const long total_steps = std::lround(std::ceil(t_end / dt));
  const int stride = static_cast<int>(std::max(1L, total_steps / 2048));

  PhaseHistory h = integrate_network(net, t_end, dt, stride);
  CoherenceReport rep = detect_clusters(h, window, cfg.cluster_tol);
  double r_acc = 0.0;
  for (double r : rep.trace_r) r_acc += r;
  return {r_acc / rep.trace_r.size(), rep.cluster_count};
}

}  // namespace

double effective_jitter_sigma(std::span<const Vec3> positions,
                              const SweepConfig& cfg) {
  if (cfg.jitter_sigma) {
    if (!(*cfg.jitter_sigma >= 0.0)) {
      throw ConfigError("jitter sigma must be non-negative");
    }
    return *cfg.jitter_sigma;
  }
  // Default spread: 5% of the coupling rate at the mean pair distance.
  return 0.05 * std::abs(cfg.coupling) *
         std::abs(cfg.kernel(mean_pair_distance(positions)));
}

EnsembleStats run_geometry_ensemble(std::span<const Vec3> positions,
                                    const SweepConfig& cfg,
                                    std::uint64_t stream_base,
                                    const std::string& label) {
  if (cfg.trials < 2) throw ConfigError("need at least 2 trials");
  cfg.kernel.validate();
  const double sigma = effective_jitter_sigma(positions, cfg);
  EnsembleStats st;
  st.label = label;
  st.trials.resize(cfg.trials);

#ifdef SONOLAB_HAVE_OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int t = 0; t < cfg.trials; ++t) {
    st.trials[t] = run_single_trial(positions, cfg, sigma,
                                    Rng::stream(cfg.seed, stream_base + t));
  }

  // Reductions stay in trial order regardless of thread count.
  double acc = 0.0;
  for (const auto& tr : st.trials) acc += tr.final_r;
  st.mean_r = acc / cfg.trials;
  double var = 0.0;
  for (const auto& tr : st.trials) {
    var += (tr.final_r - st.mean_r) * (tr.final_r - st.mean_r);
  }
  st.std_r = std::sqrt(var / (cfg.trials - 1));
  st.stderr_r = st.std_r / std::sqrt(static_cast<double>(cfg.trials));
  st.p_clusters.assign(positions.size(), 0.0);
  for (const auto& tr : st.trials) {
    if (tr.cluster_count >= 1 &&
        tr.cluster_count <= static_cast<int>(positions.size())) {
      st.p_clusters[tr.cluster_count - 1] += 1.0;
    }
  }
  for (double& p : st.p_clusters) p /= cfg.trials;
  return st;
}

TriangleSweepResult triangle_sweep(const SweepConfig& cfg,
                                   std::span<const double> angles_deg) {
  if (angles_deg.empty()) throw ConfigError("sweep needs at least one angle");
  for (double a : angles_deg) {
    if (!(a >= 60.0) || !(a <= 180.0)) {
      throw ConfigError("angles must lie in [60, 180] degrees");
    }
  }
  TriangleSweepResult out;
  out.angles_deg.assign(angles_deg.begin(), angles_deg.end());
  const std::uint64_t stride = 1u << 20;  // stream block per sweep point
  for (std::size_t a = 0; a < angles_deg.size(); ++a) {
    const auto verts = triangle_vertices(angles_deg[a], cfg.perimeter);
    char label[64];
    std::snprintf(label, sizeof label, "apex_%g", angles_deg[a]);
    out.per_angle.push_back(
        run_geometry_ensemble(verts, cfg, a * stride, label));
  }

  const EnsembleStats* s90 = nullptr;
  const EnsembleStats* s180 = nullptr;
  for (std::size_t a = 0; a < angles_deg.size(); ++a) {
    if (angles_deg[a] == 90.0) s90 = &out.per_angle[a];
    if (angles_deg[a] == 180.0) s180 = &out.per_angle[a];
  }
  if (s90 && s180) {
    const double pooled = std::sqrt(s90->stderr_r * s90->stderr_r +
                                    s180->stderr_r * s180->stderr_r);
    out.z_90_vs_180 = (s90->mean_r - s180->mean_r) / pooled;
    if (out.z_90_vs_180 > 2.0) {
      out.verdict = "right-angle geometry synchronizes more than collinear";
    } else if (out.z_90_vs_180 < -2.0) {
      out.verdict = "collinear geometry synchronizes more than right-angle";
    } else {
      out.verdict = "no geometric effect detected";
    }
  } else {
    out.z_90_vs_180 = std::nan("");
    out.verdict = "comparison not measured (sweep lacks 90/180)";
  }
  return out;
}

ShapeComparison tetrahedron_comparison(double edge, const SweepConfig& cfg) {
  ShapeComparison out;
  const auto tet = tetrahedron_vertices(edge);
  const auto sq = square_vertices_matched(edge);
  out.matched_mean_distance = mean_pair_distance(tet);
  out.tetrahedron = run_geometry_ensemble(tet, cfg, 0, "tetrahedron");
  out.square = run_geometry_ensemble(sq, cfg, 1u << 20, "square");
  const double pooled =
      std::sqrt(out.tetrahedron.stderr_r * out.tetrahedron.stderr_r +
                out.square.stderr_r * out.square.stderr_r);
  out.z = (out.tetrahedron.mean_r - out.square.mean_r) / pooled;
  if (out.z > 2.0) {
    out.verdict = "tetrahedron synchronizes more than matched square";
  } else if (out.z < -2.0) {
    out.verdict = "matched square synchronizes more than tetrahedron";
  } else {
    out.verdict = "no geometric effect detected";
  }
  return out;
}

}  // namespace sonolab::sync
