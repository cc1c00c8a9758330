#include "sonolab/bell.hpp"

#include <cmath>

#include "sonolab/errors.hpp"
#include "sonolab/rng.hpp"

namespace sonolab::bell {

namespace {
constexpr double kTwoPi = 6.283185307179586476925287;

Vec3 vec_from_json(const nlohmann::json& j, const char* key) {
  if (!j.is_array() || j.size() != 3) {
    throw ConfigError(std::string(key) + " must be a 3-element array");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

nlohmann::json vec_to_json(const Vec3& v) {
  return nlohmann::json::array({v.x, v.y, v.z});
}
}  // namespace

void ExperimentGeometry::validate() const {
  if (name.empty()) throw ConfigError("experiment name must not be empty");
  for (int i = 0; i < 2; ++i) {
    const double straight = distance(source, detectors[i]);
    if (!(path_lengths[i] >= 0.0) || !std::isfinite(path_lengths[i])) {
      throw ConfigError("path lengths must be non-negative and finite");
    }
    // Fibers cannot be shorter than the line of sight.
    if (path_lengths[i] < straight - 1e-9) {
      throw ConfigError("path length shorter than straight-line distance");
    }
  }
  if (setting_switch_time && !(*setting_switch_time >= 0.0)) {
    throw ConfigError("switch time must be non-negative");
  }
  if (measurement_window && !(*measurement_window >= 0.0)) {
    throw ConfigError("measurement window must be non-negative");
  }
}

ExperimentGeometry ExperimentGeometry::from_json(const nlohmann::json& j) {
  ExperimentGeometry g;
  g.name = j.at("name").get<std::string>();
  g.source = vec_from_json(j.at("source_xyz_m"), "source_xyz_m");
  const auto& dets = j.at("detectors_xyz_m");
  if (!dets.is_array() || dets.size() != 2) {
    throw ConfigError("detectors_xyz_m must hold two positions");
  }
  g.detectors[0] = vec_from_json(dets[0], "detectors_xyz_m[0]");
  g.detectors[1] = vec_from_json(dets[1], "detectors_xyz_m[1]");
  const auto& paths = j.at("path_lengths_m");
  if (!paths.is_array() || paths.size() != 2) {
    throw ConfigError("path_lengths_m must hold two lengths");
  }
  g.path_lengths = {paths[0].get<double>(), paths[1].get<double>()};
  if (j.contains("switch_time_s")) {
    g.setting_switch_time = j["switch_time_s"].get<double>();
  }
  if (j.contains("window_s")) {
    g.measurement_window = j["window_s"].get<double>();
  }
  g.notes = j.value("notes", "");
  g.validate();
  return g;
}

nlohmann::json ExperimentGeometry::to_json() const {
  nlohmann::json j{
      {"name", name},
      {"source_xyz_m", vec_to_json(source)},
      {"detectors_xyz_m",
       nlohmann::json::array({vec_to_json(detectors[0]), vec_to_json(detectors[1])})},
      {"path_lengths_m", nlohmann::json::array({path_lengths[0], path_lengths[1]})},
      {"notes", notes},
  };
  if (setting_switch_time) j["switch_time_s"] = *setting_switch_time;
  if (measurement_window) j["window_s"] = *measurement_window;
  return j;
}

nlohmann::json AuditReport::to_json() const {
  nlohmann::json j{
      {"experiment", experiment},
      {"detector_separation_m", detector_separation_m},
      {"separation_light_time_s", separation_light_time_s},
      {"source_detector_m",
       nlohmann::json::array({source_detector_m[0], source_detector_m[1]})},
      {"fiber_path_m", nlohmann::json::array({fiber_path_m[0], fiber_path_m[1]})},
      {"fiber_path_total_m", fiber_path_total_m},
      {"fiber_light_time_s",
       nlohmann::json::array({fiber_light_time_s[0], fiber_light_time_s[1]})},
      {"classification", classification},
      {"notes", notes},
  };
  if (carrier_amplitude_scale) {
    j["carrier_amplitude_scale"] = *carrier_amplitude_scale;
  } else {
    j["carrier_amplitude_scale"] = nullptr;
  }
  j["window_comparisons"] = nlohmann::json::array();
  for (const auto& c : comparisons) {
    j["window_comparisons"].push_back({{"window", c.window},
                                       {"value_s", c.value_s},
                                       {"shorter_than_light_time",
                                        c.shorter_than_light_time}});
  }
  return j;
}

AuditReport audit_experiment(const ExperimentGeometry& geom, double c) {
  geom.validate();
  if (!(c > 0.0)) throw ConfigError("speed must be positive");

  AuditReport rep;
  rep.experiment = geom.name;
  rep.detector_separation_m = distance(geom.detectors[0], geom.detectors[1]);
  rep.separation_light_time_s = rep.detector_separation_m / c;
  rep.source_detector_m = {distance(geom.source, geom.detectors[0]),
                           distance(geom.source, geom.detectors[1])};
  rep.fiber_path_m = geom.path_lengths;
  rep.fiber_path_total_m = geom.path_lengths[0] + geom.path_lengths[1];
  rep.fiber_light_time_s = {geom.path_lengths[0] / c, geom.path_lengths[1] / c};
  if (rep.detector_separation_m > 0.0) {
    rep.carrier_amplitude_scale = 1.0 / rep.detector_separation_m;
  }
  rep.notes = geom.notes;

  const double light_time = rep.separation_light_time_s;
  auto add = [&](const char* label, std::optional<double> w) {
    if (!w) return;
    rep.comparisons.push_back({label, *w, *w < light_time});
  };
  add("setting_switch", geom.setting_switch_time);
  add("measurement", geom.measurement_window);

  if (rep.detector_separation_m == 0.0) {
    // Co-located detectors: a light-speed carrier bridges them trivially.
    rep.classification = "chi_loophole_open";
  } else if (rep.comparisons.empty()) {
    rep.classification = "indeterminate";
  } else {
    bool all_shorter = true, none_shorter = true;
    for (const auto& cmp : rep.comparisons) {
      (cmp.shorter_than_light_time ? none_shorter : all_shorter) = false;
    }
    if (all_shorter) {
      rep.classification = "chi_loophole_closed";
    } else if (none_shorter) {
      rep.classification = "chi_loophole_open";
    } else {
      rep.classification = "indeterminate";
    }
  }
  return rep;
}

double bremermann_limit(double mass_kg) {
  if (!(mass_kg > 0.0)) throw ConfigError("mass must be positive");
  // Dividing by the mass equivalent of one operation keeps the identity
  // limit(h/c^2) == 1 exact in floating point; the factored product form
  // drifts by an ulp.
  constexpr double mass_per_op = planck_h / (speed_of_light * speed_of_light);
  return mass_kg / mass_per_op;
}

double quantum_correlation(double a, double b) {
  return std::cos(2.0 * (a - b));
}

std::pair<int, int> shared_phase_outcomes(double a, double b, double lambda) {
  const int A = std::cos(2.0 * (a - lambda)) >= 0.0 ? 1 : -1;
  const int B = std::cos(2.0 * (b - lambda)) >= 0.0 ? -1 : 1;
  return {A, B};
}

std::vector<TrialRecord> simulate_local_model(const LocalModelSpec& model,
                                              const Settings& settings,
                                              int trials_per_pair,
                                              std::uint64_t seed) {
  if (trials_per_pair < 1) throw ConfigError("need at least 1 trial per pair");
  if (model.kind == ModelKind::deterministic_table) {
    for (int v : model.table) {
      if (v != 1 && v != -1) {
        throw ConfigError("strategy table entries must be +1 or -1");
      }
    }
  }
  if (model.kind == ModelKind::quantum_oracle && !model.communication_allowed) {
    throw ContractError(
        "nonlocal correlations require the communication channel in this "
        "framework");
  }

  const std::array<std::pair<double, double>, 4> pair_settings{{
      {settings.a, settings.b},
      {settings.a, settings.b_alt},
      {settings.a_alt, settings.b},
      {settings.a_alt, settings.b_alt},
  }};
  // Which table entry each pair reads: A index 0/1, B index 2/3.
  const std::array<std::pair<int, int>, 4> table_idx{{{0, 2}, {0, 3}, {1, 2}, {1, 3}}};

  std::vector<TrialRecord> out;
  out.reserve(4u * trials_per_pair);
  for (int p = 0; p < 4; ++p) {
    const auto [sa, sb] = pair_settings[p];
    for (int k = 0; k < trials_per_pair; ++k) {
      Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(p) * trials_per_pair + k);
      TrialRecord rec;
      rec.setting_a = sa;
      rec.setting_b = sb;
      switch (model.kind) {
        case ModelKind::deterministic_table:
          rec.outcome_a = model.table[table_idx[p].first];
          rec.outcome_b = model.table[table_idx[p].second];
          break;
        case ModelKind::shared_phase: {
          const double lambda = rng.uniform(0.0, kTwoPi);
          const auto [A, B] = shared_phase_outcomes(sa, sb, lambda);
          rec.outcome_a = A;
          rec.outcome_b = B;
          rec.hidden = lambda;
          break;
        }
        case ModelKind::quantum_oracle: {
          const double e = quantum_correlation(sa, sb);
          rec.outcome_a = rng.uniform01() < 0.5 ? 1 : -1;
          const bool match = rng.uniform01() < 0.5 * (1.0 + e);
          rec.outcome_b = match ? rec.outcome_a : -rec.outcome_a;
          break;
        }
      }
      out.push_back(rec);
    }
  }
  return out;
}

CHSHResult chsh(std::span<const TrialRecord> trials, const Settings& settings) {
  const std::array<std::pair<double, double>, 4> pair_settings{{
      {settings.a, settings.b},
      {settings.a, settings.b_alt},
      {settings.a_alt, settings.b},
      {settings.a_alt, settings.b_alt},
  }};
  const std::array<const char*, 4> labels{"ab", "ab'", "a'b", "a'b'"};

  std::array<long, 4> n{};
  std::array<double, 4> sum{};
  for (const auto& t : trials) {
    if (t.outcome_a * t.outcome_a != 1 || t.outcome_b * t.outcome_b != 1) {
      throw ConfigError("outcomes must be +1 or -1");
    }
    int p = -1;
    for (int i = 0; i < 4; ++i) {
      if (t.setting_a == pair_settings[i].first &&
          t.setting_b == pair_settings[i].second) {
        p = i;
        break;
      }
    }
    if (p < 0) {
      throw AnalysisError("estimator error: trial settings match no CHSH pair");
    }
    ++n[p];
    sum[p] += t.outcome_a * t.outcome_b;
  }

  CHSHResult res;
  for (int i = 0; i < 4; ++i) {
    if (n[i] < 100) {
      throw AnalysisError(std::string("estimator error: setting pair ") +
                          labels[i] + " has fewer than 100 trials");
    }
    res.pairs[i].label = labels[i];
    res.pairs[i].n = n[i];
    res.pairs[i].e = sum[i] / n[i];
    res.pairs[i].stderr_e =
        std::sqrt((1.0 - res.pairs[i].e * res.pairs[i].e) / n[i]);
  }
  res.s = res.pairs[0].e - res.pairs[1].e + res.pairs[2].e + res.pairs[3].e;
  double var = 0.0;
  for (const auto& p : res.pairs) var += p.stderr_e * p.stderr_e;
  res.s_err = std::sqrt(var);
  return res;
}

std::vector<LhvStrategy> lhv_strategies() {
  std::vector<LhvStrategy> out;
  out.reserve(16);
  for (int mask = 0; mask < 16; ++mask) {
    LhvStrategy st;
    for (int i = 0; i < 4; ++i) st.table[i] = (mask >> i) & 1 ? 1 : -1;
    const double e_ab = st.table[0] * st.table[2];
    const double e_ab2 = st.table[0] * st.table[3];
    const double e_a2b = st.table[1] * st.table[2];
    const double e_a2b2 = st.table[1] * st.table[3];
    st.s = e_ab - e_ab2 + e_a2b + e_a2b2;
    out.push_back(st);
  }
  return out;
}

double brute_force_lhv_max(const Settings&) {
  // The deterministic max does not depend on the angles; settings are taken
  // to keep the call-site shape uniform with the estimators.
  double best = -1e300;
  for (const auto& st : lhv_strategies()) best = std::max(best, st.s);
  return best;
}

}  // namespace sonolab::bell
