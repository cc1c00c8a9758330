#include "sonolab/runner.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <complex>
#include <cstdint>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sonolab/bell.hpp"
#include "sonolab/errors.hpp"
#include "sonolab/field.hpp"
#include "sonolab/io.hpp"
#include "sonolab/kuramoto.hpp"
#include "sonolab/scenarios.hpp"

namespace sonolab::run {

namespace {

using nlohmann::json;

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"field-scan", "pilot-wave",
                                              "kuramoto", "bell", "audit"};
  return names;
}

[[noreturn]] void bad_key(const std::string& key, const char* expected) {
  throw ConfigError("key \"" + key + "\" must be " + expected);
}

double num(const json& p, const std::string& key) {
  const json& v = p.at(key);
  if (!v.is_number()) bad_key(key, "a number");
  return v.get<double>();
}

int integer(const json& p, const std::string& key) {
  const json& v = p.at(key);
  if (!v.is_number_integer()) bad_key(key, "an integer");
  return v.get<int>();
}

bool boolean(const json& p, const std::string& key) {
  const json& v = p.at(key);
  if (!v.is_boolean()) bad_key(key, "true or false");
  return v.get<bool>();
}

std::string text(const json& p, const std::string& key) {
  const json& v = p.at(key);
  if (!v.is_string()) bad_key(key, "a string");
  return v.get<std::string>();
}

std::vector<double> num_array(const json& p, const std::string& key,
                              int expected = -1) {
  const json& v = p.at(key);
  if (!v.is_array()) bad_key(key, "an array of numbers");
  std::vector<double> out;
  for (const json& e : v) {
    if (!e.is_number()) bad_key(key, "an array of numbers");
    out.push_back(e.get<double>());
  }
  if (expected >= 0 && static_cast<int>(out.size()) != expected)
    bad_key(key, ("an array of " + std::to_string(expected) + " numbers").c_str());
  return out;
}

std::optional<double> opt_num(const json& p, const std::string& key) {
  const json& v = p.at(key);
  if (v.is_null()) return std::nullopt;
  if (!v.is_number()) bad_key(key, "a number or null");
  return v.get<double>();
}

std::optional<int> opt_int(const json& p, const std::string& key) {
  const json& v = p.at(key);
  if (v.is_null()) return std::nullopt;
  if (!v.is_number_integer()) bad_key(key, "an integer or null");
  return v.get<int>();
}

constexpr double kDegToRad = std::numbers::pi / 180.0;

// --- subcommand implementations ------------------------------------------

void run_field_scan(const RunRequest& req) {
  const json& p = req.params;
  field::SononMode mode;
  mode.m = integer(p, "mode_m");
  mode.n = integer(p, "mode_n");
  mode.k_r = num(p, "k_r");
  mode.ring_radius = num(p, "ring_radius");
  mode.omega0 = num(p, "omega0");
  mode.amplitude = num(p, "amplitude");
  const int nodes = integer(p, "nodes");
  const std::vector<double> d = num_array(p, "direction", 3);
  const Vec3 dir{d[0], d[1], d[2]};
  const double r_min = num(p, "r_min");
  const double r_max = num(p, "r_max");
  const int count = integer(p, "count");

  const std::vector<field::FieldScanRow> rows =
      field::field_scan(mode, r_min, r_max, count, dir, nodes);

  io::CsvTable t;
  t.header = {"r", "xi_re", "xi_im", "xi_abs", "chi_far", "rel_dev"};
  for (const auto& row : rows)
    t.add_row({io::format_number(row.r), io::format_number(row.xi.real()),
               io::format_number(row.xi.imag()),
               io::format_number(std::abs(row.xi)),
               io::format_number(row.chi), io::format_number(row.rel_dev)});
  io::write_text_atomic(req.out_dir / "scan.csv", t.render());

  io::RunManifest m;
  m.command = req.command;
  m.seed = req.seed;
  m.parameters = p;
  m.annotations = {
      {"units",
       {{"r", "length, natural units"},
        {"xi_re", "field amplitude, arbitrary"},
        {"xi_im", "field amplitude, arbitrary"},
        {"xi_abs", "field amplitude, arbitrary"},
        {"chi_far", "far-field form sin(k_r r)/r, same amplitude scale"},
        {"rel_dev", "dimensionless"}}},
      {"scan_time", 0.0}};
  m.outputs = {{"scan.csv", ""}};
  io::write_manifest(req.out_dir, std::move(m));
}

pilot::ScenarioKind scenario_kind(const std::string& name) {
  if (name == "plane_wave") return pilot::ScenarioKind::plane_wave;
  if (name == "gaussian_free") return pilot::ScenarioKind::gaussian_free;
  if (name == "double_slit") return pilot::ScenarioKind::double_slit;
  if (name == "barrier") return pilot::ScenarioKind::barrier;
  throw ConfigError("key \"scenario\" must be one of plane_wave, "
                    "gaussian_free, double_slit, barrier");
}

void run_pilot_wave(const RunRequest& req) {
  const json& p = req.params;
  pilot::ScenarioSpec spec =
      pilot::default_scenario(scenario_kind(text(p, "scenario")));
  if (auto v = opt_num(p, "t_final")) spec.t_final = *v;
  if (auto v = opt_num(p, "dt")) spec.dt = *v;
  if (auto v = opt_num(p, "traj_dt")) spec.traj_dt = *v;
  if (auto v = opt_int(p, "samples")) spec.samples = *v;
  if (!p.at("domain").is_null()) {
    const std::vector<double> dom = num_array(p, "domain", 2);
    spec.domain_min = dom[0];
    spec.domain_max = dom[1];
  }
  if (auto v = opt_num(p, "sigma0")) spec.sigma0 = *v;
  if (auto v = opt_num(p, "x0")) spec.x0 = *v;
  if (auto v = opt_num(p, "v0")) spec.v0 = *v;
  if (auto v = opt_num(p, "slit_separation")) spec.slit_separation = *v;
  if (auto v = opt_num(p, "slit_width")) spec.slit_width = *v;
  if (auto v = opt_num(p, "barrier_height")) spec.barrier_height = *v;
  if (auto v = opt_num(p, "barrier_width")) spec.barrier_width = *v;
  if (auto v = opt_num(p, "wavenumber")) spec.wavenumber = *v;
  if (auto v = opt_num(p, "window_width")) spec.window_width = *v;
  if (auto v = opt_int(p, "histogram_bins")) spec.histogram_bins = *v;
  if (!p.at("absorbing").is_null()) spec.absorbing = boolean(p, "absorbing");
  const int n_traj = integer(p, "trajectories");

  const pilot::EnsembleResult res = pilot::run_ensemble(spec, n_traj, req.seed);

  io::CsvTable traj;
  traj.header = {"traj_id", "t", "x"};
  for (std::size_t i = 0; i < res.trajectories.size(); ++i) {
    const pilot::Trajectory& tr = res.trajectories[i];
    for (std::size_t k = 0; k < tr.times.size(); ++k)
      traj.add_row({std::to_string(i), io::format_number(tr.times[k]),
                    io::format_number(tr.positions[k][0])});
  }
  io::write_text_atomic(req.out_dir / "trajectories.csv", traj.render());

  io::CsvTable hist;
  hist.header = {"bin_center", "count", "psi2"};
  for (std::size_t b = 0; b < res.bin_centers.size(); ++b)
    hist.add_row({io::format_number(res.bin_centers[b]),
                  io::format_number(res.bin_counts[b]),
                  io::format_number(res.bin_probability[b])});
  io::write_text_atomic(req.out_dir / "histogram.csv", hist.render());

  io::RunManifest m;
  m.command = req.command;
  m.seed = req.seed;
  m.parameters = p;
  m.annotations = {
      {"scenario", text(p, "scenario")},
      {"dt", spec.dt},
      {"traj_dt", spec.traj_dt},
      {"grid",
       {{"domain", {spec.domain_min, spec.domain_max}},
        {"samples", spec.samples}}},
      {"trajectories",
       {{"complete", res.n_complete},
        {"exited", res.n_exited},
        {"aborted", res.n_aborted}}},
      {"ks_final", res.ks_final},
      {"masked_probability", res.masked_probability},
      {"norm_drift", res.norm_drift},
      {"units",
       {{"t", "time, natural units (hbar = m = 1)"},
        {"x", "length, natural units"},
        {"count", "trajectories per bin"},
        {"psi2", "probability mass per bin"}}}};
  m.outputs = {{"trajectories.csv", ""}, {"histogram.csv", ""}};
  io::write_manifest(req.out_dir, std::move(m));
}

sync::KernelKind kernel_kind(const std::string& name) {
  if (name == "uniform") return sync::KernelKind::uniform;
  if (name == "inverse_r") return sync::KernelKind::inverse_r;
  if (name == "carrier") return sync::KernelKind::carrier;
  throw ConfigError(
      "key \"kernel\" must be one of uniform, inverse_r, carrier");
}

void run_kuramoto(const RunRequest& req) {
  const json& p = req.params;
  sync::SweepConfig cfg;
  cfg.coupling = num(p, "coupling");
  cfg.kernel.kind = kernel_kind(text(p, "kernel"));
  cfg.kernel.k_r = num(p, "k_r");
  cfg.perimeter = num(p, "perimeter");
  cfg.jitter_sigma = opt_num(p, "jitter_sigma");
  cfg.trials = integer(p, "trials");
  cfg.cluster_tol = num(p, "cluster_tol");
  cfg.seed = req.seed;
  const std::vector<double> angles = num_array(p, "angles");
  if (angles.empty()) throw ConfigError("key \"angles\" must be nonempty");

  const sync::TriangleSweepResult res = sync::triangle_sweep(cfg, angles);

  io::CsvTable sweep;
  sweep.header = {"angle_deg", "trial", "final_r", "cluster_count"};
  io::CsvTable summary;
  summary.header = {"angle_deg", "mean_r", "std_r",
                    "p_1_clusters", "p_2_clusters", "p_3_clusters"};
  for (std::size_t a = 0; a < res.per_angle.size(); ++a) {
    const sync::EnsembleStats& st = res.per_angle[a];
    const std::string angle = io::format_number(res.angles_deg[a]);
    for (std::size_t t = 0; t < st.trials.size(); ++t)
      sweep.add_row({angle, std::to_string(t),
                     io::format_number(st.trials[t].final_r),
                     std::to_string(st.trials[t].cluster_count)});
    summary.add_row({angle, io::format_number(st.mean_r),
                     io::format_number(st.std_r),
                     io::format_number(st.p_clusters[0]),
                     io::format_number(st.p_clusters[1]),
                     io::format_number(st.p_clusters[2])});
  }
  io::write_text_atomic(req.out_dir / "sweep.csv", sweep.render());
  io::write_text_atomic(req.out_dir / "summary.csv", summary.render());

  io::RunManifest m;
  m.command = req.command;
  m.seed = req.seed;
  m.parameters = p;
  m.annotations = {
      {"z_90_vs_180", res.z_90_vs_180},
      {"verdict", res.verdict},
      {"jitter_sigma",
       cfg.jitter_sigma ? json(*cfg.jitter_sigma)
                        : json("auto: 5% of coupling rate at mean distance")},
      {"units",
       {{"angle_deg", "degrees"},
        {"final_r", "Kuramoto order parameter, dimensionless"},
        {"cluster_count", "phase-locked clusters after transient"},
        {"mean_r", "dimensionless"},
        {"std_r", "dimensionless"},
        {"p_k_clusters", "fraction of trials ending with k clusters"}}}};
  m.outputs = {{"sweep.csv", ""}, {"summary.csv", ""}};
  io::write_manifest(req.out_dir, std::move(m));
}

bell::ModelKind model_kind(const std::string& name) {
  if (name == "deterministic_table") return bell::ModelKind::deterministic_table;
  if (name == "shared_phase") return bell::ModelKind::shared_phase;
  if (name == "quantum_oracle") return bell::ModelKind::quantum_oracle;
  throw ConfigError("key \"model\" must be one of deterministic_table, "
                    "shared_phase, quantum_oracle");
}

void run_bell(const RunRequest& req) {
  const json& p = req.params;
  bell::LocalModelSpec model;
  model.kind = model_kind(text(p, "model"));
  const std::vector<double> table = num_array(p, "table", 4);
  for (std::size_t i = 0; i < 4; ++i) {
    if (table[i] != 1.0 && table[i] != -1.0)
      bad_key("table", "an array of four +1/-1 entries");
    model.table[i] = static_cast<int>(table[i]);
  }
  model.communication_allowed = boolean(p, "communication_allowed");
  const int trials = integer(p, "trials");
  const std::vector<double> ang = num_array(p, "angles_deg", 4);
  const bell::Settings settings{ang[0] * kDegToRad, ang[1] * kDegToRad,
                                ang[2] * kDegToRad, ang[3] * kDegToRad};

  const std::vector<bell::TrialRecord> recs =
      bell::simulate_local_model(model, settings, trials, req.seed);
  const bell::CHSHResult res = bell::chsh(recs, settings);

  io::CsvTable t;
  t.header = {"setting_pair", "E", "stderr"};
  for (const bell::PairCorrelation& pc : res.pairs)
    t.add_row({pc.label, io::format_number(pc.e),
               io::format_number(pc.stderr_e)});
  io::write_text_atomic(req.out_dir / "chsh.csv", t.render());

  io::RunManifest m;
  m.command = req.command;
  m.seed = req.seed;
  m.parameters = p;
  m.annotations = {
      {"model", text(p, "model")},
      {"communication_allowed", model.communication_allowed},
      {"convention", "photon polarization: E(a,b) = cos 2(a-b)"},
      {"trials_per_pair", trials},
      {"S", res.s},
      {"S_err", res.s_err},
      {"deterministic_lhv_max", bell::brute_force_lhv_max(settings)},
      {"units",
       {{"E", "correlation, dimensionless"},
        {"stderr", "standard error of E"},
        {"angles_deg", "degrees (radians internally)"}}}};
  m.outputs = {{"chsh.csv", ""}};
  io::write_manifest(req.out_dir, std::move(m));
}

std::string slug(const std::string& name) {
  std::string out;
  for (char c : name) {
    if (std::isalnum(static_cast<unsigned char>(c)))
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    else if (!out.empty() && out.back() != '_')
      out += '_';
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out.empty() ? "experiment" : out;
}

void run_audit(const RunRequest& req) {
  const json& p = req.params;
  const std::filesystem::path dir = text(p, "presets_dir");
  if (!std::filesystem::is_directory(dir))
    throw ConfigError("presets_dir \"" + dir.string() +
                      "\" is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".json")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty())
    throw ConfigError("presets_dir \"" + dir.string() +
                      "\" holds no .json presets");

  io::RunManifest m;
  m.command = req.command;
  m.seed = req.seed;
  m.parameters = p;
  json classifications = json::object();
  for (const std::filesystem::path& f : files) {
    json parsed;
    try {
      parsed = json::parse(io::read_text(f));
    } catch (const json::parse_error& e) {
      throw ConfigError("preset " + f.string() + " is not valid JSON: " +
                        e.what());
    }
    const bell::ExperimentGeometry geom =
        bell::ExperimentGeometry::from_json(parsed);
    const bell::AuditReport report = bell::audit_experiment(geom);
    const std::string out_name = "audit_" + slug(geom.name) + ".json";
    io::write_text_atomic(req.out_dir / out_name,
                          report.to_json().dump(2) + "\n");
    m.outputs.push_back({out_name, ""});
    classifications[geom.name] = report.classification;
  }
  m.annotations = {
      {"speed_of_light_m_per_s", bell::speed_of_light},
      {"classifications", classifications},
      {"units", {{"distances", "meters"}, {"times", "seconds"}}},
      {"carrier_amplitude_note",
       "carrier_amplitude_scale is the 1/d far-field envelope factor; "
       "no attenuation cutoff is applied"}};
  io::write_manifest(req.out_dir, std::move(m));
}

}  // namespace

json default_params(const std::string& command) {
  if (command == "field-scan")
    return {{"mode_m", 1},
            {"mode_n", 0},
            {"k_r", 1.0},
            {"ring_radius", 1.0},
            {"omega0", 1.0},
            {"amplitude", 1.0},
            {"nodes", 512},
            {"r_min", 10.0},
            {"r_max", 40.0},
            {"count", 121},
            {"direction", {0.8191520442889918, 0.0, 0.573576436351046}}};
  if (command == "pilot-wave")
    return {{"scenario", "double_slit"}, {"trajectories", 1000},
            {"t_final", nullptr},        {"dt", nullptr},
            {"traj_dt", nullptr},        {"samples", nullptr},
            {"domain", nullptr},         {"sigma0", nullptr},
            {"x0", nullptr},             {"v0", nullptr},
            {"slit_separation", nullptr},{"slit_width", nullptr},
            {"barrier_height", nullptr}, {"barrier_width", nullptr},
            {"wavenumber", nullptr},     {"window_width", nullptr},
            {"histogram_bins", nullptr}, {"absorbing", nullptr}};
  if (command == "kuramoto")
    return {{"angles",
             {90.0, 100.0, 110.0, 120.0, 130.0, 140.0, 150.0, 160.0, 170.0,
              180.0}},
            {"coupling", 1.0},
            {"kernel", "inverse_r"},
            {"k_r", 1.0},
            {"perimeter", 3.0},
            {"jitter_sigma", nullptr},
            {"trials", 200},
            {"cluster_tol", 0.1}};
  if (command == "bell")
    return {{"model", "shared_phase"},
            {"table", {1, 1, 1, 1}},
            {"communication_allowed", false},
            {"trials", 10000},
            {"angles_deg", {0.0, 45.0, 22.5, 67.5}}};
  if (command == "audit") return {{"presets_dir", "data/presets"}};
  throw ConfigError("unknown subcommand \"" + command + "\"");
}

RunRequest resolve_run(const std::string& command, const json& file_json,
                       const json& flag_params, const json& seed_flag,
                       const json& out_flag) {
  json params = default_params(command);
  RunRequest req;
  req.command = command;
  req.out_dir = std::filesystem::path("runs") / command;

  if (!file_json.is_null()) {
    if (!file_json.is_object())
      throw ConfigError("config file must hold a JSON object");
    for (const auto& [key, value] : file_json.items()) {
      if (key == "subcommand") {
        if (!value.is_string() || value.get<std::string>() != command)
          throw ConfigError("config file subcommand does not match \"" +
                            command + "\"");
      } else if (key == "seed") {
        if (!value.is_number_integer()) bad_key("seed", "an integer");
        req.seed = value.get<std::uint64_t>();
      } else if (key == "output_dir") {
        if (!value.is_string()) bad_key("output_dir", "a string");
        req.out_dir = value.get<std::string>();
      } else if (params.contains(key)) {
        params[key] = value;
      } else {
        throw ConfigError("unknown key \"" + key + "\" for " + command);
      }
    }
  }
  for (const auto& [key, value] : flag_params.items()) {
    if (!params.contains(key))
      throw ConfigError("unknown key \"" + key + "\" for " + command);
    params[key] = value;
  }
  if (!seed_flag.is_null()) req.seed = seed_flag.get<std::uint64_t>();
  if (!out_flag.is_null())
    req.out_dir = out_flag.get<std::string>();
  req.params = std::move(params);
  return req;
}

void execute(const RunRequest& req) {
  std::filesystem::create_directories(req.out_dir);
  if (req.command == "field-scan")
    run_field_scan(req);
  else if (req.command == "pilot-wave")
    run_pilot_wave(req);
  else if (req.command == "kuramoto")
    run_kuramoto(req);
  else if (req.command == "bell")
    run_bell(req);
  else if (req.command == "audit")
    run_audit(req);
  else
    throw ConfigError("unknown subcommand \"" + req.command + "\"");
}

int run_cli(int argc, char** argv) {
  CLI::App app{"soliton carrier fields, pilot-wave ensembles, geometric "
               "synchronization, and Bell-test analysis"};
  app.require_subcommand(1);

  struct SubState {
    CLI::App* sub = nullptr;
    std::string config_path;
    std::uint64_t seed = 0;
    std::string out_dir;
    long long trials = 0;
    std::map<std::string, std::string> raw;
  };
  std::map<std::string, SubState> states;

  const std::map<std::string, std::string> blurbs{
      {"field-scan", "radial scan of a ring-source carrier field"},
      {"pilot-wave", "guided-trajectory ensemble for a wavepacket scenario"},
      {"kuramoto", "triangle-geometry synchronization sweep"},
      {"bell", "CHSH Monte Carlo for a local or oracle model"},
      {"audit", "light-cone timing audit of experiment presets"}};
  for (const std::string& name : command_names()) {
    SubState& st = states[name];
    st.sub = app.add_subcommand(name, blurbs.at(name));
    st.sub->add_option("--config", st.config_path,
                       "JSON config file; flags override file values");
    st.sub->add_option("--seed", st.seed, "RNG seed (default 0)");
    st.sub->add_option("--out", st.out_dir,
                       "output directory (default runs/" + name + ")");
    st.sub->add_option("--trials", st.trials, "Monte-Carlo trial count");
    const json defs = default_params(name);
    for (const auto& [key, value] : defs.items()) {
      if (key == "trials") continue;  // covered by the common --trials flag
      st.sub->add_option("--" + key, st.raw[key],
                         "config key " + key + " (default " + value.dump() +
                             ")");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const std::string* active = nullptr;
  for (const std::string& name : command_names())
    if (states[name].sub->parsed()) active = &name;
  if (active == nullptr) {
    std::cerr << "config error: no subcommand given\n";
    return 2;
  }
  SubState& st = states[*active];

  try {
    json file_json;
    if (st.sub->count("--config") > 0) {
      try {
        file_json = json::parse(io::read_text(st.config_path));
      } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config file is not valid JSON: ") +
                          e.what());
      }
    }

    json flag_params = json::object();
    for (const auto& [key, raw] : st.raw) {
      if (st.sub->count("--" + key) == 0) continue;
      json parsed = json::parse(raw, nullptr, false);
      flag_params[key] = parsed.is_discarded() ? json(raw) : parsed;
    }
    if (st.sub->count("--trials") > 0) {
      if (*active == "pilot-wave")
        flag_params["trajectories"] = st.trials;
      else if (*active == "kuramoto" || *active == "bell")
        flag_params["trials"] = st.trials;
      else
        throw ConfigError("\"trials\" does not apply to " + *active);
    }

    json seed_flag;
    if (st.sub->count("--seed") > 0) seed_flag = st.seed;
    json out_flag;
    if (st.sub->count("--out") > 0) out_flag = st.out_dir;

    RunRequest req =
        resolve_run(*active, file_json, flag_params, seed_flag, out_flag);
    execute(req);
    std::cout << "run complete: " << req.out_dir.string() << "\n";
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const AnalysisError& e) {
    std::cerr << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace sonolab::run
