#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <array>
#include <string>
#include <vector>

#include "json.hpp"
#include "sonolab/bell.hpp"
#include "sonolab/errors.hpp"
#include "sonolab/field.hpp"
#include "sonolab/kuramoto.hpp"
#include "sonolab/scenarios.hpp"
#include "sonolab/vec3.hpp"

namespace py = pybind11;

namespace {

sonolab::field::SononMode make_mode(int m, int n, double k_r,
                                    double ring_radius, double omega0,
                                    double amplitude) {
  sonolab::field::SononMode mode;
  mode.m = m;
  mode.n = n;
  mode.k_r = k_r;
  mode.ring_radius = ring_radius;
  mode.omega0 = omega0;
  mode.amplitude = amplitude;
  mode.validate();
  return mode;
}

sonolab::Vec3 to_vec(const std::array<double, 3>& p) {
  return {p[0], p[1], p[2]};
}

sonolab::sync::CouplingKernel make_kernel(const std::string& kind,
                                          double k_r) {
  sonolab::sync::CouplingKernel kernel;
  if (kind == "uniform")
    kernel.kind = sonolab::sync::KernelKind::uniform;
  else if (kind == "inverse_r")
    kernel.kind = sonolab::sync::KernelKind::inverse_r;
  else if (kind == "carrier")
    kernel.kind = sonolab::sync::KernelKind::carrier;
  else
    throw sonolab::ConfigError(
        "kernel must be one of uniform, inverse_r, carrier");
  kernel.k_r = k_r;
  return kernel;
}

py::dict ensemble_dict(const sonolab::pilot::EnsembleResult& res) {
  py::dict d;
  d["n_complete"] = res.n_complete;
  d["n_exited"] = res.n_exited;
  d["n_aborted"] = res.n_aborted;
  d["ks_final"] = res.ks_final;
  d["masked_probability"] = res.masked_probability;
  d["norm_drift"] = res.norm_drift;
  d["sample_times"] = res.sample_times;
  d["final_positions"] = res.final_positions;
  d["bin_centers"] = res.bin_centers;
  d["bin_counts"] = res.bin_counts;
  d["bin_probability"] = res.bin_probability;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "carrier fields, guided trajectories, oscillator synchronization, "
            "and correlation experiments";
  m.attr("__version__") = SONOLAB_VERSION;

  py::register_exception<sonolab::ConfigError>(m, "ConfigError",
                                               PyExc_ValueError);

  // carrier field
  m.def("spherical_bessel", &sonolab::field::spherical_bessel, py::arg("m"),
        py::arg("x"), "Spherical Bessel j_m for m in 0..3, x >= 0.");
  m.def(
      "sonon_field",
      [](int mm, int n, double k_r, double ring_radius, double omega0,
         double amplitude, const std::array<double, 3>& point, double t,
         int nodes) {
        return sonolab::field::sonon_field(
            make_mode(mm, n, k_r, ring_radius, omega0, amplitude),
            to_vec(point), t, nodes);
      },
      py::arg("m"), py::arg("n"), py::arg("k_r") = 1.0,
      py::arg("ring_radius") = 1.0, py::arg("omega0") = 1.0,
      py::arg("amplitude") = 1.0, py::arg("point") = std::array<double, 3>{},
      py::arg("t") = 0.0, py::arg("nodes") = 512,
      "Ring-source carrier field at a point, complex amplitude.");
  m.def(
      "far_field_deviation",
      [](int mm, int n, double k_r, double ring_radius,
         const std::vector<double>& radii, double r_ref,
         const std::array<double, 3>& direction, int nodes) {
        const auto rows = sonolab::field::far_field_deviation(
            make_mode(mm, n, k_r, ring_radius, 1.0, 1.0), radii, r_ref,
            to_vec(direction), nodes);
        std::vector<std::pair<double, double>> out;
        for (const auto& row : rows) out.emplace_back(row.r, row.deviation);
        return out;
      },
      py::arg("m"), py::arg("n"), py::arg("k_r"), py::arg("ring_radius"),
      py::arg("radii"), py::arg("r_ref"), py::arg("direction"),
      py::arg("nodes") = 512,
      "Envelope deviation from the far-field 1/r law, per radius.");
  m.def("kg_dispersion_residual", &sonolab::field::kg_dispersion_residual,
        py::arg("omega"), py::arg("k"), py::arg("c") = 1.0,
        py::arg("omega0") = 1.0,
        "Klein-Gordon mass-shell residual omega^2 - c^2 k^2 - omega0^2.");

  // guided trajectories
  py::enum_<sonolab::pilot::ScenarioKind>(m, "ScenarioKind")
      .value("plane_wave", sonolab::pilot::ScenarioKind::plane_wave)
      .value("gaussian_free", sonolab::pilot::ScenarioKind::gaussian_free)
      .value("double_slit", sonolab::pilot::ScenarioKind::double_slit)
      .value("barrier", sonolab::pilot::ScenarioKind::barrier);

  py::class_<sonolab::pilot::ScenarioSpec>(m, "ScenarioSpec")
      .def(py::init<>())
      .def_readwrite("kind", &sonolab::pilot::ScenarioSpec::kind)
      .def_readwrite("hbar", &sonolab::pilot::ScenarioSpec::hbar)
      .def_readwrite("mass", &sonolab::pilot::ScenarioSpec::mass)
      .def_readwrite("domain_min", &sonolab::pilot::ScenarioSpec::domain_min)
      .def_readwrite("domain_max", &sonolab::pilot::ScenarioSpec::domain_max)
      .def_readwrite("samples", &sonolab::pilot::ScenarioSpec::samples)
      .def_readwrite("t_final", &sonolab::pilot::ScenarioSpec::t_final)
      .def_readwrite("dt", &sonolab::pilot::ScenarioSpec::dt)
      .def_readwrite("traj_dt", &sonolab::pilot::ScenarioSpec::traj_dt)
      .def_readwrite("absorbing", &sonolab::pilot::ScenarioSpec::absorbing)
      .def_readwrite("wavenumber", &sonolab::pilot::ScenarioSpec::wavenumber)
      .def_readwrite("window_width",
                     &sonolab::pilot::ScenarioSpec::window_width)
      .def_readwrite("sigma0", &sonolab::pilot::ScenarioSpec::sigma0)
      .def_readwrite("x0", &sonolab::pilot::ScenarioSpec::x0)
      .def_readwrite("v0", &sonolab::pilot::ScenarioSpec::v0)
      .def_readwrite("slit_separation",
                     &sonolab::pilot::ScenarioSpec::slit_separation)
      .def_readwrite("slit_width", &sonolab::pilot::ScenarioSpec::slit_width)
      .def_readwrite("barrier_height",
                     &sonolab::pilot::ScenarioSpec::barrier_height)
      .def_readwrite("barrier_width",
                     &sonolab::pilot::ScenarioSpec::barrier_width)
      .def_readwrite("histogram_bins",
                     &sonolab::pilot::ScenarioSpec::histogram_bins);

  m.def("default_scenario", &sonolab::pilot::default_scenario, py::arg("kind"),
        "Frozen defaults for a scenario kind.");
  m.def(
      "run_ensemble",
      [](const sonolab::pilot::ScenarioSpec& spec, int n_traj,
         std::uint64_t seed) {
        return ensemble_dict(sonolab::pilot::run_ensemble(spec, n_traj, seed));
      },
      py::arg("spec"), py::arg("n_traj"), py::arg("seed") = 0,
      "Guided-trajectory ensemble summary for a scenario.");
  m.def(
      "tunneling_transmission",
      [](const sonolab::pilot::ScenarioSpec& spec, int n_traj,
         std::uint64_t seed) {
        const auto res =
            sonolab::pilot::tunneling_transmission(spec, n_traj, seed);
        py::dict d;
        d["trajectory_fraction"] = res.trajectory_fraction;
        d["wave_fraction"] = res.wave_fraction;
        d["mc_stderr"] = res.mc_stderr;
        d["barrier_edge"] = res.barrier_edge;
        d["n_complete"] = res.n_complete;
        d["n_aborted"] = res.n_aborted;
        d["n_exited"] = res.n_exited;
        return d;
      },
      py::arg("spec"), py::arg("n_traj"), py::arg("seed") = 0,
      "Barrier transmission from trajectory counts and wave mass.");

  // oscillator synchronization
  m.def(
      "order_parameter",
      [](const std::vector<double>& phases) {
        const auto op = sonolab::sync::order_parameter(phases);
        return std::make_pair(op.r, op.mean_phase);
      },
      py::arg("phases"), "Mean-phasor magnitude and angle, (r, psi).");
  m.def(
      "pair_lock_threshold",
      [](double coupling, double r, const std::string& kernel, double k_r) {
        return sonolab::sync::pair_lock_threshold(coupling,
                                                  make_kernel(kernel, k_r), r);
      },
      py::arg("coupling"), py::arg("r"), py::arg("kernel") = "inverse_r",
      py::arg("k_r") = 1.0,
      "Two-oscillator frequency-lock boundary 2|K kernel(r)|.");
  m.def(
      "triangle_vertices",
      [](double apex_angle_deg, double perimeter) {
        std::vector<std::array<double, 3>> out;
        for (const sonolab::Vec3& v :
             sonolab::sync::triangle_vertices(apex_angle_deg, perimeter))
          out.push_back({v.x, v.y, v.z});
        return out;
      },
      py::arg("apex_angle_deg"), py::arg("perimeter") = 3.0,
      "Constant-perimeter isoceles triangle vertices.");

  // correlation experiments
  m.def("quantum_correlation", &sonolab::bell::quantum_correlation,
        py::arg("a"), py::arg("b"),
        "cos 2(a-b), photon-polarization convention; angles in radians.");
  m.def(
      "brute_force_lhv_max",
      [](double a, double a_alt, double b, double b_alt) {
        return sonolab::bell::brute_force_lhv_max({a, a_alt, b, b_alt});
      },
      py::arg("a"), py::arg("a_alt"), py::arg("b"), py::arg("b_alt"),
      "Max CHSH S over the 16 deterministic strategies (always 2).");
  m.def("bremermann_limit", &sonolab::bell::bremermann_limit,
        py::arg("mass_kg"), "Computation-rate bound m c^2 / h in 1/s.");
  m.def(
      "chsh_simulate",
      [](const std::string& model, const std::array<double, 4>& angles,
         int trials_per_pair, std::uint64_t seed,
         const std::array<int, 4>& table, bool communication_allowed) {
        sonolab::bell::LocalModelSpec spec;
        if (model == "deterministic_table")
          spec.kind = sonolab::bell::ModelKind::deterministic_table;
        else if (model == "shared_phase")
          spec.kind = sonolab::bell::ModelKind::shared_phase;
        else if (model == "quantum_oracle")
          spec.kind = sonolab::bell::ModelKind::quantum_oracle;
        else
          throw sonolab::ConfigError(
              "model must be one of deterministic_table, shared_phase, "
              "quantum_oracle");
        spec.table = table;
        spec.communication_allowed = communication_allowed;
        const sonolab::bell::Settings settings{angles[0], angles[1], angles[2],
                                               angles[3]};
        const auto recs = sonolab::bell::simulate_local_model(
            spec, settings, trials_per_pair, seed);
        const auto res = sonolab::bell::chsh(recs, settings);
        py::dict d;
        py::list pairs;
        for (const auto& pc : res.pairs)
          pairs.append(py::make_tuple(pc.label, pc.e, pc.stderr_e));
        d["pairs"] = pairs;
        d["S"] = res.s;
        d["S_err"] = res.s_err;
        return d;
      },
      py::arg("model"), py::arg("angles"), py::arg("trials_per_pair"),
      py::arg("seed") = 0,
      py::arg("table") = std::array<int, 4>{1, 1, 1, 1},
      py::arg("communication_allowed") = false,
      "Simulates a model over the four CHSH setting pairs; angles in "
      "radians.");
  m.def(
      "audit_experiment_json",
      [](const std::string& preset_json) {
        const auto geom = sonolab::bell::ExperimentGeometry::from_json(
            nlohmann::json::parse(preset_json));
        return sonolab::bell::audit_experiment(geom).to_json().dump();
      },
      py::arg("preset_json"),
      "Light-cone timing audit; JSON string in, report JSON string out.");
}
