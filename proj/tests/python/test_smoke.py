"""End-to-end checks of the python surface: every exported family gets one
call with a known answer."""

import math

import pytest

import sonolab


CANONICAL = (0.0, math.pi / 4, math.pi / 8, 3 * math.pi / 8)


def test_version_is_semver():
    parts = sonolab.__version__.split(".")
    assert len(parts) == 3
    assert all(p.isdigit() for p in parts)


def test_field_family():
    assert sonolab.spherical_bessel(0, 0.0) == 1.0
    assert sonolab.spherical_bessel(1, 0.5) == pytest.approx(
        0.16253703063606657, rel=1e-12
    )
    xi = sonolab.sonon_field(m=1, n=0, point=(3.0, 0.0, 0.5))
    assert isinstance(xi, complex)
    assert abs(xi) > 0.0

    assert sonolab.kg_dispersion_residual(5.0, 4.0, 1.0, 3.0) == 0.0

    direction = (0.8191520442889918, 0.0, 0.573576436351046)
    rows = sonolab.far_field_deviation(
        m=1, n=0, k_r=1.0, ring_radius=1.0,
        radii=[10.0, 20.0, 40.0], r_ref=80.0, direction=direction,
    )
    devs = [dev for (_, dev) in rows]
    assert devs[0] > devs[1] > devs[2]


def test_ensemble_family():
    spec = sonolab.default_scenario(sonolab.ScenarioKind.gaussian_free)
    assert spec.sigma0 == 1.0
    spec.t_final = 2.0
    res = sonolab.run_ensemble(spec, 200, seed=1)
    assert res["n_complete"] == 200
    assert res["n_aborted"] == 0
    assert res["ks_final"] < 0.15
    assert sum(res["bin_probability"]) == pytest.approx(1.0, abs=1e-6)
    assert len(res["final_positions"]) == 200

    bad = sonolab.default_scenario(sonolab.ScenarioKind.gaussian_free)
    bad.traj_dt = 0.03  # not an even multiple of dt
    with pytest.raises(sonolab.ConfigError):
        sonolab.run_ensemble(bad, 10, seed=1)


def test_sync_family():
    r, _psi = sonolab.order_parameter([0.2, 0.2, 0.2])
    assert r == pytest.approx(1.0, abs=1e-12)
    assert sonolab.pair_lock_threshold(1.0, 2.0, kernel="inverse_r") == (
        pytest.approx(1.0, rel=1e-12)
    )
    verts = sonolab.triangle_vertices(60.0, 3.0)
    assert len(verts) == 3
    for i in range(3):
        a, b = verts[i], verts[(i + 1) % 3]
        side = math.dist(a, b)
        assert side == pytest.approx(1.0, rel=1e-12)


def test_correlation_family():
    assert sonolab.quantum_correlation(0.0, 0.0) == pytest.approx(1.0)
    assert sonolab.quantum_correlation(0.0, math.pi / 2) == pytest.approx(-1.0)
    assert sonolab.brute_force_lhv_max(*CANONICAL) == 2.0

    local = sonolab.chsh_simulate(
        "shared_phase", CANONICAL, trials_per_pair=20000, seed=5
    )
    assert abs(local["S"]) <= 2.0 + 5.0 * local["S_err"]

    oracle = sonolab.chsh_simulate(
        "quantum_oracle", CANONICAL, trials_per_pair=50000, seed=7,
        communication_allowed=True,
    )
    assert oracle["S"] == pytest.approx(2.0 * math.sqrt(2.0),
                                        abs=5.0 * oracle["S_err"])
    assert len(oracle["pairs"]) == 4

    with pytest.raises(sonolab.ConfigError):
        sonolab.chsh_simulate("bogus", CANONICAL, trials_per_pair=100)


def test_bremermann():
    assert sonolab.bremermann_limit(1.0) == pytest.approx(
        1.3563924896521321e50, rel=1e-12
    )
    with pytest.raises(sonolab.ConfigError):
        sonolab.bremermann_limit(0.0)


def test_audit_dict_round_trip():
    preset = {
        "name": "bench",
        "source_xyz_m": [0.0, 0.0, 0.0],
        "detectors_xyz_m": [[-200.0, 0.0, 0.0], [200.0, 0.0, 0.0]],
        "path_lengths_m": [250.0, 250.0],
        "switch_time_s": 1e-7,
        "window_s": 1e-7,
        "notes": "",
    }
    report = sonolab.audit_experiment(preset)
    assert report["detector_separation_m"] == pytest.approx(400.0)
    assert report["classification"] in (
        "chi_loophole_open",
        "chi_loophole_closed",
        "indeterminate",
    )
    # 100 ns windows against d/c = 1.33 us: light cannot span either window.
    assert report["classification"] == "chi_loophole_closed"
