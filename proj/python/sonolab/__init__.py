"""Numerical workbench: ring-source carrier fields, guided-trajectory
ensembles, geometry-dependent oscillator synchronization, and CHSH/timing
analysis. The compiled core carries the physics; this package adds thin
dict-friendly wrappers."""

import json as _json

from sonolab._core import (
    ConfigError,
    ScenarioKind,
    ScenarioSpec,
    __version__,
    bremermann_limit,
    brute_force_lhv_max,
    chsh_simulate,
    default_scenario,
    far_field_deviation,
    kg_dispersion_residual,
    order_parameter,
    pair_lock_threshold,
    quantum_correlation,
    run_ensemble,
    sonon_field,
    spherical_bessel,
    triangle_vertices,
    tunneling_transmission,
)
from sonolab._core import audit_experiment_json as _audit_experiment_json


def audit_experiment(preset):
    """Audit an experiment geometry given as a dict; returns the report dict."""
    return _json.loads(_audit_experiment_json(_json.dumps(preset)))


__all__ = [
    "ConfigError",
    "ScenarioKind",
    "ScenarioSpec",
    "__version__",
    "audit_experiment",
    "bremermann_limit",
    "brute_force_lhv_max",
    "chsh_simulate",
    "default_scenario",
    "far_field_deviation",
    "kg_dispersion_residual",
    "order_parameter",
    "pair_lock_threshold",
    "quantum_correlation",
    "run_ensemble",
    "sonon_field",
    "spherical_bessel",
    "triangle_vertices",
    "tunneling_transmission",
]
