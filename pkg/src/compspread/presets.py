"""Shipped scenario presets, one per headline experiment."""

from __future__ import annotations

import copy

from .errors import ConfigError

_CANONICAL_COEFFS = {
    "period": 1.0,
    "a1": {"constant": 1.0},
    "b1": {"constant": 1.0},
    "c1": {"constant": 0.5},
    "a2": {"constant": 0.4},
    "b2": {"constant": 0.5},
    "c2": {"constant": 1.0},
}

_WEAK_COEFFS = {
    "period": 1.0,
    "a1": {"constant": 1.0},
    "b1": {"constant": 1.0},
    "c1": {"constant": 0.5},
    "a2": {"constant": 1.0},
    "b2": {"constant": 0.5},
    "c2": {"constant": 1.0},
}


def _with_bump(coeffs: dict, name: str, amplitude: float, width: float,
               ramp: float = 0.5) -> dict:
    out = copy.deepcopy(coeffs)
    out[name] = dict(out[name])
    out[name]["bump"] = {"amplitude": amplitude, "width": width, "ramp": ramp}
    return out


PRESETS: dict[str, dict] = {
    "kpp-control": {
        "coefficients": _CANONICAL_COEFFS,
        "grid": {"x_min": -50.0, "x_max": 350.0, "n": 4001},
        "scheme": {"steps_per_period": 200},
        "scenario": {"name": "simulate", "variables": "original",
                     "periods": 100, "front": {"x0": -20.0, "ramp": 2.0,
                                               "u_level": 0.5, "v_level": 0.0},
                     "theta": 0.25},
        "output": {"formats": ["csv", "json"]},
        "seed": 0,
    },
    "canonical-h1h2": {
        "coefficients": _CANONICAL_COEFFS,
        "grid": {"x_min": -40.0, "x_max": 260.0, "n": 3001},
        "scheme": {"steps_per_period": 200},
        "scenario": {"name": "interval", "periods": 100, "x0": -20.0,
                     "ramp": 2.0},
        "output": {"formats": ["csv", "json"]},
        "seed": 0,
    },
    "bump-not-slower": {
        "coefficients": _with_bump(_CANONICAL_COEFFS, "a1", -0.2, 4.0),
        "grid": {"x_min": -40.0, "x_max": 260.0, "n": 3001},
        "scheme": {"steps_per_period": 200},
        "scenario": {"name": "interval", "periods": 100, "x0": -20.0,
                     "ramp": 2.0},
        "output": {"formats": ["csv", "json"]},
        "seed": 0,
    },
    "bump-h2-equal-speed": {
        "coefficients": _with_bump(_CANONICAL_COEFFS, "a1", 0.3, 4.0),
        "grid": {"x_min": -40.0, "x_max": 260.0, "n": 3001},
        "scheme": {"steps_per_period": 200},
        "scenario": {"name": "interval", "periods": 100, "x0": -20.0,
                     "ramp": 2.0},
        "output": {"formats": ["csv", "json"]},
        "seed": 0,
    },
    "remark31-destabilize": {
        "coefficients": _CANONICAL_COEFFS,
        "scenario": {"name": "destabilize"},
        "output": {"formats": ["csv", "json"]},
        "seed": 0,
    },
    "thm41-coexistence": {
        "coefficients": _WEAK_COEFFS,
        "grid": {"x_min": -30.0, "x_max": 30.0, "n": 301},
        "scheme": {"steps_per_period": 32},
        "scenario": {"name": "coexist", "seed_eps": 0.01},
        "output": {"formats": ["csv", "json"]},
        "seed": 0,
    },
    "continuity-sweep": {
        "coefficients": _CANONICAL_COEFFS,
        "scenario": {"name": "sweep", "eps": [0.2, 0.1, 0.05],
                     "field": "a1"},
        "output": {"formats": ["csv", "json"]},
        "seed": 0,
    },
}


def preset_config(name: str) -> dict:
    if name not in PRESETS:
        raise ConfigError(
            f"unknown preset {name!r}; available: {sorted(PRESETS)}")
    return copy.deepcopy(PRESETS[name])
