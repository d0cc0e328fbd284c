"""Named parameter bundles shipped with the package.

A preset is a two-level mapping {section: {key: value}} in the same shape
as a parsed configuration file; the CLI merges a preset with the user's
config file and ``--set`` overrides before building typed parameters.
"""

from __future__ import annotations

import copy

from .optics import SfgParams, SourceParams
from .protocols import ExperimentParams

# Measured entangled-photon-source parameters: mean photon numbers per
# mode, Klyshko (analyzer-arm) efficiencies, and transmittances of the
# optical circuit in front of the analyzer.
_EPS_PARAMS = {
    "mu_1h": 0.060, "mu_1v": 0.050, "mu_2h": 0.080, "mu_2v": 0.061,
    "eta_1h": 0.097, "eta_1v": 0.11, "eta_2h": 0.070, "eta_2v": 0.10,
    "t_1h": 0.44, "t_1v": 0.48, "t_2h": 0.56, "t_2v": 0.57,
}

_PRESETS = {
    # Measured analyzer-unit benchmark: classical two-beam count rates,
    # collection and detection efficiencies, input powers, plus the
    # crystal constants and spectral profiles for the theoretical and
    # effective efficiency routes.
    "paper-table1": {
        "experiment": {"name": "efficiency"},
        "efficiency": {
            "bench_h.c_sfg": 2.54e6, "bench_h.eta_t": 0.43,
            "bench_h.eta_d": 0.85, "bench_h.p_a": 80e-9,
            "bench_h.p_b": 61e-9,
            "bench_v.c_sfg": 1.94e6, "bench_v.eta_t": 0.40,
            "bench_v.eta_d": 0.85, "bench_v.p_a": 70e-9,
            "bench_v.p_b": 56e-9,
            "lambda_a": 1535e-9, "lambda_b": 1585e-9, "rep_rate": 1e9,
            "crystal.eta_shg": 0.28, "crystal.length_cm": 6.3,
            "crystal.delta_nu_hat": 2.48e11, "crystal.tbp": 0.67,
            "crystal.lam": 1560e-9,
            "profile_a.center_nm": 1535.0, "profile_a.fwhm_nm": 0.31,
            "profile_b.center_nm": 1585.0, "profile_b.fwhm_nm": 0.33,
            "profile_pm.fwhm_nm": 0.080,
        },
    },
    # Source parameters alone, with an ideal (lossless, dark-free,
    # unit-efficiency) analyzer.
    "paper-table2": {
        "experiment": {"name": "swap-sfg"},
        "params": dict(_EPS_PARAMS, **{
            "sfg_h": 1.0, "sfg_v": 1.0,
            "eta_th": 1.0, "eta_tv": 1.0, "eta_d": 1.0,
            "dark": 0.0, "window_acceptance": 1.0, "pair_cap": 3,
        }),
    },
    # The full measured pipeline: sources, analyzer conversion
    # efficiencies, collection/detection losses, dark counts, and the
    # 96 % coincidence-window acceptance.
    "paper-tableS1": {
        "experiment": {"name": "swap-sfg"},
        "params": dict(_EPS_PARAMS, **{
            "sfg_h": 2.31e-8, "sfg_v": 2.35e-8,
            "eta_th": 0.43, "eta_tv": 0.40, "eta_d": 0.85,
            "dark": 6.7e-11, "window_acceptance": 0.96, "pair_cap": 3,
        }),
    },
    # Loss-free reference point.
    "ideal": {
        "experiment": {"name": "swap-sfg"},
        "params": {
            "mu_1h": 0.05, "mu_1v": 0.05, "mu_2h": 0.05, "mu_2v": 0.05,
            "eta_1h": 1.0, "eta_1v": 1.0, "eta_2h": 1.0, "eta_2v": 1.0,
            "t_1h": 1.0, "t_1v": 1.0, "t_2h": 1.0, "t_2v": 1.0,
            "sfg_h": 1.0, "sfg_v": 1.0,
            "eta_th": 1.0, "eta_tv": 1.0, "eta_d": 1.0,
            "dark": 0.0, "window_acceptance": 1.0, "pair_cap": 3,
        },
    },
    # Visibility-versus-loss comparison of the two analyzers: symmetric
    # sources, ideal collection and detection, loss swept on all four
    # channel modes at once.
    "fig-s3": {
        "experiment": {"name": "sweep"},
        "params": {
            "mu_1h": 0.05, "mu_1v": 0.05, "mu_2h": 0.05, "mu_2v": 0.05,
            "eta_1h": 1.0, "eta_1v": 1.0, "eta_2h": 1.0, "eta_2v": 1.0,
            "t_1h": 1.0, "t_1v": 1.0, "t_2h": 1.0, "t_2v": 1.0,
            "sfg_h": 1.0, "sfg_v": 1.0,
            "eta_th": 1.0, "eta_tv": 1.0, "eta_d": 1.0,
            "dark": 0.0, "window_acceptance": 1.0, "pair_cap": 3,
        },
        "sweep": {"variable": "loss", "start": 0.0, "stop": 0.9,
                  "steps": 19, "bsa": "both"},
    },
}

_PARAM_FIELDS = {
    "t_1h": "t1H", "t_1v": "t1V", "t_2h": "t2H", "t_2v": "t2V",
    "eta_th": "eta_tH", "eta_tv": "eta_tV",
    "eta_1h": "eta_1H", "eta_1v": "eta_1V",
    "eta_2h": "eta_2H", "eta_2v": "eta_2V",
    "eta_d": "eta_d", "dark": "dark",
    "window_acceptance": "window_acceptance", "pair_cap": "pair_cap",
}


def presets() -> list:
    """Stable, sorted list of available preset names."""
    return sorted(_PRESETS)


def get_preset(name: str) -> dict:
    """Deep copy of the named preset's configuration sections."""
    if name not in _PRESETS:
        raise KeyError(f"unknown preset {name!r}; available: {', '.join(presets())}")
    return copy.deepcopy(_PRESETS[name])


def swap_params(section: dict) -> ExperimentParams:
    """Build ExperimentParams from a flat [params] section."""
    known = set(_PARAM_FIELDS) | {"mu_1h", "mu_1v", "mu_2h", "mu_2v",
                                  "sfg_h", "sfg_v"}
    unknown = set(section) - known
    if unknown:
        raise KeyError(f"unknown parameter keys: {', '.join(sorted(unknown))}")
    kwargs = {}
    for key, fname in _PARAM_FIELDS.items():
        if key in section:
            value = section[key]
            kwargs[fname] = int(value) if fname == "pair_cap" else float(value)
    return ExperimentParams(
        eps1=SourceParams(float(section.get("mu_1h", 0.0)),
                          float(section.get("mu_1v", 0.0))),
        eps2=SourceParams(float(section.get("mu_2h", 0.0)),
                          float(section.get("mu_2v", 0.0))),
        sfg=SfgParams(float(section.get("sfg_h", 1.0)),
                      float(section.get("sfg_v", 1.0))),
        **kwargs)
