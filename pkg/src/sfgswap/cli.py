"""Command-line front end: run named experiments, sweeps, and threshold
searches from flat key=value (INI) or JSON configuration, and emit CSV or
human-readable reports.

Exit codes: 0 on success, 2 on configuration errors, 3 on model errors.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import configparser
import json
import math
import sys

from . import bell
from .detection import CoincidenceEfficiencies
from .efficiency import (
    CrystalParams,
    SfgBenchInputs,
    SpectralProfile,
    sfg_eff_effective,
    sfg_eff_from_counts,
    sfg_eff_theoretical,
    spectral_overlap,
)
from .presets import get_preset, presets, swap_params
from .protocols import lo_swap, qfc_teleport_strong_pump, sfg_swap, teleport

EXPERIMENTS = ("swap-sfg", "swap-lo", "teleport", "qfc", "bell", "keyrate",
               "efficiency", "sweep")

CSV_METRICS = ("V_Z", "V_X", "F_low", "S", "Q", "r", "herald_prob")
CSV_UNITS = {
    "V_Z": "dimensionless", "V_X": "dimensionless",
    "F_low": "dimensionless", "S": "dimensionless", "Q": "dimensionless",
    "r": "bits/herald", "herald_prob": "probability/pulse",
}

POLARIZATIONS = {
    "H": (1.0, 0.0), "V": (0.0, 1.0),
    "D": (1 / math.sqrt(2), 1 / math.sqrt(2)),
    "A": (1 / math.sqrt(2), -1 / math.sqrt(2)),
    "R": (1 / math.sqrt(2), 1j / math.sqrt(2)),
    "L": (1 / math.sqrt(2), -1j / math.sqrt(2)),
}


class ConfigError(Exception):
    pass


def _load_config_file(path: str) -> dict:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")
    stripped = text.lstrip()
    if path.endswith(".json") or stripped.startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON config {path}: {exc}")
        if not isinstance(data, dict) or not all(
                isinstance(v, dict) for v in data.values()):
            raise ConfigError("JSON config must map section names to objects")
        return {s: dict(kv) for s, kv in data.items()}
    parser = configparser.ConfigParser()
    parser.optionxform = str
    try:
        parser.read_string(text, source=path)
    except configparser.Error as exc:
        raise ConfigError(f"invalid config {path}: {exc}")
    return {s: dict(parser.items(s)) for s in parser.sections()}


def _merge(base: dict, extra: dict) -> dict:
    out = {s: dict(kv) for s, kv in base.items()}
    for section, kv in extra.items():
        out.setdefault(section, {}).update(kv)
    return out


def _apply_sets(config: dict, sets) -> dict:
    for item in sets or ():
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        key = key.strip()
        if "." in key:
            first, rest = key.split(".", 1)
            # section.key, except dotted keys inside [efficiency]
            section, key = (first, rest) if first in (
                "experiment", "params", "sweep", "teleport", "qfc",
                "bell") else ("efficiency", key)
        else:
            section = "params"
        config.setdefault(section, {})[key.strip()] = value.strip()
    return config


def _get_float(section: dict, key: str, default=None) -> float:
    if key not in section:
        if default is None:
            raise ConfigError(f"missing required key {key!r}")
        return default
    try:
        return float(section[key])
    except (TypeError, ValueError):
        raise ConfigError(f"key {key!r} is not a number: {section[key]!r}")


def _fmt(value) -> str:
    if value is None or value == "":
        return ""
    return f"{value:.12g}"


def _csv_lines(rows, swept_names=(), swept_units=()) -> str:
    header = [f"{n} ({u})" for n, u in zip(swept_names, swept_units)]
    header += [f"{m} ({CSV_UNITS[m]})" for m in CSV_METRICS]
    lines = [",".join(header)]
    for swept, metrics in rows:
        cells = [_fmt(v) if not isinstance(v, str) else v for v in swept]
        cells += [_fmt(metrics.get(m)) for m in CSV_METRICS]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _emit(text: str, out_path) -> None:
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _build_params(config: dict):
    try:
        return swap_params(config.get("params", {}))
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(str(exc))


def _report_metrics(metrics: dict) -> str:
    lines = [f"{k} = {_fmt(v)}" for k, v in metrics.items() if v is not None]
    return "\n".join(lines) + "\n"


def _run_swap(config, fmt, out, lo=False):
    params = _build_params(config)
    rep = lo_swap(params) if lo else sfg_swap(params)
    metrics = {"V_Z": rep.v_z, "V_X": rep.v_x,
               "F_low": rep.fidelity_lower_bound,
               "herald_prob": rep.herald_prob}
    if fmt == "csv":
        _emit(_csv_lines([((), metrics)]), out)
    else:
        _emit(rep.to_text(), out)
    return 0


def _run_teleport(config, fmt, out):
    section = config.get("teleport", {})
    pol_name = section.get("polarization", "D")
    if pol_name in POLARIZATIONS:
        pol = POLARIZATIONS[pol_name]
    else:
        try:
            parts = [complex(p) for p in pol_name.split(",")]
            pol = (parts[0], parts[1])
        except (ValueError, IndexError):
            raise ConfigError(f"unknown polarization {pol_name!r}")
    mean_photons = _get_float(section, "mean_photons", 0.95)
    basis = section.get("herald_basis", "D")
    params = _build_params(config)
    rep = teleport(params, pol, mean_photons, herald_basis=basis)
    metrics = {"fidelity": rep.fidelity, "herald_prob": rep.herald_prob,
               "one_photon_weight": rep.one_photon_weight}
    if fmt == "csv":
        _emit(_csv_lines([((), {"F_low": rep.fidelity,
                                "herald_prob": rep.herald_prob})]), out)
    else:
        _emit(_report_metrics(metrics), out)
    return 0


def _run_qfc(config, fmt, out):
    section = config.get("qfc", {})
    alpha = complex(section.get("alpha", 1 / math.sqrt(2)))
    beta = complex(section.get("beta", 1 / math.sqrt(2)))
    chi_tau = _get_float(section, "chi_tau", 0.1)
    rep = qfc_teleport_strong_pump(alpha, beta, chi_tau)
    metrics = {"fidelity": rep.fidelity, "herald_prob": rep.herald_prob,
               "conversion_angle_H": rep.conversion_angle_H,
               "conversion_angle_V": rep.conversion_angle_V}
    if fmt == "csv":
        _emit(_csv_lines([((), {"F_low": rep.fidelity,
                                "herald_prob": rep.herald_prob})]), out)
    else:
        _emit(_report_metrics(metrics), out)
    return 0


def _run_bell(config, fmt, out, seed, gain_factor):
    params = _build_params(config)
    section = config.get("bell", {})
    gain = gain_factor if gain_factor is not None else _get_float(
        section, "gain_factor", 1.0)
    n_starts = int(_get_float(section, "n_starts", 8))
    free_mu = section.get("free_mu", "false").lower() in ("1", "true", "yes")
    res = bell.optimize_chsh(params, free_mu=free_mu, gain=gain, seed=seed,
                             n_starts=n_starts)
    metrics = {"S": res.value,
               "theta_a1": res.settings.theta_a1,
               "theta_a2": res.settings.theta_a2,
               "theta_b1": res.settings.theta_b1,
               "theta_b2": res.settings.theta_b2}
    if free_mu:
        metrics["mu_h"] = res.mu_h
        metrics["mu_v"] = res.mu_v
    if fmt == "csv":
        _emit(_csv_lines([((gain,), {"S": res.value})],
                         ("gain_factor",), ("dimensionless",)), out)
    else:
        metrics["bell_violation"] = 1.0 if res.value > 2.0 else 0.0
        _emit(_report_metrics(metrics), out)
    return 0


def _run_keyrate(config, fmt, out, seed, gain_factor):
    params = _build_params(config)
    section = config.get("bell", {})
    gain = gain_factor if gain_factor is not None else _get_float(
        section, "gain_factor", 1.0)
    n_starts = int(_get_float(section, "n_starts", 8))
    res = bell.optimize_key_rate(params, gain=gain, seed=seed,
                                 n_starts=n_starts)
    metrics = {"r": res.value, "S": res.s, "Q": res.q}
    if fmt == "csv":
        _emit(_csv_lines([((gain,), metrics)],
                         ("gain_factor",), ("dimensionless",)), out)
    else:
        _emit(_report_metrics(metrics), out)
    return 0


def _run_efficiency(config, fmt, out):
    section = config.get("efficiency", {})
    if not section:
        raise ConfigError("efficiency experiment needs an [efficiency] section")
    lam_a = _get_float(section, "lambda_a")
    lam_b = _get_float(section, "lambda_b")
    rep_rate = _get_float(section, "rep_rate")
    results = {}
    for row in ("h", "v"):
        prefix = f"bench_{row}."
        if prefix + "c_sfg" in section:
            bench = SfgBenchInputs(
                c_sfg=_get_float(section, prefix + "c_sfg"),
                eta_t=_get_float(section, prefix + "eta_t"),
                eta_d=_get_float(section, prefix + "eta_d"),
                p_a=_get_float(section, prefix + "p_a"),
                p_b=_get_float(section, prefix + "p_b"),
                lambda_a=lam_a, lambda_b=lam_b, f=rep_rate)
            results[f"eta_sfg_{row}_from_counts"] = sfg_eff_from_counts(bench)
    eta_th = None
    if "crystal.eta_shg" in section:
        crystal = CrystalParams(
            eta_shg=_get_float(section, "crystal.eta_shg"),
            length_cm=_get_float(section, "crystal.length_cm"),
            delta_nu_hat=_get_float(section, "crystal.delta_nu_hat"),
            tbp=_get_float(section, "crystal.tbp"),
            lam=_get_float(section, "crystal.lam"))
        eta_th = sfg_eff_theoretical(crystal)
        results["eta_sfg_theoretical"] = eta_th
    if "profile_a.fwhm_nm" in section and eta_th is not None:
        prof_a = SpectralProfile(_get_float(section, "profile_a.center_nm"),
                                 _get_float(section, "profile_a.fwhm_nm"))
        prof_b = SpectralProfile(_get_float(section, "profile_b.center_nm"),
                                 _get_float(section, "profile_b.fwhm_nm"))
        center_pm = 1.0 / (1.0 / prof_a.center_nm + 1.0 / prof_b.center_nm)
        prof_pm = SpectralProfile(center_pm,
                                  _get_float(section, "profile_pm.fwhm_nm"))
        results["spectral_overlap"] = spectral_overlap(prof_a, prof_b, prof_pm)
        results["eta_sfg_effective"] = sfg_eff_effective(
            eta_th, prof_a, prof_b, prof_pm)
    if not results:
        raise ConfigError("efficiency section provided no computable inputs")
    if fmt == "csv":
        header = ",".join(f"{k} (dimensionless)" for k in results)
        row = ",".join(_fmt(v) for v in results.values())
        _emit(header + "\n" + row + "\n", out)
    else:
        _emit(_report_metrics(results), out)
    return 0


def _sweep_assignments(variable: str, value: float) -> dict:
    if variable == "loss":
        t = 1.0 - value
        return {"t_1h": t, "t_1v": t, "t_2h": t, "t_2v": t}
    if variable == "t":
        return {"t_1h": value, "t_1v": value, "t_2h": value, "t_2v": value}
    if variable == "mu":
        return {"mu_1h": value, "mu_1v": value,
                "mu_2h": value, "mu_2v": value}
    return {variable: value}


def _sweep_point(args):
    base_section, variable, value, bsa = args
    section = dict(base_section)
    for key, v in _sweep_assignments(variable, value).items():
        section[key] = v
    params = swap_params(section)
    out = []
    if bsa in ("sfg", "both"):
        rep = sfg_swap(params)
        out.append(("sfg", rep))
    if bsa in ("lo", "both"):
        rep = lo_swap(params)
        out.append(("lo", rep))
    return out


def _run_sweep(config, fmt, out, jobs):
    section = config.get("sweep", {})
    variable = section.get("variable")
    if not variable:
        raise ConfigError("sweep needs a variable")
    steps = int(_get_float(section, "steps"))
    if steps < 2:
        raise ConfigError("sweep needs steps >= 2")
    start = _get_float(section, "start")
    stop = _get_float(section, "stop")
    bsa = section.get("bsa", "sfg")
    if bsa not in ("sfg", "lo", "both"):
        raise ConfigError(f"sweep bsa must be sfg, lo or both, not {bsa!r}")
    params_section = config.get("params", {})
    known = set(_sweep_assignments(variable, 0.0))
    valid = set(params_section) | {"t_1h", "t_1v", "t_2h", "t_2v",
                                   "mu_1h", "mu_1v", "mu_2h", "mu_2v"}
    if not known <= valid:
        raise ConfigError(f"unknown sweep variable {variable!r}")
    values = [start + (stop - start) * i / (steps - 1) for i in range(steps)]
    tasks = [(params_section, variable, v, bsa) for v in values]
    if jobs and jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_sweep_point, tasks))
    else:
        results = [_sweep_point(t) for t in tasks]
    rows = []
    for value, point in zip(values, results):
        for which, rep in point:
            rows.append(((value, which),
                         {"V_Z": rep.v_z, "V_X": rep.v_x,
                          "F_low": rep.fidelity_lower_bound,
                          "herald_prob": rep.herald_prob}))
    # sweeps are tabular in either output format
    text = _csv_lines(rows, (variable, "bsa"), ("dimensionless", "label"))
    _emit(text, out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sfgswap",
        description="Simulations of entanglement swapping with a "
                    "sum-frequency-generation Bell-state analyzer.")
    parser.add_argument("experiment",
                        choices=EXPERIMENTS + ("presets",),
                        help="experiment to run, or 'presets' to list bundles")
    parser.add_argument("--config", help="INI or JSON configuration file")
    parser.add_argument("--preset", help="named parameter bundle")
    parser.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override a single configuration key "
                             "(section.key=value; bare keys go to [params])")
    parser.add_argument("--out", help="output path (default: stdout)")
    parser.add_argument("--jobs", type=int, default=1,
                        help="concurrent sweep evaluations")
    parser.add_argument("--seed", type=int, default=0,
                        help="seed for optimizer restarts")
    parser.add_argument("--format", choices=("csv", "report"),
                        default="report", dest="fmt")
    parser.add_argument("--gain-factor", type=float, default=None,
                        help="multiplier on the analyzer conversion efficiency")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.experiment == "presets":
        _emit("\n".join(presets()) + "\n", args.out)
        return 0

    try:
        config = {}
        if args.preset:
            try:
                config = get_preset(args.preset)
            except KeyError as exc:
                raise ConfigError(str(exc))
        if args.config:
            config = _merge(config, _load_config_file(args.config))
        config = _apply_sets(config, args.set)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    try:
        if args.experiment == "swap-sfg":
            return _run_swap(config, args.fmt, args.out)
        if args.experiment == "swap-lo":
            return _run_swap(config, args.fmt, args.out, lo=True)
        if args.experiment == "teleport":
            return _run_teleport(config, args.fmt, args.out)
        if args.experiment == "qfc":
            return _run_qfc(config, args.fmt, args.out)
        if args.experiment == "bell":
            return _run_bell(config, args.fmt, args.out, args.seed,
                             args.gain_factor)
        if args.experiment == "keyrate":
            return _run_keyrate(config, args.fmt, args.out, args.seed,
                                args.gain_factor)
        if args.experiment == "efficiency":
            return _run_efficiency(config, args.fmt, args.out)
        if args.experiment == "sweep":
            return _run_sweep(config, args.fmt, args.out, args.jobs)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, ZeroDivisionError, RuntimeError) as exc:
        print(f"model error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return 2
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
