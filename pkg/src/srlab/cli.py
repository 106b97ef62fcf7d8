"""Batch command-line front-end.

Every experiment is a subcommand that writes CSV artifacts plus a run
manifest (the fully resolved configuration as a flat INI file) into
--out-dir and prints a one-line summary.  Feeding a manifest back through
--config replays the run byte-for-byte; explicit flags win over config
values, which win over built-in defaults.  `reproduce <preset>` bundles
the canned parameter sets for the standard experiments.

Exit codes: 0 success, 2 bad usage/configuration, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

import srlab
from srlab.amp_detect import (
    FitError,
    calibrate_and_estimate_decay,
    fit_sigmoid,
    t0_sigma_curve,
)
from srlab.bank import (
    amplitude_bracket,
    resonance_rate_for,
    sigma_sweep_bank,
    threshold_sweep_bank,
    vote_bank,
)
from srlab.csvio import (
    read_manifest,
    read_t0_curve_csv,
    write_bank_csv,
    write_freq_table_csv,
    write_hysteresis_csv,
    write_manifest,
    write_rows,
    write_sweep_csv,
    write_t0_curve_csv,
    write_waveforms_csv,
)
from srlab.experiments import capture_transitions, find_sr_peak, snr_sigma_sweep
from srlab.freq_detect import (
    DetectionSetup,
    detect_frequency,
    error_rate_table,
    optimal_sigma_search,
    summarize_error_table,
)
from srlab.noise import NoiseSpec
from srlab.signals import DampedSine, Sine
from srlab.trigger import calibrated_config, hysteresis_sweep, ideal_config, v_th_from_vdc

# Parameter tables: name -> (kind, default, help).  Kinds: float, int, str,
# flag, maybe_float (empty means absent), strlist (repeatable flag).
# A None default with no flag given and no config value means "required".

_SIM = {
    "sample_rate": ("float", 20000.0, "sampling rate, Hz"),
    "noise_rate": ("maybe_float", None, "noise draw rate, Hz (default: sample rate)"),
    "seed": ("int", 0, "base noise seed (env SRLAB_SEED overrides this default)"),
}

_TRIG = {
    "vdc": ("float", 1.0, "supply voltage setting the rails/thresholds, V"),
    "ratio": ("float", 0.045, "feedback divider ratio (divider law only)"),
    "attenuation": ("float", 0.5, "input divider gain"),
    "law": ("str", "divider", "threshold law: divider or calibrated"),
}

TABLES: dict[str, dict] = {
    "hysteresis": {
        **_TRIG,
        "v_min": ("float", -0.2, "sweep start, V"),
        "v_max": ("float", 0.2, "sweep end, V"),
        "points": ("int", 801, "sweep points per branch"),
    },
    "transitions": {
        **_TRIG,
        "amplitude": ("float", 0.1, "signal amplitude, V"),
        "frequency": ("float", 100.0, "signal frequency, Hz"),
        "decay": ("float", 0.0, "decay constant, 1/s (0 = undamped)"),
        "sigma": ("float", 0.05, "noise SD, V"),
        "duration": ("float", 0.4, "acquisition time, s"),
        **_SIM,
    },
    "snr-sweep": {
        **_TRIG,
        "amplitude": ("float", 0.05, "signal amplitude, V"),
        "frequency": ("float", 500.0, "signal frequency, Hz"),
        "decay": ("float", 0.0, "decay constant, 1/s (0 = undamped)"),
        "sigma_grid": ("str", "0.01:0.2:0.005", "noise SD grid start:stop:step or list"),
        "repeats": ("int", 10, "repeats per noise level"),
        "duration": ("float", 0.4, "acquisition time, s"),
        **_SIM,
    },
    "detect-freq": {
        **_TRIG,
        "amplitude": ("float", 0.1, "signal amplitude, V"),
        "decay": ("float", 5.0, "decay constant, 1/s"),
        "frequency": ("float", 500.0, "true signal frequency, Hz (scoring only)"),
        "sigma": ("float", 0.01, "noise SD, V"),
        "dc_guard": ("maybe_float", None, "ignore spectrum below this, Hz"),
        "duration": ("float", 0.4, "acquisition time, s"),
        **_SIM,
    },
    "freq-table": {
        **_TRIG,
        "amplitude": ("float", 0.1, "signal amplitude, V"),
        "decay": ("float", 5.0, "decay constant, 1/s"),
        "sigma": ("float", 0.01, "noise SD, V"),
        "frequencies": ("str", "10,50,100,500,1000,2000", "frequency list, Hz"),
        "repeats": ("int", 10, "runs per frequency"),
        "dc_guard": ("maybe_float", None, "ignore spectrum below this, Hz"),
        "duration": ("float", 0.4, "acquisition time, s"),
        **_SIM,
    },
    "optimal-sigma": {
        **_TRIG,
        "amplitude": ("float", 0.1, "signal amplitude, V"),
        "decay": ("float", 5.0, "decay constant, 1/s"),
        "frequency": ("float", 50.0, "hypothesized frequency, Hz"),
        "sigma_grid": ("str", "0.01:0.05:0.01", "noise SD grid"),
        "repeats": ("int", 10, "repeats per noise level"),
        "duration": ("float", 0.4, "acquisition time, s"),
        **_SIM,
    },
    "t0-curve": {
        "vdc": ("float", 4.0, "supply voltage, V"),
        "ratio": ("float", 0.045, "feedback divider ratio (divider law only)"),
        "attenuation": ("float", 0.5, "input divider gain"),
        "law": ("str", "calibrated", "threshold law: divider or calibrated"),
        "amplitude": ("float", 0.1, "signal amplitude, V"),
        "decay": ("float", 5.0, "decay constant, 1/s"),
        "frequency": ("float", 1000.0, "signal frequency, Hz"),
        "sigma_grid": ("str", "0:0.5:0.01", "noise SD grid"),
        "runs": ("int", 50, "runs per noise level"),
        "duration": ("float", 1.5, "acquisition time, s"),
        **_SIM,
    },
    "fit-sigmoid": {
        "input": ("str", None, "t0-curve CSV to fit (required)"),
        "plateau": ("float", 1.5, "sigmoid plateau, s"),
        "float_plateau": ("flag", False, "fit the plateau instead of fixing it"),
        "decay": ("maybe_float", None, "decay label for the output row"),
    },
    "estimate-decay": {
        "calibration": ("strlist", None, "calibration entry b=curve.csv (repeat >= 3x)"),
        "observed": ("str", None, "observed t0-curve CSV (required)"),
        "plateau": ("float", 1.5, "sigmoid plateau, s"),
    },
    "bank": {
        "mode": ("str", "threshold", "sweep axis: threshold or sigma"),
        "amplitude": ("float", 0.01, "signal amplitude, V"),
        "frequency": ("float", 500.0, "signal frequency, Hz"),
        "decay": ("float", 0.0, "decay constant, 1/s (0 = undamped)"),
        "thresholds": ("str", "0.001,0.002,0.004,0.008,0.016,0.032,0.064",
                       "threshold grid (threshold mode)"),
        "sigma": ("float", 0.002, "common noise SD (threshold mode), V"),
        "sigma_grid": ("str", "0.004,0.008,0.012,0.016,0.024",
                       "noise SD grid (sigma mode)"),
        "threshold": ("float", 0.02, "common threshold (sigma mode), V"),
        "min_rate": ("maybe_float", None,
                     "resonance transition rate, Hz (default: 1x frequency)"),
        "votes": ("int", 20, "seeds in the majority vote"),
        "duration": ("float", 0.4, "acquisition time, s"),
        **_SIM,
    },
}

PRESETS = {
    "fig4": ("transitions", {}),
    "fig5": ("snr-sweep", {}),
    "fig6": ("hysteresis", {}),
    "fig8": (None, {}),  # threshold-law table, handled directly
    "table1": ("freq-table", {}),
    "fig12": ("optimal-sigma", {}),
    "fig13": ("t0-curve", {}),
}


def parse_grid(text: str) -> np.ndarray:
    """Grid syntax: 'start:stop:step' (inclusive of both ends when step
    divides the span) or a comma-separated list."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid {text!r} must be start:stop:step")
        start, stop, step = (float(p) for p in parts)
        if step <= 0.0 or stop <= start:
            raise ValueError(f"grid {text!r} needs stop > start and step > 0")
        n = int(round((stop - start) / step)) + 1
        return np.linspace(start, start + (n - 1) * step, n)
    values = np.asarray([float(p) for p in text.split(",") if p.strip() != ""])
    if values.size == 0:
        raise ValueError(f"grid {text!r} is empty")
    return values


def _parse_config_value(kind: str, raw: str):
    if kind == "float":
        return float(raw)
    if kind == "int":
        return int(raw)
    if kind == "flag":
        return raw.strip().lower() == "true"
    if kind == "maybe_float":
        return None if raw.strip() == "" else float(raw)
    if kind == "strlist":
        return [p for p in raw.split(";") if p]
    return raw


def add_table_arguments(parser: argparse.ArgumentParser, table: dict) -> None:
    for name, (kind, default, help_text) in table.items():
        flag = "--" + name.replace("_", "-")
        shown = f"{help_text} [default: {default}]" if default is not None else help_text
        if kind == "flag":
            parser.add_argument(flag, action="store_true", default=None, help=shown)
        elif kind == "strlist":
            parser.add_argument(flag, action="append", default=None, help=shown)
        elif kind == "int":
            parser.add_argument(flag, type=int, default=None, help=shown)
        elif kind == "float":
            parser.add_argument(flag, type=float, default=None, help=shown)
        else:  # str, maybe_float as raw string
            parser.add_argument(flag, type=str, default=None, help=shown)


def resolve_params(args, table: dict, config: dict, overrides: dict) -> dict:
    """Merge one parameter set: flag > config file > preset override >
    built-in default.  Raises ValueError for missing required values."""
    out = {}
    for name, (kind, default, _help) in table.items():
        value = getattr(args, name, None)
        if value is not None and kind == "maybe_float":
            value = _parse_config_value(kind, value)
        if value is None and name in config:
            value = _parse_config_value(kind, config[name])
        if value is None:
            value = overrides.get(name, default)
        if value is None and kind == "flag":
            value = False
        if value is None and kind not in ("maybe_float",):
            raise ValueError(f"--{name.replace('_', '-')} is required")
        out[name] = value
    if "seed" in table and getattr(args, "seed", None) is None and "seed" not in config:
        env = os.environ.get("SRLAB_SEED")
        if env is not None:
            out["seed"] = int(env)
    return out


def build_trigger(p: dict):
    law = p["law"]
    if law == "divider":
        return ideal_config(p["vdc"], p["ratio"], p["attenuation"])
    if law == "calibrated":
        return calibrated_config(p["vdc"], p["attenuation"])
    raise ValueError(f"unknown threshold law {law!r} (use divider or calibrated)")


def _signal(p: dict):
    if p["decay"] > 0.0:
        return DampedSine(p["amplitude"], p["decay"], p["frequency"])
    return Sine(p["amplitude"], p["frequency"])


def _noise(p: dict) -> NoiseSpec:
    rate = p["noise_rate"] if p["noise_rate"] is not None else p["sample_rate"]
    return NoiseSpec(sigma=p.get("sigma", 1.0), noise_rate=rate, seed=p["seed"])


def run_hysteresis(p: dict, out: Path, prefix: str) -> str:
    loop = hysteresis_sweep(build_trigger(p), p["v_min"], p["v_max"], p["points"])
    write_hysteresis_csv(out / f"{prefix}.csv", loop)
    return (
        f"output falls at {loop.measured_down_threshold} V, "
        f"rises at {loop.measured_up_threshold} V"
    )


def run_transitions(p: dict, out: Path, prefix: str) -> str:
    signal, combined, output = capture_transitions(
        build_trigger(p), _signal(p), _noise(p), p["sample_rate"], p["duration"]
    )
    write_waveforms_csv(out / f"{prefix}.csv", signal, combined, output)
    flips = int(np.count_nonzero(output.samples[1:] != output.samples[:-1]))
    return f"{flips} transitions in {p['duration']} s"


def run_snr_sweep(p: dict, out: Path, prefix: str) -> str:
    sweep = snr_sigma_sweep(
        build_trigger(p), _signal(p), _noise(p), parse_grid(p["sigma_grid"]),
        p["sample_rate"], p["duration"], p["repeats"],
    )
    write_sweep_csv(out / f"{prefix}.csv", sweep)
    if len(sweep) >= 3:
        s_star, snr_star = find_sr_peak(sweep)
        return f"peak SNR {snr_star:.2f} dB at sigma {s_star} V"
    return f"{len(sweep)}-point sweep"


def run_detect_freq(p: dict, out: Path, prefix: str) -> str:
    damped = _signal(p)
    if not isinstance(damped, DampedSine):
        raise ValueError("detect-freq needs --decay > 0 (a damped input)")
    report = detect_frequency(
        build_trigger(p), damped, _noise(p), p["sample_rate"], p["duration"],
        dc_guard_hz=p["dc_guard"],
    )
    write_freq_table_csv(out / f"{prefix}.csv", [report])
    if report.detected:
        return f"estimated {report.f_est} Hz (error {report.error_pct:.3f}%)"
    return "no spectral peak detected"


def run_freq_table(p: dict, out: Path, prefix: str) -> str:
    setup = DetectionSetup(
        amplitude=p["amplitude"], decay=p["decay"], sigma=p["sigma"],
        sample_rate=p["sample_rate"], duration=p["duration"], seed_base=p["seed"],
        dc_guard_hz=p["dc_guard"],
    )
    frequencies = [float(f) for f in p["frequencies"].split(",")]
    reports = error_rate_table(build_trigger(p), frequencies, setup, p["repeats"])
    write_freq_table_csv(out / f"{prefix}.csv", reports)
    parts = []
    for s in summarize_error_table(reports):
        err = "none" if s.mean_error_pct is None else f"{s.mean_error_pct:.2f}%"
        parts.append(f"{s.f_true:g}Hz:{err}({s.n_detected}/{s.n_runs})")
    return "mean error " + " ".join(parts)


def run_optimal_sigma(p: dict, out: Path, prefix: str) -> str:
    damped = _signal(p)
    if not isinstance(damped, DampedSine):
        raise ValueError("optimal-sigma needs --decay > 0 (a damped input)")
    rate = p["noise_rate"] if p["noise_rate"] is not None else p["sample_rate"]
    sigma_star, curve = optimal_sigma_search(
        build_trigger(p), damped, parse_grid(p["sigma_grid"]), p["repeats"],
        p["sample_rate"], p["duration"], p["seed"], noise_rate=rate,
    )
    write_sweep_csv(out / f"{prefix}.csv", curve)
    return f"best sigma {sigma_star} V"


def _t0_curve(p: dict):
    return t0_sigma_curve(
        build_trigger(p),
        DampedSine(p["amplitude"], p["decay"], p["frequency"]),
        parse_grid(p["sigma_grid"]),
        n_runs=p["runs"], seed_base=p["seed"],
        sample_rate=p["sample_rate"], duration=p["duration"],
        noise_rate=p["noise_rate"],
    )


def run_t0_curve(p: dict, out: Path, prefix: str) -> str:
    curve = _t0_curve(p)
    write_t0_curve_csv(out / f"{prefix}.csv", curve)
    return f"{len(curve)} noise levels, final mean t0 {curve[-1].mean_t0:.4f} s"


def run_fit_sigmoid(p: dict, out: Path, prefix: str) -> str:
    curve = read_t0_curve_csv(p["input"])
    fit = fit_sigmoid(curve, plateau_T=p["plateau"], float_plateau=p["float_plateau"])
    write_rows(
        out / f"{prefix}.csv",
        ("decay_b", "slope_a", "center_b", "r2"),
        [(p["decay"], fit.slope_a, fit.center_b, fit.r_squared)],
    )
    return (
        f"slope {fit.slope_a:.2f} 1/V, center {fit.center_b:.4f} V, "
        f"r2 {fit.r_squared:.4f}"
    )


def run_estimate_decay(p: dict, out: Path, prefix: str) -> str:
    curves = {}
    for entry in p["calibration"]:
        label, _, path = entry.partition("=")
        if not path:
            raise ValueError(f"calibration entry {entry!r} must be b=curve.csv")
        curves[float(label)] = read_t0_curve_csv(path)
    estimate = calibrate_and_estimate_decay(
        curves, read_t0_curve_csv(p["observed"]), plateau_T=p["plateau"]
    )
    write_rows(
        out / f"{prefix}.csv",
        ("decay_b", "slope_a", "center_b", "r2"),
        [
            (b, f.slope_a, f.center_b, f.r_squared)
            for b, f in sorted(estimate.calibration_fits.items())
        ]
        + [(estimate.decay, estimate.observed_fit.slope_a,
            estimate.observed_fit.center_b, estimate.observed_fit.r_squared)],
    )
    note = " (extrapolated)" if estimate.extrapolated else ""
    return f"estimated decay {estimate.decay:.3f} 1/s{note}"


def run_bank_cmd(p: dict, out: Path, prefix: str) -> str:
    min_rate = (
        p["min_rate"] if p["min_rate"] is not None
        else resonance_rate_for(p["frequency"])
    )
    if p["mode"] == "threshold":
        bank = threshold_sweep_bank(
            parse_grid(p["thresholds"]), p["sigma"], min_rate
        )
    elif p["mode"] == "sigma":
        bank = sigma_sweep_bank(
            parse_grid(p["sigma_grid"]), p["threshold"], min_rate
        )
    else:
        raise ValueError(f"unknown bank mode {p['mode']!r} (use threshold or sigma)")
    rate = p["noise_rate"] if p["noise_rate"] is not None else p["sample_rate"]
    report = vote_bank(
        bank, _signal(p), p["sample_rate"], p["duration"],
        seed_bases=range(p["seed"], p["seed"] + p["votes"]), noise_rate=rate,
    )
    write_bank_csv(out / f"{prefix}.csv", report)
    n_res = sum(report.resonance_flags())
    if p["mode"] == "threshold":
        bracket = amplitude_bracket(report)
        where = "outside the sweep" if bracket is None else f"in [{bracket[0]}, {bracket[1]}] V"
        return f"{n_res}/{len(report.results)} channels resonate; amplitude {where}"
    estimates = [r.f_est for r in report.results if r.resonating and r.f_est is not None]
    if estimates:
        counts: dict[float, int] = {}
        for f in estimates:
            counts[f] = counts.get(f, 0) + 1
        consensus = min(counts, key=lambda f: (-counts[f], f))
        return f"{n_res} channels resonate; consensus frequency {consensus} Hz"
    return "no resonating channel produced a frequency estimate"


def run_threshold_law(p: dict, out: Path, prefix: str) -> str:
    grid = parse_grid(p["vdc_grid"])
    write_rows(
        out / f"{prefix}.csv",
        ("v_dc_v", "v_th_v"),
        ((float(v), v_th_from_vdc(float(v))) for v in grid),
    )
    return f"threshold law over {grid.size} supply settings"


RUNNERS = {
    "hysteresis": run_hysteresis,
    "transitions": run_transitions,
    "snr-sweep": run_snr_sweep,
    "detect-freq": run_detect_freq,
    "freq-table": run_freq_table,
    "optimal-sigma": run_optimal_sigma,
    "t0-curve": run_t0_curve,
    "fit-sigmoid": run_fit_sigmoid,
    "estimate-decay": run_estimate_decay,
    "bank": run_bank_cmd,
}

_FIG8_TABLE = {
    "vdc_grid": ("str", "1:4:0.25", "supply voltage grid, V"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="srlab",
        description="Bistable-trigger noise experiments: simulate, sweep, fit.",
    )
    parser.add_argument("--version", action="version", version=srlab.__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, table in TABLES.items():
        p = sub.add_parser(name, help=f"run the {name} experiment")
        add_table_arguments(p, table)
        p.add_argument("--out-dir", default=".", help="artifact directory [default: .]")
        p.add_argument("--config", default=None, help="INI config/manifest to load")
    rep = sub.add_parser("reproduce", help="run a canned experiment preset")
    rep.add_argument("preset", choices=sorted(PRESETS))
    rep.add_argument("--seed", type=int, default=None, help="base noise seed")
    rep.add_argument("--out-dir", default=".", help="artifact directory [default: .]")
    rep.add_argument("--config", default=None, help="INI config/manifest to load")
    return parser


def _dispatch(args) -> str:
    config = read_manifest(args.config) if args.config else {}
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    if args.command == "reproduce":
        preset = args.preset
        stored = config.get("preset")
        if stored is not None and stored != preset:
            raise ValueError(
                f"config file is for preset {stored!r}, not {preset!r}"
            )
        if preset == "fig8":
            table, runner = _FIG8_TABLE, run_threshold_law
        else:
            cmd = PRESETS[preset][0]
            table, runner = TABLES[cmd], RUNNERS[cmd]
        params = resolve_params(args, table, config, PRESETS[preset][1])
        summary = runner(params, out, preset)
        if preset == "fig13":
            fit = fit_sigmoid(read_t0_curve_csv(out / "fig13.csv"),
                              plateau_T=params["duration"])
            write_rows(
                out / "fig13_fit.csv",
                ("decay_b", "slope_a", "center_b", "r2"),
                [(params["decay"], fit.slope_a, fit.center_b, fit.r_squared)],
            )
            summary += f"; sigmoid r2 {fit.r_squared:.4f}"
        manifest = {"subcommand": "reproduce", "preset": preset, **params,
                    "version": srlab.__version__}
        write_manifest(out / f"{preset}_manifest.ini", manifest)
        return summary

    stored = config.get("subcommand")
    if stored not in (None, args.command):
        raise ValueError(f"config file is for {stored!r}, not {args.command!r}")
    params = resolve_params(args, TABLES[args.command], config, {})
    summary = RUNNERS[args.command](params, out, args.command.replace("-", "_"))
    manifest = {"subcommand": args.command, **params, "version": srlab.__version__}
    write_manifest(out / f"{args.command.replace('-', '_')}_manifest.ini", manifest)
    return summary


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        summary = _dispatch(args)
    except ValueError as exc:
        print(f"srlab: config error: {exc}", file=sys.stderr)
        return 2
    except (FitError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"srlab: computation error: {exc}", file=sys.stderr)
        return 3
    print(f"srlab {args.command}: {summary}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
