"""Command-line front end.

Subcommands: ``rms``, ``fit-arma``, ``bursts``, ``monitor``, ``simulate``.

Settings resolve in the order built-in defaults < ``--config`` JSON file <
explicit flags. The config file is a flat JSON object whose keys are the long
flag names with dashes replaced by underscores (``"alarm_mean": 120``).

Exit codes: 0 success, 2 input or configuration error, 3 model failure,
4 insufficient data. Alarms never change the exit code.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import arma, pointproc, synth
from .formats import (InputFormatError, atomic_write_text, read_values, rows_csv, values_csv,
                      write_json)
from .numerics import derive_seed
from .signal import RawSignal, RmsSeries, dickey_fuller_test, rms_transform

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_MODEL = 3
EXIT_INSUFFICIENT = 4


class CliError(Exception):
    def __init__(self, message, code=EXIT_INPUT):
        super().__init__(message)
        self.code = code


@dataclass
class RunConfig:
    input: list = field(default_factory=list)
    format: str = "csv"
    rate: float = 2.5e6
    window: int = 100
    series_len: int | None = None
    thresholds: list = field(default_factory=lambda: list(pointproc.DEFAULT_THRESHOLDS))
    grid: list = field(default_factory=lambda: [arma.DEFAULT_MAX_P, arma.DEFAULT_MAX_Q])
    lb_lags: list = field(default_factory=lambda: list(arma.DEFAULT_LB_LAGS))
    ks: str = "asymptotic"
    n_boot: int = 200
    alarm_mean: float | None = None
    min_events: int = pointproc.DEFAULT_MIN_EVENTS
    pool_levels: bool = False
    out: str = "out"
    seed: int = 0
    jobs: int = 1
    # simulate
    name: str = "synthetic"
    n_series: int = synth.DEFAULT_N_SERIES
    table1: str | None = None
    table1_threshold: float = 40.0
    wait_family: str = "weibull"
    wait_params: dict = field(default_factory=lambda: {"shape": 0.754, "scale": 83.1})
    bursts: bool = True
    peak_min: float = synth.DEFAULT_PEAK_RANGE[0]
    peak_max: float = synth.DEFAULT_PEAK_RANGE[1]
    decay_tau: float = synth.DEFAULT_DECAY_TAU
    background_sigma2: float = synth.DEFAULT_BACKGROUND_SIGMA2
    raw: bool = False

    def validate(self, command):
        if command != "simulate" and not self.input:
            raise CliError("no input given (use --input)")
        if self.format not in ("csv", "raw16le"):
            raise CliError(f"unknown format {self.format!r}")
        if self.ks not in ("asymptotic", "bootstrap"):
            raise CliError(f"unknown KS mode {self.ks!r}")
        for name in ("rate", "window", "n_boot", "min_events", "jobs", "n_series"):
            if not getattr(self, name) > 0:
                raise CliError(f"{name} must be positive")
        if self.series_len is not None and self.series_len < 1:
            raise CliError("series_len must be positive")
        if not self.thresholds or any(not t > 0 for t in self.thresholds):
            raise CliError("thresholds must be a nonempty list of positive numbers")
        if len(self.grid) != 2 or any(g < 0 for g in self.grid):
            raise CliError("grid must be two nonnegative integers")


# -- argument parsing ---------------------------------------------------------


def _float_list(text):
    try:
        return [float(v) for v in str(text).replace(";", ",").split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of numbers: {text!r}") from None


def _int_list(text):
    return [int(v) for v in _float_list(text)]


def _grid(text):
    parts = _int_list(str(text).lower().replace("x", ","))
    if len(parts) == 1:
        parts = parts * 2
    return parts


def _kv(text):
    out = {}
    for item in str(text).split(","):
        if not item.strip():
            continue
        key, sep, val = item.partition("=")
        if not sep:
            raise argparse.ArgumentTypeError(f"expected key=value, got {item!r}")
        out[key.strip()] = float(val)
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="aewear", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    S = argparse.SUPPRESS
    common.add_argument("--config", default=None, help="flat JSON config file")
    common.add_argument("--input", action="append", default=S,
                        help="input file, optionally LABEL=PATH; repeatable")
    common.add_argument("--format", choices=["csv", "raw16le"], default=S)
    common.add_argument("--rate", type=float, default=S, help="sample rate in Hz")
    common.add_argument("--window", type=int, default=S, help="RMS window T in samples")
    common.add_argument("--series-len", type=int, default=S,
                        help="split each input into consecutive series of this length")
    common.add_argument("--out", default=S, help="output directory")
    common.add_argument("--seed", type=int, default=S)
    common.add_argument("--jobs", type=int, default=S)

    sub.add_parser("rms", parents=[common], help="RMS-reduce raw AE signals")

    p = sub.add_parser("fit-arma", parents=[common], help="BIC grid search and diagnostics")
    p.add_argument("--grid", type=_grid, default=S, help="max p,q (e.g. 5,5)")
    p.add_argument("--lb-lags", type=_int_list, default=S)

    p = sub.add_parser("bursts", parents=[common], help="threshold burst events and waits")
    p.add_argument("--thresholds", type=_float_list, default=S)

    p = sub.add_parser("monitor", parents=[common], help="waiting-time fits per wear level")
    p.add_argument("--thresholds", type=_float_list, default=S)
    p.add_argument("--ks", choices=["asymptotic", "bootstrap"], default=S)
    p.add_argument("--n-boot", type=int, default=S)
    p.add_argument("--alarm-mean", type=float, default=S)
    p.add_argument("--min-events", type=int, default=S)
    p.add_argument("--pool-levels", action="store_true", default=S,
                   help="pool acquisitions whose labels share the prefix before '/'")

    p = sub.add_parser("simulate", parents=[common], help="synthetic RMS records")
    p.add_argument("--name", default=S)
    p.add_argument("--n-series", type=int, default=S)
    p.add_argument("--table1", choices=["new", "worn"], default=S,
                   help="take Weibull waits from the published estimates for this level")
    p.add_argument("--table1-threshold", type=float, default=S)
    p.add_argument("--wait-family", choices=list(synth.WAIT_FAMILIES), default=S)
    p.add_argument("--wait-params", type=_kv, default=S, help="e.g. shape=0.754,scale=83.1")
    p.add_argument("--no-bursts", dest="bursts", action="store_false", default=S)
    p.add_argument("--peak-min", type=float, default=S)
    p.add_argument("--peak-max", type=float, default=S)
    p.add_argument("--decay-tau", type=float, default=S)
    p.add_argument("--background-sigma2", type=float, default=S)
    p.add_argument("--raw", action="store_true", default=S,
                   help="also write a raw amplitude-modulated signal per series")
    return parser


_LIST_KEYS = {"thresholds": _float_list, "lb_lags": _int_list, "grid": _grid}


def resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    known = {f.name for f in fields(RunConfig)}
    merged = {}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise CliError(f"{args.config}: cannot load config: {exc}") from exc
        if not isinstance(data, dict):
            raise CliError(f"{args.config}: config must be a JSON object")
        for key, val in data.items():
            key = key.replace("-", "_")
            if key not in known:
                raise CliError(f"{args.config}: unknown config key {key!r}")
            if key in _LIST_KEYS and not isinstance(val, list):
                val = _LIST_KEYS[key](val)
            if key == "input" and isinstance(val, str):
                val = [val]
            merged[key] = val
    for key, val in vars(args).items():
        if key in known:
            merged[key] = val
    for key, val in merged.items():
        setattr(cfg, key, val)
    if cfg.table1 is not None:
        try:
            shape, scale = synth.TABLE1[(cfg.table1, float(cfg.table1_threshold))]
        except KeyError:
            raise CliError(f"no published estimate for {cfg.table1!r} at threshold "
                           f"{cfg.table1_threshold}") from None
        cfg.wait_family = "weibull"
        cfg.wait_params = {"shape": shape, "scale": scale}
    return cfg


# -- shared helpers -----------------------------------------------------------


def _parse_input(spec: str) -> tuple[str, Path]:
    label, sep, path = spec.partition("=")
    if sep and label and not Path(spec).exists():
        return label, Path(path)
    p = Path(spec)
    return p.stem, p


def _load_series(cfg: RunConfig, label_inputs=False):
    """Read every input; returns ``[(label, [RmsSeries...]), ...]`` keeping input order."""
    dt = cfg.window / cfg.rate
    groups: dict[str, list] = {}
    for spec in cfg.input:
        label, path = _parse_input(spec)
        values = read_values(path, cfg.format)
        chunks = _split(values, cfg.series_len)
        stem = path.stem
        for k, chunk in enumerate(chunks):
            sid = stem if len(chunks) == 1 else f"{stem}#{k:03d}"
            try:
                s = RmsSeries(chunk, cfg.window, dt, series_id=sid)
            except ValueError as exc:
                raise InputFormatError(f"{path}: {exc}") from exc
            groups.setdefault(label if label_inputs else stem, []).append(s)
    return list(groups.items())


def _split(values, series_len):
    if series_len is None:
        return [values]
    n = values.size // series_len
    if n == 0:
        raise InputFormatError(f"input shorter than series_len={series_len}")
    return [values[i * series_len:(i + 1) * series_len] for i in range(n)]


def _threshold_tag(th: float) -> str:
    return f"{th:g}".replace(".", "p")


# -- commands -----------------------------------------------------------------


def cmd_rms(cfg: RunConfig) -> int:
    out = Path(cfg.out)
    for spec in cfg.input:
        _, path = _parse_input(spec)
        raw = read_values(path, cfg.format)
        try:
            rms = rms_transform(RawSignal(raw, cfg.rate), cfg.window)
        except ValueError as exc:
            raise CliError(f"{path}: {exc}") from exc
        atomic_write_text(out / f"{path.stem}.rms.csv", values_csv(rms.values))
    return EXIT_OK


def _acf_safe(y, lags):
    lags = min(lags, y.size - 2)
    return arma.acf(y, lags).tolist(), arma.pacf(y, lags).tolist()


def analyse_series(sid: str, values: np.ndarray, max_p: int, max_q: int, lb_lags) -> dict:
    y = np.asarray(values, dtype=float)
    if np.ptp(y) == 0:
        raise CliError(f"{sid}: degenerate series (constant)", EXIT_MODEL)
    entry = {"series": sid, "n_obs": int(y.size)}
    warnings = []
    if y.size >= 25:
        df = dickey_fuller_test(y)
        entry["dickey_fuller"] = {"statistic": df.statistic, "critical_value_5pct": df.critical_value,
                                  "reject_unit_root": df.reject_unit_root}
        if not df.reject_unit_root:
            warnings.append("Dickey-Fuller test does not reject a unit root at 5%")
    try:
        grid = arma.bic_grid_search(y, max_p, max_q)
    except arma.ArmaConvergenceError as exc:
        raise CliError(f"{sid}: {exc}", EXIT_MODEL) from exc
    best = grid.best_fit
    entry["bic_grid"] = {
        "max_p": max_p, "max_q": max_q, "best": list(grid.best),
        "values": grid.bic_values.tolist(),
        "failed": [[p, q] for (p, q) in sorted(grid.errors)],
    }
    entry["best_model"] = best.to_dict()
    entry["diagnostics"] = arma.whiteness_report(best, lb_lags)
    acf_y, pacf_y = _acf_safe(y, 20)
    acf_e, pacf_e = _acf_safe(best.residuals, 20)
    entry["acf"] = acf_y
    entry["pacf"] = pacf_y
    entry["residual_acf"] = acf_e
    entry["residual_pacf"] = pacf_e
    entry["warnings"] = warnings
    entry["_bic_csv"] = grid.to_csv()
    return entry


def _analyse_job(job):
    return analyse_series(*job)


def cmd_fit_arma(cfg: RunConfig) -> int:
    out = Path(cfg.out)
    jobs = []
    for _, series in _load_series(cfg):
        for s in series:
            jobs.append((s.series_id, s.values, cfg.grid[0], cfg.grid[1], cfg.lb_lags))
    if cfg.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            entries = list(pool.map(_analyse_job, jobs))
    else:
        entries = [_analyse_job(j) for j in jobs]
    for e in entries:
        atomic_write_text(out / f"bic_{e['series']}.csv", e.pop("_bic_csv"))
        for w in e["warnings"]:
            print(f"warning: {e['series']}: {w}", file=sys.stderr)
    sig = [e["best_model"]["sigma2"] for e in entries]
    report = {
        "command": "fit-arma",
        "settings": {"grid": list(cfg.grid), "lb_lags": list(cfg.lb_lags)},
        "series": entries,
        "mean_residual_variance": float(np.mean(sig)),
    }
    write_json(out / "arma_report.json", report)
    return EXIT_OK


def cmd_bursts(cfg: RunConfig) -> int:
    out = Path(cfg.out)
    groups = _load_series(cfg)
    summary = {"command": "bursts", "thresholds": []}
    for th in cfg.thresholds:
        event_rows, wait_rows = [], []
        n_events = n_waits = discarded = 0
        for _, series in groups:
            records = [pointproc.detect_bursts(s, th) for s in series]
            w = pointproc.waiting_times(records)
            for s, rec in zip(series, records):
                for idx, peak in zip(rec.event_indices, rec.peak_amplitudes):
                    event_rows.append((s.series_id, int(idx), idx * s.dt_seconds, peak))
            wait_rows.extend((float(v),) for v in w.waits)
            n_events += sum(len(r) for r in records)
            n_waits += len(w)
            discarded += w.n_discarded_boundary
        tag = _threshold_tag(th)
        atomic_write_text(out / f"events_{tag}.csv",
                          rows_csv(["series", "index", "time_s", "peak"], event_rows))
        atomic_write_text(out / f"waits_{tag}.csv", rows_csv(["wait"], wait_rows))
        summary["thresholds"].append({"threshold": th, "n_events": n_events, "n_waits": n_waits,
                                      "n_discarded_boundary": discarded})
    write_json(out / "bursts_summary.json", summary)
    return EXIT_OK


def cmd_monitor(cfg: RunConfig) -> int:
    out = Path(cfg.out)
    acqs = [pointproc.Acquisition(label, series, level=label.split("/")[0])
            for label, series in _load_series(cfg, label_inputs=True)]
    try:
        report = pointproc.wear_monitor(
            acqs, cfg.thresholds, min_events=cfg.min_events, alarm_mean=cfg.alarm_mean,
            pool_by_level=cfg.pool_levels, ks_mode=cfg.ks, n_boot=cfg.n_boot, seed=cfg.seed)
    except pointproc.InsufficientDataError as exc:
        raise CliError(str(exc), EXIT_INSUFFICIENT) from exc
    doc = {"command": "monitor", "settings": {
        "thresholds": list(cfg.thresholds), "min_events": cfg.min_events, "ks": cfg.ks,
        "pool_levels": bool(cfg.pool_levels), "seed": cfg.seed}}
    doc.update(report.to_dict())
    write_json(out / "wear_report.json", doc)
    cols = ["threshold", "label", "n_waits", "sufficient", "shape", "scale", "mean_wait",
            "weibull_mean", "p_value"]
    atomic_write_text(out / "wear_table.csv",
                      rows_csv(cols, [[r[c] for c in cols] for r in report.table_rows()]))
    hist = []
    for (label, th), cell in report.cells.items():
        if not cell.sufficient:
            continue
        for fam, fit in cell.fits.items():
            if not isinstance(fit, pointproc.DistFit):
                continue
            for row in pointproc.histogram_rows(cell.waits.waits, fit):
                hist.append((label, th, fam, *row))
    atomic_write_text(out / "wear_hist.csv", rows_csv(
        ["label", "threshold", "family", "bin_left", "bin_right", "count", "density",
         "fitted_density"], hist))
    return EXIT_OK


def cmd_simulate(cfg: RunConfig) -> int:
    out = Path(cfg.out)
    try:
        sc = synth.SynthConfig(
            background=synth.published_background(cfg.background_sigma2),
            wait_family=cfg.wait_family, wait_params=dict(cfg.wait_params),
            peak_min=cfg.peak_min, peak_max=cfg.peak_max, decay_tau=cfg.decay_tau,
            n_series=cfg.n_series, series_len=cfg.series_len or synth.DEFAULT_SERIES_LEN,
            seed=cfg.seed, bursts=cfg.bursts, window_T=cfg.window, sample_rate_hz=cfg.rate)
        result = synth.generate_rms(sc)
    except ValueError as exc:
        raise CliError(f"invalid simulation config: {exc}") from exc
    atomic_write_text(out / f"{cfg.name}.csv", values_csv(result.values))
    write_json(out / f"{cfg.name}.truth.json", result.truth.to_dict(sc))
    if cfg.raw:
        for i, s in enumerate(result.series):
            raw = synth.generate_raw(s, derive_seed(cfg.seed, 4, i), cfg.rate)
            atomic_write_text(out / f"{cfg.name}.raw{i:03d}.csv", values_csv(raw.samples))
    return EXIT_OK


COMMANDS = {
    "rms": cmd_rms,
    "fit-arma": cmd_fit_arma,
    "bursts": cmd_bursts,
    "monitor": cmd_monitor,
    "simulate": cmd_simulate,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        cfg = resolve_config(args)
        cfg.validate(args.command)
        return COMMANDS[args.command](cfg)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except InputFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
