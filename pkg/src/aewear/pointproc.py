"""Burst events, renewal waiting times and their distributional analysis.

Waiting times are measured in RMS-sample units (one unit is ``window_T / f0``
seconds, 40 us at the defaults).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import arma
from .numerics import derive_seed, kolmogorov_sf, ln_gamma, rng
from .signal import RmsSeries

FAMILIES = ("weibull", "exponential", "pareto")
DEFAULT_THRESHOLDS = (40.0, 50.0, 60.0, 70.0)
DEFAULT_MIN_EVENTS = 30
WEIBULL_SHAPE_BRACKET = (0.05, 20.0)
WEIBULL_TOL = 1e-10


class DegenerateSampleError(ValueError):
    pass


class InsufficientDataError(ValueError):
    pass


@dataclass
class BurstRecord:
    threshold: float
    event_indices: np.ndarray
    peak_amplitudes: np.ndarray
    source_series_id: list = field(default_factory=list)
    run_lengths: np.ndarray | None = None

    def __post_init__(self):
        self.event_indices = np.asarray(self.event_indices, dtype=np.int64)
        self.peak_amplitudes = np.asarray(self.peak_amplitudes, dtype=float)
        if not self.source_series_id:
            self.source_series_id = [""] * self.event_indices.size
        if not (self.event_indices.size == self.peak_amplitudes.size
                == len(self.source_series_id)):
            raise ValueError("burst record fields have unequal lengths")
        if np.any(np.diff(self.event_indices) <= 0):
            raise ValueError("event indices must be strictly increasing")

    def __len__(self):
        return self.event_indices.size


@dataclass
class WaitingTimes:
    waits: np.ndarray
    n_discarded_boundary: int = 0

    def __post_init__(self):
        self.waits = np.asarray(self.waits, dtype=float)
        if np.any(self.waits <= 0):
            raise ValueError("waiting times must be positive")

    def __len__(self):
        return self.waits.size


@dataclass
class KsResult:
    D: float
    p_value: float
    method: str = "asymptotic"


@dataclass
class DistFit:
    family: str
    params: dict
    sample_mean: float
    ks_statistic: float
    p_value: float
    n: int
    ks_method: str = "asymptotic"
    profile_residual: float | None = None

    def cdf(self, x):
        return family_cdf(self.family, self.params)(x)

    def pdf(self, x):
        return family_pdf(self.family, self.params)(x)

    @property
    def model_mean(self) -> float:
        if self.family == "weibull":
            return weibull_mean(self.params["shape"], self.params["scale"])
        if self.family == "exponential":
            return 1.0 / self.params["rate"]
        a, xm = self.params["exponent"], self.params["minimum"]
        return a * xm / (a - 1.0) if a > 1 else math.inf

    def to_dict(self) -> dict:
        out = {
            "family": self.family,
            "params": {k: float(v) for k, v in self.params.items()},
            "sample_mean": float(self.sample_mean),
            "model_mean": _finite_or_none(self.model_mean),
            "ks_statistic": float(self.ks_statistic),
            "p_value": float(self.p_value),
            "ks_method": self.ks_method,
            "n": int(self.n),
        }
        return out


def _finite_or_none(v):
    return float(v) if math.isfinite(v) else None


# -- events -------------------------------------------------------------------


def detect_bursts(rms: RmsSeries | Sequence[float], threshold: float,
                  series_id: str | None = None) -> BurstRecord:
    """Maximal runs of consecutive values ``>= threshold``; one event per run.

    The event index is the first index of its run and the peak is the run maximum.
    """
    if not threshold > 0:
        raise ValueError("threshold must be positive")
    if isinstance(rms, RmsSeries):
        y = rms.values
        sid = rms.series_id if series_id is None else series_id
    else:
        y = np.asarray(rms, dtype=float)
        sid = series_id or ""
    above = y >= threshold
    if not above.any():
        return BurstRecord(threshold, [], [], [], np.zeros(0, dtype=np.int64))
    edges = np.diff(np.concatenate([[0], above.astype(np.int8), [0]]))
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1)
    peaks = np.array([y[s:e].max() for s, e in zip(starts, ends)])
    return BurstRecord(threshold, starts, peaks, [sid] * starts.size, ends - starts)


def waiting_times(records: Sequence[BurstRecord]) -> WaitingTimes:
    """Successive index differences within each series, pooled in series order.

    Gaps spanning the boundary between consecutive series are dropped and counted.
    """
    if not records:
        return WaitingTimes(np.zeros(0))
    thresholds = {r.threshold for r in records}
    if len(thresholds) > 1:
        raise ValueError("records must share one threshold")
    waits = []
    discarded = 0
    seen_events = False
    for rec in records:
        if len(rec) == 0:
            continue
        if seen_events:
            discarded += 1
        seen_events = True
        waits.append(np.diff(rec.event_indices).astype(float))
    pooled = np.concatenate(waits) if waits else np.zeros(0)
    return WaitingTimes(pooled, discarded)


@dataclass
class RenewalDiagnostics:
    acf: np.ndarray
    pacf: np.ndarray
    band: float
    acf_within_band: np.ndarray
    pacf_within_band: np.ndarray
    cumulative_periodogram: arma.CumulativePeriodogramResult

    @property
    def uncorrelated(self) -> bool:
        return bool(self.acf_within_band.all() and self.pacf_within_band.all()
                    and self.cumulative_periodogram.within_band)


def renewal_diagnostics(waits: WaitingTimes | Sequence[float], max_lag: int = 10,
                        level: float = 0.05) -> RenewalDiagnostics:
    w = waits.waits if isinstance(waits, WaitingTimes) else np.asarray(waits, dtype=float)
    n = w.size
    if n < max_lag + 5:
        raise InsufficientDataError(f"need at least {max_lag + 5} waits, got {n}")
    r = arma.acf(w, max_lag)[1:]
    pr = arma.pacf(w, max_lag)
    band = 1.96 / math.sqrt(n)
    cp = arma.cumulative_periodogram_test(w, level) if n >= 16 else None
    return RenewalDiagnostics(r, pr, band, np.abs(r) <= band, np.abs(pr) <= band, cp)


# -- distributions ------------------------------------------------------------


def weibull_pdf(x, shape: float, scale: float):
    """Weibull density; at ``x == 0`` with ``shape < 1`` the integrable pole is returned as ``inf``."""
    if not (shape > 0 and scale > 0):
        raise ValueError("shape and scale must be positive")
    x = np.asarray(x, dtype=float)
    z = x / scale
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (shape / scale) * z ** (shape - 1.0) * np.exp(-z ** shape)
    out = np.where(x < 0, 0.0, out)
    if shape == 1.0:
        out = np.where(x == 0, 1.0 / scale, out)
    elif shape < 1.0:
        out = np.where(x == 0, np.inf, out)
    else:
        out = np.where(x == 0, 0.0, out)
    return out[()] if out.ndim == 0 else out


def weibull_cdf(x, shape, scale):
    x = np.asarray(x, dtype=float)
    return -np.expm1(-(np.clip(x, 0, None) / scale) ** shape)


def weibull_mean(shape: float, scale: float) -> float:
    if not (shape > 0 and scale > 0):
        raise ValueError("shape and scale must be positive")
    return scale * math.exp(ln_gamma(1.0 + 1.0 / shape))


def family_cdf(family: str, params: dict) -> Callable:
    if family == "weibull":
        return lambda x: weibull_cdf(x, params["shape"], params["scale"])
    if family == "exponential":
        lam = params["rate"]
        return lambda x: -np.expm1(-lam * np.clip(np.asarray(x, dtype=float), 0, None))
    if family == "pareto":
        a, xm = params["exponent"], params["minimum"]
        return lambda x: np.where(np.asarray(x) < xm, 0.0,
                                  1.0 - (xm / np.maximum(np.asarray(x, dtype=float), xm)) ** a)
    raise ValueError(f"unknown family {family!r}")


def family_pdf(family: str, params: dict) -> Callable:
    if family == "weibull":
        return lambda x: weibull_pdf(x, params["shape"], params["scale"])
    if family == "exponential":
        lam = params["rate"]
        return lambda x: np.where(np.asarray(x) < 0, 0.0, lam * np.exp(-lam * np.asarray(x, dtype=float)))
    if family == "pareto":
        a, xm = params["exponent"], params["minimum"]

        def pdf(x):
            x = np.asarray(x, dtype=float)
            with np.errstate(divide="ignore"):
                return np.where(x < xm, 0.0, a * xm ** a / np.maximum(x, xm) ** (a + 1))
        return pdf
    raise ValueError(f"unknown family {family!r}")


def ks_test(sample: Sequence[float], fitted_cdf: Callable) -> KsResult:
    """One-sample Kolmogorov-Smirnov test with the asymptotic Kolmogorov p-value."""
    x = np.sort(np.asarray(sample, dtype=float))
    n = x.size
    if n == 0:
        raise ValueError("empty sample")
    F = np.asarray(fitted_cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    D = float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))
    return KsResult(D, kolmogorov_sf(math.sqrt(n) * D))


def _as_waits(waits) -> np.ndarray:
    w = waits.waits if isinstance(waits, WaitingTimes) else np.asarray(waits, dtype=float)
    if w.size < 2:
        raise InsufficientDataError("need at least 2 waiting times")
    if np.any(w <= 0) or not np.all(np.isfinite(w)):
        raise ValueError("waiting times must be positive and finite")
    return w


def fit_exponential(waits) -> DistFit:
    w = _as_waits(waits)
    mean = float(w.mean())
    params = {"rate": 1.0 / mean}
    ks = ks_test(w, family_cdf("exponential", params))
    return DistFit("exponential", params, mean, ks.D, ks.p_value, w.size)


def fit_pareto(waits) -> DistFit:
    w = _as_waits(waits)
    xm = float(w.min())
    logs = np.log(w / xm).sum()
    if logs <= 0:
        raise DegenerateSampleError("degenerate sample: all waits equal")
    params = {"exponent": w.size / logs, "minimum": xm}
    ks = ks_test(w, family_cdf("pareto", params))
    return DistFit("pareto", params, float(w.mean()), ks.D, ks.p_value, w.size)


def weibull_profile(shape: float, log_x: np.ndarray) -> tuple[float, float]:
    """Profile score ``g(shape)`` and its derivative for log-data ``log_x``.

    ``g(a) = sum x^a ln x / sum x^a - 1/a - mean(ln x)``; the data are rescaled by
    their largest value first, which leaves ``g`` unchanged and avoids overflow.
    """
    lx = log_x - log_x.max()
    xa = np.exp(shape * lx)
    s0 = xa.sum()
    s1 = (xa * lx).sum()
    s2 = (xa * lx * lx).sum()
    g = s1 / s0 - 1.0 / shape - lx.mean()
    dg = s2 / s0 - (s1 / s0) ** 2 + 1.0 / shape ** 2
    return g, dg


def weibull_shape_mle(w: np.ndarray, tol: float = WEIBULL_TOL) -> float:
    """Root of the Weibull profile score by Newton steps safeguarded with bisection."""
    lx = np.log(w)
    if np.ptp(lx) == 0:
        raise DegenerateSampleError("degenerate sample: all waits equal")
    lo, hi = WEIBULL_SHAPE_BRACKET
    g_lo, _ = weibull_profile(lo, lx)
    g_hi, _ = weibull_profile(hi, lx)
    if g_lo > 0 or g_hi < 0:
        raise ValueError(f"no Weibull shape root in [{lo}, {hi}]")
    a = 1.0 if lo < 1.0 < hi else 0.5 * (lo + hi)
    for _ in range(200):
        g, dg = weibull_profile(a, lx)
        if abs(g) < tol:
            return a
        # g is increasing in a
        if g > 0:
            hi = a
        else:
            lo = a
        step = a - g / dg
        a = step if lo < step < hi else 0.5 * (lo + hi)
    raise ArithmeticError("Weibull profile equation did not converge")


def weibull_scale_given_shape(waits, shape: float) -> float:
    """Scale MLE ``(mean(x^shape))^(1/shape)`` for a fixed shape."""
    lx = np.log(np.asarray(waits, dtype=float))
    top = lx.max()
    return math.exp(top + math.log(np.mean(np.exp(shape * (lx - top)))) / shape)


def fit_weibull(waits) -> DistFit:
    w = _as_waits(waits)
    shape = weibull_shape_mle(w)
    lx = np.log(w)
    scale = weibull_scale_given_shape(w, shape)
    params = {"shape": shape, "scale": scale}
    ks = ks_test(w, family_cdf("weibull", params))
    g, _ = weibull_profile(shape, lx)
    return DistFit("weibull", params, float(w.mean()), ks.D, ks.p_value, w.size,
                   profile_residual=float(g))


_FITTERS = {"weibull": fit_weibull, "exponential": fit_exponential, "pareto": fit_pareto}


def _sample_family(family: str, params: dict, n: int, gen: np.random.Generator) -> np.ndarray:
    if family == "weibull":
        return params["scale"] * gen.weibull(params["shape"], n)
    if family == "exponential":
        return gen.exponential(1.0 / params["rate"], n)
    return params["minimum"] * (1.0 + gen.pareto(params["exponent"], n))


def bootstrap_p_value(fit: DistFit, n_boot: int = 200, seed: int = 0) -> float:
    """Parametric bootstrap p-value for the KS statistic with re-estimated parameters."""
    gen = rng(seed)
    fitter = _FITTERS[fit.family]
    exceed = 0
    done = 0
    for _ in range(n_boot):
        sample = _sample_family(fit.family, fit.params, fit.n, gen)
        try:
            d = fitter(sample).ks_statistic
        except ValueError:
            continue
        done += 1
        exceed += d >= fit.ks_statistic
    return (exceed + 1) / (done + 1)


def fit_all(waits, ks_mode: str = "asymptotic", n_boot: int = 200, seed: int = 0) -> dict:
    out = {}
    for i, family in enumerate(FAMILIES):
        try:
            fit = _FITTERS[family](waits)
        except ValueError as exc:
            out[family] = {"error": str(exc)}
            continue
        if ks_mode == "bootstrap":
            fit.p_value = bootstrap_p_value(fit, n_boot, derive_seed(seed, i))
            fit.ks_method = "bootstrap"
        out[family] = fit
    return out


def histogram_rows(waits: np.ndarray, fit: DistFit | None, bins: int = 20) -> list[tuple]:
    """``(bin_left, bin_right, count, density, fitted_density)`` rows for plotting."""
    counts, edges = np.histogram(waits, bins=bins)
    width = np.diff(edges)
    density = counts / (counts.sum() * width)
    mids = 0.5 * (edges[:-1] + edges[1:])
    fitted = fit.pdf(mids) if fit is not None else np.full(mids.size, np.nan)
    return list(zip(edges[:-1], edges[1:], counts, density, fitted))


# -- wear monitoring ----------------------------------------------------------


@dataclass
class Acquisition:
    label: str
    series: list  # of RmsSeries
    level: str | None = None


@dataclass
class MonitorCell:
    label: str
    threshold: float
    n_events: int
    waits: WaitingTimes
    records: list
    fits: dict
    sufficient: bool
    alarm: bool = False

    @property
    def mean_wait(self) -> float | None:
        return float(self.waits.waits.mean()) if len(self.waits) else None

    @property
    def std_error(self) -> float | None:
        n = len(self.waits)
        if n < 2:
            return None
        return float(self.waits.waits.std(ddof=1) / math.sqrt(n))

    def to_dict(self) -> dict:
        fits = {}
        for fam, f in self.fits.items():
            fits[fam] = f.to_dict() if isinstance(f, DistFit) else f
        return {
            "label": self.label,
            "threshold": float(self.threshold),
            "n_events": int(self.n_events),
            "n_waits": len(self.waits),
            "n_discarded_boundary": int(self.waits.n_discarded_boundary),
            "sufficient": bool(self.sufficient),
            "mean_wait": self.mean_wait,
            "mean_wait_se": self.std_error,
            "alarm": bool(self.alarm),
            "fits": fits,
        }


@dataclass
class WearReport:
    labels: list
    thresholds: list
    cells: dict  # (label, threshold) -> MonitorCell
    alarm_mean: float | None = None

    def cell(self, label, threshold) -> MonitorCell:
        return self.cells[(label, float(threshold))]

    def ordering(self) -> dict:
        """Per threshold: labels sorted by mean wait, and whether input order is increasing."""
        out = {}
        for th in self.thresholds:
            vals = [(lab, self.cells[(lab, th)].mean_wait) for lab in self.labels
                    if self.cells[(lab, th)].sufficient]
            ranked = [lab for lab, _ in sorted(vals, key=lambda kv: kv[1])]
            means = [m for _, m in vals]
            out[th] = {
                "ranked_by_mean": ranked,
                "increasing_in_input_order": bool(len(means) == len(self.labels) and all(
                    a < b for a, b in zip(means, means[1:]))),
            }
        return out

    @property
    def any_alarm(self) -> bool:
        return any(c.alarm for c in self.cells.values())

    def to_dict(self) -> dict:
        out = {
            "labels": list(self.labels),
            "thresholds": [float(t) for t in self.thresholds],
            "alarm_mean": self.alarm_mean,
            "any_alarm": self.any_alarm,
            "cells": [self.cells[(lab, th)].to_dict()
                      for lab in self.labels for th in self.thresholds],
        }
        if len(self.labels) > 1:
            out["comparison"] = [
                {"threshold": float(th), **v} for th, v in self.ordering().items()]
        return out

    def table_rows(self) -> list[dict]:
        """One row per (threshold, label) with the Weibull estimates, mean and KS p-value."""
        rows = []
        for th in sorted(self.thresholds, reverse=True):
            for lab in self.labels:
                c = self.cells[(lab, th)]
                wf = c.fits.get("weibull")
                ok = isinstance(wf, DistFit)
                rows.append({
                    "threshold": th,
                    "label": lab,
                    "n_waits": len(c.waits),
                    "sufficient": c.sufficient,
                    "shape": wf.params["shape"] if ok else None,
                    "scale": wf.params["scale"] if ok else None,
                    "mean_wait": c.mean_wait,
                    "weibull_mean": wf.model_mean if ok else None,
                    "p_value": wf.p_value if ok else None,
                })
        return rows


def _group(acquisitions: Sequence[Acquisition], pool_by_level: bool) -> list[tuple[str, list]]:
    groups: dict[str, list] = {}
    for acq in acquisitions:
        key = (acq.level or acq.label) if pool_by_level else acq.label
        groups.setdefault(key, []).extend(acq.series)
    return list(groups.items())


def wear_monitor(
    acquisitions: Sequence[Acquisition],
    thresholds: Sequence[float] = DEFAULT_THRESHOLDS,
    min_events: int = DEFAULT_MIN_EVENTS,
    alarm_mean: float | None = None,
    pool_by_level: bool = False,
    ks_mode: str = "asymptotic",
    n_boot: int = 200,
    seed: int = 0,
) -> WearReport:
    """Fit waiting-time distributions per (acquisition, threshold) and flag large means.

    A cell with fewer than ``min_events`` waits is kept in the report but marked
    insufficient. Raises :class:`InsufficientDataError` if every cell is.
    """
    if not acquisitions:
        raise ValueError("no acquisitions given")
    thresholds = [float(t) for t in thresholds]
    groups = _group(acquisitions, pool_by_level)
    cells = {}
    for gi, (label, series) in enumerate(groups):
        for ti, th in enumerate(thresholds):
            records = [detect_bursts(s, th) for s in series]
            w = waiting_times(records)
            n_events = sum(len(r) for r in records)
            sufficient = len(w) >= min_events
            fits = {}
            if sufficient:
                fits = fit_all(w, ks_mode, n_boot, derive_seed(seed, gi, ti))
            cell = MonitorCell(label, th, n_events, w, records, fits, sufficient)
            if sufficient and alarm_mean is not None:
                cell.alarm = cell.mean_wait > alarm_mean
            cells[(label, th)] = cell
    if not any(c.sufficient for c in cells.values()):
        raise InsufficientDataError("no threshold yields sufficient waiting times")
    return WearReport([g[0] for g in groups], thresholds, cells, alarm_mean)
