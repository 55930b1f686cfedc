"""Synthetic RMS-scale AE records: AR(1) background plus renewal bursts.

Bursts are added in RMS space. The burst amplitude range, the decay constant
and the background innovation variance are synthetic choices; the AR
coefficients and the waiting-time parameters come from the published
estimates (``TABLE1`` and ``PUBLISHED_AR1``).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .arma import ArmaSpec, simulate_arma
from .numerics import derive_seed, rng
from .signal import DEFAULT_SAMPLE_RATE_HZ, DEFAULT_WINDOW_T, RawSignal, RmsSeries

# AR(1) fitted to a worn-tool RMS series: X_t = 7.5499 + 0.7632 X_{t-1} + e_t
PUBLISHED_AR1 = {"intercept": 7.5499, "ar1": 0.7632}
# Weibull (shape, scale) of burst waiting times by (wear level, threshold)
TABLE1 = {
    ("new", 70.0): (0.845, 98.53),
    ("new", 60.0): (0.875, 119.68),
    ("new", 50.0): (0.822, 109.99),
    ("new", 40.0): (0.754, 83.1),
    ("worn", 70.0): (0.764, 138.98),
    ("worn", 60.0): (0.786, 138.99),
    ("worn", 50.0): (0.942, 148.79),
    ("worn", 40.0): (0.907, 138.90),
}
# reported sample means of the waits, same keys
TABLE1_MEANS = {
    ("new", 70.0): 90.92, ("new", 60.0): 111.95, ("new", 50.0): 100.53, ("new", 40.0): 74.27,
    ("worn", 70.0): 124.56, ("worn", 60.0): 125.38, ("worn", 50.0): 144.06, ("worn", 40.0): 132.02,
}

DEFAULT_BACKGROUND_SIGMA2 = 1.0
DEFAULT_PEAK_RANGE = (40.0, 200.0)
DEFAULT_DECAY_TAU = 2.0
DEFAULT_N_SERIES = 15
DEFAULT_SERIES_LEN = 409
WAIT_FAMILIES = ("weibull", "exponential", "pareto")


def published_background(sigma2: float = DEFAULT_BACKGROUND_SIGMA2) -> ArmaSpec:
    return ArmaSpec((PUBLISHED_AR1["ar1"],), (), PUBLISHED_AR1["intercept"], sigma2)


@dataclass
class SynthConfig:
    background: ArmaSpec = field(default_factory=published_background)
    wait_family: str = "weibull"
    wait_params: dict = field(default_factory=lambda: {"shape": 0.754, "scale": 83.1})
    peak_min: float = DEFAULT_PEAK_RANGE[0]
    peak_max: float = DEFAULT_PEAK_RANGE[1]
    decay_tau: float = DEFAULT_DECAY_TAU
    n_series: int = DEFAULT_N_SERIES
    series_len: int = DEFAULT_SERIES_LEN
    seed: int = 0
    bursts: bool = True
    window_T: int = DEFAULT_WINDOW_T
    sample_rate_hz: float = DEFAULT_SAMPLE_RATE_HZ

    def validate(self):
        if self.wait_family not in WAIT_FAMILIES:
            raise ValueError(f"unknown waiting-time family {self.wait_family!r}")
        needed = {"weibull": ("shape", "scale"), "exponential": ("rate",),
                  "pareto": ("exponent", "minimum")}[self.wait_family]
        for key in needed:
            if not self.wait_params.get(key, 0) > 0:
                raise ValueError(f"wait parameter {key!r} must be positive")
        if not 0 < self.peak_min <= self.peak_max:
            raise ValueError("need 0 < peak_min <= peak_max")
        if not self.decay_tau > 0:
            raise ValueError("decay_tau must be positive")
        if self.n_series < 1 or self.series_len < 1 or self.window_T < 1:
            raise ValueError("n_series, series_len and window_T must be positive")
        if not self.sample_rate_hz > 0:
            raise ValueError("sample_rate_hz must be positive")

    @classmethod
    def from_table1(cls, level: str, threshold: float = 40.0, **kw) -> "SynthConfig":
        shape, scale = TABLE1[(level, float(threshold))]
        return cls(wait_family="weibull", wait_params={"shape": shape, "scale": scale}, **kw)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["background"] = {
            "ar_coeffs": list(self.background.ar_coeffs),
            "ma_coeffs": list(self.background.ma_coeffs),
            "intercept": self.background.intercept,
            "sigma2": self.background.sigma2,
        }
        return d

    @property
    def generator_mean_wait(self) -> float:
        p = self.wait_params
        if self.wait_family == "weibull":
            return p["scale"] * math.gamma(1.0 + 1.0 / p["shape"])
        if self.wait_family == "exponential":
            return 1.0 / p["rate"]
        a = p["exponent"]
        return a * p["minimum"] / (a - 1.0) if a > 1 else math.inf


@dataclass
class GroundTruth:
    event_times: np.ndarray  # continuous, in RMS samples from the start of series 0
    event_indices: np.ndarray  # floor of event_times, global index
    peaks: np.ndarray
    series_len: int

    @property
    def series_of_event(self) -> np.ndarray:
        return self.event_indices // self.series_len

    @property
    def local_indices(self) -> np.ndarray:
        return self.event_indices % self.series_len

    def waits(self) -> np.ndarray:
        return np.diff(self.event_indices)

    def to_dict(self, config: SynthConfig | None = None) -> dict:
        out = {
            "series_len": int(self.series_len),
            "events": [
                {"series": int(s), "index": int(i), "global_index": int(g),
                 "time": float(t), "peak": float(p)}
                for s, i, g, t, p in zip(self.series_of_event, self.local_indices,
                                         self.event_indices, self.event_times, self.peaks)
            ],
            "waits": [int(w) for w in self.waits()],
        }
        if config is not None:
            out["generator"] = config.to_dict()
        return out


@dataclass
class SynthResult:
    series: list  # of RmsSeries
    truth: GroundTruth
    config: SynthConfig

    @property
    def values(self) -> np.ndarray:
        return np.concatenate([s.values for s in self.series])


def _draw_waits(family: str, params: dict, n: int, gen: np.random.Generator) -> np.ndarray:
    if family == "weibull":
        return params["scale"] * gen.weibull(params["shape"], n)
    if family == "exponential":
        return gen.exponential(1.0 / params["rate"], n)
    return params["minimum"] * (1.0 + gen.pareto(params["exponent"], n))


def renewal_times(family: str, params: dict, horizon: float, seed: int) -> np.ndarray:
    """Event times of an ordinary renewal process on ``[0, horizon)`` (first event after one wait)."""
    gen = rng(seed)
    times = []
    t = 0.0
    chunk = 256
    while True:
        w = _draw_waits(family, params, chunk, gen)
        cum = t + np.cumsum(w)
        inside = cum[cum < horizon]
        times.append(inside)
        if inside.size < chunk:
            break
        t = cum[-1]
    return np.concatenate(times)


def burst_kernel(peak: float, tau: float) -> np.ndarray:
    """``peak * exp(-k / tau)`` for k = 0, 1, ... while it stays >= 1% of the peak."""
    kmax = int(math.floor(tau * math.log(100.0)))
    return peak * np.exp(-np.arange(kmax + 1) / tau)


def generate_rms(config: SynthConfig) -> SynthResult:
    config.validate()
    total = config.n_series * config.series_len
    background = np.concatenate([
        simulate_arma(config.background, config.series_len, derive_seed(config.seed, 1, i))
        for i in range(config.n_series)
    ])
    if config.bursts:
        times = renewal_times(config.wait_family, config.wait_params, float(total),
                              derive_seed(config.seed, 2))
        peaks = rng(derive_seed(config.seed, 3)).uniform(config.peak_min, config.peak_max,
                                                          times.size)
    else:
        times = np.zeros(0)
        peaks = np.zeros(0)
    idx = np.floor(times).astype(np.int64)
    signal = background.copy()
    L = config.series_len
    for i0, pk in zip(idx, peaks):
        kern = burst_kernel(pk, config.decay_tau)
        # series are separate recordings: a burst never leaks into the next one
        stop = min((i0 // L + 1) * L, i0 + kern.size)
        signal[i0:stop] += kern[: stop - i0]
    np.clip(signal, 0.0, None, out=signal)
    dt = config.window_T / config.sample_rate_hz
    series = [
        RmsSeries(signal[i * config.series_len:(i + 1) * config.series_len],
                  config.window_T, dt, series_id=f"s{i:03d}")
        for i in range(config.n_series)
    ]
    truth = GroundTruth(times, idx, peaks, config.series_len)
    return SynthResult(series, truth, config)


def generate_raw(rms: RmsSeries, seed: int, sample_rate_hz: float = DEFAULT_SAMPLE_RATE_HZ
                 ) -> RawSignal:
    """White-noise carrier modulated so that each window's RMS equals the given value."""
    gen = rng(seed)
    T = rms.window_T
    noise = gen.standard_normal((rms.values.size, T))
    noise /= np.sqrt(np.mean(noise * noise, axis=1, keepdims=True))
    return RawSignal((noise * rms.values[:, None]).ravel(), sample_rate_hz)


def match_events(truth_indices: np.ndarray, detected_indices: np.ndarray,
                 tol: int = 1) -> list[tuple[int, int]]:
    """Greedy one-to-one matching of detected to true event indices within ``tol``.

    Returns ``(truth_position, detected_position)`` pairs in increasing order.
    """
    truth_indices = np.asarray(truth_indices)
    detected_indices = np.asarray(detected_indices)
    pairs = []
    j = 0
    used = np.zeros(detected_indices.size, dtype=bool)
    for i, t in enumerate(truth_indices):
        while j < detected_indices.size and detected_indices[j] < t - tol:
            j += 1
        k = j
        while k < detected_indices.size and detected_indices[k] <= t + tol:
            if not used[k]:
                used[k] = True
                pairs.append((i, k))
                break
            k += 1
    return pairs
