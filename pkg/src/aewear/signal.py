"""Raw AE records, RMS reduction, spectra and the Dickey-Fuller stationarity check."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

DEFAULT_SAMPLE_RATE_HZ = 2.5e6
DEFAULT_WINDOW_T = 100
DEFAULT_SPECTRUM_WINDOW = 4096
DEFAULT_SPECTRUM_HOP = 2048

# 5% critical value for the constant-only, no-trend Dickey-Fuller tau statistic.
# MacKinnon (2010) response surface tau = b0 + b1/n + b2/n^2; b0 is the
# asymptotic value -2.8621 tabulated by Fuller (1976).
_DF_CRIT_5PCT = (-2.86154, -2.8903, -4.234)


@dataclass(frozen=True)
class RawSignal:
    samples: np.ndarray
    sample_rate_hz: float = DEFAULT_SAMPLE_RATE_HZ

    def __post_init__(self):
        x = np.asarray(self.samples, dtype=float)
        if x.ndim != 1 or x.size == 0:
            raise ValueError("signal must be a nonempty 1-d sequence")
        if not np.all(np.isfinite(x)):
            raise ValueError("signal contains non-finite samples")
        if not self.sample_rate_hz > 0:
            raise ValueError("sample_rate_hz must be positive")
        object.__setattr__(self, "samples", x)

    def __len__(self):
        return self.samples.size


@dataclass(frozen=True)
class RmsSeries:
    values: np.ndarray
    window_T: int = DEFAULT_WINDOW_T
    dt_seconds: float = DEFAULT_WINDOW_T / DEFAULT_SAMPLE_RATE_HZ
    series_id: str = ""

    def __post_init__(self):
        y = np.asarray(self.values, dtype=float)
        if y.ndim != 1:
            raise ValueError("RMS values must be 1-d")
        if not np.all(np.isfinite(y)) or np.any(y < 0):
            raise ValueError("RMS values must be finite and nonnegative")
        if self.window_T < 1 or not self.dt_seconds > 0:
            raise ValueError("window_T and dt_seconds must be positive")
        object.__setattr__(self, "values", y)

    def __len__(self):
        return self.values.size


@dataclass(frozen=True)
class Periodogram:
    normalized_freqs: np.ndarray
    power: np.ndarray

    def smoothed(self, span: int) -> "Periodogram":
        """Modified Daniell smoothing with total width ``span`` (odd, >= 3)."""
        return Periodogram(self.normalized_freqs, daniell_smooth(self.power, span))


@dataclass(frozen=True)
class DickeyFullerResult:
    statistic: float
    critical_value: float
    reject_unit_root: bool
    n_obs: int
    lags: int = 0
    coefficients: dict = field(default_factory=dict)


def rms_transform(signal: RawSignal, window_T: int = DEFAULT_WINDOW_T) -> RmsSeries:
    """Root mean square over consecutive non-overlapping windows of ``window_T`` samples.

    A trailing partial window is dropped, so the output has ``len(signal) // window_T``
    points.
    """
    window_T = int(window_T)
    if window_T < 1:
        raise ValueError("window_T must be >= 1")
    n = len(signal)
    if window_T > n:
        raise ValueError("window exceeds series")
    m = n // window_T
    blocks = signal.samples[: m * window_T].reshape(m, window_T)
    values = np.sqrt(np.mean(blocks * blocks, axis=1))
    return RmsSeries(values, window_T, window_T / signal.sample_rate_hz)


def periodogram(signal: RawSignal | Sequence[float]) -> Periodogram:
    """Raw periodogram at the Fourier frequencies k/N, k = 1..N//2.

    Normalization: ``I_k = |sum_t (x_t - mean) exp(-2 pi i k t / N)|^2 / N``, so
    that the full two-sided sum over k = 1..N-1 equals ``sum_t (x_t - mean)^2``.
    """
    x = signal.samples if isinstance(signal, RawSignal) else np.asarray(signal, dtype=float)
    n = x.size
    if n < 8:
        raise ValueError("periodogram needs at least 8 samples")
    spec = np.fft.rfft(x - x.mean())
    k = np.arange(1, n // 2 + 1)
    power = np.abs(spec[k]) ** 2 / n
    return Periodogram(k / n, power)


def daniell_smooth(power: np.ndarray, span: int) -> np.ndarray:
    if span < 3 or span % 2 == 0:
        raise ValueError("span must be an odd integer >= 3")
    half = span // 2
    # modified Daniell kernel: end weights halved
    w = np.ones(span)
    w[0] = w[-1] = 0.5
    w /= w.sum()
    padded = np.concatenate([power[half:0:-1], power, power[-2:-half - 2:-1]])
    return np.convolve(padded, w, mode="valid")


def moving_window_spectrum(
    signal: RawSignal,
    window_len: int = DEFAULT_SPECTRUM_WINDOW,
    hop: int = DEFAULT_SPECTRUM_HOP,
) -> list[Periodogram]:
    n = len(signal)
    if window_len > n:
        raise ValueError("window_len exceeds signal length")
    if hop < 1:
        raise ValueError("hop must be >= 1")
    starts = range(0, n - window_len + 1, hop)
    return [periodogram(signal.samples[s:s + window_len]) for s in starts]


def band_power(pgram: Periodogram, lo: float, hi: float) -> float:
    """Summed periodogram power for normalized frequencies in ``[lo, hi]``."""
    f = pgram.normalized_freqs
    return float(pgram.power[(f >= lo) & (f <= hi)].sum())


def dickey_fuller_critical_value(n_obs: int) -> float:
    b0, b1, b2 = _DF_CRIT_5PCT
    return b0 + b1 / n_obs + b2 / n_obs ** 2


def dickey_fuller_test(series: Sequence[float], lags: int = 0) -> DickeyFullerResult:
    """Dickey-Fuller test with a constant and no trend.

    Regresses ``dy_t = a + gamma * y_{t-1} + sum_i d_i dy_{t-i} + e_t`` by least
    squares and compares ``gamma_hat / se(gamma_hat)`` with the 5% critical value.
    ``lags > 0`` gives the augmented variant.
    """
    y = np.asarray(series, dtype=float)
    if y.size < 25:
        raise ValueError("Dickey-Fuller test needs at least 25 observations")
    if lags < 0:
        raise ValueError("lags must be >= 0")
    if np.ptp(y) == 0:
        raise ValueError("degenerate regression: constant series")
    dy = np.diff(y)
    target = dy[lags:]
    cols = [np.ones(target.size), y[lags:-1]]
    for i in range(1, lags + 1):
        cols.append(dy[lags - i:-i])
    X = np.column_stack(cols)
    beta, _, rank, _ = np.linalg.lstsq(X, target, rcond=None)
    if rank < X.shape[1]:
        raise ValueError("degenerate regression: rank-deficient design")
    resid = target - X @ beta
    dof = target.size - X.shape[1]
    s2 = resid @ resid / dof
    if s2 <= 0:
        raise ValueError("degenerate regression: zero residual variance")
    cov = s2 * np.linalg.inv(X.T @ X)
    stat = float(beta[1] / np.sqrt(cov[1, 1]))
    crit = dickey_fuller_critical_value(target.size)
    return DickeyFullerResult(
        statistic=stat,
        critical_value=crit,
        reject_unit_root=bool(stat < crit),
        n_obs=int(target.size),
        lags=lags,
        coefficients={"const": float(beta[0]), "gamma": float(beta[1])},
    )
