import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from aewear.numerics import rng
from aewear.signal import (RawSignal, RmsSeries, band_power, daniell_smooth,
                           dickey_fuller_critical_value, dickey_fuller_test,
                           moving_window_spectrum, periodogram, rms_transform)
from aewear.synth import generate_raw


# -- RMS ----------------------------------------------------------------------


@pytest.mark.parametrize("c, T", [(3.0, 1), (-2.5, 7), (0.0, 100)])
def test_rms_of_constant(c, T):
    rms = rms_transform(RawSignal(np.full(700, c)), T)
    assert np.allclose(rms.values, abs(c))


def test_rms_two_samples():
    rms = rms_transform(RawSignal([3.0, 4.0]), 2)
    assert rms.values == pytest.approx([math.sqrt(12.5)])


def test_rms_acquisition_length():
    rms = rms_transform(RawSignal(rng(0).standard_normal(40960)), 100)
    assert len(rms) == 409
    assert rms.dt_seconds == pytest.approx(40e-6)


def test_rms_window_exceeds_series():
    with pytest.raises(ValueError, match="window exceeds series"):
        rms_transform(RawSignal(np.ones(5)), 6)


@settings(max_examples=60)
@given(arrays(float, st.integers(1, 300), elements=st.floats(-1e3, 1e3)),
       st.integers(1, 20))
def test_rms_bounds(x, T):
    if T > x.size:
        return
    rms = rms_transform(RawSignal(x), T)
    m = x.size // T
    blocks = np.abs(x[: m * T]).reshape(m, T)
    assert len(rms) == m
    assert np.all(rms.values <= blocks.max(axis=1) + 1e-9)
    assert np.all(rms.values >= blocks.mean(axis=1) - 1e-9)


def test_rms_series_rejects_negative():
    with pytest.raises(ValueError):
        RmsSeries(np.array([1.0, -1.0]))


def test_raw_signal_validation():
    with pytest.raises(ValueError):
        RawSignal([])
    with pytest.raises(ValueError):
        RawSignal([1.0, np.nan])
    with pytest.raises(ValueError):
        RawSignal([1.0], sample_rate_hz=0)


# -- periodogram --------------------------------------------------------------


def test_periodogram_sinusoid_peak():
    n = 1000
    x = np.sin(2 * np.pi * 0.1 * np.arange(n))
    pg = periodogram(x)
    assert pg.normalized_freqs[np.argmax(pg.power)] == pytest.approx(0.1)
    others = np.delete(pg.power, np.argmax(pg.power))
    assert others.max() < 1e-20 * pg.power.max() + 1e-12


def test_periodogram_zero_signal():
    assert np.all(periodogram(np.zeros(64)).power == 0)


def test_periodogram_too_short():
    with pytest.raises(ValueError):
        periodogram(np.ones(7))


@given(arrays(float, st.integers(8, 200), elements=st.floats(-100, 100)))
def test_periodogram_parseval(x):
    pg = periodogram(x)
    n = x.size
    total = 2 * pg.power.sum()
    if n % 2 == 0:
        total -= pg.power[-1]
    assert total == pytest.approx(np.sum((x - x.mean()) ** 2), rel=1e-9, abs=1e-6)


def test_periodogram_white_noise_flat():
    ok = 0
    for seed in range(100):
        pg = periodogram(rng(seed).standard_normal(1024))
        ok += pg.power.max() <= 20 * pg.power.mean()
    assert ok >= 95


def test_daniell_smooth_preserves_constant_and_rejects_bad_span():
    assert np.allclose(daniell_smooth(np.full(20, 3.0), 5), 3.0)
    with pytest.raises(ValueError):
        daniell_smooth(np.ones(10), 4)


def test_smoothed_periodogram_same_grid():
    pg = periodogram(rng(1).standard_normal(256))
    sm = pg.smoothed(7)
    assert np.array_equal(sm.normalized_freqs, pg.normalized_freqs)
    assert sm.power.shape == pg.power.shape


# -- moving-window spectrum ---------------------------------------------------


def test_moving_window_counts():
    sig = RawSignal(rng(0).standard_normal(1000))
    assert len(moving_window_spectrum(sig, 1000, 17)) == 1
    assert len(moving_window_spectrum(sig, 500, 250)) == 3
    with pytest.raises(ValueError):
        moving_window_spectrum(sig, 1001, 10)


def test_moving_window_burst_band_power():
    # one burst in an otherwise flat RMS envelope
    env = np.full(40, 5.0)
    env[20:23] = [80.0, 40.0, 20.0]
    raw = generate_raw(RmsSeries(env, 100, 40e-6), seed=3)
    windows = moving_window_spectrum(raw, 200, 200)
    hf = np.array([band_power(w, 0.25, 0.5) for w in windows])
    burst = [10, 11]
    quiet = [i for i in range(len(windows)) if i not in burst]
    assert hf[burst].min() > hf[quiet].max()


# -- Dickey-Fuller ------------------------------------------------------------


def test_dickey_fuller_constant_series():
    with pytest.raises(ValueError, match="degenerate regression"):
        dickey_fuller_test(np.full(100, 2.0))


def test_dickey_fuller_critical_value_large_sample():
    assert dickey_fuller_critical_value(10 ** 9) == pytest.approx(-2.86154, abs=1e-6)


def test_dickey_fuller_matches_statsmodels():
    sm = pytest.importorskip("statsmodels.tsa.stattools")
    y = np.cumsum(rng(4).standard_normal(300)) * 0.1 + rng(5).standard_normal(300)
    for lags in (0, 2):
        ours = dickey_fuller_test(y, lags)
        ref = sm.adfuller(y, maxlag=lags, regression="c", autolag=None)
        assert ours.statistic == pytest.approx(ref[0], rel=1e-10)


def test_dickey_fuller_stationary_ar1_rejects():
    hits = 0
    for seed in range(100):
        e = rng(seed).standard_normal(1000)
        y = np.empty(1000)
        y[0] = e[0]
        for t in range(1, 1000):
            y[t] = 0.5 * y[t - 1] + e[t]
        hits += dickey_fuller_test(y).reject_unit_root
    assert hits >= 95


def test_dickey_fuller_random_walk_does_not_reject():
    kept = sum(not dickey_fuller_test(np.cumsum(rng(seed).standard_normal(1000))).reject_unit_root
               for seed in range(100))
    assert kept >= 90
