"""Acoustic-emission tool-wear analysis: RMS reduction, ARMA identification,
burst point processes and Weibull waiting-time monitoring."""

from .arma import (ArmaConvergenceError, ArmaFit, ArmaSpec, BicGrid, acf, bic, bic_grid_search,
                   cumulative_periodogram_test, fit_arma, ljung_box, pacf, simulate_arma)
from .numerics import chi_square_sf, kolmogorov_sf, ln_gamma
from .pointproc import (Acquisition, BurstRecord, DistFit, WaitingTimes, WearReport,
                        detect_bursts, fit_exponential, fit_pareto, fit_weibull, ks_test,
                        renewal_diagnostics, waiting_times, wear_monitor, weibull_mean,
                        weibull_pdf)
from .signal import (Periodogram, RawSignal, RmsSeries, dickey_fuller_test,
                     moving_window_spectrum, periodogram, rms_transform)
from .synth import SynthConfig, generate_rms

__version__ = "0.1.0"
