"""Monte Carlo estimates with autocorrelation-aware error bars."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np


@dataclass(frozen=True)
class Estimate:
    mean: float
    std_error: float
    tau_int: float
    n_samples: int

    @property
    def effective_samples(self) -> float:
        return self.n_samples / (2.0 * self.tau_int) if self.tau_int > 0 else float(self.n_samples)

    def to_dict(self) -> dict:
        return asdict(self)


def autocorrelation(x: np.ndarray) -> np.ndarray:
    """Normalised autocorrelation function via FFT (rho[0] == 1)."""
    x = np.asarray(x, dtype=float)
    n = x.size
    d = x - x.mean()
    nfft = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(d, nfft)
    acov = np.fft.irfft(f * np.conjugate(f), nfft)[:n] / n
    if acov[0] <= 0:
        rho = np.zeros(n)
        rho[0] = 1.0
        return rho
    return acov / acov[0]


def integrated_autocorrelation_time(x: np.ndarray, c: float = 6.0) -> float:
    """``tau_int = 1/2 + sum_{t=1}^{W} rho(t)`` with the smallest window ``W >= c tau_int(W)``."""
    x = np.asarray(x, dtype=float)
    if x.size < 2 or np.all(x == x[0]):
        return 0.5
    rho = autocorrelation(x)
    tau = 0.5 + np.cumsum(rho[1:])
    windows = np.arange(1, x.size)
    ok = windows >= c * tau
    W = int(np.argmax(ok)) if ok.any() else x.size - 2
    return float(max(tau[W], 0.5))


def estimate(series) -> Estimate:
    """Mean and standard error ``sqrt(2 tau_int var / n)`` of a correlated series."""
    x = np.asarray(series, dtype=float)
    n = x.size
    if n == 0:
        raise ValueError("empty series")
    mean = float(x.mean())
    if n == 1 or np.all(x == x[0]):
        return Estimate(mean, 0.0, 0.5, n)
    tau = integrated_autocorrelation_time(x)
    var = float(x.var())
    return Estimate(mean, math.sqrt(2.0 * tau * var / n), tau, n)


def batch_means_error(series, n_batches: int = 32) -> float:
    """Standard error from non-overlapping batch means."""
    x = np.asarray(series, dtype=float)
    size = x.size // n_batches
    if size < 1:
        raise ValueError("series shorter than the number of batches")
    means = x[: size * n_batches].reshape(n_batches, size).mean(axis=1)
    return float(means.std(ddof=1) / math.sqrt(n_batches))


def pool(estimates: list[Estimate]) -> Estimate:
    """Combine independent replica estimates of one quantity.

    The error is the larger of the propagated replica errors and the
    between-replica scatter, so metastable replicas widen the bar.
    """
    if not estimates:
        raise ValueError("nothing to pool")
    k = len(estimates)
    means = np.array([e.mean for e in estimates])
    propagated = math.sqrt(sum(e.std_error ** 2 for e in estimates)) / k
    scatter = float(means.std(ddof=1) / math.sqrt(k)) if k > 1 else 0.0
    return Estimate(
        float(means.mean()),
        max(propagated, scatter),
        float(np.mean([e.tau_int for e in estimates])),
        int(sum(e.n_samples for e in estimates)),
    )
