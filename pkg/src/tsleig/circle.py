"""FFT calculus on equispaced samples of the unit circle.

Samples live at tau_k = exp(2 pi i k / N).  Coefficient vectors are laid out
from j = -N/2 to N/2 - 1, so index j sits at position j + N/2.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import NearZeroSample, UnresolvedPhase

ENV_OVERSAMPLE = "TSLEIG_GRID_OVERSAMPLE"
DEFAULT_OVERSAMPLE = 16
MIN_MODULUS = 1e-10


def default_oversample() -> int:
    raw = os.environ.get(ENV_OVERSAMPLE)
    return int(raw) if raw else DEFAULT_OVERSAMPLE


def grid_size_for(n: int, oversample: int | None = None) -> int:
    """Smallest power of two >= oversample * (n + 2)."""
    m = (oversample or default_oversample()) * (n + 2)
    return max(8, 1 << int(np.ceil(np.log2(m))))


def _check_size(N: int) -> None:
    if N < 8 or N & (N - 1):
        raise ValueError(f"grid size must be a power of two >= 8, got {N}")


@dataclass(frozen=True, eq=False)
class GridFunction:
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=complex).ravel()
        _check_size(v.size)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def size(self) -> int:
        return self.values.size

    @staticmethod
    def nodes(N: int) -> np.ndarray:
        return np.exp(2j * np.pi * np.arange(N) / N)

    @classmethod
    def from_function(cls, f, N: int) -> "GridFunction":
        """Sample ``f(tau)`` at the N circle nodes."""
        return cls(f(cls.nodes(N)))


@dataclass(frozen=True, eq=False)
class LogBranch:
    samples: GridFunction
    winding: int
    min_modulus: float


def to_coefficients(f: GridFunction) -> np.ndarray:
    """f_j = (1/N) sum_k f(tau_k) tau_k^{-j}, j = -N/2 .. N/2 - 1."""
    v = f.values
    return np.fft.fftshift(np.fft.fft(v)) / v.size


def to_samples(coeffs) -> GridFunction:
    c = np.asarray(coeffs, dtype=complex)
    return GridFunction(np.fft.ifft(np.fft.ifftshift(c)) * c.size)


def coefficient_indices(N: int) -> np.ndarray:
    return np.arange(-N // 2, N // 2)


def plus_projection(coeffs) -> np.ndarray:
    """Zero the coefficients with j < 0."""
    c = np.array(coeffs, dtype=complex)
    c[: c.size // 2] = 0
    return c


def log_branch_array(values: np.ndarray, band: int | None = None):
    """Continuous logarithm along the last axis.

    Returns ``(log_values, winding, min_modulus)``; arrays broadcast over the
    leading axes.  Each phase increment is arg(f_{k+1} / f_k), which lies in
    (-pi, pi] by construction.
    """
    v = np.asarray(values, dtype=complex)
    N = v.shape[-1]
    if band is not None and N < 8 * band:
        raise UnresolvedPhase(f"grid of {N} nodes is too coarse for band {band}")
    mod = np.abs(v)
    min_mod = mod.min(axis=-1)
    if np.any(min_mod < MIN_MODULUS):
        raise NearZeroSample(f"sample modulus {float(np.min(min_mod)):.3g} below {MIN_MODULUS}")
    step = np.angle(np.roll(v, -1, axis=-1) / v)
    if np.any(np.abs(step) > 0.9 * np.pi):
        raise UnresolvedPhase("phase increment between neighbouring nodes is too large")
    phase = np.angle(v[..., :1]) + np.concatenate(
        [np.zeros(v.shape[:-1] + (1,)), np.cumsum(step[..., :-1], axis=-1)], axis=-1)
    winding = np.rint(step.sum(axis=-1) / (2 * np.pi)).astype(int)
    return np.log(mod) + 1j * phase, winding, min_mod


def continuous_log(f: GridFunction, band: int | None = None) -> LogBranch:
    """log|f| + i * unwrapped phase, started from the principal value at tau_0."""
    logs, winding, min_mod = log_branch_array(f.values, band)
    return LogBranch(GridFunction(logs), int(winding), float(min_mod))


def winding_number(f: GridFunction) -> int:
    return continuous_log(f).winding


def pv_cauchy(f: GridFunction, t0):
    """Principal value of (1/2 pi i) int_T f(tau) / (tau - t0) d tau, |t0| = 1.

    Evaluated as (1/2) (sum_{j>=0} f_j t0^j - sum_{j<0} f_j t0^j).
    """
    t = np.asarray(t0, dtype=complex)
    if np.any(np.abs(np.abs(t) - 1.0) > 1e-12):
        raise ValueError("pv_cauchy needs a point on the unit circle")
    c = to_coefficients(f)
    j = coefficient_indices(c.size)
    sign = np.where(j >= 0, 0.5, -0.5)
    powers = np.power.outer(np.atleast_1d(t), j.astype(float))
    out = powers @ (sign * c)
    return complex(out[0]) if t.ndim == 0 else out.reshape(t.shape)
