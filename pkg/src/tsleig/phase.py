"""Regularized symbol b_n(t, s), its Wiener-Hopf factorization, and the phase eta_n(s).

For a symmetric symbol,

    b(t, s) = (a(t) - g(s)) e^{is} / ((t - e^{is})(1/t - e^{is}))
            = -(a(t) - g(s)) / (t + 1/t - 2 cos s),

a Laurent polynomial in t of band ``band(a) - 1`` whose coefficients are
B_k(s) = -sum_{m>=1} a_{m+k} sin(m s) / sin(s).  With f_j the Fourier
coefficients of a continuous log b, the plus factor is
b_+(t) = exp(f_0 + sum_{j>0} f_j t^j) and the phase is

    eta(s) = -i log(b_+(e^{is}) / b_+(e^{-is})) = 2 sum_{j>0} f_j sin(j s).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import hankel

from .circle import GridFunction, grid_size_for, log_branch_array, pv_cauchy
from .errors import DegenerateNode, NonzeroWinding
from .symbol import FourierSymbol, evaluate, truncate

EPS_SING = 1e-6
# samples held in memory per batched FFT
CHUNK_ELEMENTS = 1 << 22


@dataclass(frozen=True)
class EtaEvaluation:
    s: complex
    eta: complex
    eta_prime: complex | None
    route: str
    winding_checked: bool


@dataclass(frozen=True, eq=False)
class Factorization:
    """b = b_+ b_- with b_-(t) = b_+(1/t) / chi and chi = exp(f0)."""

    plus_coeffs: np.ndarray
    chi: complex
    f0: complex
    s: complex

    def plus(self, t):
        return np.polynomial.polynomial.polyval(np.asarray(t, dtype=complex), self.plus_coeffs)

    def minus(self, t):
        return self.plus(1.0 / np.asarray(t, dtype=complex)) / self.chi

    def reconstruct(self, t):
        return self.plus(t) * self.minus(t)


def sine_ratios(s, m_max: int, derivative: bool = False):
    """U[..., m] = sin(m s) / sin(s) for m = 0..m_max, via the Chebyshev recurrence.

    Finite at s = 0 and s = pi.  With ``derivative`` also returns d/ds.
    """
    s = np.asarray(s, dtype=complex)
    x = np.cos(s)
    U = np.zeros(s.shape + (m_max + 1,), dtype=complex)
    if m_max >= 1:
        U[..., 1] = 1.0
    for m in range(2, m_max + 1):
        U[..., m] = 2 * x * U[..., m - 1] - U[..., m - 2]
    if not derivative:
        return U
    V = np.zeros_like(U)
    for m in range(2, m_max + 1):
        V[..., m] = 2 * U[..., m - 1] + 2 * x * V[..., m - 1] - V[..., m - 2]
    return U, -np.sin(s)[..., None] * V


def _dd_taylor(sym_n: FourierSymbol, sigma, t):
    """(a(t) - a(t0)) / (t - t0) with t0 = e^{i sigma}, to second order."""
    t0 = np.exp(1j * sigma)
    g1 = evaluate(sym_n, sigma, 1)
    g2 = evaluate(sym_n, sigma, 2)
    d1 = g1 / (1j * t0)
    d2 = (-g2 + 1j * g1) / t0 ** 2
    return d1 + 0.5 * d2 * (t - t0)


def eval_b(sym_n: FourierSymbol, s, t, eps_sing: float = EPS_SING):
    """b_n(t, s) on the unit circle, patching the removable poles at e^{+-is}."""
    s = complex(s)
    t = np.asarray(t, dtype=complex)
    scalar = t.ndim == 0
    t = np.atleast_1d(t)
    zp, zm = np.exp(1j * s), np.exp(-1j * s)
    if abs(zp - zm) < eps_sing:
        raise DegenerateNode(f"s = {s} is too close to 0 or pi for pointwise evaluation")
    phi = np.angle(t)
    g_t = evaluate(sym_n, phi)
    g_s = evaluate(sym_n, s)
    out = np.empty(t.shape, dtype=complex)
    near_p = np.abs(t - zp) <= eps_sing
    near_m = np.abs(t - zm) <= eps_sing
    far = ~(near_p | near_m)
    tf = t[far]
    out[far] = (g_t[far] - g_s) * zp / ((tf - zp) * (1 / tf - zp))
    if near_p.any():
        tp = t[near_p]
        out[near_p] = _dd_taylor(sym_n, s, tp) * zp / (1 / tp - zp)
    if near_m.any():
        tm = t[near_m]
        out[near_m] = -tm * _dd_taylor(sym_n, -s, tm) / (tm - zp)
    return complex(out[0]) if scalar else out


class PhaseFunction:
    """eta_n and its derivative for one symbol and one matrix dimension.

    Holds only immutable data, so one instance may serve several threads.
    """

    def __init__(self, sym: FourierSymbol, n: int | None = None,
                 grid_size: int | None = None, oversample: int | None = None):
        self.n = int(n) if n is not None else sym.band + 1
        self.sym_n = truncate(sym, self.n)
        self.grid_size = grid_size or grid_size_for(self.n, oversample)
        L = self.sym_n.band
        self.b_band = max(L - 1, 0)
        a = self.sym_n.half
        # H[m-1, k] = a_{m+k}
        self._hankel = hankel(a[1:], np.zeros(L, dtype=complex)) if L else np.zeros((0, 0))

    # -- b_n ---------------------------------------------------------------
    def b_coefficients(self, s, derivative: bool = False):
        """B_k(s), k = 0..band(b); rows follow the shape of ``s``."""
        s = np.asarray(s, dtype=complex)
        L = self.sym_n.band
        if L == 0:
            z = np.zeros(s.shape + (1,), dtype=complex)
            return (z, z.copy()) if derivative else z
        if derivative:
            U, dU = sine_ratios(s, L, derivative=True)
            return -U[..., 1:] @ self._hankel, -dU[..., 1:] @ self._hankel
        return -sine_ratios(s, L)[..., 1:] @ self._hankel

    def _laurent_to_grid(self, B):
        N = self.grid_size
        if N < 2 * B.shape[-1]:
            raise ValueError("grid too small for the Laurent band of b")
        c = np.zeros(B.shape[:-1] + (N,), dtype=complex)
        k = B.shape[-1]
        c[..., :k] = B
        if k > 1:
            c[..., N - k + 1:] = B[..., :0:-1]
        return np.fft.ifft(c, axis=-1) * N

    def b_samples(self, s, backend: str = "series"):
        """b_n(tau_k, s) on the default grid; ``backend`` is 'series' or 'direct'."""
        if backend == "series":
            return self._laurent_to_grid(self.b_coefficients(s))
        if backend == "direct":
            nodes = GridFunction.nodes(self.grid_size)
            s_arr = np.asarray(s, dtype=complex)
            rows = [eval_b(self.sym_n, si, nodes) for si in s_arr.ravel()]
            return np.array(rows).reshape(s_arr.shape + (self.grid_size,))
        raise ValueError(f"unknown backend {backend!r}")

    def log_coefficients(self, s, derivative: bool = False):
        """Fourier coefficients of log b_n(., s) in FFT order (and of d_s b / b)."""
        N = self.grid_size
        if derivative:
            B, dB = self.b_coefficients(s, derivative=True)
            samples = self._laurent_to_grid(B)
        else:
            samples = self._laurent_to_grid(self.b_coefficients(s))
        logs, winding, _ = log_branch_array(samples, band=self.b_band or None)
        if np.any(winding != 0):
            raise NonzeroWinding(f"b_n has winding {int(np.max(np.abs(winding)))}")
        f = np.fft.fft(logs, axis=-1) / N
        if not derivative:
            return f
        fp = np.fft.fft(self._laurent_to_grid(dB) / samples, axis=-1) / N
        return f, fp

    # -- eta ---------------------------------------------------------------
    def _positive(self):
        return np.arange(1, self.grid_size // 2)

    def _chunked(self, fn, s):
        s = np.asarray(s, dtype=complex)
        flat = s.ravel()
        step = max(1, CHUNK_ELEMENTS // self.grid_size)
        if flat.size <= step:
            return fn(s)
        parts = [fn(flat[lo:lo + step]) for lo in range(0, flat.size, step)]
        return np.concatenate(parts).reshape(s.shape)

    def __call__(self, s, route: str = "factorization"):
        return self._chunked(lambda x: self._eta(x, route), s)

    def _eta(self, s, route):
        if route in ("pv", "pv_integral"):
            return self._eta_pv(s)
        if route != "factorization":
            raise ValueError(f"unknown route {route!r}")
        f = self.log_coefficients(s)
        j = self._positive()
        # -i [log b_+(e^{is}) - log b_+(e^{-is})], the f_0 terms cancel
        fj = f[..., 1:self.grid_size // 2]
        return 2 * np.sum(fj * np.sin(s[..., None] * j), axis=-1)

    def log_samples(self, s):
        """Continuous log of b_n(., s) on the grid, winding checked."""
        samples = self._laurent_to_grid(self.b_coefficients(s))
        logs, winding, _ = log_branch_array(samples, band=self.b_band or None)
        if np.any(winding != 0):
            raise NonzeroWinding(f"b_n has winding {int(np.max(np.abs(winding)))}")
        return logs

    def _eta_pv(self, s):
        if np.any(s.imag != 0):
            raise ValueError("the principal-value route needs real s")
        logs = self.log_samples(s)
        out = np.empty(s.shape, dtype=complex)
        for k, (sk, lk) in enumerate(zip(s.ravel(), logs.reshape(-1, self.grid_size))):
            lam = pv_cauchy(GridFunction(lk), np.exp(1j * np.array([sk, -sk]).real))
            out.flat[k] = -1j * (lam[0] - lam[1])
        return out

    def derivative(self, s):
        """Total derivative d eta / ds from d_s log b = (d_s b) / b."""
        return self._chunked(self._eta_prime, s)

    def _eta_prime(self, s):
        f, fp = self.log_coefficients(s, derivative=True)
        j = self._positive()
        sl = slice(1, self.grid_size // 2)
        js = s[..., None] * j
        return 2 * np.sum(j * f[..., sl] * np.cos(js) + fp[..., sl] * np.sin(js), axis=-1)

    def derivative_fd(self, s, h: float = 1e-5):
        s = np.asarray(s, dtype=complex)
        return (self(s + h) - self(s - h)) / (2 * h)

    def factorize(self, s) -> Factorization:
        s = complex(s)
        f = self.log_coefficients(np.array([s]))[0]
        N = self.grid_size
        plus = f.copy()
        plus[N // 2:] = 0
        samples = np.exp(np.fft.ifft(plus) * N)
        # b_+ is a polynomial of degree band(b); keep up to n + 1
        deg = min(self.n + 1, N // 2 - 1)
        coeffs = (np.fft.fft(samples) / N)[: deg + 1].copy()
        return Factorization(coeffs, complex(np.exp(f[0])), complex(f[0]), s)

    def evaluate(self, s, route: str = "factorization", with_derivative: bool = True) -> EtaEvaluation:
        s = complex(s)
        val = complex(self(np.array([s]), route=route)[0])
        der = complex(self.derivative(np.array([s]))[0]) if with_derivative else None
        return EtaEvaluation(s, val, der, route, True)


def sample_b(sym_n: FourierSymbol, s, N: int | None = None, backend: str = "series") -> GridFunction:
    pf = PhaseFunction(sym_n, sym_n.band + 1, grid_size=N)
    return GridFunction(pf.b_samples(complex(s), backend=backend))


def factorize(sym_n: FourierSymbol, s, N: int | None = None) -> Factorization:
    return PhaseFunction(sym_n, sym_n.band + 1, grid_size=N).factorize(s)


def eta(sym_n: FourierSymbol, s, route: str = "factorization", N: int | None = None) -> EtaEvaluation:
    """eta_n(s) for an already truncated symbol."""
    pf = PhaseFunction(sym_n, sym_n.band + 1, grid_size=N)
    return pf.evaluate(s, route=route, with_derivative=False)


def eta_derivative(sym_n: FourierSymbol, s, N: int | None = None) -> complex:
    pf = PhaseFunction(sym_n, sym_n.band + 1, grid_size=N)
    return complex(pf.derivative(np.array([complex(s)]))[0])


def eta_table(sym: FourierSymbol, n: int, count: int = 64, grid_size: int | None = None):
    """Rows (s, eta, eta') on an interior grid of (0, pi), plus any branch jumps found."""
    pf = PhaseFunction(sym, n, grid_size=grid_size)
    s = np.linspace(0.0, np.pi, count + 2)[1:-1]
    values = pf(s)
    slopes = pf.derivative(s)
    jumps = [float(s[k + 1]) for k in np.flatnonzero(np.abs(np.diff(values)) > np.pi)]
    return s, values, slopes, jumps
