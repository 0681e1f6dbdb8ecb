"""Characteristic phase equation and eigenvalue estimates of increasing order.

The j-th eigenvalue of T_n(a) is g_n(s_j) where s_j solves

    (n + 1) s + eta_n(s) = pi j,

found here by fixed-point iteration s <- d_j - eta_n(s) / (n + 1) started from
the one-step value e_j = d_j - eta_n(d_j) / (n + 1), d_j = pi j / (n + 1).
Closed-form estimates expand the same root in powers of 1 / (n + 1).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np

from .errors import DuplicateRoot, MaxIterExceeded, NoContraction
from .phase import PhaseFunction
from .symbol import FourierSymbol, evaluate

DUPLICATE_TOL = 1e-10
SOLVE_BLOCK = 64
# displacements below this are rounding noise and say nothing about contraction
RATIO_FLOOR = 1e-11
GROWTH_LIMIT = 3
# |Im eta| below this (relative) counts as a real phase
SIDE_TOL = 1e-13


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-12
    max_iter: int = 50
    c_strip: float = 1.0
    C_strip: float = 10.0
    grid_oversample: int | None = None
    n_min: int = 8
    workers: int = 1

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


@dataclass(frozen=True)
class FixedPointResult:
    s: np.ndarray
    start: np.ndarray
    iterations: np.ndarray
    displacements: list = field(repr=False)


@dataclass(frozen=True)
class SpectrumRecord:
    j: int
    d_jn: float
    e_jn: complex
    s_jn: complex
    iterations: int
    lambda_order0: complex
    lambda_order1: complex
    lambda_order2: complex | None
    lambda_fixed: complex


@dataclass(frozen=True)
class SpectrumEstimate:
    n: int
    records: tuple
    source: str = "asymptotic"

    def column(self, name: str) -> np.ndarray:
        if name not in {f.name for f in fields(SpectrumRecord)}:
            raise KeyError(name)
        return np.array([getattr(r, name) for r in self.records])

    def lambdas(self, order) -> np.ndarray:
        """Estimates for order 0, 1, 2 or 'fixed'."""
        key = "lambda_fixed" if str(order) == "fixed" else f"lambda_order{int(order)}"
        return self.column(key).astype(complex)


@dataclass(frozen=True)
class NormalDisplacement:
    point: complex
    offset: complex
    side: int

    def __iter__(self):
        return iter((self.point, self.offset))


def grid_points(n: int, j=None) -> np.ndarray:
    j = np.arange(1, n + 1) if j is None else np.asarray(j)
    return np.pi * j / (n + 1)


def make_phase(sym: FourierSymbol, n: int, cfg: SolverConfig | None = None) -> PhaseFunction:
    cfg = cfg or SolverConfig()
    return PhaseFunction(sym, n, oversample=cfg.grid_oversample)


def _check_index(n: int, j) -> np.ndarray:
    j = np.atleast_1d(np.asarray(j, dtype=int))
    if n < 1 or np.any(j < 1) or np.any(j > n):
        raise ValueError(f"need 1 <= j <= n, got n={n}, j={j.tolist()}")
    return j


def iterate_fixed_point(phase: PhaseFunction, j, cfg: SolverConfig | None = None) -> FixedPointResult:
    """Batched successive approximations for several indices j."""
    cfg = cfg or SolverConfig()
    n1 = phase.n + 1
    j = _check_index(phase.n, j)
    d = grid_points(phase.n, j).astype(complex)
    s = d - phase(d) / n1
    start = s.copy()
    iters = np.zeros(j.size, dtype=int)
    history = [[] for _ in range(j.size)]
    prev = np.full(j.size, np.nan)
    streak = np.zeros(j.size, dtype=int)
    active = np.ones(j.size, dtype=bool)
    for _ in range(cfg.max_iter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        new = d[idx] - phase(s[idx]) / n1
        disp = np.abs(new - s[idx])
        s[idx] = new
        iters[idx] += 1
        for k, dk in zip(idx, disp):
            history[k].append(float(dk))
        growing = (disp >= prev[idx]) & (prev[idx] > RATIO_FLOOR) & (disp > RATIO_FLOOR)
        streak[idx] = np.where(growing, streak[idx] + 1, 0)
        if np.any(streak >= GROWTH_LIMIT):
            bad = j[streak >= GROWTH_LIMIT].tolist()
            raise NoContraction(f"displacements grew {GROWTH_LIMIT} times in a row for j={bad}")
        prev[idx] = disp
        active[idx[disp <= cfg.tol]] = False
    if active.any():
        raise MaxIterExceeded(f"no convergence in {cfg.max_iter} steps for j={j[active].tolist()}")
    return FixedPointResult(s, start, iters, history)


def solve_s(sym: FourierSymbol, n: int, j: int, cfg: SolverConfig | None = None,
            phase: PhaseFunction | None = None):
    """Root s_{j,n} of the characteristic equation and the number of map applications."""
    phase = phase or make_phase(sym, n, cfg)
    res = iterate_fixed_point(phase, [j], cfg)
    return complex(res.s[0]), int(res.iterations[0])


def characteristic_residual(phase: PhaseFunction, j, s) -> np.ndarray:
    """|(n + 1) s + eta_n(s) - pi j|."""
    s = np.asarray(s, dtype=complex)
    return np.abs((phase.n + 1) * s + phase(s) - np.pi * np.asarray(j))


def expansion_s(sym: FourierSymbol, n: int, j, order: int, phase: PhaseFunction | None = None):
    """s_{j,n} expanded to first or second order in 1 / (n + 1)."""
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    phase = phase or make_phase(sym, n)
    jj = _check_index(n, j)
    d = grid_points(n, jj)
    e = phase(d)
    s = d - e / (n + 1)
    if order == 2:
        s = s + e * phase.derivative(d) / (n + 1) ** 2
    return complex(s[0]) if np.ndim(j) == 0 else s


def _estimates(sym, phase, j, fp: FixedPointResult | None):
    n = phase.n
    n1 = n + 1
    d = grid_points(n, j)
    e, ep = phase(d), phase.derivative(d)
    g0, g1, g2 = (evaluate(sym, d, k) for k in range(3))
    lam0 = g0
    lam1 = g0 - g1 * e / n1
    lam2 = lam1 + (0.5 * g2 * e ** 2 + g1 * e * ep) / n1 ** 2
    out = {"d": d, "e": d - e / n1, "lam0": lam0, "lam1": lam1, "lam2": lam2}
    if fp is not None:
        out["fixed"] = evaluate(phase.sym_n, fp.s)
    return out


def lambda_estimates(sym: FourierSymbol, n: int, j: int, cfg: SolverConfig | None = None,
                     phase: PhaseFunction | None = None) -> SpectrumRecord:
    phase = phase or make_phase(sym, n, cfg)
    fp = iterate_fixed_point(phase, [j], cfg)
    est = _estimates(sym, phase, np.array([j]), fp)
    return SpectrumRecord(int(j), float(est["d"][0]), complex(est["e"][0]), complex(fp.s[0]),
                          int(fp.iterations[0]), complex(est["lam0"][0]), complex(est["lam1"][0]),
                          complex(est["lam2"][0]), complex(est["fixed"][0]))


def _oracle_spectrum(sym: FourierSymbol, n: int) -> SpectrumEstimate:
    from .oracle import build_toeplitz, eigenvalues

    ev = eigenvalues(build_toeplitz(sym, n)).eigenvalues
    # order along the curve by the nearest symbol parameter
    phi = np.linspace(0.0, np.pi, 2049)
    curve = evaluate(sym, phi)
    param = phi[np.argmin(np.abs(ev[:, None] - curve[None, :]), axis=1)]
    ev = ev[np.argsort(param, kind="stable")]
    d = grid_points(n)
    nan = complex(np.nan, np.nan)
    recs = tuple(SpectrumRecord(k + 1, float(d[k]), nan, nan, 0, complex(v), complex(v),
                                complex(v), complex(v)) for k, v in enumerate(ev))
    return SpectrumEstimate(n, recs, source="oracle")


def full_spectrum(sym: FourierSymbol, n: int, cfg: SolverConfig | None = None,
                  phase: PhaseFunction | None = None) -> SpectrumEstimate:
    """Estimates for every j = 1..n; small n falls back to the dense eigensolver."""
    cfg = cfg or SolverConfig()
    if n < cfg.n_min:
        return _oracle_spectrum(sym, n)
    phase = phase or make_phase(sym, n, cfg)
    j = np.arange(1, n + 1)
    # fixed blocks keep the arithmetic identical for any worker count
    blocks = [j[k:k + SOLVE_BLOCK] for k in range(0, n, SOLVE_BLOCK)]
    solve = lambda b: iterate_fixed_point(phase, b, cfg)
    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            parts = list(pool.map(solve, blocks))
    else:
        parts = [solve(b) for b in blocks]
    fp = FixedPointResult(np.concatenate([p.s for p in parts]),
                          np.concatenate([p.start for p in parts]),
                          np.concatenate([p.iterations for p in parts]),
                          [h for p in parts for h in p.displacements])
    gap = np.abs(fp.s[:, None] - fp.s[None, :])
    np.fill_diagonal(gap, np.inf)
    if gap.min() < DUPLICATE_TOL:
        a, b = np.unravel_index(np.argmin(gap), gap.shape)
        raise DuplicateRoot(f"s_{a + 1} and s_{b + 1} coincide to {gap.min():.2e}")
    est = _estimates(sym, phase, j, fp)
    recs = tuple(
        SpectrumRecord(int(j[k]), float(est["d"][k]), complex(est["e"][k]), complex(fp.s[k]),
                       int(fp.iterations[k]), complex(est["lam0"][k]), complex(est["lam1"][k]),
                       complex(est["lam2"][k]), complex(est["fixed"][k]))
        for k in range(n))
    return SpectrumEstimate(n, recs)


def edge_lambda(sym: FourierSymbol, n: int, j, end: str = "left"):
    """Quadratic approximation of the eigenvalues closest to g(0) or g(pi)."""
    j = np.asarray(j, dtype=float)
    if end == "left":
        val = evaluate(sym, 0.0) + np.pi ** 2 * evaluate(sym, 0.0, 2) / 2 * j ** 2 / (n + 1) ** 2
    elif end == "right":
        val = (evaluate(sym, np.pi)
               + np.pi ** 2 * evaluate(sym, np.pi, 2) / 2 * (n + 1 - j) ** 2 / (n + 1) ** 2)
    else:
        raise ValueError("end must be 'left' or 'right'")
    return complex(val) if np.ndim(val) == 0 else val


def normal_displacement(sym: FourierSymbol, n: int, j: int,
                        phase: PhaseFunction | None = None) -> NormalDisplacement:
    """Curve point g(e~) and the offset along the normal for interior j."""
    phase = phase or make_phase(sym, n)
    d = grid_points(n, _check_index(n, j))
    e = complex(phase(d)[0])
    shifted = d[0] - e.real / (n + 1)
    offset = -1j * evaluate(sym, shifted, 1) * e.imag / (n + 1)
    side = int(np.sign(e.imag)) if abs(e.imag) > SIDE_TOL * max(1.0, abs(e)) else 0
    return NormalDisplacement(complex(evaluate(sym, shifted)), complex(offset), side)


def contraction_bound(phase: PhaseFunction, s, cfg: SolverConfig | None = None,
                      samples: int = 64) -> float:
    """sup |eta_n'| / (n + 1) over a rectangle enclosing the iterates ``s``."""
    cfg = cfg or SolverConfig()
    n1 = phase.n + 1
    s = np.asarray(s, dtype=complex)
    height = 1.25 * float(np.max(np.abs(s.imag))) if s.size else 0.0
    height = min(height, cfg.C_strip / n1)
    re = np.linspace(cfg.c_strip / n1, np.pi - cfg.c_strip / n1, samples)
    im = np.linspace(-height, height, 5)
    box = (re[:, None] + 1j * im[None, :]).ravel()
    return float(np.max(np.abs(phase.derivative(box)))) / n1
