"""Dense reference spectra and pairing against asymptotic estimates.

The eigensolver balances the matrix, reduces it to upper Hessenberg form with
Householder reflections and runs explicitly shifted complex QR steps with
Givens rotations on the unreduced trailing block.  Only eigenvalues are
computed, so rotations are confined to the active window.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor
from scipy.optimize import linear_sum_assignment

from .errors import AmbiguousPairing, NoConvergence
from .symbol import FourierSymbol

EXACT_ASSIGNMENT_MAX = 512
AMBIGUITY_TOL = 1e-14
EXCEPTIONAL_EVERY = 10
SWEEPS_PER_DIM = 30
# relative errors use max(|lambda|, REL_FLOOR * max|lambda|) as denominator
REL_FLOOR = 1e-8


@dataclass(frozen=True, eq=False)
class DenseSpectrum:
    n: int
    eigenvalues: np.ndarray
    trace_residual: float
    det_residual: float
    sweeps: int = 0


@dataclass(frozen=True, eq=False)
class ComparisonReport:
    n: int
    order: str
    pairing: np.ndarray
    delta: float
    per_j_abs: np.ndarray
    per_j_rel: np.ndarray
    ambiguous: bool
    delta1: float | None = None
    delta2: float | None = None


def build_toeplitz(sym: FourierSymbol, n: int) -> np.ndarray:
    """T_n(a) with entry (r, c) = a_{r-c}."""
    if n < 1:
        raise ValueError("n must be >= 1")
    col = np.zeros(n, dtype=complex)
    m = min(n, sym.half.size)
    col[:m] = sym.half[:m]
    idx = np.abs(np.subtract.outer(np.arange(n), np.arange(n)))
    return col[idx]


def balance(A: np.ndarray) -> np.ndarray:
    """Diagonal similarity with powers of two equalizing row and column norms."""
    A = np.array(A, dtype=complex)
    n = A.shape[0]
    radix = 2.0
    converged = False
    while not converged:
        converged = True
        for i in range(n):
            c = np.sum(np.abs(A[:, i])) - abs(A[i, i])
            r = np.sum(np.abs(A[i, :])) - abs(A[i, i])
            if c == 0 or r == 0:
                continue
            total = c + r
            f = 1.0
            while c < r / radix:
                c *= radix
                r /= radix
                f *= radix
            while c >= r * radix:
                c /= radix
                r *= radix
                f /= radix
            if c + r < 0.95 * total:
                converged = False
                A[:, i] *= f
                A[i, :] /= f
    return A


def hessenberg(A: np.ndarray) -> np.ndarray:
    """Householder reduction to upper Hessenberg form (similarity)."""
    H = np.array(A, dtype=complex)
    n = H.shape[0]
    for k in range(n - 2):
        x = H[k + 1:, k].copy()
        nx = np.linalg.norm(x)
        if nx == 0:
            continue
        phase = x[0] / abs(x[0]) if x[0] != 0 else 1.0
        v = x
        v[0] += phase * nx
        v /= np.linalg.norm(v)
        H[k + 1:, k:] -= 2.0 * np.outer(v, v.conj() @ H[k + 1:, k:])
        H[:, k + 1:] -= 2.0 * np.outer(H[:, k + 1:] @ v, v.conj())
        H[k + 2:, k] = 0
    return H


def _wilkinson(a, b, c, d):
    """Eigenvalue of [[a, b], [c, d]] closer to d."""
    tr = 0.5 * (a - d)
    disc = np.sqrt(tr * tr + b * c)
    mu1 = d - b * c / (tr + disc) if tr + disc != 0 else d
    mu2 = d - b * c / (tr - disc) if tr - disc != 0 else d
    return mu1 if abs(mu1 - d) <= abs(mu2 - d) else mu2


def _givens(x, y):
    """(c, s) with [[c, s], [-conj(s), c]] @ [x, y] = [r, 0], c real."""
    if y == 0:
        return 1.0, 0j
    if x == 0:
        return 0.0, np.conj(y) / abs(y)
    ax = abs(x)
    nrm = np.hypot(ax, abs(y))
    return ax / nrm, (x / ax) * np.conj(y) / nrm


def hessenberg_qr(H: np.ndarray, max_sweeps: int | None = None):
    """Eigenvalues of an upper Hessenberg matrix; returns (values, sweeps)."""
    H = np.array(H, dtype=complex)
    n = H.shape[0]
    max_sweeps = SWEEPS_PER_DIM * n if max_sweeps is None else max_sweeps
    eig = np.empty(n, dtype=complex)
    hi = n - 1
    its = 0
    sweeps = 0
    while hi >= 0:
        lo = hi
        while lo > 0:
            scale = abs(H[lo - 1, lo - 1]) + abs(H[lo, lo])
            if scale == 0:
                scale = np.linalg.norm(H[:hi + 1, :hi + 1], 1)
            if abs(H[lo, lo - 1]) <= np.spacing(scale):
                H[lo, lo - 1] = 0
                break
            lo -= 1
        if lo == hi:
            eig[hi] = H[hi, hi]
            hi -= 1
            its = 0
            continue
        if sweeps >= max_sweeps:
            raise NoConvergence(f"QR iteration exceeded {max_sweeps} sweeps")
        its += 1
        sweeps += 1
        if its % EXCEPTIONAL_EVERY == 0:
            mu = H[hi, hi] + 0.75 * abs(H[hi, hi - 1]) * np.exp(1j * its)
        else:
            mu = _wilkinson(H[hi - 1, hi - 1], H[hi - 1, hi], H[hi, hi - 1], H[hi, hi])
        idx = np.arange(lo, hi + 1)
        H[idx, idx] -= mu
        rots = []
        for k in range(lo, hi):
            c, s = _givens(H[k, k], H[k + 1, k])
            rows = H[k:k + 2, k:hi + 1]
            top = c * rows[0] + s * rows[1]
            bot = -np.conj(s) * rows[0] + c * rows[1]
            rows[0], rows[1] = top, bot
            H[k + 1, k] = 0
            rots.append((c, s))
        for k, (c, s) in zip(range(lo, hi), rots):
            m = min(k + 2, hi) + 1
            cols = H[lo:m, k:k + 2]
            left = c * cols[:, 0] + np.conj(s) * cols[:, 1]
            right = -s * cols[:, 0] + c * cols[:, 1]
            cols[:, 0], cols[:, 1] = left, right
        H[idx, idx] += mu
    return eig, sweeps


def _log_det(A: np.ndarray) -> complex:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        lu, piv = lu_factor(A)
    diag = np.diag(lu)
    if np.any(diag == 0):
        return complex(-np.inf)
    swaps = np.count_nonzero(piv != np.arange(piv.size))
    return complex(np.sum(np.log(diag.astype(complex)))) + (1j * np.pi if swaps % 2 else 0)


def eigenvalues(matrix, max_sweeps: int | None = None) -> DenseSpectrum:
    A = np.asarray(matrix, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("matrix must be square")
    n = A.shape[0]
    ev, sweeps = hessenberg_qr(hessenberg(balance(A)), max_sweeps)
    trace_res = float(abs(ev.sum() - np.trace(A)))
    log_det = _log_det(A)
    if not np.isfinite(log_det.real):
        # singular: |prod ev| should vanish on the scale of the spectrum
        scale = max(float(np.max(np.abs(ev))), np.finfo(float).tiny)
        det_res = float(np.exp(np.sum(np.log(np.abs(ev) / scale + 1e-300))))
    elif np.any(ev == 0):
        det_res = float("inf")
    else:
        diff = np.sum(np.log(ev)) - log_det
        det_res = float(abs(np.expm1(diff))) if abs(diff) < 1 else float(abs(np.exp(diff) - 1))
    return DenseSpectrum(n, ev, trace_res, det_res, sweeps)


def relative_errors(estimates, reference) -> np.ndarray:
    ref = np.abs(reference)
    floor = REL_FLOOR * (ref.max() if ref.size else 0.0)
    return np.abs(np.asarray(estimates) - reference) / np.maximum(ref, floor)


def _swap_gain(cost: np.ndarray, perm: np.ndarray) -> np.ndarray:
    """gain[i, k] = cost change of exchanging the partners of i and k."""
    own = cost[np.arange(perm.size), perm]
    cross = cost[:, perm]
    return cross + cross.T - own[:, None] - own[None, :]


def _greedy_pairing(cost: np.ndarray) -> np.ndarray:
    n = cost.shape[0]
    perm = np.full(n, -1)
    taken = np.zeros(n, dtype=bool)
    for flat in np.argsort(cost, axis=None, kind="stable"):
        i, k = divmod(int(flat), n)
        if perm[i] < 0 and not taken[k]:
            perm[i] = k
            taken[k] = True
    for _ in range(n):
        gain = _swap_gain(cost, perm)
        np.fill_diagonal(gain, 0)
        i, k = np.unravel_index(np.argmin(gain), gain.shape)
        if gain[i, k] >= -1e-15:
            break
        perm[i], perm[k] = perm[k], perm[i]
    return perm


def match(estimates, reference) -> tuple[np.ndarray, bool]:
    """Bijection estimate index -> reference index of minimum total distance."""
    est = np.asarray(estimates, dtype=complex)
    ref = np.asarray(reference, dtype=complex)
    if est.shape != ref.shape:
        raise ValueError("spectra must have the same size")
    cost = np.abs(est[:, None] - ref[None, :])
    if est.size <= EXACT_ASSIGNMENT_MAX:
        _, perm = linear_sum_assignment(cost)
    else:
        perm = _greedy_pairing(cost)
    gain = np.abs(_swap_gain(cost, perm))
    np.fill_diagonal(gain, np.inf)
    ambiguous = bool(np.any(gain < AMBIGUITY_TOL))
    if ambiguous:
        warnings.warn("pairing is ambiguous; keeping the first optimal assignment",
                      AmbiguousPairing, stacklevel=3)
    return perm, ambiguous


def pair_spectra(oracle: DenseSpectrum, estimate, order="1") -> ComparisonReport:
    """Pair order-``order`` estimates with the oracle and compute the error metrics."""
    if estimate.n != oracle.n:
        raise ValueError("oracle and estimate dimensions differ")
    ref = oracle.eigenvalues
    deltas = {}
    for k in (1, 2):
        vals = estimate.lambdas(k)
        if np.all(np.isfinite(vals)):
            p, _ = match(vals, ref)
            deltas[k] = float(np.max(relative_errors(vals, ref[p])))
    est = estimate.lambdas(order)
    perm, ambiguous = match(est, ref)
    err = np.abs(est - ref[perm])
    rel = relative_errors(est, ref[perm])
    return ComparisonReport(oracle.n, str(order), perm, float(rel.max()), err, rel, ambiguous,
                            deltas.get(1), deltas.get(2))
