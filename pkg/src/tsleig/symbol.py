"""Symmetric Fourier symbols on the unit circle.

A symbol a(t) = sum_j a_j t^j with a_j = a_{-j} is stored through its
non-negative half a_0, ..., a_band.  The boundary function is
g(phi) = a(exp(i phi)) and extends analytically to complex phi.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import AsymmetricCoefficients, GridTooCoarse, StripExceeded

SYMMETRY_TOL = 1e-12
DEFAULT_C_STRIP = 10.0


@dataclass(frozen=True, eq=False)
class FourierSymbol:
    """Immutable symmetric Laurent coefficient vector.

    ``half[j]`` holds a_j = a_{-j} for j = 0..band.
    """

    half: np.ndarray
    alpha_hint: float = 0.0
    asymmetry: float = 0.0
    name: str = ""

    def __post_init__(self):
        half = np.array(self.half, dtype=complex).ravel()
        if half.size == 0:
            half = np.zeros(1, dtype=complex)
        nz = np.flatnonzero(half)
        half = half[: (nz[-1] + 1 if nz.size else 1)].copy()
        half.setflags(write=False)
        object.__setattr__(self, "half", half)
        if self.alpha_hint < 0:
            raise ValueError("alpha_hint must be nonnegative")

    @property
    def band(self) -> int:
        return self.half.size - 1

    @property
    def coeffs(self) -> dict[int, complex]:
        out = {}
        for j, v in enumerate(self.half):
            if v != 0 or j == 0:
                out[j] = complex(v)
                if j:
                    out[-j] = complex(v)
        return out

    def coefficient(self, j: int) -> complex:
        j = abs(int(j))
        return complex(self.half[j]) if j <= self.band else 0j

    def weighted_norm(self, alpha: float) -> float:
        """sum_j |a_j| (1 + |j|)^alpha over all j."""
        j = np.arange(self.band + 1)
        w = np.abs(self.half) * (1.0 + j) ** alpha
        return float(w[0] + 2.0 * w[1:].sum())

    def shifted(self, c: complex) -> "FourierSymbol":
        half = self.half.copy()
        half[0] += c
        return FourierSymbol(half, self.alpha_hint, self.asymmetry, self.name)

    def __call__(self, psi, deriv_order: int = 0):
        return evaluate(self, psi, deriv_order)

    def __repr__(self):
        label = self.name or "symbol"
        return f"FourierSymbol({label!r}, band={self.band}, alpha_hint={self.alpha_hint})"


@dataclass(frozen=True)
class LoopValidationReport:
    is_symmetric: bool
    min_abs_g_prime_interior: float
    g_pp_at_0: complex
    g_pp_at_pi: complex
    arc_self_intersection: bool
    M0: complex
    M1: complex
    failures: tuple[str, ...] = field(default=())

    @property
    def valid(self) -> bool:
        return not self.failures


def from_coefficients(pairs, alpha_hint: float = 0.0, name: str = "") -> FourierSymbol:
    """Build a symbol from ``(j, a_j)`` pairs; missing partners count as zero."""
    table: dict[int, complex] = {}
    for j, v in pairs:
        j = int(j)
        if j in table:
            raise ValueError(f"duplicate coefficient index {j}")
        table[j] = complex(v)
    band = max((abs(j) for j in table), default=0)
    half = np.zeros(band + 1, dtype=complex)
    for j, v in table.items():
        partner = table.get(-j, 0j)
        if abs(v - partner) > SYMMETRY_TOL:
            raise AsymmetricCoefficients(
                f"a_{j} = {v} differs from a_{-j} = {partner}")
        half[abs(j)] = v
    return FourierSymbol(half, alpha_hint=alpha_hint, name=name)


def from_circle_samples(values, band_limit: int, alpha_hint: float = 0.0,
                        name: str = "") -> FourierSymbol:
    """Extract a_j, |j| <= band_limit, from samples at exp(2 pi i k / N).

    a_j = (1/N) sum_k values_k exp(-i j 2 pi k / N); a_j and a_{-j} are
    averaged and the largest pre-averaging mismatch is kept in ``asymmetry``.
    """
    vals = np.asarray(getattr(values, "values", values), dtype=complex)
    N = vals.size
    if N < 4 * band_limit:
        raise GridTooCoarse(f"grid of {N} samples cannot resolve band {band_limit}")
    c = np.fft.fft(vals) / N
    j = np.arange(1, band_limit + 1)
    pos, neg = c[j], c[-j]
    half = np.empty(band_limit + 1, dtype=complex)
    half[0] = c[0]
    half[1:] = 0.5 * (pos + neg)
    asym = float(np.max(np.abs(pos - neg))) if band_limit else 0.0
    return FourierSymbol(half, alpha_hint=alpha_hint, asymmetry=asym, name=name)


def truncate(sym: FourierSymbol, n: int) -> FourierSymbol:
    """Keep coefficients with |j| <= n - 1; T_n is unchanged."""
    if n < 1:
        raise ValueError("n must be positive")
    return FourierSymbol(sym.half[:n], sym.alpha_hint, sym.asymmetry, sym.name)


def evaluate(sym: FourierSymbol, psi, deriv_order: int = 0,
             c_strip: float = DEFAULT_C_STRIP):
    """k-th derivative of g(psi) = sum_j a_j exp(i j psi), psi possibly complex.

    Terms j and -j are combined before summation:
    a_j (ij)^k (e^{ij psi} + (-1)^k e^{-ij psi}).
    """
    k = int(deriv_order)
    if k < 0:
        raise ValueError("deriv_order must be >= 0")
    psi_arr = np.asarray(psi, dtype=complex)
    scalar = psi_arr.ndim == 0
    psi_arr = np.atleast_1d(psi_arr).ravel()
    band = sym.band
    if band > 0:
        limit = c_strip / band
        worst = float(np.max(np.abs(psi_arr.imag))) if psi_arr.size else 0.0
        if worst > 10.0 * limit:
            raise StripExceeded(
                f"|Im psi| = {worst:.3g} exceeds strip width {limit:.3g} by more than 10x")
    j = np.arange(1, band + 1)
    weight = 2.0 * sym.half[1:] * (1j * j) ** k
    out = np.empty(psi_arr.size, dtype=complex)
    chunk = max(1, 2_000_000 // max(band, 1))
    for lo in range(0, psi_arr.size, chunk):
        p = psi_arr[lo:lo + chunk, None] * j
        basis = np.cos(p) if k % 2 == 0 else 1j * np.sin(p)
        out[lo:lo + chunk] = basis @ weight
    if k == 0:
        out += sym.half[0]
    return complex(out[0]) if scalar else out.reshape(np.shape(psi))


def _segments_cross(p: np.ndarray) -> bool:
    """True if any two non-adjacent segments of the polyline p intersect."""
    a, b = p[:-1], p[1:]
    m = a.size
    if m < 3:
        return False

    def cross(u, v):
        return u.real * v.imag - u.imag * v.real

    A1, B1 = a[:, None], b[:, None]
    A2, B2 = a[None, :], b[None, :]
    scale = max(float(np.max(np.abs(p - p[0]))), 1e-300)
    eps = 1e-13 * scale * scale
    d1 = cross(B1 - A1, A2 - A1)
    d2 = cross(B1 - A1, B2 - A1)
    d3 = cross(B2 - A2, A1 - A2)
    d4 = cross(B2 - A2, B1 - A2)
    proper = (d1 * d2 < -eps * eps) & (d3 * d4 < -eps * eps)

    def inside(lo, hi, x):
        return (np.minimum(lo, hi) - 1e-13 * scale <= x) & (x <= np.maximum(lo, hi) + 1e-13 * scale)

    def on_seg(P, Q, R, d):
        return (np.abs(d) <= eps) & inside(P.real, Q.real, R.real) & inside(P.imag, Q.imag, R.imag)

    touch = (on_seg(A1, B1, A2, d1) | on_seg(A1, B1, B2, d2)
             | on_seg(A2, B2, A1, d3) | on_seg(A2, B2, B1, d4))
    idx = np.arange(m)
    nonadjacent = np.abs(idx[:, None] - idx[None, :]) > 1
    return bool(np.any((proper | touch) & nonadjacent))


def validate_simple_loop(sym: FourierSymbol, probe_count: int = 512) -> LoopValidationReport:
    """Check symmetry, nonvanishing g' on (0, pi), g'' at the ends, and a simple arc."""
    if probe_count < 64:
        raise ValueError("probe_count must be at least 64")
    phi = np.linspace(0.0, np.pi, probe_count + 1)
    interior = phi[1:-1]
    g = evaluate(sym, phi)
    g_mirror = evaluate(sym, 2 * np.pi - phi)
    scale = max(float(np.max(np.abs(g))), 1.0)
    is_symmetric = bool(np.max(np.abs(g - g_mirror)) <= 1e-12 * scale)
    gp = np.abs(evaluate(sym, interior, 1))
    min_gp = float(np.min(gp))
    # polish interior local minima so zeros between probes are not missed
    step = phi[1] - phi[0]
    for k in np.flatnonzero((gp[1:-1] <= gp[:-2]) & (gp[1:-1] <= gp[2:])) + 1:
        res = minimize_scalar(lambda x: abs(evaluate(sym, x, 1)), method="bounded",
                              bounds=(interior[k] - step, interior[k] + step),
                              options={"xatol": 1e-13})
        min_gp = min(min_gp, float(res.fun))
    g2_0 = evaluate(sym, 0.0, 2)
    g2_pi = evaluate(sym, np.pi, 2)
    M0, M1 = complex(g[0]), complex(g[-1])
    crossing = _segments_cross(g)

    tiny = 1e-12 * scale
    failures = []
    if not is_symmetric:
        failures.append("symbol is not symmetric: g(phi) != g(2 pi - phi)")
    if abs(M0 - M1) <= tiny:
        failures.append(f"arc endpoints coincide: M0 = M1 = {M0:.6g}")
    if min_gp <= 1e-6 * scale:
        failures.append("g' vanishes inside (0, pi)")
    if abs(g2_0) <= tiny:
        failures.append("g''(0) = 0")
    if abs(g2_pi) <= tiny:
        failures.append("g''(pi) = 0")
    if crossing:
        failures.append("image arc intersects itself")
    return LoopValidationReport(is_symmetric, min_gp, g2_0, g2_pi, crossing, M0, M1,
                                tuple(failures))


# -- builtin symbols -------------------------------------------------------

A1_C0 = 1 / 5 - 1j / 6
A1_C2 = 1 / 20
A1_C1 = (((1 - np.pi) + 0j) ** 1.5 - (np.pi + 1) ** 1.5) / (
    16 * np.pi * A1_C0 * np.cos(np.pi ** 2 * A1_C0))


def a1_function(phi, deriv_order: int = 0):
    """Closed-form boundary function of the example symbol on [-pi, pi].

    Complex powers use the principal branch, so (1 - phi)^(5/2) is
    i |1 - phi|^(5/2) for phi > 1.
    """
    p = np.asarray(phi, dtype=complex)
    up, dn = 1 + p, 1 - p
    if deriv_order == 0:
        return A1_C1 * np.sin(A1_C0 * p ** 2) + A1_C2 * (up ** 2.5 + dn ** 2.5)
    if deriv_order == 1:
        return (2 * A1_C0 * A1_C1 * p * np.cos(A1_C0 * p ** 2)
                + 2.5 * A1_C2 * (up ** 1.5 - dn ** 1.5))
    if deriv_order == 2:
        return (2 * A1_C0 * A1_C1 * np.cos(A1_C0 * p ** 2)
                - 4 * A1_C0 ** 2 * A1_C1 * p ** 2 * np.sin(A1_C0 * p ** 2)
                + 3.75 * A1_C2 * (up ** 0.5 + dn ** 0.5))
    raise ValueError("deriv_order must be 0, 1 or 2")


def example_symbol_a1(grid_size: int = 8192, band: int = 1024) -> FourierSymbol:
    """FFT-extracted coefficients of the complex simple-loop example symbol."""
    if grid_size & (grid_size - 1):
        raise GridTooCoarse("grid_size must be a power of two")
    phi = 2 * np.pi * np.arange(grid_size) / grid_size
    phi = np.where(phi >= np.pi, phi - 2 * np.pi, phi)
    return from_circle_samples(a1_function(phi), band, alpha_hint=2.5, name="example-a1")


def tridiagonal() -> FourierSymbol:
    """a(t) = t + 1/t, i.e. g(phi) = 2 cos(phi)."""
    return from_coefficients([(1, 1), (-1, 1)], alpha_hint=float("inf"), name="tridiagonal")


BUILTINS = {
    "tridiagonal": tridiagonal,
    "example-a1": example_symbol_a1,
}


def load_symbol(path) -> FourierSymbol:
    """Read ``{"coeffs": [[j, re, im], ...], "alpha_hint": x}``."""
    path = Path(path)
    with path.open() as fh:
        doc = json.load(fh)
    try:
        pairs = [(int(j), complex(float(re), float(im))) for j, re, im in doc["coeffs"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed symbol file {path}: {exc}") from exc
    return from_coefficients(pairs, alpha_hint=float(doc.get("alpha_hint", 0.0)),
                             name=path.stem)


def dump_symbol(sym: FourierSymbol, path) -> None:
    rows = [[j, v.real, v.imag] for j, v in sorted(sym.coeffs.items())]
    alpha = sym.alpha_hint if np.isfinite(sym.alpha_hint) else 1e308
    with Path(path).open("w") as fh:
        json.dump({"coeffs": rows, "alpha_hint": alpha}, fh, indent=1)


def resolve_symbol(source: str, **kwargs) -> FourierSymbol:
    """Builtin name or path to a JSON symbol file."""
    if source in BUILTINS:
        return BUILTINS[source](**kwargs) if kwargs and source == "example-a1" else BUILTINS[source]()
    return load_symbol(source)
