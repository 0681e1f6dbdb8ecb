import numpy as np
import pytest

from conftest import a1_estimate, a1_oracle
from tsleig import asymptotics
from tsleig.asymptotics import (SolverConfig, characteristic_residual, edge_lambda,
                                expansion_s, full_spectrum, grid_points, iterate_fixed_point,
                                lambda_estimates, make_phase, normal_displacement, solve_s)
from tsleig.errors import DuplicateRoot, MaxIterExceeded, NoContraction
from tsleig.oracle import build_toeplitz, eigenvalues, match, pair_spectra, relative_errors
from tsleig.symbol import from_coefficients, tridiagonal


def _slope(n, v):
    return np.polyfit(np.log(n), np.log(v), 1)[0]


def test_grid_points():
    assert grid_points(20, 1) == pytest.approx(np.pi / 21)
    assert np.allclose(grid_points(4), np.pi * np.arange(1, 5) / 5)


def test_solver_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(tol=0)
    with pytest.raises(ValueError):
        SolverConfig(max_iter=0)


def test_tridiagonal_is_exact():
    sym = tridiagonal()
    n = 12
    for j in (1, 6, 12):
        s, iters = solve_s(sym, n, j)
        assert s == np.pi * j / (n + 1)
        assert iters == 1
        for order in (1, 2):
            assert expansion_s(sym, n, j, order) == pytest.approx(np.pi * j / (n + 1), abs=0)
        rec = lambda_estimates(sym, n, j)
        exact = 2 * np.cos(np.pi * j / (n + 1))
        for value in (rec.lambda_order0, rec.lambda_order1, rec.lambda_order2, rec.lambda_fixed):
            assert value == pytest.approx(exact, abs=1e-14)
        point, offset = normal_displacement(sym, n, j)
        assert offset == 0 and point == pytest.approx(exact, abs=1e-14)


def test_index_range_checked():
    with pytest.raises(ValueError):
        solve_s(tridiagonal(), 10, 0)
    with pytest.raises(ValueError):
        solve_s(tridiagonal(), 10, 11)


def test_edge_formula():
    sym = tridiagonal()
    n, j = 50, np.array([1, 2, 3])
    left = edge_lambda(sym, n, j, "left")
    assert np.allclose(left, 2 - np.pi ** 2 * j ** 2 / (n + 1) ** 2, atol=1e-14)
    right = edge_lambda(sym, n, n + 1 - j, "right")
    assert np.allclose(right, -2 + np.pi ** 2 * j ** 2 / (n + 1) ** 2, atol=1e-14)
    assert edge_lambda(sym, n, 0) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        edge_lambda(sym, n, 1, "middle")


def test_small_n_uses_oracle():
    sym = from_coefficients([(0, 0.4 + 0.1j), (1, 1), (-1, 1)])
    one = full_spectrum(sym, 1)
    assert one.source == "oracle"
    assert one.lambdas("fixed")[0] == pytest.approx(0.4 + 0.1j)
    five = full_spectrum(tridiagonal(), 5)
    assert five.source == "oracle"
    assert np.allclose(five.lambdas(1), 2 * np.cos(np.pi * np.arange(1, 6) / 6), atol=1e-12)


def test_shift_covariance(a1):
    c = 0.25 - 0.5j
    base = full_spectrum(a1, 30)
    moved = full_spectrum(a1.shifted(c), 30)
    for order in (0, 1, 2, "fixed"):
        assert np.allclose(moved.lambdas(order), base.lambdas(order) + c, atol=1e-12)


def test_records_complete_and_sorted(a1):
    est = a1_estimate(20)
    assert [r.j for r in est.records] == list(range(1, 21))
    assert np.allclose(est.column("d_jn"), np.pi * np.arange(1, 21) / 21, rtol=0, atol=0)
    s = est.column("s_jn")
    gaps = np.abs(s[:, None] - s[None, :]) + np.eye(20)
    assert gaps.min() > 1e-3
    # the iteration starts at the one-step value e_jn
    assert np.allclose(est.column("e_jn"), expansion_s(a1, 20, np.arange(1, 21), 1))


def test_displacements_decay_geometrically(a1):
    phase = make_phase(a1, 20)
    res = iterate_fixed_point(phase, np.arange(1, 21))
    for hist in res.displacements:
        h = np.array([x for x in hist if x > 1e-11])
        assert np.all(h[1:] < 0.1 * h[:-1])


def test_fixed_point_against_oracle_middle_index(a1):
    rec = lambda_estimates(a1, 80, 40)
    oracle = a1_oracle(80).eigenvalues
    nearest = oracle[np.argmin(np.abs(oracle - rec.lambda_fixed))]
    assert abs(rec.lambda_fixed - nearest) / abs(nearest) < 2.3e-4


def test_second_order_expansion_tracks_root(a1):
    ns = np.array([40, 80, 160])
    err1, err2 = [], []
    for n in ns:
        phase = make_phase(a1, n)
        j = np.arange(1, n + 1)
        root = iterate_fixed_point(phase, j).s
        err1.append(np.max(np.abs(expansion_s(a1, n, j, 1, phase) - root)))
        err2.append(np.max(np.abs(expansion_s(a1, n, j, 2, phase) - root)))
    assert _slope(ns, err2) <= -2.5
    assert _slope(ns, err1) <= -1.8


def test_order_improvement(a1):
    for n in (20, 40, 80, 160, 320):
        oracle, est = a1_oracle(n), a1_estimate(n)
        deltas = [pair_spectra(oracle, est, k).delta for k in (0, 1, 2)]
        assert deltas[2] < deltas[1] < deltas[0]


def test_normal_displacement_error_is_second_order(a1):
    ns = np.array([40, 80, 160])
    errs = []
    for n in ns:
        oracle = a1_oracle(n).eigenvalues
        j = np.arange(n // 4, 3 * n // 4)
        phase = make_phase(a1, n)
        approx = np.array([sum(normal_displacement(a1, n, k, phase)) for k in j])
        errs.append(max(np.min(np.abs(oracle - v)) for v in approx))
    assert _slope(ns, errs) <= -1.8


def test_real_symbol_has_real_phase_and_spectrum():
    sym = from_coefficients([(0, 0), (1, 1), (-1, 1), (2, 0.125), (-2, 0.125)])
    n = 40
    phase = make_phase(sym, n)
    s = np.linspace(0.1, 3.0, 13)
    assert np.max(np.abs(phase(s).imag)) < 1e-14
    for j in (5, 20, 35):
        nd = normal_displacement(sym, n, j, phase)
        assert abs(nd.offset) < 1e-14
        assert nd.side == 0
    ev = eigenvalues(build_toeplitz(sym, n)).eigenvalues
    assert np.max(np.abs(ev.imag)) < 1e-10
    est = full_spectrum(sym, n)
    perm, _ = match(est.lambdas(2), ev)
    assert np.max(relative_errors(est.lambdas(2), ev[perm])) < 1e-3


def test_above_or_below_indicator(a1):
    nd = normal_displacement(a1, 80, 40)
    phase = make_phase(a1, 80)
    assert nd.side == int(np.sign(phase(grid_points(80, [40]))[0].imag))
    assert nd.side != 0


def test_gap_contrast():
    ns = np.array([40, 80, 160, 320])
    edge, inner = [], []
    for n in ns:
        lam = a1_estimate(n).lambdas("fixed")
        edge.append(np.min(np.abs(np.diff(lam[:3]))))
        mid = n // 2
        inner.append(np.min(np.abs(np.diff(lam[mid - 2:mid + 2]))))
    assert _slope(ns, edge) == pytest.approx(-2, abs=0.15)
    assert _slope(ns, inner) == pytest.approx(-1, abs=0.15)


def test_fixed_point_vs_order_one_rate():
    ns = np.array([40, 80, 160])
    diffs = []
    for n in ns:
        est = a1_estimate(n)
        diffs.append(np.max(np.abs(est.column("e_jn") - est.column("s_jn"))))
    assert _slope(ns, diffs) <= -1.8


def test_parallel_matches_serial(a1):
    serial = full_spectrum(a1, 40)
    threaded = full_spectrum(a1, 40, SolverConfig(workers=3))
    assert np.array_equal(serial.lambdas("fixed"), threaded.lambdas("fixed"))
    assert np.array_equal(serial.column("iterations"), threaded.column("iterations"))


class _Expanding:
    """Phase whose map doubles distances from a point other than d."""

    n = 10

    def __call__(self, s):
        return -2 * (self.n + 1) * (np.asarray(s) - 1.0)


def test_no_contraction_detected():
    with pytest.raises(NoContraction):
        iterate_fixed_point(_Expanding(), [3])


def test_max_iter_exceeded(a1):
    with pytest.raises(MaxIterExceeded):
        solve_s(a1, 30, 4, SolverConfig(max_iter=1))


def test_duplicate_roots_rejected(a1, monkeypatch):
    monkeypatch.setattr(asymptotics, "DUPLICATE_TOL", 1.0)
    with pytest.raises(DuplicateRoot):
        full_spectrum(a1, 20)


def test_residual_within_tolerance(a1):
    phase = make_phase(a1, 60)
    j = np.arange(1, 61)
    res = iterate_fixed_point(phase, j)
    assert np.max(characteristic_residual(phase, j, res.s)) <= 61 * 1e-12
