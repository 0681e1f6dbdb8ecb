"""Tabular reports, deterministic CSV/JSON writers and figure rendering."""

from __future__ import annotations

import io
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .asymptotics import SolverConfig, SpectrumEstimate, full_spectrum
from .oracle import build_toeplitz, eigenvalues, pair_spectra
from .symbol import FourierSymbol, evaluate

SCHEMA_VERSION = 1
FLOAT_FORMAT = "%.17g"

# reference maximal relative errors of the first- and second-order estimates
REFERENCE_DELTAS = {
    20: (3.2e-3, 3.9e-4),
    40: (8.8e-4, 5.6e-5),
    80: (2.3e-4, 7.2e-6),
    160: (5.9e-5, 9.2e-7),
    320: (1.5e-5, 1.2e-7),
}
TABLE_NS = tuple(REFERENCE_DELTAS)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    return FLOAT_FORMAT % float(value)


def expand_complex(columns: dict) -> dict:
    """Split complex columns into re_/im_ pairs, keeping order."""
    out = {}
    for name, values in columns.items():
        arr = np.asarray(values)
        if np.iscomplexobj(arr):
            out[f"re_{name}"] = arr.real
            out[f"im_{name}"] = arr.imag
        else:
            out[name] = arr
    return out


def csv_text(columns: dict) -> str:
    cols = expand_complex(columns)
    names = list(cols)
    length = len(next(iter(cols.values()))) if cols else 0
    buf = io.StringIO()
    buf.write(",".join(names) + "\n")
    for k in range(length):
        buf.write(",".join(_fmt(cols[c][k].item() if hasattr(cols[c][k], "item") else cols[c][k])
                           for c in names) + "\n")
    return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def json_text(payload: dict) -> str:
    return json.dumps({"schema": SCHEMA_VERSION, **_jsonable(payload)}, indent=1) + "\n"


def emit(text: str, out: str | None) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
        return
    Path(out).write_text(text)


def spectrum_columns(est: SpectrumEstimate, order: str = "all") -> dict:
    cols = {"j": est.column("j"), "d_jn": est.column("d_jn"),
            "s_jn": est.column("s_jn").astype(complex)}
    keys = ["0", "1", "2", "fixed"] if order == "all" else [order]
    for k in keys:
        name = "lambda_fixed" if k == "fixed" else f"lambda_order{k}"
        cols[name] = est.lambdas(k)
    return cols


def table1_row(sym: FourierSymbol, n: int, cfg: SolverConfig | None = None) -> dict:
    est = full_spectrum(sym, n, cfg)
    oracle = eigenvalues(build_toeplitz(sym, n))
    rep = pair_spectra(oracle, est, "fixed")
    ref1, ref2 = REFERENCE_DELTAS.get(n, (np.nan, np.nan))
    lam0 = pair_spectra(oracle, est, 0).delta
    return {
        "n": n,
        "delta0": lam0,
        "delta1": rep.delta1,
        "delta2": rep.delta2,
        "delta_fixed": rep.delta,
        "ref_delta1": ref1,
        "ref_delta2": ref2,
        "ratio1": rep.delta1 / ref1,
        "ratio2": rep.delta2 / ref2,
    }


def table1(sym: FourierSymbol, n_list=TABLE_NS, cfg: SolverConfig | None = None,
           parallel: int = 1) -> list[dict]:
    """Error table over dimensions; rows come back in ``n_list`` order."""
    if parallel > 1:
        with ThreadPoolExecutor(parallel) as pool:
            return list(pool.map(lambda n: table1_row(sym, n, cfg), n_list))
    return [table1_row(sym, n, cfg) for n in n_list]


def rows_to_columns(rows: list[dict]) -> dict:
    return {k: np.array([r[k] for r in rows]) for k in rows[0]} if rows else {}


def loglog_slope(n, values) -> float:
    return float(np.polyfit(np.log(np.asarray(n, float)), np.log(np.asarray(values, float)), 1)[0])


def curve_polyline(sym: FourierSymbol, samples: int = 1024):
    phi = np.linspace(0.0, np.pi, samples)
    return phi, evaluate(sym, phi)


def plot_table(rows: list[dict], path) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    n = np.array([r["n"] for r in rows])
    fig, ax = plt.subplots(figsize=(5, 4))
    for key, ref, label, marker in (("delta1", "ref_delta1", "first order", "o"),
                                    ("delta2", "ref_delta2", "second order", "s")):
        ax.loglog(n, [r[key] for r in rows], marker=marker, label=f"{label} (computed)")
        ax.loglog(n, [r[ref] for r in rows], marker=marker, ls="--", mfc="none",
                  label=f"{label} (reference)")
    ax.set_xlabel("n")
    ax.set_ylabel("max relative error")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_spectrum(curve, oracle_values, estimates, path, title: str = "") -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(curve.real, curve.imag, lw=1, color="0.4", label="g([0, pi])")
    ax.plot(oracle_values.real, oracle_values.imag, "o", mfc="none", ms=6, label="dense")
    ax.plot(estimates.real, estimates.imag, "x", ms=4, label="asymptotic")
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plotdata(sym: FourierSymbol, n: int, cfg: SolverConfig | None = None, samples: int = 1024):
    """Curve polyline plus oracle and asymptotic eigenvalues as one long table."""
    phi, curve = curve_polyline(sym, samples)
    oracle = eigenvalues(build_toeplitz(sym, n)).eigenvalues
    oracle = oracle[np.lexsort((oracle.imag, oracle.real))]
    est = full_spectrum(sym, n, cfg).lambdas("fixed")
    kind = (["curve"] * phi.size + ["oracle"] * oracle.size + ["asymptotic"] * est.size)
    param = np.concatenate([phi, np.full(oracle.size, np.nan), np.arange(1, est.size + 1)])
    values = np.concatenate([curve, oracle, est])
    return {"kind": np.array(kind), "param": param, "value": values}, (curve, oracle, est)
