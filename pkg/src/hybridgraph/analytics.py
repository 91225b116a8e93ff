"""Closed-form success probabilities, rates and resource counts.

Covers boosted fusion and its optimal allocation, 2D and d-dimensional
cluster generation, (encoded) rings, the ancilla-assisted and
repeat-until-success comparison schemes, and the three-factory multiplexing
calculus. Large powers are evaluated in log space.
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from scipy import stats

__all__ = [
    "M_CAP",
    "p_boosted",
    "improvement_factor",
    "m_opt",
    "m_opt_info",
    "p_cluster_2d",
    "p_allphotonic_2d",
    "t_ext",
    "rate_2d",
    "rate_ratio",
    "n_fusions_ddim",
    "p_cluster_ddim",
    "p_ring",
    "p_ring_encoded",
    "grice_ladder",
    "evl_ladder",
    "p_grice",
    "p_evl",
    "p_rus",
    "best_grice",
    "best_evl",
    "FactoryConfig",
    "factory_probabilities",
    "factory_success",
    "factory_sizing",
    "figure_data",
    "write_table",
    "read_table",
    "table_to_csv",
]

M_CAP = 30
_LOG_SWITCH = 50
_TIE = 1e-12


def _check_eta(eta: float, name: str = "eta") -> float:
    eta = float(eta)
    if not (0.0 <= eta <= 1.0) or math.isnan(eta):
        raise ValueError(f"{name} must lie in [0, 1], got {eta}")
    return eta


def _power(p: float, e: float) -> float:
    """``p**e`` with a log-space path for large exponents."""
    if e == 0:
        return 1.0
    if p <= 0.0:
        return 0.0
    if e > _LOG_SWITCH:
        return math.exp(e * math.log(p))
    return p**e


# -- boosted fusion ----------------------------------------------------------------
def p_boosted(m: int, eta: float) -> float:
    """``(1 - 2^-m) eta^(2m)``."""
    if int(m) != m or m < 1:
        raise ValueError("m must be a positive integer")
    eta = _check_eta(eta)
    return (1.0 - 2.0 ** (-m)) * _power(eta, 2 * m)


def improvement_factor(m: int) -> float:
    """``f(m) = (1 - 2^-m) / (1 - 2^-(m+1))``, with ``f(0) = 0``."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    if m == 0:
        return 0.0
    return (1.0 - 2.0 ** (-m)) / (1.0 - 2.0 ** (-(m + 1)))


def m_opt_info(eta: float, m_cap: int = M_CAP) -> tuple[int, bool]:
    """Optimal allocation and whether it hit ``m_cap``.

    Returns the smallest ``m`` with ``eta^2 <= f(m)``: adding a pair pays
    only when ``eta^2 > f(m)``. At a boundary ``eta^2 = f(m)`` the two
    allocations tie and the smaller one is returned.
    """
    eta = _check_eta(eta)
    if eta == 0.0:
        raise ValueError("eta must be positive")
    e2 = eta * eta
    for m in range(1, m_cap + 1):
        if e2 <= improvement_factor(m) + _TIE:
            return m, False
    return m_cap, True


def m_opt(eta: float, m_cap: int = M_CAP) -> int:
    return m_opt_info(eta, m_cap)[0]


# -- clusters and rings ----------------------------------------------------------------
def p_cluster_2d(n1: int, n2: int, m: int, eta: float) -> float:
    """``P_B(m, eta)^(n1 (n2 - 1))``."""
    _counts(n1, n2)
    return _power(p_boosted(m, eta), n1 * (n2 - 1))


def p_allphotonic_2d(n1: int, n2: int, eta: float) -> float:
    """Every edge of the grid heralded independently with ``eta^2 / 2``."""
    _counts(n1, n2)
    eta = _check_eta(eta)
    edges = n1 * (n2 - 1) + n2 * (n1 - 1)
    return _power(eta * eta / 2.0, edges)


def _counts(*ns: int) -> None:
    for n in ns:
        if int(n) != n or n < 1:
            raise ValueError("counts must be positive integers")


def t_ext(m: int, n1: int, T_emit: float = 1.0, T_h: float = 0.0) -> float:
    """Time to emit one redundant linear cluster of ``n1`` vertices with
    ``2m + 1`` photons each: ``n1 ((2m + 1) T_emit + T_h)``."""
    if T_emit < 0 or T_h < 0:
        raise ValueError("durations must be nonnegative")
    return n1 * ((2 * m + 1) * T_emit + T_h)


def rate_2d(n1: int, n2: int, m: int, eta: float, T_emit: float = 1.0, T_h: float = 0.0) -> float:
    t = t_ext(m, n1, T_emit, T_h)
    if t <= 0:
        raise ValueError("generation time must be positive")
    return p_cluster_2d(n1, n2, m, eta) / t


def rate_ratio(n1: int, n2: int, eta: float, T_emit: float = 1.0, T_h: float = 0.0, m_cap: int = M_CAP) -> float:
    """Rate with the optimal allocation over the rate with plain type II (m = 1).

    Evaluated in log space so that tiny probabilities do not underflow.
    """
    m = m_opt(eta, m_cap)
    e = n1 * (n2 - 1)
    log_r = e * (math.log(p_boosted(m, eta)) - math.log(p_boosted(1, eta)))
    log_r -= math.log(t_ext(m, n1, T_emit, T_h)) - math.log(t_ext(1, n1, T_emit, T_h))
    return math.exp(log_r) if log_r < 709.0 else math.inf


def n_fusions_ddim(dims: Sequence[int]) -> int:
    """``sum_{i >= 2} (n_i - 1) prod_{j != i} n_j``."""
    dims = [int(d) for d in dims]
    if not dims:
        raise ValueError("dims must be nonempty")
    _counts(*dims)
    total = 0
    for i in range(1, len(dims)):
        total += (dims[i] - 1) * math.prod(dims[:i] + dims[i + 1 :])
    return total


def p_cluster_ddim(dims: Sequence[int], m: int, eta: float) -> float:
    return _power(p_boosted(m, eta), n_fusions_ddim(dims))


def p_ring(k: int, m: int, eta: float) -> float:
    """Unencoded k-ring: a single boosted fusion."""
    if k < 3:
        raise ValueError("k must be at least 3")
    return p_boosted(m, eta)


def p_ring_encoded(k: int, n1: int, eta: float, m: int, n2: int | None = None) -> float:
    """``P_B(m, eta)^(1 + k(n1 - 1)) eta^(2k)``; ``n2`` is accepted and ignored."""
    if k < 3 or n1 < 2:
        raise ValueError("need k >= 3 and n1 >= 2")
    if n2 is not None and n2 < 1:
        raise ValueError("n2 must be positive")
    eta = _check_eta(eta)
    return _power(p_boosted(m, eta), 1 + k * (n1 - 1)) * _power(eta, 2 * k)


# -- comparison schemes -----------------------------------------------------------------
# Two ancilla-assisted Bell measurements (short names kept as the public API)
# and a repeat-until-success scheme.
def grice_ladder(max_ancillas: int = 4096) -> list[int]:
    """Ancilla counts of the first scheme: ``k = 2^(N+1) - 2``, ``N >= 0``
    (``k = 0`` is the plain Bell measurement)."""
    out, n = [], 0
    while (k := 2 ** (n + 1) - 2) <= max_ancillas:
        out.append(k)
        n += 1
    return out


def evl_ladder(max_ancillas: int = 4096) -> list[int]:
    """Ancilla counts of the second scheme: ``k = 2^(N+2) - 4``, ``N >= 0``."""
    out, n = [], 0
    while (k := 2 ** (n + 2) - 4) <= max_ancillas:
        out.append(k)
        n += 1
    return out


def _on_ladder(k: int, offset: int) -> bool:
    v = k + offset
    return k >= 0 and v >= offset and v & (v - 1) == 0


def p_grice(eta: float, eta_a: float, k: int) -> float:
    """``(k+1)/(k+2) eta^2 eta_a^k``."""
    if not _on_ladder(int(k), 2) or int(k) != k:
        raise ValueError(f"k={k} is not of the form 2^(N+1) - 2")
    eta, eta_a = _check_eta(eta), _check_eta(eta_a, "eta_a")
    return (k + 1) / (k + 2) * eta * eta * _power(eta_a, k)


def p_evl(eta: float, eta_a: float, k: int) -> float:
    """``(k+2)/(k+4) eta^2 eta_a^k``."""
    if not _on_ladder(int(k), 4) or int(k) != k:
        raise ValueError(f"k={k} is not of the form 2^(N+2) - 4")
    eta, eta_a = _check_eta(eta), _check_eta(eta_a, "eta_a")
    return (k + 2) / (k + 4) * eta * eta * _power(eta_a, k)


def p_rus(eta: float) -> float:
    """Repeat-until-success: ``eta^2 / (2 - eta^2)``."""
    eta = _check_eta(eta)
    return eta * eta / (2.0 - eta * eta)


def best_grice(eta: float, eta_a: float | None = None, max_ancillas: int = 4096) -> tuple[float, int]:
    """Best first-scheme success over its ladder, and the ancilla count achieving it."""
    eta_a = eta if eta_a is None else eta_a
    k = _argbest(p_grice, eta, eta_a, grice_ladder(max_ancillas))
    return p_grice(eta, eta_a, k), k


def best_evl(eta: float, eta_a: float | None = None, max_ancillas: int = 4096) -> tuple[float, int]:
    """Best second-scheme success over its ladder, and the ancilla count."""
    eta_a = eta if eta_a is None else eta_a
    ks = evl_ladder(max_ancillas)
    k = _argbest(p_evl, eta, eta_a, ks)
    return p_evl(eta, eta_a, k), k


def _argbest(fn, eta, eta_a, ks) -> int:
    best_k, best_p = ks[0], -1.0
    for k in ks:
        p = fn(eta, eta_a, k)
        if p > best_p:
            best_k, best_p = k, p
    return best_k


# -- factory multiplexing ------------------------------------------------------------------
@dataclass(frozen=True)
class FactoryConfig:
    k: int
    n1: int
    m: int
    n2: int = 1
    N_A: int = 0
    N_B: int = 0
    eps: float = 0.01

    def __post_init__(self):
        if self.k < 1 or self.n1 < 2 or self.n2 < 1 or self.m < 1:
            raise ValueError("need k >= 1, n1 >= 2, n2 >= 1, m >= 1")
        if self.N_A < 0 or self.N_B < 0:
            raise ValueError("multiplexing widths must be nonnegative")
        if not (0.0 < self.eps < 1.0):
            raise ValueError("eps must lie in (0, 1)")


def factory_probabilities(cfg: FactoryConfig, eta: float, strict: bool = False) -> dict[str, float]:
    """Per-trial success of factories A, B and C.

    ``strict`` additionally charges the ``k(m+1)`` ring photons that are not
    fused in factory A (not part of the published accounting).
    """
    pb = p_boosted(cfg.m, eta)
    p_a = pb
    if strict:
        p_a *= _power(eta, cfg.k * (cfg.m + 1))
    p_b = _power(pb, cfg.n1 - 2)
    p_c = _power(pb * eta * eta, cfg.k)
    return {"p_a": p_a, "p_b": p_b, "p_c": p_c}


def factory_success(cfg: FactoryConfig, eta: float, strict: bool = False) -> float:
    """Probability that the three factories deliver at least one encoded ring.

    ``sum_c [P_Cr(>=c) - P_Cr(>=c+1)] (1 - (1 - p_c)^c)`` with
    ``P_Cr(>=c) = P_A(>=c) * factory_b_supply(>=c)``; factory B must supply
    ``c`` full sets of ``k`` codes.
    """
    p = factory_probabilities(cfg, eta, strict)
    top = min(cfg.N_A, cfg.N_B)
    if top < 1:
        return 0.0
    c = np.arange(1, top + 2)
    p_a_ge = stats.binom.sf(c - 1, cfg.N_A, p["p_a"])
    supply_ge = stats.binom.sf(cfg.k * c - 1, cfg.N_B, p["p_b"])
    ge = p_a_ge * supply_ge
    exact = ge[:-1] - ge[1:]
    tries = 1.0 - np.power(1.0 - p["p_c"], c[:-1])
    return float(np.clip(np.sum(exact * tries), 0.0, 1.0))


def factory_sizing(cfg: FactoryConfig, eta: float, strict: bool = False) -> dict[str, float]:
    """``c_hat = ceil(ln eps / ln(1 - p_c))``, ``N_A = ceil(c_hat / p_a)``,
    ``N_B = ceil(k c_hat / p_b)``; also the extra trials per halving of eps."""
    p = factory_probabilities(cfg, eta, strict)
    if p["p_c"] <= 0.0 or p["p_a"] <= 0.0 or p["p_b"] <= 0.0:
        raise ValueError("a factory never succeeds; sizing diverges")
    if p["p_c"] >= 1.0:
        c_hat = 1
        halving = 0.0
    else:
        lq = math.log1p(-p["p_c"])
        c_hat = math.ceil(math.log(cfg.eps) / lq - 1e-12)
        halving = math.log(2.0) / abs(lq)
    n_a = math.ceil(c_hat / p["p_a"] - 1e-12)
    n_b = math.ceil(cfg.k * c_hat / p["p_b"] - 1e-12)
    return {**p, "c_hat": c_hat, "N_A": n_a, "N_B": n_b, "halving_trials": halving}


# -- figure tables ------------------------------------------------------------------------
def _grid(lo: float, hi: float, steps: int) -> np.ndarray:
    if steps < 1:
        raise ValueError("grid must be nonempty")
    return np.linspace(lo, hi, steps) if steps > 1 else np.array([lo])


def figure_data(which: str, **grid) -> list[dict]:
    """Rows of the boosted-fusion (``fig5``), cluster (``fig6``) or
    scheme-comparison (``fig9``) tables.

    Grid keywords: ``eta_min``, ``eta_max``, ``steps`` (fig5, fig9),
    ``m_values`` (fig5), ``sizes`` and ``etas`` (fig6), ``m_cap``,
    ``max_ancillas``, ``T_emit``, ``T_h``.
    """
    m_cap = int(grid.get("m_cap", M_CAP))
    rows: list[dict] = []
    if which == "fig5":
        etas = _grid(grid.get("eta_min", 0.5), grid.get("eta_max", 1.0), int(grid.get("steps", 101)))
        ms = list(grid.get("m_values", (1, 2, 3, 4, 5)))
        for eta in etas:
            mo, capped = m_opt_info(eta, m_cap)
            row = {
                "loss": 1.0 - eta,
                "eta": eta,
                "m_opt": mo,
                "m_capped": int(capped),
                "p_opt": p_boosted(mo, eta),
            }
            for m in ms:
                row[f"p_m{m}"] = p_boosted(m, eta)
            rows.append(row)
    elif which == "fig6":
        sizes = list(grid.get("sizes", range(3, 9)))
        etas = list(grid.get("etas", (0.90, 0.95, 0.99)))
        T_emit, T_h = grid.get("T_emit", 1.0), grid.get("T_h", 0.0)
        for eta in etas:
            mo, capped = m_opt_info(eta, m_cap)
            for n1 in sizes:
                for n2 in sizes:
                    rows.append(
                        {
                            "eta": eta,
                            "n1": n1,
                            "n2": n2,
                            "m_opt": mo,
                            "m_capped": int(capped),
                            "p_allphotonic": p_allphotonic_2d(n1, n2, eta),
                            "p_type2": p_cluster_2d(n1, n2, 1, eta),
                            "p_boosted": p_cluster_2d(n1, n2, mo, eta),
                            "rate_ratio": rate_ratio(n1, n2, eta, T_emit, T_h, m_cap),
                        }
                    )
    elif which == "fig9":
        etas = _grid(grid.get("eta_min", 0.5), grid.get("eta_max", 1.0), int(grid.get("steps", 101)))
        cap = int(grid.get("max_ancillas", 4096))
        for eta in etas:
            mo, capped = m_opt_info(eta, m_cap)
            pg, kg = best_grice(eta, eta, cap)
            pe, ke = best_evl(eta, eta, cap)
            rows.append(
                {
                    "eta": eta,
                    "m_opt": mo,
                    "m_capped": int(capped),
                    "p_boosted_opt": p_boosted(mo, eta),
                    "p_rus": p_rus(eta),
                    "p_grice_opt": pg,
                    "k_grice": kg,
                    "p_evl_opt": pe,
                    "k_evl": ke,
                }
            )
    else:
        raise ValueError(f"unknown figure {which!r}")
    return [{k: _plain(v) for k, v in r.items()} for r in rows]


def _plain(v):
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    return v


# -- table io ------------------------------------------------------------------------------
def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        return format(v, ".12g")
    return str(v)


def table_to_csv(rows: Sequence[Mapping]) -> str:
    """RFC 4180 CSV with a header row; floats to 12 significant digits."""
    if not rows:
        return ""
    buf = io.StringIO()
    fields = list(rows[0].keys())
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(fields)
    for r in rows:
        w.writerow([_fmt(r[f]) for f in fields])
    return buf.getvalue()


def table_to_json(rows: Sequence[Mapping]) -> str:
    return json.dumps([{k: float(_fmt(v)) if isinstance(v, float) else v for k, v in r.items()} for r in rows], indent=1)


def write_table(rows: Sequence[Mapping], path: str | Path, fmt: str | None = None) -> None:
    path = Path(path)
    fmt = fmt or ("json" if path.suffix == ".json" else "csv")
    if fmt == "csv":
        path.write_text(table_to_csv(rows), newline="")
    elif fmt == "json":
        path.write_text(table_to_json(rows) + "\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")


def _parse(s: str):
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def read_table(path: str | Path) -> list[dict]:
    """Read back a table written by :func:`write_table`."""
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".json":
        return json.loads(text)
    return parse_csv(text)


def parse_csv(text: str) -> list[dict]:
    reader = csv.DictReader(io.StringIO(text, newline=""))
    return [{k: _parse(v) for k, v in row.items()} for row in reader]


def config_dict(cfg: FactoryConfig) -> dict:
    return asdict(cfg)


def iter_sweep(spec: str) -> Iterable[int]:
    """Parse ``a..b`` or ``a..b..step`` or a comma list into integers."""
    spec = spec.strip()
    if ".." in spec:
        parts = [int(x) for x in spec.split("..")]
        if len(parts) == 2:
            lo, hi = parts
            step = 1
        elif len(parts) == 3:
            lo, hi, step = parts
        else:
            raise ValueError(f"bad range {spec!r}")
        if step < 1 or hi < lo:
            raise ValueError(f"bad range {spec!r}")
        return range(lo, hi + 1, step)
    return [int(x) for x in spec.split(",") if x]
