"""Counting TISGMs at fixed theta and locating the theta values where the count changes."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from math import comb

import numpy as np

from . import tisgm
from .model import ANTIFERRO, FERRO, ModelParams, big_theta, tau, tau_c, theta_c0, theta_cm_k2, theta_from_tau
from .rootfind import bisect_step, bracket_root

CASE_ORDER = {tag: i for i, tag in enumerate(tisgm.CASE_TAGS)}
DEDUP_TOL = 1e-8


@dataclass
class CensusReport:
    """Result of :func:`enumerate_tisgm`.

    ``total`` counts distinct normalised boundary laws, i.e. distinct TISGMs.
    ``formula_total`` applies the orbit-counting convention that charges every
    non-symmetric reduced solution ``2 C(q, m)`` and each free branch 2; it is
    kept for comparison and overcounts whenever orbits overlap.
    """

    theta: float
    q: int
    k: int
    entries: list
    total: int
    formula_total: int
    class_counts: dict
    partial: bool = False

    def to_dict(self) -> dict:
        return {
            "theta": self.theta,
            "q": self.q,
            "k": self.k,
            "total": self.total,
            "formula_total": self.formula_total,
            "partial": self.partial,
            "class_counts": {f"{tag}:m={m}": n for (tag, m), n in sorted(self.class_counts.items())},
            "entries": [
                {"m": s.m, "case_tag": s.case_tag, "branch": s.branch, "u": s.u, "v": s.v, "w": s.w,
                 "multiplicity": mult}
                for s, mult in self.entries
            ],
        }


@dataclass(frozen=True)
class CriticalValue:
    """A merged cluster of event locations."""

    theta: float
    kind: str
    cluster: tuple
    members: tuple = ()
    changes_count: bool | None = None
    counts: tuple = ()

    def __post_init__(self):
        if not self.cluster:
            raise ValueError("cluster must be nonempty")


def _all_solutions(params: ModelParams) -> tuple:
    sols = list(tisgm.solve_free(params))
    partial = params.k != 2
    for m in range(1, params.q // 2 + 1):
        sols += tisgm.solve_all(params, m)
    sols.sort(key=lambda s: (s.m if s.case_tag != "free" else -1, CASE_ORDER[s.case_tag], s.branch))
    return sols, partial


class _LawSet:
    """Normalised boundary laws kept in log space for relative deduplication."""

    def __init__(self, q: int, tol: float):
        self.rows = np.empty((0, 2 * q))
        self.tol = tol

    def add(self, law: tisgm.FullBoundaryLaw) -> bool:
        vec = np.log(np.concatenate([law.z_minus, law.z_plus]))
        if self.rows.shape[0] and np.min(np.max(np.abs(self.rows - vec), axis=1)) <= self.tol:
            return False
        self.rows = np.vstack([self.rows, vec])
        return True


def _is_common(s: tisgm.ReducedSolution) -> bool:
    return s.case_tag == "asym_wne1" and s.branch >= 2


def enumerate_tisgm(params: ModelParams, dedup_tol: float = DEDUP_TOL) -> CensusReport:
    """All TISGMs at ``params``; for ``k >= 3`` only the free and ``sym_w1`` families (partial).

    Each reduced solution, and its ``u <-> v`` mirror, is embedded on every
    ``m``-subset of coordinates. Entries carry the number of new distinct laws
    they contribute, so ``total`` is their sum.
    """
    q = params.q
    sols, partial = _all_solutions(params)
    seen = _LawSet(q, dedup_tol)
    entries, class_counts = [], {}
    for s in sols:
        class_counts[(s.case_tag, s.m)] = class_counts.get((s.case_tag, s.m), 0) + 1
        variants = [s] if abs(s.u - s.v) <= 1e-12 * max(1.0, s.u) else [s, s.swapped()]
        added = 0
        for var in variants:
            subsets = [None] if var.case_tag == "free" else tisgm.subsets(q, var.m)
            for sub in subsets:
                added += seen.add(tisgm.embed(var, sub, q=q))
        if added:
            entries.append((s, added))
    return CensusReport(params.theta, q, params.k, entries, sum(m for _, m in entries),
                        formula_count(sols, q), class_counts, partial)


def formula_count(sols, q: int) -> int:
    """``1 + 2 n_free + sum_m C(q,m) (n_sym_w1 + 2 n_other)`` over verified solutions.

    The common solutions built from the free roots are not part of this
    convention and are skipped.
    """
    total = 0
    for s in sols:
        if s.case_tag == "free":
            total += 1 if s.is_trivial() else 2
        elif s.case_tag == "sym_w1":
            total += comb(q, s.m)
        elif not _is_common(s):
            total += 2 * comb(q, s.m)
    return total


def count(theta: float, q: int = 5, k: int = 2) -> int:
    return enumerate_tisgm(ModelParams(k, q, theta)).total


# critical values

def _sym_wne1_fast_count(m: int, theta: float, q: int) -> int:
    """Number of admissible quartic roots, using companion-matrix eigenvalues."""
    params = ModelParams(2, q, theta)
    quartic = tisgm.sym_wne1_quartic(m, params)
    n = 0
    for r in np.roots(quartic.coeffs[::-1]):
        if abs(r.imag) > 1e-9 * max(1.0, abs(r)) or r.real <= 0:
            continue
        t = tisgm.t_of_z(r.real, m, params)
        if t > 0 and abs(t - 1.0) > 1e-9:
            n += 1
    return n


def _case3_branch(m: int, theta: float, q: int, which: int):
    """``(g, h)`` on branch ``which`` (0 = smaller h) or ``None`` where not real."""
    params = ModelParams(2, q, theta)
    c0, c1, c2 = tisgm.asym_w1_quadratic(m, params).coeffs
    disc = c1 * c1 - 4 * c0 * c2
    if disc < 0:
        return None
    h = (-c1 + (-1 if which == 0 else 1) * math.sqrt(disc)) / (2 * c2)
    d = theta - 1 / theta
    g = (m * h + (theta + 1 / theta + 2 * (q - m - 1))) / d
    return g, h


def event_functions(q: int, k: int = 2) -> dict:
    """Continuous functions of theta whose sign changes mark candidate critical values."""
    ev = {
        "theta_c0": lambda th: big_theta(th, q) - (k + 1) / (k - 1),
        "theta_cr": lambda th: tau(th) - tau_c(k, q),
    }
    if k != 2:
        return ev
    for m in range(1, q // 2 + 1):
        ev[f"sym_w1_disc:m={m}"] = lambda th, m=m: tisgm.sym_w1_discriminant(m, th, q)
        ev[f"asym_w1_disc:m={m}"] = lambda th, m=m: tisgm.asym_w1_discriminant(m, th, q)
        for b in (0, 1):
            def valid(th, m=m, b=b):
                gh = _case3_branch(m, th, q, b)
                return float("nan") if gh is None else 2 * gh[1] - gh[0] ** 2
            def positive(th, m=m, b=b):
                gh = _case3_branch(m, th, q, b)
                return float("nan") if gh is None else gh[0] ** 2 - gh[1]
            ev[f"asym_w1_2h-g2:m={m}:b={b}"] = valid
            ev[f"asym_w1_g2-h:m={m}:b={b}"] = positive
        ev[f"asym_wne1_disc:m={m}"] = lambda th, m=m: tisgm.case4_polys(th, q, m)[1]
    return ev


def count_functions(q: int, k: int = 2) -> dict:
    """Integer-valued functions whose jumps are also candidate critical values."""
    if k != 2:
        return {}
    return {f"sym_wne1_count:m={m}": (lambda th, m=m: _sym_wne1_fast_count(m, th, q))
            for m in range(1, q // 2 + 1)}


def raw_events(q: int = 5, k: int = 2, theta_lo: float = 1.0, theta_hi: float = 20.0,
               n_grid: int = 4000) -> list:
    """Sorted ``(theta, kind)`` pairs found on a uniform grid and refined by root bracketing."""
    if not 0 < theta_lo < theta_hi:
        raise ValueError("need 0 < theta_lo < theta_hi")
    grid = np.linspace(theta_lo, theta_hi, n_grid + 1)[1:]
    if theta_lo <= 1.0:
        grid = grid[grid > 1.0 + 1e-9]
    out = []
    for kind, f in event_functions(q, k).items():
        vals = np.array([f(t) for t in grid])
        for i in range(len(grid) - 1):
            a, b = vals[i], vals[i + 1]
            if not (np.isfinite(a) and np.isfinite(b)):
                continue
            if a == 0:
                out.append((float(grid[i]), kind))
            elif a * b < 0:
                out.append((bracket_root(f, grid[i], grid[i + 1]), kind))
    coarse = grid[::10]
    for kind, f in count_functions(q, k).items():
        vals = [f(t) for t in coarse]
        for i in range(len(coarse) - 1):
            if vals[i] != vals[i + 1]:
                out.append((_all_steps(f, coarse[i], coarse[i + 1]), kind))
    return sorted(out)


def _all_steps(f, lo: float, hi: float) -> float:
    return bisect_step(f, lo, hi, tol=1e-12)


def merge_events(events: list, merge_tol: float = 1e-3) -> list:
    """Single-linkage clustering of sorted ``(theta, kind)`` pairs."""
    clusters = []
    for th, kind in sorted(events):
        if clusters and th - clusters[-1][-1][0] <= merge_tol:
            clusters[-1].append((th, kind))
        else:
            clusters.append([(th, kind)])
    return clusters


def critical_scan(params: ModelParams, theta_lo: float = 1.0, theta_hi: float = 20.0,
                  merge_tol: float = 1e-3, n_grid: int = 4000, check_counts: bool = True) -> list:
    """Merged critical values on ``(theta_lo, theta_hi]``.

    Every raw event is kept, including those at which no solution is born or
    lost; ``changes_count`` tells them apart by comparing census totals on both
    sides of the cluster.
    """
    q, k = params.q, params.k
    out = []
    for cl in merge_events(raw_events(q, k, theta_lo, theta_hi, n_grid), merge_tol):
        thetas = [t for t, _ in cl]
        kinds = tuple(kd for _, kd in cl)
        th = float(np.mean(thetas))
        changes, counts = None, ()
        if check_counts:
            delta = 0.5 * (max(thetas) - min(thetas)) + 1e-5
            lo, at, hi = (count(x, q, k) for x in (th - delta, th, th + delta))
            counts = (lo, at, hi)
            changes = lo != hi or at != lo
        out.append(CriticalValue(th, kinds[0], kinds, tuple(thetas), changes, counts))
    return out


# lower bounds

REGIMES = ("high", "between", "cold", "at_cr", "at_cm")


def lower_bound_counts(q: int, ferro: bool, regime: str, m: int | None = None) -> int:
    """Guaranteed number of TISGMs in a temperature regime (any ``k >= 2``).

    ``regime`` is ``"high"`` (above every critical temperature), ``"between"``
    (strictly between ``T_{c,m+1}`` and ``T_{c,m}``), ``"cold"`` (below
    ``T_{c,[q/2]}`` and not at ``T_cr``), ``"at_cr"`` or ``"at_cm"`` (at
    ``T_{c,m}``).
    """
    base = 3 if ferro else 1
    half = q // 2
    if regime == "high":
        return 1
    if regime == "between":
        lo = 0 if ferro else 1
        if m is None or not lo <= m <= half - 1:
            raise ValueError(f"'between' needs m in [{lo}, {half - 1}]")
        return base + 2 * sum(comb(q, s) for s in range(1, m + 1))
    if regime == "cold":
        return 2 ** q + (1 if ferro else -1)
    if regime == "at_cr":
        n = 2 ** (q - 1) if q % 2 else 2 ** (q - 1) - comb(q - 1, q // 2)
        return n + (2 if ferro else 0)
    if regime == "at_cm":
        if m is None or not 1 <= m <= half:
            raise ValueError(f"'at_cm' needs m in [1, {half}]")
        return base + comb(q, m) + 2 * sum(comb(q, s) for s in range(1, m))
    raise ValueError(f"unknown regime {regime!r}; expected one of {REGIMES}")


def regime_of(params: ModelParams, tol: float = 1e-9) -> tuple:
    """``(regime, m)`` for ``k = 2`` from the position of theta among the critical values."""
    if params.k != 2:
        raise ValueError("regime classification uses the k = 2 critical values")
    q, th = params.q, params.theta
    ferro = th > 1
    sign = FERRO if ferro else ANTIFERRO
    # work with x >= 1 so that "colder" means "larger"
    x = th if ferro else 1 / th
    x_cr = theta_from_tau(tau_c(2, q))
    if abs(x - x_cr) <= tol * x_cr:
        return "at_cr", None
    cms = [theta_cm_k2(m, q, FERRO) for m in range(1, q // 2 + 1)]
    marks = ([theta_c0(2, q)] if ferro else []) + cms
    first_m = 0 if ferro else 1
    for i, c in enumerate(marks):
        m = first_m + i
        if abs(x - c) <= tol * c:
            if m == 0:
                return "between", 0
            return "at_cm", m
        if x < c:
            return ("high", None) if i == 0 else ("between", m - 1)
    return "cold", None


def to_json(reports, indent: int | None = 2) -> str:
    if isinstance(reports, CensusReport):
        reports = [reports]
    return json.dumps([r.to_dict() for r in reports], indent=indent)


def to_csv(reports) -> str:
    if isinstance(reports, CensusReport):
        reports = [reports]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["theta", "m", "case_tag", "branch", "u", "v", "w", "multiplicity"])
    for r in reports:
        for s, mult in r.entries:
            writer.writerow([f"{r.theta:.12g}", s.m, s.case_tag, s.branch,
                             f"{s.u:.12g}", f"{s.v:.12g}", f"{s.w:.12g}", mult])
    return buf.getvalue()
