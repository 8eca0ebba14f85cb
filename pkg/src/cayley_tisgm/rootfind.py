"""Positive real-root isolation and bracketed root refinement.

Isolation uses a Sturm sequence computed in exact rational arithmetic from the
(exactly representable) float coefficients, so sign counts are never corrupted
by cancellation when roots cluster near a critical parameter value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

DEFAULT_TOL = 1e-11
MULTIPLICITY_RTOL = 1e-7
TANGENT_RTOL = 1e-10


class RootFindingError(RuntimeError):
    """Raised when isolation or refinement cannot complete."""


@dataclass(frozen=True)
class Polynomial:
    """Real polynomial stored with coefficients in ascending degree order."""

    coeffs: tuple

    def __init__(self, coeffs: Sequence[float]):
        c = [float(x) for x in coeffs]
        while len(c) > 1 and c[-1] == 0.0:
            c.pop()
        if not c:
            c = [0.0]
        object.__setattr__(self, "coeffs", tuple(c))

    @classmethod
    def from_descending(cls, coeffs: Sequence[float]) -> "Polynomial":
        return cls(list(coeffs)[::-1])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return self.degree == 0 and self.coeffs[0] == 0.0

    def __call__(self, x):
        acc = 0.0 * x
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def deriv(self) -> "Polynomial":
        if self.degree == 0:
            return Polynomial([0.0])
        return Polynomial([i * c for i, c in enumerate(self.coeffs)][1:])

    def scale(self) -> float:
        return max(abs(c) for c in self.coeffs)


@dataclass(frozen=True)
class RootSet:
    roots: tuple  # ((value, multiplicity), ...) strictly increasing
    tolerance: float

    @property
    def values(self) -> list:
        return [r for r, _ in self.roots]

    def count(self, with_multiplicity: bool = True) -> int:
        if with_multiplicity:
            return sum(m for _, m in self.roots)
        return len(self.roots)

    def __len__(self):
        return len(self.roots)


def _as_poly(p) -> Polynomial:
    return p if isinstance(p, Polynomial) else Polynomial(p)


def descartes_positive_bound(p) -> int:
    """Number of sign changes in the nonzero coefficients of ``p``."""
    p = _as_poly(p)
    if p.is_zero():
        raise ValueError("zero polynomial")
    signs = [c > 0 for c in p.coeffs if c != 0.0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


# exact rational helpers, ascending coefficient lists

def _trim(a: list) -> list:
    while len(a) > 1 and a[-1] == 0:
        a.pop()
    return a


def _rem(a: list, b: list) -> list:
    a = list(a)
    db = len(b) - 1
    lead = b[-1]
    while len(a) - 1 >= db and any(a):
        shift = len(a) - 1 - db
        f = a[-1] / lead
        for i, bc in enumerate(b):
            a[i + shift] -= f * bc
        a.pop()
        _trim(a)
        if len(a) - 1 < db:
            break
    return _trim(a) if a else [Fraction(0)]


def _normalise(a: list) -> list:
    lead = abs(a[-1])
    return [c / lead for c in a]


def _sturm_chain(coeffs: list) -> list:
    p = _normalise(coeffs)
    dp = _trim([i * c for i, c in enumerate(p)][1:])
    chain = [p, _normalise(dp)]
    while len(chain[-1]) > 1:
        r = _rem(chain[-2], chain[-1])
        if len(r) == 1 and r[0] == 0:
            break
        chain.append(_normalise([-c for c in r]))
    return chain


def _eval_exact(a: list, x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(a):
        acc = acc * x + c
    return acc


def _variations(chain: list, x: Fraction) -> int:
    vals = [_eval_exact(a, x) for a in chain]
    signs = [v > 0 for v in vals if v != 0]
    return sum(1 for s, t in zip(signs, signs[1:]) if s != t)


def _cauchy_bound(coeffs: Sequence[float]) -> float:
    lead = abs(coeffs[-1])
    return 1.0 + max(abs(c) / lead for c in coeffs[:-1])


def positive_roots(p, tol: float = DEFAULT_TOL, max_iter: int = 20000, tangent: bool = True) -> RootSet:
    """All roots of ``p`` in ``(0, inf)`` with multiplicities.

    Sturm counting isolates each distinct root on ``(0, B]`` with ``B`` the Cauchy
    bound. Roots with a sign change are polished by Brent's method; even
    multiplicity roots are refined by exact Sturm bisection. A root whose
    derivative falls below ``1e-7 * max|coeff| * max(1, r)**(deg-1)`` is reported
    as a double root, and two such roots closer than ``1e-7`` are merged.

    With ``tangent`` a positive critical point where ``|p|`` is below
    ``1e-10 * sum |a_i| r^i`` and no root lies nearby is also
    reported as a double root, so tangencies lost to rounding are kept.
    """
    p = _as_poly(p)
    if p.is_zero():
        raise ValueError("zero polynomial")
    if tol <= 0:
        raise ValueError("tol must be positive")
    coeffs = list(p.coeffs)
    while coeffs[0] == 0.0 and len(coeffs) > 1:
        coeffs.pop(0)  # zero is not a positive root
    if len(coeffs) == 1:
        return RootSet((), tol)
    q = Polynomial(coeffs)
    exact = [Fraction(c) for c in coeffs]
    chain = _sturm_chain(exact)
    hi = Fraction(_cauchy_bound(coeffs))
    lo = Fraction(0)
    total = _variations(chain, lo) - _variations(chain, hi)
    isolated = []
    stack = [(lo, hi, total)]
    steps = 0
    while stack:
        a, b, n = stack.pop()
        if n <= 0:
            continue
        if n == 1:
            isolated.append((a, b))
            continue
        steps += 1
        if steps > max_iter:
            raise RootFindingError("iteration budget exhausted while isolating roots")
        mid = (a + b) / 2
        if float(b - a) < tol * 1e-3 * max(1.0, float(b)):
            # unresolved cluster; keep as a single multiple root
            isolated.append((a, b))
            continue
        if _eval_exact(exact, mid) == 0:
            mid = a + (b - a) * Fraction(513, 1024)
        vm = _variations(chain, mid)
        stack.append((mid, b, vm - _variations(chain, b)))
        stack.append((a, mid, _variations(chain, a) - vm))

    dq = q.deriv()
    scale = q.scale()
    deg = q.degree
    found = []
    for a, b in sorted(isolated):
        if a == b:
            r = float(a)
        else:
            fa, fb = _eval_exact(exact, a), _eval_exact(exact, b)
            if fa == 0:
                r = float(a)
            elif fb == 0:
                r = float(b)
            elif (fa > 0) != (fb > 0):
                r = brentq(q, float(a), float(b), xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=500)
            else:
                r = _refine_even(chain, a, b, tol, max_iter)
        thresh = MULTIPLICITY_RTOL * scale * max(1.0, abs(r)) ** (deg - 1)
        mult = 2 if abs(dq(r)) <= thresh else 1
        if a != b and mult == 1:
            fa, fb = _eval_exact(exact, a), _eval_exact(exact, b)
            if fa != 0 and fb != 0 and (fa > 0) == (fb > 0):
                mult = 2
        found.append([r, mult])

    merged = []
    for r, m in found:
        if merged:
            r0, m0 = merged[-1]
            near = abs(r - r0) <= MULTIPLICITY_RTOL * max(1.0, abs(r))
            if near:
                merged[-1] = [0.5 * (r0 + r), max(2, m0 + m)]
                continue
        merged.append([r, m])
    if tangent and deg >= 2:
        for c, _ in positive_roots(dq, tol, max_iter, tangent=False).roots:
            if abs(q(c)) > TANGENT_RTOL * sum(abs(a) * c ** i for i, a in enumerate(coeffs)):
                continue
            if any(abs(c - r) <= 1e-5 * max(1.0, c) for r, _ in merged):
                continue
            merged.append([c, 2])
        merged.sort()
    return RootSet(tuple((float(r), int(m)) for r, m in merged), tol)


def _refine_even(chain: list, a: Fraction, b: Fraction, tol: float, max_iter: int) -> float:
    for _ in range(max_iter):
        if float(b - a) <= tol:
            break
        mid = (a + b) / 2
        left = _variations(chain, a) - _variations(chain, mid)
        if _eval_exact(chain[0], mid) == 0:
            return float(mid)
        if left >= 1:
            b = mid
        else:
            a = mid
    return float((a + b) / 2)


def bracket_root(f: Callable[[float], float], lo: float, hi: float, tol: float = DEFAULT_TOL) -> float:
    """Root of ``f`` inside ``[lo, hi]`` by Brent's method; needs a sign change."""
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return float(lo)
    if fhi == 0:
        return float(hi)
    if (flo > 0) == (fhi > 0):
        raise ValueError(f"no sign change on [{lo}, {hi}]")
    return float(brentq(f, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=1000))


def bisect_step(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-10) -> float:
    """Locate the jump of a piecewise-constant ``f`` between ``lo`` and ``hi``."""
    flo, fhi = f(lo), f(hi)
    if flo == fhi:
        raise ValueError(f"no change of value on [{lo}, {hi}]")
    while hi - lo > tol * max(1.0, abs(hi)):
        mid = 0.5 * (lo + hi)
        if f(mid) == flo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def poly_from_roots(roots: Sequence[float], lead: float = 1.0) -> Polynomial:
    return Polynomial(lead * np.polynomial.polynomial.polyfromroots(list(roots)))


def isclose_roots(a: Sequence[float], b: Sequence[float], tol: float) -> bool:
    return len(a) == len(b) and all(math.isclose(x, y, rel_tol=0, abs_tol=tol) for x, y in zip(a, b))
