"""Translation-invariant splitting Gibbs measures: reduced solutions and boundary laws.

A boundary law is the 2q-vector ``z[eps, i]`` (rows ``eps = -1, +1``) normalised so
that ``z[-1, q] = 1``. On the invariant set J_M with ``|M| = m`` it reduces to the
triple ``(u, v, w)``::

    u ... u  1 ... 1
    v ... v  w ... w

Every solver below derives candidates from an elimination chain and keeps only
those whose fixed-point residual is below :data:`RESIDUAL_TOL`.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

from .model import ModelParams, big_theta, tau
from .rootfind import Polynomial, RootFindingError, positive_roots

RESIDUAL_TOL = 1e-9
MERGE_TOL = 1e-7
_settings = {"residual_tol": RESIDUAL_TOL}
CASE_TAGS = ("free", "sym_w1", "sym_wne1", "asym_w1", "asym_wne1")


@dataclass(frozen=True)
class ReducedSolution:
    """One solution ``(u, v, w)`` of the reduced system for cardinality ``m``.

    ``root_multiplicity`` is 2 when two branch roots were merged at a tangency.
    Asymmetric solutions are stored once with ``u >= v``; the swapped triple is
    also a solution.
    """

    m: int
    u: float
    v: float
    w: float
    case_tag: str
    branch: int = 0
    root_multiplicity: int = 1

    def __post_init__(self):
        if self.case_tag not in CASE_TAGS:
            raise ValueError(f"unknown case tag {self.case_tag!r}")
        if not (self.u > 0 and self.v > 0 and self.w > 0):
            raise ValueError("u, v, w must be positive")

    @property
    def uvw(self) -> tuple:
        return (self.u, self.v, self.w)

    def swapped(self) -> "ReducedSolution":
        return ReducedSolution(self.m, self.v, self.u, self.w, self.case_tag, self.branch, self.root_multiplicity)

    def is_trivial(self, tol: float = 1e-9) -> bool:
        return max(abs(self.u - 1), abs(self.v - 1), abs(self.w - 1)) <= tol


@dataclass(frozen=True, eq=False)
class FullBoundaryLaw:
    """Positive boundary law; ``z_minus[-1] == 1``."""

    z_minus: np.ndarray
    z_plus: np.ndarray

    def __post_init__(self):
        zm = np.asarray(self.z_minus, dtype=float)
        zp = np.asarray(self.z_plus, dtype=float)
        if zm.shape != zp.shape or zm.ndim != 1:
            raise ValueError("rows must be 1-d arrays of equal length")
        if np.any(zm <= 0) or np.any(zp <= 0):
            raise ValueError("boundary law entries must be positive")
        object.__setattr__(self, "z_minus", zm)
        object.__setattr__(self, "z_plus", zp)

    @property
    def q(self) -> int:
        return self.z_minus.size

    def as_matrix(self) -> np.ndarray:
        return np.vstack([self.z_minus, self.z_plus])

    @classmethod
    def from_matrix(cls, mat, normalise: bool = True) -> "FullBoundaryLaw":
        mat = np.asarray(mat, dtype=float)
        if normalise:
            mat = mat / mat[0, -1]
        return cls(mat[0].copy(), mat[1].copy())

    def row_swapped(self) -> "FullBoundaryLaw":
        return FullBoundaryLaw.from_matrix(self.as_matrix()[::-1])

    def isclose(self, other: "FullBoundaryLaw", tol: float = 1e-8) -> bool:
        a, b = self.as_matrix(), other.as_matrix()
        return a.shape == b.shape and bool(np.all(np.abs(a - b) <= tol * np.maximum(1.0, np.abs(a))))


def set_residual_tol(tol: float) -> None:
    """Change the acceptance threshold used by every solver."""
    if not tol > 0:
        raise ValueError("tolerance must be positive")
    _settings["residual_tol"] = float(tol)


def residual_tol() -> float:
    return _settings["residual_tol"]


# fixed-point map

def _full_map(mat: np.ndarray, theta: float, k: int) -> np.ndarray:
    s = mat.sum()
    zm, zp = mat
    n_minus = s + (theta - 1.0) * zm + (1.0 / theta - 1.0) * zp
    n_plus = s + (1.0 / theta - 1.0) * zm + (theta - 1.0) * zp
    ref = n_minus[-1]
    return np.vstack([(n_minus / ref) ** k, (n_plus / ref) ** k])


def fixed_point_map(z: FullBoundaryLaw, params: ModelParams) -> FullBoundaryLaw:
    """Apply the translation-invariant compatibility map ``F`` once."""
    out = _full_map(z.as_matrix(), params.theta, params.k)
    return FullBoundaryLaw(out[0], out[1])


def reduced_map(x, params: ModelParams, m: int) -> np.ndarray:
    """Right-hand side of the reduced system on J_M for ``(u, v, w) = x``."""
    u, v, w = x
    th, q, k = params.theta, params.q, params.k
    den = m * u + m * v + (1 / th + q - m - 1) * w + th + q - m - 1
    return np.array([
        ((th + m - 1) * u + (1 / th + m - 1) * v + (q - m) * w + (q - m)) / den,
        ((1 / th + m - 1) * u + (th + m - 1) * v + (q - m) * w + (q - m)) / den,
        (m * u + m * v + (th + q - m - 1) * w + 1 / th + q - m - 1) / den,
    ]) ** k


def embed(sol: ReducedSolution, subset_M=None, swap_rows: bool = False, q: int | None = None) -> FullBoundaryLaw:
    """Place ``sol`` on the coordinates ``subset_M`` (0-based) of a q-column law.

    ``subset_M`` defaults to the first ``m`` columns. For the free family the
    subset is ignored. With ``swap_rows`` the two rows are exchanged and the
    result renormalised.
    """
    if q is None:
        raise ValueError("q is required")
    if sol.case_tag == "free" and sol.m in (0, q):
        subset = set(range(q)) if sol.m == q else set()
    else:
        subset = set(range(sol.m)) if subset_M is None else set(subset_M)
        if len(subset) != sol.m or not subset <= set(range(q)):
            raise ValueError(f"subset must contain {sol.m} coordinates in 0..{q - 1}")
    if swap_rows and (sol.u - sol.v) ** 2 + (sol.w - 1) ** 2 <= 1e-24:
        raise ValueError("row exchange of a symmetric w=1 solution is the identity")
    mat = np.empty((2, q))
    for i in range(q):
        mat[0, i] = sol.u if i in subset else 1.0
        mat[1, i] = sol.v if i in subset else sol.w
    if swap_rows:
        mat = mat[::-1]
    return FullBoundaryLaw.from_matrix(mat)


def residual(sol, params: ModelParams) -> float:
    """``max |F(z) - z|`` for a boundary law or an embedded reduced solution."""
    z = sol if isinstance(sol, FullBoundaryLaw) else embed(sol, q=params.q)
    mat = z.as_matrix()
    return float(np.max(np.abs(_full_map(mat, params.theta, params.k) - mat)))


def complement(sol: ReducedSolution, params: ModelParams) -> ReducedSolution:
    """Image ``(1/u, w/u, v/u)`` in the system for ``q - m``; same measure on ``M^c``."""
    u, v, w = sol.uvw
    return ReducedSolution(params.q - sol.m, 1.0 / u, w / u, v / u, sol.case_tag, sol.branch, sol.root_multiplicity)


def edge_weights(z: FullBoundaryLaw, params: ModelParams) -> np.ndarray:
    """Normalised two-site marginal as a ``2q x 2q`` array indexed ``(eta, i), (eps, j)``.

    Row/column index ``r`` encodes ``eta = -1`` for ``r < q`` and ``i = r mod q``.
    """
    q = z.q
    vec = np.concatenate([z.z_minus, z.z_plus])
    spins = np.repeat([-1, 1], q)
    same = np.equal.outer(np.tile(np.arange(q), 2), np.tile(np.arange(q), 2))
    expo = np.where(same, np.outer(spins, spins), 0)
    weights = np.outer(vec, vec) * params.theta ** expo
    return weights / weights.sum()


def edge_marginal(z: FullBoundaryLaw, params: ModelParams, spins) -> float:
    """Probability of ``((eta, i), (eps, j))`` on an edge; Potts indices are 0-based."""
    (eta, i), (eps, j) = spins
    if eta not in (-1, 1) or eps not in (-1, 1):
        raise ValueError("Ising spins must be -1 or +1")
    q = z.q
    r = (0 if eta == -1 else q) + i
    c = (0 if eps == -1 else q) + j
    return float(edge_weights(z, params)[r, c])


# solvers

def _polish(x, params: ModelParams, m: int, iters: int = 8) -> np.ndarray:
    """A few Newton steps on ``G(x) = map(x) - x`` in log coordinates."""
    y = np.log(np.asarray(x, dtype=float))
    best = y.copy()
    best_res = np.max(np.abs(reduced_map(np.exp(y), params, m) - np.exp(y)))
    for _ in range(iters):
        xv = np.exp(y)
        g = reduced_map(xv, params, m) - xv
        jac = np.empty((3, 3))
        for j in range(3):
            h = 1e-7 * max(1.0, abs(y[j]))
            yp = y.copy()
            yp[j] += h
            xp = np.exp(yp)
            jac[:, j] = ((reduced_map(xp, params, m) - xp) - g) / h
        try:
            step = np.linalg.solve(jac, -g)
        except np.linalg.LinAlgError:
            break
        if not np.all(np.isfinite(step)) or np.max(np.abs(step)) > 1e-3:
            break
        y = y + step
        res = np.max(np.abs(reduced_map(np.exp(y), params, m) - np.exp(y)))
        if res < best_res:
            best, best_res = y.copy(), res
        if res < 1e-15:
            break
    return np.exp(best)


def _verified(cands, params: ModelParams, m: int, case_tag: str) -> list:
    out = []
    for (u, v, w), branch, mult in cands:
        if not (u > 0 and v > 0 and w > 0) or not all(map(math.isfinite, (u, v, w))):
            continue
        x = _polish((u, v, w), params, m)
        sol = ReducedSolution(m, *map(float, x), case_tag, branch, mult)
        if residual(sol, params) < _settings["residual_tol"]:
            out.append(sol)
    return _merge_close(out)


def _merge_close(sols: list) -> list:
    kept = []
    for s in sols:
        for i, t in enumerate(kept):
            if max(abs(a - b) / max(1.0, abs(a)) for a, b in zip(s.uvw, t.uvw)) <= MERGE_TOL:
                kept[i] = ReducedSolution(t.m, t.u, t.v, t.w, t.case_tag, t.branch, 2)
                break
        else:
            kept.append(s)
    return kept


def _require_k2(params: ModelParams):
    if params.k != 2:
        raise ValueError("this case is solved for k = 2 only")


def _check_m(m: int, q: int):
    if not 1 <= m <= q // 2:
        raise ValueError(f"m must lie in [1, {q // 2}], got {m}")


def free_polynomial(params: ModelParams) -> Polynomial:
    """``u^(k+1) - Theta u^k + Theta u - 1`` in ascending order."""
    k, th = params.k, big_theta(params.theta, params.q)
    c = [0.0] * (k + 2)
    c[0], c[1], c[k], c[k + 1] = -1.0, th, -th, 1.0
    return Polynomial(c)


def free_cofactor(params: ModelParams) -> Polynomial:
    """Quotient of :func:`free_polynomial` by ``u - 1``."""
    k, th = params.k, big_theta(params.theta, params.q)
    return Polynomial([1.0] + [1.0 - th] * (k - 1) + [1.0])


def solve_free(params: ModelParams) -> list:
    """``w = 1`` plus, above the first critical value, the two roots ``z_* < 1 < z^*``."""
    sols = [ReducedSolution(0, 1.0, 1.0, 1.0, "free", 0)]
    roots = [r for r, _ in positive_roots(free_cofactor(params)).roots if abs(r - 1.0) > 1e-6]
    cands = [((1.0, 1.0, r ** params.k), i + 1, 1) for i, r in enumerate(sorted(roots))]
    for s in _verified(cands, params, 0, "free"):
        if not s.is_trivial(1e-6):
            sols.append(s)
    return sols


def sym_w1_polynomial(m: int, params: ModelParams) -> Polynomial:
    """``m z^k - (tau - 1) (z^(k-1) + ... + z) + (q - m)``."""
    k = params.k
    t = tau(params.theta)
    return Polynomial([params.q - m] + [-(t - 1.0)] * (k - 1) + [float(m)])


def sym_w1_radicals(m: int, params: ModelParams) -> list:
    """Closed-form ``k = 2`` roots ``((theta-1)^2 -/+ sqrt(D)) / (4 m theta)``."""
    th, q = params.theta, params.q
    d = th ** 4 - 4 * th ** 3 + (16 * m * m - 16 * m * q + 6) * th ** 2 - 4 * th + 1
    if d < 0:
        return []
    s = math.sqrt(d)
    return [((th - 1) ** 2 - s) / (4 * m * th), ((th - 1) ** 2 + s) / (4 * m * th)]


def sym_w1_discriminant(m: int, theta: float, q: int) -> float:
    return theta ** 4 - 4 * theta ** 3 + (16 * m * m - 16 * m * q + 6) * theta ** 2 - 4 * theta + 1


def solve_sym_w1(m: int, params: ModelParams) -> list:
    """Solutions with ``u = v`` and ``w = 1`` (any k)."""
    _check_m(m, params.q)
    rs = positive_roots(sym_w1_polynomial(m, params))
    cands = []
    for i, (z, mult) in enumerate(rs.roots):
        if abs(z - 1.0) <= 1e-6:
            continue  # coincides with the free solution
        cands.append(((z ** params.k, z ** params.k, 1.0), i, mult))
    return _verified(cands, params, m, "sym_w1")


def _sym_wne1_parts(m: int, params: ModelParams):
    th, q = params.theta, params.q
    a = (m - q + 1) * th ** 2 + (q + m - 2) * th + 1
    b = (q - m - 1) * th ** 2 + (q - m) * th + 1
    c = (m - q + 1) * th - 1
    d = (q - m) * th
    num = np.array([0.0, b, a])
    den = (th + 1) * np.array([d, c])
    return num, den, np.array([d, c])


def t_of_z(z: float, m: int, params: ModelParams) -> float:
    """``t = sqrt(w)`` as a rational function of ``z = sqrt(u)`` on the ``u = v`` branch."""
    num, den, _ = _sym_wne1_parts(m, params)
    return float(npoly.polyval(z, num) / npoly.polyval(z, den))


def sym_wne1_quartic(m: int, params: ModelParams) -> Polynomial:
    """Quartic in ``z`` for the ``u = v, w != 1`` branch, built by exact substitution.

    ``t(z)`` is substituted into the ``u``-equation, denominators are cleared and
    the spurious linear factor (the pole of ``t``) is divided out.
    """
    _require_k2(params)
    th, q = params.theta, params.q
    num, den, lin = _sym_wne1_parts(m, params)
    alpha = 1 / th + q - m - 1
    beta = th + q - m - 1
    gam = th + 1 / th + 2 * (m - 1)
    den2 = npoly.polymul(den, den)
    num2 = npoly.polymul(num, num)
    z = np.array([0.0, 1.0])
    z2 = np.array([0.0, 0.0, 1.0])
    lhs = npoly.polymul(z, npoly.polyadd(npoly.polyadd(2 * m * npoly.polymul(z2, den2), alpha * num2), beta * den2))
    rhs = npoly.polyadd(npoly.polyadd(gam * npoly.polymul(z2, den2), (q - m) * num2), (q - m) * den2)
    quintic = npoly.polysub(lhs, rhs)
    quot, rem = npoly.polydiv(quintic, lin)
    scale = np.max(np.abs(quintic))
    if np.max(np.abs(rem)) > 1e-9 * scale:
        raise ArithmeticError("pole factor does not divide the eliminant")
    quartic = Polynomial(quot)
    if quartic.degree != 4:
        raise ArithmeticError(f"eliminant has degree {quartic.degree}, expected 4")
    return quartic


def solve_sym_wne1(m: int, params: ModelParams) -> list:
    """Solutions with ``u = v`` and ``w != 1`` (k = 2, theta > 1)."""
    _require_k2(params)
    _check_m(m, params.q)
    if params.theta <= 1.0:
        return []
    quartic = sym_wne1_quartic(m, params)
    cands = []
    for i, (z, mult) in enumerate(positive_roots(quartic).roots):
        t = t_of_z(z, m, params)
        if not t > 0 or abs(t - 1.0) <= 1e-6:
            continue
        cands.append(((z * z, z * z, t * t), i, mult))
    return _verified(cands, params, m, "sym_wne1")


def asym_w1_quadratic(m: int, params: ModelParams) -> Polynomial:
    """Quadratic in ``h = z^2 + s^2`` for the ``u != v, w = 1`` branch."""
    th, q = params.theta, params.q
    c0 = th + 1 / th + 2 * (q - m - 1)
    a = th + 1 / th + 2 * (m - 1)
    d = th - 1 / th
    return Polynomial([c0 * c0 - 4 * d * (q - m), 2 * m * c0 - d * a, float(m * m)])


def asym_w1_gh(m: int, params: ModelParams) -> list:
    """Positive ``(g, h)`` pairs, ``g = z + s``, ordered by increasing ``h``."""
    th, q = params.theta, params.q
    c0 = th + 1 / th + 2 * (q - m - 1)
    d = th - 1 / th
    out = []
    for h, _ in positive_roots(asym_w1_quadratic(m, params)).roots:
        g = (m * h + c0) / d
        if g > 0:
            out.append((g, h))
    return out


def asym_w1_discriminant(m: int, theta: float, q: int) -> float:
    p = asym_w1_quadratic(m, ModelParams(2, q, theta)).coeffs
    return p[1] ** 2 - 4 * p[0] * p[2]


def case3_radicals_q5(theta: float, m: int) -> list:
    """The printed ``q = 5`` radicals for ``(g, h)``, ``+`` branch first."""
    th = theta
    if m == 1:
        d1 = th ** 5 - 3 * th ** 4 - 26 * th ** 3 + 30 * th ** 2 + 5 * th + 1
        r = math.sqrt((th + 1) * d1) if d1 >= 0 else float("nan")
        hs = [(th ** 4 - 2 * th ** 3 - 12 * th ** 2 - 2 * th - 1 + sg * (th - 1) * r) / (2 * th ** 2) for sg in (1, -1)]
        gs = [(th ** 3 + th ** 2 + th + 1 + sg * r) / (2 * (th + 1) * th) for sg in (1, -1)]
    elif m == 2:
        d1 = th ** 5 - 3 * th ** 4 - 46 * th ** 3 + 66 * th ** 2 + 13 * th + 1
        r = math.sqrt((th + 1) * d1) if d1 >= 0 else float("nan")
        hs = [(th ** 4 - 2 * th ** 3 - 16 * th ** 2 - 6 * th - 1 + sg * (th - 1) * r) / (8 * th ** 2) for sg in (1, -1)]
        gs = [((th + 1) ** 3 + sg * r) / (4 * (th + 1) * th) for sg in (1, -1)]
    else:
        raise ValueError("m must be 1 or 2 for q = 5")
    return list(zip(gs, hs))


def case3_d1_q5(theta: float, m: int) -> float:
    th = theta
    if m == 1:
        return th ** 5 - 3 * th ** 4 - 26 * th ** 3 + 30 * th ** 2 + 5 * th + 1
    return th ** 5 - 3 * th ** 4 - 46 * th ** 3 + 66 * th ** 2 + 13 * th + 1


def solve_asym_w1(m: int, params: ModelParams) -> list:
    """Solutions with ``u != v`` and ``w = 1`` (k = 2, theta > 1), stored with ``u > v``."""
    _require_k2(params)
    _check_m(m, params.q)
    if params.theta <= 1.0:
        return []
    cands = []
    for i, (g, h) in enumerate(asym_w1_gh(m, params)):
        disc = 2 * h - g * g
        if disc <= 1e-12 * max(1.0, h):
            continue  # z = s would be a symmetric solution
        r = math.sqrt(disc)
        z, s = 0.5 * (g + r), 0.5 * (g - r)
        if s <= 0:
            continue
        cands.append(((z * z, s * s, 1.0), i, 1))
    return _verified(cands, params, m, "asym_w1")


def case4_polys(theta: float, q: int, m: int) -> tuple:
    """The sextics ``P`` and ``D`` of the ``u != v, w != 1`` elimination, as printed."""
    th = theta
    P = (th ** 6 + 2 * (m - 1) * th ** 5 + (m * m + 2 * m * q - 2 * q * q - 2 * m + 4 * q - 3) * th ** 4
         + 2 * (m * m - m * q + 2 * q * q - 6 * q + 6) * th ** 3
         + (m * m - 2 * m * q - 2 * q * q + 12 * q - 13) * th ** 2 - 2 * (2 * q - 3) * th - 1)
    D = (th ** 6 + 2 * (m - 1) * th ** 5 + (m * m + 4 * m * q - 4 * q * q - 4 * m + 8 * q - 5) * th ** 4
         + 2 * (m * m - 2 * m * q + 4 * q * q + 2 * m - 12 * q + 10) * th ** 3
         + (m * m - 4 * m * q - 4 * q * q + 24 * q - 25) * th ** 2 - 2 * (4 * q + m - 7) * th - 3)
    return P, D


def case4_candidates(m: int, params: ModelParams) -> list:
    """Unfiltered triples from the printed ``w_{1,2}`` and the quadratic in ``u``."""
    th, q = params.theta, params.q
    P, D = case4_polys(th, q, m)
    lam = (th + 1) * ((th - 1) ** 2 + th * m)
    if D < 0 or not P > lam * math.sqrt(D):
        return []
    out = []
    for j, sg in enumerate((-1, 1)):
        w = 0.5 * (P + sg * lam * math.sqrt(D)) / ((th - 1) ** 2 * ((q - 1) * th + 1) ** 2)
        if not w > 0:
            continue
        W = ((1 / th + q - 1) * w + q - m) / (th - 1 / th)
        b = (W + 1 / th) ** 2 + 2 / th + 1
        disc = b * b - 4 * W * W
        if disc < 0:
            continue
        r1, r2 = 0.5 * (b + math.sqrt(disc)), 0.5 * (b - math.sqrt(disc))
        out.append(((r1, r2, w), j))
        out.append(((r1, r1, w), j))
        out.append(((r2, r2, w), j))
    return out


def solve_asym_wne1(m: int, params: ModelParams) -> list:
    """Solutions with ``u != v`` and ``w != 1`` (k = 2, theta > 1), stored with ``u > v``.

    Two sources are tried: the printed sextic-discriminant formulas (branches 0
    and 1) and the common solutions ``(z, 1, z)`` built from the nontrivial free
    roots (branches 2 and 3). Only residual-passing triples are returned.
    """
    _require_k2(params)
    _check_m(m, params.q)
    if params.theta <= 1.0:
        return []
    cands = []
    for (u, v, w), j in case4_candidates(m, params):
        if abs(u - v) > 1e-9 * max(1.0, u) and abs(w - 1) > 1e-9:
            cands.append(((max(u, v), min(u, v), w), j, 1))
    for s in solve_free(params)[1:]:
        z = s.w
        cands.append(((max(z, 1.0), min(z, 1.0), z), 2 + s.branch - 1, 1))
    return _verified(cands, params, m, "asym_wne1")


def solve_all(params: ModelParams, m: int) -> list:
    """All case solvers for one cardinality ``m >= 1``; k >= 3 runs only ``sym_w1``."""
    out = list(solve_sym_w1(m, params))
    if params.k == 2:
        out += solve_sym_wne1(m, params) + solve_asym_w1(m, params) + solve_asym_wne1(m, params)
    return out


def ordered_triples(sols) -> list:
    """Expand unordered asymmetric records into both orderings."""
    out = []
    for s in sols:
        out.append(s.uvw)
        if abs(s.u - s.v) > 1e-12 * max(1.0, s.u):
            out.append((s.v, s.u, s.w))
    return out


def subsets(q: int, m: int):
    return itertools.combinations(range(q), m)
