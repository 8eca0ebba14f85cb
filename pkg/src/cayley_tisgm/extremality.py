"""Sufficient extremality test ``k * kappa * gamma < 1`` for the free-branch measures."""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass

import numpy as np

from . import chain
from .model import ModelParams, theta_c0
from .rootfind import Polynomial, bracket_root, positive_roots

EXTREME = "extreme"
INCONCLUSIVE = "inconclusive"


@dataclass
class ExtremalityReport:
    """One (measure, theta) evaluation of both sufficient conditions.

    ``kappa`` is the closed-form value used for the verdict; ``kappa_matrix``
    is computed directly from the transition matrix of the solution.
    """

    theta: float
    measure_id: str
    kappa: float
    gamma_bound: float
    product: float
    msw_verdict: str
    ks_verdict: str
    lambda2: float
    kappa_matrix: float
    w: float
    gamma_branch: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


def kappa_of(P) -> float:
    """Half the largest l1 distance between two rows."""
    p = P.entries if hasattr(P, "entries") else np.asarray(P, dtype=float)
    return 0.5 * float(np.max(np.abs(p[:, None, :] - p[None, :, :]).sum(axis=2)))


def z_sums(theta: float, w: float, q: int) -> tuple:
    th = theta
    z1 = th + 1 / th + (q - 1) * (w + 1)
    z2 = th + q + (1 / th + q - 2) * w
    z4 = 1 / th + q + (th + q - 2) * w
    return z1, z2, z4


def s_sums(theta: float, w: float, q: int = 5) -> tuple:
    """The six row-pair sums ``S_1 .. S_6`` for the ``u = v = 1`` family (q = 5 as printed)."""
    if theta <= 1:
        raise ValueError("theta must exceed 1")
    if q != 5:
        raise ValueError("the printed sums are specific to q = 5")
    th = theta
    z1, z2, z4 = z_sums(th, w, q)
    s1 = 2 * (th - 1 / th) / z1
    s2 = 2 * (th - 1) * (th + w) / (th * z2)
    s3 = 2 * (th - 1) * (th + w) / (th * z4)
    s4 = ((1 / th + 1) * abs(th / z1 - 1 / z4) + 3 * (w + 1) * abs(1 / z1 - 1 / z4)
          + (w + 1 / th) * abs(1 / z1 - th / z4))
    s5 = (2 * (w + 2) * abs(1 / z2 - 1 / z4) + (1 + 1 / th) * abs(th / z2 - 1 / z4)
          + w * (1 + 1 / th) * abs(1 / z2 - th / z4))
    s6 = (3 * w + 5) * abs(1 / z2 - 1 / z4) + abs(th / z2 - 1 / (th * z4)) + abs(w / (th * z2) - th * w / z4)
    return s1, s2, s3, s4, s5, s6


def kappa_free(theta: float, q: int) -> float:
    return (theta - 1 / theta) / (theta + 1 / theta + 2 * (q - 1))


def kappa_closed(theta: float, w: float, q: int = 5) -> float:
    """Closed-form kappa: ``max(S_2, S_3)/2`` for ``w < 1``, ``S_6/2`` for ``w > 1``."""
    if theta <= 1:
        raise ValueError("theta must exceed 1")
    if abs(w - 1.0) <= 1e-12:
        return kappa_free(theta, q)
    s = s_sums(theta, w, q)
    return 0.5 * (max(s[1], s[2]) if w < 1 else s[5])


def _p_poly(c):
    return -c ** 6 - 2 * c ** 5 - c ** 4 + 2 * c * c + 2 * c + 1


def a_critical() -> float:
    """Unique positive root of ``-c^6 - 2c^5 - c^4 + 2c^2 + 2c + 1``."""
    return bracket_root(_p_poly, 0.0, 2.0, tol=1e-14)


def a_switch() -> float:
    """Point where the two branch formulas of ``g_norm`` meet: the square of :func:`a_critical`.

    The polynomial is written in ``c = sqrt(a)``, so its root is a value of ``c``.
    """
    return a_critical() ** 2


def _g_small(a: float) -> float:
    r = math.sqrt(a)
    return abs(a * r - 1) * (a + r + 1) / (a * (a + 1) * (r + 1))


def g_norm(a: float) -> float:
    """Branch formula for the sup of :func:`g_function`, switching at :func:`a_critical`.

    Between :func:`a_critical` and :func:`a_switch` the ``a - 1`` branch is
    smaller than the true supremum.
    """
    if a <= 0:
        raise ValueError("a must be positive")
    return _g_small(a) if a <= a_critical() else a - 1


def g1_norm(a: float) -> float:
    if a <= 0:
        raise ValueError("a must be positive")
    return abs(a - 1) / (a + 1)


def g_function(x, y, z, t, a, b):
    return np.abs(a * x / (z + t + a * x + y / a) - b * x / (x + y + b * z + t / b))


def g1_function(x, y, z, t, a, b):
    return np.abs(a * x / (z + t + a * x + y / a) - x / (x + y + b * z + t / b))


def simplex_grid(n: int, dim: int = 4) -> np.ndarray:
    """All points of the ``dim``-simplex with coordinates in ``{0, 1/n, ..., 1}``."""
    pts = []
    for cuts in itertools.combinations(range(n + dim - 1), dim - 1):
        prev, row = -1, []
        for c in cuts:
            row.append(c - prev - 1)
            prev = c
        row.append(n + dim - 2 - prev)
        pts.append(row)
    return np.asarray(pts, dtype=float) / n


def grid_norm(func, a: float, n: int = 100) -> float:
    """Grid maximum of ``func`` over ``x > 0`` on the simplex, for ``b = a`` and ``b = 1/a``.

    The functions are homogeneous of degree zero in ``(x, y, z, t)``, so the
    simplex carries the same supremum as any box around the origin.
    """
    pts = simplex_grid(n)
    pts = pts[pts[:, 0] > 0]
    x, y, z, t = pts.T
    return float(max(np.max(func(x, y, z, t, a, b)) for b in (a, 1 / a)))


def gamma_bound(measure_id: str, theta: float, q: int = 5, k: int = 2) -> tuple:
    """``(gamma, branch_label)`` for the named measure."""
    if measure_id == "free":
        if theta <= 0:
            raise ValueError("theta must be positive")
        if theta > a_critical():
            return theta - 1, "theta-1"
        return _g_small(theta), "small-theta"
    if measure_id in ("mu_star", "mu_star_star"):
        if theta <= theta_c0(k, q):
            raise ValueError(f"{measure_id} does not exist at theta={theta}")
        return (theta * theta - 1) / (theta * theta + 1), "(theta^2-1)/(theta^2+1)"
    raise ValueError(f"unknown measure {measure_id!r}")


def msw_check(measure_id: str, params: ModelParams) -> ExtremalityReport:
    """Evaluate ``k kappa gamma`` and the Kesten-Stigum statistic at one theta."""
    th, q, k = params.theta, params.q, params.k
    w = chain.branch_w(measure_id, th, q, k)
    law = chain.measure_law(measure_id, th, q, k)
    P = chain.build_transition(law, params)
    spec = chain.spectrum(P, k)
    kap_m = kappa_of(P)
    if measure_id == "free":
        kap = kap_m if th <= 1 else kappa_free(th, q)
    else:
        kap = kappa_closed(th, w, q)
    gam, branch = gamma_bound(measure_id, th, q, k)
    prod = k * kap * gam
    return ExtremalityReport(th, measure_id, kap, gam, prod, EXTREME if prod < 1 else INCONCLUSIVE,
                             spec.verdict, spec.lambda2, kap_m, w, branch)


def msw_cubic(q: int) -> Polynomial:
    """``2 theta^3 - 3 theta^2 - 2 q theta + 1``."""
    return Polynomial([1.0, -2.0 * q, -3.0, 2.0])


def msw_cubic_roots(q: int) -> list:
    return positive_roots(msw_cubic(q)).values


def msw_product(measure_id: str, theta: float, q: int = 5, k: int = 2, kappa_source: str = "closed") -> float:
    """``k kappa gamma`` with kappa from the closed form, the solution matrix or the printed layout."""
    gam, _ = gamma_bound(measure_id, theta, q, k)
    if kappa_source == "closed":
        kap = kappa_closed(theta, chain.branch_w(measure_id, theta, q, k), q)
    elif kappa_source in ("solution", "printed"):
        layout = "solution" if kappa_source == "solution" else "printed"
        law = chain.measure_law(measure_id, theta, q, k, layout)
        kap = kappa_of(chain.build_transition(law, ModelParams(k, q, theta)))
    else:
        raise ValueError(f"unknown kappa source {kappa_source!r}")
    return k * kap * gam


def msw_threshold(measure_id: str, q: int = 5, k: int = 2, kappa_source: str = "closed",
                  theta_max: float = 30.0, n_grid: int = 2000) -> float:
    """First theta above the branch birth where ``k kappa gamma`` reaches 1."""
    if measure_id not in ("mu_star", "mu_star_star"):
        raise ValueError("measure must be 'mu_star' or 'mu_star_star'")
    lo = theta_c0(k, q) * (1 + 1e-9) + 1e-9
    f = lambda th: msw_product(measure_id, th, q, k, kappa_source) - 1.0
    grid = np.linspace(lo, theta_max, n_grid)
    prev = f(grid[0])
    for a, b in zip(grid[:-1], grid[1:]):
        cur = f(b)
        if prev * cur <= 0:
            return bracket_root(f, a, b, tol=1e-12)
        prev = cur
    raise ArithmeticError(f"no crossing of k*kappa*gamma = 1 below theta={theta_max}")


def transition_probabilities(theta: float, z: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Conditional laws ``p^(kappa,i)(eps,j)`` for a batch of vectors ``p`` (rows indexed like ``z``).

    ``z`` and each row of ``p`` are length ``2q`` vectors in the ``(eta, i)`` order.
    Returns an array of shape ``(batch, 2q, 2q)`` with the conditioning state first.
    """
    q = z.size // 2
    spins = np.repeat([-1, 1], q)
    idx = np.tile(np.arange(q), 2)
    expo = np.where(np.equal.outer(idx, idx), np.outer(spins, spins), 0)
    kern = float(theta) ** expo * z[None, :]
    num = p[:, None, :] * kern[None, :, :]
    return num / num.sum(axis=2, keepdims=True)


def prop45_grid_max(theta: float, w: float, q: int = 5, n: int = 50, n_random: int = 20000,
                    seed: int = 0) -> float:
    """Largest ``|p^(kappa,i)(eps,j) - p^(kappa',l)(eps,j)|`` over sampled vectors ``p``.

    The samples are a pitch-``1/n`` grid on every two-point support plus
    sparse Dirichlet draws. The law is the printed layout ``(1..1; 1, w..w)``.
    """
    z = np.concatenate([np.ones(q), [1.0], np.full(q - 1, float(w))])
    dim = 2 * q
    batches = []
    s = np.linspace(0, 1, n + 1)
    for i, j in itertools.combinations(range(dim), 2):
        b = np.zeros((n + 1, dim))
        b[:, i], b[:, j] = s, 1 - s
        batches.append(b)
    rng = np.random.default_rng(seed)
    batches.append(rng.dirichlet(np.full(dim, 0.2), size=n_random))
    p = np.vstack(batches)
    p = np.clip(p, 1e-300, None)
    best = 0.0
    for chunk in np.array_split(p, max(1, len(p) // 4000)):
        probs = transition_probabilities(theta, z, chunk)
        spread = probs.max(axis=1) - probs.min(axis=1)
        best = max(best, float(spread.max()))
    return best
