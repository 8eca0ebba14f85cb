"""Tree-indexed Markov chain of a TISGM and the Kesten-Stigum test."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import ModelParams, theta_c0
from .rootfind import bracket_root
from .tisgm import FullBoundaryLaw, solve_free

NON_EXTREME = "non_extreme"
INCONCLUSIVE = "inconclusive"
MEASURES = ("free", "mu_star", "mu_star_star")


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    """Row-stochastic ``2q x 2q`` matrix; index ``r`` is ``(eta, i)`` with ``eta = -1`` for ``r < q``."""

    entries: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.entries, dtype=float)
        if p.ndim != 2 or p.shape[0] != p.shape[1] or p.shape[0] % 2:
            raise ValueError("transition matrix must be square of even size")
        if np.any(p <= 0) or np.max(np.abs(p.sum(axis=1) - 1.0)) > 1e-12:
            raise ValueError("transition matrix must be positive and row-stochastic")
        object.__setattr__(self, "entries", p)

    @property
    def q(self) -> int:
        return self.entries.shape[0] // 2


@dataclass
class SpectralReport:
    eigenvalues: list
    lambda2: float
    ks_statistic: float
    verdict: str

    def to_dict(self) -> dict:
        return {
            "eigenvalues": [[float(e.real), float(e.imag)] for e in self.eigenvalues],
            "lambda2": self.lambda2,
            "ks_statistic": self.ks_statistic,
            "verdict": self.verdict,
        }


def build_transition(z: FullBoundaryLaw, params: ModelParams) -> TransitionMatrix:
    """``P[(eta,i),(eps,j)]`` proportional to ``theta^(eta*eps*[i==j]) z[eps,j]``."""
    q = z.q
    vec = np.concatenate([z.z_minus, z.z_plus])
    spins = np.repeat([-1, 1], q)
    idx = np.tile(np.arange(q), 2)
    expo = np.where(np.equal.outer(idx, idx), np.outer(spins, spins), 0)
    weights = params.theta ** expo * vec[None, :]
    return TransitionMatrix(weights / weights.sum(axis=1, keepdims=True))


def stationary(P: TransitionMatrix) -> np.ndarray:
    """Left Perron vector normalised to a probability vector."""
    vals, vecs = np.linalg.eig(P.entries.T)
    i = int(np.argmin(np.abs(vals - 1.0)))
    pi = np.real(vecs[:, i])
    return pi / pi.sum()


def spectrum(P: TransitionMatrix, k: int) -> SpectralReport:
    """Dense eigenvalues sorted by decreasing modulus, then ``k * lambda_2^2``."""
    try:
        vals = np.linalg.eigvals(P.entries)
    except np.linalg.LinAlgError as exc:
        raise ArithmeticError(f"eigenvalue computation failed: {exc}") from exc
    order = sorted(range(len(vals)), key=lambda i: (-abs(vals[i]), -vals[i].real))
    vals = [complex(vals[i]) for i in order]
    lam2 = abs(vals[1])
    stat = k * lam2 * lam2
    return SpectralReport(vals, lam2, stat, NON_EXTREME if stat > 1 else INCONCLUSIVE)


def free_law(q: int) -> FullBoundaryLaw:
    return FullBoundaryLaw(np.ones(q), np.ones(q))


def branch_law(w: float, q: int) -> FullBoundaryLaw:
    """Law of the free-branch solution ``u = v = 1``: first row ones, second row ``w``."""
    return FullBoundaryLaw(np.ones(q), np.full(q, float(w)))


def printed_layout_law(w: float, q: int) -> FullBoundaryLaw:
    """Second row ``(1, w, ..., w)``; the layout behind the printed ``lambda_1``, ``lambda_4`` and S-sums.

    This is not a fixed point of the recursion for ``w != 1``; it exists to
    check those formulas against the matrix they describe.
    """
    return FullBoundaryLaw(np.ones(q), np.array([1.0] + [float(w)] * (q - 1)))


def free_spectrum_closed(theta: float, q: int) -> list:
    """``[(value, multiplicity)]`` of the free-measure matrix."""
    den = theta * theta + 2 * (q - 1) * theta + 1
    return [(1.0, 1), ((theta - 1) ** 2 / den, q - 1), ((theta * theta - 1) / den, q)]


def theta1(q: int, k: int = 2) -> float:
    """Upper root of ``k lambda_2^2 = 1`` for the free measure."""
    s = math.sqrt(k)
    return (q - 1 + math.sqrt((q - 1) ** 2 + k - 1)) / (s - 1)


def ks_region_free(q: int, k: int = 2) -> tuple:
    """``(1/theta_1, theta_1)``; outside this interval the free measure is not extreme."""
    if q < 2:
        raise ValueError("q must be >= 2")
    t1 = theta1(q, k)
    return 1.0 / t1, t1


def branch_w(measure: str, theta: float, q: int, k: int = 2) -> float:
    """``w`` of the named measure at ``theta``; raises if the branch does not exist."""
    if measure == "free":
        return 1.0
    if measure not in MEASURES:
        raise ValueError(f"unknown measure {measure!r}")
    sols = solve_free(ModelParams(k, q, theta))[1:]
    if len(sols) != 2:
        raise ValueError(f"{measure} does not exist at theta={theta} (needs theta > {theta_c0(k, q):.6g})")
    ws = sorted(s.w for s in sols)
    return ws[0] if measure == "mu_star" else ws[1]


def measure_law(measure: str, theta: float, q: int, k: int = 2, layout: str = "solution") -> FullBoundaryLaw:
    w = branch_w(measure, theta, q, k)
    if layout == "solution":
        return branch_law(w, q)
    if layout == "printed":
        return printed_layout_law(w, q)
    raise ValueError(f"unknown layout {layout!r}")


def ks_statistic(measure: str, theta: float, q: int = 5, k: int = 2, layout: str = "solution") -> float:
    params = ModelParams(k, q, theta)
    return spectrum(build_transition(measure_law(measure, theta, q, k, layout), params), k).ks_statistic


def ks_threshold(measure: str, q: int = 5, k: int = 2, layout: str = "solution",
                 theta_max: float = 200.0, n_grid: int = 400) -> float:
    """First theta above the branch birth where ``k lambda_2^2`` crosses 1.

    ``layout="printed"`` evaluates the printed layout instead of the solution.
    """
    if measure not in ("mu_star", "mu_star_star"):
        raise ValueError("measure must be 'mu_star' or 'mu_star_star'")
    lo = theta_c0(k, q) * (1 + 1e-9) + 1e-9
    f = lambda th: ks_statistic(measure, th, q, k, layout) - 1.0
    grid = np.geomspace(lo, theta_max, n_grid)
    prev = f(grid[0])
    for a, b in zip(grid[:-1], grid[1:]):
        cur = f(b)
        if prev * cur <= 0:
            return bracket_root(f, a, b, tol=1e-12)
        prev = cur
    raise ArithmeticError(f"no Kesten-Stigum crossing below theta={theta_max}")


def lambda1_printed(theta: float, w: float) -> float:
    """Printed ``q = 5`` eigenvalue for ``w = z_*``."""
    return (theta * theta - 1) / (theta * theta + 4 * theta * w + 4 * theta + 1)


def lambda4_printed(theta: float, w: float) -> float:
    """Printed ``q = 5`` eigenvalue for ``w = z^*``, with its ``D_1`` and ``M``."""
    th = theta
    d1 = ((3 * th + 1) ** 2 * th ** 2 * w ** 4 + 4 * (3 * th ** 3 + 4 * th ** 2 + 10 * th + 3) * th * w ** 3
          - 2 * (11 * th ** 4 - 8 * th ** 3 - 59 * th ** 2 - 16 * th - 2) * w ** 2
          - 4 * (5 * th ** 3 - 4 * th ** 2 - 26 * th - 5) * th * w + (5 * th + 1) ** 2 * th ** 2)
    m = ((3 * th ** 3 + 10 * th ** 2 + 3 * th) * w ** 2 + (th ** 4 + 8 * th ** 3 + 30 * th ** 2 + 8 * th + 1) * w
         + 5 * th ** 3 + 26 * th ** 2 + 5 * th)
    return (th - 1) / (2 * m) * ((3 * th + 1) * th * w ** 2 + 2 * (th + 4) * th ** 2 * w + 5 * th ** 2 + th + math.sqrt(d1))


def z_free_q5(theta: float) -> tuple:
    """Printed radicals ``(z_*, z^*)`` for ``q = 5``, ``k = 2``."""
    th = theta
    disc = th ** 8 - 68 * th ** 6 - 32 * th ** 5 + 130 * th ** 4 + 64 * th ** 3 - 60 * th ** 2 - 32 * th - 3
    if disc < 0:
        raise ValueError("branch does not exist")
    a = th ** 4 - 34 * th ** 2 - 16 * th - 1
    d = 2 * (16 * th ** 2 + 8 * th + 1)
    r = math.sqrt(disc)
    return (a - r) / d, (a + r) / d
