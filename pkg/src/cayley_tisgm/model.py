"""Model parameters and closed-form critical values of the coupled Ising-Potts model."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

FERRO = "ferromagnetic"
ANTIFERRO = "antiferromagnetic"
BOUNDARY = "boundary"


@dataclass(frozen=True)
class ModelParams:
    """Branching order ``k``, number of Potts states ``q`` and ``theta = exp(J*beta)``."""

    k: int
    q: int
    theta: float
    coupling_sign: str = field(init=False)

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 2:
            raise ValueError(f"k must be an integer >= 2, got {self.k}")
        if int(self.q) != self.q or self.q < 2:
            raise ValueError(f"q must be an integer >= 2, got {self.q}")
        if not (self.theta > 0 and math.isfinite(self.theta)):
            raise ValueError(f"theta must be positive and finite, got {self.theta}")
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "q", int(self.q))
        object.__setattr__(self, "theta", float(self.theta))
        object.__setattr__(self, "coupling_sign", coupling_sign(self.theta))

    def with_theta(self, theta: float) -> "ModelParams":
        return ModelParams(self.k, self.q, theta)


@dataclass(frozen=True)
class DerivedParams:
    big_theta: float
    tau: float
    tau_c: float
    theta_cr: float


def coupling_sign(theta: float) -> str:
    if theta > 1.0:
        return FERRO
    if theta < 1.0:
        return ANTIFERRO
    return BOUNDARY


def big_theta(theta: float, q: int) -> float:
    """Return ``(theta + q - 1) / (1/theta + q - 1)``."""
    return (theta + q - 1.0) / (1.0 / theta + q - 1.0)


def tau(theta: float) -> float:
    return 0.5 * (theta + 1.0 / theta)


def tau_c(k: int, q: int) -> float:
    return (k + q - 1.0) / (k - 1.0)


def theta_from_tau(t: float, ferro: bool = True) -> float:
    """Invert ``tau = (theta + 1/theta)/2`` on the chosen side of ``theta = 1``."""
    if t < 1.0:
        raise ValueError(f"tau must be >= 1, got {t}")
    root = t + math.sqrt(t * t - 1.0)
    return root if ferro else 1.0 / root


def derive(params: ModelParams) -> DerivedParams:
    tc = tau_c(params.k, params.q)
    return DerivedParams(
        big_theta=big_theta(params.theta, params.q),
        tau=tau(params.theta),
        tau_c=tc,
        theta_cr=theta_from_tau(tc),
    )


def theta_c0(k: int, q: int) -> float:
    """First critical value, where ``Theta(theta) = (k+1)/(k-1)``."""
    if k < 2 or q < 2:
        raise ValueError("need k >= 2 and q >= 2")
    return (q - 1.0 + math.sqrt(k * k + q * (q - 2.0))) / (k - 1.0)


def theta_cm_k2(m: int, q: int, sign: str = FERRO) -> float:
    """Birth point of the symmetric ``w = 1`` branch for ``k = 2``.

    Solves ``tau = 1 + 2 sqrt(m (q - m))`` on the requested side of ``theta = 1``.
    """
    if not 1 <= m <= q // 2:
        raise ValueError(f"m must lie in [1, {q // 2}], got {m}")
    if sign not in (FERRO, ANTIFERRO):
        raise ValueError(f"sign must be {FERRO!r} or {ANTIFERRO!r}")
    r = math.sqrt(m * (q - m))
    if sign == FERRO:
        return 1.0 + 2.0 * r + 2.0 * math.sqrt(r * r + r)
    # reciprocal branch, written without cancellation
    return 1.0 / (1.0 + 2.0 * r + 2.0 * math.sqrt(r * r + r))


def critical_temperature(J: float, theta_c: float) -> float:
    """Temperature ``|J| / ln(theta_c)`` for a ferromagnetic critical value."""
    if not theta_c > 1.0:
        raise ValueError(f"theta_c must exceed 1, got {theta_c}")
    return abs(J) / math.log(theta_c)


def theta_from_temperature(J: float, T: float) -> float:
    if T <= 0:
        raise ValueError("temperature must be positive")
    return math.exp(J / T)
