"""Existence and uniqueness certificates for the nonlinear problem.

Uniqueness rests on a contraction bound: when f is Lipschitz in (u, v) with
constant k, the fixed-point operator contracts in the pair norm whenever

    d = max(2 k gstar, 2 k theta) < 1,

where gstar is the kernel mass sup_t integral |G(t, s)| ds and theta is the
companion-kernel envelope

    theta = 1 + Gamma(2-beta) / (Gamma(3-alpha) Gamma(alpha-beta+1)).

Existence needs only a growth bound |f(t, u, v)| <= p_star psi(r) on pairs of
norm r: any radius r with r >= max(gstar, theta) p_star psi(r) supports a
fixed point.  psi is restricted to constant and affine shapes, for which the
smallest such radius has a closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

from .errors import DomainError
from .expr import lipschitz_estimate
from .fracops import gamma
from .greens import ProblemParams, gstar, gstar_coarse_bound
from .solver import ProblemSpec


@dataclass(frozen=True)
class ConstantPsi:
    """Growth envelope psi(r) = c."""

    c: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.c) and self.c > 0.0):
            raise DomainError(f"constant envelope needs c > 0, got {self.c!r}")


@dataclass(frozen=True)
class AffinePsi:
    """Growth envelope psi(r) = a + b r."""

    a: float
    b: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.a) and self.a > 0.0):
            raise DomainError(f"affine envelope needs a > 0, got {self.a!r}")
        if not (math.isfinite(self.b) and self.b >= 0.0):
            raise DomainError(f"affine envelope needs b >= 0, got {self.b!r}")


Psi = Union[ConstantPsi, AffinePsi]


@dataclass(frozen=True)
class GrowthSpec:
    """Growth condition |f(t, u, v)| <= p_star * psi(max(|u|, |v|))."""

    p_star: float
    psi: Psi

    def __post_init__(self) -> None:
        if not (math.isfinite(self.p_star) and self.p_star >= 0.0):
            raise DomainError(f"p_star must be >= 0, got {self.p_star!r}")


@dataclass(frozen=True)
class Certificate:
    """Outcome of a certification run.

    ``estimated_k`` marks certificates whose Lipschitz constant came from
    sampled finite differences rather than the caller; those are heuristic,
    not rigorous.
    """

    params: ProblemParams
    gstar_value: float
    gstar_paper_bound: float
    theta: float
    k: float
    d: float
    unique: bool
    r: Optional[float]
    exists: bool
    estimated_k: bool

    def as_dict(self) -> dict[str, object]:
        return {
            "gstar_value": self.gstar_value,
            "gstar_paper_bound": self.gstar_paper_bound,
            "theta": self.theta,
            "k": self.k,
            "d": self.d,
            "unique": self.unique,
            "r": self.r,
            "exists": self.exists,
            "estimated_k": self.estimated_k,
        }


def theta(params: ProblemParams) -> float:
    """Companion-kernel envelope; always exceeds 1."""
    a, b = params.alpha, params.beta
    return 1.0 + gamma(2.0 - b) / (gamma(3.0 - a) * gamma(a - b + 1.0))


def contraction_constant(params: ProblemParams, k: float, gstar_value: float) -> float:
    """d = max(2 k gstar, 2 k theta) for a Lipschitz constant k >= 0."""
    if not (math.isfinite(k) and k >= 0.0):
        raise DomainError(f"Lipschitz constant must be >= 0, got {k!r}")
    if not (math.isfinite(gstar_value) and gstar_value >= 0.0):
        raise DomainError(f"gstar must be >= 0, got {gstar_value!r}")
    return max(2.0 * k * gstar_value, 2.0 * k * theta(params))


def existence_radius(
    params: ProblemParams, growth: GrowthSpec, gstar_value: float
) -> Optional[float]:
    """Smallest radius r with r >= max(gstar, theta) p_star psi(r).

    Returns None when no finite radius satisfies the inequality (affine
    envelope with slope too large).
    """
    if not (math.isfinite(gstar_value) and gstar_value >= 0.0):
        raise DomainError(f"gstar must be >= 0, got {gstar_value!r}")
    m = max(gstar_value, theta(params))
    p = growth.p_star
    if isinstance(growth.psi, ConstantPsi):
        return p * growth.psi.c * m
    slope = p * growth.psi.b * m
    if slope >= 1.0:
        return None
    return p * growth.psi.a * m / (1.0 - slope)


def certify(
    spec: ProblemSpec,
    k: Optional[float] = None,
    growth: Optional[GrowthSpec] = None,
    n: int = 2049,
    m: int = 257,
) -> Certificate:
    """Build a certificate for the problem from computed kernel constants.

    When no Lipschitz constant is supplied, one is estimated by sampled
    finite differences of the right-hand side and the certificate is flagged
    ``estimated_k``.  ``n`` and ``m`` control the gstar computation.
    """
    params = spec.params
    gs = gstar(params, n=n, m=m)
    estimated = k is None
    if estimated:
        k = lipschitz_estimate(spec.rhs)
    assert k is not None
    d = contraction_constant(params, k, gs)
    r = existence_radius(params, growth, gs) if growth is not None else None
    return Certificate(
        params=params,
        gstar_value=gs,
        gstar_paper_bound=gstar_coarse_bound(params),
        theta=theta(params),
        k=k,
        d=d,
        unique=d < 1.0,
        r=r,
        exists=r is not None,
        estimated_k=estimated,
    )
