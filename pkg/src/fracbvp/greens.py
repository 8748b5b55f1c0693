"""Kernels mapping a forcing y to the solution pair of the linear problem.

For orders 1 < alpha <= 2, 0 < beta < 1 and ratio parameter 0 < xi < 1, the
linear two-point problem

    D^alpha u(t) = y(t),   u(0) = xi u(1),   D^beta u(0) = xi D^beta u(1)

has the representation u(t) = integral_0^1 G(t, s) y(s) ds with

    G(t, s) = 1_{s<=t} (t-s)^(alpha-1)/Gamma(alpha)
              + xi (1-s)^(alpha-1) / (Gamma(alpha) (1-xi))
              - Gamma(2-beta) (xi + (1-xi) t) / (Gamma(alpha-beta) (1-xi))
                * (1-s)^(alpha-beta-1),

and the reduced derivative v = D^(alpha-1) u has the companion kernel

    H(t, s) = 1_{s<=t}
              - Gamma(2-beta) t^(2-alpha) / (Gamma(3-alpha) Gamma(alpha-beta))
                * (1-s)^(alpha-beta-1).

Both kernels are weakly singular at s = 1 when alpha - beta < 1, yet their
moments against hat functions are finite, so grid weights exist for every
admissible parameter triple.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SingularityError
from .fracops import (
    Grid,
    gamma,
    indicator_moment_matrix,
    indicator_moments,
    left_kernel_moment_matrix,
    left_kernel_moments,
    right_kernel_moments,
)

_BISECTION_STEPS = 60
# Probe abscissa used instead of s = 1 when classifying kernel signs; the
# kernel may be unbounded at 1 itself.
_SIGN_PROBE_GAP = 1e-12


@dataclass(frozen=True)
class ProblemParams:
    """Orders and ratio parameter of the boundary value problem."""

    alpha: float
    beta: float
    xi: float

    def __post_init__(self) -> None:
        a, b, x = self.alpha, self.beta, self.xi
        if not (math.isfinite(a) and 1.0 < a <= 2.0):
            raise DomainError(f"alpha must lie in (1, 2], got {a!r}")
        if not (math.isfinite(b) and 0.0 < b < 1.0):
            raise DomainError(f"beta must lie in (0, 1), got {b!r}")
        if not (math.isfinite(x) and 0.0 < x < 1.0):
            raise DomainError(f"xi must lie in (0, 1), got {x!r}")


@dataclass(frozen=True, eq=False)
class KernelWeights:
    """Quadrature weights for one evaluation node of a kernel row."""

    grid: Grid
    weights: np.ndarray
    t_index: int

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (self.grid.n,):
            raise DomainError(f"expected {self.grid.n} weights, got shape {w.shape}")
        if not np.all(np.isfinite(w)):
            raise DomainError("kernel weights must be finite")
        if not (0 <= self.t_index < self.grid.n):
            raise DomainError(f"node index {self.t_index!r} outside grid")
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def t(self) -> float:
        return float(self.grid.nodes[self.t_index])

    def apply(self, values: np.ndarray) -> float:
        return float(self.weights @ np.asarray(values, dtype=float))


def _ratio_coeff(p: ProblemParams) -> float:
    """Coefficient of the (1-s)^(alpha-1) term common to both branches."""
    return p.xi / (gamma(p.alpha) * (1.0 - p.xi))


def _singular_coeff(p: ProblemParams, t: float) -> float:
    """Coefficient of the (1-s)^(alpha-beta-1) term; grows affinely in t."""
    return (
        gamma(2.0 - p.beta)
        * (p.xi + (1.0 - p.xi) * t)
        / (gamma(p.alpha - p.beta) * (1.0 - p.xi))
    )


def _companion_coeff(p: ProblemParams) -> float:
    return gamma(2.0 - p.beta) / (gamma(3.0 - p.alpha) * gamma(p.alpha - p.beta))


def _check_point(name: str, x: float) -> float:
    x = float(x)
    if not (0.0 <= x <= 1.0):
        raise DomainError(f"{name} must lie in [0, 1], got {x!r}")
    return x


def green_branch_value(p: ProblemParams, t: float, s, left: bool):
    """Kernel value using a fixed branch formula; accepts scalar or array s.

    ``left=True`` selects the branch valid for s <= t (it adds the
    (t-s)^(alpha-1) term); ``left=False`` the branch for s >= t.  Both
    formulas are real-analytic in s below 1, so either can be continued past
    s = t, which is what the sign-scanning quadrature needs.
    """
    a, b = p.alpha, p.beta
    s = np.asarray(s, dtype=float) if not np.isscalar(s) else float(s)
    rem = 1.0 - s
    val = _ratio_coeff(p) * rem ** (a - 1.0) - _singular_coeff(p, t) * rem ** (
        a - b - 1.0
    )
    if left:
        gap = np.maximum(t - s, 0.0) if not np.isscalar(s) else max(t - s, 0.0)
        val = val + gap ** (a - 1.0) / gamma(a)
    return val


def green_eval(p: ProblemParams, t: float, s: float) -> float:
    """Pointwise kernel value G(t, s).

    Points with s <= t use the left branch (the tie at s = t is immaterial:
    the branches agree there).  Raises :class:`SingularityError` at s = 1
    when alpha - beta < 1, where the kernel is unbounded.
    """
    t = _check_point("t", t)
    s = _check_point("s", s)
    if s == 1.0 and p.alpha - p.beta < 1.0:
        raise SingularityError(
            "kernel is unbounded at s = 1 for alpha - beta < 1"
        )
    return float(green_branch_value(p, t, s, left=s <= t))


def companion_eval(p: ProblemParams, t: float, s: float) -> float:
    """Pointwise companion kernel value H(t, s).

    The indicator part covers s in [0, t]; at t = 0 that interval carries no
    mass, so the indicator is taken empty there and H(0, s) = 0 whenever
    alpha < 2.  Raises :class:`SingularityError` at s = 1 when
    alpha - beta < 1.
    """
    t = _check_point("t", t)
    s = _check_point("s", s)
    if s == 1.0 and p.alpha - p.beta < 1.0:
        raise SingularityError(
            "companion kernel is unbounded at s = 1 for alpha - beta < 1"
        )
    indicator = 1.0 if (s <= t and t > 0.0) else 0.0
    # 0^0 = 1 here keeps the alpha = 2 case (t-independent coefficient) right.
    return indicator - _companion_coeff(p) * t ** (2.0 - p.alpha) * (1.0 - s) ** (
        p.alpha - p.beta - 1.0
    )


def green_row_weights(p: ProblemParams, grid: Grid, t_index: int) -> KernelWeights:
    """Exact hat-function moments of G(t_i, .) for one grid node t_i.

    Every term of the kernel has a closed-form moment, so applying the row to
    samples of y reproduces integral_0^1 G(t_i, s) y(s) ds exactly whenever y
    is piecewise linear on the grid.  Weights are finite even when the kernel
    itself is unbounded at s = 1.
    """
    if not (0 <= t_index < grid.n):
        raise DomainError(f"node index {t_index!r} outside grid of size {grid.n}")
    a, b = p.alpha, p.beta
    t = float(grid.nodes[t_index])
    w = left_kernel_moments(a, grid, t_index) / gamma(a)
    w += _ratio_coeff(p) * right_kernel_moments(a, grid)
    w -= _singular_coeff(p, t) * right_kernel_moments(a - b, grid)
    return KernelWeights(grid, w, t_index)


def companion_row_weights(p: ProblemParams, grid: Grid, t_index: int) -> KernelWeights:
    """Exact hat-function moments of H(t_i, .) for one grid node t_i.

    At t_0 = 0 with alpha < 2 the row is identically zero, matching
    D^(alpha-1) u(0) = 0 for every forcing.
    """
    if not (0 <= t_index < grid.n):
        raise DomainError(f"node index {t_index!r} outside grid of size {grid.n}")
    a, b = p.alpha, p.beta
    t = float(grid.nodes[t_index])
    w = indicator_moments(grid, t_index).astype(float)
    w -= _companion_coeff(p) * t ** (2.0 - a) * right_kernel_moments(a - b, grid)
    return KernelWeights(grid, w, t_index)


def green_weight_matrix(p: ProblemParams, grid: Grid) -> np.ndarray:
    """Stacked rows of :func:`green_row_weights` for all grid nodes."""
    a, b = p.alpha, p.beta
    t_nodes = grid.nodes
    left = left_kernel_moment_matrix(a, grid) / gamma(a)
    right_a = right_kernel_moments(a, grid)
    right_ab = right_kernel_moments(a - b, grid)
    sing = (
        gamma(2.0 - b)
        * (p.xi + (1.0 - p.xi) * t_nodes)
        / (gamma(a - b) * (1.0 - p.xi))
    )
    return left + _ratio_coeff(p) * right_a[None, :] - np.outer(sing, right_ab)


def companion_weight_matrix(p: ProblemParams, grid: Grid) -> np.ndarray:
    """Stacked rows of :func:`companion_row_weights` for all grid nodes."""
    a, b = p.alpha, p.beta
    right_ab = right_kernel_moments(a - b, grid)
    coeff = _companion_coeff(p) * grid.nodes ** (2.0 - a)
    return indicator_moment_matrix(grid) - np.outer(coeff, right_ab)


def gstar_coarse_bound(p: ProblemParams) -> float:
    """Analytic upper bound for gstar obtained by maximizing each term.

    Bounds (t-s)^(alpha-1) by (1-s)^(alpha-1), takes the singular-term
    coefficient at t = 1, and integrates both envelopes:

        1/((1-xi) Gamma(alpha+1)) + Gamma(2-beta)/((1-xi) Gamma(alpha-beta+1)).
    """
    a, b = p.alpha, p.beta
    return (1.0 / gamma(a + 1.0) + gamma(2.0 - b) / gamma(a - b + 1.0)) / (1.0 - p.xi)


def _branch_piece(p: ProblemParams, t: float, a_pt: float, b_pt: float, left: bool) -> float:
    """Exact integral of the fixed-branch kernel over [a_pt, b_pt]."""
    a, b = p.alpha, p.beta
    rema, remb = 1.0 - a_pt, 1.0 - b_pt
    val = _ratio_coeff(p) * (rema**a - remb**a) / a
    val -= _singular_coeff(p, t) * (rema ** (a - b) - remb ** (a - b)) / (a - b)
    if left:
        val += ((t - a_pt) ** a - max(t - b_pt, 0.0) ** a) / (a * gamma(a))
    return val


def _bisect_root(p: ProblemParams, t: float, lo: float, hi: float, left: bool) -> float:
    f_lo = float(green_branch_value(p, t, min(lo, 1.0 - _SIGN_PROBE_GAP), left))
    for _ in range(_BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        f_mid = float(green_branch_value(p, t, min(mid, 1.0 - _SIGN_PROBE_GAP), left))
        if f_mid == 0.0:
            return mid
        if (f_lo < 0.0) == (f_mid < 0.0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _abs_kernel_mass(p: ProblemParams, t: float, s_nodes: np.ndarray) -> float:
    """integral_0^1 |G(t, s)| ds, exact between sign changes.

    Sign changes of the kernel in s are bracketed on the node grid, refined
    by bisection, and the branch antiderivative is summed piecewise so the
    absolute value costs no quadrature accuracy.
    """
    total = 0.0
    for lo, hi, left in ((0.0, t, True), (t, 1.0, False)):
        if hi <= lo:
            continue
        pts = np.unique(np.clip(s_nodes, lo, hi))
        probe = np.minimum(pts, 1.0 - _SIGN_PROBE_GAP)
        vals = np.asarray(green_branch_value(p, t, probe, left))
        cuts = [lo]
        for k in range(len(pts) - 1):
            if vals[k] == 0.0 and lo < pts[k] < hi:
                cuts.append(float(pts[k]))
            elif vals[k] * vals[k + 1] < 0.0:
                cuts.append(_bisect_root(p, t, float(pts[k]), float(pts[k + 1]), left))
        cuts.append(hi)
        for a_pt, b_pt in zip(cuts[:-1], cuts[1:]):
            if b_pt > a_pt:
                total += abs(_branch_piece(p, t, a_pt, b_pt, left))
    return total


def _scan_workers() -> int:
    raw = os.environ.get("FRACBVP_THREADS", "1").strip()
    try:
        cap = int(raw)
    except ValueError:
        raise DomainError(f"FRACBVP_THREADS must be an integer, got {raw!r}")
    if cap < 0:
        raise DomainError(f"FRACBVP_THREADS must be >= 0, got {cap}")
    if cap == 0:
        return os.cpu_count() or 1
    return cap


def gstar(p: ProblemParams, n: int = 2049, m: int = 513) -> float:
    """sup over t of integral_0^1 |G(t, s)| ds, scanned on m uniform t nodes.

    For each scan node the integral is computed exactly between kernel sign
    changes (see :func:`_abs_kernel_mass`), so n controls only how finely
    roots are bracketed before bisection.  The scan is embarrassingly
    parallel; FRACBVP_THREADS > 1 runs it on a thread pool.
    """
    if n < 2 or m < 2:
        raise DomainError(f"need n >= 2 and m >= 2, got n={n}, m={m}")
    s_nodes = np.linspace(0.0, 1.0, n)
    t_scan = np.linspace(0.0, 1.0, m)
    workers = _scan_workers()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            vals = list(pool.map(lambda t: _abs_kernel_mass(p, t, s_nodes), t_scan))
    else:
        vals = [_abs_kernel_mass(p, float(t), s_nodes) for t in t_scan]
    return float(max(vals))
