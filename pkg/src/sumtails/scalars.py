"""Scalar moment functionals and the pointwise inequalities behind the bounds.

Everything here is a pure function.  The central gadget is

    g(x) = min(x^2, |x|^3),

which interpolates between the second and third absolute moments: summing
E g(X_i / v) over the summands of a unit-variance system gives the
Lyapunov-type quantity ``beta_v`` that drives every bound in
:mod:`sumtails.bounds`.

The functions are type-generic: Fraction inputs stay exact, floats stay
floats.  Inequality scans accept a small negative tolerance so that float
rounding is never reported as a counterexample.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .discrete import Number, System, _coerce

#: LHS - RHS below this value counts as a violation in float scans
INEQ_TOL = -1e-12

_EIGHT_NINTHS = Fraction(8, 9)
_BETA_CUBE_LIMIT = _EIGHT_NINTHS**3  # 512/729


def g(x: Number) -> Number:
    """min(x^2, |x|^3): cubic near zero, quadratic beyond |x| = 1."""
    return min(x * x, abs(x) ** 3)


def beta_v(system: System, v: Number) -> Number:
    """Sum over summands of E g(X_i / v); exact for exact systems."""
    if not v > 0:
        raise ValueError(f"scale v must be positive, got {v}")
    v = _coerce(v, system.exact)
    zero = Fraction(0) if system.exact else 0.0
    total = zero
    for rv in system.rvs:
        for x, p in zip(rv.values, rv.masses):
            total += p * g(x / v)
    return total


def mu_p(system: System, p: Number) -> Number:
    """Sum over summands of E |X_i|^p.  Equals 1 at p = 2 for any system."""
    if not p > 0:
        raise ValueError(f"exponent p must be positive, got {p}")
    zero = Fraction(0) if system.exact and float(p).is_integer() else 0.0
    return sum((rv.abs_moment(p) for rv in system.rvs), zero)


def mean_abs_bound(v: Number, beta: Number) -> float:
    """Upper bound v * beta^(1/3) on E|X_i| for any single summand.

    Only claimed while beta <= (8/9)^3; larger beta raises, because the
    Young-type inequality behind the bound needs its k = beta^(1/3) to stay
    at or below 8/9.
    """
    if not v > 0:
        raise ValueError(f"scale v must be positive, got {v}")
    if beta < 0:
        raise ValueError(f"beta must be nonnegative, got {beta}")
    if beta > _BETA_CUBE_LIMIT:
        raise ValueError(
            f"mean-absolute bound not claimed for beta={beta} > (8/9)^3={float(_BETA_CUBE_LIMIT)!r}"
        )
    return float(v) * float(beta) ** (1.0 / 3.0)


@dataclass(frozen=True)
class YoungEval:
    """One evaluation of Delta(k, u) = 2k/3 + g(u)/(3k^2) - u."""

    k: Number
    u: Number
    delta: Number


def young_delta(k: Number, u: Number) -> YoungEval:
    """Evaluate Delta(k, u); nonnegative for every u >= 0 iff k <= 8/9."""
    if not k > 0:
        raise ValueError(f"k must be positive, got {k}")
    if u < 0:
        raise ValueError(f"u must be nonnegative, got {u}")
    delta = 2 * k / 3 + g(u) / (3 * k * k) - u
    return YoungEval(k=k, u=u, delta=delta)


def young_delta_star(u: Number) -> Number:
    """Minimum of Delta(k, u) over k in (0, 8/9], in closed form.

    The minimizing k is k_u = g(u)^(1/3) clipped at 8/9, which gives the
    pieces:

    * 0                                  for u in [0, 8/9]
    * 27/64 (u - 8/9)^2 (u + 16/9)       for u in [8/9, 1]
    * 27/64 (u - 32/27)^2                for u >= 1

    Fraction inputs give exact Fraction outputs.
    """
    if u < 0:
        raise ValueError(f"u must be nonnegative, got {u}")
    if u <= _EIGHT_NINTHS:
        return u * 0  # zero of the caller's type
    c = Fraction(27, 64)
    if u <= 1:
        return c * (u - _EIGHT_NINTHS) ** 2 * (u + Fraction(16, 9))
    return c * (u - Fraction(32, 27)) ** 2


def young_k_star(u: Number) -> Number:
    """The minimizer k_u = min(g(u)^(1/3), 8/9) of Delta(., u)."""
    if u < 0:
        raise ValueError(f"u must be nonnegative, got {u}")
    if u >= _EIGHT_NINTHS:
        return _EIGHT_NINTHS if isinstance(u, (Fraction, int)) else float(_EIGHT_NINTHS)
    # below 8/9 one has g(u) = u^3, so the cube root is u itself
    return u


@dataclass(frozen=True)
class Violation:
    """A grid point where an inequality check failed."""

    name: str
    point: dict
    lhs: float
    rhs: float

    @property
    def gap(self) -> float:
        return self.lhs - self.rhs


@dataclass(frozen=True)
class LemmaGrid:
    """Scan ranges for :func:`check_pointwise_lemmas`.

    ``d_over_v`` entries are the ratios d/v and must lie in (0, 1/4]; the
    product-capping lemma is only claimed for d <= v/4.
    """

    x_min: float = -10.0
    x_max: float = 10.0
    x_step: float = 1e-3
    v_values: tuple[float, ...] = (0.5, 1.0, 2.0)
    w_values: tuple[float, ...] = (0.5, 1.0, 2.0)
    d_over_v: tuple[float, ...] = (1 / 16, 1 / 8, 1 / 4)
    tol: float = INEQ_TOL

    def __post_init__(self) -> None:
        for r in self.d_over_v:
            if not 0 < r <= 0.25:
                raise ValueError(f"d/v ratio {r} outside (0, 1/4]")


def _g_array(t: np.ndarray) -> np.ndarray:
    return np.minimum(t * t, np.abs(t) ** 3)


def check_pointwise_lemmas(grid: LemmaGrid = LemmaGrid()) -> list[Violation]:
    """Scan the two pointwise inequalities used by the concentration bound.

    Lemma A (x >= 0, 0 < d <= v/4):   x * min(x, d) >= x^2 - v^3/(4d) * g(x/v)
    Lemma B (all x, k = v^2/w^2 * max(v, w)):   |x| * 1{x > w} <= k * g(x/v)

    Returns every grid point whose LHS-RHS falls below ``grid.tol``
    (expected: none; equality holds in Lemma A at x = 2d).
    """
    xs = np.arange(grid.x_min, grid.x_max + grid.x_step / 2, grid.x_step)
    xs_pos = xs[xs >= 0.0]
    violations: list[Violation] = []

    for v in grid.v_values:
        gx = _g_array(xs / v)
        gx_pos = _g_array(xs_pos / v)
        for r in grid.d_over_v:
            d = v * r
            lhs = xs_pos * np.minimum(xs_pos, d)
            rhs = xs_pos * xs_pos - (v**3 / (4.0 * d)) * gx_pos
            bad = np.nonzero(lhs - rhs < grid.tol)[0]
            violations.extend(
                Violation(
                    name="product-cap",
                    point={"x": float(xs_pos[i]), "v": v, "d": d},
                    lhs=float(lhs[i]),
                    rhs=float(rhs[i]),
                )
                for i in bad
            )
        for w in grid.w_values:
            k = (v * v) / (w * w) * max(v, w)
            lhs = np.abs(xs) * (xs > w)
            rhs = k * gx
            bad = np.nonzero(rhs - lhs < grid.tol)[0]
            violations.extend(
                Violation(
                    name="exceedance-cap",
                    point={"x": float(xs[i]), "v": v, "w": w},
                    lhs=float(lhs[i]),
                    rhs=float(rhs[i]),
                )
                for i in bad
            )
    return violations


@dataclass(frozen=True)
class DeltaMomentReport:
    """Result of the small-scale second-moment retention check."""

    status: str  # "ok" or "outside-main-case"
    beta: Number
    delta: Number | None
    lhs: Number | None
    bound: Fraction = field(default=Fraction(1, 2))

    @property
    def passed(self) -> bool | None:
        if self.status != "ok":
            return None
        return self.lhs >= self.bound


def delta_moment_check(system: System, v: Number) -> DeltaMomentReport:
    """Check sum_j E |X_j| (|X_j| ^ delta) >= 1/2 with delta = v^3 beta_v / 2.

    The claim is only made in the main case beta_v <= 1/(2 v^2), where delta
    lands in (0, v/4]; outside it the report carries the status
    ``outside-main-case`` instead of a pass/fail verdict.
    """
    v = _coerce(v, system.exact)
    beta = beta_v(system, v)
    if beta > Fraction(1, 2) / (v * v):
        return DeltaMomentReport(status="outside-main-case", beta=beta, delta=None, lhs=None)
    delta = v**3 * beta / 2
    zero = Fraction(0) if system.exact else 0.0
    lhs = zero
    for rv in system.rvs:
        for x, p in zip(rv.values, rv.masses):
            ax = abs(x)
            lhs += p * ax * min(ax, delta)
    return DeltaMomentReport(status="ok", beta=beta, delta=delta, lhs=lhs)


def young_grid_scan(
    k_values: Sequence[float] | None = None,
    u_values: Sequence[float] | None = None,
) -> tuple[list[Violation], float]:
    """Scan Delta(k, u) over a (k, u) grid with k <= 8/9.

    Returns the violations (Delta below ``INEQ_TOL``; expected none) and the
    maximum absolute disagreement between the closed-form minimum
    :func:`young_delta_star` and the grid minimum over k augmented with the
    analytic minimizer k_u.  Default grids: k in {0.01, 0.011, ..., 8/9},
    u in {0, 0.001, ..., 10}.
    """
    if k_values is None:
        k_values = [round(0.01 + 0.001 * i, 3) for i in range(879)] + [8.0 / 9.0]
    if u_values is None:
        u_values = np.arange(0.0, 10.0005, 1e-3).tolist()
    ks = np.asarray(k_values, dtype=float)
    us = np.asarray(u_values, dtype=float)
    gu = _g_array(us)

    violations: list[Violation] = []
    grid_min = np.full(us.shape, np.inf)
    for k in ks:
        delta = 2.0 * k / 3.0 + gu / (3.0 * k * k) - us
        np.minimum(grid_min, delta, out=grid_min)
        bad = np.nonzero(delta < INEQ_TOL)[0]
        violations.extend(
            Violation(
                name="young",
                point={"k": float(k), "u": float(us[i])},
                lhs=float(delta[i]),
                rhs=0.0,
            )
            for i in bad
        )
    # include the analytic minimizer so the comparison is against the true
    # constrained minimum, not just the uniform grid
    k_star = np.minimum(np.cbrt(gu), 8.0 / 9.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        delta_at_star = 2.0 * k_star / 3.0 + gu / (3.0 * k_star * k_star) - us
    # u = 0 has k_star = 0: the infimum over k in (0, 8/9] is the k->0+ limit 0
    delta_at_star = np.where(k_star == 0.0, 0.0, delta_at_star)
    np.minimum(grid_min, delta_at_star, out=grid_min)
    star = np.array([float(young_delta_star(float(u))) for u in us])
    max_gap = float(np.max(np.abs(grid_min - star)))
    return violations, max_gap
