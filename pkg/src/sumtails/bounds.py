"""Bound evaluators for the tail cost of capping a sum of independent summands.

Let S be the raw sum of a unit-variance system and S_bar the sum after each
summand is capped at level w (winsorized: x -> min(x, w); or truncated:
x -> x 1{x <= w}).  The tail difference

    Delta_w(z) = P(S > z) - P(S_bar > z)

is nonnegative and admits five upper bounds P1..P5 built from the exceedance
structure of the summands:

    P1 = P(max_i X_i > w)
    P2 = P(max_i X_i > y) + Q(z, y) * sum_i P(X_i > w)
    P3 = P(max_i X_i > y) + 2 Q*(z, y) * P(max_i X_i > w)
    P4 = P(max_i X_i > z / (1 + p/2)) + A_p4 / (c + z)^p * P(max_i X_i > w)
    P5 = A_p5 * mu_p / (c + z)^p

with the concentration quantities

    Q(z, y)  = max_i P(S - X_i > z - y, max_{j != i} X_j <= y)
    Q*(z, y) = max(Q(z, y), P(S > z, max_j X_j <= y)).

P1..P3 are fully explicit and verified exactly against convolution oracles;
P4 and P5 carry constants that are only known to exist, so they are exposed
as caller-supplied values (default 1, flagged) and calibrated empirically in
:mod:`sumtails.verify`.  The same policy applies to the exponential
normal-approximation bound A * beta_v * exp(-lambda z) and therefore to the
composite bound (their sum).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import IO, Iterable, Mapping, Sequence

from .discrete import (
    CONVOLUTION_CAP,
    ConvolutionCapError,
    Number,
    SubMeasure,
    System,
    _convolve_two,
    capped_sum_rv,
    degenerate,
    max_tail,
    restrict_at_most,
)
from .gauss import norm_cdf
from .scalars import beta_v, mu_p

#: names of the caller-supplied constants (each defaults to 1)
CONSTANT_NAMES = ("theorem", "p4", "p5", "bikelis")

WINSOR_MODES = ("winsorize", "truncate")


@dataclass(frozen=True)
class BoundParams:
    """Free parameters of the bound family plus caller-supplied constants.

    ``y`` may be a positive number or ``"auto"``, in which case P2/P3 are
    minimized over the candidate grid {z / (1 + p/2)} union {z 2^-j : j <=
    12}; the structural constants for the inexplicit bounds live in
    ``constants`` under the keys in :data:`CONSTANT_NAMES`.
    """

    v: Number = 1
    w: Number = 1
    lam: float = 0.5
    p: float = 2.0
    c: float = 1.0
    y: Number | str = "auto"
    constants: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for name in ("v", "w", "lam", "p", "c"):
            if not getattr(self, name) > 0:
                raise ValueError(f"parameter {name} must be positive, got {getattr(self, name)}")
        if self.y != "auto" and not self.y > 0:
            raise ValueError(f"parameter y must be positive or 'auto', got {self.y}")
        for name, value in self.constants.items():
            if name not in CONSTANT_NAMES:
                raise ValueError(f"unknown constant {name!r}; expected one of {CONSTANT_NAMES}")
            if not value > 0:
                raise ValueError(f"constant {name!r} must be positive, got {value}")

    def constant(self, name: str) -> tuple[float, bool]:
        """Return (value, defaulted) for a named constant."""
        if name in self.constants:
            return float(self.constants[name]), False
        return 1.0, True


@dataclass(frozen=True)
class BoundReport:
    """Per-z evaluation of every bound; None marks a not-applicable entry."""

    z: float
    delta_w: Number | None
    p1: Number
    p2: Number
    p3: Number
    p4: float | None
    p5: float | None
    best: Number
    theorem_bound: float
    corollary_bound: float
    bikelis_sum: Number
    winsor_mode: str
    warnings: tuple[str, ...] = ()


class SystemOracle:
    """Caches the exact convolution laws needed by the bound evaluators.

    One oracle serves every (z, w, y, mode) query against a fixed system, so
    sweeps reuse laws instead of re-convolving.  All cached objects are
    immutable; the cache dictionaries are only grown, never mutated in
    place, which keeps concurrent readers safe.
    """

    def __init__(self, system: System, cap: int = CONVOLUTION_CAP):
        self.system = system
        self.cap = cap
        self._law_sum: SubMeasure | None = None
        self._law_capped: dict[tuple[Number, str], SubMeasure] = {}
        self._restricted: dict[Number, tuple[list[SubMeasure], SubMeasure]] = {}
        self._loo_capped: dict[tuple[Number, str], list[SubMeasure]] = {}
        self._max_tail: dict[Number, Number] = {}
        self._sum_exceedance: dict[Number, Number] = {}

    # -- laws ---------------------------------------------------------------

    def _chain(self, measures: Sequence[SubMeasure]) -> SubMeasure:
        exact = self.system.exact
        if not measures:
            return degenerate(0, exact)
        current = measures[0]
        for nxt in measures[1:]:
            values, masses = _convolve_two(current, nxt, exact, self.cap)
            current = SubMeasure(values=values, masses=masses, exact=exact)
        return current

    def _leave_one_out(self, measures: Sequence[SubMeasure]) -> list[SubMeasure]:
        """Convolutions of all-but-one input, via prefix/suffix products."""
        n = len(measures)
        exact = self.system.exact
        if n == 1:
            return [degenerate(0, exact)]
        prefix: list[SubMeasure] = [measures[0]]
        for m in measures[1:]:
            prefix.append(self._chain([prefix[-1], m]))
        suffix: list[SubMeasure] = [measures[-1]]
        for m in reversed(measures[:-1]):
            suffix.append(self._chain([m, suffix[-1]]))
        suffix.reverse()
        out = []
        for i in range(n):
            if i == 0:
                out.append(suffix[1])
            elif i == n - 1:
                out.append(prefix[n - 2])
            else:
                out.append(self._chain([prefix[i - 1], suffix[i + 1]]))
        return out

    def law_sum(self) -> SubMeasure:
        """Exact law of the raw sum S."""
        if self._law_sum is None:
            self._law_sum = self._chain([rv.as_submeasure() for rv in self.system.rvs])
        return self._law_sum

    def law_capped(self, w: Number, mode: str) -> SubMeasure:
        """Exact law of the capped sum S_bar at level w."""
        key = (w, mode)
        if key not in self._law_capped:
            capped = [capped_sum_rv(rv, w, mode).as_submeasure() for rv in self.system.rvs]
            self._law_capped[key] = self._chain(capped)
        return self._law_capped[key]

    def restricted(self, y: Number) -> tuple[list[SubMeasure], SubMeasure]:
        """Leave-one-out and full convolutions of the summands restricted to {X <= y}."""
        if y not in self._restricted:
            parts = [restrict_at_most(rv, y) for rv in self.system.rvs]
            loo = self._leave_one_out(parts)
            full = self._chain(parts)
            self._restricted[y] = (loo, full)
        return self._restricted[y]

    def loo_capped(self, w: Number, mode: str) -> list[SubMeasure]:
        """Laws of S_bar - X_bar_i (leave-one-out capped sums)."""
        key = (w, mode)
        if key not in self._loo_capped:
            capped = [capped_sum_rv(rv, w, mode).as_submeasure() for rv in self.system.rvs]
            self._loo_capped[key] = self._leave_one_out(capped)
        return self._loo_capped[key]

    # -- scalar queries -----------------------------------------------------

    def max_tail_at(self, t: Number) -> Number:
        if t not in self._max_tail:
            self._max_tail[t] = max_tail(self.system, t)
        return self._max_tail[t]

    def sum_exceedance(self, w: Number) -> Number:
        """sum_i P(X_i > w)."""
        if w not in self._sum_exceedance:
            zero = Fraction(0) if self.system.exact else 0.0
            self._sum_exceedance[w] = sum((rv.tail(w) for rv in self.system.rvs), zero)
        return self._sum_exceedance[w]

    def delta(self, z: Number, w: Number, mode: str) -> Number:
        """Delta_w(z) = P(S > z) - P(S_bar > z), exact in exact mode."""
        return self.law_sum().tail(z) - self.law_capped(w, mode).tail(z)

    def q(self, z: Number, y: Number) -> Number:
        """Q(z, y) = max_i P(S - X_i > z - y, max_{j != i} X_j <= y)."""
        loo, _ = self.restricted(y)
        return max(m.tail(z - y) for m in loo)

    def qstar(self, z: Number, y: Number) -> Number:
        """Q*(z, y) = max(Q(z, y), P(S > z, max_j X_j <= y))."""
        loo, full = self.restricted(y)
        q = max(m.tail(z - y) for m in loo)
        return max(q, full.tail(z))


def bh_bound(z: Number, y: Number) -> float:
    """Bennett-Hoeffding exponential bound (e / ((z - y) y))^((z - y) / y).

    Dominates Q*(z, y) for unit-total-variance systems whenever z > y > 0;
    returns 1 when z <= y or when the raw value exceeds 1.
    """
    if not y > 0:
        raise ValueError(f"y must be positive, got {y}")
    z = float(z)
    y = float(y)
    if z <= y:
        return 1.0
    t = z - y
    log_val = (t / y) * (1.0 - math.log(t * y))
    return 1.0 if log_val >= 0.0 else math.exp(log_val)


def q_exact(system: System, z: Number, y: Number, *, oracle: SystemOracle | None = None) -> Number:
    """Exact Q(z, y) by convolving the {X_j <= y}-restricted summands.

    For a single-summand system the leave-one-out sum is the empty sum, a
    unit mass at 0, so Q = 1{0 > z - y}.
    """
    oracle = oracle if oracle is not None else SystemOracle(system)
    return oracle.q(z, y)


def qstar_exact(
    system: System, z: Number, y: Number, *, oracle: SystemOracle | None = None
) -> Number:
    """Exact Q*(z, y) = max(Q(z, y), P(S > z, max_j X_j <= y))."""
    oracle = oracle if oracle is not None else SystemOracle(system)
    return oracle.qstar(z, y)


def _auto_y_candidates(z: Number, p: float, w: Number) -> list[Number]:
    """Candidate y grid: the scaled choice z / (1 + p/2) plus halvings of z.

    Falls back to {w} when z <= 0 leaves the grid empty (any positive y
    yields a valid bound).
    """
    if not z > 0:
        return [w]
    exact = isinstance(z, (Fraction, int))
    if exact and float(p).is_integer():
        denom = 1 + Fraction(int(p), 2)
        half = Fraction(1, 2)
    else:
        z = float(z)
        denom = 1.0 + p / 2.0
        half = 0.5
    candidates = [z / denom] + [z * half**j for j in range(1, 13)]
    seen: set = set()
    out = []
    for y in candidates:
        if y in seen:
            continue
        seen.add(y)
        out.append(y)
    return out


def p_bounds(
    system: System,
    z: Number,
    params: BoundParams = BoundParams(),
    mode: str = "winsorize",
    *,
    oracle: SystemOracle | None = None,
) -> BoundReport:
    """Evaluate Delta_w(z) and all five bounds at one z.

    P2/P3 are minimized over the y candidates when ``params.y`` is "auto".
    P4/P5 are reported as not-applicable (None) for z <= 0, where their
    derivation does not apply; with defaulted constants they are reported
    and flagged but excluded from ``best``.  The exact tail difference is
    included whenever the convolution oracle fits the atom budget.
    """
    if mode not in WINSOR_MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {WINSOR_MODES}")
    oracle = oracle if oracle is not None else SystemOracle(system)
    warnings: list[str] = []

    w = params.w
    p1 = oracle.max_tail_at(w)
    sum_exc = oracle.sum_exceedance(w)

    try:
        delta_w = oracle.delta(z, w, mode)
    except ConvolutionCapError:
        delta_w = None
        warnings.append("tail-difference oracle skipped: convolution cap exceeded")

    y_candidates = _auto_y_candidates(z, params.p, w) if params.y == "auto" else [params.y]
    p2 = None
    p3 = None
    for y in y_candidates:
        mt_y = oracle.max_tail_at(y)
        cand2 = mt_y + oracle.q(z, y) * sum_exc
        cand3 = mt_y + 2 * oracle.qstar(z, y) * p1
        if p2 is None or cand2 < p2:
            p2 = cand2
        if p3 is None or cand3 < p3:
            p3 = cand3

    # P4/P5 with defaulted constants are reported (flagged) but kept out of
    # `best`: an unsupplied constant must never silently tighten the bound
    in_best: list[Number] = [p1, p2, p3]
    if z > 0:
        a4, a4_defaulted = params.constant("p4")
        a5, a5_defaulted = params.constant("p5")
        if a4_defaulted:
            warnings.append("constant 'p4' defaulted to 1")
        if a5_defaulted:
            warnings.append("constant 'p5' defaulted to 1")
        zf = float(z)
        denom = (params.c + zf) ** params.p
        p4 = float(oracle.max_tail_at(zf / (1.0 + params.p / 2.0))) + a4 / denom * float(p1)
        p5 = a5 * float(mu_p(system, params.p)) / denom
        if not a4_defaulted:
            in_best.append(p4)
        if not a5_defaulted:
            in_best.append(p5)
    else:
        p4 = None
        p5 = None

    best = min(in_best)
    theorem = theorem_bound(system, z, params)
    corollary = theorem + float(best)
    bik = bikelis_sum(system, z, params.v)
    return BoundReport(
        z=float(z),
        delta_w=delta_w,
        p1=p1,
        p2=p2,
        p3=p3,
        p4=p4,
        p5=p5,
        best=best,
        theorem_bound=theorem,
        corollary_bound=corollary,
        bikelis_sum=bik,
        winsor_mode=mode,
        warnings=tuple(warnings),
    )


def bikelis_sum(system: System, z: Number, v: Number = 1) -> Number:
    """sum_i E min(X_i^2 / (v(|z|+1))^2, |X_i|^3 / (v(|z|+1))^3).

    With v = 1 this is the classic z-damped moment sum; it equals beta_v of
    the system at scale v (1 + |z|), so z = 0, v = 1 recovers beta_1 exactly.
    """
    scale = v * (1 + abs(z))
    return beta_v(system, scale)


def theorem_bound(system: System, z: Number, params: BoundParams = BoundParams()) -> float:
    """Structural normal-approximation bound A * beta_v * exp(-lambda z).

    The constant A is caller-supplied (``constants["theorem"]``, default 1);
    it is a claimed bound only up to that constant, which
    :func:`sumtails.verify.calibrate` estimates empirically.
    """
    a, _ = params.constant("theorem")
    beta = float(beta_v(system, params.v))
    return a * beta * math.exp(-params.lam * float(z))


def corollary_bound(
    system: System,
    z: Number,
    params: BoundParams = BoundParams(),
    mode: str = "winsorize",
    *,
    oracle: SystemOracle | None = None,
) -> float:
    """Composite bound on |P(S > z) - P(Z > z)|: theorem term plus min(P1..P5)."""
    report = p_bounds(system, z, params, mode, oracle=oracle)
    return report.theorem_bound + float(report.best)


def normal_tail(z: Number) -> float:
    """P(Z > z) for a standard normal Z."""
    return norm_cdf(-float(z))


# ---------------------------------------------------------------------------
# Report serialization
# ---------------------------------------------------------------------------

_CSV_COLUMNS = (
    "z",
    "delta_w",
    "p1",
    "p2",
    "p3",
    "p4",
    "p5",
    "best",
    "theorem",
    "corollary",
    "bikelis",
)


def _fmt(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _report_values(report: BoundReport) -> tuple:
    return (
        report.z,
        report.delta_w,
        report.p1,
        report.p2,
        report.p3,
        report.p4,
        report.p5,
        report.best,
        report.theorem_bound,
        report.corollary_bound,
        report.bikelis_sum,
    )


def bound_reports_to_csv(reports: Iterable[BoundReport], fh: IO[str]) -> None:
    """Write one CSV row per z; exact values are printed as num/den."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(_CSV_COLUMNS)
    for report in reports:
        writer.writerow([_fmt(v) for v in _report_values(report)])


def bound_reports_to_json(reports: Iterable[BoundReport]) -> str:
    rows = []
    for report in reports:
        row = dict(zip(_CSV_COLUMNS, [_fmt(v) for v in _report_values(report)]))
        row["winsor_mode"] = report.winsor_mode
        if report.warnings:
            row["warnings"] = list(report.warnings)
        rows.append(row)
    return json.dumps(rows, indent=2, sort_keys=True)
