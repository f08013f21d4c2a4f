"""Finite discrete random variables with exact-rational or float arithmetic.

The building blocks here are atomic (sub-)probability measures on the real
line.  A :class:`DiscreteRV` is a probability measure (total mass one); a
:class:`SubMeasure` is allowed total mass <= 1 and represents a variable
restricted to an event, which is what convolutions of restricted summands
produce.  A :class:`System` is an ordered family of independent, zero-mean
summands whose variances add up to one.

Two arithmetic modes are supported and never mixed inside one computation:

* exact mode -- values and masses are :class:`fractions.Fraction`; every
  probability computed downstream is exact, so inequality checks can
  distinguish a genuine violation from rounding noise;
* float mode -- IEEE doubles, for large grids and calibration sweeps; any
  two evaluations of the same query are bit-for-bit identical.

All objects are immutable after construction and safe to share between
threads.
"""

from __future__ import annotations

import json
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from math import isfinite, isqrt, sqrt
from typing import Iterable, NamedTuple, Sequence, Union

Number = Union[Fraction, float, int]

#: float-mode tolerance for mass/mean/variance normalization checks
MASS_TOL = 1e-12
#: float-mode relative distance below which neighbouring atoms are merged
MERGE_REL_TOL = 1e-15
#: default budget of intermediate atoms for exact convolutions
CONVOLUTION_CAP = 10_000_000


class ConvolutionCapError(ValueError):
    """An exact convolution would exceed the intermediate-atom budget.

    Raised instead of silently grinding: callers should fall back to the
    Monte Carlo estimator in :mod:`sumtails.mc` for systems of this size.
    """


class Atom(NamedTuple):
    """One support point of an atomic measure: value ``x`` with mass ``p``."""

    x: Number
    p: Number


def _is_exact(value: object) -> bool:
    return isinstance(value, (Fraction, int))


def _coerce(value: Number, exact: bool) -> Number:
    if exact:
        if isinstance(value, Fraction):
            return value
        # Fraction(float) is the exact binary value of the float; callers
        # that care about decimal semantics pass Fraction or str upstream.
        return Fraction(value)
    return float(value)


def _merge_pairs(
    pairs: Iterable[tuple[Number, Number]], exact: bool
) -> tuple[tuple[Number, ...], tuple[Number, ...]]:
    """Sort atoms by value, drop zero masses, merge coinciding values.

    Exact mode merges on equality.  Float mode also merges neighbours within
    ``MERGE_REL_TOL`` relative distance, keeping the smaller value, so that
    repeated convolutions cannot blow up the support with near-duplicates.
    """
    cleaned: list[tuple[Number, Number]] = []
    for x, p in pairs:
        x = _coerce(x, exact)
        p = _coerce(p, exact)
        if not exact and not (isfinite(x) and isfinite(p)):
            raise ValueError(f"atom ({x}, {p}) is not finite")
        if p < 0:
            raise ValueError(f"negative mass {p} at value {x}")
        if p == 0:
            continue
        cleaned.append((x, p))
    cleaned.sort(key=lambda a: a[0])

    values: list[Number] = []
    masses: list[Number] = []
    for x, p in cleaned:
        if values:
            last = values[-1]
            if x == last:
                masses[-1] += p
                continue
            if not exact:
                scale = max(abs(last), abs(x))
                if x - last <= MERGE_REL_TOL * scale:
                    masses[-1] += p
                    continue
        values.append(x)
        masses.append(p)
    return tuple(values), tuple(masses)


@dataclass(frozen=True)
class _AtomicMeasure:
    """Shared storage and queries for sorted atomic measures."""

    values: tuple[Number, ...]
    masses: tuple[Number, ...]
    exact: bool
    # suffix[i] = masses[i] + ... + masses[-1]; suffix[len] = 0
    _suffix: tuple[Number, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        zero = Fraction(0) if self.exact else 0.0
        suffix = [zero] * (len(self.masses) + 1)
        for i in range(len(self.masses) - 1, -1, -1):
            suffix[i] = suffix[i + 1] + self.masses[i]
        object.__setattr__(self, "_suffix", tuple(suffix))

    @property
    def atoms(self) -> tuple[Atom, ...]:
        return tuple(Atom(x, p) for x, p in zip(self.values, self.masses))

    @property
    def mass(self) -> Number:
        """Total mass of the measure."""
        return self._suffix[0]

    def tail(self, z: Number) -> Number:
        """Mass strictly above ``z``."""
        return self._suffix[bisect_right(self.values, z)]

    def mass_at_most(self, t: Number) -> Number:
        """Mass of the event {value <= t}."""
        return self.mass - self.tail(t)

    def mass_at_least(self, t: Number) -> Number:
        """Mass of the event {value >= t}."""
        return self._suffix[bisect_left(self.values, t)]

    def interval_mass(self, a: Number, b: Number) -> Number:
        """Mass of the closed interval [a, b]."""
        if b < a:
            zero = Fraction(0) if self.exact else 0.0
            return zero
        return self.mass_at_least(a) - self.tail(b)

    def mean(self) -> Number:
        zero = Fraction(0) if self.exact else 0.0
        return sum((x * p for x, p in zip(self.values, self.masses)), zero)

    def second_moment(self) -> Number:
        zero = Fraction(0) if self.exact else 0.0
        return sum((x * x * p for x, p in zip(self.values, self.masses)), zero)

    def abs_moment(self, p: Number) -> Number:
        """E |X|^p restricted to this measure (no normalization by mass).

        Exact for integer exponents in exact mode; float otherwise.
        """
        if self.exact and float(p).is_integer():
            k = int(p)
            return sum(
                (abs(x) ** k * m for x, m in zip(self.values, self.masses)),
                Fraction(0),
            )
        return sum(abs(float(x)) ** float(p) * float(m) for x, m in zip(self.values, self.masses))


@dataclass(frozen=True)
class SubMeasure(_AtomicMeasure):
    """Atomic measure with total mass <= 1 (a variable restricted to an event)."""

    def __post_init__(self) -> None:
        super().__post_init__()
        total = self.mass
        limit = 1 if self.exact else 1.0 + MASS_TOL
        if total > limit:
            raise ValueError(f"sub-measure mass {total} exceeds 1")

    @classmethod
    def from_atoms(cls, pairs: Iterable[tuple[Number, Number]], exact: bool = True) -> "SubMeasure":
        values, masses = _merge_pairs(pairs, exact)
        return cls(values=values, masses=masses, exact=exact)


@dataclass(frozen=True)
class DiscreteRV(_AtomicMeasure):
    """Finite discrete random variable: sorted atoms with total mass one."""

    def __post_init__(self) -> None:
        super().__post_init__()
        if not self.values:
            raise ValueError("a random variable needs at least one atom")
        total = self.mass
        if self.exact:
            if total != 1:
                raise ValueError(f"masses must sum to 1 exactly, got {total}")
        elif abs(total - 1.0) > MASS_TOL:
            raise ValueError(f"masses must sum to 1 within {MASS_TOL}, got {total}")

    @classmethod
    def from_atoms(cls, pairs: Iterable[tuple[Number, Number]], exact: bool = True) -> "DiscreteRV":
        values, masses = _merge_pairs(pairs, exact)
        return cls(values=values, masses=masses, exact=exact)

    def variance(self) -> Number:
        m = self.mean()
        return self.second_moment() - m * m

    def as_submeasure(self) -> SubMeasure:
        return SubMeasure(values=self.values, masses=self.masses, exact=self.exact)


@dataclass(frozen=True)
class System:
    """Ordered family of independent zero-mean summands with unit total variance.

    ``unit_variance=False`` skips the total-variance check (zero means are
    still enforced); the structural bounds remain valid for total variance
    at most one, and several small worked examples live there.
    """

    rvs: tuple[DiscreteRV, ...]
    unit_variance: bool = True

    def __post_init__(self) -> None:
        if not self.rvs:
            raise ValueError("a system needs at least one summand")
        exact = self.rvs[0].exact
        if any(rv.exact != exact for rv in self.rvs):
            raise ValueError("all summands must share one arithmetic mode")
        total_var = Fraction(0) if exact else 0.0
        for i, rv in enumerate(self.rvs):
            mean = rv.mean()
            if exact:
                if mean != 0:
                    raise ValueError(f"summand {i} has mean {mean}, expected 0")
            else:
                sd = sqrt(max(float(rv.variance()), 0.0))
                if abs(mean) > MASS_TOL * sd:
                    raise ValueError(f"summand {i} has mean {mean}, expected ~0")
            total_var += rv.variance()
        if self.unit_variance:
            if exact:
                if total_var != 1:
                    raise ValueError(f"variances must sum to 1 exactly, got {total_var}")
            elif abs(total_var - 1.0) > MASS_TOL:
                raise ValueError(f"variances must sum to 1 within {MASS_TOL}, got {total_var}")

    def total_variance(self) -> Number:
        zero = Fraction(0) if self.exact else 0.0
        return sum((rv.variance() for rv in self.rvs), zero)

    @property
    def n(self) -> int:
        return len(self.rvs)

    @property
    def exact(self) -> bool:
        return self.rvs[0].exact


def _exact_sqrt(q: Fraction) -> Fraction | None:
    """Exact square root of a nonnegative rational, or None if irrational."""
    if q < 0:
        return None
    num, den = q.numerator, q.denominator
    rn, rd = isqrt(num), isqrt(den)
    if rn * rn == num and rd * rd == den:
        return Fraction(rn, rd)
    return None


def make_system(
    raw: Sequence[Iterable[tuple[Number, Number]]],
    standardize: bool = False,
    exact: bool = True,
    unit_variance: bool = True,
) -> System:
    """Build a :class:`System` from per-summand atom lists.

    With ``standardize`` on, each summand is shifted to mean zero and all
    values are then multiplied by one common factor so the variances sum to
    one.  In exact mode that factor must itself be rational (the total
    variance a perfect square in Q), otherwise a ``ValueError`` asks for
    float mode.  With ``standardize`` off the inputs must already satisfy
    the invariants.
    """
    if not raw:
        raise ValueError("need at least one summand")
    rvs = [DiscreteRV.from_atoms(pairs, exact=exact) for pairs in raw]
    if not standardize:
        return System(rvs=tuple(rvs), unit_variance=unit_variance)

    centered = []
    for rv in rvs:
        m = rv.mean()
        centered.append([(x - m, p) for x, p in zip(rv.values, rv.masses)])
    # variance is shift-invariant, so the uncentered rvs give the same total
    total_var = sum((rv.variance() for rv in rvs), Fraction(0) if exact else 0.0)
    if total_var == 0:
        raise ValueError("total variance is zero; cannot standardize a degenerate system")
    if exact:
        scale = _exact_sqrt(Fraction(1, 1) / total_var)
        if scale is None:
            raise ValueError(
                f"1/total variance {Fraction(1, 1) / total_var} has no rational square root; "
                "use exact=False or rescale the inputs"
            )
    else:
        scale = 1.0 / sqrt(total_var)
    scaled = [[(x * scale, p) for x, p in pairs] for pairs in centered]
    return System(rvs=tuple(DiscreteRV.from_atoms(pairs, exact=exact) for pairs in scaled))


def winsorize(rv: DiscreteRV, w: Number) -> DiscreteRV:
    """Cap the variable at ``w``: every value x becomes min(x, w)."""
    if not w > 0:
        raise ValueError(f"threshold w must be positive, got {w}")
    w = _coerce(w, rv.exact)
    return DiscreteRV.from_atoms(
        ((x if x <= w else w, p) for x, p in zip(rv.values, rv.masses)),
        exact=rv.exact,
    )


def truncate(rv: DiscreteRV, w: Number) -> DiscreteRV:
    """Zero the variable above ``w``: x becomes x * 1{x <= w}."""
    if not w > 0:
        raise ValueError(f"threshold w must be positive, got {w}")
    w = _coerce(w, rv.exact)
    zero = Fraction(0) if rv.exact else 0.0
    return DiscreteRV.from_atoms(
        ((x if x <= w else zero, p) for x, p in zip(rv.values, rv.masses)),
        exact=rv.exact,
    )


TRANSFORMS = {"winsorize": winsorize, "truncate": truncate}


def capped_sum_rv(rv: DiscreteRV, w: Number, mode: str) -> DiscreteRV:
    """Apply the named capping transform (``winsorize`` or ``truncate``)."""
    try:
        return TRANSFORMS[mode](rv, w)
    except KeyError:
        raise ValueError(f"unknown mode {mode!r}; expected 'winsorize' or 'truncate'") from None


def degenerate(x: Number = 0, exact: bool = True) -> SubMeasure:
    """Unit mass at ``x`` (the empty convolution / empty sum)."""
    one = Fraction(1) if exact else 1.0
    return SubMeasure.from_atoms([(x, one)], exact=exact)


def restrict_at_most(rv: DiscreteRV | SubMeasure, y: Number) -> SubMeasure:
    """Sub-measure of the atoms with value <= y (mass may drop below 1)."""
    return SubMeasure.from_atoms(
        ((x, p) for x, p in zip(rv.values, rv.masses) if x <= y),
        exact=rv.exact,
    )


def _convolve_two(
    a: _AtomicMeasure, b: _AtomicMeasure, exact: bool, cap: int
) -> tuple[tuple[Number, ...], tuple[Number, ...]]:
    n_pairs = len(a.values) * len(b.values)
    if n_pairs > cap:
        raise ConvolutionCapError(
            f"convolution needs {n_pairs} intermediate atoms (cap {cap}); "
            "use Monte Carlo estimation (sumtails.mc) for systems of this size"
        )
    acc: dict[Number, Number] = {}
    for x1, p1 in zip(a.values, a.masses):
        for x2, p2 in zip(b.values, b.masses):
            key = x1 + x2
            m = p1 * p2
            if key in acc:
                acc[key] += m
            else:
                acc[key] = m
    return _merge_pairs(acc.items(), exact)


def convolve(
    items: Sequence[DiscreteRV | SubMeasure], cap: int = CONVOLUTION_CAP
) -> SubMeasure:
    """Exact law of the sum of independent inputs, as a :class:`SubMeasure`.

    Total mass is the product of the input masses, so restricted summands
    (sub-measures) yield the joint probability of the restriction events.
    Raises :class:`ConvolutionCapError` when the naive pair count at any
    step exceeds ``cap``.
    """
    if not items:
        raise ValueError("need at least one measure to convolve")
    exact = items[0].exact
    if any(m.exact != exact for m in items):
        raise ValueError("cannot convolve measures with mixed arithmetic modes")
    values, masses = items[0].values, items[0].masses
    current = SubMeasure(values=values, masses=masses, exact=exact)
    for nxt in items[1:]:
        values, masses = _convolve_two(current, nxt, exact, cap)
        current = SubMeasure(values=values, masses=masses, exact=exact)
    return current


def tail(m: _AtomicMeasure, z: Number) -> Number:
    """P(value > z), strict inequality."""
    return m.tail(z)


def max_tail(system: System, y: Number) -> Number:
    """P(max_i X_i > y) = 1 - prod_i P(X_i <= y), exact under independence."""
    one = Fraction(1) if system.exact else 1.0
    prod = one
    for rv in system.rvs:
        prod *= rv.mass_at_most(y)
    return one - prod


# ---------------------------------------------------------------------------
# JSON interchange
#
# Schema: {"rvs": [{"atoms": [{"x": -0.5, "p": "1/2"}, ...]}, ...],
#          "mode": "rational" | "float",
#          "unit_variance": true}          <- optional, default true
# Numbers may be JSON numbers, decimal strings, or "num/den" strings; in
# rational mode decimal notation is taken at face value ("0.1" means 1/10).
# ---------------------------------------------------------------------------


def _parse_number(value: object, exact: bool) -> Number:
    if isinstance(value, str):
        num = Fraction(value)
    elif isinstance(value, (int, Fraction)):
        num = Fraction(value)
    elif isinstance(value, float):
        num = Fraction(value)
    else:
        raise ValueError(f"cannot parse number from {value!r}")
    return num if exact else float(num)


def system_from_dict(data: dict) -> System:
    mode = data.get("mode", "rational")
    if mode not in ("rational", "float"):
        raise ValueError(f"unknown arithmetic mode {mode!r}")
    exact = mode == "rational"
    rvs_spec = data.get("rvs")
    if not isinstance(rvs_spec, list) or not rvs_spec:
        raise ValueError("'rvs' must be a nonempty list")
    raw = []
    for entry in rvs_spec:
        atoms = entry.get("atoms")
        if not isinstance(atoms, list) or not atoms:
            raise ValueError("each rv needs a nonempty 'atoms' list")
        raw.append(
            [(_parse_number(a["x"], exact), _parse_number(a["p"], exact)) for a in atoms]
        )
    unit_variance = bool(data.get("unit_variance", True))
    return make_system(raw, standardize=False, exact=exact, unit_variance=unit_variance)


def system_to_dict(system: System) -> dict:
    def fmt(x: Number) -> object:
        if isinstance(x, Fraction):
            return str(x) if x.denominator != 1 else x.numerator
        return x

    out = {
        "mode": "rational" if system.exact else "float",
        "rvs": [
            {"atoms": [{"x": fmt(x), "p": fmt(p)} for x, p in zip(rv.values, rv.masses)]}
            for rv in system.rvs
        ],
    }
    if not system.unit_variance:
        out["unit_variance"] = False
    return out


def load_system(path: str) -> System:
    with open(path, "r", encoding="utf-8") as fh:
        # parse_float=Fraction keeps decimal literals exact in rational mode
        data = json.load(fh, parse_float=Fraction)
    return system_from_dict(data)


def save_system(system: System, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(system_to_dict(system), fh, indent=2, sort_keys=True)
        fh.write("\n")
