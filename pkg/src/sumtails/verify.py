"""End-to-end verification: corpora, exact sweeps, calibration, sharpness.

The exact side generates seeded corpora of small rational systems and checks
the fully explicit inequalities (the tail-difference bounds P1..P3, the
Bennett-Hoeffding domination of Q*, the mean-absolute-value bound) with
Fraction arithmetic, so a reported violation is a real counterexample and
not rounding noise.

The empirical side calibrates the constants the structural bounds leave
unspecified: for each bound it reports the supremum over a parameter grid of
(exactly computed left side) / (structural right side with the constant
stripped), together with the witness cell attaining it.  Calibration never
asserts against a target value; it produces evidence.
"""

from __future__ import annotations

import json
import math
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Sequence

from .bounds import BoundParams, SystemOracle, normal_tail
from .discrete import ConvolutionCapError, DiscreteRV, Number, System
from .scalars import _BETA_CUBE_LIMIT, beta_v, g, mean_abs_bound, mu_p

#: default z sweep: 0, 0.25, ..., 8 (33 points, exactly representable)
DEFAULT_Z_GRID: tuple[Fraction, ...] = tuple(Fraction(i, 4) for i in range(33))
DEFAULT_W_GRID: tuple[Fraction, ...] = (Fraction(1, 4), Fraction(1, 2), Fraction(1))
DEFAULT_Y_GRID: tuple[Fraction, ...] = DEFAULT_W_GRID
#: interval left endpoints for concentration calibration: -2, -1.5, ..., 4
DEFAULT_A_GRID: tuple[Fraction, ...] = tuple(Fraction(i, 2) for i in range(-4, 9))
#: interval widths b - a for concentration calibration
DEFAULT_GAPS: tuple[Fraction, ...] = (Fraction(1, 10), Fraction(1, 2), Fraction(1), Fraction(2))

WINSOR_MODES = ("winsorize", "truncate")
CALIBRATION_BOUNDS = ("theorem", "concentration", "p4", "p5")


# ---------------------------------------------------------------------------
# Corpus generation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CorpusSpec:
    """Seeded recipe for a corpus of exact rational systems.

    Summand variances are chosen as rationals that sum to one exactly, and
    each summand is realized as a mixture of centered two-point blocks
    (variance of a block with values a and -b and mean zero is exactly a*b),
    so every generated system satisfies the invariants in exact arithmetic
    with no square-root scaling involved.
    """

    seed: int
    count: int = 200
    n_max: int = 4
    atoms_max: int = 4
    max_denominator: int = 8

    def __post_init__(self) -> None:
        if self.count < 1:
            raise ValueError(f"count must be >= 1, got {self.count}")
        if self.n_max < 1:
            raise ValueError(f"n_max must be >= 1, got {self.n_max}")
        if self.atoms_max < 2:
            raise ValueError(f"atoms_max must be >= 2, got {self.atoms_max}")
        if self.max_denominator < 2:
            raise ValueError(f"max_denominator must be >= 2, got {self.max_denominator}")


def _rand_fraction(rng: random.Random, lo: Fraction, hi: Fraction, max_den: int) -> Fraction:
    den = rng.randint(1, max_den)
    lo_n = math.ceil(lo * den)
    hi_n = math.floor(hi * den)
    if lo_n > hi_n:
        den = max_den
        lo_n = math.ceil(lo * den)
        hi_n = math.floor(hi * den)
    return Fraction(rng.randint(lo_n, hi_n), den)


def _centered_block(
    rng: random.Random, variance: Fraction, max_den: int
) -> list[tuple[Fraction, Fraction]]:
    """Two-point zero-mean block {(-b, a/(a+b)), (a, b/(a+b))} with a*b = variance."""
    b = _rand_fraction(rng, Fraction(1, 4), Fraction(2), max_den)
    a = variance / b
    s = a + b
    return [(-b, a / s), (a, b / s)]


def _random_rv(rng: random.Random, variance: Fraction, atoms: int, max_den: int) -> DiscreteRV:
    if atoms <= 2:
        pairs = _centered_block(rng, variance, max_den)
    elif atoms == 3:
        w0 = _rand_fraction(rng, Fraction(1, 8), Fraction(3, 4), max_den)
        block = _centered_block(rng, variance / (1 - w0), max_den)
        pairs = [(x, p * (1 - w0)) for x, p in block] + [(Fraction(0), w0)]
    else:
        # mixture of two centered blocks; retry a few times for distinct values
        for _ in range(8):
            w1 = _rand_fraction(rng, Fraction(1, 8), Fraction(7, 8), max_den)
            theta = _rand_fraction(rng, Fraction(1, 8), Fraction(7, 8), max_den)
            block1 = _centered_block(rng, variance * theta / w1, max_den)
            block2 = _centered_block(rng, variance * (1 - theta) / (1 - w1), max_den)
            if len({x for x, _ in block1} | {x for x, _ in block2}) == 4:
                break
        pairs = [(x, p * w1) for x, p in block1] + [(x, p * (1 - w1)) for x, p in block2]
    return DiscreteRV.from_atoms(pairs, exact=True)


def gen_corpus(spec: CorpusSpec) -> list[System]:
    """Deterministic list of exact systems; a pure function of the seed."""
    rng = random.Random(spec.seed)
    systems = []
    for _ in range(spec.count):
        n = rng.randint(1, spec.n_max)
        weights = [
            _rand_fraction(rng, Fraction(1), Fraction(8), spec.max_denominator) for _ in range(n)
        ]
        total = sum(weights)
        rvs = []
        for c in weights:
            atoms = rng.randint(2, spec.atoms_max)
            rvs.append(_random_rv(rng, c / total, atoms, spec.max_denominator))
        systems.append(System(rvs=tuple(rvs)))
    return systems


# ---------------------------------------------------------------------------
# Exact verification sweep
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OsipovViolation:
    """One grid cell where an exact tail-difference inequality failed."""

    z: float
    w: float
    y: float | None
    bound: str  # "nonneg", "p1", "p2" or "p3"
    delta: Number
    bound_value: Number


def _scaled_y(z: Number, p: Number) -> Number:
    if isinstance(z, (Fraction, int)) and float(p).is_integer():
        return z / (1 + Fraction(int(p), 2))
    return float(z) / (1.0 + float(p) / 2.0)


def verify_osipov(
    system: System,
    z_grid: Sequence[Number] = DEFAULT_Z_GRID,
    w_grid: Sequence[Number] = DEFAULT_W_GRID,
    y_grid: Sequence[Number] = DEFAULT_Y_GRID,
    mode: str = "winsorize",
    *,
    p: Number = 2,
    include_scaled_y: bool = True,
    oracle: SystemOracle | None = None,
    skip_log: list | None = None,
) -> list[OsipovViolation]:
    """Exact check of 0 <= Delta_w(z) <= min(P1, P2(y), P3(y)) over the grids.

    With ``include_scaled_y`` the y grid is augmented per z with the scaled
    choice z / (1 + p/2).  Cells whose convolutions exceed the atom budget
    are appended to ``skip_log`` instead of failing the sweep.  The expected
    result is an empty list: these inequalities are theorems.
    """
    if mode not in WINSOR_MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {WINSOR_MODES}")
    oracle = oracle if oracle is not None else SystemOracle(system)
    violations: list[OsipovViolation] = []

    for z in z_grid:
        ys: list[Number] = list(y_grid)
        if include_scaled_y:
            y_extra = _scaled_y(z, p)
            if y_extra not in ys:
                ys.append(y_extra)
        per_y = []
        for y in ys:
            try:
                per_y.append((y, oracle.max_tail_at(y), oracle.q(z, y), oracle.qstar(z, y)))
            except ConvolutionCapError:
                if skip_log is not None:
                    skip_log.append({"z": float(z), "y": float(y), "stage": "restricted"})
        for w in w_grid:
            try:
                delta = oracle.delta(z, w, mode)
            except ConvolutionCapError:
                if skip_log is not None:
                    skip_log.append({"z": float(z), "w": float(w), "stage": "capped-sum"})
                continue
            p1 = oracle.max_tail_at(w)
            sum_exc = oracle.sum_exceedance(w)
            if delta < 0:
                violations.append(
                    OsipovViolation(float(z), float(w), None, "nonneg", delta, 0)
                )
            if delta > p1:
                violations.append(OsipovViolation(float(z), float(w), None, "p1", delta, p1))
            for y, mt_y, q, qstar in per_y:
                p2 = mt_y + q * sum_exc
                if delta > p2:
                    violations.append(
                        OsipovViolation(float(z), float(w), float(y), "p2", delta, p2)
                    )
                p3 = mt_y + 2 * qstar * p1
                if delta > p3:
                    violations.append(
                        OsipovViolation(float(z), float(w), float(y), "p3", delta, p3)
                    )
    return violations


@dataclass
class CorpusVerification:
    """Aggregate result of the exact sweep over a corpus."""

    violations: list[tuple[int, str, OsipovViolation]]
    systems: int
    cells: int
    skipped: int

    @property
    def ok(self) -> bool:
        return not self.violations


def verify_corpus(
    corpus: Sequence[System],
    z_grid: Sequence[Number] = DEFAULT_Z_GRID,
    w_grid: Sequence[Number] = DEFAULT_W_GRID,
    y_grid: Sequence[Number] = DEFAULT_Y_GRID,
    modes: Sequence[str] = WINSOR_MODES,
    *,
    p: Number = 2,
    include_scaled_y: bool = True,
) -> CorpusVerification:
    """Run :func:`verify_osipov` for every system and mode, sharing oracles."""
    violations: list[tuple[int, str, OsipovViolation]] = []
    skip_log: list = []
    for idx, system in enumerate(corpus):
        oracle = SystemOracle(system)
        for mode in modes:
            found = verify_osipov(
                system,
                z_grid,
                w_grid,
                y_grid,
                mode,
                p=p,
                include_scaled_y=include_scaled_y,
                oracle=oracle,
                skip_log=skip_log,
            )
            violations.extend((idx, mode, v) for v in found)
    y_count = len(y_grid) + (1 if include_scaled_y else 0)
    cells = len(corpus) * len(modes) * len(z_grid) * len(w_grid) * y_count
    return CorpusVerification(
        violations=violations, systems=len(corpus), cells=cells, skipped=len(skip_log)
    )


# ---------------------------------------------------------------------------
# Calibration of the unspecified constants
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CalibrationResult:
    """Minimal empirical constant for one structural bound over one grid.

    ``a_min`` is the supremum over evaluated cells of exact-LHS over
    structural-RHS; ``witness`` pins the cell attaining it and reproduces
    ``a_min`` when re-evaluated.
    """

    bound_name: str
    a_min: float
    witness: dict
    grid: dict
    n_cells: int

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def _ratio_theorem(oracle: SystemOracle, z: float, params: BoundParams, mode: str) -> float:
    lhs = abs(float(oracle.law_capped(params.w, mode).tail(z)) - normal_tail(z))
    beta = float(beta_v(oracle.system, params.v))
    if beta == 0.0:
        return math.inf if lhs > 0.0 else 0.0
    return lhs * math.exp(params.lam * z) / beta


def _ratio_concentration(
    oracle: SystemOracle, i: int, a: float, b: float, params: BoundParams, mode: str
) -> float:
    law = oracle.loo_capped(params.w, mode)[i]
    lhs = float(law.interval_mass(a, b))
    beta = float(beta_v(oracle.system, params.v))
    rhs = (b - a + beta) * math.exp(-params.lam * a)
    return lhs / rhs


def _ratio_p4(oracle: SystemOracle, z: float, params: BoundParams, mode: str) -> float:
    delta = float(oracle.delta(z, params.w, mode))
    lead = float(oracle.max_tail_at(z / (1.0 + params.p / 2.0)))
    lhs = delta - lead
    if lhs <= 0.0:
        return 0.0
    structure = float(oracle.max_tail_at(params.w)) / (params.c + z) ** params.p
    if structure == 0.0:
        return math.inf
    return lhs / structure


def _ratio_p5(oracle: SystemOracle, z: float, params: BoundParams, mode: str) -> float:
    delta = float(oracle.delta(z, params.w, mode))
    structure = float(mu_p(oracle.system, params.p)) / (params.c + z) ** params.p
    if structure == 0.0:
        return math.inf if delta > 0.0 else 0.0
    return delta / structure


def calibration_ratio(
    corpus: Sequence[System],
    bound_name: str,
    cell: dict,
    params: BoundParams = BoundParams(),
    mode: str = "winsorize",
) -> float:
    """Re-evaluate one calibration cell (used to confirm a witness)."""
    oracle = SystemOracle(corpus[cell["system"]])
    if bound_name == "theorem":
        return _ratio_theorem(oracle, cell["z"], params, mode)
    if bound_name == "concentration":
        return _ratio_concentration(oracle, cell["i"], cell["a"], cell["b"], params, mode)
    if bound_name == "p4":
        return _ratio_p4(oracle, cell["z"], params, mode)
    if bound_name == "p5":
        return _ratio_p5(oracle, cell["z"], params, mode)
    raise ValueError(f"unknown bound {bound_name!r}; expected one of {CALIBRATION_BOUNDS}")


def calibrate(
    corpus: Sequence[System],
    bound_name: str,
    *,
    params: BoundParams = BoundParams(),
    z_grid: Sequence[Number] = DEFAULT_Z_GRID,
    a_grid: Sequence[Number] = DEFAULT_A_GRID,
    gaps: Sequence[Number] = DEFAULT_GAPS,
    mode: str = "winsorize",
    workers: int = 1,
) -> CalibrationResult:
    """Empirical minimal constant over (corpus x grid) for one bound family.

    Deterministic given (corpus, grids, params): cells are enumerated in a
    fixed order, per-cell ratios are pure float computations, and the final
    supremum is reduced sequentially, so the result is bit-identical for any
    ``workers`` count.  Ties keep the earliest cell as witness.
    """
    if bound_name not in CALIBRATION_BOUNDS:
        raise ValueError(f"unknown bound {bound_name!r}; expected one of {CALIBRATION_BOUNDS}")
    if not corpus:
        raise ValueError("calibration needs a nonempty corpus")
    if mode not in WINSOR_MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {WINSOR_MODES}")

    zs = [float(z) for z in z_grid]
    if bound_name in ("p4", "p5"):
        zs = [z for z in zs if z > 0.0]
    intervals = [(float(a), float(a + gap)) for a in a_grid for gap in gaps]
    if bound_name in ("theorem", "p4", "p5") and not zs:
        raise ValueError("calibration needs a nonempty z grid")
    if bound_name == "concentration" and not intervals:
        raise ValueError("calibration needs nonempty interval grids")

    def system_cells(idx: int) -> list[tuple[float, dict]]:
        oracle = SystemOracle(corpus[idx])
        out: list[tuple[float, dict]] = []
        if bound_name == "concentration":
            for i in range(corpus[idx].n):
                for a, b in intervals:
                    ratio = _ratio_concentration(oracle, i, a, b, params, mode)
                    out.append((ratio, {"system": idx, "i": i, "a": a, "b": b}))
        else:
            fn = {"theorem": _ratio_theorem, "p4": _ratio_p4, "p5": _ratio_p5}[bound_name]
            for z in zs:
                out.append((fn(oracle, z, params, mode), {"system": idx, "z": z}))
        return out

    if workers <= 1:
        per_system = [system_cells(i) for i in range(len(corpus))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_system = list(pool.map(system_cells, range(len(corpus))))

    a_min = -math.inf
    witness: dict = {}
    n_cells = 0
    for chunk in per_system:
        for ratio, cell in chunk:
            n_cells += 1
            if ratio > a_min:
                a_min = ratio
                witness = cell
    grid_desc = {
        "mode": mode,
        "v": float(params.v),
        "w": float(params.w),
        "lam": params.lam,
        "p": params.p,
        "c": params.c,
        "z": {"min": min(zs), "max": max(zs), "count": len(zs)} if zs else None,
        "intervals": len(intervals) if bound_name == "concentration" else None,
        "systems": len(corpus),
    }
    return CalibrationResult(
        bound_name=bound_name, a_min=a_min, witness=witness, grid=grid_desc, n_cells=n_cells
    )


# ---------------------------------------------------------------------------
# Sharpness of the mean-absolute-value bound
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SharpnessReport:
    """Extremal two-scale family: one heavy summand, n-1 light ones.

    The family has |X_1| = x, |X_i| = y (i >= 2) with x chosen so that the
    variances sum to one exactly; as n grows, E|X_1| / (v beta_v^(1/3))
    approaches 1, showing the bound's constant cannot be improved.  The
    closed-form ratio (1 + (n-1)^(-1/4))^(-1/3) applies while x, y <= v.
    """

    n: int
    v: float
    x: float
    y: float
    sum_var: float
    beta: float
    mean_abs_first: float
    bound: float
    ratio: float
    ratio_closed_form: float
    in_regime: bool


def extremal_report(n: int, v: float = 1.0) -> SharpnessReport:
    """Sharpness numbers for the two-scale family, without materializing it.

    Uses multiplicity arithmetic (the n-1 light summands are identical), so
    it is exact-in-structure up to float rounding even at n - 1 = 10^8.
    """
    if n < 2:
        raise ValueError(f"extremal family needs n >= 2, got {n}")
    if not v > 0:
        raise ValueError(f"scale v must be positive, got {v}")
    m = n - 1
    x = 1.0 / math.sqrt(1.0 + m ** (1.0 / 6.0))
    y = x / m ** (5.0 / 12.0)
    sum_var = x * x + m * (y * y)
    beta = float(g(x / v)) + m * float(g(y / v))
    mean_abs_first = x
    bound = v * beta ** (1.0 / 3.0)
    ratio = mean_abs_first / bound
    closed = (1.0 + m ** (-0.25)) ** (-1.0 / 3.0)
    return SharpnessReport(
        n=n,
        v=v,
        x=x,
        y=y,
        sum_var=sum_var,
        beta=beta,
        mean_abs_first=mean_abs_first,
        bound=bound,
        ratio=ratio,
        ratio_closed_form=closed,
        in_regime=(x <= v and y <= v),
    )


def extremal_system(
    n: int, v: float = 1.0, *, max_materialize: int = 100_000
) -> tuple[System, SharpnessReport]:
    """Materialize the extremal family as a float-mode :class:`System`.

    Summands are fair two-point variables (+-x and +-y), the unique
    zero-mean realization of the prescribed absolute values.  For very large
    n use :func:`extremal_report`, which needs no materialization.
    """
    report = extremal_report(n, v)
    if n > max_materialize:
        raise ValueError(
            f"n={n} exceeds the materialization limit {max_materialize}; "
            "use extremal_report for the numbers alone"
        )
    heavy = DiscreteRV.from_atoms([(-report.x, 0.5), (report.x, 0.5)], exact=False)
    light = DiscreteRV.from_atoms([(-report.y, 0.5), (report.y, 0.5)], exact=False)
    system = System(rvs=(heavy,) + (light,) * (n - 1))
    return system, report


@dataclass(frozen=True)
class MeanAbsReport:
    """Corpus scan of E|X_i| <= v beta_v^(1/3)."""

    max_ratio: float
    witness: dict | None
    n_checked: int
    n_skipped: int
    violations: tuple[dict, ...]


def mean_abs_sharpness(corpus: Sequence[System], v: float = 1.0) -> MeanAbsReport:
    """Check the mean-absolute-value bound on every summand of every system.

    Systems with beta_v above (8/9)^3 are outside the bound's regime and
    counted as skipped.  Expected: zero violations, max ratio <= 1.
    """
    max_ratio = 0.0
    witness: dict | None = None
    n_checked = 0
    n_skipped = 0
    violations: list[dict] = []
    for idx, system in enumerate(corpus):
        beta = beta_v(system, v)
        if beta > _BETA_CUBE_LIMIT:
            n_skipped += 1
            continue
        bound = mean_abs_bound(v, beta)
        for i, rv in enumerate(system.rvs):
            mean_abs = float(rv.abs_moment(1))
            n_checked += 1
            if bound == 0.0:
                continue
            ratio = mean_abs / bound
            if ratio > max_ratio:
                max_ratio = ratio
                witness = {"system": idx, "i": i, "mean_abs": mean_abs, "bound": bound}
            if mean_abs > bound + 1e-12:
                violations.append(
                    {"system": idx, "i": i, "mean_abs": mean_abs, "bound": bound}
                )
    return MeanAbsReport(
        max_ratio=max_ratio,
        witness=witness,
        n_checked=n_checked,
        n_skipped=n_skipped,
        violations=tuple(violations),
    )
