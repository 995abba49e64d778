"""Trimmed-distance contraction condition between a set and its image.

For points ``s, t`` write ``trim2(t - s, p)`` for the squared l2 norm of
``t - s`` after deleting its ``p`` largest absolute coordinates.  A map
``phi`` applied coordinatewise satisfies the *contraction condition* with
constant ``C >= 1`` when, for every pair of source points and every integer
``p >= 0``,

    trim2(phi(t) - phi(s), floor(C*p))  <=  C^2 * trim2(t - s, p).

The condition is monotone in ``C`` (a bigger C both deletes more image
coordinates and inflates the right-hand side), so the smallest feasible
constant can be found by bisection.  Coordinatewise 1-Lipschitz maps
satisfy it with C = 1, and in that classical case the expected Bernoulli
supremum of the image is at most that of the source, with constant exactly
one — :func:`compare_suprema` reports the empirical ratio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import EXACT_ENUMERATION_MAX_DIM, FiniteSet, Point, ProcessKind, Seed
from .errors import ParameterError, ValidationError
from .moments import tail_l2
from .reports import ComparisonReport, safe_ratio
from .suprema import brute_force_bernoulli_sup, mc_sup

#: Bisection stops once the bracket is this tight.
FIT_TOLERANCE = 1e-6

#: Constants above this are treated as "no finite constant works".
FIT_CAP = 1024.0


def trimmed_sq_distance(s: Point, t: Point, p: int) -> float:
    """``trim2(t - s, p)``: squared l2 distance ignoring the p worst coordinates."""
    return tail_l2(t - s, p) ** 2


@dataclass(frozen=True)
class CoordinateMap:
    """A named coordinatewise map with its parameters."""

    name: str
    params: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.name not in _MAP_ARITY:
            valid = ", ".join(sorted(_MAP_ARITY))
            raise ParameterError(f"unknown map {self.name!r}; expected one of: {valid}")
        lo, hi = _MAP_ARITY[self.name]
        if not lo <= len(self.params) <= hi:
            raise ParameterError(
                f"map {self.name!r} takes {lo}..{hi} params, got {len(self.params)}"
            )
        if self.name == "clamp" and len(self.params) == 2 and self.params[0] > self.params[1]:
            raise ParameterError(f"clamp needs lo <= hi, got {self.params}")
        if self.name == "soft_threshold" and self.params and self.params[0] < 0:
            raise ParameterError(f"soft_threshold needs a nonnegative level, got {self.params[0]}")

    @property
    def label(self) -> str:
        if not self.params:
            return self.name
        return f"{self.name}({', '.join(repr(p) for p in self.params)})"

    def apply(self, xs: np.ndarray) -> np.ndarray:
        if self.name == "scale":
            return self.params[0] * xs
        if self.name == "clamp":
            lo, hi = self.params if len(self.params) == 2 else (-1.0, 1.0)
            return np.clip(xs, lo, hi)
        if self.name == "abs":
            return np.abs(xs)
        level = self.params[0] if self.params else 0.5
        return np.sign(xs) * np.maximum(np.abs(xs) - level, 0.0)


_MAP_ARITY = {"scale": (1, 1), "clamp": (0, 2), "abs": (0, 0), "soft_threshold": (0, 1)}


@dataclass(frozen=True)
class MappedPair:
    """A source set, its image, and which image point each source point maps to.

    The image is duplicate-free, so maps that collapse points are recorded
    through ``correspondence`` rather than by repeating image rows.
    """

    source: FiniteSet
    image: FiniteSet
    correspondence: tuple[int, ...]
    map_label: str = "custom"

    def __post_init__(self) -> None:
        if len(self.correspondence) != len(self.source):
            raise ValidationError(
                f"correspondence length {len(self.correspondence)} != source size {len(self.source)}"
            )
        for i, c in enumerate(self.correspondence):
            if not 0 <= c < len(self.image):
                raise ValidationError(f"correspondence[{i}] = {c} is not an image index")
        if self.source.dim != self.image.dim:
            raise ValidationError(
                f"coordinatewise maps preserve dimension: {self.source.dim} vs {self.image.dim}"
            )


def apply_map(ts: FiniteSet, cmap: CoordinateMap) -> MappedPair:
    """Apply a coordinatewise map to every point, deduplicating the image."""
    image_points: list[Point] = []
    index_of: dict[tuple[float, ...], int] = {}
    correspondence = []
    for p in ts.points:
        q = Point(tuple(float(x) for x in cmap.apply(p.array)))
        j = index_of.get(q.coords)
        if j is None:
            j = len(image_points)
            index_of[q.coords] = j
            image_points.append(q)
        correspondence.append(j)
    image = FiniteSet(name=f"{cmap.label}({ts.name})", points=tuple(image_points))
    return MappedPair(
        source=ts, image=image, correspondence=tuple(correspondence), map_label=cmap.label
    )


@dataclass(frozen=True)
class CheckResult:
    satisfied: bool
    margin: float
    worst_pair: tuple[int, int, int]  # (source index, source index, p)


@dataclass(frozen=True)
class ContractionReport:
    """Outcome of fitting the smallest contraction constant.

    ``c_star`` is None when no constant up to the cap works; ``margin`` is
    the largest value of lhs - C^2 * rhs seen at the reported constant (so
    it is <= 0 exactly when the condition holds there).
    """

    c_star: float | None
    p_max: int
    worst_pair: tuple[int, int, int]
    margin: float
    map_label: str = "custom"
    context: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "c_star": "infeasible" if self.c_star is None else self.c_star,
            "p_max": self.p_max,
            "worst_pair": list(self.worst_pair),
            "margin": self.margin,
            "map_label": self.map_label,
            **({"context": self.context} if self.context else {}),
        }


def _trim_profile(diff: np.ndarray) -> np.ndarray:
    """Squared trimmed norms of one difference vector at every budget 0..dim.

    Entry ``p`` is the squared l2 norm after deleting the ``p`` largest
    squared coordinates (entry 0 is the full squared norm, entry dim is 0).
    """
    sq = np.sort(diff * diff)  # ascending: deleting the p largest keeps a prefix
    csum = np.concatenate(([0.0], np.cumsum(sq)))
    return csum[::-1].copy()


class _PairTable:
    """Precomputed trim profiles for every source pair and its image pair."""

    def __init__(self, pair: MappedPair):
        src = pair.source.matrix
        img = pair.image.matrix
        corr = pair.correspondence
        n = len(pair.source)
        self.pairs: list[tuple[int, int]] = [(i, j) for i in range(n) for j in range(i + 1, n)]
        self.src_prof = [_trim_profile(src[j] - src[i]) for i, j in self.pairs]
        self.img_prof = [
            _trim_profile(img[corr[j]] - img[corr[i]]) for i, j in self.pairs
        ]

    def evaluate(self, c: float, p_max: int) -> CheckResult:
        worst = (0, 0, 0)
        margin = -math.inf
        for (i, j), sp, ip in zip(self.pairs, self.src_prof, self.img_prof):
            for p in range(p_max + 1):
                budget = min(int(math.floor(c * p)), ip.size - 1)
                lhs = ip[budget]
                rhs = c * c * sp[min(p, sp.size - 1)]
                if lhs - rhs > margin:
                    margin = lhs - rhs
                    worst = (i, j, p)
        if margin == -math.inf:  # single-point source: nothing to check
            margin = 0.0
        return CheckResult(satisfied=bool(margin <= 0.0), margin=float(margin), worst_pair=worst)


def check_condition(pair: MappedPair, c: float, p_max: int, tol: float = 0.0) -> CheckResult:
    """Does the contraction condition hold at constant ``c`` up to order ``p_max``?

    ``tol`` loosens the margin comparison (useful when the map was computed
    in floating point and exact ties round either way); the default is
    strict.
    """
    if c < 1.0:
        raise ParameterError(f"the condition is defined for C >= 1, got {c}")
    if p_max < 0:
        raise ParameterError(f"p_max must be >= 0, got {p_max}")
    if tol < 0:
        raise ParameterError(f"tol must be nonnegative, got {tol}")
    result = _PairTable(pair).evaluate(c, p_max)
    if tol and not result.satisfied and result.margin <= tol:
        return CheckResult(satisfied=True, margin=result.margin, worst_pair=result.worst_pair)
    return result


def fit_min_C(
    pair: MappedPair,
    p_max: int | None = None,
    tol: float = FIT_TOLERANCE,
) -> ContractionReport:
    """Smallest ``C`` satisfying the condition, by doubling then bisection.

    Monotonicity of feasibility in ``C`` makes the bracket valid; the
    returned constant is feasible and within ``tol`` of the infimum.  If
    even ``C = 1024`` fails, the pair is reported infeasible.
    """
    if p_max is None:
        p_max = pair.source.dim
    if p_max < 0:
        raise ParameterError(f"p_max must be >= 0, got {p_max}")
    if tol <= 0:
        raise ParameterError(f"tol must be positive, got {tol}")
    table = _PairTable(pair)
    at_one = table.evaluate(1.0, p_max)
    if at_one.satisfied:
        return ContractionReport(1.0, p_max, at_one.worst_pair, at_one.margin, pair.map_label)
    hi = 2.0
    while hi <= FIT_CAP and not table.evaluate(hi, p_max).satisfied:
        hi *= 2.0
    if hi > FIT_CAP:
        at_cap = table.evaluate(FIT_CAP, p_max)
        return ContractionReport(None, p_max, at_cap.worst_pair, at_cap.margin, pair.map_label)
    lo = hi / 2.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if table.evaluate(mid, p_max).satisfied:
            hi = mid
        else:
            lo = mid
    final = table.evaluate(hi, p_max)
    return ContractionReport(hi, p_max, final.worst_pair, final.margin, pair.map_label)


def compare_suprema(
    pair: MappedPair,
    samples: int = 100_000,
    seed: Seed | None = None,
) -> ComparisonReport:
    """Empirical ratio ``S_B(image) / S_B(source)``, exact where enumerable."""
    seed = seed if seed is not None else Seed(0)

    def estimate(ts: FiniteSet):
        if ts.dim <= EXACT_ENUMERATION_MAX_DIM:
            return brute_force_bernoulli_sup(ts)
        return mc_sup(ProcessKind.BERNOULLI, ts, samples, seed)

    s_img = estimate(pair.image)
    s_src = estimate(pair.source)
    return ComparisonReport(
        quantity="contracted-sup-ratio",
        lhs_label=f"S_B(image) [{s_img.method.value}]",
        rhs_label=f"S_B(source) [{s_src.method.value}]",
        lhs=s_img.value,
        rhs=s_src.value,
        ratio=safe_ratio(s_img.value, s_src.value),
        lhs_stderr=s_img.stderr,
        rhs_stderr=s_src.stderr,
        extras={"map": pair.map_label, "source": pair.source.name},
    )
