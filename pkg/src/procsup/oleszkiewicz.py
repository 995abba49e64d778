"""Weak versus strong moment dominance for Bernoulli series in normed spaces.

Given two finite systems of vectors ``x_1..x_n`` and ``y_1..y_n`` in R^m
(under the sup or euclidean norm), compare the random series
``sum_i eps_i x_i`` and ``sum_i eps_i y_i`` three ways:

* *weak moments*: for functionals ``w`` in the dual unit ball, the ratio of
  ``||sum_i eps_i <w, x_i>||_p`` to the same with ``y``, maximised over a
  sampled family of functionals and a grid of moment orders;
* the *trimmed contraction condition* between the coefficient vectors
  ``(<w, x_i>)_i`` and ``(<w, y_i>)_i``, fitted per functional;
* *strong moments*: the ratio of ``E || sum_i eps_i x_i ||`` to the same
  with ``y`` (exact sign enumeration up to the term-count cap, Monte Carlo
  beyond it).

Functional samples for the sup norm live in the l1 dual ball (the signed
basis vectors, which witness every sup, plus random convex combinations);
for the euclidean norm they are uniform points of the unit sphere.
"""

from __future__ import annotations

import enum
import hashlib
import json
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from . import rng
from .core import EXACT_ENUMERATION_MAX_DIM, FiniteSet, Point, Seed
from .errors import ParameterError, ParseError, ValidationError
from .contraction import ContractionReport, MappedPair, fit_min_C
from .moments import bernoulli_norm_exact, bernoulli_norm_proxy
from .reports import ComparisonReport, safe_ratio

_DUAL_SLACK = 1e-12
_SYSTEM_FORMAT = "vector-system"
_SYSTEM_VERSION = 1
_CHUNK = 1 << 14


class NormKind(enum.Enum):
    SUP = "sup"
    EUCLIDEAN = "euclidean"


@dataclass(frozen=True)
class VectorSystem:
    """The terms ``x_1..x_n`` of a random series, plus the ambient norm."""

    name: str
    vectors: tuple[Point, ...]
    norm: NormKind

    def __post_init__(self) -> None:
        if not self.vectors:
            raise ValidationError(f"system {self.name!r} has no vectors")
        dims = {v.dim for v in self.vectors}
        if len(dims) != 1:
            raise ValidationError(f"system {self.name!r} mixes dimensions {sorted(dims)}")

    @property
    def terms(self) -> int:
        return len(self.vectors)

    @property
    def dim(self) -> int:
        return self.vectors[0].dim

    @cached_property
    def matrix(self) -> np.ndarray:
        m = np.asarray([v.coords for v in self.vectors], dtype=np.float64)
        m.setflags(write=False)
        return m

    def content_hash(self) -> str:
        payload = json.dumps(
            {"norm": self.norm.value, "vectors": [list(v.coords) for v in self.vectors]}
        )
        return hashlib.sha256(payload.encode()).hexdigest()

    def norm_of(self, xs: np.ndarray) -> np.ndarray:
        """Ambient norm of each row of ``xs``."""
        if self.norm is NormKind.SUP:
            return np.abs(xs).max(axis=-1)
        return np.linalg.norm(xs, axis=-1)


def save_vector_system(system: VectorSystem, path: str | Path) -> None:
    doc = {
        "format": _SYSTEM_FORMAT,
        "version": _SYSTEM_VERSION,
        "name": system.name,
        "norm": system.norm.value,
        "dim": system.dim,
        "vectors": [list(v.coords) for v in system.vectors],
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def load_vector_system(path: str | Path) -> VectorSystem:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except FileNotFoundError:
        raise ParseError(f"{path}: no such file") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(doc, dict) or doc.get("format") != _SYSTEM_FORMAT:
        raise ParseError(f"{path}: not a {_SYSTEM_FORMAT} file")
    if doc.get("version") != _SYSTEM_VERSION:
        raise ParseError(f"{path}: unsupported version {doc.get('version')!r}")
    try:
        norm = NormKind(doc.get("norm"))
    except ValueError:
        raise ParseError(f"{path}: unknown norm {doc.get('norm')!r}") from None
    dim = doc.get("dim")
    rows = doc.get("vectors")
    if not isinstance(dim, int) or not isinstance(rows, list):
        raise ParseError(f"{path}: missing or malformed 'dim'/'vectors'")
    vectors = []
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != dim:
            raise ValidationError(f"{path}: vector {i} does not have {dim} coordinates")
        vectors.append(Point(tuple(float(x) for x in row)))
    return VectorSystem(name=str(doc.get("name") or path.stem), vectors=tuple(vectors), norm=norm)


def _dual_norm(w: np.ndarray, norm: NormKind) -> float:
    if norm is NormKind.SUP:
        return float(np.abs(w).sum())
    return float(np.linalg.norm(w))


@dataclass(frozen=True)
class FunctionalSample:
    """Functionals from the dual unit ball used to probe weak moments."""

    functionals: tuple[Point, ...]
    norm: NormKind
    seed: Seed

    def __post_init__(self) -> None:
        if not self.functionals:
            raise ValidationError("a functional sample cannot be empty")
        for i, w in enumerate(self.functionals):
            d = _dual_norm(w.array, self.norm)
            if d > 1.0 + _DUAL_SLACK:
                raise ValidationError(f"functional {i} has dual norm {d} > 1")

    def __len__(self) -> int:
        return len(self.functionals)


def generate_functionals(norm: NormKind, dim: int, extra: int, seed: Seed) -> FunctionalSample:
    """The 2*dim signed basis functionals plus ``extra`` random dual-ball points.

    For the sup norm the signed basis functionals are the extreme points
    that witness every supremum; the random extras are convex combinations
    of them (uniform simplex weights with independent signs).  For the
    euclidean norm the extras are uniform on the unit sphere.
    """
    if dim < 1:
        raise ParameterError(f"dim must be >= 1, got {dim}")
    if extra < 0:
        raise ParameterError(f"extra must be >= 0, got {extra}")
    rows = [row for j in range(dim) for row in (np.eye(dim)[j], -np.eye(dim)[j])]
    for i in range(extra):
        gen = rng.stream(seed.value, f"functionals:{norm.value}", index=i)
        if norm is NormKind.SUP:
            weights = -np.log(rng.uniform_open(gen, dim))
            weights /= weights.sum()
            rows.append(weights * rng.rademacher(gen, dim))
        else:
            g = rng.standard_normal(gen, dim)
            rows.append(g / np.linalg.norm(g))
    points = tuple(Point(tuple(float(x) for x in r)) for r in rows)
    return FunctionalSample(functionals=points, norm=norm, seed=seed)


def _coefficient_norm(coeffs: np.ndarray, p: int) -> float:
    """||sum_i eps_i c_i||_p for the scalar coefficients ``c``: exact if small."""
    point = Point(tuple(float(x) for x in coeffs))
    if coeffs.size <= EXACT_ENUMERATION_MAX_DIM:
        return bernoulli_norm_exact(point, p)
    return bernoulli_norm_proxy(point, p).value


def _check_sysmatch(x_sys: VectorSystem, y_sys: VectorSystem, funcs: FunctionalSample) -> None:
    if x_sys.terms != y_sys.terms:
        raise ParameterError(f"systems have {x_sys.terms} vs {y_sys.terms} terms")
    if x_sys.dim != y_sys.dim:
        raise ParameterError(f"systems have ambient dims {x_sys.dim} vs {y_sys.dim}")
    if x_sys.norm is not y_sys.norm:
        raise ParameterError("systems must share one ambient norm")
    if funcs.norm is not x_sys.norm:
        raise ParameterError("functional sample was drawn for a different norm")
    if funcs.functionals[0].dim != x_sys.dim:
        raise ParameterError("functionals do not match the ambient dimension")


@dataclass(frozen=True)
class WeakMomentResult:
    """The largest weak-moment ratio over all sampled functionals and orders."""

    value: float
    worst_functional: int
    worst_p: int
    lhs: float
    rhs: float

    def to_dict(self) -> dict:
        return {
            "value": "inf" if math.isinf(self.value) else self.value,
            "worst_functional": self.worst_functional,
            "worst_p": self.worst_p,
            "lhs": self.lhs,
            "rhs": self.rhs,
        }


def weak_moment_constant(
    x_sys: VectorSystem,
    y_sys: VectorSystem,
    funcs: FunctionalSample,
    p_max: int = 8,
) -> WeakMomentResult:
    """max over functionals w and p <= p_max of ||<w,X>||_p / ||<w,Y>||_p.

    Pairs where both norms vanish are skipped (they impose no constraint);
    a positive numerator over a zero denominator reports ``inf``.
    """
    _check_sysmatch(x_sys, y_sys, funcs)
    if p_max < 1:
        raise ParameterError(f"p_max must be >= 1, got {p_max}")
    best = WeakMomentResult(0.0, -1, 0, 0.0, 0.0)
    for k, w in enumerate(funcs.functionals):
        a = x_sys.matrix @ w.array
        b = y_sys.matrix @ w.array
        for p in range(1, p_max + 1):
            num = _coefficient_norm(a, p)
            den = _coefficient_norm(b, p)
            if num == 0.0 and den == 0.0:
                continue
            ratio = safe_ratio(num, den)
            if ratio > best.value:
                best = WeakMomentResult(ratio, k, p, num, den)
    return best


def check_weak_contraction(
    x_sys: VectorSystem,
    y_sys: VectorSystem,
    funcs: FunctionalSample,
    p_max: int | None = None,
    tol: float = 1e-6,
) -> ContractionReport:
    """Fit the trimmed contraction constant between coefficient vectors.

    For each functional ``w`` the pair ``(<w,Y>, <w,X>)`` (source, image) is
    run through the contraction fitter; the report carries the largest
    fitted constant and the functional that required it.  An infeasible
    functional makes the whole report infeasible.
    """
    _check_sysmatch(x_sys, y_sys, funcs)
    if p_max is None:
        p_max = x_sys.terms
    per_functional: list[float | None] = []
    worst_report: ContractionReport | None = None
    worst_index = -1
    for k, w in enumerate(funcs.functionals):
        a = Point(tuple(float(v) for v in x_sys.matrix @ w.array))
        b = Point(tuple(float(v) for v in y_sys.matrix @ w.array))
        zero = Point.zero(x_sys.terms)
        if a.coords == zero.coords:
            per_functional.append(1.0)  # nothing to dominate
            continue
        if b.coords == zero.coords:
            # Zero source coefficients cannot dominate a nonzero image: at
            # p = 0 the condition reads ||a||^2 <= 0 for every C.
            margin = float(np.dot(a.array, a.array))
            report = ContractionReport(None, p_max, (0, 1, 0), margin, "weak-coefficients")
            per_functional.append(None)
            worst_report, worst_index = report, k
            break
        source = FiniteSet(name=f"w{k}-source", points=(zero, b))
        image = FiniteSet(name=f"w{k}-image", points=(zero, a))
        pair = MappedPair(source=source, image=image, correspondence=(0, 1), map_label="weak-coefficients")
        report = fit_min_C(pair, p_max=p_max, tol=tol)
        per_functional.append(report.c_star)
        if report.c_star is None:
            worst_report, worst_index = report, k
            break
        if worst_report is None or report.c_star > (worst_report.c_star or 0.0):
            worst_report, worst_index = report, k
    if worst_report is None:
        # Every image coefficient vector was zero: C = 1 dominates trivially.
        worst_report, worst_index = ContractionReport(1.0, p_max, (0, 1, 0), 0.0, "weak-coefficients"), 0
    context = {
        "worst_functional": worst_index,
        "functional": list(funcs.functionals[worst_index].coords),
        "per_functional_c": ["infeasible" if c is None else c for c in per_functional],
    }
    return ContractionReport(
        c_star=worst_report.c_star,
        p_max=worst_report.p_max,
        worst_pair=worst_report.worst_pair,
        margin=worst_report.margin,
        map_label="weak-coefficients",
        context=context,
    )


def _exact_strong_moment(system: VectorSystem) -> float:
    n = system.terms
    m = system.matrix
    total = 0.0
    n_patterns = 1 << n
    shifts = np.arange(n, dtype=np.uint64)
    for start in range(0, n_patterns, _CHUNK):
        codes = np.arange(start, min(start + _CHUNK, n_patterns), dtype=np.uint64)
        bits = (codes[:, None] >> shifts[None, :]) & 1
        signs = 1.0 - 2.0 * bits.astype(np.float64)
        total += float(system.norm_of(signs @ m).sum())
    return total / n_patterns


def _mc_strong_moment(system: VectorSystem, samples: int, seed: Seed) -> tuple[float, float]:
    if samples < 2:
        raise ParameterError(f"Monte Carlo needs samples >= 2, got {samples}")
    digest = hashlib.sha256(system.matrix.tobytes() + system.norm.value.encode()).hexdigest()
    gen = rng.stream(seed.value, f"strong-moment:{digest}")
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < samples:
        k = min(_CHUNK, samples - done)
        signs = rng.rademacher(gen, (k, system.terms))
        vals = system.norm_of(signs @ system.matrix)
        total += float(vals.sum())
        total_sq += float((vals * vals).sum())
        done += k
    mean = total / samples
    var = max(0.0, (total_sq - samples * mean * mean) / (samples - 1))
    return mean, math.sqrt(var / samples)


def strong_moment_ratio(
    x_sys: VectorSystem,
    y_sys: VectorSystem,
    samples: int = 100_000,
    seed: Seed | None = None,
) -> ComparisonReport:
    """``E||sum eps x_i|| / E||sum eps y_i||``, exact when the term count allows."""
    if x_sys.norm is not y_sys.norm:
        raise ParameterError("systems must share one ambient norm")
    seed = seed if seed is not None else Seed(0)

    def estimate(system: VectorSystem) -> tuple[float, float, str]:
        if system.terms <= EXACT_ENUMERATION_MAX_DIM:
            return _exact_strong_moment(system), 0.0, "exact"
        value, stderr = _mc_strong_moment(system, samples, seed)
        return value, stderr, "monte-carlo"

    ex, se_x, method_x = estimate(x_sys)
    ey, se_y, method_y = estimate(y_sys)
    return ComparisonReport(
        quantity="strong-moment-ratio",
        lhs_label=f"E||sum eps x|| [{method_x}]",
        rhs_label=f"E||sum eps y|| [{method_y}]",
        lhs=ex,
        rhs=ey,
        ratio=safe_ratio(ex, ey),
        lhs_stderr=se_x,
        rhs_stderr=se_y,
        extras={"norm": x_sys.norm.value, "terms": x_sys.terms},
    )
