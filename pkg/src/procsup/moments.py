"""Moment norms of canonical process variables.

For a coefficient vector ``t`` the Bernoulli variable ``B_t = sum_i eps_i t_i``
(independent uniform signs) and the Gaussian variable ``G_t = sum_i g_i t_i``
have p-th moment norms ``||B_t||_p`` and ``||G_t||_p`` that this module
computes three ways:

* a closed-form *proxy* for the Bernoulli norm, splitting ``t`` into its
  ``p`` largest coordinates (an l1 contribution) plus the l2 tail weighted
  by ``sqrt(p)``; the proxy sandwiches the true norm within a factor 4,
* *exact* values — sign enumeration for Bernoulli (dimension-capped), the
  Gamma-function formula for Gaussian,
* a seeded Monte Carlo estimate with a delta-method standard error.

The :class:`MomentModel` wrapper lets downstream code (chaining bounds,
decompositions) pick any of these routes through one ``norm(t, p)`` call.
"""

from __future__ import annotations

import enum
import hashlib
import math
from dataclasses import dataclass

import numpy as np

from . import rng
from .core import EXACT_ENUMERATION_MAX_DIM, Point, ProcessKind, Seed
from .errors import CapacityError, ParameterError

_MC_CHUNK = 1 << 15


def rearrange(t: Point) -> Point:
    """Absolute coordinates sorted nonincreasingly (ties keep original order)."""
    a = np.abs(t.array)
    order = np.argsort(-a, kind="stable")
    return Point(tuple(float(x) for x in a[order]))


def _check_trim_count(p: int) -> int:
    if not isinstance(p, (int, np.integer)) or isinstance(p, bool):
        raise ParameterError(f"p must be an integer, got {p!r}")
    if p < 0:
        raise ParameterError(f"p must be >= 0, got {p}")
    return int(p)


def ell1_part(t: Point, p: int) -> float:
    """Sum of the ``p`` largest absolute coordinates (all of them if p >= dim)."""
    p = _check_trim_count(p)
    if p == 0:
        return 0.0
    a = np.abs(t.array)
    if p >= a.size:
        return float(a.sum())
    return float(np.partition(a, a.size - p)[a.size - p :].sum())


def tail_l2(t: Point, p: int) -> float:
    """l2 norm of what remains after deleting the ``p`` largest absolute coordinates."""
    p = _check_trim_count(p)
    a = np.abs(t.array)
    if p == 0:
        return float(np.linalg.norm(a))
    if p >= a.size:
        return 0.0
    rest = np.partition(a, a.size - p)[: a.size - p]
    return float(np.linalg.norm(rest))


@dataclass(frozen=True)
class MomentDecomposition:
    """The proxy value together with its two ingredients."""

    p: int
    ell1: float
    tail: float
    value: float


def bernoulli_norm_proxy(t: Point, p: int) -> MomentDecomposition:
    """Closed-form stand-in for ``||B_t||_p``: l1 head plus sqrt(p) times l2 tail.

    Sandwich guarantee: ``||B_t||_p <= value <= 4 ||B_t||_p`` for integer p >= 1.
    """
    p = _check_trim_count(p)
    if p < 1:
        raise ParameterError(f"proxy needs p >= 1, got {p}")
    head = ell1_part(t, p)
    tail = tail_l2(t, p)
    return MomentDecomposition(p=p, ell1=head, tail=tail, value=head + math.sqrt(p) * tail)


def _check_moment_order(p) -> float:
    q = float(p)
    if not math.isfinite(q) or q < 1.0:
        raise ParameterError(f"moment order must be a real >= 1, got {p!r}")
    return q


def gaussian_moment_constant(p) -> float:
    """``(E |g|^p)^(1/p)`` for a standard normal g, via the Gamma function.

    Equals sqrt(2) * (Gamma((p+1)/2) / sqrt(pi))^(1/p); e.g. sqrt(2/pi) at
    p = 1, exactly 1 at p = 2, and 3^(1/4) at p = 4.
    """
    q = _check_moment_order(p)
    return math.sqrt(2.0) * math.exp((math.lgamma((q + 1.0) / 2.0) - math.lgamma(0.5)) / q)


def gaussian_norm_exact(t: Point, p) -> float:
    """``||G_t||_p``, which is the l2 norm of t times :func:`gaussian_moment_constant`."""
    return float(np.linalg.norm(t.array)) * gaussian_moment_constant(p)


def _signed_sums(t: Point) -> np.ndarray:
    """All values of sum_i eps_i t_i with the first sign pinned to +1.

    Pinning the first sign halves the enumeration; it is lossless for any
    statistic of |sum| because the full sign ensemble is symmetric under a
    global flip.
    """
    vals = np.array([t.coords[0]])
    for c in t.coords[1:]:
        vals = np.concatenate([vals + c, vals - c])
    return vals


def bernoulli_norm_exact(t: Point, p, d_max: int = EXACT_ENUMERATION_MAX_DIM) -> float:
    """``||B_t||_p`` by exact enumeration of all sign patterns.

    Only available for dim <= ``d_max`` (2^dim work); any real p >= 1.
    """
    q = _check_moment_order(p)
    if t.dim > d_max:
        raise CapacityError(f"exact Bernoulli norm needs dim <= {d_max}, got {t.dim}")
    vals = np.abs(_signed_sums(t))
    scale = float(vals.max())
    if scale == 0.0:
        return 0.0
    return scale * float(np.mean((vals / scale) ** q) ** (1.0 / q))


def _content_label(prefix: str, kind: ProcessKind, t: Point, p: float) -> str:
    digest = hashlib.sha256(t.array.tobytes() + f"|{kind.value}|{p!r}".encode()).hexdigest()
    return f"{prefix}:{digest}"


def _draw(kind: ProcessKind, gen: np.random.Generator, size) -> np.ndarray:
    if kind is ProcessKind.BERNOULLI:
        return rng.rademacher(gen, size)
    return rng.standard_normal(gen, size)


def mc_norm(
    kind: ProcessKind,
    t: Point,
    p,
    samples: int,
    seed: Seed,
) -> tuple[float, float]:
    """Monte Carlo estimate of ``||X_t||_p`` with a delta-method stderr.

    Deterministic for fixed ``(kind, t, p, samples, seed)``: the draw stream
    is keyed by seed plus a content hash, so unrelated computations cannot
    perturb it.
    """
    q = _check_moment_order(p)
    if samples < 2:
        raise ParameterError(f"mc_norm needs samples >= 2, got {samples}")
    scale = float(np.linalg.norm(t.array))
    if scale == 0.0:
        return 0.0, 0.0
    gen = rng.stream(seed.value, _content_label("mc-norm", kind, t, q))
    unit = t.array / scale
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < samples:
        m = min(_MC_CHUNK, samples - done)
        xs = _draw(kind, gen, (m, t.dim))
        ys = np.abs(xs @ unit) ** q
        total += float(ys.sum())
        total_sq += float((ys * ys).sum())
        done += m
    mean = total / samples
    if mean == 0.0:
        return 0.0, 0.0
    var = max(0.0, (total_sq - samples * mean * mean) / (samples - 1))
    se_mean = math.sqrt(var / samples)
    estimate = mean ** (1.0 / q)
    stderr = (1.0 / q) * mean ** (1.0 / q - 1.0) * se_mean
    return scale * estimate, scale * stderr


class ModelKind(enum.Enum):
    BERNOULLI_PROXY = "bernoulli-proxy"
    BERNOULLI_EXACT = "bernoulli-exact"
    GAUSSIAN_EXACT = "gaussian-exact"
    MONTE_CARLO = "monte-carlo"


@dataclass(frozen=True)
class MomentModel:
    """A way of evaluating increment norms ``||X_t||_p``.

    Chaining bounds and decompositions are parameterised by one of these so
    that exact oracles, the Bernoulli proxy and Monte Carlo estimates stay
    interchangeable routes through identical code paths.
    """

    kind: ModelKind
    process: ProcessKind | None = None
    samples: int = 0
    seed: Seed | None = None

    def __post_init__(self) -> None:
        if self.kind is ModelKind.MONTE_CARLO:
            if self.process is None or self.seed is None:
                raise ParameterError("Monte Carlo model needs a process kind and a seed")
            if self.samples < 1:
                raise ParameterError(f"Monte Carlo model needs samples >= 1, got {self.samples}")
        elif self.process is not None or self.samples or self.seed is not None:
            raise ParameterError(f"{self.kind.value} model takes no sampling configuration")

    @classmethod
    def bernoulli_proxy(cls) -> "MomentModel":
        return cls(ModelKind.BERNOULLI_PROXY)

    @classmethod
    def bernoulli_exact(cls) -> "MomentModel":
        return cls(ModelKind.BERNOULLI_EXACT)

    @classmethod
    def gaussian_exact(cls) -> "MomentModel":
        return cls(ModelKind.GAUSSIAN_EXACT)

    @classmethod
    def monte_carlo(cls, process: ProcessKind, samples: int, seed: Seed) -> "MomentModel":
        return cls(ModelKind.MONTE_CARLO, process=process, samples=samples, seed=seed)

    @property
    def label(self) -> str:
        if self.kind is ModelKind.MONTE_CARLO:
            assert self.process is not None and self.seed is not None
            return f"monte-carlo[{self.process.value},n={self.samples},seed={self.seed.value}]"
        return self.kind.value

    def norm(self, t: Point, p) -> float:
        if self.kind is ModelKind.BERNOULLI_PROXY:
            return bernoulli_norm_proxy(t, int(p)).value
        if self.kind is ModelKind.BERNOULLI_EXACT:
            return bernoulli_norm_exact(t, p)
        if self.kind is ModelKind.GAUSSIAN_EXACT:
            return gaussian_norm_exact(t, p)
        assert self.process is not None and self.seed is not None
        return mc_norm(self.process, t, p, self.samples, self.seed)[0]
