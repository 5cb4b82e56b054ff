"""Dynamical systems, reference measures, and quadrature rules.

States are 1-D numpy arrays of length ``d``; collections of states are
``(d, M)`` arrays with one state per column.  All objects here are frozen
dataclasses and every operation is a pure function of its inputs, so values
can be shared freely across threads.
"""

from __future__ import annotations

import math
import warnings
from functools import lru_cache
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigError, DomainEscapeWarning

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Domain:
    """State-space domain: an axis-aligned box or a periodic circle.

    Circle axes have period 2*pi; bounds are fixed to [0, 2*pi).
    """

    kind: str  # "box" | "circle"
    lower: tuple
    upper: tuple

    def __post_init__(self):
        if self.kind not in ("box", "circle"):
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if len(self.lower) != len(self.upper):
            raise ValueError("lower/upper length mismatch")
        for lo, hi in zip(self.lower, self.upper):
            if not lo < hi:
                raise ValueError(f"domain requires lower < upper, got [{lo}, {hi}]")

    @property
    def dimension(self):
        return len(self.lower)

    def contains(self, points, tol=1e-9):
        """Boolean mask over columns of ``points``; circle axes always match."""
        pts = as_points(points, self.dimension)
        if self.kind == "circle":
            return np.ones(pts.shape[1], dtype=bool)
        lo = np.asarray(self.lower)[:, None]
        hi = np.asarray(self.upper)[:, None]
        return np.all((pts >= lo - tol) & (pts <= hi + tol), axis=0)

    def wrap(self, points):
        """Reduce circle coordinates mod 2*pi; boxes pass through unchanged."""
        if self.kind != "circle":
            return points
        return np.mod(points, TWO_PI)


def box(lower, upper) -> Domain:
    lo = np.atleast_1d(np.asarray(lower, dtype=float))
    hi = np.atleast_1d(np.asarray(upper, dtype=float))
    return Domain("box", tuple(float(v) for v in lo), tuple(float(v) for v in hi))


def circle(dimension=1) -> Domain:
    return Domain("circle", (0.0,) * dimension, (TWO_PI,) * dimension)


@dataclass(frozen=True)
class DynamicalSystem:
    """Discrete-time map x+ = T(x) on a domain.

    ``forward`` acts on a single state (1-D array); ``forward_batch``, when
    given, acts on a ``(d, M)`` array of states and must agree with column-wise
    application of ``forward``.  ``inverse`` is optional and only required by
    the single-trajectory eigenmeasure machinery, which assumes T is a
    homeomorphism.  ``polynomial_degree`` is the per-axis polynomial degree of
    T when T is polynomial; it drives exact quadrature order selection.
    """

    name: str
    domain: Domain
    forward: Callable
    inverse: Callable | None = None
    forward_batch: Callable | None = None
    polynomial_degree: int | None = None

    @property
    def dimension(self):
        return self.domain.dimension


def as_state(x, dimension=None):
    """Coerce ``x`` to a finite 1-D state vector, checking the dimension."""
    s = np.atleast_1d(np.asarray(x, dtype=float))
    if s.ndim != 1:
        raise ValueError(f"state must be 1-D, got shape {s.shape}")
    if dimension is not None and s.size != dimension:
        raise ValueError(f"state has dimension {s.size}, expected {dimension}")
    if not np.all(np.isfinite(s)):
        raise ValueError("state has non-finite entries")
    return s


def as_points(points, dimension=None):
    """Coerce to a ``(d, M)`` array of column states."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[None, :]
    if pts.ndim != 2:
        raise ValueError(f"points must be (d, M), got shape {pts.shape}")
    if dimension is not None and pts.shape[0] != dimension:
        raise ValueError(f"points have dimension {pts.shape[0]}, expected {dimension}")
    return pts


def apply(system: DynamicalSystem, x) -> np.ndarray:
    """One step of the map.  A result outside the domain is reported through a
    DomainEscapeWarning, not an error, so long-horizon studies keep running."""
    s = as_state(x, system.dimension)
    y = system.domain.wrap(as_state(system.forward(s), system.dimension))
    if not bool(system.domain.contains(y[:, None], tol=1e-9)[0]):
        warnings.warn(
            f"{system.name}: image {y} left the domain", DomainEscapeWarning, stacklevel=2
        )
    return y


def apply_batch(system: DynamicalSystem, points) -> np.ndarray:
    """Column-wise map application with a single escape report per call."""
    pts = as_points(points, system.dimension)
    if system.forward_batch is not None:
        out = np.asarray(system.forward_batch(pts), dtype=float)
    else:
        out = np.empty_like(pts)
        for j in range(pts.shape[1]):
            out[:, j] = system.forward(pts[:, j])
    out = system.domain.wrap(out)
    escaped = int(np.sum(~system.domain.contains(out)))
    if escaped:
        warnings.warn(
            f"{system.name}: {escaped} of {pts.shape[1]} images left the domain",
            DomainEscapeWarning,
            stacklevel=2,
        )
    return out


def iterate(system: DynamicalSystem, x, steps: int) -> np.ndarray:
    """T composed ``steps`` times; ``steps`` = 0 returns x unchanged."""
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    s = as_state(x, system.dimension)
    with warnings.catch_warnings():
        warnings.simplefilter("always", DomainEscapeWarning)
        for _ in range(steps):
            s = apply(system, s)
    return s


@dataclass(frozen=True)
class Measure:
    """Probability measure: uniform on a box/circle domain, or a Gaussian
    with diagonal covariance on full space (domain None)."""

    kind: str  # "uniform" | "gaussian"
    domain: Domain | None = None
    mean: tuple = ()
    var: tuple = ()

    def __post_init__(self):
        if self.kind == "uniform":
            if self.domain is None:
                raise ValueError("uniform measure requires a domain")
        elif self.kind == "gaussian":
            if len(self.mean) != len(self.var) or not self.mean:
                raise ValueError("gaussian measure requires mean/var of equal length")
            if any(v <= 0 for v in self.var):
                raise ValueError("gaussian variances must be positive")
        else:
            raise ValueError(f"unknown measure kind {self.kind!r}")

    @property
    def dimension(self):
        if self.kind == "uniform":
            return self.domain.dimension
        return len(self.mean)


def uniform(domain: Domain) -> Measure:
    return Measure("uniform", domain=domain)


def gaussian(mean, var) -> Measure:
    m = np.atleast_1d(np.asarray(mean, dtype=float))
    v = np.atleast_1d(np.asarray(var, dtype=float))
    return Measure("gaussian", mean=tuple(m), var=tuple(v))


def sample(measure: Measure, count: int, seed: int) -> np.ndarray:
    """Draw ``count`` iid states as a ``(d, count)`` array.

    Uses numpy's seeded PCG64 generator (``default_rng``), drawing axis by
    axis in a fixed order, so identical (measure, count, seed) triples produce
    bit-identical output on any platform.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    d = measure.dimension
    out = np.empty((d, count))
    if measure.kind == "uniform":
        for i in range(d):
            out[i] = rng.uniform(measure.domain.lower[i], measure.domain.upper[i], count)
    else:
        for i in range(d):
            out[i] = measure.mean[i] + math.sqrt(measure.var[i]) * rng.standard_normal(count)
    return out


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes (d, K) and nonnegative weights (K,) summing to one, so the rule
    integrates against the normalized measure it was built for."""

    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        if self.nodes.shape[1] != self.weights.shape[0]:
            raise ValueError("node/weight count mismatch")

    @property
    def size(self):
        return self.weights.shape[0]


@lru_cache(maxsize=64)
def _leggauss(order):
    """Gauss-Legendre nodes/weights on [-1, 1].

    numpy's leggauss runs a dense eigensolve, unusable beyond a few hundred
    nodes; above that we switch to Newton iteration on the three-term
    recurrence from the Tricomi cosine initial guesses, which is machine
    accurate and O(order^2) flops vectorized.  Cached; callers must not
    mutate the returned arrays (``_axis_rule`` always rescales into copies).
    """
    if order <= 128:
        return np.polynomial.legendre.leggauss(order)
    k = np.arange(order)
    x = np.cos(math.pi * (4.0 * k + 3.0) / (4.0 * order + 2.0))
    for _ in range(5):
        p_prev = np.ones_like(x)
        p = x.copy()
        for m in range(1, order):
            p_prev, p = p, ((2 * m + 1) * x * p - m * p_prev) / (m + 1)
        dp = order * (p_prev - x * p) / (1.0 - x * x)
        dx = p / dp
        x -= dx
        if np.max(np.abs(dx)) < 1e-15:
            break
    x = 0.5 * (x - x[::-1])  # enforce exact symmetry
    p_prev = np.ones_like(x)
    p = x.copy()
    for m in range(1, order):
        p_prev, p = p, ((2 * m + 1) * x * p - m * p_prev) / (m + 1)
    dp = order * (p_prev - x * p) / (1.0 - x * x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    idx = np.argsort(x)
    return x[idx], w[idx]


def _axis_rule(measure: Measure, axis: int, order: int):
    if measure.kind == "gaussian":
        t, w = np.polynomial.hermite.hermgauss(order)
        nodes = measure.mean[axis] + math.sqrt(2.0 * measure.var[axis]) * t
        return nodes, w / math.sqrt(math.pi)
    dom = measure.domain
    lo, hi = dom.lower[axis], dom.upper[axis]
    if dom.kind == "circle":
        # periodic trapezoid rule: exact for trigonometric polynomials of
        # frequency < order, which is what the fourier dictionaries need
        nodes = lo + (hi - lo) * np.arange(order) / order
        return nodes, np.full(order, 1.0 / order)
    t, w = _leggauss(order)
    nodes = 0.5 * (hi - lo) * t + 0.5 * (hi + lo)
    return nodes, w / 2.0


def gauss_rule(measure: Measure, order: int) -> QuadratureRule:
    """Tensorized quadrature exact to degree 2*order-1 per axis.

    Gauss-Legendre on boxes, Gauss-Hermite for Gaussians, the periodic
    trapezoid rule on circle axes.  Intended for d <= 3; the node count grows
    as order**d.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    d = measure.dimension
    if d > 3:
        raise ValueError("tensorized quadrature supports d <= 3")
    axes = [_axis_rule(measure, i, order) for i in range(d)]
    if d == 1:
        nodes, weights = axes[0]
        return QuadratureRule(nodes[None, :].copy(), weights.copy())
    grids = np.meshgrid(*[a[0] for a in axes], indexing="ij")
    nodes = np.vstack([g.reshape(-1) for g in grids])
    weights = axes[0][1]
    for _, w in axes[1:]:
        weights = np.multiply.outer(weights, w)
    return QuadratureRule(nodes, weights.reshape(-1))


# ---------------------------------------------------------------------------
# registry: systems and measures selected by string identifiers


def _logistic():
    dom = box(-1.0, 1.0)
    return DynamicalSystem(
        name="logistic",
        domain=dom,
        forward=lambda x: 2.0 * x * x - 1.0,
        forward_batch=lambda p: 2.0 * p * p - 1.0,
        polynomial_degree=2,
    )


def _identity():
    dom = box(-1.0, 1.0)
    return DynamicalSystem(
        name="identity",
        domain=dom,
        forward=lambda x: x,
        inverse=lambda x: x,
        forward_batch=lambda p: p,
        polynomial_degree=1,
    )


def _rotation(omega):
    dom = circle(1)
    return DynamicalSystem(
        name=f"rotation:omega={omega!r}",
        domain=dom,
        forward=lambda x: x + omega,
        inverse=lambda x: x - omega,
        forward_batch=lambda p: p + omega,
    )


def _affine(a, b):
    dom = box(-1.0, 1.0)
    inv = (lambda x: (x - b) / a) if a != 0.0 else None
    return DynamicalSystem(
        name=f"affine:a={a!r},b={b!r}",
        domain=dom,
        forward=lambda x: a * x + b,
        inverse=inv,
        forward_batch=lambda p: a * p + b,
        polynomial_degree=1,
    )


def _parse_kv(body, spec):
    out = {}
    for part in body.split(","):
        if "=" not in part:
            raise ConfigError(f"malformed parameter {part!r} in {spec!r}")
        k, _, v = part.partition("=")
        try:
            out[k.strip()] = float(v)
        except ValueError as exc:
            raise ConfigError(f"non-numeric value in {spec!r}") from exc
    return out


def parse_system(spec: str) -> DynamicalSystem:
    """Build a registered system from its CLI identifier.

    Recognized: ``logistic``, ``identity``, ``rotation:omega=<float>``,
    ``affine:a=<float>,b=<float>``.
    """
    name, _, body = spec.partition(":")
    if name == "logistic":
        return _logistic()
    if name == "identity":
        return _identity()
    if name == "rotation":
        kv = _parse_kv(body, spec)
        if set(kv) != {"omega"}:
            raise ConfigError(f"rotation takes omega=<float>, got {spec!r}")
        return _rotation(kv["omega"])
    if name == "affine":
        kv = _parse_kv(body, spec)
        if set(kv) != {"a", "b"}:
            raise ConfigError(f"affine takes a=<float>,b=<float>, got {spec!r}")
        return _affine(kv["a"], kv["b"])
    raise ConfigError(f"unknown system {spec!r}")


def parse_measure(spec: str) -> Measure:
    """Build a measure from ``uniform:<lo>,<hi>`` or ``gaussian:<mean>,<var>``."""
    name, _, body = spec.partition(":")
    parts = body.split(",") if body else []
    if name == "uniform":
        if len(parts) != 2:
            raise ConfigError(f"uniform takes <lo>,<hi>, got {spec!r}")
        try:
            lo, hi = float(parts[0]), float(parts[1])
        except ValueError as exc:
            raise ConfigError(f"non-numeric bounds in {spec!r}") from exc
        if not lo < hi:
            raise ConfigError(f"uniform requires lo < hi, got {spec!r}")
        return uniform(box(lo, hi))
    if name == "gaussian":
        if len(parts) != 2:
            raise ConfigError(f"gaussian takes <mean>,<var>, got {spec!r}")
        try:
            m, v = float(parts[0]), float(parts[1])
        except ValueError as exc:
            raise ConfigError(f"non-numeric parameters in {spec!r}") from exc
        if v <= 0:
            raise ConfigError("gaussian variance must be positive")
        return gaussian(m, v)
    raise ConfigError(f"unknown measure {spec!r}")
