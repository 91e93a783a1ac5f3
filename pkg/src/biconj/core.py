"""Extended reals, uniform grids and the sampled-function container.

Function values live in float64 arrays. ``+inf`` is the only non-finite value
allowed and acts as the sentinel for "outside the effective domain"; NaN and
``-inf`` are rejected at construction time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

INF = math.inf


class ImproperFunction(ValueError):
    """Raised when a sampled function has no finite value."""


class InvalidValue(ValueError):
    """Raised when NaN or -inf would enter an extended-real array."""


def check_extreal(values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    if np.isnan(values).any():
        raise InvalidValue("NaN is not an extended real in (-inf, inf]")
    if np.isneginf(values).any():
        raise InvalidValue("-inf is outside the codomain (-inf, inf]")
    return values


def ext_add(a: float, b: float) -> float:
    if a == INF or b == INF:
        return INF
    return a + b


def ext_scale(w: float, a: float) -> float:
    """``w * a`` for ``w >= 0`` with the convention ``0 * inf = 0``."""
    if w < 0:
        raise ValueError("extended-real scaling needs a nonnegative weight")
    if a == INF:
        return 0.0 if w == 0 else INF
    return w * a


def ext_dot(weights: np.ndarray, values: np.ndarray) -> float:
    """Weighted sum of extended reals with nonnegative weights and 0 * inf = 0."""
    weights = np.asarray(weights, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if (weights < 0).any():
        raise ValueError("weights must be nonnegative")
    live = weights > 0
    if np.isinf(values[live]).any():
        return INF
    return float(np.dot(weights[live], values[live]))


@dataclass(frozen=True)
class Axis:
    lo: float
    hi: float
    count: int

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError("axis bounds must be finite")
        if not self.lo < self.hi:
            raise ValueError(f"axis needs lo < hi, got {self.lo} >= {self.hi}")
        if self.count < 2:
            raise ValueError("axis needs at least two nodes")

    @property
    def step(self) -> float:
        return (self.hi - self.lo) / (self.count - 1)

    def node(self, i: int) -> float:
        # fraction form keeps the midpoint of a symmetric odd axis at exactly 0
        return self.lo + (self.hi - self.lo) * (i / (self.count - 1))

    @property
    def nodes(self) -> np.ndarray:
        i = np.arange(self.count, dtype=np.float64)
        return self.lo + (self.hi - self.lo) * (i / (self.count - 1))

    def scaled(self, alpha: float) -> "Axis":
        lo, hi = sorted((alpha * self.lo, alpha * self.hi))
        return Axis(lo, hi, self.count)

    def __str__(self) -> str:
        return f"{self.lo!r}:{self.hi!r}:{self.count}"


@dataclass(frozen=True)
class GridSpec:
    """Tensor grid of 1 or 2 uniform axes, nodes enumerated row-major."""

    axes: tuple[Axis, ...]

    def __post_init__(self):
        object.__setattr__(self, "axes", tuple(self.axes))
        if len(self.axes) not in (1, 2):
            raise ValueError("only dimensions 1 and 2 are supported")

    @classmethod
    def regular(cls, *specs: tuple[float, float, int]) -> "GridSpec":
        return cls(tuple(Axis(float(lo), float(hi), int(n)) for lo, hi, n in specs))

    @classmethod
    def parse(cls, texts: Sequence[str]) -> "GridSpec":
        """Build from ``lo:hi:n`` strings, one per axis."""
        axes = []
        for text in texts:
            parts = text.split(":")
            if len(parts) != 3:
                raise ValueError(f"grid axis must look like lo:hi:n, got {text!r}")
            axes.append(Axis(float(parts[0]), float(parts[1]), int(parts[2])))
        return cls(tuple(axes))

    @property
    def dim(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(a.count for a in self.axes)

    @property
    def size(self) -> int:
        return math.prod(self.shape)

    @property
    def steps(self) -> tuple[float, ...]:
        return tuple(a.step for a in self.axes)

    @property
    def h(self) -> float:
        """Largest spacing over the axes."""
        return max(self.steps)

    def unravel(self, index: int) -> tuple[int, ...]:
        return tuple(int(i) for i in np.unravel_index(index, self.shape))

    def ravel(self, multi: Sequence[int]) -> int:
        return int(np.ravel_multi_index(tuple(multi), self.shape))

    def node(self, index: int) -> tuple[float, ...]:
        return tuple(a.node(i) for a, i in zip(self.axes, self.unravel(index)))

    @property
    def points(self) -> np.ndarray:
        """All nodes as an array of shape (size, dim), row-major."""
        mesh = np.meshgrid(*(a.nodes for a in self.axes), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def locate(self, point: Sequence[float], rtol: float = 1e-9) -> int | None:
        """Index of the node equal to ``point`` up to ``rtol`` of a cell, else None."""
        idx = []
        for a, x in zip(self.axes, point):
            t = (x - a.lo) / a.step
            i = round(t)
            if abs(t - i) > rtol or not 0 <= i < a.count:
                return None
            idx.append(i)
        return self.ravel(idx)

    def nearest(self, point: Sequence[float]) -> int:
        idx = [
            min(max(round((x - a.lo) / a.step), 0), a.count - 1)
            for a, x in zip(self.axes, point)
        ]
        return self.ravel(idx)

    def contains_box(self, point: Sequence[float]) -> bool:
        return all(a.lo <= x <= a.hi for a, x in zip(self.axes, point))

    def scaled(self, alpha: float) -> "GridSpec":
        return GridSpec(tuple(a.scaled(alpha) for a in self.axes))

    def __str__(self) -> str:
        return " x ".join(str(a) for a in self.axes)


# dual grids carry slopes but share the grid machinery
DualGridSpec = GridSpec


@dataclass(frozen=True, eq=False)
class SampledFunction:
    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        values = check_extreal(np.array(self.values, dtype=np.float64).ravel())
        if values.size != self.grid.size:
            raise ValueError(
                f"expected {self.grid.size} values for grid {self.grid}, got {values.size}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def array(self) -> np.ndarray:
        return self.values.reshape(self.grid.shape)

    @property
    def finite(self) -> np.ndarray:
        return np.isfinite(self.values)

    @property
    def is_proper(self) -> bool:
        return bool(self.finite.any())

    def require_proper(self) -> None:
        if not self.is_proper:
            raise ImproperFunction("function is +inf at every node")

    def __call__(self, index: int) -> float:
        return float(self.values[index])

    def at(self, point: Sequence[float]) -> float:
        index = self.grid.locate(point)
        if index is None:
            raise KeyError(f"{tuple(point)} is not a node of {self.grid}")
        return float(self.values[index])

    def min(self) -> float:
        return float(self.values.min())

    def with_values(self, values: np.ndarray) -> "SampledFunction":
        return SampledFunction(self.grid, values)

    def tilted(self, slope: Sequence[float]) -> "SampledFunction":
        """``f - <slope, .>``; +inf stays +inf."""
        lin = self.grid.points @ np.asarray(slope, dtype=np.float64)
        return self.with_values(self.values - lin)

    def __eq__(self, other):
        if not isinstance(other, SampledFunction):
            return NotImplemented
        return self.grid == other.grid and np.array_equal(self.values, other.values)


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Finitely supported probability measure."""

    points: np.ndarray
    weights: np.ndarray
    tol: float = field(default=1e-12, repr=False)

    def __post_init__(self):
        points = np.atleast_2d(np.array(self.points, dtype=np.float64))
        weights = np.array(self.weights, dtype=np.float64).ravel()
        if points.shape[0] != weights.size:
            raise ValueError("one weight per atom required")
        if weights.size == 0:
            raise ValueError("a probability measure needs at least one atom")
        if not (weights > 0).all():
            raise ValueError("atom weights must be strictly positive")
        if abs(weights.sum() - 1.0) > self.tol:
            raise ValueError(f"weights sum to {weights.sum()!r}, not 1")
        if len({tuple(p) for p in points}) != len(points):
            raise ValueError("atom points must be pairwise distinct")
        points.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def dirac(cls, point: Sequence[float]) -> "DiscreteMeasure":
        return cls(np.array([point], dtype=np.float64), np.array([1.0]))

    @classmethod
    def from_atoms(cls, atoms: Iterable[tuple[Sequence[float], float]]) -> "DiscreteMeasure":
        atoms = list(atoms)
        return cls(np.array([p for p, _ in atoms], dtype=np.float64), np.array([w for _, w in atoms]))

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.weights.size

    def atoms(self) -> list[tuple[tuple[float, ...], float]]:
        return [(tuple(map(float, p)), float(w)) for p, w in zip(self.points, self.weights)]

    def integrate(self, f: SampledFunction) -> float:
        """Integral of a sampled function; atoms must be grid nodes."""
        idx = node_indices(f.grid, self)
        return ext_dot(self.weights, f.values[idx])


class AtomOffGrid(ValueError):
    """Raised when a measure atom is not a node of the grid it is used with."""


def node_indices(grid: GridSpec, mu: DiscreteMeasure) -> np.ndarray:
    idx = []
    for p in mu.points:
        k = grid.locate(p)
        if k is None:
            raise AtomOffGrid(f"atom {tuple(p)} is not a node of {grid}")
        idx.append(k)
    return np.array(idx, dtype=np.intp)


def sublevel_set(f: SampledFunction, r: float) -> set[int]:
    """Node indices where ``f <= r``."""
    if not math.isfinite(r):
        raise ValueError("sublevel threshold must be finite")
    return set(np.flatnonzero(f.values <= r).tolist())


def pettis_expectation(mu: DiscreteMeasure) -> tuple[float, ...]:
    return tuple(float(v) for v in mu.weights @ mu.points)

