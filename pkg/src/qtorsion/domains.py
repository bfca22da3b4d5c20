"""Bounded Euclidean domains and their masked-lattice discretizations.

A domain is an open bounded region of R^d described by a strict membership
test.  Discretization places a uniform lattice of spacing h anchored at the
lower corner of the bounding box and keeps exactly the lattice nodes whose
centers lie strictly inside; there are no cut cells, so the boundary is
resolved to first order in h.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import shapely

__all__ = [
    "Domain",
    "Interval",
    "Box",
    "Ball",
    "Polygon2D",
    "Indicator",
    "Grid",
    "GridField",
    "contains",
    "discretize",
    "domain_from_json",
    "EmptyInteriorError",
]


class EmptyInteriorError(ValueError):
    """The lattice at the requested spacing contains no interior nodes."""


class Domain(ABC):
    """Open bounded region of R^d with a strict interior membership test."""

    @property
    @abstractmethod
    def dim(self) -> int: ...

    @abstractmethod
    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        """Lower and upper corners of the axis-aligned bounding box."""

    @abstractmethod
    def mask(self, points: np.ndarray) -> np.ndarray:
        """Boolean strict-interior test for an (n, dim) array of points."""


def _as_points(x, dim: int) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    if pts.shape[1] != dim:
        raise ValueError(f"expected points in R^{dim}, got shape {pts.shape}")
    return pts


@dataclass(frozen=True)
class Interval(Domain):
    """Open interval (a, b) in R^1."""

    a: float
    b: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.a) and math.isfinite(self.b) and self.a < self.b):
            raise ValueError(f"need finite a < b, got ({self.a}, {self.b})")

    @property
    def dim(self) -> int:
        return 1

    def bounds(self):
        return np.array([self.a]), np.array([self.b])

    def mask(self, points):
        pts = _as_points(points, 1)
        return (pts[:, 0] > self.a) & (pts[:, 0] < self.b)


@dataclass(frozen=True)
class Box(Domain):
    """Open axis-aligned box prod_k (lo_k, hi_k)."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self) -> None:
        lo, hi = np.asarray(self.lo, float), np.asarray(self.hi, float)
        if lo.ndim != 1 or lo.shape != hi.shape or lo.size == 0:
            raise ValueError("lo and hi must be equal-length nonempty vectors")
        if not (np.isfinite(lo).all() and np.isfinite(hi).all() and (lo < hi).all()):
            raise ValueError("need finite lo < hi componentwise")
        object.__setattr__(self, "lo", tuple(float(v) for v in lo))
        object.__setattr__(self, "hi", tuple(float(v) for v in hi))

    @property
    def dim(self) -> int:
        return len(self.lo)

    def bounds(self):
        return np.array(self.lo), np.array(self.hi)

    def mask(self, points):
        pts = _as_points(points, self.dim)
        lo, hi = self.bounds()
        return ((pts > lo) & (pts < hi)).all(axis=1)


@dataclass(frozen=True)
class Ball(Domain):
    """Open ball of given center and radius."""

    center: tuple[float, ...]
    radius: float

    def __post_init__(self) -> None:
        c = np.asarray(self.center, float)
        if c.ndim != 1 or c.size == 0 or not np.isfinite(c).all():
            raise ValueError("center must be a finite vector")
        if not (math.isfinite(self.radius) and self.radius > 0.0):
            raise ValueError("radius must be positive")
        object.__setattr__(self, "center", tuple(float(v) for v in c))

    @property
    def dim(self) -> int:
        return len(self.center)

    def bounds(self):
        c = np.asarray(self.center)
        return c - self.radius, c + self.radius

    def mask(self, points):
        pts = _as_points(points, self.dim)
        diff = pts - np.asarray(self.center)
        return (diff * diff).sum(axis=1) < self.radius * self.radius


@dataclass(frozen=True)
class Polygon2D(Domain):
    """Open simple polygon in R^2 given by its vertex loop."""

    vertices: tuple[tuple[float, float], ...]
    _poly: shapely.Polygon = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        verts = np.asarray(self.vertices, float)
        if verts.ndim != 2 or verts.shape[1] != 2 or verts.shape[0] < 3:
            raise ValueError("need at least three 2-D vertices")
        if not np.isfinite(verts).all():
            raise ValueError("vertices must be finite")
        poly = shapely.Polygon(verts)
        if not poly.is_valid or poly.area <= 0.0:
            raise ValueError("polygon must be simple with positive area")
        object.__setattr__(self, "vertices", tuple((float(x), float(y)) for x, y in verts))
        object.__setattr__(self, "_poly", poly)

    @property
    def dim(self) -> int:
        return 2

    def bounds(self):
        x0, y0, x1, y1 = self._poly.bounds
        return np.array([x0, y0]), np.array([x1, y1])

    def mask(self, points):
        pts = _as_points(points, 2)
        # shapely's contains is the strict interior: boundary points excluded
        return shapely.contains_xy(self._poly, pts[:, 0], pts[:, 1])


@dataclass(frozen=True)
class Indicator(Domain):
    """Domain given by an arbitrary membership callable plus a bounding box.

    The callable receives one point as a 1-D array and must return a
    truth value; it is evaluated pointwise, so this is the slow path
    meant for one-off shapes, not production grids.
    """

    fn: Callable[[np.ndarray], bool]
    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self) -> None:
        lo, hi = np.asarray(self.lo, float), np.asarray(self.hi, float)
        if lo.shape != hi.shape or lo.ndim != 1 or lo.size == 0:
            raise ValueError("lo and hi must be equal-length vectors")
        if not ((lo < hi).all() and np.isfinite(lo).all() and np.isfinite(hi).all()):
            raise ValueError("need finite lo < hi componentwise")
        object.__setattr__(self, "lo", tuple(float(v) for v in lo))
        object.__setattr__(self, "hi", tuple(float(v) for v in hi))

    @property
    def dim(self) -> int:
        return len(self.lo)

    def bounds(self):
        return np.array(self.lo), np.array(self.hi)

    def mask(self, points):
        pts = _as_points(points, self.dim)
        return np.fromiter((bool(self.fn(p)) for p in pts), dtype=bool, count=len(pts))


def contains(domain: Domain, x) -> bool:
    """Strict interior membership of a single point."""
    return bool(domain.mask(np.asarray(x, float).reshape(1, -1))[0])


@dataclass(frozen=True)
class Grid:
    """Masked lattice discretization of a domain.

    Attributes
    ----------
    domain, h : the discretized domain and lattice spacing.
    origin : lower bounding-box corner; lattice nodes sit at origin + k h.
    shape : lattice node counts per axis (full bounding box).
    index : integer array of ``shape``; interior nodes carry contiguous
        indices 0..n_interior-1, exterior nodes carry -1.
    multi : (n_interior, dim) lattice multi-indices of interior nodes.
    nodes : (n_interior, dim) coordinates of interior nodes.
    """

    domain: Domain
    h: float
    origin: np.ndarray
    shape: tuple[int, ...]
    index: np.ndarray
    multi: np.ndarray
    nodes: np.ndarray
    n_interior: int

    def __post_init__(self) -> None:
        for arr in (self.origin, self.index, self.multi, self.nodes):
            arr.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.domain.dim

    def index_of(self, k) -> int:
        """Interior index of lattice multi-index k, or -1."""
        return int(self.index[tuple(int(v) for v in np.atleast_1d(k))])


def discretize(domain: Domain, h: float) -> Grid:
    """Masked-lattice grid of spacing h, anchored at the bounding-box corner.

    Keeps lattice nodes strictly inside the domain.  Raises
    EmptyInteriorError when no node survives (spacing too coarse).
    """
    if not (math.isfinite(h) and h > 0.0):
        raise ValueError(f"spacing must be positive, got {h}")
    lo, hi = domain.bounds()
    # guard against float dust when the span is an exact multiple of h
    counts = tuple(int(math.floor((b - a) / h + 1e-9)) + 1 for a, b in zip(lo, hi))
    axes = [lo[k] + h * np.arange(counts[k]) for k in range(domain.dim)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    inside = domain.mask(pts)
    n_int = int(inside.sum())
    if n_int == 0:
        raise EmptyInteriorError(f"no interior lattice nodes at spacing {h}")
    index = np.full(pts.shape[0], -1, dtype=np.int64)
    index[inside] = np.arange(n_int)
    index = index.reshape(counts)
    multi = np.argwhere(index >= 0)
    nodes = lo + h * multi.astype(float)
    return Grid(
        domain=domain,
        h=float(h),
        origin=np.asarray(lo, float),
        shape=counts,
        index=index,
        multi=multi,
        nodes=nodes,
        n_interior=n_int,
    )


@dataclass(frozen=True)
class GridField:
    """Values attached to the interior nodes of a grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.n_interior,):
            raise ValueError(
                f"expected {self.grid.n_interior} values, got shape {vals.shape}"
            )
        if not np.isfinite(vals).all():
            raise ValueError("field values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def sup(self) -> float:
        return float(np.abs(self.values).max())


def domain_from_json(obj: dict) -> Domain:
    """Build a domain from a JSON-style descriptor {"shape": ..., ...}."""
    if not isinstance(obj, dict) or "shape" not in obj:
        raise ValueError("domain descriptor must be a dict with a 'shape' key")
    shape = obj["shape"]
    try:
        if shape == "interval":
            return Interval(a=float(obj["a"]), b=float(obj["b"]))
        if shape == "box":
            return Box(lo=tuple(obj["lo"]), hi=tuple(obj["hi"]))
        if shape == "ball":
            return Ball(center=tuple(obj["center"]), radius=float(obj["radius"]))
        if shape == "polygon":
            return Polygon2D(vertices=tuple(tuple(v) for v in obj["vertices"]))
    except KeyError as exc:
        raise ValueError(f"missing field for shape '{shape}': {exc}") from exc
    raise ValueError(f"unknown shape '{shape}'")
