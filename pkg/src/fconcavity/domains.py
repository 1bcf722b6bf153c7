"""Convex domains sampled on uniform grids: 1D intervals and 2D convex polygons."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np

__all__ = ["Domain", "interval_domain", "polygon_domain", "unit_square"]

_EPS = 1e-12


@dataclass(frozen=True, eq=False)
class Domain:
    """A closed convex domain with a uniform node grid.

    1D: nodes ``lo + i*h``, i = 0..n-1, endpoints included.
    2D: the grid covers the polygon's bounding box with spacing ``h`` on both
    axes; ``mask`` flags nodes inside or on the polygon.
    """

    kind: str
    lo: float = 0.0
    hi: float = 1.0
    vertices: Optional[tuple] = None
    h: float = 0.0
    shape: tuple = ()
    origin: tuple = ()

    @property
    def dim(self) -> int:
        return 1 if self.kind == "interval" else 2

    @property
    def n_nodes(self) -> int:
        return int(self.mask.sum())

    # grid geometry --------------------------------------------------------
    @cached_property
    def axes(self) -> tuple:
        if self.kind == "interval":
            return (np.linspace(self.lo, self.hi, self.shape[0]),)
        x0, y0 = self.origin
        nx, ny = self.shape
        return (x0 + self.h * np.arange(nx), y0 + self.h * np.arange(ny))

    @property
    def x(self) -> np.ndarray:
        """1D node coordinates."""
        if self.kind != "interval":
            raise AttributeError("x is only defined for interval domains")
        return self.axes[0]

    def coords(self) -> np.ndarray:
        """Node coordinates with shape ``shape + (dim,)``."""
        if self.kind == "interval":
            return self.x[:, None]
        X, Y = np.meshgrid(*self.axes, indexing="ij")
        return np.stack([X, Y], axis=-1)

    @cached_property
    def mask(self) -> np.ndarray:
        """Nodes inside or on the boundary of the closed domain."""
        if self.kind == "interval":
            return np.ones(self.shape, dtype=bool)
        return self._edge_margin() >= -_EPS * max(1.0, self.h)

    @cached_property
    def interior_mask(self) -> np.ndarray:
        """Nodes strictly inside (the Dirichlet unknowns)."""
        if self.kind == "interval":
            m = np.ones(self.shape, dtype=bool)
            m[0] = m[-1] = False
            return m
        return self._edge_margin() > _EPS * max(1.0, self.h)

    def _edge_margin(self) -> np.ndarray:
        """min over edges of the signed distance to the edge line (positive inside)."""
        P = self.coords()
        V = np.asarray(self.vertices)
        margin = np.full(self.shape, np.inf)
        for i in range(len(V)):
            a, b = V[i], V[(i + 1) % len(V)]
            e = b - a
            cross = e[0] * (P[..., 1] - a[1]) - e[1] * (P[..., 0] - a[0])
            margin = np.minimum(margin, cross / np.hypot(*e))
        return margin

    def contains(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if self.kind == "interval":
            x = pts[:, 0]
            return (x >= self.lo - _EPS) & (x <= self.hi + _EPS)
        V = np.asarray(self.vertices)
        ok = np.ones(len(pts), dtype=bool)
        for i in range(len(V)):
            a, b = V[i], V[(i + 1) % len(V)]
            e = b - a
            cross = e[0] * (pts[:, 1] - a[1]) - e[1] * (pts[:, 0] - a[0])
            ok &= cross / np.hypot(*e) >= -_EPS * max(1.0, self.h)
        return ok

    def locate(self, point, atol: Optional[float] = None) -> Optional[tuple]:
        """Grid index of the node at ``point`` (None if ``point`` is not a node)."""
        p = np.atleast_1d(np.asarray(point, dtype=float))
        if p.shape != (self.dim,):
            raise ValueError(f"expected a {self.dim}-dimensional point, got {point!r}")
        h = self.h
        atol = 1e-9 * h if atol is None else atol
        idx = []
        for ax, c in zip(self.axes, p):
            i = int(round((c - ax[0]) / h))
            if not 0 <= i < len(ax) or abs(ax[i] - c) > atol:
                return None
            idx.append(i)
        idx = tuple(idx)
        if not self.mask[idx]:
            return None
        return idx

    def point(self, idx) -> tuple:
        return tuple(float(ax[i]) for ax, i in zip(self.axes, np.atleast_1d(idx)))

    # serialisation ---------------------------------------------------------
    def to_json(self) -> dict:
        if self.kind == "interval":
            return {"kind": "interval", "lo": self.lo, "hi": self.hi, "n": self.shape[0]}
        return {"kind": "polygon", "vertices": [list(v) for v in self.vertices], "h": self.h}

    @classmethod
    def from_json(cls, doc) -> "Domain":
        if isinstance(doc, str):
            doc = json.loads(doc)
        kind = doc.get("kind")
        if kind == "interval":
            if "n" in doc:
                return interval_domain(doc["lo"], doc["hi"], n=int(doc["n"]))
            return interval_domain(doc["lo"], doc["hi"], h=float(doc["h"]))
        if kind == "polygon":
            return polygon_domain(doc["vertices"], float(doc["h"]))
        raise ValueError(f"unknown domain kind {kind!r}")

    def __repr__(self):
        if self.kind == "interval":
            return f"Domain(interval [{self.lo}, {self.hi}], n={self.shape[0]})"
        return f"Domain(polygon {len(self.vertices)} vertices, h={self.h}, grid={self.shape})"


def interval_domain(lo: float, hi: float, h: Optional[float] = None, n: Optional[int] = None) -> Domain:
    """[lo, hi] with either spacing ``h`` (must divide the length) or ``n`` nodes."""
    lo, hi = float(lo), float(hi)
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise ValueError(f"interval domain needs finite lo < hi, got [{lo}, {hi}]")
    if (h is None) == (n is None):
        raise ValueError("give exactly one of h or n")
    if n is None:
        cells = (hi - lo) / h
        n_cells = int(round(cells))
        if n_cells < 1 or abs(cells - n_cells) > 1e-6 * max(1.0, cells):
            raise ValueError(f"spacing h={h} does not divide [{lo}, {hi}]")
        n = n_cells + 1
    if n < 3:
        raise ValueError("an interval grid needs at least 3 nodes")
    return Domain(kind="interval", lo=lo, hi=hi, h=(hi - lo) / (n - 1), shape=(int(n),))


def polygon_domain(vertices, h: float) -> Domain:
    """Convex polygon (counterclockwise vertex list) on a grid of spacing ``h``.

    The grid is anchored at the lower-left corner of the bounding box.
    """
    V = np.asarray(vertices, dtype=float)
    if V.ndim != 2 or V.shape[1] != 2 or len(V) < 3:
        raise ValueError("a polygon needs at least 3 two-dimensional vertices")
    crosses = []
    for i in range(len(V)):
        a, b, c = V[i], V[(i + 1) % len(V)], V[(i + 2) % len(V)]
        e1, e2 = b - a, c - b
        crosses.append(e1[0] * e2[1] - e1[1] * e2[0])
    crosses = np.array(crosses)
    if np.any(crosses < -1e-12):
        raise ValueError("polygon is not convex and counterclockwise")
    if not np.any(crosses > 1e-12):
        raise ValueError("polygon vertices are collinear")
    if not h > 0:
        raise ValueError("grid spacing must be positive")
    x0, y0 = V.min(axis=0)
    x1, y1 = V.max(axis=0)
    nx = int(math.floor((x1 - x0) / h + 1e-9)) + 1
    ny = int(math.floor((y1 - y0) / h + 1e-9)) + 1
    return Domain(
        kind="polygon",
        vertices=tuple(tuple(map(float, v)) for v in V),
        h=float(h),
        shape=(nx, ny),
        origin=(float(x0), float(y0)),
    )


def unit_square(h: float) -> Domain:
    return polygon_domain([(0, 0), (1, 0), (1, 1), (0, 1)], h)
