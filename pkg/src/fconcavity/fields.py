"""Grid-sampled functions on a :class:`~fconcavity.domains.Domain`."""
from __future__ import annotations

import csv
import io
import os
import tempfile
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .domains import Domain, interval_domain, polygon_domain
from .transforms import DomainError, Interval

__all__ = ["Field", "read_field_csv", "write_field_csv", "atomic_write_text"]


@dataclass(frozen=True, eq=False)
class Field:
    """Values of f at the nodes of ``domain`` (NaN off the polygon mask).

    ``closed_form`` optionally evaluates f off the grid; it takes one
    coordinate array per axis.  Fields store f itself, never F(f), so -inf
    cannot occur here.
    """

    domain: Domain
    values: np.ndarray
    closed_form: Optional[Callable] = None
    range_interval: Optional[Interval] = None

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.shape != self.domain.shape:
            raise ValueError(f"values have shape {vals.shape}, domain grid is {self.domain.shape}")
        mask = self.domain.mask
        vals[~mask] = np.nan
        if not np.all(np.isfinite(vals[mask])):
            raise ValueError("field values must be finite at every domain node")
        if self.range_interval is not None:
            bad = mask & ~self.range_interval.contains(np.where(mask, vals, 0.0))
            if bad.any():
                idx = tuple(np.argwhere(bad)[0])
                raise DomainError(
                    f"field value {vals[idx]!r} at node {self.domain.point(idx)} outside {self.range_interval}"
                )
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_function(cls, domain: Domain, fn: Callable, range_interval: Optional[Interval] = None) -> "Field":
        coords = np.meshgrid(*domain.axes, indexing="ij")
        vals = np.asarray(fn(*coords), dtype=float)
        vals = np.broadcast_to(vals, domain.shape)
        mask = domain.mask
        vals = np.where(mask, vals, np.nan)
        return cls(domain, vals, closed_form=fn, range_interval=range_interval)

    @classmethod
    def constant(cls, domain: Domain, c: float) -> "Field":
        return cls.from_function(domain, lambda *xs: np.full(np.shape(xs[0]), float(c)))

    # views ------------------------------------------------------------------
    @property
    def active_values(self) -> np.ndarray:
        return self.values[self.domain.mask]

    def sup(self) -> float:
        return float(np.max(self.active_values))

    def inf(self) -> float:
        return float(np.min(self.active_values))

    def value_at(self, point) -> float:
        """f at a node, or via ``closed_form`` off the grid."""
        idx = self.domain.locate(point)
        if idx is not None:
            return float(self.values[idx])
        if self.closed_form is None:
            raise ValueError(f"{point!r} is not a grid node and the field has no closed form")
        p = np.atleast_1d(np.asarray(point, dtype=float))
        return float(np.asarray(self.closed_form(*[np.array(c) for c in p])))

    # derived fields -----------------------------------------------------------
    def map(self, fn: Callable[[np.ndarray], np.ndarray], range_interval: Optional[Interval] = None) -> "Field":
        vals = np.where(self.domain.mask, fn(np.nan_to_num(self.values)), np.nan)
        cf = None
        if self.closed_form is not None:
            base = self.closed_form
            cf = lambda *xs: fn(np.asarray(base(*xs), dtype=float))
        return Field(self.domain, vals, cf, range_interval)

    def scaled(self, lam: float) -> "Field":
        return self.map(lambda v: lam * v)

    def power(self, r: float) -> "Field":
        return self.map(lambda v: np.power(v, r))

    def shifted(self, c: float) -> "Field":
        return self.map(lambda v: v + c)

    def negated(self) -> "Field":
        return self.map(lambda v: -v)

    def with_range(self, interval: Optional[Interval]) -> "Field":
        return Field(self.domain, self.values, self.closed_form, interval)


# ---------------------------------------------------------------------------
# CSV

def _rows(f: Field):
    d = f.domain
    if d.dim == 1:
        for x, v in zip(d.x, f.values):
            yield (repr(float(x)), repr(float(v)))
        return
    ax, ay = d.axes
    mask = d.mask
    for i in range(d.shape[0]):
        for j in range(d.shape[1]):
            if mask[i, j]:
                yield (repr(float(ax[i])), repr(float(ay[j])), repr(float(f.values[i, j])))


def field_to_csv(f: Field) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "value"] if f.domain.dim == 1 else ["x", "y", "value"])
    w.writerows(_rows(f))
    return buf.getvalue()


def atomic_write_text(path, text: str) -> None:
    """Write via a temp file in the target directory, then rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_field_csv(f: Field, path) -> None:
    atomic_write_text(path, field_to_csv(f))


def read_field_csv(path, domain: Optional[Domain] = None) -> Field:
    """Parse a field CSV.

    Without ``domain``, a 1D file defines an interval grid from its x column
    and a 2D file must cover the full bounding rectangle of its nodes.
    """
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty field file")
    header = [c.strip() for c in rows[0]]
    if header not in (["x", "value"], ["x", "y", "value"]):
        raise ValueError(f"{path}: header must be 'x,value' or 'x,y,value', got {','.join(header)!r}")
    try:
        data = np.array([[float(c) for c in r] for r in rows[1:] if r], dtype=float)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None
    if data.ndim != 2 or data.shape[1] != len(header):
        raise ValueError(f"{path}: malformed rows")
    if not np.all(np.isfinite(data)):
        raise ValueError(f"{path}: non-finite entries are not allowed (fields store f, not F(f))")

    if len(header) == 2:
        x, v = data[:, 0], data[:, 1]
        if domain is None:
            domain = interval_domain(x[0], x[-1], n=len(x))
        if domain.shape != (len(x),) or not np.allclose(domain.x, x, rtol=0, atol=1e-9 * domain.h):
            raise ValueError(f"{path}: x column does not match the domain grid")
        return Field(domain, v)

    xs, ys, v = data[:, 0], data[:, 1], data[:, 2]
    if domain is None:
        x0, x1, y0, y1 = xs.min(), xs.max(), ys.min(), ys.max()
        ux = np.unique(xs)
        h = float(np.min(np.diff(ux))) if len(ux) > 1 else float(np.min(np.diff(np.unique(ys))))
        domain = polygon_domain([(x0, y0), (x1, y0), (x1, y1), (x0, y1)], h)
    vals = np.full(domain.shape, np.nan)
    seen = np.zeros(domain.shape, dtype=bool)
    for px, py, pv in zip(xs, ys, v):
        idx = domain.locate((px, py))
        if idx is None:
            raise ValueError(f"{path}: node ({px}, {py}) is not on the domain grid")
        vals[idx] = pv
        seen[idx] = True
    missing = domain.mask & ~seen
    if missing.any():
        idx = tuple(np.argwhere(missing)[0])
        raise ValueError(f"{path}: no value for node {domain.point(idx)}")
    return Field(domain, vals)
