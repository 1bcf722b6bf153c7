"""Midpoint certification of F-concavity and quasiconcavity on grids.

Triples are (x, m, y) with m the midpoint of x and y, all three grid nodes.
On a 1D grid that means even index gaps; in 2D both index offsets are even.
The slack of a triple is ``F(f(m)) − (F(f(x)) + F(f(y)))/2`` evaluated with
the -inf conventions of :mod:`fconcavity.extended`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional

import mpmath
import numpy as np

from .extended import NEG_INF, POS_INF, ExtArray, ExtendedReal
from .fields import Field
from .transforms import DomainError, Transform

__all__ = [
    "Witness",
    "ConcavityReport",
    "slack",
    "check_f_concave",
    "check_quasiconcave",
    "reverify_witness",
    "midpoint_triples",
]

CERTIFIED = "certified_on_samples"
VIOLATED = "violated"


@dataclass(frozen=True)
class Witness:
    x: tuple
    y: tuple
    mu: float
    slack: ExtendedReal

    def to_json(self) -> dict:
        return {"x": list(self.x), "y": list(self.y), "mu": self.mu, "slack": self.slack.to_json()}


@dataclass
class ConcavityReport:
    verdict: str
    min_slack: ExtendedReal
    witnesses: list
    n_triples: int
    tolerance: float
    argmin: Optional[Witness] = None
    n_vacuous: int = 0
    transform: str = ""

    @property
    def certified(self) -> bool:
        return self.verdict == CERTIFIED

    @property
    def violated(self) -> bool:
        return self.verdict == VIOLATED

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "min_slack": self.min_slack.to_json(),
            "witnesses": [w.to_json() for w in self.witnesses],
            "tolerance": self.tolerance,
            "n_triples": self.n_triples,
            "n_vacuous": self.n_vacuous,
            "argmin": None if self.argmin is None else self.argmin.to_json(),
            "transform": self.transform,
        }


def midpoint_triples(domain, active: np.ndarray, max_half_gap: Optional[int] = None) -> Iterator[tuple]:
    """Yield flat index arrays (ix, im, iy) of midpoint triples among ``active`` nodes.

    Batches come out in a fixed order, so downstream tie-breaking is
    deterministic.
    """
    shape = domain.shape
    flat_active = active.ravel()
    if domain.dim == 1:
        n = shape[0]
        top = (n - 1) // 2 if max_half_gap is None else min(max_half_gap, (n - 1) // 2)
        base = np.arange(n)
        for d in range(1, top + 1):
            ix = base[: n - 2 * d]
            im, iy = ix + d, ix + 2 * d
            ok = flat_active[ix] & flat_active[im] & flat_active[iy]
            if ok.any():
                yield ix[ok], im[ok], iy[ok]
        return

    nx, ny = shape
    ii, jj = np.nonzero(active)
    ax_max = (nx - 1) // 2
    ay_max = (ny - 1) // 2
    if max_half_gap is not None:
        ax_max, ay_max = min(ax_max, max_half_gap), min(ay_max, max_half_gap)
    for a in range(0, ax_max + 1):
        for b in range(-ay_max, ay_max + 1):
            if a == 0 and b <= 0:
                continue
            ty, tx = jj + 2 * b, ii + 2 * a
            inb = (tx < nx) & (ty >= 0) & (ty < ny)
            if not inb.any():
                continue
            sx, sy, tx, ty = ii[inb], jj[inb], tx[inb], ty[inb]
            mx, my = sx + a, sy + b
            ix = sx * ny + sy
            iy = tx * ny + ty
            im = mx * ny + my
            ok = flat_active[iy] & flat_active[im]
            if ok.any():
                yield ix[ok], im[ok], iy[ok]


def _validate_range(F: Transform, f: Field, active: np.ndarray) -> None:
    vals = np.where(active, f.values, F.interval.lo if np.isfinite(F.interval.lo) else 0.0)
    inside = F.interval.contains(np.nan_to_num(vals))
    bad = active & ~inside
    if bad.any():
        idx = tuple(np.argwhere(bad)[0])
        raise DomainError(
            f"value {f.values[idx]!r} at node {f.domain.point(idx)} outside {F.interval} of {F.spec}"
        )


def _active(f: Field, node_mask) -> np.ndarray:
    active = f.domain.mask.copy()
    if node_mask is not None:
        active &= np.asarray(node_mask, dtype=bool)
    return active


def _witness(domain, ix, iy, s) -> Witness:
    shape = domain.shape
    px = domain.point(np.unravel_index(int(ix), shape))
    py = domain.point(np.unravel_index(int(iy), shape))
    return Witness(px, py, 0.5, s)


class _Tracker:
    """Streaming minimum plus the k most negative triples, ordered by (slack, ix, iy)."""

    def __init__(self, tolerance: float, k: int):
        self.tol = tolerance
        self.k = k
        self.n = 0
        self.n_vacuous = 0
        self.hard = None  # first hard violation (ix, iy)
        self.n_hard = 0
        self.best = None  # (slack, ix, iy) of finite minimum
        self.viol = (np.empty(0), np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64))
        self.hard_list = []

    def add(self, s, ix, iy, vacuous, hard):
        self.n += len(s)
        self.n_vacuous += int(vacuous.sum())
        if hard.any():
            hx, hy = ix[hard], iy[hard]
            self.n_hard += len(hx)
            order = np.lexsort((hy, hx))
            for o in order[: self.k]:
                self.hard_list.append((int(hx[o]), int(hy[o])))
            self.hard_list = sorted(self.hard_list)[: self.k]
        fin = ~(vacuous | hard)
        if not fin.any():
            return
        s, ix, iy = s[fin], ix[fin], iy[fin]
        order = np.lexsort((iy, ix, s))
        j = order[0]
        cand = (float(s[j]), int(ix[j]), int(iy[j]))
        if self.best is None or cand < self.best:
            self.best = cand
        bad = s < -self.tol
        if bad.any():
            vs = np.concatenate([self.viol[0], s[bad]])
            vx = np.concatenate([self.viol[1], ix[bad]])
            vy = np.concatenate([self.viol[2], iy[bad]])
            o = np.lexsort((vy, vx, vs))[: self.k]
            self.viol = (vs[o], vx[o], vy[o])

    def report(self, domain, transform: str) -> ConcavityReport:
        witnesses = [_witness(domain, x, y, NEG_INF) for x, y in self.hard_list]
        room = self.k - len(witnesses)
        for s, x, y in zip(*self.viol):
            if room <= 0:
                break
            witnesses.append(_witness(domain, x, y, ExtendedReal(float(s))))
            room -= 1
        if self.hard_list:
            min_slack = NEG_INF
            argmin = witnesses[0]
        elif self.best is not None:
            min_slack = ExtendedReal(self.best[0])
            argmin = _witness(domain, self.best[1], self.best[2], min_slack)
        else:
            min_slack = POS_INF
            argmin = None
        verdict = VIOLATED if min_slack < -self.tol else CERTIFIED
        if verdict == CERTIFIED:
            witnesses = []
        return ConcavityReport(verdict, min_slack, witnesses, self.n, self.tol, argmin,
                               self.n_vacuous, transform)


def check_f_concave(F: Transform, f: Field, tolerance: float = 1e-9, node_mask=None,
                    max_witnesses: int = 10, max_half_gap: Optional[int] = None) -> ConcavityReport:
    """Midpoint F-concavity over every grid triple (restricted to ``node_mask`` if given)."""
    active = _active(f, node_mask)
    _validate_range(F, f, active)
    # inactive nodes get a harmless placeholder; they never enter a triple
    G = F.evaluate(np.where(active, f.values, _safe_point(F)))
    fin = G.finite.ravel()
    neg = G.neg_inf.ravel() & active.ravel()
    tr = _Tracker(tolerance, max_witnesses)
    for ix, im, iy in midpoint_triples(f.domain, active, max_half_gap):
        rhs_neg = neg[ix] | neg[iy]
        hard = neg[im] & ~rhs_neg
        s = fin[im] - 0.5 * fin[ix] - 0.5 * fin[iy]
        tr.add(s, ix, iy, rhs_neg, hard)
    return tr.report(f.domain, F.spec)


def _safe_point(F: Transform) -> float:
    a, b = F.interval.working_window()
    return 0.5 * (a + b)


def check_quasiconcave(f: Field, tolerance: float = 1e-9, node_mask=None,
                       max_witnesses: int = 10, max_half_gap: Optional[int] = None) -> ConcavityReport:
    """Midpoint quasiconcavity: f(m) >= min(f(x), f(y))."""
    active = _active(f, node_mask)
    v = np.nan_to_num(f.values).ravel()
    tr = _Tracker(tolerance, max_witnesses)
    for ix, im, iy in midpoint_triples(f.domain, active, max_half_gap):
        s = v[im] - np.minimum(v[ix], v[iy])
        none = np.zeros(len(s), dtype=bool)
        tr.add(s, ix, iy, none, none)
    return tr.report(f.domain, "quasiconcave")


def slack(F: Transform, f: Field, x, y, mu: float = 0.5) -> ExtendedReal:
    """F(f(m)) − (1−μ)F(f(x)) − μF(f(y)) with m = (1−μ)x + μy.

    x and y must be grid nodes; m may be off-grid when the field carries a
    closed form.
    """
    if not 0.0 <= mu <= 1.0:
        raise ValueError(f"mu must lie in [0, 1], got {mu}")
    px = np.atleast_1d(np.asarray(x, dtype=float))
    py = np.atleast_1d(np.asarray(y, dtype=float))
    for p in (px, py):
        if f.domain.locate(p) is None:
            raise ValueError(f"{tuple(p)} is not a node of {f.domain!r}")
    pm = (1.0 - mu) * px + mu * py
    fx, fy, fm = f.value_at(px), f.value_at(py), f.value_at(pm)
    for p, v in ((px, fx), (py, fy), (pm, fm)):
        if not F.interval.contains(v):
            raise DomainError(f"value {v!r} at node {tuple(p)} outside {F.interval} of {F.spec}")
    Fx, Fy, Fm = F(fx), F(fy), F(fm)
    rhs = ExtendedReal(0.0)
    for w, val in ((1.0 - mu, Fx), (mu, Fy)):
        if w > 0:
            rhs = rhs + w * val
    if rhs.is_neg_inf:
        return POS_INF
    return Fm - rhs


def reverify_witness(F: Transform, f: Field, w: Witness, dps: int = 40):
    """Recompute a witness slack in ``dps``-digit arithmetic from the stored node values.

    Returns an mpmath number (``+inf``/``-inf`` under the same conventions).
    """
    with mpmath.workdps(dps):
        px = np.asarray(w.x, dtype=float)
        py = np.asarray(w.y, dtype=float)
        pm = (1.0 - w.mu) * px + w.mu * py
        vx, vy, vm = (f.value_at(p) for p in (px, py, pm))
        Fx, Fy, Fm = (F.mp_value(v) for v in (vx, vy, vm))
        mu = mpmath.mpf(w.mu)
        if Fx == mpmath.ninf or Fy == mpmath.ninf:
            return mpmath.inf
        if Fm == mpmath.ninf:
            return mpmath.ninf
        return Fm - (1 - mu) * Fx - mu * Fy
