"""Generators of F-concave fields and probes built on the certification engine."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import mpmath
import numpy as np

from .concavity import ConcavityReport, check_f_concave, reverify_witness, slack
from .domains import Domain, interval_domain
from .fields import Field
from .transforms import DomainError, Interval, Transform, affine

__all__ = [
    "sample_f_concave",
    "barrier_field",
    "ProbeOutcome",
    "closure_probe",
    "StrengthEvidence",
    "compare_strength",
    "Thm12Result",
    "thm12_counterexample",
    "separating_point_scan",
    "CStarReport",
    "cstar_membership",
]

CERTIFIED = "certified"
VIOLATED = "violated"
RANGE_EXIT = "range_exit"


def _draw_endpoints(F: Transform, rng: np.random.Generator) -> tuple[float, float]:
    lo, hi = F.interval.working_window()
    w = hi - lo
    a = rng.uniform(lo, lo + 0.5 * w)
    b = rng.uniform(a + 0.25 * w, hi)
    return a, b


def _concave_profile(domain: Domain, rng: np.random.Generator, n_kinks: int, curvature: float):
    """Random concave g on the grid: min of n_kinks+1 tangent planes of a paraboloid, plus curvature."""
    coords = domain.coords()
    lo = coords.reshape(-1, domain.dim)[domain.mask.ravel()].min(axis=0)
    hi = coords.reshape(-1, domain.dim)[domain.mask.ravel()].max(axis=0)
    centre = rng.uniform(lo, hi)
    touch = rng.uniform(lo, hi, size=(n_kinks + 1, domain.dim))
    if n_kinks == 0:
        # a single tangent: random nonzero gradient
        touch = centre + rng.choice([-1.0, 1.0], size=(1, domain.dim)) * (0.25 + rng.uniform(0, 0.5, size=(1, domain.dim))) * (hi - lo)

    def q(P):
        return -np.sum((P - centre) ** 2, axis=-1)

    def g_raw(P):
        P = np.asarray(P, dtype=float)
        planes = []
        for z in touch:
            grad = -2.0 * (z - centre)
            planes.append(q(z) + np.sum((P - z) * grad, axis=-1))
        g = np.min(planes, axis=0)
        if curvature:
            g = g + curvature * q(P)
        return g

    return g_raw


def sample_f_concave(F: Transform, domain: Domain, rng_seed: int, n_kinks: int = 2,
                     curvature: float = 0.0) -> Field:
    """A random F-concave field: f = F^{-1}(g) for a concave piecewise-linear g.

    g is squeezed affinely into (F(a), F(b)) for random a < b in the interior
    of F's interval.  ``curvature > 0`` adds a strictly concave quadratic so
    the midpoint slacks are bounded away from zero.
    """
    if n_kinks < 0:
        raise ValueError("n_kinks must be nonnegative")
    rng = np.random.default_rng(rng_seed)
    a, b = _draw_endpoints(F, rng)
    Fa, Fb = F(a).value, F(b).value
    g_raw = _concave_profile(domain, rng, n_kinks, curvature)
    coords = domain.coords()
    raw = g_raw(coords)
    active = raw[domain.mask]
    gmin, gmax = float(active.min()), float(active.max())
    margin = 0.01 * (Fb - Fa)
    span = Fb - Fa - 2 * margin
    if gmax - gmin <= 1e-300:
        scale, shift = 0.0, Fa + margin + 0.5 * span
    else:
        scale = span / (gmax - gmin)
        shift = Fa + margin - scale * gmin

    def closed_form(*xs):
        P = np.stack(np.broadcast_arrays(*[np.asarray(x, dtype=float) for x in xs]), axis=-1)
        return F.inverse(np.atleast_1d(scale * g_raw(P) + shift)).reshape(np.shape(P)[:-1])

    g = scale * raw + shift
    vals = np.full(domain.shape, np.nan)
    vals[domain.mask] = F.inverse(g[domain.mask])
    return Field(domain, vals, closed_form=closed_form, range_interval=F.interval)


def barrier_field(F: Transform, domain: Domain, a: float, b: float, x_star=0.0, nu=1.0) -> Field:
    """f = F^{-1}(F(b) − (F(b) − F(a)) exp(−<x − x*, ν>)) on a domain in the half-space <x − x*, ν> > 0.

    The exponential barrier that witnesses nontriviality on any proper
    convex domain.
    """
    if not (F.interval.interior_contains(a) and F.interval.interior_contains(b) and a < b):
        raise DomainError(f"need a < b inside the interior of {F.interval}")
    Fa, Fb = F(a).value, F(b).value
    x_star = np.atleast_1d(np.asarray(x_star, dtype=float))
    nu = np.atleast_1d(np.asarray(nu, dtype=float))

    def g(*xs):
        P = np.stack(np.broadcast_arrays(*[np.asarray(x, dtype=float) for x in xs]), axis=-1)
        return Fb - (Fb - Fa) * np.exp(-np.sum((P - x_star) * nu, axis=-1))

    def fn(*xs):
        vals = np.atleast_1d(g(*xs))
        return F.inverse(vals.ravel()).reshape(vals.shape)

    gv = g(*np.meshgrid(*domain.axes, indexing="ij"))
    if np.any(gv[domain.mask] <= Fa):
        raise DomainError("domain leaves the half-space <x - x*, nu> > 0")
    return Field.from_function(domain, fn, range_interval=F.interval)


# ---------------------------------------------------------------------------
# closure

@dataclass
class ProbeOutcome:
    kind: str
    param: float
    outcome: str
    report: Optional[ConcavityReport] = None

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "param": self.param,
            "outcome": self.outcome,
            "report": None if self.report is None else self.report.to_json(),
        }


def _transformed(f: Field, kind: str, p: float) -> Field:
    if kind == "scalar":
        if not p > 0:
            raise ValueError("scalar multipliers must be positive")
        return f.scaled(p)
    if kind == "power":
        if not p > 0:
            raise ValueError("exponents must be positive")
        return f.power(p)
    if kind == "translate":
        return f.shifted(p)
    raise ValueError(f"unknown closure kind {kind!r}")


def closure_probe(F: Transform, f: Field, kind: str, params: Sequence[float],
                  tolerance: float = 1e-9, require_base: bool = True) -> list:
    """Check λf, f^r or f+c for F-concavity, one outcome per parameter.

    A transformed field leaving F's interval is reported as ``range_exit``,
    not as a concavity violation.
    """
    if require_base:
        base = check_f_concave(F, f, tolerance)
        if not base.certified:
            raise ValueError(f"closure_probe needs an F-concave field; base check gave min slack {base.min_slack}")
    out = []
    for p in params:
        g = _transformed(f, kind, float(p))
        inside = F.interval.contains(np.nan_to_num(g.values)) | ~g.domain.mask
        if not inside.all():
            out.append(ProbeOutcome(kind, float(p), RANGE_EXIT))
            continue
        rep = check_f_concave(F, g, tolerance)
        out.append(ProbeOutcome(kind, float(p), CERTIFIED if rep.certified else VIOLATED, rep))
    return out


# ---------------------------------------------------------------------------
# strength comparison

@dataclass
class StrengthEvidence:
    stronger: str
    weaker: str
    n_checked: int
    counterexample: bool
    field: Optional[Field] = None
    report: Optional[ConcavityReport] = None
    sample_seed: Optional[int] = None

    def to_json(self) -> dict:
        return {
            "F1": self.stronger,
            "F2": self.weaker,
            "n_checked": self.n_checked,
            "result": "counterexample" if self.counterexample else "no counterexample found",
            "sample_seed": self.sample_seed,
            "report": None if self.report is None else self.report.to_json(),
        }


def compare_strength(F1: Transform, F2: Transform, domain: Domain, n_samples: int = 20,
                     rng_seed: int = 0, tolerance: float = 1e-9) -> StrengthEvidence:
    """Search for an F1-concave field that is not F2-concave."""
    if F1.interval != F2.interval:
        raise ValueError(f"interval mismatch: {F1.spec} on {F1.interval}, {F2.spec} on {F2.interval}")
    rng = np.random.default_rng(rng_seed)
    for i in range(n_samples):
        seed = int(rng.integers(2**32))
        kinks = int(rng.integers(0, 4))
        f = sample_f_concave(F1, domain, seed, n_kinks=kinks)
        rep = check_f_concave(F2, f, tolerance)
        if rep.violated:
            return StrengthEvidence(F1.spec, F2.spec, i + 1, True, f, rep, seed)
    return StrengthEvidence(F1.spec, F2.spec, n_samples, False)


# ---------------------------------------------------------------------------
# the min{x_1, 1} construction

@dataclass
class Thm12Result:
    verdict: str
    predicted: str
    c: float
    normalized_values: tuple
    field: Field
    report: ConcavityReport
    swapped: bool = False
    construction_slack: Optional[float] = None
    reverified_slack: Optional[float] = None
    separating_c: Optional[float] = None

    @property
    def reverified(self) -> bool:
        return self.reverified_slack is not None and self.reverified_slack < -self.report.tolerance

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "predicted": self.predicted,
            "c": self.c,
            "normalized_values_at_c": list(self.normalized_values),
            "swapped": self.swapped,
            "construction_slack": self.construction_slack,
            "reverified_slack": self.reverified_slack,
            "separating_c": self.separating_c,
            "report": self.report.to_json(),
        }


def _normalize(F: Transform, a: float, b: float) -> Transform:
    Fa, Fb = F(a), F(b)
    if not (Fa.is_finite and Fb.is_finite) or Fb.value == Fa.value:
        raise ValueError(f"degenerate normalisation of {F.spec}: F(a)={Fa}, F(b)={Fb}")
    A = 1.0 / (Fb.value - Fa.value)
    return affine(F, A, -Fa.value * A)


def separating_point_scan(F1: Transform, F2: Transform, a: float, b: float, n: int = 1001,
                          atol: float = 1e-12) -> Optional[float]:
    """First c in (a, b) on an n-point grid where the normalised transforms differ."""
    N1, N2 = _normalize(F1, a, b), _normalize(F2, a, b)
    cs = np.linspace(a, b, n)[1:-1]
    d = np.abs(N1.evaluate(cs).finite - N2.evaluate(cs).finite)
    hit = np.nonzero(d > atol)[0]
    return float(cs[hit[0]]) if hit.size else None


def _min_construction(src: Transform, tgt: Transform, a: float, per_unit: int, tolerance: float):
    """f = src^{-1}(min(x, 1)) on a segment [s_lo, 1.5] with s_lo = src(a') < 0."""
    iv = src.interval
    a_prime = a - (a - iv.lo) / 2 if math.isfinite(iv.lo) else a - 1.0
    s_lo = src(a_prime).value
    h = 1.0 / per_unit
    k = int(math.floor(-s_lo / h))
    n_left = max(k, 2)
    lo = -n_left * h
    if lo < s_lo:
        n_left -= 1
        lo = -n_left * h
    dom = interval_domain(lo, 1.5, n=n_left + int(round(1.5 * per_unit)) + 1)
    f = Field.from_function(dom, lambda x: src.inverse(np.minimum(np.atleast_1d(x), 1.0)).reshape(np.shape(x)),
                            range_interval=src.interval)
    rep = check_f_concave(tgt, f, tolerance)
    return f, rep


def thm12_counterexample(F1: Transform, F2: Transform, a: float, b: float, c: float,
                         per_unit: int = 200, tolerance: float = 1e-9, dps: int = 40) -> Thm12Result:
    """Run the min{x_1, 1} construction that separates non-affinely-related transforms.

    Both transforms are normalised to 0 at a and 1 at b.  f = G1(min(x, 1)) is
    F1-concave; it is F2-concave for every such construction only when F1 is
    an affine image of F2.  If the first construction certifies although the
    normalised values at c differ, the roles of F1 and F2 are swapped.
    """
    for F in (F1, F2):
        if not all(F.interval.interior_contains(v) for v in (a, b, c)):
            raise DomainError(f"a, b, c must lie in the interior of {F.interval} ({F.spec})")
    if not a < c < b:
        raise ValueError("need a < c < b")
    N1, N2 = _normalize(F1, a, b), _normalize(F2, a, b)
    v1, v2 = N1(c).value, N2(c).value
    differ = abs(v1 - v2) > 1e-12
    separating = c
    if not differ:
        separating = separating_point_scan(F1, F2, a, b)
    predicted = "violated" if (differ or separating is not None) else "certified"

    f, rep = _min_construction(N1, N2, a, per_unit, tolerance)
    swapped = False
    # proof triple: x = 0, y = e_1, mu = N1(c); the midpoint need not be a node
    construction = float(slack(N2, f, 0.0, 1.0, v1))
    if rep.certified and predicted == "violated":
        f, rep = _min_construction(N2, N1, a, per_unit, tolerance)
        swapped = True
        construction = float(slack(N1, f, 0.0, 1.0, v2))

    reverified = None
    if rep.violated and rep.witnesses:
        tgt = N1 if swapped else N2
        try:
            reverified = float(reverify_witness(tgt, f, rep.witnesses[0], dps=dps))
        except NotImplementedError:
            reverified = None
    return Thm12Result(
        verdict=rep.verdict,
        predicted=predicted,
        c=float(c),
        normalized_values=(v1, v2),
        field=f,
        report=rep,
        swapped=swapped,
        construction_slack=construction,
        reverified_slack=reverified,
        separating_c=separating if not differ else float(c),
    )


# ---------------------------------------------------------------------------
# C* membership

@dataclass
class CStarReport:
    transform: str
    outcomes: list = field(default_factory=list)
    threshold: Optional[float] = None

    @property
    def member(self) -> bool:
        return self.threshold is not None

    def to_json(self) -> dict:
        return {
            "transform": self.transform,
            "outcomes": [o.to_json() for o in self.outcomes],
            "threshold": self.threshold,
            "verdict": "member" if self.member else "not in C* up to tested grid",
        }


def cstar_membership(F: Transform, f: Field, kappa_grid: Sequence[float], tolerance: float = 1e-9) -> CStarReport:
    """Check κf for each κ; report the largest κ below which every tested κ certifies."""
    iv = F.interval
    if not (iv.lo == 0.0 and F.admits_minus_infinity_at_lo):
        raise ValueError(f"C* membership needs F(0) = -inf; {F.spec} has F(0) = {F(0.0) if iv.lo_closed and iv.lo == 0 else 'undefined'}")
    kappas = [float(k) for k in kappa_grid]
    if any(k <= 0 for k in kappas) or any(k2 >= k1 for k1, k2 in zip(kappas, kappas[1:])):
        raise ValueError("kappa_grid must be strictly decreasing and positive")
    if not np.all(np.isfinite(f.active_values)):
        raise ValueError("f must be bounded")
    outs = closure_probe(F, f, "scalar", kappas, tolerance, require_base=False)
    threshold = None
    for o in reversed(outs):
        if o.outcome != CERTIFIED:
            break
        threshold = o.param
    return CStarReport(F.spec, outs, threshold)
