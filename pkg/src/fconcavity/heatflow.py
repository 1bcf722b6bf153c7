"""Dirichlet heat flow on grid domains, the whole-space kernel, and Gaussian screens."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy import integrate, special

from .concavity import ConcavityReport, check_f_concave, slack
from .domains import Domain, interval_domain
from .fields import Field
from .transforms import Transform

__all__ = [
    "Ball",
    "QuadratureError",
    "ConvergenceError",
    "kernel_convolve",
    "asymptotic_profile_error",
    "HeatState",
    "dirichlet_laplacian",
    "fd_evolve",
    "EigenPair",
    "first_eigenpair",
    "ScreenResult",
    "gaussian_screen",
    "EquivalenceReport",
    "lemma42_check",
    "preservation_probe",
    "long_time_distances",
]


class QuadratureError(ArithmeticError):
    def __init__(self, msg, achieved):
        super().__init__(f"{msg} (achieved error {achieved:.3g})")
        self.achieved = achieved


class ConvergenceError(ArithmeticError):
    pass


# ---------------------------------------------------------------------------
# whole-space kernel

@dataclass(frozen=True)
class Ball:
    """Indicator of the centred ball B(0, radius)."""

    radius: float = 1.0


def _ball_1d(x, t, R):
    # erfc differences keep the tails accurate
    x = np.abs(np.asarray(x, dtype=float))
    s = 2.0 * math.sqrt(t)
    return 0.5 * (special.erfc((x - R) / s) - special.erfc((x + R) / s))


def _ball_2d_point(x1, x2, t, R, atol):
    s = 2.0 * math.sqrt(t)
    c = 1.0 / math.sqrt(4.0 * math.pi * t)

    def integrand(y1):
        w = math.sqrt(max(R * R - y1 * y1, 0.0))
        return c * math.exp(-((x1 - y1) ** 2) / (4.0 * t)) * float(_ball_1d(x2, t, w) if w > 0 else 0.0)

    val, err = integrate.quad(integrand, -R, R, epsabs=atol * 0.1, epsrel=1e-12, limit=200)
    if err > atol:
        raise QuadratureError("2D ball convolution did not converge", err)
    return val


_ZCUT = 9.0


def kernel_convolve(initial: Union[Ball, Callable], t: float, points, dimension: int = 1,
                    atol: float = 1e-10) -> np.ndarray:
    """Whole-space heat evolution e^{tΔ} applied to ``initial`` at ``points``.

    The 1D ball uses the erf closed form; everything else goes through
    adaptive quadrature after the substitution y = x + 2√t z.  Bounded data
    are assumed, so the z-range is cut at |z| = 9 (weight below 1e-35).
    """
    if not t > 0:
        raise ValueError("t must be positive")
    if dimension not in (1, 2):
        raise ValueError("dimension must be 1 or 2")
    pts = np.asarray(points, dtype=float)
    if dimension == 1:
        pts = pts.reshape(-1)
    else:
        pts = pts.reshape(-1, 2)
    if isinstance(initial, Ball):
        R = float(initial.radius)
        if dimension == 1:
            return _ball_1d(pts, t, R)
        return np.array([_ball_2d_point(p[0], p[1], t, R, atol) for p in pts])

    phi = initial
    s = 2.0 * math.sqrt(t)
    out = np.empty(len(pts))
    for i, p in enumerate(pts):
        if dimension == 1:
            val, err = integrate.quad(lambda z: float(phi(p + s * z)) * math.exp(-z * z),
                                      -_ZCUT, _ZCUT, epsabs=atol * 0.1, epsrel=1e-13, limit=400)
            val /= math.sqrt(math.pi)
            err /= math.sqrt(math.pi)
        else:
            val, err = integrate.dblquad(
                lambda z2, z1: float(phi(p[0] + s * z1, p[1] + s * z2)) * math.exp(-z1 * z1 - z2 * z2),
                -_ZCUT, _ZCUT, -_ZCUT, _ZCUT, epsabs=atol * 0.1, epsrel=1e-13)
            val /= math.pi
            err /= math.pi
        if err > atol:
            raise QuadratureError(f"convolution at {p} did not converge", err)
        out[i] = val
    return out


def asymptotic_profile_error(t: float, L: float, dimension: int = 1, n_points: int = 401) -> float:
    """sup over |x| <= L√t of |(4πt)^{N/2} |B|^{-1} u(x,t) − exp(−|x|²/4t)| for u = e^{tΔ}χ_B(0,1)."""
    if not t > 0 or L < 0:
        raise ValueError("need t > 0 and L >= 0")
    rmax = L * math.sqrt(t)
    if dimension == 1:
        x = np.array([0.0]) if rmax == 0 else np.linspace(-rmax, rmax, n_points)
        u = kernel_convolve(Ball(1.0), t, x, 1)
        scaled = math.sqrt(4 * math.pi * t) / 2.0 * u
        return float(np.max(np.abs(scaled - np.exp(-x * x / (4 * t)))))
    # radial symmetry: sup over the disk is a sup over radii
    r = np.array([0.0]) if rmax == 0 else np.linspace(0.0, rmax, max(2, n_points // 4))
    pts = np.stack([r, np.zeros_like(r)], axis=1)
    u = kernel_convolve(Ball(1.0), t, pts, 2)
    scaled = 4 * math.pi * t / math.pi * u
    return float(np.max(np.abs(scaled - np.exp(-r * r / (4 * t)))))


# ---------------------------------------------------------------------------
# finite differences

@dataclass
class HeatState:
    field: Field
    time: float
    diagnostics: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"time": self.time, **self.diagnostics}


def dirichlet_laplacian(domain: Domain):
    """Discrete Laplacian on the interior nodes, zero Dirichlet data elsewhere.

    Returns (A, index) with A the sparse matrix of Δ_h and ``index`` the flat
    grid indices of the unknowns.
    """
    inner = domain.interior_mask
    index = np.flatnonzero(inner.ravel())
    n = len(index)
    h2 = domain.h ** 2
    if domain.dim == 1:
        main = np.full(n, -2.0 / h2)
        off = np.full(n - 1, 1.0 / h2)
        return sp.diags([off, main, off], [-1, 0, 1], format="csc"), index
    nx, ny = domain.shape
    pos = -np.ones(nx * ny, dtype=np.int64)
    pos[index] = np.arange(n)
    ii, jj = np.unravel_index(index, (nx, ny))
    rows = [np.arange(n)]
    cols = [np.arange(n)]
    data = [np.full(n, -4.0 / h2)]
    for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        ni, nj = ii + di, jj + dj
        ok = (ni >= 0) & (ni < nx) & (nj >= 0) & (nj < ny)
        nb = np.full(n, -1, dtype=np.int64)
        nb[ok] = pos[ni[ok] * ny + nj[ok]]
        keep = nb >= 0
        rows.append(np.arange(n)[keep])
        cols.append(nb[keep])
        data.append(np.full(int(keep.sum()), 1.0 / h2))
    A = sp.csc_matrix((np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))
    return A, index


class _Stepper:
    """Crank–Nicolson with cached factorisations keyed by step size."""

    def __init__(self, A):
        self.A = A
        self.I = sp.identity(A.shape[0], format="csc")
        self._lu = {}

    def lhs(self, dt):
        key = float(dt)
        if key not in self._lu:
            try:
                self._lu[key] = spla.splu((self.I - 0.5 * dt * self.A).tocsc())
            except RuntimeError as exc:
                raise ArithmeticError(f"linear solver breakdown at dt={dt}: {exc}") from exc
        return self._lu[key]

    def cn(self, u, dt):
        return self.lhs(dt).solve(u + 0.5 * dt * (self.A @ u))

    def backward_euler_half(self, u, dt):
        # (I - dt/2 A) u_new = u: backward Euler with step dt/2
        return self.lhs(dt).solve(u)


def fd_evolve(domain: Domain, initial: Field, t_targets: Sequence[float], dt: float,
              smoothing_steps: int = 2, min_first_time_factor: float = 10.0) -> list:
    """Crank–Nicolson evolution of the Dirichlet heat equation.

    The first ``smoothing_steps`` steps are each replaced by two backward
    Euler half-steps (Rannacher start-up) to damp the high-frequency content
    of rough data.  Returns one :class:`HeatState` per target time.
    """
    if initial.domain is not domain and initial.domain.to_json() != domain.to_json():
        raise ValueError("initial field lives on a different domain")
    ts = [float(t) for t in t_targets]
    if not ts:
        raise ValueError("no target times")
    if any(t2 <= t1 for t1, t2 in zip(ts, ts[1:])) or ts[0] <= 0:
        raise ValueError(f"t_targets must be positive and strictly increasing, got {ts}")
    if not dt > 0:
        raise ValueError("dt must be positive")
    if ts[0] < min_first_time_factor * dt * (1 - 1e-12):
        raise ValueError(f"first target time {ts[0]} is below {min_first_time_factor:g}*dt = {min_first_time_factor * dt}")

    A, index = dirichlet_laplacian(domain)
    stepper = _Stepper(A)
    u = np.asarray(initial.values, dtype=float).ravel()[index].copy()
    init_max = float(np.max(initial.active_values))
    hN = domain.h ** domain.dim
    states = []
    t_now = 0.0
    done = 0
    log = []
    for target in ts:
        span = target - t_now
        n = max(1, int(round(span / dt)))
        step = dt if abs(n * dt - span) <= 1e-9 * span else span / math.ceil(span / dt)
        if step != dt:
            n = int(math.ceil(span / dt))
        for _ in range(n):
            if done < smoothing_steps:
                u = stepper.backward_euler_half(u, step)
                u = stepper.backward_euler_half(u, step)
                log.append(("be_half", step))
            else:
                u = stepper.cn(u, step)
                log.append(("cn", step))
            done += 1
        t_now = target
        if not np.all(np.isfinite(u)):
            raise ArithmeticError(f"non-finite values at t={target}")
        vals = np.zeros(domain.shape).ravel()
        vals[index] = u
        vals = vals.reshape(domain.shape)
        vals = np.where(domain.mask, vals, np.nan)
        f = Field(domain, vals)
        diag = {
            "mass": float(np.sum(u) * hN),
            "max_value": float(np.max(u)) if len(u) else 0.0,
            "min_value": float(np.min(u)) if len(u) else 0.0,
            "initial_max": init_max,
            "dt": float(dt),
            "h": float(domain.h),
            "scheme": "crank-nicolson/rannacher",
            "steps": done,
            "smoothing_steps": min(done, smoothing_steps),
        }
        states.append(HeatState(f, target, diag))
    states_log = _compress_log(log)
    for s in states:
        s.diagnostics["step_log"] = states_log
    return states


def _compress_log(log):
    out = []
    for kind, step in log:
        if out and out[-1][0] == kind and out[-1][1] == step:
            out[-1][2] += 1
        else:
            out.append([kind, step, 1])
    return out


def mode_growth(eigenvalue: float, step_log) -> float:
    """Discrete decay factor the stepper applies to an eigenmode (−Δ_h φ = λφ)."""
    g = 1.0
    for kind, step, count in step_log:
        z = eigenvalue * step
        if kind == "cn":
            g *= ((1 - z / 2) / (1 + z / 2)) ** count
        else:
            g *= (1.0 / (1 + z / 2)) ** (2 * count)
    return g


# ---------------------------------------------------------------------------
# eigenpair

@dataclass
class EigenPair:
    eigenvalue: float
    eigenfunction: Field
    l2_eigenfunction: Field
    residual: float
    iterations: int

    def to_json(self) -> dict:
        return {"eigenvalue": self.eigenvalue, "residual": self.residual, "iterations": self.iterations}


def first_eigenpair(domain: Domain, tolerance: float = 1e-6, max_iter: int = 1000,
                    polish: int = 200) -> EigenPair:
    """Inverse power iteration for the smallest Dirichlet eigenvalue of −Δ_h.

    Deterministic all-ones start; stops once ‖−Δ_h φ − λφ‖∞ / ‖φ‖∞ <= tolerance.
    """
    A, index = dirichlet_laplacian(domain)
    K = (-A).tocsc()
    lu = spla.splu(K)
    x = np.ones(K.shape[0])
    lam, res = math.nan, math.inf
    for it in range(1, max_iter + 1):
        y = lu.solve(x)
        x = y / np.max(np.abs(y))
        Kx = K @ x
        lam = float(x @ Kx / (x @ x))
        res = float(np.max(np.abs(Kx - lam * x)) / np.max(np.abs(x)))
        if res <= tolerance:
            break
    else:
        raise ConvergenceError(f"inverse iteration stalled at residual {res:.3g} after {max_iter} iterations")
    # The residual bottoms out near ‖K‖·eps long before the vector does, so
    # keep iterating until the iterate itself stops moving.
    for _ in range(polish):
        y = lu.solve(x)
        y = y / np.max(np.abs(y))
        moved = float(np.max(np.abs(y - x)))
        x = y
        it += 1
        if moved <= 4 * np.finfo(float).eps:
            break
    Kx = K @ x
    lam = float(x @ Kx / (x @ x))
    if x.sum() < 0:
        x = -x
    hN = domain.h ** domain.dim
    full = np.zeros(np.prod(domain.shape))
    full[index] = x / np.max(x)
    full = np.where(domain.mask.ravel(), full, np.nan).reshape(domain.shape)
    l2 = full / math.sqrt(np.nansum(full ** 2) * hN)
    return EigenPair(lam, Field(domain, full), Field(domain, l2), res, it)


# ---------------------------------------------------------------------------
# screens

@dataclass
class ScreenResult:
    k: float
    outcome: str
    report: Optional[ConcavityReport] = None
    s: Optional[np.ndarray] = None
    second_differences: Optional[np.ndarray] = None
    field: Optional[Field] = None

    def second_difference_at(self, s: float) -> float:
        i = int(round(s / (self.s[1] - self.s[0])))
        if not 1 <= i < len(self.s) - 1 or abs(self.s[i] - s) > 1e-9:
            raise ValueError(f"s={s} is not an interior node of the screen grid")
        return float(self.second_differences[i - 1])

    def to_json(self) -> dict:
        out = {"k": self.k, "outcome": self.outcome}
        if self.report is not None:
            out["report"] = self.report.to_json()
            i = int(np.argmax(self.second_differences))
            out["max_second_difference"] = float(self.second_differences[i])
            out["max_second_difference_at"] = float(self.s[i + 1])
        return out


def gaussian_screen(F: Transform, k_list: Sequence[float], s_max: float = 3.0, ds: float = 0.01,
                    tolerance: float = 1e-9) -> list:
    """Midpoint concavity of s ↦ F(k exp(−s²)) on [0, s_max], one result per k."""
    dom = interval_domain(0.0, s_max, h=ds)
    s = dom.x
    out = []
    for k in k_list:
        k = float(k)
        if not k > 0:
            raise ValueError("k must be positive")
        vals = k * np.exp(-s * s)
        if not np.all(F.interval.contains(vals)):
            out.append(ScreenResult(k, "range_exit"))
            continue
        f = Field(dom, vals, closed_form=lambda x, k=k: k * np.exp(-np.asarray(x) ** 2), range_interval=F.interval)
        rep = check_f_concave(F, f, tolerance)
        G = F.evaluate(vals).finite
        d2 = G[:-2] - 2.0 * G[1:-1] + G[2:]
        out.append(ScreenResult(k, "certified" if rep.certified else "violated", rep, s, d2, f))
    return out


@dataclass
class EquivalenceReport:
    transform: str
    h_report: Optional[ConcavityReport]
    h_verdict: str
    screens: list
    screen_verdict: str
    agree: bool
    sampled_values: dict
    decreasing_to_minus_infinity: bool
    left_chord_slope: float = math.nan

    @property
    def minus_infinity_by_concavity(self) -> bool:
        """A concave H with positive left chord slope is unbounded below as t -> -inf."""
        return self.h_verdict == "concave" and self.left_chord_slope > 0

    def to_json(self) -> dict:
        return {
            "transform": self.transform,
            "h_verdict": self.h_verdict,
            "screen_verdict": self.screen_verdict,
            "agree": self.agree,
            "screens": [s.to_json() for s in self.screens],
            "sampled_values": self.sampled_values,
            "decreasing_to_minus_infinity": self.decreasing_to_minus_infinity,
            "left_chord_slope": self.left_chord_slope,
            "minus_infinity_by_concavity": self.minus_infinity_by_concavity,
            "h_report": None if self.h_report is None else self.h_report.to_json(),
        }


def lemma42_check(F: Transform, k_list: Sequence[float], t_range=(-6.0, 2.0), grid: float = 0.01,
                  s_max: float = 3.0, tolerance: float = 1e-9,
                  probe_taus: Sequence[float] = (1e-6, 1e-12), threshold: float = -1e3) -> EquivalenceReport:
    """Compare concavity of t ↦ F(e^t) with the Gaussian screen over ``k_list``."""
    t_lo, t_hi = map(float, t_range)
    iv = F.interval
    if math.isfinite(iv.hi):
        cap = math.log(iv.hi) if iv.hi_closed else math.log(iv.hi) - grid
        t_hi = min(t_hi, cap)
    n = int(math.floor((t_hi - t_lo) / grid + 1e-9))
    if n < 2:
        raise ValueError("t_range leaves F's interval")
    dom = interval_domain(t_lo, t_lo + n * grid, n=n + 1)
    hf = Field(dom, np.exp(dom.x), range_interval=None)
    h_rep = check_f_concave(F, hf, tolerance)
    h_verdict = "concave" if h_rep.certified else "violated"

    screens = gaussian_screen(F, k_list, s_max, grid, tolerance)
    tested = [s for s in screens if s.outcome != "range_exit"]
    screen_ok = all(s.outcome == "certified" for s in tested)
    screen_verdict = "concave" if screen_ok else "violated"

    sampled = {}
    for tau in probe_taus:
        if iv.contains(tau):
            sampled[repr(float(tau))] = F(tau).to_json()
    vals = [float(F(t)) for t in probe_taus if iv.contains(t)]
    decreasing = len(vals) >= 1 and all(b < a for a, b in zip(vals, vals[1:])) and all(v < threshold for v in vals)
    Hv = F.evaluate(np.exp(dom.x[:2]))
    slope = math.nan if Hv.any_neg_inf() else float((Hv.finite[1] - Hv.finite[0]) / dom.h)
    return EquivalenceReport(F.spec, h_rep, h_verdict, screens, screen_verdict,
                         (h_verdict == screen_verdict), sampled, decreasing, slope)


def preservation_probe(F: Transform, domain: Domain, initial: Field, t_targets: Sequence[float], dt: float,
                       tolerance: float = 1e-4, value_floor: float = 1e-10, smoothing_steps: int = 2,
                       initial_tolerance: float = 1e-9) -> list:
    """Evolve ``initial`` and check F-concavity at each target time on {u >= value_floor}.

    Returns (time, ConcavityReport, HeatState) triples.
    """
    base = check_f_concave(F, initial, initial_tolerance)
    if not base.certified:
        raise ValueError(f"initial datum is not {F.spec}-concave (min slack {base.min_slack})")
    states = fd_evolve(domain, initial, t_targets, dt, smoothing_steps=smoothing_steps)
    out = []
    for st in states:
        vals = np.nan_to_num(st.field.values, nan=-1.0)
        mask = vals >= value_floor
        rep = check_f_concave(F, st.field, tolerance, node_mask=mask)
        out.append((st.time, rep, st))
    return out


def long_time_distances(domain: Domain, initial: Field, times: Sequence[float], dt: float,
                        eig_tolerance: float = 1e-9, smoothing_steps: int = 2) -> dict:
    """sup-distance between the growth-compensated flow and its limit (φ, initial) φ.

    The growth factor is the stepper's own decay of the first discrete mode,
    so time-stepping error on that mode cancels.
    """
    ep = first_eigenpair(domain, eig_tolerance)
    states = fd_evolve(domain, initial, times, dt, smoothing_steps=smoothing_steps)
    hN = domain.h ** domain.dim
    phi = np.nan_to_num(ep.l2_eigenfunction.values)
    coef = float(np.sum(np.nan_to_num(initial.values) * domain.interior_mask * phi) * hN)
    limit = coef * phi
    dists = []
    for st in states:
        g = mode_growth(ep.eigenvalue, _log_until(st))
        comp = np.nan_to_num(st.field.values) / g
        dists.append(float(np.max(np.abs(comp - limit))))
    return {"eigenvalue": ep.eigenvalue, "coefficient": coef, "times": list(map(float, times)), "distances": dists}


def _log_until(state: HeatState):
    """Step log truncated to the steps taken up to this state."""
    remaining = state.diagnostics["steps"]
    out = []
    for kind, step, count in state.diagnostics["step_log"]:
        if remaining <= 0:
            break
        c = min(count, remaining)
        out.append([kind, step, c])
        remaining -= c
    return out
