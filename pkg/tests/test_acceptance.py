"""Acceptance criteria, one test per criterion, each at its stated tolerance.

Run with ``pytest tests/test_acceptance.py -v``; the terminal summary lists
one PASS/FAIL line per criterion.
"""
import math

import numpy as np
import pytest

from fconcavity import harness
from fconcavity.concavity import check_f_concave, slack
from fconcavity.domains import interval_domain, unit_square
from fconcavity.fields import Field
from fconcavity.heatflow import (asymptotic_profile_error, fd_evolve, first_eigenpair, gaussian_screen,
                                 lemma42_check, long_time_distances, preservation_probe)
from fconcavity.probes import closure_probe, sample_f_concave, thm12_counterexample
from fconcavity.transforms import affine, make_log_power, make_power, make_power_star


def test_c01_alpha_threshold_of_gaussian(acceptance):
    d = interval_domain(-3.0, 3.0, h=0.01)
    f = Field.from_function(d, lambda x: np.exp(-x * x))
    verdicts = {a: check_f_concave(make_log_power(a), f, 1e-9) for a in (0.5, 0.6, 1.0, 0.45, 0.4)}
    ok = all(verdicts[a].certified for a in (0.5, 0.6, 1.0))
    ok &= all(verdicts[a].violated and verdicts[a].witnesses for a in (0.45, 0.4))
    # closed form: L_a(e^{-x^2}) = -(|x|^{2a} - 1)/a, which vanishes at the midpoint x = 1
    oracle = (0.5 * (0.5 ** 0.9 - 1) + 0.5 * (1.5 ** 0.9 - 1)) / 0.45
    s = float(slack(make_log_power(0.45), f, 0.5, 1.5))
    ok &= abs(s - (-0.0263)) <= 1e-3 and abs(s - oracle) <= 1e-12
    acceptance(1, ok, f"alpha=0.45 slack at (0.5,1.5,1/2) = {s:.6f} (closed form {oracle:.6f})")


def test_c02_slack_scaling_identities(acceptance):
    d = interval_domain(-1.0, 1.0, h=0.05)
    worst = 0.0
    for p in (-1.0, 0.5, 2.0):
        F = make_power(p)
        for s in range(12):
            f = sample_f_concave(F, d, s, n_kinks=s % 4, curvature=4.0)
            base = check_f_concave(F, f).min_slack.value
            for lam in (0.5, 2.0):
                got = check_f_concave(F, f.scaled(lam)).min_slack.value
                worst = max(worst, abs(got - lam ** p * base) / abs(lam ** p * base))
    for a in (0.5, 1.0):
        L = make_log_power(a)
        for s in range(12):
            f = sample_f_concave(L, d, s, n_kinks=s % 4, curvature=4.0)
            base = check_f_concave(L, f).min_slack.value
            for r in (0.5, 2.0):
                got = check_f_concave(L, f.power(r)).min_slack.value
                worst = max(worst, abs(got - r ** a * base) / abs(r ** a * base))
    acceptance(2, worst <= 1e-10, f"worst relative deviation {worst:.2e} (limit 1e-10)")


def test_c03_heat_flow_preservation(acceptance):
    d = interval_domain(0.0, 1.0, h=1 / 400)
    chi = Field(d, ((d.x > 0.45) & (d.x < 0.55)).astype(float))
    worst = math.inf
    ok = True
    for F in (make_power_star(0), make_log_power(0.5), make_log_power(0.75), make_log_power(1.0)):
        for t, rep, _ in preservation_probe(F, d, chi, [1e-3, 1e-2, 1e-1], 1e-5, tolerance=1e-4,
                                            value_floor=1e-10):
            ok &= rep.certified
            worst = min(worst, rep.min_slack.value)
    acceptance(3, ok, f"all 12 (F, t) pairs certified; smallest min slack {worst:.3e} (tolerance 1e-4)")


def test_c04_gaussian_screen(acceptance):
    ok = all(r.outcome == "certified" for r in gaussian_screen(make_power(0), [0.5, 1.0, 2.0]))
    ok &= all(r.outcome == "certified" for r in gaussian_screen(make_log_power(0.5), [0.5, 1.0]))
    r = gaussian_screen(make_power(1), [1.0], ds=0.5)[0]
    d2 = r.second_difference_at(1.0)
    oracle = math.exp(-0.25) - 2 * math.exp(-1) + math.exp(-2.25)
    ok &= r.outcome == "violated" and abs(d2 - 0.148) <= 1e-3 and abs(d2 - oracle) <= 1e-12
    acceptance(4, ok, f"Phi_1 second difference at s=1 (h=0.5): {d2:.6f}")


def test_c05_lemma42_equivalence(acceptance):
    agree = True
    limit_ok = True
    notes = []
    for p in (0, 1, 2):
        F = make_power(p)
        rep = lemma42_check(F, [0.5, 1.0, 2.0, 8.0])
        agree &= rep.agree
        if rep.screen_verdict == "concave":
            vals = [F(1e-6).value, F(1e-12).value]
            below = vals[1] < vals[0] and all(v < -1e3 for v in vals)
            limit_ok &= below
            notes.append(f"Phi_{p}: F(1e-6)={vals[0]:.2f}, F(1e-12)={vals[1]:.2f}, "
                         f"concavity proxy={rep.minus_infinity_by_concavity}")
    acceptance(5, agree and limit_ok,
               f"sides agree={agree}; below -1e3 at both taus={limit_ok}; " + "; ".join(notes))


def test_c06_theorem12_machinery(acceptance):
    e = math.e
    res = thm12_counterexample(make_power(0), make_power(1), 1.0, e, 2.0)
    ok = res.report.violated and res.reverified
    aff = affine(make_power(0), 3.0, -1.0)
    certs = [thm12_counterexample(make_power(0), aff, 1.0, e, c).report.certified for c in (1.5, 2.0, 2.5)]
    ok &= all(certs)
    acceptance(6, ok, f"violated with reverified slack {res.reverified_slack:.4f}; affine case certified {certs}")


def test_c07_closure_probes(acceptance):
    d = interval_domain(-1.0, 1.0, n=101)
    violations = 0
    for p in (-1.0, 0.0, 0.5, 2.0):
        F = make_power(p)
        for s in range(50):
            f = sample_f_concave(F, d, 1000 + s, n_kinks=s % 4)
            violations += sum(o.outcome == "violated" for o in closure_probe(F, f, "scalar", [0.9, 1.1]))
    dw = interval_domain(-2.0, 2.0, n=401)
    f = Field.from_function(dw, lambda x: np.exp(-(1 + np.abs(x)) ** 2))
    L = make_log_power(0.5)
    lam = math.exp(0.5)
    o = closure_probe(L, f, "scalar", [lam])[0]
    s = float(slack(L, f.scaled(lam), 0.5, 1.5))
    ok = violations == 0 and o.outcome == "violated" and abs(s - (-0.0208)) <= 1e-3
    acceptance(7, ok, f"{violations} violations over 400 power probes; L_0.5 slack at (0.5,1.5) = {s:.5f}")


def test_c08_eigenpair_and_long_time(acceptance):
    e1 = first_eigenpair(interval_domain(0.0, 1.0, h=1e-3))
    e2 = first_eigenpair(unit_square(1 / 200))
    r1 = e1.eigenvalue / math.pi ** 2 - 1
    r2 = e2.eigenvalue / (2 * math.pi ** 2) - 1
    L = 8.0
    d = interval_domain(0.0, L, h=0.02)
    init = Field(d, ((d.x > L / 8) & (d.x < 3 * L / 8)).astype(float))
    dist = long_time_distances(d, init, [1.0, 2.0, 3.0], 0.01)["distances"]
    conj = harness.run("CONJ5")
    ok = abs(r1) <= 5e-3 and abs(r2) <= 5e-3
    ok &= all(b < a for a, b in zip(dist, dist[1:]))
    ok &= conj.verdict == "report_only" and "halflog_min_slack" in conj.metrics
    acceptance(8, ok, f"rel. errors {r1:.1e}, {r2:.1e}; distances {[f'{x:.3g}' for x in dist]}; "
                      f"CONJ5 min L_1/2 slack {conj.metrics['halflog_min_slack']}")


def test_c09_halflog_limit(acceptance):
    rep = harness.halflog_limit_check([math.exp(100.0), math.exp(400.0)], (0.1, 10.0), 0.01)
    e100 = rep.metrics["sup_error[log_k=100]"]
    e400 = rep.metrics["sup_error[log_k=400]"]
    ok = e100 <= 0.02 and abs(e100 / e400 / 4 - 1) <= 0.2
    acceptance(9, ok, f"sup errors {e100:.5f} and {e400:.5f}, ratio {e100 / e400:.3f}")


def test_c10_profile_asymptotics(acceptance):
    e100 = asymptotic_profile_error(100.0, 2.0, 1)
    e400 = asymptotic_profile_error(400.0, 2.0, 1)
    acceptance(10, e100 <= 0.01 and e400 < e100, f"errors {e100:.3e} (t=100), {e400:.3e} (t=400)")


def test_c11_convergence_and_determinism(acceptance):
    errs = []
    for h, dt in ((1 / 200, 1e-4), (1 / 400, 5e-5)):
        d = interval_domain(0.0, 1.0, h=h)
        f = Field.from_function(d, lambda x: np.sin(np.pi * x))
        st = fd_evolve(d, f, [0.01], dt)[0]
        errs.append(float(np.max(np.abs(st.field.values - math.exp(-math.pi ** 2 * 0.01) * np.sin(np.pi * d.x)))))
    ratio = errs[0] / errs[1]
    same = all(harness.run(eid, seed=7).dumps(False) == harness.run(eid, seed=7).dumps(False)
               for eid in harness.REGISTRY)
    acceptance(11, ratio >= 3.5 and same, f"error ratio {ratio:.3f}; byte-identical reports: {same}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
