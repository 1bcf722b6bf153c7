"""Separate log-concavity from concavity with the min{x, 1} construction.

Both transforms are normalised to 0 at a and 1 at b.  The field
G1(min(x, 1)) is F1-concave by construction and fails F2-concavity because
the normalised transforms differ at c.
"""
import math

from fconcavity.probes import thm12_counterexample
from fconcavity.transforms import affine, make_power

res = thm12_counterexample(make_power(0), make_power(1), 1.0, math.e, 2.0)
print("verdict:", res.verdict, "(predicted", res.predicted + ")")
print("normalised values at c:", res.normalized_values)
print("worst slack:", float(res.report.min_slack), "re-verified at 40 digits:", res.reverified_slack)

same = thm12_counterexample(make_power(0), affine(make_power(0), 3.0, -1.0), 1.0, math.e, 2.0)
print("affinely related pair:", same.verdict)
