"""Where does the Gaussian stop being alpha-log-concave?

Sweeps alpha across the threshold 1/2 on a fine grid and prints the worst
midpoint slack together with the closed form at the witness triple.
"""
import numpy as np

from fconcavity.concavity import check_f_concave, slack
from fconcavity.domains import interval_domain
from fconcavity.fields import Field
from fconcavity.transforms import make_log_power

d = interval_domain(-3.0, 3.0, h=0.01)
f = Field.from_function(d, lambda x: np.exp(-x * x))

print(f"{'alpha':>6}  {'verdict':>22}  {'min slack':>12}")
for alpha in (0.35, 0.4, 0.45, 0.49, 0.5, 0.6, 1.0):
    rep = check_f_concave(make_log_power(alpha), f)
    print(f"{alpha:6.2f}  {rep.verdict:>22}  {float(rep.min_slack):12.3e}")

# L_a(e^{-x^2}) = -(|x|^{2a} - 1)/a, so the slack at (0.5, 1.5) is explicit
a = 0.45
closed = (0.5 * (0.5 ** (2 * a) - 1) + 0.5 * (1.5 ** (2 * a) - 1)) / a
print("slack at (0.5, 1.5):", float(slack(make_log_power(a), f, 0.5, 1.5)), "closed form:", closed)
