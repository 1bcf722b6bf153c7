"""Evolve an indicator by the Dirichlet heat flow and watch its concavity.

Log-concavity and alpha-log-concavity for alpha in [1/2, 1] survive; plain
concavity (F = Phi_1) is reported for contrast.
"""
import numpy as np

from fconcavity.concavity import check_f_concave
from fconcavity.domains import interval_domain
from fconcavity.fields import Field
from fconcavity.heatflow import fd_evolve
from fconcavity.transforms import make_log_power, make_power, make_power_star

d = interval_domain(0.0, 1.0, h=1 / 400)
chi = Field(d, ((d.x > 0.45) & (d.x < 0.55)).astype(float))
times = [1e-3, 1e-2, 1e-1]
states = fd_evolve(d, chi, times, 1e-5)

for st in states:
    u = st.field
    keep = (u.values >= 1e-10)
    print(f"t={st.time:g}  mass={st.diagnostics['mass']:.4e}  max={st.diagnostics['max_value']:.4f}")
    for F in (make_power_star(0), make_log_power(0.5), make_log_power(1.0), make_power(1)):
        rep = check_f_concave(F, u, 1e-4, node_mask=keep)
        print(f"    {F.spec:<22} {rep.verdict:<22} min slack {float(rep.min_slack): .3e}")
