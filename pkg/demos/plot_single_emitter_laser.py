"""
=======================
The one-emitter laser
=======================

A single cavity with one incoherently pumped two-level emitter. The rate
equations give the photon number in closed form; the full master equation
adds the photon statistics. Lasing shows up as ``n_sigma ~ 1/2``,
``n_a ~ P / (2 gamma_a)`` and ``g2 = 1``.
"""
import numpy as np
import matplotlib
matplotlib.use("Agg")
from matplotlib import pyplot as plt

from cavity_array import ModelParams, closed_form_single_site, lasing_benchmarks, solve, solve_oracle

# rates in units of g
pumps = np.logspace(-2, 3, 200)
n_a = [solve(ModelParams(gamma_a=0.1, P_sigma=P)).n_a for P in pumps]
n_cf = [closed_form_single_site(ModelParams(gamma_a=0.1, P_sigma=P)).n_a for P in pumps]
print("largest gap between bisection and closed form:",
      max(abs(a - b) / b for a, b in zip(n_a, n_cf)))

bench = lasing_benchmarks(ModelParams(gamma_a=0.1, P_sigma=5.0))
print(f"at P = 5g: n_a = {solve(ModelParams(gamma_a=0.1, P_sigma=5.0)).n_a:.2f}, "
      f"ideal {bench.n_a_L:g}; quenching above kappa_sigma = {bench.kappa_sigma:g}g")

# photon statistics from the exact steady state, on a coarser pump grid
g2_pumps = [0.05, 0.2, 0.5, 1, 2, 5, 10, 20, 40]
g2 = [solve_oracle(ModelParams(gamma_a=0.5, P_sigma=P)).g2[0] for P in g2_pumps]
for P, v in zip(g2_pumps, g2):
    print(f"gamma_a = 0.5g, P = {P:>5}g: g2 = {v:.3f}")

fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(5, 6))
ax1.loglog(pumps, n_a)
ax1.set_xlabel("P_sigma [g]")
ax1.set_ylabel("n_a")
ax2.semilogx(g2_pumps, g2, "o-")
ax2.axhline(1, color="gray", lw=0.7)
ax2.set_xlabel("P_sigma [g]")
ax2.set_ylabel("g2")
fig.tight_layout()
fig.savefig("single_emitter_laser.svg")
