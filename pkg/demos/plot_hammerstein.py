"""
Positive solutions of a quadratic Hammerstein equation
======================================================

We look for a density ``x`` with

    int int K(u, v, t) x(u) x(v) du dv = phi(t)

when ``K`` and ``phi`` are constant on the cells of a partition. The
equation becomes a preimage problem for the operator on cell masses.
"""
import numpy as np

from qso import HammersteinProblem, Partition, residual_hammerstein, solve_hammerstein, weak_form
from qso.generators import random_pi_volterra

###############################################################################
# Setting up a problem
# --------------------
# Kernel densities come from a surjective tensor divided by the cell lengths,
# so that every ``K(u, v, .)`` integrates to one.

rng = np.random.default_rng(3)
part = Partition.from_edges(np.cumsum(np.r_[0.0, rng.uniform(0.2, 1.0, 5)]))
P, _ = random_pi_volterra(5, seed=rng)
K = P.to_dense() / part.weights[None, None, :]
phi = rng.dirichlet(np.ones(5)) / part.weights
problem = HammersteinProblem(part, K, phi)

###############################################################################
# Solving
# -------

sol = solve_hammerstein(problem)
print("density x:", np.round(sol.density, 6))
print(f"residual {sol.residual:.1e}, total mass {sol.density @ part.weights:.15f}")

###############################################################################
# Checking against test functions
# -------------------------------
# Integrating both sides against the indicator of each cell recovers the
# residual independently of the solver.

defect = sum(abs(np.subtract(*weak_form(problem, sol.masses, np.eye(5)[k]))) for k in range(5))
print(f"weak-form defect {defect:.1e}, residual_hammerstein {residual_hammerstein(problem, sol):.1e}")
