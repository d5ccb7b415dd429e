"""
Solving V(x) = y
================

For a certified surjective operator, preimages are found by reducing to a
Volterra operator on the certificate sequence and running a damped Newton
iteration that stays on the simplex.
"""
import numpy as np

from qso import evaluate_dqso, least_squares_preimage, solve_preimage
from qso.generators import constant_operator, random_pi_volterra, volterra_from_skew

###############################################################################
# A two-state example
# -------------------
# With ``a[0, 1] = 1`` the operator is ``(x_0 (1 + x_1), x_1 (1 - x_0))``,
# which maps ``(1/2, 1/2)`` to ``(3/4, 1/4)``.

V = volterra_from_skew(np.array([[0.0, 1.0], [-1.0, 0.0]]))
sol = solve_preimage(V, [0.75, 0.25])
print(f"x = {sol.x}, residual = {sol.residual:.1e}, {sol.iterations} Newton steps")

###############################################################################
# Larger operators
# ----------------
# Random targets on a relabelled Volterra operator in 30 dimensions.

rng = np.random.default_rng(0)
P, _ = random_pi_volterra(30, seed=rng)
for _ in range(3):
    y = rng.dirichlet(np.ones(30))
    sol = solve_preimage(P, y)
    print(f"residual {sol.residual:.1e} after {sol.iterations} steps ({sol.method})")

###############################################################################
# Without a certificate
# ---------------------
# The best-effort solver reports how far the image stays from the target and
# marks the result as uncertified.

C = constant_operator([0.2, 0.3, 0.5])
far = least_squares_preimage(C, [1.0, 0.0, 0.0])
print(f"best residual {far.residual:.3f}, certified={far.certified}")
print("image of the minimizer:", evaluate_dqso(C, far.x))
