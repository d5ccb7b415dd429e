"""
Operators on measures and their discretization
==============================================

A transition kernel that is constant on blocks of a partition acts on
measures with constant density on each cell exactly like a finite
quadratic stochastic operator acts on the cell masses.
"""
import numpy as np

from qso import (
    Partition,
    TransitionKernel,
    apply_qso,
    canonical_kernel,
    check_escape_sets,
    check_projective_surjectivity,
    discretize_kernel,
    measure_of_set,
    partition_measure,
    quadrature_discretize,
    qso_measure_of_set,
    solve_projective_preimage,
)

###############################################################################
# The canonical kernel
# --------------------
# ``P(u, v, .) = (e_n + e_m) / 2`` on ``B_n x B_m`` never lets mass escape the
# cells it came from, and discretizes to the identity operator.

part = Partition.from_edges([0.0, 0.5, 1.5, 2.0])
K = canonical_kernel(part)
print(discretize_kernel(K).to_dense()[0])
mu = partition_measure(part, [0.2, 0.5, 0.3])
print("V(mu) masses:", apply_qso(K, mu).masses)
print("escape cells:", check_escape_sets(K))

###############################################################################
# Measure of a set
# ----------------
# A set is described by its overlap with each cell; the direct double sum and
# the discretized tensor agree.

rng = np.random.default_rng(0)
blocks = np.empty((3, 3, 3))
for i in range(3):
    for j in range(i, 3):
        blocks[i, j] = blocks[j, i] = rng.dirichlet(np.ones(3))
kernel = TransitionKernel(part, blocks)
A = np.array([0.25, 0.0, 0.5])
direct = qso_measure_of_set(kernel, mu, A)
via_tensor = measure_of_set(apply_qso(kernel, mu), A)
print(f"direct {direct:.15f}  via tensor {via_tensor:.15f}")

###############################################################################
# Pulling back a measure
# ----------------------

target = partition_measure(part, [0.1, 0.6, 0.3])
print(check_projective_surjectivity(K))
print("preimage masses:", solve_projective_preimage(K, target).masses)

###############################################################################
# Non-constant kernels
# --------------------
# A kernel that sends mass ``uv`` to the first cell is averaged over blocks by
# midpoint quadrature or by Monte Carlo.

part2 = Partition.from_edges([0.0, 0.5, 1.0])


def uv_kernel(u, v):
    return np.stack([u * v, 1.0 - u * v], axis=-1)


w = np.outer(part2.weights, part2.weights)
for label, res in [
    ("midpoint", quadrature_discretize(uv_kernel, part2, n_nodes=64)),
    ("monte carlo", quadrature_discretize(uv_kernel, part2, n_nodes=0, n_samples=25_000)),
]:
    print(f"{label:12s} int int uv = {np.sum(w * res.raw[:, :, 0]):.6f}  (exact 0.25)")
