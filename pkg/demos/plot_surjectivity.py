"""
Classifying quadratic stochastic operators
==========================================

A quadratic stochastic operator on the simplex is fixed by a hereditary
tensor ``P[i, j, k]``. This script builds a few small operators and asks
which of them are onto the simplex, which preserve orthogonality, and what
certificates back each verdict.
"""
import numpy as np

from qso import (
    check_orthogonality_preserving,
    check_surjectivity,
    evaluate_dqso,
    extract_fixed_index_sets,
    find_pi_volterra_permutation,
    volterra_skew_form,
)
from qso.generators import constant_operator, random_pi_volterra, random_stochastic, volterra_from_skew

###############################################################################
# A Volterra operator
# -------------------
# Volterra operators only redistribute mass inside the pair that produced it,
# so they take the form ``x_k (1 + sum_i a[k, i] x_i)`` with ``a`` skew.

a = np.array([[0.0, 1.0, -0.5], [-1.0, 0.0, 0.25], [0.5, -0.25, 0.0]])
V = volterra_from_skew(a)
x = np.array([0.2, 0.5, 0.3])
print("V(x) =", evaluate_dqso(V, x))
print("recovered skew form:\n", volterra_skew_form(V))

###############################################################################
# Surjectivity certificates
# -------------------------
# The certificate is a sequence ``j`` with ``P[j_n, j_n, n] = 1`` whose pairs
# never leak mass outside ``{n, m}``.

print(check_surjectivity(V))

P, perm = random_pi_volterra(5, seed=0)
print("planted permutation:", perm.tolist())
print("found permutation:  ", find_pi_volterra_permutation(P))
print(check_surjectivity(P))

###############################################################################
# Operators that are not onto
# ---------------------------
# A constant operator has empty fixed index sets; a generic random tensor
# also fails, and the orthogonality check exhibits a witness pair.

C = constant_operator([0.2, 0.3, 0.5])
print("fixed index sets:", extract_fixed_index_sets(C)[0])
print(check_surjectivity(C))

R = random_stochastic(3, seed=1)
op = check_orthogonality_preserving(R)
print(op.status, "witness:", [w.tolist() for w in op.witness])
print(check_surjectivity(R, finite_total=True))
