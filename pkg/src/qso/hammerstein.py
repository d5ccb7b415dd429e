"""
Positive piecewise-constant solutions of the quadratic Hammerstein equation

    int int K(u, v, t) x(u) x(v) dlam(u) dlam(v) = phi(t).

With ``K(u, v, t) = K[i, j, k]`` for ``(u, v, t)`` in ``B_i x B_j x B_k`` and
``sum_k K[i, j, k] lam[k] = 1``, the measures ``K(u, v, t) dlam(t)`` form a
block-constant transition kernel and the equation becomes ``V mu = mu_phi``
on partition measures. Densities are recovered as ``masses / lam``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .analysis import Status
from .errors import NoConvergence, NotNormalized, NotSurjective, PartitionMismatch
from .measure import (
    Partition,
    PartitionMeasure,
    TransitionKernel,
    check_projective_surjectivity,
    discretize_kernel,
    solve_projective_preimage,
)
from .preimage import least_squares_preimage

TOL_NORMALIZATION = 1e-9


@dataclass(frozen=True, eq=False)
class HammersteinProblem:
    partition: Partition
    K: np.ndarray
    phi: np.ndarray

    def __post_init__(self):
        d = self.partition.size
        K = np.array(self.K, dtype=float)
        phi = np.array(self.phi, dtype=float, ndmin=1)
        if K.shape != (d, d, d):
            raise PartitionMismatch(f"K of shape {K.shape} for {d} cells")
        if phi.shape != (d,):
            raise PartitionMismatch(f"phi of length {phi.size} for {d} cells")
        if np.any(K < 0) or np.any(phi < 0):
            raise ValueError("K and phi must be nonnegative")
        if not np.allclose(K, K.transpose(1, 0, 2), rtol=0, atol=1e-15):
            raise ValueError("K must be symmetric in its first two arguments")
        total = float(phi @ self.partition.weights)
        if abs(total - 1.0) > TOL_NORMALIZATION:
            raise ValueError(f"phi integrates to {total!r}, expected 1")
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "phi", phi)

    @property
    def target_masses(self) -> np.ndarray:
        return self.phi * self.partition.weights


@dataclass(frozen=True)
class DensitySolution:
    density: np.ndarray
    masses: np.ndarray
    residual: float
    certified: bool = True


def kernel_from_K(K, partition: Partition, tol: float = TOL_NORMALIZATION) -> TransitionKernel:
    """Transition kernel with block masses ``K[i, j, k] * lam[k]``.

    Raises
    ------
    NotNormalized
        Some block does not integrate to one.
    """
    K = np.asarray(K, dtype=float)
    m = K * partition.weights[None, None, :]
    sums = m.sum(axis=2)
    bad = np.abs(sums - 1.0) > tol
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise NotNormalized(int(i), int(j), float(sums[i, j]))
    return TransitionKernel(partition, m)


def residual_hammerstein(problem: HammersteinProblem, masses) -> float:
    """L1 defect ``sum_k lam[k] |sum_{ij} K[i,j,k] X_i X_j - phi[k]|`` for cell masses ``X``.

    Accepts a :class:`DensitySolution` in place of `masses`.
    """
    if isinstance(masses, DensitySolution):
        masses = masses.masses
    X = np.asarray(masses, dtype=float)
    lhs = np.einsum("ijk,i,j->k", problem.K, X, X)
    return float(np.sum(problem.partition.weights * np.abs(lhs - problem.phi)))


def weak_form(problem: HammersteinProblem, masses, g) -> tuple[float, float]:
    """Both sides of the equation tested against a piecewise-constant ``g``.

    Returns ``(int g(t) int int K x x, int g phi)``, with the triple integral
    summed cell by cell from the density ``x = masses / lam``.
    """
    lam = problem.partition.weights
    dens = np.asarray(masses, dtype=float) / lam
    g = np.asarray(g, dtype=float)
    d = lam.size
    lhs = 0.0
    for k in range(d):
        inner = 0.0
        for i in range(d):
            for j in range(d):
                inner += problem.K[i, j, k] * dens[i] * lam[i] * dens[j] * lam[j]
        lhs += g[k] * inner * lam[k]
    rhs = float(np.sum(g * problem.phi * lam))
    return lhs, rhs


def solve_hammerstein(
    problem: HammersteinProblem, tol: float = 1e-9, force: bool = False
) -> DensitySolution:
    """Positive piecewise-constant solution of the Hammerstein equation.

    The target masses ``phi * lam`` are pulled back through the kernel's
    operator on partition measures.

    Parameters
    ----------
    tol : float
        Bound on :func:`residual_hammerstein` for a certified solution.
    force : bool
        Without a surjectivity certificate, return a best-effort
        least-squares solution marked ``certified=False`` instead of raising.

    Raises
    ------
    NotSurjective
        The operator is not certified surjective and `force` is off.
    """
    kernel = kernel_from_K(problem.K, problem.partition)
    verdict = check_projective_surjectivity(kernel)
    target = PartitionMeasure(problem.partition, problem.target_masses)
    if verdict.status is Status.SURJECTIVE:
        mu = solve_projective_preimage(kernel, target, tol)
        masses = mu.masses
        certified = True
    elif force:
        masses = least_squares_preimage(discretize_kernel(kernel), target.masses).x
        certified = False
    else:
        raise NotSurjective(f"operator is {verdict.status.value}: {verdict.note}")
    res = residual_hammerstein(problem, masses)
    if certified and res > tol:
        raise NoConvergence("Hammerstein residual exceeds tolerance", res, masses)
    return DensitySolution(
        density=masses / problem.partition.weights,
        masses=masses,
        residual=res,
        certified=certified,
    )
