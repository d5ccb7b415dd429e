"""
Partition measures and block-constant quadratic stochastic operators.

A partition ``B_1, ..., B_d`` of a measure space with cell weights
``lam[k] = lambda(B_k)`` identifies the simplex with the measures of constant
density ``x[k] / lam[k]`` on each cell. A measurable set ``A`` enters every
formula only through its overlaps ``lambda(A & B_k)``, so sets are
represented by overlap vectors.

A transition kernel that is constant on each block ``B_i x B_j`` and whose
measures ``P(u, v, .)`` are themselves partition measures maps partition
measures to partition measures; on masses it acts as the DQSO with
hereditary coefficients equal to the block values.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import sympy

from .analysis import TOL, SurjectivityVerdict, check_surjectivity
from .errors import (
    GeometryMissing,
    NoCertificate,
    NotProbability,
    OverlapOutOfRange,
    PartitionMismatch,
)
from .preimage import solve_preimage
from .simplex import TOL_SIMPLEX, HereditaryTensor, evaluate_dqso


@dataclass(frozen=True, eq=False)
class Partition:
    """Cells with positive finite weights, optionally intervals ``[l, r)``."""

    weights: np.ndarray
    intervals: np.ndarray | None = None

    def __post_init__(self):
        w = np.array(self.weights, dtype=float, ndmin=1)
        if w.ndim != 1 or w.size < 1:
            raise ValueError("weights must be a non-empty 1-d array")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise ValueError("cell weights must be positive and finite")
        object.__setattr__(self, "weights", w)
        if self.intervals is not None:
            iv = np.array(self.intervals, dtype=float)
            if iv.shape != (w.size, 2):
                raise ValueError(f"intervals must have shape ({w.size}, 2)")
            if not np.allclose(iv[:, 1] - iv[:, 0], w, rtol=1e-12, atol=1e-12):
                raise ValueError("interval lengths must equal the cell weights")
            s = iv[np.argsort(iv[:, 0])]
            if np.any(s[1:, 0] < s[:-1, 1] - 1e-12):
                raise ValueError("intervals overlap")
            object.__setattr__(self, "intervals", iv)

    @classmethod
    def from_edges(cls, edges) -> "Partition":
        """Consecutive intervals ``[edges[k], edges[k+1])``."""
        e = np.asarray(edges, dtype=float)
        iv = np.column_stack([e[:-1], e[1:]])
        return cls(weights=np.diff(e), intervals=iv)

    @property
    def size(self) -> int:
        return int(self.weights.size)

    def same_as(self, other: "Partition") -> bool:
        return self is other or (
            self.size == other.size and np.array_equal(self.weights, other.weights)
        )


@dataclass(frozen=True, eq=False)
class PartitionMeasure:
    """Probability measure with density ``masses[k] / weights[k]`` on cell ``k``."""

    partition: Partition
    masses: np.ndarray

    @property
    def density(self) -> np.ndarray:
        return self.masses / self.partition.weights


def partition_measure(partition: Partition, x, tol: float = TOL_SIMPLEX) -> PartitionMeasure:
    """The measure with cell masses `x`; it is a probability iff `x` is on the simplex.

    Raises
    ------
    NotProbability
        ``sum(x)`` differs from 1 by more than `tol`.
    """
    x = np.array(x, dtype=float, ndmin=1)
    if x.shape != (partition.size,):
        raise PartitionMismatch(f"{x.size} masses for {partition.size} cells")
    if np.any(x < 0):
        raise ValueError("masses must be nonnegative")
    if abs(x.sum() - 1.0) > tol:
        raise NotProbability(float(x.sum()))
    return PartitionMeasure(partition, x)


def measure_of_set(mu: PartitionMeasure, overlaps, tol: float = 1e-12) -> float:
    """``mu(A) = sum_k masses[k] / weights[k] * lambda(A & B_k)``."""
    lam = mu.partition.weights
    ov = np.asarray(overlaps, dtype=float)
    if ov.shape != lam.shape:
        raise PartitionMismatch(f"{ov.size} overlaps for {lam.size} cells")
    if np.any(ov < -tol) or np.any(ov > lam * (1 + tol) + tol):
        raise OverlapOutOfRange("overlaps must satisfy 0 <= lambda(A & B_k) <= lambda(B_k)")
    return float(np.sum(mu.masses / lam * np.clip(ov, 0.0, lam)))


@dataclass(frozen=True, eq=False)
class TransitionKernel:
    """Block-constant kernel: ``P(u, v, .)`` is the partition measure with
    masses ``blocks[i, j]`` for ``(u, v)`` in ``B_i x B_j``."""

    partition: Partition
    blocks: np.ndarray

    def __post_init__(self):
        b = np.array(self.blocks, dtype=float)
        d = self.partition.size
        if b.shape != (d, d, d):
            raise PartitionMismatch(f"blocks of shape {b.shape} for {d} cells")
        if np.any(b < 0) or not np.all(np.isfinite(b)):
            raise ValueError("block measures must be finite and nonnegative")
        if not np.allclose(b, b.transpose(1, 0, 2), rtol=0, atol=1e-15):
            raise ValueError("kernel must be symmetric: blocks[i, j] == blocks[j, i]")
        sums = b.sum(axis=2)
        if np.any(np.abs(sums - 1.0) > TOL_SIMPLEX):
            i, j = np.argwhere(np.abs(sums - 1.0) > TOL_SIMPLEX)[0]
            raise ValueError(f"block ({i}, {j}) is not a probability (mass {sums[i, j]!r})")
        object.__setattr__(self, "blocks", b)

    @classmethod
    def from_pairs(cls, partition: Partition, pairs: dict) -> "TransitionKernel":
        """Build from ``{(i, j): masses}`` covering every unordered pair once."""
        d = partition.size
        b = np.full((d, d, d), np.nan)
        for (i, j), m in pairs.items():
            b[i, j] = b[j, i] = m
        missing = np.argwhere(np.isnan(b[:, :, 0]))
        if missing.size:
            i, j = sorted(missing[0])
            raise ValueError(f"kernel block ({i}, {j}) not specified")
        return cls(partition, b)

    @property
    def size(self) -> int:
        return self.partition.size


def discretize_kernel(kernel: TransitionKernel, tol_stoch: float = 1e-12) -> HereditaryTensor:
    """Hereditary coefficients ``P[i, j, k]`` of the operator on cell masses.

    Each coefficient is the average of ``P(u, v, B_k)`` over the block
    ``B_i x B_j``. The integrand is constant on the block, so the average is
    the block value itself, copied without arithmetic.
    """
    return HereditaryTensor.from_dense(kernel.blocks, tol_stoch)


def apply_qso(kernel: TransitionKernel, mu: PartitionMeasure) -> PartitionMeasure:
    """Image of `mu` under the kernel's quadratic operator; again a partition measure."""
    if not kernel.partition.same_as(mu.partition):
        raise PartitionMismatch("kernel and measure live on different partitions")
    y = evaluate_dqso(discretize_kernel(kernel), mu.masses)
    return PartitionMeasure(mu.partition, y)


def qso_measure_of_set(kernel: TransitionKernel, mu: PartitionMeasure, overlaps) -> float:
    """``(V mu)(A)`` by direct summation over blocks.

    ``P(u, v, A) = sum_k lambda(A & B_k) / lambda(B_k) * P(u, v, B_k)`` inside a
    block, integrated against the product of the densities of `mu`.
    """
    lam = kernel.partition.weights
    dens = mu.density
    ov = np.asarray(overlaps, dtype=float)
    total = 0.0
    d = kernel.size
    for i in range(d):
        for j in range(d):
            p_uv_A = float(np.sum(ov / lam * kernel.blocks[i, j]))
            total += dens[i] * dens[j] * lam[i] * lam[j] * p_uv_A
    return total


def consistency_check(kernel: TransitionKernel, x) -> float:
    """``max_k |(V mu_x)(B_k) - V_B(x)[k]|``.

    The left side sums the kernel against ``mu_x x mu_x`` block by block; the
    right side evaluates the discretized tensor.
    """
    mu = PartitionMeasure(kernel.partition, np.asarray(x, dtype=float))
    lam = kernel.partition.weights
    direct = np.array(
        [qso_measure_of_set(kernel, mu, np.where(np.arange(kernel.size) == k, lam, 0.0))
         for k in range(kernel.size)]
    )
    via_tensor = evaluate_dqso(discretize_kernel(kernel), mu.masses)
    return float(np.max(np.abs(direct - via_tensor)))


def canonical_kernel(partition: Partition) -> TransitionKernel:
    """Kernel with ``P(u, v, A) = lambda(A & B_n) / (2 lambda(B_n))
    + lambda(A & B_m) / (2 lambda(B_m))`` on ``B_n x B_m``.

    Its block measures are ``(e_n + e_m) / 2`` and the induced DQSO is the
    identity on the simplex.
    """
    lam = partition.weights
    d = partition.size
    # overlap[k, n] = lambda(B_k & B_n)
    overlap = np.diag(lam)
    b = np.empty((d, d, d))
    for n in range(d):
        for m in range(d):
            b[n, m] = overlap[:, n] / (2 * lam[n]) + overlap[:, m] / (2 * lam[m])
    return TransitionKernel(partition, b)


def check_escape_sets(kernel: TransitionKernel, tol: float = TOL) -> list[int]:
    """Cells ``k`` charged by some block ``B_i x B_j`` with ``k`` outside ``{i, j}``."""
    d = kernel.size
    i, j = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    flagged = []
    for k in range(d):
        outside = (i != k) & (j != k)
        if np.any(kernel.blocks[:, :, k][outside] > tol):
            flagged.append(k)
    return flagged


def escape_free_kernel(partition: Partition, label_symmetric: bool = True) -> TransitionKernel:
    """The unique kernel with empty escape sets, if the constraints force one.

    For every block ``n <= m`` the unknowns are the masses
    ``blocks[n, m, k]``, constrained to form a probability with no mass
    outside ``{n, m}`` and, when `label_symmetric`, equal mass on ``B_n`` and
    ``B_m``. Each block's linear system is solved in exact rational
    arithmetic.

    Raises
    ------
    ValueError
        Some block is not determined. This is the case for
        ``label_symmetric=False``: every Volterra kernel has empty escape sets.
    """
    d = partition.size
    b = np.empty((d, d, d))
    for n in range(d):
        for m in range(n, d):
            rows = [[1] * d + [1]]
            for k in range(d):
                if k != n and k != m:
                    rows.append([int(c == k) for c in range(d)] + [0])
            if label_symmetric and n != m:
                rows.append([int(c == n) - int(c == m) for c in range(d)] + [0])
            aug = sympy.Matrix(rows)
            if aug[:, :d].rank() < d:
                raise ValueError(f"block ({n}, {m}) is not determined by the constraints")
            sol = aug[:, :d].gauss_jordan_solve(aug[:, d])[0]
            b[n, m] = b[m, n] = [float(v) for v in sol]
    return TransitionKernel(partition, b)


def check_projective_surjectivity(
    kernel: TransitionKernel, tol: float = TOL, finite_total: bool = True
) -> SurjectivityVerdict:
    """Surjectivity of the kernel's operator on the partition measures.

    Delegates to :func:`qso.analysis.check_surjectivity` on the discretized
    tensor. A finite partition covers the whole space, so the discretized
    operator is complete (`finite_total`) unless the caller says otherwise.
    """
    return check_surjectivity(discretize_kernel(kernel), tol, finite_total=finite_total)


def solve_projective_preimage(
    kernel: TransitionKernel, target: PartitionMeasure, tol: float = 1e-10
) -> PartitionMeasure:
    """Partition measure `mu` with ``V mu = target``.

    Raises
    ------
    NoCertificate
        The kernel is not certified projectively surjective.
    """
    if not kernel.partition.same_as(target.partition):
        raise PartitionMismatch("kernel and target live on different partitions")
    verdict = check_projective_surjectivity(kernel)
    if verdict.sequence is None:
        raise NoCertificate(f"kernel is {verdict.status.value}: {verdict.note}")
    sol = solve_preimage(discretize_kernel(kernel), target.masses, tol, sequence=verdict.sequence)
    mu = PartitionMeasure(kernel.partition, sol.x)
    err = np.abs(apply_qso(kernel, mu).masses - target.masses).sum()
    if err > tol:
        raise NoCertificate(f"image misses the target by {err:.3e}")
    return mu


@dataclass(frozen=True)
class QuadratureResult:
    """Discretized tensor from a sampled kernel.

    ``raw`` holds the block averages before symmetrization and
    renormalization, ``deltas[i, j]`` the amount each row sum was off by one,
    and ``stderr`` the Monte Carlo standard errors (zeros for the midpoint
    rule).
    """

    tensor: HereditaryTensor
    raw: np.ndarray
    deltas: np.ndarray
    stderr: np.ndarray


def quadrature_discretize(
    kernel_fn: Callable[[np.ndarray, np.ndarray], np.ndarray],
    partition: Partition,
    n_nodes: int = 16,
    rng_seed: int | None = 0,
    n_samples: int = 100_000,
) -> QuadratureResult:
    """Approximate block averages of ``P(u, v, B_k)`` for a non-constant kernel.

    Parameters
    ----------
    kernel_fn : callable
        ``kernel_fn(u, v)`` takes arrays of equal shape and returns an array
        of shape ``u.shape + (d,)`` with the values ``P(u, v, B_k)``.
    partition : Partition
        Must carry interval geometry.
    n_nodes : int
        Midpoint nodes per axis per cell. ``0`` selects Monte Carlo with
        `n_samples` uniform points per block.
    """
    if partition.intervals is None:
        raise GeometryMissing("quadrature needs interval cells")
    d = partition.size
    iv = partition.intervals
    raw = np.empty((d, d, d))
    stderr = np.zeros((d, d, d))
    rng = np.random.default_rng(rng_seed)
    for i in range(d):
        for j in range(d):
            (a0, a1), (b0, b1) = iv[i], iv[j]
            if n_nodes > 0:
                u = a0 + (np.arange(n_nodes) + 0.5) * (a1 - a0) / n_nodes
                v = b0 + (np.arange(n_nodes) + 0.5) * (b1 - b0) / n_nodes
                U, W = np.meshgrid(u, v, indexing="ij")
                vals = np.asarray(kernel_fn(U, W), dtype=float).reshape(-1, d)
                raw[i, j] = vals.mean(axis=0)
            else:
                U = rng.uniform(a0, a1, n_samples)
                W = rng.uniform(b0, b1, n_samples)
                vals = np.asarray(kernel_fn(U, W), dtype=float).reshape(-1, d)
                raw[i, j] = vals.mean(axis=0)
                stderr[i, j] = vals.std(axis=0, ddof=1) / np.sqrt(n_samples)
    sym = 0.5 * (raw + raw.transpose(1, 0, 2))
    sym = np.maximum(sym, 0.0)
    sums = sym.sum(axis=2)
    tensor = HereditaryTensor.from_dense(sym / sums[:, :, None])
    return QuadratureResult(tensor=tensor, raw=raw, deltas=sums - 1.0, stderr=stderr)
