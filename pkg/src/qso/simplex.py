"""
Vectors on the simplex and discrete quadratic stochastic operators.

A discrete quadratic stochastic operator (DQSO) on ``d`` types is given by a
cubic array of hereditary coefficients ``P[i, j, k]`` that is nonnegative,
symmetric in ``(i, j)`` and sums to one over ``k``. It acts on a vector ``x``
by ``V(x)[k] = sum_{i,j} P[i, j, k] x[i] x[j]``.

Vectors are plain 1-d float arrays. Indices are 0-based throughout the Python
API; the JSON file formats in :mod:`qso.io` use 1-based indices.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping

import numpy as np

from .errors import DimensionMismatch, NegativeEntry, RowSumViolation

TOL_SIMPLEX = 1e-9
TOL_STOCH = 1e-9
ZERO_TOL = 1e-12
# negative inputs above this are treated as floating noise and clamped to 0
NOISE_FLOOR = -1e-15


def as_vector(x, tol=TOL_SIMPLEX) -> np.ndarray:
    """Validate a coordinate vector of ``B_1^+`` and return it as a float array.

    Coordinates in ``[NOISE_FLOOR, 0)`` are clamped to zero. Anything more
    negative, non-finite, or a mass above ``1 + tol`` raises ``ValueError``.
    """
    x = np.array(x, dtype=float, ndmin=1)
    if x.ndim != 1:
        raise ValueError(f"expected a 1-d vector, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("vector has non-finite coordinates")
    if np.any(x < NOISE_FLOOR):
        raise ValueError(f"vector has negative coordinate {x.min()!r}")
    x[x < 0] = 0.0
    if x.sum() > 1 + tol:
        raise ValueError(f"vector mass {x.sum()!r} exceeds 1")
    return x


def mass(x) -> float:
    return float(np.sum(x))


def is_simplex_point(x, tol=TOL_SIMPLEX) -> bool:
    x = np.asarray(x, dtype=float)
    return bool(np.all(x >= 0) and abs(x.sum() - 1.0) <= tol)


def basis_vector(k: int, dim: int) -> np.ndarray:
    e = np.zeros(dim)
    e[k] = 1.0
    return e


def support(x, zero_tol=ZERO_TOL) -> tuple[int, ...]:
    """Indices of the coordinates of `x` whose magnitude exceeds `zero_tol`."""
    x = np.asarray(x, dtype=float)
    return tuple(int(i) for i in np.flatnonzero(np.abs(x) > zero_tol))


def is_orthogonal(x, y, zero_tol=ZERO_TOL) -> bool:
    """True iff ``x . y <= zero_tol``, i.e. the supports are disjoint."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise DimensionMismatch(f"shapes {x.shape} and {y.shape} differ")
    return bool(np.dot(x, y) <= zero_tol)


@dataclass(frozen=True, eq=False)
class HereditaryTensor:
    """Sparse symmetric cubic stochastic array defining a DQSO.

    Each stored entry ``(i[n], j[n], k[n]) -> p[n]`` has ``i <= j``; the
    mirrored entry ``(j, i, k)`` is implicit. Build instances with
    :func:`validate_tensor` or :meth:`from_dense`, which check the
    hereditary conditions.
    """

    dim: int
    i: np.ndarray
    j: np.ndarray
    k: np.ndarray
    p: np.ndarray

    @property
    def nnz(self) -> int:
        return int(self.p.size)

    @cached_property
    def _pair_weight(self) -> np.ndarray:
        # off-diagonal pairs appear twice in the double sum over (i, j)
        return np.where(self.i == self.j, 1.0, 2.0) * self.p

    @cached_property
    def rows(self) -> dict[tuple[int, int], tuple[np.ndarray, np.ndarray]]:
        """Map ``(i, j)`` with ``i <= j`` to the arrays ``(ks, ps)`` of that row."""
        out = {}
        order = np.lexsort((self.k, self.j, self.i))
        i, j, k, p = self.i[order], self.j[order], self.k[order], self.p[order]
        starts = np.flatnonzero(np.r_[True, (i[1:] != i[:-1]) | (j[1:] != j[:-1])])
        ends = np.r_[starts[1:], i.size]
        for s, e in zip(starts, ends):
            out[(int(i[s]), int(j[s]))] = (k[s:e], p[s:e])
        return out

    def entry(self, i: int, j: int, k: int) -> float:
        ks, ps = self.rows.get((min(i, j), max(i, j)), (np.empty(0, int), np.empty(0)))
        hit = ps[ks == k]
        return float(hit[0]) if hit.size else 0.0

    def row(self, i: int, j: int) -> np.ndarray:
        """Dense output distribution ``P[i, j, :]``."""
        out = np.zeros(self.dim)
        ks, ps = self.rows.get((min(i, j), max(i, j)), (np.empty(0, int), np.empty(0)))
        out[ks] = ps
        return out

    def to_dense(self) -> np.ndarray:
        """Full symmetric ``(d, d, d)`` array. Memory is ``O(d^3)``."""
        out = np.zeros((self.dim,) * 3)
        out[self.i, self.j, self.k] = self.p
        out[self.j, self.i, self.k] = self.p
        return out

    @classmethod
    def from_dense(cls, array, tol_stoch=TOL_STOCH) -> "HereditaryTensor":
        """Validate a dense ``(d, d, d)`` array, symmetrizing by averaging."""
        a = np.asarray(array, dtype=float)
        if a.ndim != 3 or not (a.shape[0] == a.shape[1] == a.shape[2]):
            raise DimensionMismatch(f"expected a cubic array, got shape {a.shape}")
        d = a.shape[0]
        if d < 2:
            raise ValueError("dimension must be at least 2")
        a = 0.5 * (a + a.transpose(1, 0, 2))
        iu, ju = np.triu_indices(d)
        upper = a[iu, ju, :]
        return cls._validated(d, iu, ju, upper, tol_stoch)

    @classmethod
    def _validated(cls, d, iu, ju, rows, tol_stoch):
        # rows: (n_pairs, d) dense output distributions for pairs (iu, ju)
        if not np.all(np.isfinite(rows)):
            raise ValueError("non-finite hereditary coefficient")
        bad = rows < NOISE_FLOOR
        if bad.any():
            r, k = np.argwhere(bad)[0]
            raise NegativeEntry(int(iu[r]), int(ju[r]), int(k), float(rows[r, k]))
        rows = np.where(rows < 0, 0.0, rows)
        sums = rows.sum(axis=1)
        off = np.abs(sums - 1.0) > tol_stoch
        if off.any():
            r = int(np.flatnonzero(off)[0])
            raise RowSumViolation(int(iu[r]), int(ju[r]), float(sums[r]))
        r, k = np.nonzero(rows)
        return cls(
            dim=d,
            i=iu[r].astype(np.intp),
            j=ju[r].astype(np.intp),
            k=k.astype(np.intp),
            p=rows[r, k],
        )


def _iter_entries(entries):
    if isinstance(entries, Mapping):
        for (i, j, k), p in entries.items():
            yield int(i), int(j), int(k), float(p)
    else:
        for i, j, k, p in entries:
            yield int(i), int(j), int(k), float(p)


def validate_tensor(
    entries: Mapping[tuple[int, int, int], float] | Iterable[tuple[int, int, int, float]],
    dim: int,
    tol_stoch: float = TOL_STOCH,
) -> HereditaryTensor:
    """Build a :class:`HereditaryTensor` from sparse entries.

    Parameters
    ----------
    entries : mapping or iterable
        Either ``{(i, j, k): p}`` or an iterable of ``(i, j, k, p)`` with
        0-based indices. Unlisted entries are zero. When both ``(i, j, k)``
        and ``(j, i, k)`` are given their values are averaged; when only one
        is given it is used for both.
    dim : int
        Number of types ``d >= 2``.
    tol_stoch : float
        Allowed deviation of each row sum ``sum_k P[i, j, k]`` from 1.

    Raises
    ------
    NegativeEntry
        An entry is below ``-1e-15``.
    RowSumViolation
        Some pair ``(i, j)`` does not sum to 1 within `tol_stoch`.
    """
    if dim < 2:
        raise ValueError("dimension must be at least 2")
    given: dict[tuple[int, int, int], float] = {}
    for i, j, k, p in _iter_entries(entries):
        for idx in (i, j, k):
            if not 0 <= idx < dim:
                raise DimensionMismatch(f"index {idx} out of range for dim {dim}")
        given[(i, j, k)] = given.get((i, j, k), 0.0) + p
    iu, ju = np.triu_indices(dim)
    pair_index = {(int(a), int(b)): n for n, (a, b) in enumerate(zip(iu, ju))}
    rows = np.zeros((iu.size, dim))
    for (i, j, k), p in given.items():
        if i > j and (j, i, k) in given:
            continue
        if i < j and (j, i, k) in given:
            p = 0.5 * (p + given[(j, i, k)])
        rows[pair_index[(min(i, j), max(i, j))], k] = p
    return HereditaryTensor._validated(dim, iu, ju, rows, tol_stoch)


def evaluate_dqso(P: HereditaryTensor, x) -> np.ndarray:
    """Apply the DQSO: ``V(x)[k] = sum_{i,j} P[i, j, k] x[i] x[j]``.

    Works on all of ``B_1^+``; if ``x`` has mass ``r`` the image has mass
    ``r**2``. Cost is ``O(nnz)``.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (P.dim,):
        raise DimensionMismatch(f"vector of shape {x.shape} for operator of dim {P.dim}")
    w = P._pair_weight * x[P.i] * x[P.j]
    return np.bincount(P.k, weights=w, minlength=P.dim)
