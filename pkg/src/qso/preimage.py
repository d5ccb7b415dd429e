"""
Solving ``V(x) = y`` on the simplex.

Volterra operators are inverted with a damped Newton iteration on the
canonical form ``x * (1 + a @ x)``. A general operator that admits an index
sequence ``j`` (see :func:`qso.analysis.check_surjectivity`) is reduced to a
Volterra operator on the coordinates ``j`` and the reduced solution is
embedded back with ``x[j[n]] = z[n]``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .analysis import TOL, Status, check_surjectivity, volterra_skew_form
from .errors import (
    DimensionMismatch,
    EmbeddingResidualFail,
    NoCertificate,
    NoConvergence,
)
from .simplex import HereditaryTensor, evaluate_dqso, is_simplex_point

log = logging.getLogger(__name__)

TOL_RESIDUAL = 1e-12
MAX_HALVINGS = 30
FIXED_POINT_ITERS = 500


@dataclass(frozen=True)
class PreimageSolution:
    """A point ``x`` of the simplex with ``residual = ||V(x) - y||_1``.

    ``method`` is ``"newton"``, ``"fixed-point"`` or ``"least-squares"``;
    ``certified`` is False only for best-effort solves of operators without
    a surjectivity certificate.
    """

    x: np.ndarray
    residual: float
    iterations: int
    method: str
    certified: bool = True


def verify_preimage(P: HereditaryTensor, x, y) -> float:
    """``||V(x) - y||_1``."""
    y = np.asarray(y, dtype=float)
    if y.shape != (P.dim,):
        raise DimensionMismatch(f"target of shape {y.shape} for operator of dim {P.dim}")
    return float(np.abs(evaluate_dqso(P, x) - y).sum())


def _project(x, total):
    x = np.maximum(x, 0.0)
    s = x.sum()
    return x * (total / s) if s > 0 else np.full_like(x, total / x.size)


def _check_target(y, dim):
    y = np.asarray(y, dtype=float)
    if y.shape != (dim,):
        raise DimensionMismatch(f"target of shape {y.shape} for operator of dim {dim}")
    if not is_simplex_point(y):
        raise ValueError("target must be a point of the simplex")
    return y


def newton_canonical(a, y, tol=TOL_RESIDUAL, max_iter=100):
    """Solve ``x * (1 + a @ x) = y`` for ``x`` on the simplex.

    Returns ``(x, residual, iterations, method)`` where the residual is the
    l1 defect of the canonical form. Raises :class:`NoConvergence`.
    """
    a = np.asarray(a, dtype=float)
    y = np.asarray(y, dtype=float)
    total = y.sum()

    def F(x):
        return x * (1.0 + a @ x) - y

    x = y.copy()
    r = np.abs(F(x)).sum()
    it = 0
    while r > tol and it < max_iter:
        Fx = F(x)
        J = np.diag(1.0 + a @ x) + x[:, None] * a
        try:
            dx = np.linalg.solve(J, -Fx)
        except np.linalg.LinAlgError:
            dx = np.linalg.lstsq(J, -Fx, rcond=None)[0]
        t = 1.0
        for _ in range(MAX_HALVINGS + 1):
            x_new = _project(x + t * dx, total)
            r_new = np.abs(F(x_new)).sum()
            if r_new < r:
                break
            t *= 0.5
        else:
            log.debug("newton stagnated at residual %.3e after %d steps", r, it)
            break
        x, r = x_new, r_new
        it += 1
    if r <= tol:
        return x, r, it, "newton"

    # fixed-point fallback: x_k <- y_k / (1 + (a x)_k)
    best_x, best_r = x, r
    for n in range(FIXED_POINT_ITERS):
        denom = np.maximum(1.0 + a @ x, np.finfo(float).tiny)
        x = _project(y / denom, total)
        r = np.abs(F(x)).sum()
        if r < best_r:
            best_x, best_r = x, r
        if r <= tol:
            return x, r, it + n + 1, "fixed-point"
    raise NoConvergence("Volterra inversion did not converge", best_r, best_x)


def invert_volterra(
    P: HereditaryTensor, y, tol: float = TOL_RESIDUAL, max_iter: int = 100
) -> PreimageSolution:
    """Preimage of `y` under a Volterra operator.

    Damped Newton on ``F(x) = x * (1 + a @ x) - y`` started at ``x = y``,
    with clipping and renormalization after each step and step halving until
    the l1 residual decreases. A fixed-point iteration takes over if Newton
    stagnates.

    Raises
    ------
    NotVolterra
        `P` has mass outside ``{i, j}`` for some pair.
    NoConvergence
        Neither iteration reached `tol`.
    """
    a = volterra_skew_form(P)
    y = _check_target(y, P.dim)
    x, _, it, method = newton_canonical(a, y, tol, max_iter)
    res = verify_preimage(P, x, y)
    if res > tol:
        raise NoConvergence("residual on the operator exceeds tolerance", res, x)
    return PreimageSolution(x=x, residual=res, iterations=it, method=method)


def reduced_volterra_skew(P: HereditaryTensor, sequence) -> np.ndarray:
    """Skew matrix of the Volterra operator ``P~[n, m, k] = P[j[n], j[m], k]``
    for ``k`` in ``{n, m}``.

    Each off-diagonal pair is renormalized over its two admissible outputs,
    absorbing whatever mass (at most the certificate tolerance) the original
    row puts elsewhere.
    """
    seq = np.asarray(sequence, dtype=np.intp)
    d = seq.size
    a = np.zeros((d, d))
    for n in range(d):
        for m in range(n + 1, d):
            row = P.row(seq[n], seq[m])
            pn, pm = row[n], row[m]
            s = pn + pm
            if s <= 0:
                raise NoCertificate(f"pair ({seq[n]}, {seq[m]}) puts no mass on ({n}, {m})")
            a[n, m] = 2.0 * pn / s - 1.0
            a[m, n] = -a[n, m]
    return a


def solve_preimage(
    P: HereditaryTensor,
    y,
    tol: float = 1e-10,
    sequence=None,
    max_iter: int = 100,
    cert_tol: float = TOL,
) -> PreimageSolution:
    """Solve ``V(x) = y`` via the reduction to a Volterra operator.

    Parameters
    ----------
    P : HereditaryTensor
    y : array_like
        Target point of the simplex.
    tol : float
        Required l1 residual on the original operator.
    sequence : sequence of int, optional
        Index sequence ``j``. If omitted it is taken from
        :func:`check_surjectivity`.

    Raises
    ------
    NoCertificate
        No index sequence is available.
    NoConvergence
        The reduced Volterra solve failed.
    EmbeddingResidualFail
        The embedded solution misses `tol` on the original operator.
    """
    y = _check_target(y, P.dim)
    if sequence is None:
        verdict = check_surjectivity(P, cert_tol)
        sequence = verdict.sequence
        if sequence is None:
            raise NoCertificate(f"no index sequence ({verdict.status.value}: {verdict.note})")
    seq = np.asarray(sequence, dtype=np.intp)
    if seq.size != P.dim or np.unique(seq).size != seq.size:
        raise ValueError("sequence must list distinct indices, one per coordinate")
    a = reduced_volterra_skew(P, seq)
    z, _, it, method = newton_canonical(a, y, min(tol, TOL_RESIDUAL), max_iter)
    x = np.zeros(P.dim)
    x[seq] = z
    res = verify_preimage(P, x, y)
    if res > tol:
        raise EmbeddingResidualFail(res, tol)
    return PreimageSolution(x=x, residual=res, iterations=it, method=method)


def least_squares_preimage(
    P: HereditaryTensor, y, n_starts: int = 8, rng_seed: int | None = 0
) -> PreimageSolution:
    """Best-effort ``argmin ||V(x) - y||_2^2`` over the simplex (SLSQP, multi-start).

    Used for operators without a surjectivity certificate; the result is
    marked ``certified=False`` and its l1 residual may be large.
    """
    y = _check_target(y, P.dim)
    d = P.dim
    dense = P.to_dense()
    rng = np.random.default_rng(rng_seed)

    def f(x):
        r = evaluate_dqso(P, x) - y
        grad = 2.0 * np.einsum("ijk,j->ik", dense, x) @ r
        return 0.5 * r @ r, grad

    starts = [y.copy(), np.full(d, 1.0 / d)] + [rng.dirichlet(np.ones(d)) for _ in range(n_starts)]
    best = None
    total_it = 0
    for x0 in starts:
        out = optimize.minimize(
            f, x0, jac=True, method="SLSQP",
            bounds=[(0.0, 1.0)] * d,
            constraints=[{"type": "eq", "fun": lambda x: x.sum() - 1.0, "jac": lambda x: np.ones(d)}],
            options={"ftol": 1e-16, "maxiter": 500},
        )
        total_it += int(out.nit)
        x = _project(out.x, 1.0)
        res = verify_preimage(P, x, y)
        if best is None or res < best[1]:
            best = (x, res)
    return PreimageSolution(
        x=best[0], residual=best[1], iterations=total_it, method="least-squares", certified=False
    )
