"""Constructors for common and random hereditary tensors."""
from __future__ import annotations

import numpy as np

from .simplex import HereditaryTensor


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def volterra_from_skew(a) -> HereditaryTensor:
    """Volterra tensor with ``P[k,k,k] = 1`` and ``P[i,k,k] = (1 + a[k,i]) / 2``.

    `a` must be skew-symmetric with entries in ``[-1, 1]``.
    """
    a = np.asarray(a, dtype=float)
    d = a.shape[0]
    if a.shape != (d, d):
        raise ValueError("skew matrix must be square")
    if not np.allclose(a, -a.T, atol=1e-12) or np.abs(a).max(initial=0) > 1 + 1e-12:
        raise ValueError("a must be skew-symmetric with entries in [-1, 1]")
    P = np.zeros((d, d, d))
    k, i = np.nonzero(~np.eye(d, dtype=bool))
    P[i, k, k] = P[k, i, k] = 0.5 * (1.0 + a[k, i])
    idx = np.arange(d)
    P[idx, idx, idx] = 1.0
    return HereditaryTensor.from_dense(P)


def identity_volterra(d: int) -> HereditaryTensor:
    return volterra_from_skew(np.zeros((d, d)))


def relabel_outputs(P: HereditaryTensor, perm) -> HereditaryTensor:
    """Tensor ``P'[i, j, k] = P[i, j, perm[k]]``.

    Applied to a Volterra tensor this gives a pi-Volterra tensor with
    ``pi = perm``.
    """
    perm = np.asarray(perm, dtype=np.intp)
    inv = np.argsort(perm)
    return HereditaryTensor(dim=P.dim, i=P.i.copy(), j=P.j.copy(), k=inv[P.k], p=P.p.copy())


def conjugate(P: HereditaryTensor, sigma) -> HereditaryTensor:
    """Rename every type ``t`` to ``sigma[t]`` in inputs and output."""
    sigma = np.asarray(sigma, dtype=np.intp)
    i, j = sigma[P.i], sigma[P.j]
    return HereditaryTensor(
        dim=P.dim, i=np.minimum(i, j), j=np.maximum(i, j), k=sigma[P.k], p=P.p.copy()
    )


def constant_operator(m) -> HereditaryTensor:
    """``P[i, j, :] = m`` for every pair, so ``V(x) = m`` on the simplex."""
    m = np.asarray(m, dtype=float)
    d = m.size
    return HereditaryTensor.from_dense(np.broadcast_to(m, (d, d, d)))


def swap_operator() -> HereditaryTensor:
    """The 2-type operator ``V(x) = (x_2, x_1)``."""
    P = np.zeros((2, 2, 2))
    P[1, 1, 0] = 1.0
    P[0, 0, 1] = 1.0
    P[0, 1, :] = P[1, 0, :] = 0.5
    return HereditaryTensor.from_dense(P)


def random_skew(d: int, seed=None) -> np.ndarray:
    rng = _rng(seed)
    a = np.triu(rng.uniform(-1.0, 1.0, size=(d, d)), 1)
    return a - a.T


def random_volterra(d: int, seed=None) -> HereditaryTensor:
    return volterra_from_skew(random_skew(d, seed))


def random_pi_volterra(d: int, seed=None) -> tuple[HereditaryTensor, np.ndarray]:
    """Random Volterra tensor with outputs relabeled by a random permutation.

    Returns the tensor and the permutation ``pi`` it realises.
    """
    rng = _rng(seed)
    perm = rng.permutation(d)
    return relabel_outputs(random_volterra(d, rng), perm), perm


def random_stochastic(d: int, seed=None, alpha: float = 1.0) -> HereditaryTensor:
    """Each row ``P[i, j, :]`` (``i <= j``) drawn from ``Dirichlet(alpha)``."""
    rng = _rng(seed)
    iu, ju = np.triu_indices(d)
    rows = rng.dirichlet(np.full(d, alpha), size=iu.size)
    return HereditaryTensor._validated(d, iu, ju, rows, 1e-9)


def random_simplex_point(d: int, seed=None) -> np.ndarray:
    return _rng(seed).dirichlet(np.ones(d))
