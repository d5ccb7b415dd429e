"""
Structural classification of DQSOs.

Volterra and pi-Volterra detection, orthogonality preservation, and
surjectivity verdicts. For a finite operator that is the complete operator
(not a truncation of an infinite one) the three properties

    orthogonality preserving  <=>  surjective  <=>  pi-Volterra

are equivalent. For truncations only the sufficient condition on an index
sequence ``j`` (``P[j[n], j[m], k] = 0`` whenever ``k`` is neither ``n`` nor
``m``) and the necessary condition ``P[j[k], j[k], k] = 1`` are used, and
anything in between is reported as ``Unknown``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import NotVolterra
from .simplex import HereditaryTensor, evaluate_dqso

TOL = 1e-9
MAX_NODES = 10**6


class Status(str, enum.Enum):
    SURJECTIVE = "Surjective"
    NOT_SURJECTIVE = "NotSurjective"
    UNKNOWN = "Unknown"


class OPStatus(str, enum.Enum):
    PRESERVING = "Preserving"
    NOT_PRESERVING = "NotPreserving"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class SurjectivityVerdict:
    """Outcome of :func:`check_surjectivity`.

    ``certificate`` holds 0-based index data keyed by kind:
    ``{"sequence": (...)}``, ``{"permutation": (...)}``,
    ``{"empty_index_sets": (...)}`` or ``{"no_permutation": True}``.
    """

    status: Status
    certificate: dict[str, Any] | None = None
    note: str = ""

    def __post_init__(self):
        if self.status is not Status.UNKNOWN and not self.certificate:
            raise ValueError(f"{self.status.value} verdict needs a certificate")

    @property
    def sequence(self) -> tuple[int, ...] | None:
        if not self.certificate:
            return None
        if "sequence" in self.certificate:
            return self.certificate["sequence"]
        # at finite d a pi-Volterra permutation is itself a valid sequence
        return self.certificate.get("permutation")


@dataclass(frozen=True)
class OrthogonalityVerdict:
    status: OPStatus
    permutation: tuple[int, ...] | None = None
    witness: tuple[np.ndarray, np.ndarray] | None = field(default=None, compare=False)
    note: str = ""


def is_volterra(P: HereditaryTensor, tol: float = TOL) -> bool:
    """True iff ``P[i, j, k] <= tol`` for every ``k`` outside ``{i, j}``."""
    off = (P.k != P.i) & (P.k != P.j)
    return not bool(np.any(P.p[off] > tol))


def volterra_skew_form(P: HereditaryTensor, tol: float = TOL) -> np.ndarray:
    """Matrix ``a[k, i] = 2 P[i, k, k] - 1`` of the canonical Volterra form.

    On the simplex ``V(x)[k] = x[k] (1 + sum_i a[k, i] x[i])``. The diagonal
    is set to zero: ``P[k, k, k] = 1`` makes the formal value ``1`` a term
    already accounted for by ``sum_i x[i] = 1``.
    """
    if not is_volterra(P, tol):
        raise NotVolterra("tensor has mass outside {i, j} for some pair (i, j)")
    d = P.dim
    a = -np.ones((d, d))
    hit = P.k == P.j
    a[P.k[hit], P.i[hit]] = 2.0 * P.p[hit] - 1.0
    hit = (P.k == P.i) & (P.i != P.j)
    a[P.k[hit], P.j[hit]] = 2.0 * P.p[hit] - 1.0
    np.fill_diagonal(a, 0.0)
    return a


def extract_fixed_index_sets(
    P: HereditaryTensor, tol: float = TOL
) -> tuple[list[tuple[int, ...]], list[int | None]]:
    """Sets ``I[k] = {j : P[j, j, k] = 1}`` and their minima.

    Equality with one is tested as ``P[j, j, k] >= 1 - tol``.

    Returns
    -------
    sets : list of tuple
        ``sets[k]`` is ``I[k]`` in increasing order.
    mins : list
        ``min(I[k])`` or ``None`` when ``I[k]`` is empty.
    """
    sets: list[list[int]] = [[] for _ in range(P.dim)]
    hit = (P.i == P.j) & (P.p >= 1.0 - tol)
    for j, k in sorted(zip(P.i[hit].tolist(), P.k[hit].tolist())):
        sets[k].append(j)
    out = [tuple(s) for s in sets]
    return out, [s[0] if s else None for s in out]


def _admissible_outputs(P: HereditaryTensor, tol: float) -> list[set[int]]:
    """For each output ``k``, the inputs ``c`` such that all mass on ``k``
    comes from pairs containing ``c``."""
    sets, _ = extract_fixed_index_sets(P, tol)
    out = []
    heavy = P.p > tol
    for k in range(P.dim):
        on_k = heavy & (P.k == k)
        ii, jj = P.i[on_k], P.j[on_k]
        out.append({c for c in sets[k] if np.all((ii == c) | (jj == c))})
    return out


def _match(candidates: list[list[int]], max_nodes: int) -> tuple[list[int] | None, bool]:
    """Backtracking search for a system of distinct representatives.

    Returns ``(assignment, truncated)``.
    """
    d = len(candidates)
    order = sorted(range(d), key=lambda k: len(candidates[k]))
    assign = [-1] * d
    used: set[int] = set()
    nodes = 0

    def go(pos):
        nonlocal nodes
        if pos == d:
            return True
        k = order[pos]
        for c in candidates[k]:
            nodes += 1
            if nodes > max_nodes:
                raise _Truncated
            if c in used:
                continue
            assign[k] = c
            used.add(c)
            if go(pos + 1):
                return True
            used.discard(c)
        assign[k] = -1
        return False

    try:
        return (assign if go(0) else None), False
    except _Truncated:
        return None, True


class _Truncated(Exception):
    pass


def find_pi_volterra_permutation(
    P: HereditaryTensor, tol: float = TOL, max_nodes: int = MAX_NODES
) -> tuple[int, ...] | None:
    """Permutation ``pi`` with ``V(x)[k] = x[pi[k]] (1 + sum_i a[pi[k], i] x[i])``.

    ``pi[k]`` must lie in ``I[k]`` and every pair carrying mass to ``k`` must
    contain ``pi[k]``; a bijection is then chosen by backtracking. Returns
    ``None`` when no such permutation exists (or the search is cut off).
    """
    cand = [sorted(s) for s in _admissible_outputs(P, tol)]
    if any(not c for c in cand):
        return None
    perm, _ = _match(cand, max_nodes)
    return None if perm is None else tuple(perm)


def _random_orthogonal_pair(d, rng):
    while True:
        side = rng.integers(0, 2, size=d).astype(bool)
        if side.any() and not side.all():
            break
    x = np.zeros(d)
    y = np.zeros(d)
    x[side] = rng.dirichlet(np.ones(side.sum()))
    y[~side] = rng.dirichlet(np.ones((~side).sum()))
    return x, y


def check_orthogonality_preserving(
    P: HereditaryTensor,
    n_samples: int = 1000,
    rng_seed: int | None = 0,
    tol: float = TOL,
    finite_total: bool = True,
) -> OrthogonalityVerdict:
    """Decide whether orthogonal inputs have orthogonal images.

    A pi-Volterra permutation proves preservation. Otherwise basis pairs
    ``(e_i, e_j)`` and then `n_samples` random orthogonal pairs are searched
    for a witness with ``V(x) . V(y) > tol``. Without a witness the operator
    is still not preserving when it is a complete finite operator (the
    finite-dimensional equivalence with pi-Volterra); for truncations the
    answer is ``Unknown``.
    """
    perm = find_pi_volterra_permutation(P, tol)
    if perm is not None:
        return OrthogonalityVerdict(OPStatus.PRESERVING, permutation=perm)
    d = P.dim
    images = [evaluate_dqso(P, np.eye(d)[i]) for i in range(d)]
    for i in range(d):
        for j in range(i + 1, d):
            if images[i] @ images[j] > tol:
                return OrthogonalityVerdict(
                    OPStatus.NOT_PRESERVING, witness=(np.eye(d)[i], np.eye(d)[j])
                )
    rng = np.random.default_rng(rng_seed)
    for _ in range(n_samples):
        x, y = _random_orthogonal_pair(d, rng)
        if evaluate_dqso(P, x) @ evaluate_dqso(P, y) > tol:
            return OrthogonalityVerdict(OPStatus.NOT_PRESERVING, witness=(x, y))
    if finite_total:
        return OrthogonalityVerdict(OPStatus.NOT_PRESERVING, note="no π found")
    return OrthogonalityVerdict(OPStatus.UNKNOWN, note="no π found and no witness sampled")


def sequence_violations(
    P: HereditaryTensor, sequence, tol: float = TOL
) -> list[tuple[int, int, int]]:
    """All ``(n, m, k)`` with ``P[seq[n], seq[m], k] > tol`` and ``k`` not in ``{n, m}``.

    Also reports ``(n, n, n)`` when ``P[seq[n], seq[n], n] < 1 - tol``.
    """
    seq = list(sequence)
    bad = []
    for n in range(len(seq)):
        if P.entry(seq[n], seq[n], n) < 1.0 - tol:
            bad.append((n, n, n))
        for m in range(n, len(seq)):
            row = P.row(seq[n], seq[m])
            for k in np.flatnonzero(row > tol):
                if k != n and k != m:
                    bad.append((n, m, int(k)))
    return bad


def _search_sequence(P, sets, tol, max_nodes):
    d = P.dim
    # heavy[c1, c2] = set of outputs receiving more than tol from pair (c1, c2)
    heavy = {}

    def outputs(c1, c2):
        key = (min(c1, c2), max(c1, c2))
        if key not in heavy:
            ks, ps = P.rows.get(key, (np.empty(0, int), np.empty(0)))
            heavy[key] = set(ks[ps > tol].tolist())
        return heavy[key]

    order = sorted(range(d), key=lambda n: len(sets[n]))
    seq = [-1] * d
    nodes = 0

    def consistent(n, c):
        if not outputs(c, c) <= {n}:
            return False
        for m in range(d):
            if seq[m] >= 0 and not outputs(c, seq[m]) <= {n, m}:
                return False
        return True

    def go(pos):
        nonlocal nodes
        if pos == d:
            return True
        n = order[pos]
        for c in sets[n]:
            nodes += 1
            if nodes > max_nodes:
                raise _Truncated
            if c in seq or not consistent(n, c):
                continue
            seq[n] = c
            if go(pos + 1):
                return True
            seq[n] = -1
        return False

    try:
        return (tuple(seq) if go(0) else None), False
    except _Truncated:
        return None, True


def check_surjectivity(
    P: HereditaryTensor,
    tol: float = TOL,
    finite_total: bool = False,
    max_nodes: int = MAX_NODES,
) -> SurjectivityVerdict:
    """Surjectivity verdict with a certificate.

    1. Some ``I[k]`` empty: ``NotSurjective`` (the vertex ``e_k`` has no
       preimage).
    2. A sequence ``j`` with ``j[n]`` in ``I[n]`` and
       ``P[j[n], j[m], k] <= tol`` for ``k`` outside ``{n, m}``:
       ``Surjective``.
    3. If `finite_total` (the tensor is the whole operator, not a truncation):
       ``Surjective`` iff pi-Volterra.
    4. Otherwise ``Unknown``.
    """
    sets, _ = extract_fixed_index_sets(P, tol)
    empty = tuple(k for k, s in enumerate(sets) if not s)
    if empty:
        return SurjectivityVerdict(
            Status.NOT_SURJECTIVE,
            {"empty_index_sets": empty},
            note="no j with P[j, j, k] = 1 for these k",
        )
    seq, truncated = _search_sequence(P, [list(s) for s in sets], tol, max_nodes)
    if seq is not None:
        return SurjectivityVerdict(Status.SURJECTIVE, {"sequence": seq})
    note = "search-truncated" if truncated else "no admissible index sequence"
    if finite_total:
        perm = find_pi_volterra_permutation(P, tol, max_nodes)
        if perm is not None:
            return SurjectivityVerdict(Status.SURJECTIVE, {"permutation": perm}, note=note)
        if not truncated:
            return SurjectivityVerdict(
                Status.NOT_SURJECTIVE, {"no_permutation": True}, note="no π found"
            )
    return SurjectivityVerdict(Status.UNKNOWN, None, note=note)
