"""
JSON file formats. All indices in files are 1-based.

tensor      {"dim": d, "entries": [{"i": 1, "j": 1, "k": 1, "p": 1.0}, ...]}
vector      {"coords": [...]}
kernel      {"partition": {"weights": [...], "intervals": [[l, r], ...]},
             "blocks": [{"i": 1, "j": 2, "measure": [...]}, ...]}
measure     {"weights": [...], "masses": [...]}
problem     {"partition": {...}, "K": [{"i":.., "j":.., "k":.., "value":..}], "phi": [...]}
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np

from .analysis import OrthogonalityVerdict, SurjectivityVerdict
from .hammerstein import DensitySolution, HammersteinProblem
from .measure import Partition, PartitionMeasure, TransitionKernel
from .preimage import PreimageSolution
from .simplex import HereditaryTensor, validate_tensor


def read_json(path) -> Any:
    with open(path) as fh:
        return json.load(fh)


def _index(value, dim, name):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValueError(f"index {name}={value!r} is not an integer")
    if not 1 <= value <= dim:
        raise ValueError(f"index {name}={value} outside 1..{dim}")
    return value - 1


def tensor_from_json(doc, tol_stoch: float = 1e-9) -> HereditaryTensor:
    dim = doc["dim"]
    if isinstance(dim, bool) or not isinstance(dim, int):
        raise ValueError("dim must be an integer")
    entries = [
        (_index(e["i"], dim, "i"), _index(e["j"], dim, "j"), _index(e["k"], dim, "k"), float(e["p"]))
        for e in doc["entries"]
    ]
    return validate_tensor(entries, dim, tol_stoch)


def tensor_to_json(P: HereditaryTensor) -> dict:
    order = np.lexsort((P.k, P.j, P.i))
    return {
        "dim": P.dim,
        "entries": [
            {"i": int(P.i[n]) + 1, "j": int(P.j[n]) + 1, "k": int(P.k[n]) + 1, "p": float(P.p[n])}
            for n in order
        ],
    }


def vector_from_json(doc) -> np.ndarray:
    return np.asarray(doc["coords"], dtype=float)


def partition_from_json(doc) -> Partition:
    return Partition(weights=doc["weights"], intervals=doc.get("intervals"))


def partition_to_json(partition: Partition) -> dict:
    out = {"weights": partition.weights.tolist()}
    if partition.intervals is not None:
        out["intervals"] = partition.intervals.tolist()
    return out


def kernel_from_json(doc) -> TransitionKernel:
    partition = partition_from_json(doc["partition"])
    d = partition.size
    pairs = {}
    for b in doc["blocks"]:
        i, j = _index(b["i"], d, "i"), _index(b["j"], d, "j")
        if i > j:
            raise ValueError(f"block ({i + 1}, {j + 1}) violates i <= j")
        if (i, j) in pairs:
            raise ValueError(f"block ({i + 1}, {j + 1}) given twice")
        m = np.asarray(b["measure"], dtype=float)
        if m.shape != (d,):
            raise ValueError(f"block ({i + 1}, {j + 1}) measure must have {d} entries")
        pairs[(i, j)] = m
    return TransitionKernel.from_pairs(partition, pairs)


def kernel_to_json(kernel: TransitionKernel) -> dict:
    d = kernel.size
    return {
        "partition": partition_to_json(kernel.partition),
        "blocks": [
            {"i": i + 1, "j": j + 1, "measure": kernel.blocks[i, j].tolist()}
            for i in range(d) for j in range(i, d)
        ],
    }


def measure_from_json(doc) -> PartitionMeasure:
    from .measure import partition_measure

    return partition_measure(Partition(doc["weights"]), doc["masses"])


def measure_to_json(mu: PartitionMeasure) -> dict:
    return {"weights": mu.partition.weights.tolist(), "masses": mu.masses.tolist()}


def problem_from_json(doc) -> HammersteinProblem:
    partition = partition_from_json(doc["partition"])
    d = partition.size
    K = np.zeros((d, d, d))
    for e in doc["K"]:
        i, j, k = _index(e["i"], d, "i"), _index(e["j"], d, "j"), _index(e["k"], d, "k")
        K[i, j, k] = K[j, i, k] = float(e["value"])
    return HammersteinProblem(partition, K, doc["phi"])


def problem_to_json(problem: HammersteinProblem) -> dict:
    d = problem.partition.size
    return {
        "partition": partition_to_json(problem.partition),
        "K": [
            {"i": i + 1, "j": j + 1, "k": k + 1, "value": float(problem.K[i, j, k])}
            for i in range(d) for j in range(i, d) for k in range(d)
            if problem.K[i, j, k] != 0
        ],
        "phi": problem.phi.tolist(),
    }


def _one_based(value):
    if isinstance(value, bool):
        return value
    if isinstance(value, (tuple, list)):
        return [int(v) + 1 for v in value]
    return value


def verdict_to_json(v: SurjectivityVerdict | OrthogonalityVerdict) -> dict:
    if isinstance(v, OrthogonalityVerdict):
        out = {"status": v.status.value, "note": v.note}
        if v.permutation is not None:
            out["permutation"] = _one_based(v.permutation)
        if v.witness is not None:
            out["witness"] = [w.tolist() for w in v.witness]
        return out
    cert = None
    if v.certificate is not None:
        cert = {key: _one_based(val) for key, val in v.certificate.items()}
    return {"status": v.status.value, "certificate": cert, "note": v.note}


def preimage_to_json(sol: PreimageSolution) -> dict:
    return {
        "x": sol.x.tolist(),
        "residual": sol.residual,
        "iterations": sol.iterations,
        "method": sol.method,
        "certified": sol.certified,
    }


def density_to_json(sol: DensitySolution) -> dict:
    return {
        "density": sol.density.tolist(),
        "masses": sol.masses.tolist(),
        "residual": sol.residual,
        "certified": sol.certified,
    }


def dump(doc, path=None, pretty: bool = False) -> str:
    text = json.dumps(doc, indent=2 if pretty else None, sort_keys=True)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text
