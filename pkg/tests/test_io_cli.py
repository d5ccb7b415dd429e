import json

import numpy as np
import pytest

from qso import HammersteinProblem, Partition, canonical_kernel, evaluate_dqso, io
from qso.cli import main
from qso.generators import random_simplex_point, random_stochastic, random_volterra


def write(path, doc):
    path.write_text(json.dumps(doc))
    return str(path)


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out.strip() else None), err


@pytest.fixture
def files(tmp_path, identity2, volterra_a12, constant3):
    unit2 = Partition.from_edges([0.0, 1.0, 2.0])
    canon = canonical_kernel(Partition([1.0, 1.0, 1.0]))
    return {
        "identity": write(tmp_path / "identity.json", io.tensor_to_json(identity2)),
        "a12": write(tmp_path / "a12.json", io.tensor_to_json(volterra_a12)),
        "constant": write(tmp_path / "constant.json", io.tensor_to_json(constant3)),
        "target2": write(tmp_path / "target2.json", {"coords": [0.75, 0.25]}),
        "target3": write(tmp_path / "target3.json", {"coords": [0.6, 0.2, 0.2]}),
        "kernel": write(tmp_path / "kernel.json", io.kernel_to_json(canon)),
        "problem": write(
            tmp_path / "problem.json",
            io.problem_to_json(HammersteinProblem(unit2, canonical_kernel(unit2).blocks, [0.3, 0.7])),
        ),
    }


def test_tensor_json_roundtrip():
    P = random_stochastic(4, seed=2)
    doc = io.tensor_to_json(P)
    assert all(1 <= e["i"] <= e["j"] <= 4 for e in doc["entries"])
    np.testing.assert_array_equal(io.tensor_from_json(json.loads(json.dumps(doc))).to_dense(), P.to_dense())


def test_tensor_json_rejects_bad_index():
    with pytest.raises(ValueError):
        io.tensor_from_json({"dim": 2, "entries": [{"i": 0, "j": 1, "k": 1, "p": 1.0}]})
    with pytest.raises(ValueError):
        io.tensor_from_json({"dim": 2, "entries": [{"i": 1.0, "j": 1, "k": 1, "p": 1.0}]})


def test_kernel_json_roundtrip():
    k = canonical_kernel(Partition.from_edges([0.0, 0.5, 2.0]))
    back = io.kernel_from_json(json.loads(json.dumps(io.kernel_to_json(k))))
    np.testing.assert_array_equal(back.blocks, k.blocks)
    assert back.partition.same_as(k.partition)


def test_kernel_json_rejects_lower_block():
    doc = io.kernel_to_json(canonical_kernel(Partition([1.0, 1.0])))
    doc["blocks"][1]["i"], doc["blocks"][1]["j"] = 2, 1
    with pytest.raises(ValueError):
        io.kernel_from_json(doc)


def test_problem_json_roundtrip():
    part = Partition([0.5, 1.5])
    K = canonical_kernel(part).blocks / part.weights
    prob = HammersteinProblem(part, K, [0.5, 0.5])
    back = io.problem_from_json(json.loads(json.dumps(io.problem_to_json(prob))))
    np.testing.assert_array_equal(back.K, prob.K)
    np.testing.assert_array_equal(back.phi, prob.phi)


def test_check_identity(files, capsys):
    code, report, _ = run(["check", files["identity"]], capsys)
    assert code == 0
    assert report["result"]["volterra"] is True
    assert report["result"]["surjectivity"]["status"] == "Surjective"
    assert report["result"]["surjectivity"]["certificate"] == {"sequence": [1, 2]}
    assert report["result"]["pi_volterra"] == [1, 2]


def test_check_constant(files, capsys):
    code, report, _ = run(["check", files["constant"], "--finite-total"], capsys)
    assert code == 0
    assert report["result"]["surjectivity"]["status"] == "NotSurjective"
    assert report["result"]["orthogonality"]["status"] == "NotPreserving"


def test_check_malformed(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, report, err = run(["check", str(bad)], capsys)
    assert code == 2 and report is None
    assert "JSONDecodeError" in err


def test_check_invalid_tensor(tmp_path, capsys):
    path = write(tmp_path / "t.json", {"dim": 2, "entries": [{"i": 1, "j": 1, "k": 1, "p": 0.5}]})
    code, _, err = run(["check", path], capsys)
    assert code == 2 and "RowSumViolation" in err


def test_missing_file(capsys):
    code, _, _ = run(["check", "/nonexistent/tensor.json"], capsys)
    assert code == 2


def test_invert_a12(files, capsys, tmp_path):
    out = tmp_path / "x.json"
    code, report, _ = run(["invert", files["a12"], files["target2"], "--out", str(out)], capsys)
    assert code == 0
    np.testing.assert_allclose(report["result"]["solution"]["x"], [0.5, 0.5], atol=1e-12)
    assert report["result"]["solution"]["certified"] is True
    assert json.loads(out.read_text())["x"] == report["result"]["solution"]["x"]


def test_invert_constant_needs_force(files, capsys):
    code, report, err = run(["invert", files["constant"], files["target3"]], capsys)
    assert code == 4
    assert report["result"]["error"] == "NoCertificate"
    code, report, _ = run(["invert", files["constant"], files["target3"], "--force"], capsys)
    assert code == 0
    assert report["result"]["solution"]["certified"] is False


def test_invert_no_convergence(tmp_path, capsys):
    # a tolerance below rounding error cannot be met by any solve
    P = random_volterra(5, seed=3)
    y = evaluate_dqso(P, random_simplex_point(5, seed=4))
    tensor = write(tmp_path / "t.json", io.tensor_to_json(P))
    target = write(tmp_path / "y.json", {"coords": y.tolist()})
    code, report, _ = run(["invert", tensor, target, "--tol", "1e-30", "--max-iter", "2"], capsys)
    assert code == 3
    assert report["result"]["error"] in {"NoConvergence", "EmbeddingResidualFail"}


def test_discretize_canonical(files, capsys):
    code, report, _ = run(["discretize", files["kernel"]], capsys)
    assert code == 0
    entries = {(e["i"], e["j"], e["k"]): e["p"] for e in report["result"]["tensor"]["entries"]}
    assert entries[(1, 1, 1)] == 1.0
    assert entries[(1, 2, 1)] == entries[(1, 2, 2)] == 0.5
    assert (1, 2, 3) not in entries or entries[(1, 2, 3)] == 0.0
    assert report["result"]["escape_cells"] == []


def test_solve_hammerstein_canonical(files, capsys):
    code, report, _ = run(["solve-hammerstein", files["problem"]], capsys)
    assert code == 0
    np.testing.assert_allclose(report["result"]["solution"]["density"], [0.3, 0.7], atol=1e-15)


def test_solve_hammerstein_unnormalized(tmp_path, capsys):
    doc = {
        "partition": {"weights": [1.0, 1.0]},
        "K": [{"i": 1, "j": 1, "k": 1, "value": 0.9}, {"i": 1, "j": 2, "k": 1, "value": 1.0},
              {"i": 2, "j": 2, "k": 2, "value": 1.0}],
        "phi": [0.5, 0.5],
    }
    code, _, err = run(["solve-hammerstein", write(tmp_path / "p.json", doc)], capsys)
    assert code == 2 and "NotNormalized" in err


@pytest.mark.parametrize("command", ["check", "invert"])
def test_reports_are_byte_identical(files, capsys, command):
    argv = ["check", files["constant"], "--seed", "7"] if command == "check" else [
        "invert", files["constant"], files["target3"], "--force", "--seed", "7"]
    main(argv)
    first = capsys.readouterr().out
    main(argv)
    assert capsys.readouterr().out == first


def test_timing_flag(files, capsys):
    _, report, _ = run(["check", files["identity"], "--timing"], capsys)
    assert report["wall_time"] >= 0
    _, report, _ = run(["check", files["identity"]], capsys)
    assert "wall_time" not in report
