import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qso import (
    GeometryMissing,
    NoCertificate,
    NotProbability,
    OverlapOutOfRange,
    Partition,
    PartitionMismatch,
    Status,
    TransitionKernel,
    apply_qso,
    canonical_kernel,
    check_escape_sets,
    check_projective_surjectivity,
    consistency_check,
    discretize_kernel,
    escape_free_kernel,
    measure_of_set,
    partition_measure,
    quadrature_discretize,
    qso_measure_of_set,
    solve_projective_preimage,
)
from qso.generators import random_pi_volterra, random_stochastic


def kernel_of(tensor, partition):
    return TransitionKernel(partition, tensor.to_dense())


def constant_kernel(partition, m):
    d = partition.size
    return TransitionKernel(partition, np.broadcast_to(np.asarray(m, float), (d, d, d)))


@pytest.fixture
def unit2():
    return Partition.from_edges([0.0, 1.0, 2.0])


@pytest.fixture
def a12_kernel(unit2, volterra_a12):
    return kernel_of(volterra_a12, unit2)


def test_partition_validation():
    with pytest.raises(ValueError):
        Partition([1.0, 0.0])
    with pytest.raises(ValueError):
        Partition([1.0, np.inf])
    with pytest.raises(ValueError):
        Partition([1.0, 1.0], intervals=[[0, 1], [0.5, 1.5]])
    with pytest.raises(ValueError):
        Partition([1.0, 2.0], intervals=[[0, 1], [1, 2]])


def test_partition_measure_examples():
    part = Partition([1.0, 2.0])
    mu = partition_measure(part, [0.5, 0.5])
    assert measure_of_set(mu, [1.0, 0.0]) == 0.5
    with pytest.raises(NotProbability) as exc:
        partition_measure(part, [0.5, 0.4])
    assert exc.value.mass == pytest.approx(0.9)
    # 0.5 * 0.5 / 1 + 0.5 * 1 / 2
    assert measure_of_set(mu, [0.5, 1.0]) == pytest.approx(0.5)


def test_measure_of_set_examples():
    part = Partition([1.0, 2.0])
    mu = partition_measure(part, [0.3, 0.7])
    assert measure_of_set(mu, part.weights) == pytest.approx(1.0)
    assert measure_of_set(mu, [1.0, 0.0]) == pytest.approx(0.3)
    nu = partition_measure(Partition([2.0, 2.0]), [1.0, 0.0])
    assert measure_of_set(nu, [1.0, 2.0]) == pytest.approx(0.5)
    with pytest.raises(OverlapOutOfRange):
        measure_of_set(mu, [1.5, 0.0])
    with pytest.raises(OverlapOutOfRange):
        measure_of_set(mu, [-0.5, 0.0])


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), d=st.integers(1, 8))
def test_measure_additive_and_monotone(seed, d):
    rng = np.random.default_rng(seed)
    part = Partition(rng.uniform(0.1, 3.0, d))
    mu = partition_measure(part, rng.dirichlet(np.ones(d)))
    a = rng.uniform(0, 1, d) * part.weights
    b = rng.uniform(0, 1, d) * (part.weights - a)
    # A and B disjoint inside each cell
    assert measure_of_set(mu, a + b) == pytest.approx(measure_of_set(mu, a) + measure_of_set(mu, b), abs=1e-14)
    assert measure_of_set(mu, a) <= measure_of_set(mu, a + b) + 1e-15
    assert 0 <= measure_of_set(mu, a) <= 1 + 1e-15


def test_canonical_discretization_pattern():
    part = Partition([0.5, 1.0, 2.0, 0.25])
    P = discretize_kernel(canonical_kernel(part))
    dense = P.to_dense()
    for n in range(4):
        for m in range(4):
            for k in range(4):
                if n == m == k:
                    expected = 1.0
                elif k in (n, m):
                    expected = 0.5
                else:
                    expected = 0.0
                assert dense[n, m, k] == expected


def test_constant_kernel_discretizes_to_constant(unit2):
    P = discretize_kernel(constant_kernel(unit2, [0.3, 0.7]))
    np.testing.assert_array_equal(P.to_dense(), np.broadcast_to([0.3, 0.7], (2, 2, 2)))


def test_block_value_copied(unit2):
    k = TransitionKernel.from_pairs(unit2, {(0, 0): [1, 0], (0, 1): [1, 0], (1, 1): [0, 1]})
    P = discretize_kernel(k)
    assert P.entry(0, 1, 0) == 1.0 and P.entry(0, 1, 1) == 0.0


def test_from_pairs_requires_all_blocks(unit2):
    with pytest.raises(ValueError):
        TransitionKernel.from_pairs(unit2, {(0, 0): [1, 0], (1, 1): [0, 1]})


def test_apply_canonical_is_identity():
    part = Partition([1.0, 3.0, 0.5])
    mu = partition_measure(part, [0.2, 0.5, 0.3])
    np.testing.assert_allclose(apply_qso(canonical_kernel(part), mu).masses, mu.masses, atol=1e-16)


def test_apply_constant_kernel(unit2):
    mu = partition_measure(unit2, [0.9, 0.1])
    np.testing.assert_allclose(apply_qso(constant_kernel(unit2, [0.3, 0.7]), mu).masses, [0.3, 0.7])


def test_apply_a12_kernel(a12_kernel, unit2):
    out = apply_qso(a12_kernel, partition_measure(unit2, [0.5, 0.5]))
    np.testing.assert_allclose(out.masses, [0.75, 0.25], atol=1e-15)


def test_apply_partition_mismatch(a12_kernel):
    with pytest.raises(PartitionMismatch):
        apply_qso(a12_kernel, partition_measure(Partition([1.0, 2.0]), [0.5, 0.5]))


def test_consistency_examples(unit2):
    part = Partition([1.0, 2.0, 3.0])
    assert consistency_check(canonical_kernel(part), [1 / 3, 1 / 3, 1 / 3]) <= 1e-14
    assert consistency_check(constant_kernel(unit2, [0.4, 0.6]), [0.1, 0.9]) <= 1e-15
    rng = np.random.default_rng(0)
    part = Partition(rng.uniform(0.1, 2, 10))
    k = kernel_of(random_stochastic(10, seed=rng), part)
    assert consistency_check(k, rng.dirichlet(np.ones(10))) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), d=st.integers(2, 6))
def test_image_is_partition_measure(seed, d):
    # the image charges any set A in proportion to its overlap with each cell
    rng = np.random.default_rng(seed)
    part = Partition(rng.uniform(0.1, 2, d))
    k = kernel_of(random_stochastic(d, seed=rng), part)
    mu = partition_measure(part, rng.dirichlet(np.ones(d)))
    out = apply_qso(k, mu)
    assert abs(out.masses.sum() - 1) <= 1e-12
    overlaps = rng.uniform(0, 1, d) * part.weights
    assert qso_measure_of_set(k, mu, overlaps) == pytest.approx(measure_of_set(out, overlaps), abs=1e-13)


def test_canonical_blocks():
    part = Partition([1.0, 2.0, 3.0])
    b = canonical_kernel(part).blocks
    np.testing.assert_array_equal(b[0, 1], [0.5, 0.5, 0.0])
    np.testing.assert_array_equal(b[2, 2], [0.0, 0.0, 1.0])
    np.testing.assert_array_equal(b.sum(axis=2), np.ones((3, 3)))


def test_escape_sets(unit2, a12_kernel):
    part = Partition([1.0, 1.0, 1.0])
    assert check_escape_sets(canonical_kernel(part)) == []
    assert check_escape_sets(constant_kernel(part, [0.2, 0.3, 0.5])) == [0, 1, 2]
    assert check_escape_sets(a12_kernel) == []


def test_projective_surjectivity(a12_kernel):
    part = Partition([1.0, 2.0, 0.5])
    v = check_projective_surjectivity(canonical_kernel(part))
    assert v.status is Status.SURJECTIVE and v.certificate == {"sequence": (0, 1, 2)}
    assert check_projective_surjectivity(constant_kernel(part, [0.2, 0.3, 0.5])).status is Status.NOT_SURJECTIVE
    v = check_projective_surjectivity(a12_kernel)
    assert v.status is Status.SURJECTIVE and v.sequence == (0, 1)


def test_solve_projective_preimage(unit2, a12_kernel):
    mu = solve_projective_preimage(canonical_kernel(unit2), partition_measure(unit2, [0.3, 0.7]))
    np.testing.assert_allclose(mu.masses, [0.3, 0.7])
    mu = solve_projective_preimage(a12_kernel, partition_measure(unit2, [0.75, 0.25]))
    np.testing.assert_allclose(mu.masses, [0.5, 0.5], atol=1e-12)
    with pytest.raises(NoCertificate):
        solve_projective_preimage(constant_kernel(unit2, [0.3, 0.7]), partition_measure(unit2, [0.5, 0.5]))


def test_escape_free_kernel_is_canonical():
    rng = np.random.default_rng(3)
    part = Partition(rng.uniform(0.1, 5, 5))
    np.testing.assert_array_equal(escape_free_kernel(part).blocks, canonical_kernel(part).blocks)


def test_escape_free_kernel_needs_label_symmetry():
    # the a12 Volterra kernel also has empty escape sets
    with pytest.raises(ValueError):
        escape_free_kernel(Partition([1.0, 1.0]), label_symmetric=False)
    # with one cell there is no off-diagonal block to leave free
    np.testing.assert_array_equal(escape_free_kernel(Partition([2.0]), label_symmetric=False).blocks, [[[1.0]]])


def test_quadrature_requires_geometry():
    with pytest.raises(GeometryMissing):
        quadrature_discretize(lambda u, v: np.ones(u.shape + (2,)) / 2, Partition([1.0, 1.0]))


@pytest.mark.parametrize("n_nodes", [1, 3, 8])
def test_quadrature_block_constant_is_exact(n_nodes):
    part = Partition.from_edges([0.0, 0.5, 2.0, 2.5])
    P, _ = random_pi_volterra(3, seed=1)
    dense = P.to_dense()
    edges = np.array([0.0, 0.5, 2.0, 2.5])

    def fn(u, v):
        return dense[np.searchsorted(edges, u, "right") - 1, np.searchsorted(edges, v, "right") - 1]

    res = quadrature_discretize(fn, part, n_nodes=n_nodes)
    # averaging identical node values is exact up to rounding
    expected = discretize_kernel(TransitionKernel(part, dense)).to_dense()
    np.testing.assert_allclose(res.tensor.to_dense(), expected, rtol=0, atol=1e-15)
    assert np.max(res.deltas) <= 1e-15


def test_quadrature_smooth_kernel_converges():
    # f(u, v) = u^2 v^2 on [0, 1]^2 split at 1/2; block averages of u^2 are
    # (1/12, 7/12), exact oracle for comparison
    part = Partition.from_edges([0.0, 0.5, 1.0])
    c, dd = np.array([0.9, 0.1]), np.array([0.2, 0.8])

    def fn(u, v):
        f = (u * v) ** 2
        return f[..., None] * c + (1 - f)[..., None] * dd

    avg = np.array([1 / 12, 7 / 12])
    f_ij = np.outer(avg, avg)
    exact = f_ij[..., None] * c + (1 - f_ij)[..., None] * dd
    errs = [np.abs(quadrature_discretize(fn, part, n_nodes=n).raw - exact).max() for n in (4, 8, 16)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-3
    # midpoint rule is second order
    assert errs[1] / errs[2] == pytest.approx(4.0, rel=0.05)
