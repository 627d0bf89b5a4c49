"""Subspaces on weighted point sets, the uniform-norm constant, and the
evaluation dictionaries behind the sampling experiments."""

import math

import numpy as np
import pytest

from entrobound import (
    DimensionMismatchError,
    GramDefectError,
    MeasureSpace,
    SamplePointSet,
    Subspace,
    build_discretization_dictionary,
    dirichlet_kernel,
    it1_experiment,
    log_ratio_envelope,
    m_p_direct,
    m_p_dual,
    norm,
    random_subspace,
    verify_transfer,
)


# ---------------------------------------------------------------------------
# measure spaces and subspaces

def test_measure_space_validation():
    with pytest.raises(ValueError):
        MeasureSpace(np.array([0.5, 0.6]))
    with pytest.raises(ValueError):
        MeasureSpace(np.array([1.5, -0.5]))
    with pytest.raises(ValueError):
        MeasureSpace(np.array([]))
    mu = MeasureSpace.uniform(4)
    assert mu.size == 4
    assert mu.weights == pytest.approx(np.full(4, 0.25))


def test_measure_space_norm_and_inner():
    mu = MeasureSpace(np.array([0.25, 0.75]))
    f = np.array([2.0, -1.0])
    assert mu.norm(f, 2.0) == pytest.approx(math.sqrt(0.25 * 4 + 0.75))
    assert mu.norm(f, float("inf")) == pytest.approx(2.0)
    assert mu.norm(np.zeros(2), 3.0) == 0.0
    assert mu.inner(f, f) == pytest.approx(0.25 * 4 + 0.75)


def test_subspace_requires_orthonormal_basis():
    mu = MeasureSpace.uniform(3)
    with pytest.raises(GramDefectError):
        Subspace(mu, np.ones((3, 1)) * 2.0)
    with pytest.raises(DimensionMismatchError):
        Subspace(MeasureSpace.uniform(4), np.ones((3, 1)))
    with pytest.raises(ValueError):
        Subspace(mu, np.ones((3, 0)))


def test_random_subspace_is_orthonormal_and_deterministic():
    for measure in (None, MeasureSpace(np.linspace(1, 2, 10) / np.linspace(1, 2, 10).sum())):
        sub = random_subspace(3, 10, seed=5, measure=measure)
        gram = sub.basis.T @ (sub.measure.weights[:, None] * sub.basis)
        assert gram == pytest.approx(np.eye(3), abs=1e-10)
    a = random_subspace(3, 10, seed=5)
    b = random_subspace(3, 10, seed=5)
    assert np.array_equal(a.basis, b.basis)
    with pytest.raises(ValueError):
        random_subspace(11, 10, seed=0)
    with pytest.raises(DimensionMismatchError):
        random_subspace(2, 10, seed=0, measure=MeasureSpace.uniform(8))


def test_subspace_json_round_trip():
    sub = random_subspace(2, 6, seed=6)
    back = Subspace.from_json(sub.to_json())
    assert np.array_equal(back.basis, sub.basis)
    assert np.array_equal(back.measure.weights, sub.measure.weights)


def test_sample_point_set_validation():
    with pytest.raises(ValueError):
        SamplePointSet(np.array([1, 1, 2]))
    with pytest.raises(ValueError):
        SamplePointSet(np.array([-1, 0]))
    with pytest.raises(ValueError):
        SamplePointSet(np.array([], dtype=int))
    pts = SamplePointSet(np.array([4, 0, 2]))
    assert pts.count == 3


# ---------------------------------------------------------------------------
# reproducing kernel

def test_dirichlet_kernel_reproduces_point_evaluation():
    sub = random_subspace(4, 12, seed=7)
    K = dirichlet_kernel(sub)
    assert K == pytest.approx(K.T, abs=1e-12)
    # weighted trace counts the dimension
    assert float(sub.measure.weights @ np.diag(K)) == pytest.approx(4.0, abs=1e-10)
    rng = np.random.default_rng(8)
    for _ in range(5):
        f = sub.evaluate(rng.standard_normal(4))
        for x in (0, 5, 11):
            assert sub.measure.inner(f, K[x]) == pytest.approx(f[x], abs=1e-10)


# ---------------------------------------------------------------------------
# the uniform-norm constant

def test_m_p_is_one_for_constants():
    # the constant function has equal sup and L_p norms for every p
    sub = Subspace(MeasureSpace.uniform(2), np.ones((2, 1)))
    for p in (2.0, 3.0, 4.0):
        assert m_p_direct(sub, p) == pytest.approx(1.0, abs=1e-9)
        assert m_p_dual(sub, p) == pytest.approx(1.0, abs=1e-9)


def test_m_p_of_the_full_space_is_the_support_size_root():
    sub = random_subspace(6, 6, seed=9)
    for p in (2.0, 3.0, 4.0):
        assert m_p_direct(sub, p) == pytest.approx(6.0 ** (1.0 / p), rel=1e-7)


def test_m_p_is_nonincreasing_in_p_and_at_least_one():
    # ||f||_p grows with p under a probability measure, so the ratio
    # sup over L_p shrinks
    for seed in (10, 11):
        sub = random_subspace(3, 24, seed=seed)
        values = [m_p_dual(sub, p) for p in (2.0, 3.0, 4.0)]
        assert values[0] >= values[1] >= values[2] - 1e-9
        assert values[-1] >= 1.0 - 1e-9


def test_m_p_routes_agree():
    sub = random_subspace(4, 40, seed=12)
    assert abs(m_p_direct(sub, 2.0) - m_p_dual(sub, 2.0)) <= 1e-6
    assert abs(m_p_direct(sub, 3.0) - m_p_dual(sub, 3.0)) <= 1e-4


def test_m_p_rejects_small_exponents():
    sub = random_subspace(2, 8, seed=13)
    with pytest.raises(ValueError):
        m_p_direct(sub, 1.5)
    with pytest.raises(ValueError):
        m_p_dual(sub, 1.5)


# ---------------------------------------------------------------------------
# evaluation dictionaries

@pytest.mark.parametrize("p", [2.0, 3.0])
def test_built_dictionary_invariants(p):
    sub = random_subspace(3, 20, seed=14)
    pts = SamplePointSet(np.arange(0, 20, 4))
    ddict = build_discretization_dictionary(sub, pts, p)
    mu = sub.measure.weights
    pp = p / (p - 1.0)
    # w_j acts as point evaluation on the basis
    repro = sub.basis.T @ (mu[:, None] * ddict.w_vectors.T)
    assert repro == pytest.approx(sub.basis[pts.indices].T, abs=1e-8)
    assert np.all(ddict.w_norms <= 2.0 * ddict.m_p + 1e-6)
    for j in range(ddict.count):
        assert sub.measure.norm(ddict.atoms[:, j], pp) == pytest.approx(1.0, abs=1e-9)
    u_dict = ddict.u_dictionary()
    assert u_dict.size == pts.count
    f = sub.evaluate(np.array([1.0, -0.5, 2.0]))
    assert ddict.norm_u(f) == pytest.approx(
        float(np.abs((mu * f) @ ddict.atoms).max()), abs=1e-12)


def test_hilbert_case_uses_kernel_rows():
    sub = random_subspace(3, 16, seed=15)
    pts = SamplePointSet(np.array([1, 7, 13]))
    ddict = build_discretization_dictionary(sub, pts, 2.0)
    K = dirichlet_kernel(sub)
    assert ddict.w_vectors == pytest.approx(K[pts.indices], abs=1e-12)


def test_build_rejects_out_of_range_points():
    sub = random_subspace(2, 8, seed=16)
    with pytest.raises(ValueError):
        build_discretization_dictionary(sub, SamplePointSet(np.array([8])), 2.0)


@pytest.mark.parametrize("p", [2.0, 4.0])
def test_transfer_inequality_holds_on_random_functions(p):
    sub = random_subspace(4, 32, seed=17)
    pts = SamplePointSet(np.arange(0, 32, 2))
    ddict = build_discretization_dictionary(sub, pts, p)
    report = verify_transfer(sub, ddict, trials=200, seed=18)
    assert report.violations == 0
    assert report.trials == 200
    assert 0.0 < report.max_ratio <= 1.0 + 1e-12
    assert report.bound == pytest.approx(2.0 * ddict.m_p)


# ---------------------------------------------------------------------------
# the subspace entropy experiment

def test_it1_frozen_instance():
    rng = np.random.default_rng(0)
    sub = random_subspace(8, 256, int(rng.integers(2 ** 31)))
    pts = SamplePointSet(np.sort(rng.choice(256, 64, replace=False)))
    res = it1_experiment(sub, pts, 2.0, [8, 16, 32, 64], seed=0,
                         cover_sample_size=320)
    assert res.m_p == pytest.approx(5.091072268098098, abs=1e-9)
    assert res.upper_ratio == pytest.approx(
        [1.414213562373095, 2.1015292794606046, 1.336052258988617,
         0.5231386747092405], abs=1e-9)
    assert res.spread == pytest.approx(4.017155261229025, abs=1e-8)
    envelope = res.m_p * log_ratio_envelope(64, np.array([8.0, 16.0, 32.0, 64.0]), 0.5)
    assert res.envelope == pytest.approx(envelope, abs=1e-12)
    assert np.all(res.profile.lower <= res.profile.upper + 1e-12)


def test_it1_uppers_never_exceed_the_trivial_radius():
    rng = np.random.default_rng(19)
    sub = random_subspace(2, 24, int(rng.integers(2 ** 31)))
    pts = SamplePointSet(np.sort(rng.choice(24, 8, replace=False)))
    res = it1_experiment(sub, pts, 2.0, [3, 5, 8], seed=2, cover_sample_size=64,
                         witness_size=64)
    assert np.all(res.profile.upper <= res.m_p + 1e-12)
    for src in res.profile.upper_source:
        assert src in ("trivial", "sparse-cover")


def test_it1_validates_k_list():
    sub = random_subspace(2, 16, seed=20)
    pts = SamplePointSet(np.arange(8))
    with pytest.raises(ValueError):
        it1_experiment(sub, pts, 2.0, [9])
    with pytest.raises(ValueError):
        it1_experiment(sub, pts, 2.0, [])
    with pytest.raises(ValueError):
        it1_experiment(sub, pts, 1.0, [4])
