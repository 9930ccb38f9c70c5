import math
import warnings
from itertools import combinations

import numpy as np
import pytest

from polyplank import (VectorConfig, dual_basis, many_vectors_witness, polarization_witness,
                       span_avoidance_witness, steinhaus_witness)
from polyplank.corollaries import distance_to_line, distance_to_span, hermitian
from polyplank.errors import DimensionMismatchError, PlankError, RankDeficientError

from instances import random_unitary, unit_rows


def test_hermitian_convention():
    assert hermitian([1j, 0], [1, 0]) == 1j
    assert hermitian([1, 0], [1j, 0]) == -1j


def test_vector_config_validation():
    with pytest.raises(PlankError, match="vector 1"):
        VectorConfig([[1, 0], [1, 1]])
    vc = VectorConfig.from_json({"d": 2, "vectors": [[[1, 0], [1, 0]]]}, normalize=True)
    assert abs(np.linalg.norm(vc.vectors[0]) - 1) < 1e-15
    with pytest.raises(DimensionMismatchError):
        VectorConfig.from_json({"d": 3, "vectors": [[[1, 0], [0, 0]]]})
    back = VectorConfig.from_json(vc.to_json())
    assert np.array_equal(back.vectors, vc.vectors)


def test_dual_basis_examples():
    assert np.allclose(dual_basis(np.eye(3)), np.eye(3))
    V = np.array([[1, 0], [1 / math.sqrt(2), 1 / math.sqrt(2)]])
    W = dual_basis(V)
    assert np.allclose(W[0], [1, -1]) and np.allclose(W[1], [0, math.sqrt(2)])
    rng = np.random.default_rng(0)
    for d in range(1, 6):
        V = unit_rows(rng, d, d)
        W = dual_basis(V)
        gram = np.array([[hermitian(v, w) for w in W] for v in V])
        assert np.max(np.abs(gram - np.eye(d))) < 1e-9
        assert np.all(np.linalg.norm(W, axis=1) >= 1 - 1e-9)
        assert np.allclose(dual_basis(W), V, atol=1e-8)


def test_dual_basis_rank_deficient():
    V = np.array([[1, 0, 0], [0, 1, 0], [1 / math.sqrt(2), 1 / math.sqrt(2), 0]])
    with pytest.raises(RankDeficientError) as info:
        dual_basis(V)
    assert info.value.rank == 2


def test_steinhaus_orthonormal_and_one_dim():
    for d in (1, 2, 5):
        res = steinhaus_witness(np.eye(d))
        assert abs(res.norm_sq - d) < 1e-12
        assert all(abs(abs(hermitian(v, res.q)) - 1 / math.sqrt(d)) < 1e-12 for v in np.eye(d))
    v = np.array([[np.exp(0.3j)]])
    res = steinhaus_witness(v)
    assert abs(abs(hermitian(v[0], res.q)) - 1) < 1e-15


def test_steinhaus_against_phase_grid():
    v1 = np.array([1, 0], dtype=complex)
    v2 = np.array([math.cos(0.4), math.sin(0.4) * np.exp(0.7j)])
    V = np.array([v1, v2])
    res = steinhaus_witness(V, restarts=0)
    assert res.norm_sq >= 2
    W = dual_basis(V)
    phases = np.exp(2j * np.pi * np.arange(360) / 360)
    U = phases[:, None, None] * W[0] + phases[None, :, None] * W[1]
    grid_best = np.max(np.sum(np.abs(U) ** 2, axis=-1))
    assert res.norm_sq >= grid_best - 1e-3
    assert res.max_inner <= 1 / math.sqrt(res.norm_sq) + 1e-12


def test_steinhaus_random_meets_mean():
    rng = np.random.default_rng(1)
    for _ in range(20):
        d = int(rng.integers(1, 7))
        V = unit_rows(rng, d, d)
        res = steinhaus_witness(V, restarts=0)
        assert res.norm_sq >= np.sum(np.abs(dual_basis(V)) ** 2) - 1e-9
        assert res.norm_sq >= d - 1e-9


def test_span_avoidance_orthonormal():
    for d in range(2, 7):
        res = span_avoidance_witness(np.eye(d), 1)
        assert abs(res.min_distance - math.sqrt((d - 1) / d)) < 1e-8
    for d in (2, 3, 4):
        res = span_avoidance_witness(np.eye(d), d - 1)
        assert abs(res.min_distance - math.sqrt(1 / d)) < 1e-8


def test_span_avoidance_random_with_projection_check():
    rng = np.random.default_rng(2)
    for _ in range(4):
        V = unit_rows(rng, 3, 3)
        for k in (1, 2):
            res = span_avoidance_witness(V, k)
            assert res.min_distance >= math.sqrt((3 - k) / 3) - 1e-6
            # second route: least squares residual
            ls = []
            for s in combinations(range(3), k):
                A = V[list(s)].T
                coef = np.linalg.lstsq(A, res.q, rcond=None)[0]
                ls.append(np.linalg.norm(res.q - A @ coef))
            assert abs(min(ls) - res.min_distance) < 1e-12


def test_span_avoidance_dependent_vectors():
    V = np.array([[1, 0, 0], [0, 1, 0], [1 / math.sqrt(2), 1j / math.sqrt(2), 0]])
    res = span_avoidance_witness(V, 2)
    assert abs(res.min_distance - 1) < 1e-12
    assert "dependent" in res.note


def test_span_avoidance_unitary_invariance():
    rng = np.random.default_rng(3)
    V = unit_rows(rng, 3, 3)
    U = random_unitary(rng, 3)
    a = span_avoidance_witness(V, 1)
    b = span_avoidance_witness(V @ U.T, 1)
    assert abs(a.min_distance - b.min_distance) < 1e-8


def test_span_avoidance_argument_checks():
    with pytest.raises(PlankError):
        span_avoidance_witness(np.eye(3), 3)
    with pytest.raises(DimensionMismatchError):
        span_avoidance_witness(np.eye(3)[:2], 1)


def test_many_vectors_examples():
    for d in (2, 3, 4):
        res = many_vectors_witness(np.eye(d))
        assert abs(res.min_distance - math.sqrt((d - 1) / d)) < 1e-8
    w = np.exp(2j * np.pi / 3)
    V = np.array([[1, 1], [1, w], [1, w * w]]) / math.sqrt(2)
    res = many_vectors_witness(V)
    assert res.min_distance >= math.sqrt(1 / 3) - 1e-6
    # fine scan of the sphere in C^2 modulo global phase: (cos a, sin a e^{ib})
    a, b = np.meshgrid(np.linspace(0, np.pi / 2, 801), np.linspace(0, 2 * np.pi, 1601))
    Q = np.stack([np.cos(a), np.sin(a) * np.exp(1j * b)], axis=-1)
    dist = np.min([np.sqrt(1 - np.abs(Q @ v.conj()) ** 2) for v in V], axis=0)
    assert res.min_distance >= dist.max() - 1e-3


def test_many_vectors_errors_and_cap():
    with pytest.raises(PlankError):
        many_vectors_witness(np.eye(3)[:2])
    rng = np.random.default_rng(4)
    with pytest.raises(PlankError, match="cap"):
        many_vectors_witness(unit_rows(rng, 13, 2))
    many_vectors_witness(unit_rows(rng, 13, 2), max_n=13)


def test_many_vectors_degenerate_input_warns():
    V = np.array([[1, 0], [0, 1], [1, 0]], dtype=complex)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        res = many_vectors_witness(V)
    assert any("general position" in str(w.message) for w in caught)
    assert "perturbed" in res.note
    assert res.min_distance >= math.sqrt(1 / 3) - 1e-6


def test_many_vectors_duplicate_does_not_increase_distance():
    rng = np.random.default_rng(5)
    V = unit_rows(rng, 3, 2)
    base = many_vectors_witness(V)
    dup = V[0] + 1e-6 * np.array([1, -1j])
    more = many_vectors_witness(np.vstack([V, dup / np.linalg.norm(dup)]))
    assert more.min_distance <= base.min_distance + 1e-6


def test_polarization_examples():
    res = polarization_witness(np.array([[1.0]]))
    assert abs(res.value - 1) < 1e-12
    res = polarization_witness(np.eye(2))
    assert abs(res.value - 0.5) < 1e-10
    assert np.allclose(np.abs(res.x), [2**-0.5] * 2, atol=1e-6)


def test_polarization_random():
    rng = np.random.default_rng(6)
    for _ in range(6):
        d = int(rng.integers(1, 4))
        U = unit_rows(rng, d, d)
        Y = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        Y /= np.maximum(1, np.linalg.norm(Y, axis=1, keepdims=True))
        res = polarization_witness(U, Y)
        direct = np.prod([abs(hermitian(res.x - y, u)) for u, y in zip(U, Y)])
        assert abs(direct - res.value) < 1e-12
        assert res.value >= d ** (-d / 2) - 1e-9


def test_distance_helpers():
    q = np.array([1, 1j]) / math.sqrt(2)
    assert abs(distance_to_line(q, np.array([1, 0])) - 1 / math.sqrt(2)) < 1e-15
    assert abs(distance_to_span(q, [np.array([1, 0])]) - 1 / math.sqrt(2)) < 1e-15
    assert distance_to_span(q, np.eye(2)) < 1e-15
