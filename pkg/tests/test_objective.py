import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polyplank import MultiPoly, PlankInstance, log_objective, log_objective_gradient
from polyplank.errors import (BudgetError, DimensionMismatchError, DomainError, OnVarietyError, PlankError,
                              ZeroPolynomialError)
from polyplank.objective import (EXPLORATORY_SPHERE_BUDGET, SPHERE_BUDGET, complex_to_real, effective_radius,
                                 log_product_batch, real_to_complex)
from polyplank.poly import random_poly

from instances import complex_instance, coords, random_orthogonal, random_unitary, sphere_instance


def test_complex_objective_examples():
    (z1, z2) = coords(2)
    inst = PlankInstance.complex_ball([z1], [1.0], 1.0)
    assert log_objective(inst, [1, 0]) == -0.5
    assert log_objective(inst, [0, 0.3]) == -math.inf
    delta = 0.6
    inst = PlankInstance.complex_ball([z1, z2], [delta, delta], 1.0)
    a = 0.3 - 0.4j
    expected = -abs(a) ** 2 + 2 * delta**2 * math.log(abs(a))
    assert abs(log_objective(inst, [a, a]) - expected) < 1e-12


def test_sphere_objective_example():
    x1, x2 = coords(2, "real")
    inst = PlankInstance.real_sphere([x1, x2], [0.1, 0.2])
    t = 0.4
    expected = 0.1 * math.log(math.cos(t)) + 0.2 * math.log(math.sin(t))
    assert abs(log_objective(inst, [math.cos(t), math.sin(t)]) - expected) < 1e-14
    with pytest.raises(DomainError):
        log_objective(inst, [1.0, 1.0])


def test_gradient_examples():
    (z1, _) = coords(2)
    inst = PlankInstance.complex_ball([z1], [1.0], 2.0)
    g = log_objective_gradient(inst, [2, 0])
    assert np.allclose(g, [-1.5, 0])
    x = coords(3, "real")
    inst = PlankInstance.real_sphere([x[0]], [SPHERE_BUDGET])
    assert np.allclose(log_objective_gradient(inst, [1, 0, 0]), 0)
    with pytest.raises(OnVarietyError) as info:
        log_objective_gradient(inst, [0, 1, 0])
    assert info.value.index == 0


def _fd_complex(inst, z, h=1e-6):
    out = np.zeros(len(z), dtype=complex)
    for j in range(len(z)):
        e = np.zeros(len(z), dtype=complex)
        e[j] = h
        dx = (log_objective(inst, z + e) - log_objective(inst, z - e)) / (2 * h)
        dy = (log_objective(inst, z + 1j * e) - log_objective(inst, z - 1j * e)) / (2 * h)
        out[j] = dx + 1j * dy
    return out


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_complex_gradient_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    inst = complex_instance(rng)
    z = (rng.standard_normal(inst.dimension) + 1j * rng.standard_normal(inst.dimension)) * 0.5
    g = log_objective_gradient(inst, z)
    fd = _fd_complex(inst, z)
    assert np.linalg.norm(g - fd) <= 1e-5 * max(1.0, np.linalg.norm(g))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_sphere_gradient_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    inst = sphere_instance(rng)
    d = inst.dimension
    x = rng.standard_normal(d)
    x /= np.linalg.norm(x)
    g = log_objective_gradient(inst, x)
    assert abs(g @ x) < 1e-12
    # derivative along geodesics in two tangent directions
    h = 1e-6
    for _ in range(2):
        v = rng.standard_normal(d)
        v -= (v @ x) * x
        v /= np.linalg.norm(v)
        fp = log_objective(inst, math.cos(h) * x + math.sin(h) * v)
        fm = log_objective(inst, math.cos(h) * x - math.sin(h) * v)
        fd = (fp - fm) / (2 * h)
        assert abs(fd - g @ v) <= 1e-5 * max(1.0, np.linalg.norm(g))


def test_effective_radius_examples():
    z = coords(3)
    assert effective_radius(PlankInstance.complex_ball([z[0]], [1.0], 1.0)) == 1.0
    inst = PlankInstance.complex_ball([z[0] ** 2, z[1]], [0.5, 0.5], 1.0)
    assert abs(effective_radius(inst) - math.sqrt(3) / 2) < 1e-15
    R = 2.5
    inst = PlankInstance.complex_ball(z, [R / math.sqrt(3)] * 3, R)
    assert abs(effective_radius(inst) - R) < 1e-12
    x = coords(2, "real")
    with pytest.raises(DomainError):
        effective_radius(PlankInstance.real_sphere([x[0]], [0.1]))


def test_budget_violation_reports_values():
    z1, _ = coords(2)
    with pytest.raises(BudgetError) as info:
        PlankInstance.complex_ball([z1**2], [1.0], 1.0)
    assert info.value.budget == 2.0 and info.value.limit == 1.0
    assert "2.0" in str(info.value) and "1.0" in str(info.value)
    inst = PlankInstance.complex_ball([z1**2], [1.0], 1.0, exploratory=True)
    assert inst.budget == 2.0
    x = coords(2, "real")
    with pytest.raises(BudgetError):
        PlankInstance.real_sphere([x[0]], [0.5])
    PlankInstance.real_sphere([x[0]], [0.5], exploratory=True)
    with pytest.raises(BudgetError):
        PlankInstance.real_sphere([x[0]], [EXPLORATORY_SPHERE_BUDGET + 0.01], exploratory=True)


def test_budget_slack_absorbs_rounding():
    z = coords(3)
    PlankInstance.complex_ball(z, [1 / math.sqrt(3)] * 3, 1.0)
    PlankInstance.complex_ball(z, [math.sqrt(1 / 3 + 1e-13)] * 3, 1.0)


def test_constructor_rejections():
    z1, _ = coords(2)
    with pytest.raises(ZeroPolynomialError) as info:
        PlankInstance.complex_ball([z1, MultiPoly({}, 2, "complex")], [0.1, 0.1], 1.0)
    assert info.value.index == 1
    with pytest.raises(DimensionMismatchError):
        PlankInstance.complex_ball([z1, coords(3)[0]], [0.1, 0.1], 1.0)
    with pytest.raises(PlankError):
        PlankInstance.complex_ball([z1], [-0.1], 1.0)
    with pytest.raises(PlankError):
        PlankInstance.real_sphere([z1], [0.1])
    x1, x2 = coords(2, "real")
    # x1^2 + x2^2 - 1 vanishes on the whole circle
    with pytest.raises(PlankError):
        PlankInstance.real_sphere([x1**2 + x2**2 - 1], [0.1])


def test_real_polys_promoted_in_ball_mode():
    x1, _ = coords(2, "real")
    inst = PlankInstance.complex_ball([x1], [1.0], 1.0)
    assert inst.field == "complex" and inst.polys[0].field == "complex"


def test_instance_json_round_trip():
    rng = np.random.default_rng(4)
    for inst in (complex_instance(rng), sphere_instance(rng)):
        back = PlankInstance.from_json(json.loads(json.dumps(inst.to_json())))
        assert back == inst


def test_instance_json_errors_name_the_item():
    z1, _ = coords(2)
    data = PlankInstance.complex_ball([z1, z1 + 1], [0.5, 0.5], 1.0).to_json()
    data["items"][1]["poly"]["terms"] = []
    with pytest.raises(ZeroPolynomialError) as info:
        PlankInstance.from_json(data)
    assert "item 1" in str(info.value)
    data = PlankInstance.complex_ball([z1], [0.5], 1.0).to_json()
    del data["items"][0]["delta"]
    with pytest.raises(PlankError, match=r"items\[0\]"):
        PlankInstance.from_json(data)


def test_real_complex_packing():
    z = np.array([1 + 2j, -3 + 0.5j])
    r = complex_to_real(z)
    assert np.allclose(r, [1, 2, -3, 0.5])
    assert np.allclose(real_to_complex(r), z)


def test_unitary_invariance():
    rng = np.random.default_rng(21)
    for _ in range(10):
        inst = complex_instance(rng)
        d = inst.dimension
        U = random_unitary(rng, d)
        moved = PlankInstance.complex_ball([p.compose_linear(U.conj().T) for p in inst.polys], inst.deltas,
                                           inst.radius)
        z = 0.5 * (rng.standard_normal(d) + 1j * rng.standard_normal(d))
        assert abs(log_objective(moved, U @ z) - log_objective(inst, z)) < 1e-10


def test_rotation_invariance():
    rng = np.random.default_rng(22)
    for _ in range(10):
        inst = sphere_instance(rng)
        d = inst.dimension
        Q = random_orthogonal(rng, d)
        moved = PlankInstance.real_sphere([p.compose_linear(Q.T) for p in inst.polys], inst.deltas)
        x = rng.standard_normal(d)
        x /= np.linalg.norm(x)
        assert abs(log_objective(moved, Q @ x) - log_objective(inst, x)) < 1e-10


def test_homogeneous_rays_peak_at_effective_radius():
    rng = np.random.default_rng(23)
    for _ in range(5):
        d = int(rng.integers(1, 4))
        polys = [random_poly(rng, d, int(rng.integers(1, 4))) for _ in range(2)]
        polys = [MultiPoly({e: c for e, c in p.terms.items() if sum(e) == p.degree}, d, "complex")
                 for p in polys]
        inst = PlankInstance.complex_ball(polys, [0.4, 0.3], 1.0)
        r_eff = effective_radius(inst)
        u = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        u /= np.linalg.norm(u)
        rs = np.linspace(1e-3, 2.0, 40001)
        vals, _ = log_product_batch(inst.polys, inst.weights, rs[:, None] * u, gaussian=True, with_grad=False)
        assert abs(rs[int(np.argmax(vals))] - r_eff) < 1e-4
