import math

import numpy as np
import pytest

from polyplank import (MultiPoly, angular_distance_on_sphere, brute_force_bounds, brute_force_distance,
                       closest_point, closest_point_on_sphere, distance_to_common_zero_set, distance_to_zero_set)
from polyplank.errors import GridTooLargeError
from polyplank.poly import random_poly

from instances import coords


def test_linear_form_closed_form():
    z1, z2 = coords(2)
    rng = np.random.default_rng(0)
    for _ in range(5):
        a, b = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        assert abs(distance_to_zero_set(z1, [a, b]) - abs(a)) < 1e-14
    L = MultiPoly.linear([1 + 1j, 2], 3)
    p = np.array([0.5, -1j])
    assert abs(distance_to_zero_set(L, p) - abs(L(p)) / math.sqrt(6)) < 1e-14


def test_product_of_coordinates():
    z1, z2 = coords(2)
    est = closest_point(z1 * z2, [3, 4])
    assert abs(est.distance - 3) < 1e-9
    assert abs((z1 * z2)(est.point)) < 1e-9


def test_circle_from_origin_against_grid():
    x1, x2 = coords(2, "real")
    circle = x1**2 + x2**2 - 1
    assert abs(distance_to_zero_set(circle, [0, 0]) - 1) < 1e-9
    # dense sign-change grid over [-2, 2]^2
    xs = np.linspace(-2, 2, 2001)
    X, Y = np.meshgrid(xs, xs)
    V = X**2 + Y**2 - 1
    change = (np.sign(V[:-1, :-1]) != np.sign(V[1:, :-1])) | (np.sign(V[:-1, :-1]) != np.sign(V[:-1, 1:]))
    grid = np.min(np.hypot(X[:-1, :-1][change], Y[:-1, :-1][change]))
    assert abs(grid - 1) < 2 * (xs[1] - xs[0]) * math.sqrt(2)


def test_on_variety_gives_zero():
    z1, z2 = coords(2)
    p = z1**2 - z2
    assert distance_to_zero_set(p, [2, 4]) == 0.0
    assert distance_to_zero_set(p, [2, 4 + 1e-14]) == 0.0


def test_one_variable_exact():
    (z,) = coords(1)
    p = (z - 1) * (z - 2j) * (z + 3)
    assert abs(distance_to_zero_set(p, [0.9]) - 0.1) < 1e-12


def test_sphere_examples():
    x1, x2 = coords(2, "real")
    assert abs(angular_distance_on_sphere(x1, [1, 0]) - math.pi / 2) < 1e-12
    assert abs(angular_distance_on_sphere(x1 - 0.5, [1, 0]) - math.pi / 3) < 1e-12
    # lines at angle 0 and pi/4 from the e2-axis; point bisecting them
    c, s = math.cos(math.pi / 4), math.sin(math.pi / 4)
    p = x1 * (c * x1 - s * x2)
    ang = math.pi / 2 - math.pi / 8
    pt = [math.cos(ang), math.sin(ang)]
    est = angular_distance_on_sphere(p, pt)
    ts = np.linspace(0, 2 * np.pi, 100_000, endpoint=False)
    vals = p.evaluate_many(np.column_stack([np.cos(ts), np.sin(ts)])).real
    zeros = ts[np.flatnonzero(np.sign(vals) != np.sign(np.roll(vals, -1)))]
    diff = np.abs((zeros - ang + np.pi) % (2 * np.pi) - np.pi)
    assert abs(est - math.pi / 8) < 1e-10
    assert abs(np.min(diff) - math.pi / 8) < 2 * 2 * np.pi / len(ts)


def test_sphere_empty_zero_set_and_higher_dim():
    x = coords(3, "real")
    p = x[0] ** 2 + x[1] ** 2 + x[2] ** 2 + 1
    assert angular_distance_on_sphere(p, [1, 0, 0]) == math.pi
    est = closest_point_on_sphere(x[0] - 0.5, [0, 0, 1])
    assert abs(est.distance - math.asin(0.5)) < 1e-9
    assert abs(np.linalg.norm(est.point) - 1) < 1e-12


def test_sphere_against_scan_in_3d():
    rng = np.random.default_rng(9)
    for _ in range(3):
        p = random_poly(rng, 3, 2, "real")
        x = rng.standard_normal(3)
        x /= np.linalg.norm(x)
        est = angular_distance_on_sphere(p, x)
        # sample the sphere around x: minimum angle of sign changes along many great circles
        best = math.pi
        for _ in range(400):
            v = rng.standard_normal(3)
            v -= (v @ x) * x
            v /= np.linalg.norm(v)
            ts = np.linspace(0, math.pi, 4001)
            pts = np.cos(ts)[:, None] * x + np.sin(ts)[:, None] * v
            vals = p.evaluate_many(pts).real
            idx = np.flatnonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))
            if idx.size:
                best = min(best, ts[idx[0]])
        assert est <= best + 1e-3


def test_common_zero_examples():
    z1, z2 = coords(2)
    a, b = 0.3 - 1j, 2 + 0.5j
    assert abs(distance_to_common_zero_set([z1, z2], [a, b]) - math.hypot(abs(a), abs(b))) < 1e-9
    p = z1**2 + z2 - 1
    pt = np.array([0.4 + 0.1j, 0.2])
    assert abs(distance_to_common_zero_set([p], pt) - distance_to_zero_set(p, pt)) < 1e-9
    assert abs(distance_to_common_zero_set([z1, z1 * z2], [1, 1]) - 1) < 1e-9


def test_common_zero_monotone():
    rng = np.random.default_rng(13)
    for _ in range(5):
        ps = [random_poly(rng, 2, 2) for _ in range(2)]
        pt = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        common = distance_to_common_zero_set(ps, pt)
        assert common >= max(distance_to_zero_set(p, pt) for p in ps) - 1e-8


def test_lipschitz_consistency():
    rng = np.random.default_rng(14)
    for _ in range(10):
        p = random_poly(rng, 2, int(rng.integers(1, 4)))
        a = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        b = a + 0.1 * (rng.standard_normal(2) + 1j * rng.standard_normal(2))
        da, db = distance_to_zero_set(p, a), distance_to_zero_set(p, b)
        assert abs(da - db) <= np.linalg.norm(a - b) + 1e-6


def test_oracle_examples():
    x1, _ = coords(2, "real")
    assert abs(brute_force_distance(x1, [0.7, 0]) - 0.7) < 2e-3
    (z,) = coords(1)
    assert abs(brute_force_distance(z**2 - 1, [0]) - 1) < 2e-3


def test_oracle_brackets_truth():
    (z,) = coords(1)
    p = (z - 0.3 - 0.4j) * (z + 1)
    b = brute_force_bounds(p, [0.0])
    assert b.lower <= 0.5 <= b.upper
    assert b.upper - b.lower <= 2 * b.diameter


def test_oracle_agrees_with_fast_path():
    rng = np.random.default_rng(15)
    for _ in range(4):
        p = random_poly(rng, 2, 2, "real")
        pt = rng.standard_normal(2)
        fast = distance_to_zero_set(p, pt)
        b = brute_force_bounds(p, pt)
        assert b.lower - 2 * b.diameter <= fast <= b.upper + 2 * b.diameter
    for _ in range(2):
        p = random_poly(rng, 2, 2)
        pt = 0.5 * (rng.standard_normal(2) + 1j * rng.standard_normal(2))
        fast = distance_to_zero_set(p, pt)
        b = brute_force_bounds(p, pt)
        assert b.lower - 2 * b.diameter <= fast <= b.upper + 2 * b.diameter


def test_oracle_rejects_large_dimension():
    z = coords(3)
    with pytest.raises(GridTooLargeError):
        brute_force_distance(z[0], [1, 0, 0])


def test_reported_point_is_on_the_variety():
    rng = np.random.default_rng(16)
    for _ in range(5):
        p = random_poly(rng, 3, 3)
        pt = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        est = closest_point(p, pt)
        assert abs(p(est.point)) <= 1e-9 * p.coefficient_scale * max(1, np.linalg.norm(est.point)) ** 3
        assert abs(np.linalg.norm(est.point - pt) - est.distance) < 1e-12
