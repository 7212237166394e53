import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from scvquad.grid import (
    NodeSet,
    SubcubeIndex,
    UnisolvenceError,
    monomial_matrix,
    poly_dim,
    regular_nodes,
    shifted_nodes,
    subcube_indices,
    subcube_map,
    subcube_unmap,
    subcube_volume,
    total_degree_exponents,
)


@pytest.mark.parametrize("s,d,expected", [(2, 2, 3), (1, 7, 1), (3, 2, 6)])
def test_poly_dim_known_values(s, d, expected):
    assert poly_dim(s, d) == expected


def test_poly_dim_matches_multiindex_enumeration():
    for s in range(1, 7):
        for d in range(1, 6):
            count = sum(
                1
                for alpha in itertools.product(range(s), repeat=d)
                if sum(alpha) <= s - 1
            )
            assert poly_dim(s, d) == count


def test_poly_dim_large_arguments_exact():
    # checked integer arithmetic: no wraparound anywhere below s + d ~ 60
    assert poly_dim(30, 30) == math.comb(59, 30)


@pytest.mark.parametrize("s,d", [(0, 1), (1, 0), (-2, 3)])
def test_poly_dim_rejects_bad_input(s, d):
    with pytest.raises(ValueError):
        poly_dim(s, d)


def test_exponents_order_and_contents():
    exps = total_degree_exponents(3, 2)
    assert [tuple(row) for row in exps] == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
    assert exps.shape == (poly_dim(3, 2), 2)


def test_subcube_map_identity_at_m1():
    idx = SubcubeIndex((0, 0, 0), m=1)
    x = np.array([0.3, 0.7, 0.1])
    assert np.array_equal(subcube_map(idx, x), x)


def test_subcube_map_direct_arithmetic():
    idx = SubcubeIndex((3, 0), m=4)
    out = subcube_map(idx, np.array([0.5, 0.5]))
    assert np.allclose(out, [0.875, 0.125], atol=0)


def test_subcube_roundtrip_random():
    rng = np.random.default_rng(42)
    for _ in range(100):
        d = int(rng.integers(1, 4))
        m = int(rng.integers(1, 9))
        idx = SubcubeIndex(tuple(int(i) for i in rng.integers(0, m, d)), m=m)
        x = rng.random(d)
        back = subcube_unmap(idx, subcube_map(idx, x))
        assert np.allclose(back, x, atol=1e-12)


def test_subcube_index_validation():
    with pytest.raises(ValueError):
        SubcubeIndex((4,), m=4)
    with pytest.raises(ValueError):
        SubcubeIndex((-1, 0), m=2)
    with pytest.raises(ValueError):
        SubcubeIndex((0,), m=0)


def test_subcube_map_rejects_outside_points():
    idx = SubcubeIndex((0, 0), m=2)
    with pytest.raises(ValueError):
        subcube_map(idx, np.array([1.5, 0.0]))
    with pytest.raises(ValueError):
        subcube_unmap(idx, np.array([0.9, 0.9]))  # belongs to cell (1,1)


def test_subcube_volumes_partition_unity():
    for m, d in [(1, 1), (2, 3), (3, 2), (4, 2), (7, 1)]:
        assert subcube_indices(m, d).shape == (m**d, d)
        total = sum(Fraction(1, m**d) for _ in range(m**d))
        assert total == 1
        assert subcube_volume(m, d) == pytest.approx(1.0 / m**d, abs=0)


def test_subcube_indices_lexicographic():
    arr = subcube_indices(2, 2)
    assert [tuple(r) for r in arr] == [(0, 0), (0, 1), (1, 0), (1, 1)]


def test_regular_nodes_1d():
    nodes = regular_nodes(2, 1)
    assert sorted(nodes.points[:, 0].tolist()) == [0.0, 1.0]


def test_regular_nodes_s1_center():
    nodes = regular_nodes(1, 3)
    assert np.array_equal(nodes.points, [[0.5, 0.5, 0.5]])


def test_regular_nodes_2d_simplex_corners():
    nodes = regular_nodes(2, 2)
    assert {tuple(p) for p in nodes.points} == {(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)}
    # unisolvence: the 3x3 system solves cleanly
    mat = nodes.interpolation_matrix
    sol = np.linalg.solve(mat, np.array([1.0, 2.0, 4.0]))
    assert np.allclose(mat @ sol, [1.0, 2.0, 4.0], atol=1e-12)


@pytest.mark.parametrize("s", range(1, 6))
@pytest.mark.parametrize("d", range(1, 5))
def test_regular_nodes_cardinality_and_conditioning(s, d):
    nodes = regular_nodes(s, d)
    assert len(nodes) == poly_dim(s, d)
    assert nodes.rcond >= 1e-10


def test_shifted_nodes_examples():
    base = regular_nodes(2, 1)
    shifted = shifted_nodes(base, np.array([0.0]))
    assert {p[0] for p in shifted.points} == {0.0, 0.5}

    single = shifted_nodes(regular_nodes(1, 2), np.array([1.0, 1.0]))
    assert np.allclose(single.points, [[0.75, 0.75]], atol=0)


def test_shifted_nodes_random_shifts_stay_unisolvent():
    rng = np.random.default_rng(3)
    base = regular_nodes(3, 2)
    for _ in range(100):
        shifted = shifted_nodes(base, rng.random(2))
        # solving against random data reproduces it
        values = rng.standard_normal(len(shifted))
        coeffs = np.linalg.solve(shifted.interpolation_matrix, values)
        assert np.allclose(shifted.interpolation_matrix @ coeffs, values, atol=1e-8)


def test_shifted_nodes_validation():
    base = regular_nodes(2, 2)
    with pytest.raises(ValueError):
        shifted_nodes(base, np.array([1.5, 0.0]))
    once = shifted_nodes(base, np.array([0.5, 0.5]))
    with pytest.raises(ValueError):
        shifted_nodes(once, np.array([0.5, 0.5]))


def test_nodeset_rejects_degenerate_points():
    pts = np.array([[0.2, 0.2], [0.2, 0.2], [0.4, 0.4]])
    with pytest.raises(UnisolvenceError):
        NodeSet(points=pts, s=2, d=2)


def test_nodeset_rejects_wrong_cardinality():
    with pytest.raises(ValueError):
        NodeSet(points=np.array([[0.0, 0.0], [1.0, 0.0]]), s=2, d=2)


def test_monomial_matrix_shape_and_values():
    exps = total_degree_exponents(2, 2)
    pts = np.array([[0.5, 0.25]])
    row = monomial_matrix(pts, exps)[0]
    assert np.allclose(row, [1.0, 0.5, 0.25], atol=0)
