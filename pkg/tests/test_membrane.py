import math

import numpy as np
import pytest

from hierdu import (
    b1_from_schmidt, elt_scan, haar_gate, named_gate, random_qubit_L2, random_qubit_L3, ve_bounds,
    ve_from_rank, z2_closed_form, z_alpha_exact,
)
from hierdu.membrane import cut_coordinates, z2_series, z2_tilde

from oracles import rectangle_purities

RECTS = [(1, 1), (2, 1), (3, 1), (2, 2), (3, 2)]


@pytest.mark.parametrize("m,n", RECTS)
@pytest.mark.parametrize("builder", [lambda: haar_gate(2, 5), lambda: random_qubit_L3(2)])
def test_z_matches_dense(builder, m, n):
    U = builder().matrix
    z, zt, _ = rectangle_purities(U, 2, m, n)
    assert abs(z_alpha_exact(U, m, n) - z) < 1e-12
    assert abs(z2_tilde(U, m, n) - zt) < 1e-12


@pytest.mark.parametrize("m,n", [(1, 2), (1, 3), (2, 3)])
def test_z_tall_rectangles_via_reflection(m, n):
    U = haar_gate(2, 8).matrix
    z, _, _ = rectangle_purities(U, 2, m, n)
    assert abs(z_alpha_exact(U, m, n) - z) < 1e-12


def test_z_qutrit_dense():
    U = haar_gate(3, 1).matrix
    z, _, _ = rectangle_purities(U, 3, 2, 1)
    assert abs(z_alpha_exact(U, 2, 1) - z) < 1e-12


def test_empty_rectangle():
    assert z_alpha_exact(haar_gate(2, 0), 4, 0) == 2.0**-4


def test_series_matches_pointwise():
    U = haar_gate(2, 3)
    s = z2_series(U, 2, 5)
    assert np.allclose(s, [z_alpha_exact(U, m, 2) for m in range(1, 6)], rtol=1e-12)


def test_closed_form_for_level_two():
    U = random_qubit_L2(4)
    B1 = b1_from_schmidt(U)
    for m, n in [(3, 2), (5, 3), (4, 4)]:
        assert math.isclose(z_alpha_exact(U, m, n), z2_closed_form(B1, 2, m, n), rel_tol=1e-10)


def test_closed_form_rejects_bad_b1():
    with pytest.raises(ValueError):
        z2_closed_form(5.0, 2, 1, 1)


def test_alpha_other_than_two_rejected():
    with pytest.raises(ValueError):
        z_alpha_exact(haar_gate(2, 0), 2, 2, alpha=3)


def test_cut_coordinates():
    c = cut_coordinates(3, 7)
    assert (c.m, c.n) == (4, 1)
    c = cut_coordinates(0, 8)
    assert (c.m, c.n) == (4, 4) and c.v == 0
    with pytest.raises(ValueError):
        cut_coordinates(5, 4)


def test_cnot_elt():
    scan = elt_scan(named_gate("cnot"), [0, 0.5, 1], [8])
    assert scan.v_E == pytest.approx(0.5, abs=1e-12)
    assert scan.elt[0.5] == pytest.approx(0.75, abs=1e-12)
    assert scan.elt[1.0] == pytest.approx(1.0, abs=1e-12)


def test_elt_higher_alpha_requires_level_two():
    with pytest.raises(ValueError):
        elt_scan(haar_gate(2, 0), [0], [4], alpha=3)
    s3 = elt_scan(named_gate("cnot"), [0], [4], alpha=3)
    assert s3.v_E == pytest.approx(0.5, abs=1e-12)


def test_ve_from_rank():
    assert ve_from_rank(2, 2) == pytest.approx(0.5)
    assert ve_from_rank(4, 8) == pytest.approx(0.75)
    with pytest.raises(ValueError):
        ve_from_rank(2, 5)


def test_ve_bounds_symmetric_level_three():
    b = ve_bounds(2, 3, 3, 2.0, 2.0)
    assert b.lower == pytest.approx(0.5, abs=1e-12)
    assert b.upper == pytest.approx(2 / 3, abs=1e-12)


def test_ve_bounds_one_sided():
    b = ve_bounds(2, 3, None, 4.0)
    assert b.upper == pytest.approx(0.5, abs=1e-12)
