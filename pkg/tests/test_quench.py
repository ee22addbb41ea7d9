import math

import numpy as np
import pytest

from hierdu import (
    correlator, correlator_map, entanglement_growth, evolve_brickwork, haar_gate, hermitian_basis,
    random_product_state, random_qubit_L2, renyi_entropy,
)
from hierdu.quench import StateVector, fit_window, reference_gate

from oracles import brickwork_dense, correlator_dense

X, Y, Z = hermitian_basis(2)


@pytest.mark.parametrize("q,N,layers", [(2, 6, 3), (2, 8, 4), (3, 4, 3)])
def test_brickwork_matches_dense(q, N, layers):
    U = haar_gate(q, 1).matrix
    psi = random_product_state(q, N, 5, translation_invariant=False)
    out = evolve_brickwork(psi, U, layers)
    ref = brickwork_dense(U, q, N, layers) @ psi.amplitudes
    assert np.allclose(out.amplitudes, ref, atol=1e-12)
    assert out.norm == pytest.approx(1.0, abs=1e-12)


def test_first_layer_offset():
    U = haar_gate(2, 2).matrix
    psi = random_product_state(2, 6, 0)
    a = evolve_brickwork(evolve_brickwork(psi, U, 1), U, 2, first_layer=2)
    b = evolve_brickwork(psi, U, 3)
    assert np.allclose(a.amplitudes, b.amplitudes)


def test_rejects_odd_chain_and_mismatched_q():
    with pytest.raises(ValueError):
        evolve_brickwork(random_product_state(2, 5, 0), haar_gate(2, 0), 1)
    with pytest.raises(ValueError):
        evolve_brickwork(random_product_state(2, 6, 0), haar_gate(3, 0), 1)
    with pytest.raises(ValueError):
        StateVector(2, 3, np.zeros(7))


def test_product_states():
    s = random_product_state(2, 6, 4)
    assert renyi_entropy(s) == pytest.approx(0.0, abs=1e-12)
    a = random_product_state(3, 4, 1)
    assert np.array_equal(a.amplitudes, random_product_state(3, 4, 1).amplitudes)


def test_renyi_of_bell_pairs():
    bell = np.array([1, 0, 0, 1]) / np.sqrt(2)
    psi = StateVector(2, 4, np.kron(bell, bell))
    assert renyi_entropy(psi, 1) == pytest.approx(math.log(2))
    assert renyi_entropy(psi, 2) == pytest.approx(0.0, abs=1e-12)
    assert renyi_entropy(psi, 1, alpha=1) == pytest.approx(math.log(2))


def test_reference_gate_is_dual_unitary():
    from hierdu import verify_dual_unitary
    for q in (2, 3):
        assert verify_dual_unitary(reference_gate(q, 1)).ok


@pytest.mark.parametrize("seed", [1, 3])
def test_reference_growth_is_maximal(seed):
    # each of the two half-chain cuts gains 2 log q per period until the chain saturates
    g = entanglement_growth(random_qubit_L2(seed), 16, 6, seed)
    assert g.reference_slope == pytest.approx(2 * math.log(2), rel=1e-10)
    assert g.reference_S2[2] == pytest.approx(4 * math.log(2), rel=1e-10)
    assert g.reference_S2[4] == pytest.approx(8 * math.log(2), rel=1e-10)


def test_growth_series_rows_and_metadata():
    g = entanglement_growth(random_qubit_L2(1), 8, 6, 1)
    rows = list(g.rows())
    assert len(rows) == 7 and rows[0]["t"] == 0 and rows[0]["S2"] == pytest.approx(0.0, abs=1e-12)
    assert g.metadata()["boundary"] == "periodic"


def test_growth_needs_layers():
    with pytest.raises(ValueError):
        entanglement_growth(random_qubit_L2(1), 8, 2, 1)


def test_fit_window_even_layers():
    S = [0, 0, 1, 1, 2, 2, 3, 3, 3.2, 3.2, 3.2, 3.2]
    (lo, hi), slope = fit_window(S, 2, 8)
    assert lo % 2 == 0 and hi % 2 == 0 and hi > lo
    assert slope == pytest.approx(0.5)


def _ops(q, k, seed):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(k):
        A = rng.standard_normal((q, q)) + 1j * rng.standard_normal((q, q))
        out.append(A + A.conj().T)
    return out


@pytest.mark.parametrize("x,t", [(0, 0), (1, 0), (0, 1), (1, 1), (-1, 2), (2, 2), (0, 3), (3, 3), (-2, 3)])
def test_correlator_matches_dense(x, t):
    U = haar_gate(2, 6).matrix
    A, B = _ops(2, 2, 1), _ops(2, 1, 2)
    assert abs(correlator(U, A, B, x, t) - correlator_dense(U, 2, A, B, x, t)) < 1e-12


def test_correlator_outside_light_cone_factorises():
    U = haar_gate(2, 6).matrix
    A, B = [X], [Z]
    assert abs(correlator(U, A, B, 7, 2)) < 1e-14


def _traceless(k, seed):
    rng = np.random.default_rng(seed)
    return [sum(c * b for c, b in zip(rng.standard_normal(3), (X, Y, Z))) for _ in range(k)]


def test_correlator_map_level_two_support():
    cm = correlator_map(random_qubit_L2(3), _traceless(3, 0), _traceless(3, 1), 6)
    inside = cm.points_inside(1e-9, 1 - 1e-9) + cm.points_inside(-1 + 1e-9, -1e-9)
    assert cm.max_abs(inside) <= 1e-10
    assert cm.max_abs(cm.points_on(0.0)) > 1e-4
    assert cm.max_abs(cm.points_on(1.0)) > 1e-4


def test_single_site_level_two_correlators_die():
    cm = correlator_map(random_qubit_L2(3), [X], [X], 4)
    assert cm.max_abs([(x, t) for (x, t) in cm.values if t >= 2]) < 1e-12


def test_correlator_map_rows_and_dict():
    cm = correlator_map(haar_gate(2, 1), [X], [X], 2)
    assert {r["t"] for r in cm.rows()} == {0, 1, 2}
    d = cm.to_dict()
    assert d["t_max"] == 2


def test_correlator_map_support_limit():
    with pytest.raises(ValueError):
        correlator_map(haar_gate(2, 1), _ops(2, 4, 0), [X], 2)


def test_level_three_correlator_confined():
    from hierdu import random_qubit_L3
    cm = correlator_map(random_qubit_L3(0), _traceless(3, 0), _traceless(3, 1), 6)
    # nothing leaves the central three sites, in particular nothing reaches the light cone
    assert cm.max_abs([(x, t) for (x, t) in cm.values if t >= 2 and abs(x) > 1]) <= 1e-10
    assert cm.max_abs(cm.points_on(0.0)) > 1e-4
