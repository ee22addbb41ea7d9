import numpy as np
import pytest

from hierdu import (
    block_diagonal_gate, classify_hierarchy, complex_hadamard, controlled_flags, controlled_unitary,
    dress_legs, gate_from_recipe, haar_unitary, hadamard_gate, local_dress, named_gate, permutation_gate,
    permutation_search_L2, qubit_L2, random_dephased_hadamard, random_qubit_L2, random_qubit_L3,
    schmidt_decompose, schmidt_values, tensor_product_gate, verify_Lk,
)
from hierdu._kernels import flat_perm_scan, nth_permutation


def test_qubit_L2_constraint_checked():
    with pytest.raises(ValueError):
        qubit_L2(1.0, 0.0, 1.0, 0.0, theta1=0.1)
    with pytest.raises(ValueError):
        qubit_L2(1.0, 0.0, 1.0, 0.0, signs=(2, 1))


def test_qubit_L2_explicit_thetas_accepted():
    U = random_qubit_L2(0)
    p = U.recipe["params"]
    V = qubit_L2(p["r1"], p["phi1"], p["r2"], p["phi2"], p["signs"])
    assert np.array_equal(U.matrix, V.matrix)


@pytest.mark.parametrize("builder", [random_qubit_L2, random_qubit_L3])
def test_recipe_replay_bit_identical(builder):
    U = builder(7)
    assert np.array_equal(gate_from_recipe(U.recipe).matrix, U.matrix)


def test_dressing_keeps_schmidt_spectrum():
    U = random_qubit_L2(2)
    D = dress_legs(U, seed=4)
    assert np.allclose(np.sort(schmidt_values(U)), np.sort(schmidt_values(D)), atol=1e-10)
    assert not np.allclose(U.matrix, D.matrix)


def test_local_dress_single_leg():
    U = random_qubit_L3(0)
    u = haar_unitary(2, 1)
    D = local_dress(U, u_out_left=u)
    assert np.allclose(D.matrix, np.kron(u, np.eye(2)) @ U.matrix)


def test_dress_replay():
    D = dress_legs(random_qubit_L3(1), ("out_left",), seed=1)
    assert np.array_equal(gate_from_recipe(D.recipe).matrix, D.matrix)


def test_controlled_orthogonal_blocks_flat():
    X = np.array([[0, 1], [1, 0]], complex)
    flags = controlled_flags([np.eye(2), X])
    assert flags.orthogonal_blocks and flags.flat_spectrum and flags.l2_sufficient
    C = controlled_unitary([np.eye(2), X])
    assert np.allclose(C.matrix, named_gate("cnot").matrix)


def test_controlled_generic_not_flat():
    flags = controlled_flags([haar_unitary(2, 1), haar_unitary(2, 2)])
    assert not flags.flat_spectrum


def test_block_and_tensor_products():
    B = block_diagonal_gate([haar_unitary(2, 0), haar_unitary(2, 1)])
    assert B.q == 2
    T = tensor_product_gate(named_gate("cnot"), named_gate("cnot"))
    assert T.q == 4
    assert schmidt_decompose(T).rank == 4


def test_named_gate_unknown():
    with pytest.raises(ValueError):
        named_gate("nonsense")


def test_hadamard_honeycomb_standard_is_cnot():
    G = hadamard_gate("honeycomb", complex_hadamard("qubit_standard"))
    assert np.array_equal(G.matrix, named_gate("cnot").matrix)


def test_fourier_hadamard_unimodular():
    H = complex_hadamard("fourier", 5).entries
    assert np.allclose(np.abs(H), 1)
    assert np.allclose(H @ H.conj().T, 5 * np.eye(5))


def test_dephased_hadamard_seeded():
    a, b = random_dephased_hadamard(3, 2), random_dephased_hadamard(3, 2)
    assert np.array_equal(a.entries, b.entries)


@pytest.mark.parametrize("q", [2, 3])
def test_lattice_classes(q):
    H = random_dephased_hadamard(q, 0)
    assert classify_hierarchy(hadamard_gate("square_du", H)).dual_unitary.ok
    for lat in ("honeycomb", "triangular"):
        G = hadamard_gate(lat, H)
        assert verify_Lk(G, 2, "left").ok and verify_Lk(G, 2, "right").ok
        assert schmidt_decompose(G).rank == q
    r = classify_hierarchy(hadamard_gate("sheared", H))
    assert (r.level_left, r.level_right) == (2, 3)


def test_unknown_lattice():
    with pytest.raises(ValueError):
        hadamard_gate("kagome", random_dephased_hadamard(2, 0))


def test_permutation_gate_is_permutation_matrix():
    P = permutation_gate([1, 0, 3, 2], 2).matrix
    assert np.allclose(np.abs(P).sum(axis=0), 1)


def test_permutation_search_q2():
    res = permutation_search_L2(2)
    assert res.exhaustive and res.scanned == 24
    assert all(4 % r == 0 for _, r in res.members)
    for perm, r in res.members:
        assert verify_Lk(permutation_gate(perm, 2), 2, "right").ok


def test_permutation_scan_backends_agree():
    a = flat_perm_scan(3, 0, 5000, use="numpy")
    b = flat_perm_scan(3, 0, 5000, use="numba")
    assert np.array_equal(np.sort(a), np.sort(b))


def test_flat_prefilter_keeps_every_level_two_permutation():
    mask = flat_perm_scan(2)
    for n in range(24):
        G = permutation_gate(nth_permutation(n, 4), 2)
        if verify_Lk(G, 2, "right").ok and verify_Lk(G, 2, "left").ok:
            assert mask[n]
    assert np.count_nonzero(flat_perm_scan(3, 0, 5000)) < 5000
