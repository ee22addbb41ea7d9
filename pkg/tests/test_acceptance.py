"""End-to-end acceptance checks, one test per criterion.

Each test records a one-line verdict (see conftest.py) before asserting, so
the summary lists every criterion even when some of them fail.
"""

import math
import time

import numpy as np
import pytest

from hierdu import (
    b1_from_schmidt, classify_hierarchy, complex_hadamard, controlled_unitary, correlator_map, dress_legs,
    dual_unitary_gate, elt_scan, entanglement_growth, ep_gt, haar_gate, haar_unitary, hadamard_gate,
    hermitian_basis, im_area_law_check, jordan_profile, local_dress, named_gate, otoc,
    permutation_search_L2, random_dephased_hadamard, random_qubit_L2, random_qubit_L3, schmidt_decompose,
    schmidt_values, staircase_overlaps, tensor_product_gate, tripartite_info, ve_bounds, ve_from_rank,
    verify_dual_unitary, verify_Lk, verify_t_dual, z2_closed_form, z_alpha_exact,
)
from hierdu.membrane import z2_series
from hierdu.quench import reference_gate

from conftest import record

pytestmark = pytest.mark.slow

LOG2 = math.log(2)


def _shift(q, k):
    return np.roll(np.eye(q), k, axis=0)


def constructed_L2_gates():
    """Every lowest-level construction the package offers, at q = 2, 3, 4, 6."""
    out = {}
    for q in (2, 3, 4, 6):
        for lat in ("honeycomb", "triangular"):
            out[f"{lat}/fourier/q{q}"] = hadamard_gate(lat, complex_hadamard("fourier", q))
            out[f"{lat}/dephased/q{q}"] = hadamard_gate(lat, random_dephased_hadamard(q, 1))
        out[f"controlled_shift/q{q}"] = controlled_unitary([_shift(q, k) for k in range(q)])
    out["cnot"] = named_gate("cnot")
    for s in range(5):
        out[f"qubit_L2/{s}"] = random_qubit_L2(s)
    for name in ("cx", "F2x4_block", "F2x4_rank8", "O8_block", "O8_rank8"):
        out[f"{name}/q4"] = named_gate(name, 4)
    out["cnot x cnot"] = tensor_product_gate(named_gate("cnot"), named_gate("cnot"))
    out["cnot x honeycomb3"] = tensor_product_gate(named_gate("cnot"),
                                                   hadamard_gate("honeycomb", complex_hadamard("fourier", 3)))
    return out


def _is_L2(G):
    return verify_Lk(G, 2, "left").ok and verify_Lk(G, 2, "right").ok


def _rand_traceless(k, seed):
    rng = np.random.default_rng(seed)
    basis = hermitian_basis(2)
    out = []
    for _ in range(k):
        v = rng.standard_normal(3)
        out.append(sum(c * b for c, b in zip(v / np.linalg.norm(v), basis)))
    return out


def test_criterion_01_closed_form():
    t0 = time.perf_counter()
    worst = 0.0
    for seed in range(20):
        U = random_qubit_L2(seed)
        B1 = b1_from_schmidt(U)
        for n in range(1, 6):
            series = z2_series(U, n, 8)
            for m in range(n, 9):
                worst = max(worst, abs(series[m - 1] / z2_closed_form(B1, 2, m, n) - 1))
        # the one-sweep series and the pointwise contraction are the same network
        worst = max(worst, abs(z_alpha_exact(U, 4, 3) / z2_closed_form(B1, 2, 4, 3) - 1))
    runtime = time.perf_counter() - t0
    ok = record(1, worst <= 1e-10 and runtime <= 120,
                f"max rel error {worst:.2e} over 20 gates, 1<=n<=5, n<=m<=8; {runtime:.1f}s")
    assert ok


def test_criterion_02_dressing_breaks_closed_form():
    violated, spec_err = 0, 0.0
    for seed in range(20):
        U = random_qubit_L2(seed)
        D = dress_legs(U, seed=seed)
        dev = abs(z_alpha_exact(D, 2, 2) / z2_closed_form(b1_from_schmidt(D), 2, 2, 2) - 1)
        violated += dev > 1e-3
        spec_err = max(spec_err, float(np.abs(np.sort(schmidt_values(U)) - np.sort(schmidt_values(D))).max()))
    ok = record(2, violated >= 18 and spec_err <= 1e-9,
                f"closed form violated for {violated}/20 dressed gates; Schmidt mismatch {spec_err:.1e}")
    assert ok


def test_criterion_03_cnot_elt():
    scan = elt_scan(named_gate("cnot"), [0.0, 0.5, 1.0], [8])
    got = [scan.elt[v] for v in (0.0, 0.5, 1.0)]
    err = max(abs(g - e) for g, e in zip(got, (0.5, 0.75, 1.0)))
    ok = record(3, err <= 1e-10, f"ELT(0, 1/2, 1) = {', '.join(f'{g:.12f}' for g in got)}")
    assert ok


def test_criterion_04_flat_spectra_and_ranks():
    expected_ve = {(2, 2): 0.5, (4, 2): 0.25, (4, 4): 0.5, (4, 8): 0.75}
    bad, ve_err, seen = [], 0.0, set()
    for name, G in constructed_L2_gates().items():
        q = G.q
        lam = schmidt_values(G)
        nz = lam[lam > 1e-8]
        R = len(nz)
        if not _is_L2(G) or nz.max() / nz.min() - 1 > 1e-8 or (q * q) % R:
            bad.append(name)
        if (q, R) in expected_ve:
            seen.add((q, R))
            ve_err = max(ve_err, abs(ve_from_rank(q, R) - expected_ve[(q, R)]))
    missing = set(expected_ve) - seen
    ok = record(4, not bad and not missing and ve_err <= 1e-12,
                f"{len(constructed_L2_gates())} gates; non-flat or bad rank: {bad or 'none'}; "
                f"v_E(rank) error {ve_err:.1e}; missing (q,R): {sorted(missing) or 'none'}")
    assert ok


def test_criterion_05_hankel_overlaps():
    worst_g, worst_h, rank_ok = 0.0, 0.0, True
    for seed in range(10):
        U = random_qubit_L2(seed)
        full = b1_from_schmidt(U) < 4 - 1e-9
        for n in (2, 3, 4):
            _, ov = staircase_overlaps(U, n)
            worst_g, worst_h = max(worst_g, ov.max_error), max(worst_h, ov.hankel_error)
            rank_ok &= (ov.rank == n + 1) == full
    # B1 = q^2 (product gate) must give a rank-deficient Gram matrix
    P = local_dress(np.eye(4), u_out_left=haar_unitary(2, 0), u_out_right=haar_unitary(2, 1))
    for n in (2, 3):
        _, ov = staircase_overlaps(P, n)
        rank_ok &= ov.rank < n + 1
        worst_g, worst_h = max(worst_g, ov.max_error), max(worst_h, ov.hankel_error)
    ok = record(5, worst_g <= 1e-10 and worst_h <= 1e-12 and rank_ok,
                f"Gram error {worst_g:.1e}, Hankel shift error {worst_h:.1e}, rank iff B1<q^2: {rank_ok}")
    assert ok


def test_criterion_06_otoc_fronts():
    X = hermitian_basis(2)[0]
    U = random_qubit_L2(0)
    front = [abs(otoc(U, X, X, t, t) - 1) for t in range(1, 9)]
    ok_a = min(front) > 0.01

    L3 = random_qubit_L3(0)
    dev_b = max(abs(otoc(L3, X, X, x, t) - 1) for t in range(1, 11) for x in range(2, t + 3))
    ok_b = dev_b <= 1e-10

    D = dress_legs(L3, ("out_left",), seed=0)
    exact_dev, below_ok = 0.0, True
    for t in range(1, 11):
        edge = (t + 4) / 3
        vals = {x: abs(otoc(D, X, X, x, t) - 1) for x in range(-t - 1, t + 3)}
        exact_dev = max(exact_dev, max(v for x, v in vals.items() if x >= edge))
        below_ok &= max(v for x, v in vals.items() if x < edge) > 0.01
    ok_c = exact_dev <= 1e-10 and below_ok
    ok = record(6, ok_a and ok_b and ok_c,
                f"(a) min |C(t,t)-1| = {min(front):.3f}; (b) max dev x>=2: {dev_b:.1e}; "
                f"(c) max dev x>=(t+4)/3: {exact_dev:.1e}, relaxed below front at every t: {below_ok}")
    assert ok


def test_criterion_07_jordan_profiles():
    th = (1e-6, 1e-7, 1e-8, 1e-9, 1e-10)
    L3 = random_qubit_L3(0)
    a = jordan_profile(L3, 3, th)
    b = jordan_profile(dress_legs(L3, ("out_left",), seed=0), 3, th)
    ok = record(7, a.stable and b.stable and a.sizes == {n: n + 1 for n in (1, 2, 3)}
                and b.sizes == {n: 2 * n for n in (1, 2, 3)},
                f"level-3 sizes {a.sizes}, dressed sizes {b.sizes}, stable over 1e-6..1e-10: {a.stable and b.stable}")
    assert ok


def test_criterion_08_tripartite():
    passes, notes = 0, []
    for seed in range(5):
        U = random_qubit_L2(seed)
        lb = math.log(b1_from_schmidt(U) / 4)
        I = {t: tripartite_info(U, 0, t) for t in (4, 6, 8)}
        good = abs(I[8] - 8 * lb) <= 0.1 and I[4] > I[6] > I[8]
        passes += good
        notes.append(f"{seed}:{I[8]:.3f}/{8 * lb:.3f}")
    ok = record(8, passes >= 4, f"{passes}/5 gates within 0.1 of t log b1 at t=8 (I3/pred: {' '.join(notes)})")
    assert ok


def test_criterion_09_ep_gt_relations():
    gates = dict(constructed_L2_gates())
    gates.update({"swap": named_gate("swap"), "identity": named_gate("identity"), "cz": named_gate("cz"),
                  "P_CXSCXS": named_gate("P_CXSCXS"), "growth_reference/q3": reference_gate(3, 0)})
    for s in range(3):
        gates[f"dual_unitary/q2/{s}"] = dual_unitary_gate(2, s)
        gates[f"dual_unitary/q4/{s}"] = dual_unitary_gate(4, s)
        gates[f"square_du/q3/{s}"] = hadamard_gate("square_du", random_dephased_hadamard(3, s))
    worst, applied = 0.0, 0
    for G in gates.values():
        e, q = ep_gt(G), G.q
        if verify_dual_unitary(G).ok:
            worst, applied = max(worst, abs(e.GT - (1 - e.EP / 2))), applied + 1
        if verify_t_dual(G).ok:
            worst, applied = max(worst, abs(e.GT - e.EP / 2)), applied + 1
        if _is_L2(G):
            R = e.schmidt_rank
            worst, applied = max(worst, abs(e.GT + e.EP / 2 - (1 - 1 / R) / (1 - 1 / q**2))), applied + 1
    c = ep_gt(named_gate("cnot"))
    cnot_err = max(abs(c.EP - 2 / 3), abs(c.GT - 1 / 3))
    ok = record(9, worst <= 1e-10 and cnot_err <= 1e-10,
                f"{applied} relation checks on {len(gates)} gates, max residual {worst:.1e}; "
                f"CNOT (EP, GT) = ({c.EP:.12f}, {c.GT:.12f})")
    assert ok


def test_criterion_10_correlator_support():
    A, B = _rand_traceless(3, 10), _rand_traceless(3, 11)
    cm = correlator_map(random_qubit_L2(0), A, B, 8)
    inside = cm.points_inside(1e-9, 1 - 1e-9) + cm.points_inside(-1 + 1e-9, -1e-9)
    zero_in = cm.max_abs(inside)
    on_axis = cm.max_abs([p for p in cm.points_on(0.0) if p[1] > 0])
    cd = correlator_map(dress_legs(random_qubit_L3(0), ("out_left",), seed=0), A, B, 8)
    band = cd.max_abs(cd.points_inside(1 / 3 + 1e-9, 1 - 1e-9))
    ok = record(10, zero_in <= 1e-10 and on_axis > 1e-4 and band <= 1e-10,
                f"level-2: max |D| inside 0<|v|<1 = {zero_in:.1e}, max on v=0 = {on_axis:.3f}; "
                f"dressed: max |D| for 1/3<v<1 = {band:.1e}")
    assert ok


def test_criterion_11_entanglement_growth():
    parts, notes = [], []
    g = entanglement_growth(random_qubit_L2(0), 16, 16, 0)
    parts.append(abs(g.v_E - 0.5) <= 0.025)
    spread = [entanglement_growth(random_qubit_L2(s), 16, 16, s).v_E for s in range(1, 10)]
    notes.append(f"qubit v_E={g.v_E:.3f} (seeds 1-9: {min(spread):.3f}..{max(spread):.3f})")
    for name, want in (("cx", 0.25), ("F2x4_block", 0.5), ("F2x4_rank8", 0.75), ("O8_rank8", 0.75)):
        v = entanglement_growth(named_gate(name, 4), 8, 12, 0).v_E
        parts.append(abs(v - want) <= 0.05)
        notes.append(f"{name} {v:.3f}/{want}")
    s3 = entanglement_growth(random_qubit_L3(0), 16, 16, 0).S2
    # oscillation: S2 falls back by more than 0.01 below its running maximum
    osc = max(s3) <= 2 * LOG2 and any(s3[t] < max(s3[:t]) - 0.01 for t in range(1, len(s3)))
    parts.append(osc)
    notes.append(f"L3 max S2 {max(s3) / LOG2:.2f} bits, oscillating: {osc}")
    vd = entanglement_growth(dress_legs(random_qubit_L3(0), ("out_left",), seed=0), 16, 16, 0).v_E
    parts.append(vd <= 0.55)
    notes.append(f"dressed L3 v_E {vd:.3f}")
    ok = record(11, all(parts), "; ".join(notes))
    assert ok


def test_criterion_12_ve_bounds():
    b = ve_bounds(2, 3, 3, 2.0, 2.0)
    one = ve_bounds(2, 3, None, 4.0)
    err = max(abs(b.lower - 0.5), abs(b.upper - 2 / 3), abs(one.upper - 0.5))
    ok = record(12, err <= 1e-12, f"symmetric [{b.lower:.6f}, {b.upper:.6f}], one-sided upper {one.upper:.6f}")
    assert ok


def test_criterion_13_hadamard_lattices():
    exact = np.array_equal(hadamard_gate("honeycomb", complex_hadamard("qubit_standard")).matrix,
                           named_gate("cnot").matrix)
    worst, fails = 0.0, []
    for q in (2, 3):
        for s in range(10):
            H = random_dephased_hadamard(q, s)
            c = verify_dual_unitary(hadamard_gate("square_du", H))
            worst = max(worst, c.residual)
            if not c.ok:
                fails.append(f"square_du/q{q}/{s}")
            for lat in ("honeycomb", "triangular"):
                G = hadamard_gate(lat, H)
                cl, cr = verify_Lk(G, 2, "left"), verify_Lk(G, 2, "right")
                worst = max(worst, cl.residual, cr.residual)
                if not (cl.ok and cr.ok and schmidt_decompose(G).rank == q):
                    fails.append(f"{lat}/q{q}/{s}")
            S = hadamard_gate("sheared", H)
            r = classify_hierarchy(S)
            worst = max(worst, verify_Lk(S, 2, "left").residual, verify_Lk(S, 3, "right").residual)
            if (r.level_left, r.level_right) != (2, 3):
                fails.append(f"sheared/q{q}/{s}")
    ok = record(13, exact and not fails and worst <= 1e-10,
                f"honeycomb(standard H) == CNOT: {exact}; failures: {fails or 'none'}; max residual {worst:.1e}")
    assert ok


def test_criterion_14_permutation_search():
    t0 = time.perf_counter()
    r3 = permutation_search_L2(3)
    runtime = time.perf_counter() - t0
    r2 = permutation_search_L2(2)
    ent_ranks = sorted({R for _, R in r3.entangling})
    divides = all(r.q**2 % R == 0 for r in (r2, r3) for _, R in r.members)
    ok = record(14, r3.exhaustive and runtime <= 600 and ent_ranks == [3] and divides,
                f"q=3 exhaustive over {r3.scanned} in {runtime:.1f}s; {len(r3.entangling)} entangling, "
                f"ranks {ent_ranks}; histogram {r3.histogram}; divisibility q in {{2,3}}: {divides}")
    assert ok


def test_criterion_15_influence_matrix_area_law():
    ts = (4, 5, 6)
    l2_ok, notes = True, []
    for seed in range(5):
        mx = [max(im_area_law_check(random_qubit_L2(seed), t)) for t in ts]
        l2_ok &= max(mx) <= 4 and len(set(mx)) == 1
        notes.append("/".join(map(str, mx)))
    haar = [max(im_area_law_check(haar_gate(2, 0), t)) for t in ts]
    grows = all(a < b for a, b in zip(haar, haar[1:]))
    ok = record(15, l2_ok and grows,
                f"level-2 max ranks per t {' '.join(notes)}; Haar control {'/'.join(map(str, haar))} "
                f"strictly growing: {grows}")
    assert ok
