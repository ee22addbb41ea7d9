"""Constructors for the solvable gate families, each recording a replayable recipe."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Callable, Literal, NamedTuple, Sequence

import numpy as np
from scipy.linalg import expm

from . import _kernels
from .analysis import local_dress, verify_Lk
from ._config import check_budget
from .tensor_core import (UnitaryGate, _matrix, decode_matrix, encode_matrix, haar_unitary,
                          reflected_gate, reshuffle, schmidt_decompose, swap_matrix)

X2 = np.array([[0, 1], [1, 0]], dtype=np.complex128)
Y2 = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
Z2 = np.diag([1.0, -1.0]).astype(np.complex128)
ZZ = np.kron(Z2, Z2)

_RECIPES: dict[str, Callable[..., UnitaryGate]] = {}


def _recipe(kind: str):
    def deco(fn):
        _RECIPES[kind] = fn
        return fn
    return deco


def shift_matrix(d: int) -> np.ndarray:
    """X|k> = |k+1 mod d>."""
    return np.roll(np.eye(d, dtype=np.complex128), 1, axis=0)


# ------------------------------------------------------------- qubit families


def _bloch_unitary(r: float, theta: float, phi: float) -> np.ndarray:
    n = (np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta))
    return expm(1j * r * (n[0] * X2 + n[1] * Y2 + n[2] * Z2))


def _solve_theta(r: float, sign: int) -> float:
    s = math.sqrt(2.0) * math.sin(r)
    if abs(s) < 1.0:
        raise ValueError(f"no polar angle satisfies the constraint for r={r} (need |sin r| >= 1/sqrt2)")
    return math.asin(sign / s)


@_recipe("qubit_L2")
def qubit_L2(r1: float, phi1: float, r2: float, phi2: float, signs: Sequence[int] = (1, 1),
             theta1: float | None = None, theta2: float | None = None, tol: float = 1e-10) -> UnitaryGate:
    """(u1 x u2) exp(i pi/4 ZZ) with u = exp(i r n.sigma) and sqrt2 sin r sin theta = +-1.

    Omitted polar angles are solved from the constraint.
    """
    thetas = []
    for r, th, s in zip((r1, r2), (theta1, theta2), signs):
        if s not in (1, -1):
            raise ValueError("signs must be +1 or -1")
        if th is None:
            th = _solve_theta(r, s)
        elif abs(math.sqrt(2.0) * math.sin(r) * math.sin(th) - s) > tol:
            raise ValueError(f"constraint violated: sqrt2 sin r sin theta = "
                             f"{math.sqrt(2.0) * math.sin(r) * math.sin(th):.6g}, expected {s}")
        thetas.append(th)
    u1 = _bloch_unitary(r1, thetas[0], phi1)
    u2 = _bloch_unitary(r2, thetas[1], phi2)
    M = np.kron(u1, u2) @ expm(1j * np.pi / 4 * ZZ)
    params = {"r1": r1, "phi1": phi1, "r2": r2, "phi2": phi2, "signs": list(signs),
              "theta1": theta1, "theta2": theta2}
    return UnitaryGate(2, M, {"kind": "qubit_L2", "params": params})


def random_qubit_L2(seed: int) -> UnitaryGate:
    rng = np.random.default_rng(seed)
    r = rng.uniform(np.pi / 4, 3 * np.pi / 4, 2)
    phi = rng.uniform(0, 2 * np.pi, 2)
    signs = [int(s) for s in rng.choice([-1, 1], 2)]
    return qubit_L2(float(r[0]), float(phi[0]), float(r[1]), float(phi[1]), signs)


@_recipe("qubit_L3")
def qubit_L3(Jz: float, phi1: float, phi2: float) -> UnitaryGate:
    """(v1 x v2) exp(-i Jz ZZ) with v = cos(phi) X + sin(phi) Y."""
    if not 0.0 <= Jz <= np.pi / 4:
        raise ValueError(f"Jz must lie in [0, pi/4], got {Jz}")
    for p in (phi1, phi2):
        if not 0.0 <= p <= 2 * np.pi:
            raise ValueError(f"phases must lie in [0, 2pi], got {p}")
    v = [np.cos(p) * X2 + np.sin(p) * Y2 for p in (phi1, phi2)]
    M = np.kron(v[0], v[1]) @ expm(-1j * Jz * ZZ)
    return UnitaryGate(2, M, {"kind": "qubit_L3", "params": {"Jz": Jz, "phi1": phi1, "phi2": phi2}})


def random_qubit_L3(seed: int) -> UnitaryGate:
    rng = np.random.default_rng(seed)
    Jz = float(rng.uniform(0.05, np.pi / 4 - 0.05))
    phi = rng.uniform(0, 2 * np.pi, 2)
    return qubit_L3(Jz, float(phi[0]), float(phi[1]))


LEGS = ("in_left", "in_right", "out_left", "out_right")


@_recipe("dressed_seeded")
def dress_legs(base: UnitaryGate, legs: Sequence[str] = LEGS, seed: int = 0) -> UnitaryGate:
    """Multiply the chosen legs by seeded Haar one-site unitaries (drawn in LEGS order)."""
    if isinstance(base, dict):
        base = gate_from_recipe(base)
    bad = set(legs) - set(LEGS)
    if bad:
        raise ValueError(f"unknown legs {sorted(bad)}; choose from {LEGS}")
    rng = np.random.default_rng(seed)
    us = {leg: haar_unitary(base.q, rng) for leg in LEGS if leg in legs}
    V = local_dress(base, *(us.get(leg) for leg in LEGS))
    return UnitaryGate(base.q, V.matrix, {"kind": "dressed_seeded",
                                          "params": {"base": base.recipe, "legs": list(legs), "seed": seed}})


@_recipe("du_reference")
def dual_unitary_gate(q: int, seed: int, J: float | None = None) -> UnitaryGate:
    """Generic dual-unitary gate: exp(-i(pi/4 XX + pi/4 YY + J ZZ)) between Haar one-site layers.

    For q = 4 the qubit construction is applied to both halves of each site.
    """
    rng = np.random.default_rng(seed)
    if q == 2:
        Jz = float(rng.uniform(0, np.pi / 4)) if J is None else J
        core = expm(-1j * (np.pi / 4 * np.kron(X2, X2) + np.pi / 4 * np.kron(Y2, Y2) + Jz * ZZ))
        us = [haar_unitary(2, rng) for _ in range(4)]
        M = np.kron(us[2], us[3]) @ core @ np.kron(us[0], us[1])
    elif q == 4:
        a = dual_unitary_gate(2, int(rng.integers(2**31)), J)
        b = dual_unitary_gate(2, int(rng.integers(2**31)), J)
        M = tensor_product_gate(a, b).matrix
    else:
        raise ValueError("dual-unitary reference gates are provided for q in {2, 4}")
    return UnitaryGate(q, M, {"kind": "du_reference", "params": {"q": q, "seed": seed, "J": J}})


# ------------------------------------------------------------- controlled gates


class ControlledFlags(NamedTuple):
    orthogonal_blocks: bool
    flat_spectrum: bool
    l2_sufficient: bool


def _unitaries(u_list: Sequence[np.ndarray], q: int, tol: float = 1e-10) -> list[np.ndarray]:
    out = []
    for i, u in enumerate(u_list):
        u = np.asarray(u, dtype=np.complex128)
        if u.shape != (q, q):
            raise ValueError(f"block {i} has shape {u.shape}, expected {(q, q)}")
        if np.linalg.norm(u @ u.conj().T - np.eye(q)) > tol:
            raise ValueError(f"block {i} is not unitary")
        out.append(u)
    return out


@_recipe("controlled")
def controlled_unitary(u_list: Sequence) -> UnitaryGate:
    """sum_i |i><i| (x) u_i."""
    q = len(u_list)
    us = _unitaries([decode_matrix(u) if isinstance(u, list) else u for u in u_list], q)
    M = np.zeros((q * q, q * q), dtype=np.complex128)
    for i, u in enumerate(us):
        M[i * q:(i + 1) * q, i * q:(i + 1) * q] = u
    return UnitaryGate(q, M, {"kind": "controlled", "params": {"u_list": [encode_matrix(u) for u in us]}})


def controlled_flags(u_list: Sequence[np.ndarray], tol: float = 1e-10) -> ControlledFlags:
    """Block orthogonality, actual spectral flatness, and the completeness condition
    sum_i u_i |j><j| u_i^dag = 1 for every j."""
    q = len(u_list)
    us = _unitaries(u_list, q)
    gram = np.array([[np.trace(a.conj().T @ b) for b in us] for a in us])
    ortho = bool(np.abs(gram - np.diag(np.diag(gram))).max() <= tol)
    flat = schmidt_decompose(controlled_unitary(us)).is_flat()
    complete = all(
        np.abs(sum(np.outer(u[:, j], u[:, j].conj()) for u in us) - np.eye(q)).max() <= tol
        for j in range(q))
    return ControlledFlags(ortho, flat, bool(complete))


def generalized_cnot(q: int) -> UnitaryGate:
    X = shift_matrix(q)
    return controlled_unitary([np.linalg.matrix_power(X, i) for i in range(q)])


def controlled_x(q: int) -> UnitaryGate:
    if q % 2:
        raise ValueError("the alternating controlled-X gate needs even q")
    X = shift_matrix(q)
    return controlled_unitary([np.eye(q) if i % 2 == 0 else X for i in range(q)])


# ------------------------------------------------------------- named gates

_O8_SIGNS = """
--- + - + + +
--- + + - - -
-- + - - + - -
+ + - + - + - -
- + - - - - + -
+ - + + - - + -
+ - - - + + + -
+ - - - - - - +
"""


def o8_matrix() -> np.ndarray:
    """Real 8x8 Hadamard matrix representing the six-qubit perfect tensor."""
    rows = [[1.0 if ch == "+" else -1.0 for ch in line if ch in "+-"] for line in _O8_SIGNS.strip().splitlines()]
    return np.array(rows, dtype=np.complex128) / np.sqrt(8.0)


def fourier_gate(q1: int, q2: int) -> np.ndarray:
    """Fourier transform on C^q1 (x) C^q2 with the composite index as exponent."""
    d = q1 * q2
    k = np.arange(d)
    return np.exp(2j * np.pi * np.outer(k, k) / d) / np.sqrt(d)


def _named_matrix(name: str, q: int) -> np.ndarray:
    S = swap_matrix(q)
    if name == "identity":
        return np.eye(q * q, dtype=np.complex128)
    if name == "swap":
        return S
    if name == "cnot":
        return generalized_cnot(q).matrix
    if name == "cx":
        return controlled_x(q).matrix
    if name == "cz" and q == 2:
        return np.diag([1, 1, 1, -1]).astype(np.complex128)
    if name == "P_CXSCXS" and q % 2 == 0:
        CX = controlled_x(q).matrix
        return CX @ S @ CX @ S
    if q == 4:
        X8 = shift_matrix(8)
        F, O = fourier_gate(2, 4), o8_matrix()
        X2_8 = X8 @ X8
        blocks = {"F2x4_block": (F, F), "F2x4_rank8": (F, X2_8 @ F @ X2_8),
                  "O8_block": (O, O), "O8_rank8": (O, X2_8 @ O)}
        if name in blocks:
            return block_diagonal_gate(list(blocks[name])).matrix
    raise ValueError(f"named gate {name!r} is not available for q={q}")


NAMED_GATES = ("identity", "swap", "cnot", "cx", "cz", "P_CXSCXS",
               "F2x4_block", "F2x4_rank8", "O8_block", "O8_rank8")


@_recipe("named")
def named_gate(name: str, q: int = 2) -> UnitaryGate:
    return UnitaryGate(q, _named_matrix(name, q), {"kind": "named", "params": {"name": name, "q": q}})


# ------------------------------------------------------------- Hadamard lattices


@dataclass(frozen=True, eq=False)
class HadamardMatrix:
    q: int
    entries: np.ndarray
    recipe: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        H = np.array(self.entries, dtype=np.complex128)
        if H.shape != (self.q, self.q):
            raise ValueError(f"expected a {self.q}x{self.q} matrix")
        if np.abs(np.abs(H) - 1).max() > 1e-12:
            raise ValueError("complex Hadamard entries must be unimodular")
        if np.linalg.norm(H @ H.conj().T - self.q * np.eye(self.q)) > 1e-10:
            raise ValueError("rows are not orthogonal: H H^dag != q 1")
        H.setflags(write=False)
        object.__setattr__(self, "entries", H)


def complex_hadamard(kind: Literal["fourier", "qubit_standard", "dephased"], q: int = 2,
                     base: "HadamardMatrix | None" = None, row_phases: Sequence[float] | None = None,
                     col_phases: Sequence[float] | None = None) -> HadamardMatrix:
    """Fourier matrix omega^(ab), the standard qubit Hadamard, or D1 H D2 with phases given as angles."""
    if kind == "fourier":
        k = np.arange(q)
        return HadamardMatrix(q, np.exp(2j * np.pi * np.outer(k, k) / q), {"kind": "fourier", "q": q})
    if kind == "qubit_standard":
        return HadamardMatrix(2, np.array([[1, 1], [1, -1]]), {"kind": "qubit_standard"})
    if kind == "dephased":
        if base is None:
            raise ValueError("dephasing needs a base matrix")
        rp = np.zeros(base.q) if row_phases is None else np.asarray(row_phases, float)
        cp = np.zeros(base.q) if col_phases is None else np.asarray(col_phases, float)
        H = np.exp(1j * rp)[:, None] * base.entries * np.exp(1j * cp)[None, :]
        return HadamardMatrix(base.q, H, {"kind": "dephased", "base": base.recipe,
                                          "row_phases": rp.tolist(), "col_phases": cp.tolist()})
    raise ValueError(f"unknown Hadamard kind {kind!r}")


def random_dephased_hadamard(q: int, seed: int) -> HadamardMatrix:
    rng = np.random.default_rng(seed)
    base = complex_hadamard("qubit_standard") if q == 2 else complex_hadamard("fourier", q)
    return complex_hadamard("dephased", base=base, row_phases=rng.uniform(0, 2 * np.pi, q),
                            col_phases=rng.uniform(0, 2 * np.pi, q))


def _hadamard_from_recipe(r: dict) -> HadamardMatrix:
    if r["kind"] == "dephased":
        return complex_hadamard("dephased", base=_hadamard_from_recipe(r["base"]),
                                row_phases=r["row_phases"], col_phases=r["col_phases"])
    return complex_hadamard(r["kind"], r.get("q", 2))


LATTICES = ("square_du", "honeycomb", "triangular", "sheared")


@_recipe("hadamard")
def hadamard_gate(lattice: str, H: "HadamardMatrix | dict") -> UnitaryGate:
    if isinstance(H, dict):
        H = _hadamard_from_recipe(H)
    q, h = H.q, H.entries
    delta = np.eye(q)
    if lattice == "square_du":
        T = np.einsum("ab,bd,cd,ac->abcd", h, h, h, h) / q
    elif lattice == "honeycomb":
        T = np.einsum("ac,af,bf,df->abcd", delta, h, h, h) / q
    elif lattice == "triangular":
        T = np.einsum("ac,ab,ad,bd->abcd", delta, h, h, h) / np.sqrt(q)
    elif lattice == "sheared":
        T = np.einsum("ac,ab,bd->abcd", delta, h, h) / np.sqrt(q)
    else:
        raise ValueError(f"unknown lattice {lattice!r}; choose from {LATTICES}")
    return UnitaryGate(q, T.reshape(q * q, q * q), {"kind": "hadamard",
                                                    "params": {"lattice": lattice, "H": H.recipe}})


# ------------------------------------------------------------- composite gates


@_recipe("tensor_product")
def tensor_product_gate(V1: "UnitaryGate | dict", V2: "UnitaryGate | dict") -> UnitaryGate:
    """Site 1 carries (a1, a2) and site 2 carries (b1, b2): U = Pi (V1 x V2) Pi^dag."""
    V1 = gate_from_recipe(V1) if isinstance(V1, dict) else V1
    V2 = gate_from_recipe(V2) if isinstance(V2, dict) else V2
    q = V1.q * V2.q
    check_budget(float(q) ** 4, f"tensor product gate at q={q}")
    T = np.einsum("abcd,efgh->aebfcgdh", V1.tensor, V2.tensor)
    return UnitaryGate(q, T.reshape(q * q, q * q), {"kind": "tensor_product",
                                                    "params": {"V1": V1.recipe, "V2": V2.recipe}})


@_recipe("block_diagonal")
def block_diagonal_gate(blocks: Sequence) -> UnitaryGate:
    """sum_k |k><k| (x) V_k, the block index being the leading factor of site 1."""
    bl = [decode_matrix(b) if isinstance(b, list) else np.asarray(b, dtype=np.complex128) for b in blocks]
    D = bl[0].shape[0]
    if any(b.shape != (D, D) for b in bl):
        raise ValueError("all blocks must be square with equal size")
    total = D * len(bl)
    q = int(round(math.sqrt(total)))
    if q * q != total or q % len(bl):
        raise ValueError(f"{len(bl)} blocks of size {D} do not tile a two-site space")
    M = np.zeros((total, total), dtype=np.complex128)
    for k, b in enumerate(bl):
        M[k * D:(k + 1) * D, k * D:(k + 1) * D] = b
    return UnitaryGate(q, M, {"kind": "block_diagonal", "params": {"blocks": [encode_matrix(b) for b in bl]}})


def permutation_gate(perm: Sequence[int], q: int) -> UnitaryGate:
    """U|c> = |perm[c]> on the composite basis."""
    D = q * q
    p = np.asarray(perm, dtype=np.int64)
    if sorted(p.tolist()) != list(range(D)):
        raise ValueError(f"not a permutation of {D} symbols")
    M = np.zeros((D, D), dtype=np.complex128)
    M[p, np.arange(D)] = 1
    return UnitaryGate(q, M, {"kind": "permutation", "params": {"perm": p.tolist(), "q": q}})


_RECIPES["permutation"] = permutation_gate


@_recipe("explicit")
def explicit_gate(matrix: list, q: int | None = None) -> UnitaryGate:
    M = decode_matrix(matrix)
    _, qq = _matrix(M)
    return UnitaryGate(q or qq, M, {"kind": "explicit", "params": {"matrix": encode_matrix(M)}})


@_recipe("dressed")
def _dressed_from_params(of: dict, **us) -> UnitaryGate:
    base = gate_from_recipe(of)
    mats = {k: decode_matrix(v) for k, v in us.items()}
    return local_dress(base, mats.get("u_in_left"), mats.get("u_in_right"),
                       mats.get("u_out_left"), mats.get("u_out_right"))


@_recipe("haar")
def _haar_from_params(seed: int, q: int = 2) -> UnitaryGate:
    return UnitaryGate(q, haar_unitary(q * q, seed), {"kind": "haar", "params": {"seed": seed, "q": q}})


@_recipe("random_qubit_L2")
def _random_l2(seed: int) -> UnitaryGate:
    return random_qubit_L2(seed)


@_recipe("random_qubit_L3")
def _random_l3(seed: int) -> UnitaryGate:
    return random_qubit_L3(seed)


@_recipe("random_hadamard")
def _random_hadamard(lattice: str, q: int, seed: int) -> UnitaryGate:
    return hadamard_gate(lattice, random_dephased_hadamard(q, seed))


@_recipe("dagger")
def _dagger(of: dict) -> UnitaryGate:
    return gate_from_recipe(of).dagger()


@_recipe("reflected")
def _reflected(of: dict) -> UnitaryGate:
    return reflected_gate(gate_from_recipe(of))


@_recipe("growth_reference")
def _growth_reference(q: int, seed: int) -> UnitaryGate:
    from .quench import reference_gate

    return reference_gate(q, seed)


def gate_from_recipe(recipe: dict) -> UnitaryGate:
    """Rebuild a gate from {kind, params}; replaying a recorded recipe is bit-exact."""
    try:
        kind, params = recipe["kind"], dict(recipe.get("params", {}))
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed gate recipe {recipe!r}") from exc
    if kind not in _RECIPES:
        raise ValueError(f"unknown gate kind {kind!r}; known: {sorted(_RECIPES)}")
    if kind == "dressed_seeded":
        params["base"] = gate_from_recipe(params["base"])
    return _RECIPES[kind](**params)


# ------------------------------------------------------------- permutation search


@dataclass
class PermutationSearchResult:
    q: int
    exhaustive: bool
    scanned: int
    flat: int
    members: list[tuple[list[int], int]]
    histogram: dict[int, int]

    @property
    def entangling(self) -> list[tuple[list[int], int]]:
        D = self.q * self.q
        return [(p, r) for p, r in self.members if 1 < r < D]


def _is_flat_perm(p: np.ndarray, q: int) -> bool:
    R = np.rint(reshuffle(permutation_gate(p, q)).real).astype(np.int64)
    G = R @ R.T
    G2 = G @ G
    return bool(np.all(q * q * G2 == np.trace(G2) * G))


def permutation_search_L2(q: int, samples: int | None = None, seed: int = 0,
                          tol: float = 1e-10) -> PermutationSearchResult:
    """All (q <= 3) or sampled (q = 4) permutation gates passing the level-2 check in both directions.

    A flat operator Schmidt spectrum is necessary, so an exact integer
    flatness test prunes the candidates before the tensor contraction.
    """
    D = q * q
    if samples is None:
        if q >= 4:
            raise ValueError("exhaustive permutation search is limited to q <= 3; pass samples=")
        mask = _kernels.flat_perm_scan(q)
        idx = np.flatnonzero(mask)
        cands = [_kernels.nth_permutation(int(n), D) for n in idx]
        scanned = math.factorial(D)
    else:
        rng = np.random.default_rng(seed)
        cands = [p for p in (rng.permutation(D) for _ in range(samples)) if _is_flat_perm(p, q)]
        scanned = samples
    members, hist = [], Counter()
    for p in cands:
        G = permutation_gate(p, q)
        if verify_Lk(G, 2, "right", tol).ok and verify_Lk(G, 2, "left", tol).ok:
            r = int(np.linalg.matrix_rank(reshuffle(G).real))
            members.append((p.tolist(), r))
            hist[r] += 1
    return PermutationSearchResult(q, samples is None, scanned, len(cands), members,
                                   dict(sorted(hist.items())))
