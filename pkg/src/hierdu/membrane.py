"""Operator entanglement of brickwork circuits, line tension and velocity bounds.

The Renyi-2 operator entanglement across a cut at offset x after t layers
reduces, by unitarity, to an m x n rectangle of folded gates.  It is
contracted by a column transfer sweep whose width is min(m, n); the larger
extent is reached by mirroring the gate, which exchanges m and n.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ._config import check_budget
from ._network import sweep, z2_sweep
from .analysis import b1_from_schmidt, verify_Lk
from .tensor_core import UnitaryGate, _matrix, boundary_vector, fold, reflect


@dataclass(frozen=True)
class CutCoordinates:
    x: int
    t: int
    m: int
    n: int

    @property
    def v(self) -> float:
        return self.x / self.t if self.t else 0.0


def cut_coordinates(x: int, t: int) -> CutCoordinates:
    if t < 0 or abs(x) > t:
        raise ValueError(f"cut (x={x}, t={t}) lies outside the light cone")
    p = x % 2
    return CutCoordinates(x, t, (t + x - p) // 2, (t - x - p) // 2)


# ------------------------------------------------------------------ Z networks


def z_alpha_exact(U: "UnitaryGate | np.ndarray", m: int, n: int, alpha: int = 2) -> float:
    """Exact Z_2(m, n); an empty rectangle gives the unentangled value q^-(m+n)."""
    if alpha != 2:
        raise ValueError("exact contraction is implemented for alpha = 2 only")
    if m < 0 or n < 0:
        raise ValueError("rectangle extents must be nonnegative")
    M, q = _matrix(U)
    if min(m, n) == 0:
        return float(q ** (-(m + n)))
    if m >= n:
        return z2_sweep(M, q, n, m)[-1]
    return z2_sweep(reflect(M), q, m, n)[-1]


def z2_series(U: "UnitaryGate | np.ndarray", n: int, m_max: int) -> list[float]:
    """Z_2(m, n) for m = 1..m_max at fixed width n, from a single sweep."""
    M, q = _matrix(U)
    return z2_sweep(M, q, n, m_max)


def z2_tilde(U: "UnitaryGate | np.ndarray", m: int, n: int) -> float:
    """The second purity entering the tripartite information (square corners swapped to the top)."""
    M, q = _matrix(U)
    if min(m, n) == 0:
        # no gate links the two cuts, so the tripartite information vanishes
        return 1.0
    if m < n:
        M, m, n = reflect(M), n, m
    return sweep(M, q, n, m, "square", "circle", "circle", "square")[-1]


def z2_closed_form(B1: float, q: int, m: int, n: int) -> float:
    if not 1.0 - 1e-12 <= B1 <= q * q + 1e-12:
        raise ValueError(f"B1 must lie in [1, q^2], got {B1}")
    return B1 ** min(m, n) / q ** (m + n)


def zk_factorized(B: float, q: int, m: int, n: int) -> float:
    """Level-k factorized value B_{k-1}^n / q^(m+n), valid when m >= (k-1) n."""
    return B**n / q ** (m + n)


# ------------------------------------------------------------------ line tension


@dataclass
class MembraneScan:
    q: int
    alpha: int
    s_eq: float
    rows: list[dict] = field(default_factory=list)
    v_E: float | None = None
    elt: dict[float, float] = field(default_factory=dict)

    COLUMNS = ("x", "t", "m", "n", "Z", "S", "ELT")

    def to_dict(self) -> dict:
        return asdict(self)


def elt_scan(U: "UnitaryGate | np.ndarray", velocities, t_values, alpha: int = 2) -> MembraneScan:
    """S_alpha / (s_eq t) on the grid x = round(v t); v_E is read off at the largest t with x = 0.

    Only alpha = 2 is contracted; other alpha use the flat-spectrum closed form
    and therefore require a gate passing the level-2 check in both directions.
    """
    M, q = _matrix(U)
    closed = None
    if alpha != 2:
        if alpha < 2:
            raise ValueError("alpha must be >= 2")
        if not (verify_Lk(M, 2, "right").ok and verify_Lk(M, 2, "left").ok):
            raise ValueError("alpha != 2 is only available for gates at the lowest hierarchy level")
        closed = b1_from_schmidt(M)
    scan = MembraneScan(q, alpha, math.log(q))
    for t in t_values:
        for v in velocities:
            x = int(round(v * t))
            c = cut_coordinates(x, t)
            if closed is None:
                Z = z_alpha_exact(M, c.m, c.n)
            else:
                # flat spectrum: S_alpha = S_2
                Z = z2_closed_form(closed, q, c.m, c.n) ** (alpha - 1)
            S = -math.log(Z) / (alpha - 1)
            elt = S / (scan.s_eq * t) if t else 0.0
            scan.rows.append({"x": x, "t": t, "m": c.m, "n": c.n, "Z": Z, "S": S, "ELT": elt})
    if scan.rows:
        tmax = max(r["t"] for r in scan.rows)
        for r in scan.rows:
            if r["t"] == tmax:
                scan.elt[r["x"] / r["t"]] = r["ELT"]
                if r["x"] == 0:
                    scan.v_E = r["ELT"]
    return scan


def ve_from_rank(q: int, rank: int) -> float:
    if not 1 <= rank <= q * q:
        raise ValueError(f"Schmidt rank must lie in [1, q^2], got {rank}")
    return math.log(rank) / math.log(q * q)


@dataclass(frozen=True)
class VelocityBounds:
    q: int
    k_left: int | None
    k_right: int | None
    B_left: float | None
    B_right: float | None
    v_star_left: float
    v_star_right: float
    lower: float
    upper: float
    case: str

    def to_dict(self) -> dict:
        return asdict(self)


def ve_bounds(q: int, k_left: int | None, k_right: int | None,
              B_left: float | None = None, B_right: float | None = None) -> VelocityBounds:
    """Bounds on v_E from exactly known line-tension segments on either side.

    A side at level k fixes E(v) = 1 - (1 - |v|) s with s = log B_{k-1} / log q^2
    for |v| >= v* = (k-2)/k.  Convexity between the two solvable points gives
    the upper bound; an absent side contributes the light-cone point E(1) = 1.
    """
    sides = {}
    for name, k, B in (("left", k_left, B_left), ("right", k_right, B_right)):
        if k is None:
            sides[name] = (1.0, 1.0, None)
            continue
        if k < 2:
            raise ValueError("hierarchy level must be >= 2")
        if B is None or not 1.0 - 1e-12 <= B <= q * q + 1e-12:
            raise ValueError(f"B for the {name} side must lie in [1, q^2]")
        s = math.log(B) / math.log(q * q)
        v_star = (k - 2) / k
        sides[name] = (v_star, 1.0 - (1.0 - v_star) * s, s)
    if sides["left"][2] is None and sides["right"][2] is None:
        raise ValueError("at least one side must carry a hierarchy level")
    lower = max(1.0 - s for _, _, s in sides.values() if s is not None)
    vl, el, _ = sides["left"]
    vr, er, _ = sides["right"]
    upper = (vr * el + vl * er) / (vr + vl) if vr + vl > 0 else el
    if k_left is None or k_right is None:
        case = "one-sided"
    elif k_left == k_right and math.isclose(B_left, B_right):
        case = "symmetric"
    else:
        case = "general"
    return VelocityBounds(q, k_left, k_right, B_left, B_right, vl, vr, lower, upper, case)


# ------------------------------------------------------------------ influence matrix


def _im_transfer(W: np.ndarray, F: np.ndarray, Fc: np.ndarray, t: int, c: np.ndarray) -> np.ndarray:
    """Move the right influence matrix two sites to the left.

    W carries legs (in_L_j, out_L_j) of the bond-(s, s+1) gates at layers 2j,
    j = 1..t-1.  One step contracts the bond-(s+1, s+2) gates of the odd
    layers and the bond-(s, s+1) gates of the even layers into it.
    """
    nl = 2 * (t - 1)
    counter = [nl]

    def new() -> int:
        counter[0] += 1
        return counter[0]

    S, sl = W, list(range(nl))
    carry = new()
    S, sl = np.multiply.outer(S, c), sl + [carry]
    outs = []
    for j in range(1, t):
        oL, outR = new(), 2 * (j - 1)
        if j == 1:
            G, gl = Fc, [oL, outR, carry]
        else:
            G, gl = F, [oL, outR, carry, 2 * (j - 2) + 1]
        keep = [l for l in sl if l not in gl] + [oL]
        S = np.einsum(G, gl, S, sl, keep, optimize=True)
        sl, carry = keep, oL
        iL, oLb, oR = new(), new(), new()
        gl = [oLb, oR, iL, carry]
        keep = [l for l in sl if l != carry] + [iL, oLb, oR]
        S = np.einsum(F, gl, S, sl, keep, optimize=True)
        sl, carry = keep, oR
        outs += [iL, oLb]
    for leg in (carry, 2 * (t - 2) + 1):
        rest = [l for l in sl if l != leg]
        S = np.einsum(S, sl, c, [leg], rest, optimize=True)
        sl = rest
    return np.einsum(S, sl, outs)


def influence_matrix(U: "UnitaryGate | np.ndarray", t: int, tol: float = 1e-13,
                     max_iter: int | None = None) -> np.ndarray:
    """Right influence matrix at infinite temperature on a vertical cut, normalized, phase fixed.

    Obtained by iterating the two-site transfer from an open end until it
    stops changing.
    """
    if t < 2:
        raise ValueError("the influence matrix needs t >= 2")
    M, q = _matrix(U)
    D = q * q
    check_budget(8.0 * D ** (2 * t - 1), f"influence matrix at t={t}")
    F = fold(M, 1).tensor
    c = boundary_vector("circle", q, 1).data
    Fc = np.tensordot(F, c, axes=([3], [0]))
    W = np.ones(())
    for _ in range(t - 1):
        W = np.multiply.outer(W, np.eye(D))
    W = W / np.linalg.norm(W)
    for _ in range(max_iter or t + 3):
        Wn = _im_transfer(W, F, Fc, t, c)
        Wn = Wn / np.linalg.norm(Wn)
        k = np.argmax(np.abs(Wn))
        Wn = Wn * abs(Wn.flat[k]) / Wn.flat[k]
        done = np.linalg.norm(Wn - W) < tol
        W = Wn
        if done:
            break
    return W


def temporal_cut_ranks(W: np.ndarray, q: int, cutoff: float = 1e-8) -> list[int]:
    D = q * q
    out = []
    for pos in range(1, W.ndim):
        s = np.linalg.svd(W.reshape(D**pos, -1), compute_uv=False)
        out.append(int(np.sum(s > cutoff * s[0])))
    return out


def im_area_law_check(U: "UnitaryGate | np.ndarray", t: int, v: float = 0.0) -> list[int]:
    """Schmidt ranks of the influence matrix across every temporal cut."""
    if v != 0:
        raise ValueError("only the vertical cut v = 0 is implemented")
    M, q = _matrix(U)
    if t == 1:
        return [1]
    return temporal_cut_ranks(influence_matrix(M, t), q)
