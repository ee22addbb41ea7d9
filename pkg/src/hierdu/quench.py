"""Exact brickwork evolution of states and infinite-temperature correlators.

States live on a periodic chain of even length N with site 0 the most
significant digit.  Layer tau acts on bonds (s, s+1) with s = tau - 1 mod 2,
the odd-bond layers including the wrap-around bond (N-1, 0).

Two-point correlators are contracted in the folded picture: only the gates
in the causal region between the two operators survive, every other gate
cancels against its conjugate.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from ._config import check_budget
from .tensor_core import UnitaryGate, _matrix, boundary_vector, fold, haar_unitary, swap_matrix

# ------------------------------------------------------------------ states


@dataclass
class StateVector:
    q: int
    N: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        if self.amplitudes.shape != (self.q**self.N,):
            raise ValueError(f"expected {self.q ** self.N} amplitudes, got {self.amplitudes.shape}")

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def _state_budget(q: int, N: int) -> None:
    check_budget(3.0 * float(q) ** N, f"state vector with q={q}, N={N}")


def _site_vector(q: int, seed: int) -> np.ndarray:
    return haar_unitary(q, np.random.default_rng(seed))[:, 0]


def random_product_state(q: int, N: int, seed: int, translation_invariant: bool = True) -> StateVector:
    """Haar-random one-site vector repeated on every site, or drawn per site."""
    _state_budget(q, N)
    rng = np.random.default_rng(seed)
    vecs = [haar_unitary(q, rng)[:, 0] for _ in range(1 if translation_invariant else N)]
    psi = np.ones(1, dtype=np.complex128)
    for s in range(N):
        psi = np.kron(psi, vecs[0 if translation_invariant else s])
    return StateVector(q, N, psi / np.linalg.norm(psi))


def brickwork_layer(psi: np.ndarray, M: np.ndarray, q: int, N: int, tau: int) -> np.ndarray:
    for s in range((tau - 1) % 2, N, 2):
        psi = _kernels.apply_two_site(psi, M, q, N, s, (s + 1) % N)
    return psi


def evolve_brickwork(state: StateVector, U: "UnitaryGate | np.ndarray", layers: int,
                     first_layer: int = 1) -> StateVector:
    M, q = _matrix(U)
    if q != state.q:
        raise ValueError(f"gate acts on q={q} but the state has q={state.q}")
    if state.N % 2 or state.N < 2:
        raise ValueError("periodic brickwork needs an even chain length")
    psi = state.amplitudes
    for tau in range(first_layer, first_layer + layers):
        psi = brickwork_layer(psi, M, q, state.N, tau)
    return StateVector(q, state.N, psi)


def renyi_entropy(state: StateVector, cut_position: int | None = None, alpha: float = 2) -> float:
    """Renyi entropy of sites [0, cut) against the rest; alpha = 1 is von Neumann."""
    cut = state.N // 2 if cut_position is None else cut_position
    if not 0 <= cut <= state.N:
        raise ValueError(f"cut {cut} outside the chain of length {state.N}")
    s = np.linalg.svd(state.amplitudes.reshape(state.q**cut, -1), compute_uv=False)
    p = s**2 / np.sum(s**2)
    p = p[p > 1e-300]
    if alpha == 1:
        return max(0.0, float(-np.sum(p * np.log(p))))
    return max(0.0, float(math.log(np.sum(p**alpha)) / (1 - alpha)))


# ------------------------------------------------------------------ growth


@dataclass
class GrowthSeries:
    q: int
    N: int
    seed: int
    S2: list[float]
    window: tuple[int, int]
    slope: float
    reference_slope: float | None = None
    reference_S2: list[float] = field(default_factory=list)
    recipe: dict | None = None

    COLUMNS = ("t", "S2", "S2_reference")

    @property
    def v_E(self) -> float | None:
        if not self.reference_slope:
            return None
        return self.slope / self.reference_slope

    @property
    def exceeds_reference(self) -> bool:
        """Flag only: growth faster than the dual-unitary reference."""
        return self.reference_slope is not None and self.slope > self.reference_slope * (1 + 1e-3)

    def rows(self):
        for t, s in enumerate(self.S2):
            ref = self.reference_S2[t] if t < len(self.reference_S2) else float("nan")
            yield {"t": t, "S2": s, "S2_reference": ref}

    def metadata(self) -> dict:
        d = asdict(self)
        d.pop("S2")
        d.pop("reference_S2")
        d.update(boundary="periodic", layers=len(self.S2) - 1, v_E=self.v_E,
                 exceeds_reference=self.exceeds_reference)
        return d


def half_chain_series(U: "UnitaryGate | np.ndarray", N: int, layers: int, seed: int) -> list[float]:
    M, q = _matrix(U)
    state = random_product_state(q, N, seed)
    out = [renyi_entropy(state)]
    psi = state.amplitudes
    for tau in range(1, layers + 1):
        psi = brickwork_layer(psi, M, q, N, tau)
        out.append(renyi_entropy(StateVector(q, N, psi)))
    return out


def reference_gate(q: int, seed: int) -> UnitaryGate:
    """Dual-unitary SWAP CZ_q with inputs rotated so that the seeded site vector becomes |+>.

    The first layer then turns the product state into maximally entangled
    pairs, from which a dual-unitary circuit grows entanglement at the
    largest possible rate.
    """
    psi = _site_vector(q, seed)
    basis = np.linalg.qr(np.column_stack([psi, np.eye(q)[:, : q - 1]]))[0]
    basis[:, 0] = psi
    plus = np.fft.fft(np.eye(q), norm="ortho").conj()  # column 0 is the uniform vector
    u = plus @ basis.conj().T
    w = np.exp(2j * np.pi / q)
    cz = np.diag([w ** (a * b) for a in range(q) for b in range(q)])
    M = swap_matrix(q) @ cz @ np.kron(u, u)
    return UnitaryGate(q, M, {"kind": "growth_reference", "params": {"q": q, "seed": seed}})


def _linfit(S: Sequence[float], lo: int, hi: int) -> float:
    """Slope over the even layers in [lo, hi]; odd layers leave the half-chain cuts untouched."""
    t = np.arange(lo + lo % 2, hi + 1, 2)
    if t.size < 2:
        return float("nan")
    return float(np.polyfit(t, np.asarray(S)[t], 1)[0])


def fit_window(S: Sequence[float], q: int, N: int, start: int = 2) -> tuple[tuple[int, int], float]:
    """Two-pass least-squares slope before saturation.

    The saturation scale is the measured plateau max(S), which for Renyi-2
    of a pure state sits below (N/2) log q.  Pass one ends the window before
    S first exceeds 80% of the plateau; pass two ends it at 0.6 of the
    plateau over the first slope, never past pass one.  At least two even
    layers are kept.
    """
    S = list(S)
    plateau, end = max(S), len(S) - 1
    for t in range(start, len(S)):
        if S[t] > 0.8 * plateau:
            end = t - 1
            break
    floor_end = min(start + 2 + start % 2, len(S) - 1)
    end = max(end, floor_end)
    guess = _linfit(S, start, end)
    if guess > 0:
        end = max(floor_end, min(end, int(math.floor(0.6 * plateau / guess))))
    return (start, end), _linfit(S, start, end)


def _mean_series(U: "UnitaryGate | np.ndarray", N: int, layers: int, seeds: Sequence[int]) -> list[float]:
    return list(np.mean([half_chain_series(U, N, layers, s) for s in seeds], axis=0))


def entanglement_growth(U: "UnitaryGate | np.ndarray", N: int, layers: int, seed: int,
                        reference: "UnitaryGate | np.ndarray | None" = None,
                        window: tuple[int, int] | None = None, n_states: int = 1) -> GrowthSeries:
    """Half-chain S_2 after each layer from random translation-invariant product states.

    With n_states > 1 the series is averaged over the initial states drawn
    from seeds seed, seed+1, ...  v_E is the fitted slope divided by that of
    a dual-unitary reference run, which grows at the maximal rate from t = 0,
    so the two boundaries of the periodic chain and the time unit drop out.
    """
    M, q = _matrix(U)
    _state_budget(q, N)
    if layers < 4:
        raise ValueError("need at least 4 layers to fit a slope")
    seeds = list(range(seed, seed + n_states))
    S = _mean_series(M, N, layers, seeds)
    if window is None:
        window, slope = fit_window(S, q, N)
    else:
        slope = _linfit(S, *window)
    refs = [reference if reference is not None else reference_gate(q, s) for s in seeds]
    R = list(np.mean([half_chain_series(g, N, layers, s) for g, s in zip(refs, seeds)], axis=0))
    # the reference is exactly linear until it saturates
    _, ref_slope = fit_window(R, q, N, start=0)
    recipe = U.recipe if isinstance(U, UnitaryGate) else None
    return GrowthSeries(q, N, seed, S, window, slope, ref_slope, R, recipe)


# ------------------------------------------------------------------ correlators


def _causal_region(b_sites: Sequence[int], a_sites: Sequence[int], t: int) -> dict[int, tuple[int, int]]:
    """Gates (i, j) in the light-cone coordinates of the folded network that survive.

    Gate (i, j) sits at layer i + j + 1 on bond (i - j, i - j + 1).  It is kept
    when it lies in the forward cone of some B site and the backward cone of
    some A site.  Returned as column i -> row range [lo, hi].
    """
    fw = {((s - s % 2) // 2, -(s - s % 2) // 2) for s in b_sites}
    bw = set()
    for s in a_sites:
        sp = s - (s - (t - 1)) % 2
        bw.add(((sp + t - 1) // 2, (t - 1 - sp) // 2))
    region = {}
    for i in range(min(a for a, _ in fw), max(a for a, _ in bw) + 1):
        lo = min((b for a, b in fw if a <= i), default=None)
        hi = max((b for a, b in bw if a >= i), default=None)
        if lo is None or hi is None:
            continue
        lo, hi = max(lo, -i), min(hi, t - 1 - i)
        if lo <= hi:
            region[i] = (lo, hi)
    return region


def _sweep_region(W: np.ndarray, region: dict[int, tuple[int, int]], bvec) -> complex:
    """Contract the folded gates of a region column by column.

    Column i holds gates (i, lo..hi) linked out_L -> in_R going up in j.  The
    sweep state keeps one leg per open row; rows entering or leaving a column
    are capped by bvec(kind, i, j).
    """
    cols = sorted(region)
    state, rows = np.ones(()), []
    for i in cols:
        lo, hi = region[i]
        for ax in reversed(range(len(rows))):
            if not lo <= rows[ax] <= hi:
                state = np.tensordot(state, bvec("out_R", i - 1, rows[ax]), axes=([ax], [0]))
        rows = [j for j in rows if lo <= j <= hi]
        for j in range(lo, hi + 1):
            if j not in rows:
                pos = sum(1 for r in rows if r < j)
                state = np.moveaxis(np.multiply.outer(state, bvec("in_L", i, j)), -1, pos)
                rows.insert(pos, j)
        state = np.multiply.outer(state, bvec("in_R", i, lo))
        for ax in range(len(rows)):
            state = np.tensordot(state, W, axes=([ax, state.ndim - 1], [2, 3]))
            state = np.moveaxis(state, -1, ax)
        state = np.tensordot(state, bvec("out_L", i, hi), axes=([state.ndim - 1], [0]))
    for ax in reversed(range(len(rows))):
        state = np.tensordot(state, bvec("out_R", cols[-1], rows[ax]), axes=([ax], [0]))
    return complex(state)


def correlator(U: "UnitaryGate | np.ndarray", op_A: Sequence[np.ndarray], op_B: Sequence[np.ndarray],
               x: int, t: int) -> complex:
    """q^-N tr[A(x, t) B(0, 0)] for product operators.

    B occupies sites 0..len(op_B)-1 at time 0 and A sites x..x+len(op_A)-1
    after t layers; operators left outside the causal region contribute tr/q.
    """
    M, q = _matrix(U)
    b_sites = list(range(len(op_B)))
    a_sites = [x + k for k in range(len(op_A))]
    if t == 0:
        val = 1.0 + 0j
        ops = {}
        for s, o in zip(b_sites, op_B):
            ops[s] = np.asarray(o)
        for s, o in zip(a_sites, op_A):
            ops[s] = np.asarray(o) @ ops[s] if s in ops else np.asarray(o)
        for o in ops.values():
            val *= np.trace(o) / q
        return complex(val)
    region = _causal_region(b_sites, a_sites, t)
    W = fold(M, 1).tensor
    circ = boundary_vector("circle", q, 1).data
    used: set[tuple[str, int]] = set()
    root = math.sqrt(q)

    def bvec(kind: str, i: int, j: int) -> np.ndarray:
        site, time = i - j + kind.endswith("_R"), i + j + kind.startswith("out")
        if kind.startswith("in") and time == 0 and site in b_sites:
            used.add(("B", site))
            return np.asarray(op_B[site], dtype=np.complex128).reshape(-1) / root
        if kind.startswith("out") and time == t and site in a_sites:
            used.add(("A", site))
            return np.asarray(op_A[site - x], dtype=np.complex128).T.reshape(-1) / root
        return circ

    val = _sweep_region(W, region, bvec) if region else 1.0 + 0j
    for tag, sites, ops in (("B", b_sites, op_B), ("A", a_sites, op_A)):
        for s, o in zip(sites, ops):
            if (tag, s) not in used:
                val *= np.trace(o) / q
    return complex(val)


@dataclass
class CorrelatorMap:
    q: int
    labels: tuple[str, str]
    support: int
    t_max: int
    values: dict[tuple[int, int], complex]
    threshold: float = 1e-10

    COLUMNS = ("x", "t", "D_real", "D_imag")

    def rows(self):
        for (x, t), v in sorted(self.values.items(), key=lambda kv: (kv[0][1], kv[0][0])):
            yield {"x": x, "t": t, "D_real": v.real, "D_imag": v.imag}

    def ray_interval(self, x: int, t: int) -> tuple[float, float]:
        """Velocities realised by site pairs of the two supports at grid point (x, t)."""
        w = self.support - 1
        return (x - w) / t, (x + w) / t

    def points_inside(self, lo: float, hi: float) -> list[tuple[int, int]]:
        """Grid points (t >= 1) whose whole ray interval lies in the open range (lo, hi)."""
        out = []
        for (x, t) in self.values:
            if t:
                vmin, vmax = self.ray_interval(x, t)
                if lo < vmin and vmax < hi:
                    out.append((x, t))
        return out

    def points_on(self, v: float) -> list[tuple[int, int]]:
        out = []
        for (x, t) in self.values:
            if t:
                vmin, vmax = self.ray_interval(x, t)
                if vmin - 1e-12 <= v <= vmax + 1e-12:
                    out.append((x, t))
        return out

    def max_abs(self, points) -> float:
        return max((abs(self.values[p]) for p in points), default=0.0)

    def classify(self, velocities: Sequence[float]) -> dict[float, str]:
        """'supported' when some grid point on the ray exceeds the threshold."""
        return {v: "supported" if self.max_abs(self.points_on(v)) > self.threshold else "vanishing"
                for v in velocities}

    def to_dict(self) -> dict:
        return {"q": self.q, "labels": list(self.labels), "support": self.support, "t_max": self.t_max,
                "threshold": self.threshold, "rows": list(self.rows())}


def correlator_map(U: "UnitaryGate | np.ndarray", op_A: Sequence[np.ndarray], op_B: Sequence[np.ndarray],
                   t_max: int, support_width: int | None = None,
                   labels: tuple[str, str] = ("A", "B")) -> CorrelatorMap:
    """D(x, t) on every x where the two supports are causally connected, t = 0..t_max."""
    M, q = _matrix(U)
    s = support_width or max(len(op_A), len(op_B))
    if len(op_A) > s or len(op_B) > s:
        raise ValueError("operator longer than the declared support width")
    if s > 3:
        raise ValueError("operators are limited to 3 adjacent sites")
    # widest sweep state: one folded leg per open row plus the carry
    check_budget(3.0 * float(q) ** (2 * ((t_max + 2 * s) // 2 + 3)), f"correlator window at t={t_max}")
    vals = {}
    for t in range(t_max + 1):
        for x in range(-t - len(op_A) - 1, t + len(op_B) + 2):
            vals[(x, t)] = correlator(M, op_A, op_B, x, t)
    return CorrelatorMap(q, labels, s, t_max, vals)
