"""Truncated output distributions, marginals and sampling.

The output probability is written through its Z-spectrum::

    p(x) = 2**-n * sum_z c_z * (-1)**popcount(z & x),   c_z = <0| C^dag Z^z C |0>

and ``c_z`` is approximated by the paths with at most ``L`` branch events.

The bidirectional engine cuts every such path at a window of ``w``
consecutive parametrized layers that the path crosses trivially. With ``D``
parametrized layers, a path with at most ``L`` branch events always has such
a run when ``w = ceil((D - L) / (L + 1))``. Each path is attributed to the
earliest qualifying window: the tree grown from the window toward the input
refuses any run of ``w`` trivial steps, including one that touches the
window. The window itself is contracted exactly by tracking the generators
of the Paulis it leaves invariant; a tree grown toward the measurement
finishes the path. When ``D <= L`` nothing is truncated and the input
boundary serves as the window (its trivial group is ``{I, Z}**n``).

``mode="dense-root"`` instead grows one Heisenberg tree per root ``Z^z``.
It is exponential in ``n`` and exists as an independent cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .circuit import CircuitIR, HaarLayer, NoiseLayer, ParamPoint, RotationLayer
from .clifford import conjugate
from .expectation import (
    ParamLayout,
    TreeStats,
    compile_steps,
    grow_tree,
    input_leaf,
    pack_paths,
    _CLIFF,
    _NOISE,
    _ROT,
)
from .noise import eigenvalue, warn_if_gapless
from .pauli import PauliString, bits_from_string, commutes

__all__ = [
    "CapExceeded",
    "TrivialGroup",
    "ContractionTerm",
    "TruncatedDistribution",
    "ZSpectrum",
    "SampleRecord",
    "trivial_generators",
    "contract_window",
    "contract_full",
    "build_distribution",
    "prob_value",
    "marginal_value",
    "clamp_pair",
    "sample_bitstring",
    "sample_bitstrings",
    "clamped_distribution",
    "distribution_csv",
    "window_length",
    "DENSE_ROOT_MAX_QUBITS",
]

DENSE_ROOT_MAX_QUBITS = 12


class CapExceeded(RuntimeError):
    """A window's invariant group is too large to enumerate."""

    def __init__(self, message: str, window: tuple[int, int] | None = None, generators: int = 0):
        self.window = window
        self.generators = generators
        super().__init__(message)


# -- invariant subgroups ----------------------------------------------------------

@dataclass(frozen=True)
class TrivialGroup:
    """Independent generators; the group is their span (signs ignored)."""

    n: int
    generators: tuple[PauliString, ...]

    @property
    def size(self) -> int:
        return 1 << len(self.generators)

    def elements(self) -> list[PauliString]:
        out = []
        for sub in range(self.size):
            x = z = 0
            for j, g in enumerate(self.generators):
                if (sub >> j) & 1:
                    x ^= g.x
                    z ^= g.z
            out.append(PauliString(self.n, x, z))
        return out


class _Tracker:
    """Generator pairs (start frame, current frame) as bit masks."""

    def __init__(self, n: int, gens: Sequence[PauliString] | None = None):
        self.n = n
        if gens is None:
            gens = [PauliString.single(n, j, c) for c in "XZ" for j in range(n)]
        self.pairs = [(g.x, g.z, g.x, g.z) for g in gens]

    def conjugate(self, tableau) -> None:
        out = []
        for sx, sz, cx, cz in self.pairs:
            q = conjugate(tableau, PauliString(self.n, cx, cz))
            out.append((sx, sz, q.x, q.z))
        self.pairs = out

    def restrict(self, fx: int, fz: int) -> None:
        """Keep the span on which ``popcount(cx & fx) + popcount(cz & fz)`` is even."""
        bad = [i for i, (_, _, cx, cz) in enumerate(self.pairs)
               if (bin(cx & fx).count("1") + bin(cz & fz).count("1")) & 1]
        if not bad:
            return
        piv = self.pairs[bad[0]]
        for i in bad[1:]:
            a = self.pairs[i]
            self.pairs[i] = tuple(u ^ v for u, v in zip(a, piv))
        del self.pairs[bad[0]]

    def restrict_layer(self, layer) -> None:
        if isinstance(layer, RotationLayer):
            # symplectic product with the axis
            self.restrict(layer.axis.z, layer.axis.x)
        elif isinstance(layer, HaarLayer):
            for q in layer.qubits:
                self.restrict(1 << q, 0)
                self.restrict(0, 1 << q)

    def start_group(self) -> TrivialGroup:
        return TrivialGroup(self.n, tuple(PauliString(self.n, sx, sz) for sx, sz, _, _ in self.pairs))


def trivial_generators(layers: Sequence, n: int) -> TrivialGroup:
    """Generators of the Paulis invariant under every parametrized layer in ``layers``.

    Clifford and noise layers are ignored here; :func:`contract_window`
    handles the conjugation between layers.
    """
    t = _Tracker(n)
    for layer in layers:
        t.restrict_layer(layer)
    return t.start_group()


@dataclass(frozen=True)
class ContractionTerm:
    """``left`` crosses the window unchanged in irrep and exits as ``value * right``."""

    left: PauliString
    right: PauliString
    value: float


def contract_window(layers: Sequence, n: int, cap: int = 14,
                    incoming: TrivialGroup | None = None,
                    window: tuple[int, int] | None = None) -> list[ContractionTerm]:
    """Exact transfer of the window's invariant Paulis, identity first."""
    t = _Tracker(n, incoming.generators if incoming is not None else None)
    for layer in layers:
        if isinstance(layer, (RotationLayer, HaarLayer)):
            t.restrict_layer(layer)
        elif not isinstance(layer, NoiseLayer):
            t.conjugate(layer.tableau)
    g = len(t.pairs)
    if g > cap:
        raise CapExceeded(f"window {window} leaves {g} invariant generators (cap {cap})", window, g)
    steps = compile_steps(layers, "forward")
    terms = []
    for p in t.start_group().elements():
        q, val = p, 1.0
        for step in steps:
            if step[0] == _CLIFF:
                q = conjugate(step[1], q)
            elif step[0] == _NOISE:
                for ch in step[1]:
                    val *= eigenvalue(ch, q)
            elif step[0] == _ROT:
                assert commutes(step[1], q)
            else:
                assert not (q.support >> step[1]) & 1 and not (q.support >> step[2]) & 1
        terms.append(ContractionTerm(p, q.unsigned(), val * q.sign))
    return terms


def contract_full(c: CircuitIR, start: int, end: int, cap: int = 14) -> list[ContractionTerm]:
    """Contract parametrized layers ``start..end`` (inclusive) and what lies between them."""
    layers = c.resolved_layers()
    pos = _param_positions(layers)
    if not 0 <= start <= end < len(pos):
        raise ValueError(f"bad window {start}..{end} for {len(pos)} parametrized layers")
    return contract_window(layers[pos[start]:pos[end] + 1], c.n, cap, window=(start, end))


def _param_positions(layers) -> list[int]:
    return [i for i, l in enumerate(layers) if isinstance(l, (RotationLayer, HaarLayer))]


def window_length(n_param: int, L: int) -> int:
    """Length of trivial run every path with at most ``L`` branches must contain (0 if none)."""
    if n_param <= L:
        return 0
    return math.ceil((n_param - L) / (L + 1))


# -- building -----------------------------------------------------------------------

def _measure_leaf(p: PauliString, c: float):
    if p.x or c == 0.0:
        return None
    return c * p.sign, p.z


@dataclass
class TruncatedDistribution:
    n: int
    L: int
    mode: str
    window: int
    n_theta: int
    n_haar: int
    n_blocks: int
    # flattened left leaves: block id, budget used, constant, factor indices
    left_block: np.ndarray
    left_used: np.ndarray
    left_const: np.ndarray
    left_idx: np.ndarray
    right_block: np.ndarray
    right_used: np.ndarray
    right_const: np.ndarray
    right_idx: np.ndarray
    right_z: np.ndarray
    left_stats: TreeStats = field(default_factory=TreeStats)
    right_stats: TreeStats = field(default_factory=TreeStats)
    contraction_terms: int = 0

    @property
    def layout(self) -> ParamLayout:
        return ParamLayout(self.n_theta, self.n_haar)

    def spectrum(self, params: ParamPoint, eps: float = 0.0) -> ZSpectrum:
        table = self.layout.table(params, eps)
        lv = self.left_const * np.prod(table[self.left_idx], axis=1) if len(self.left_const) else np.zeros(0)
        rv = self.right_const * np.prod(table[self.right_idx], axis=1) if len(self.right_const) else np.zeros(0)
        acc = np.zeros((self.n_blocks, self.L + 1))
        np.add.at(acc, (self.left_block, self.left_used), lv)
        cum = np.cumsum(acc, axis=1)
        w = rv * cum[self.right_block, self.L - self.right_used] if len(rv) else rv
        zs, inv = np.unique(self.right_z, return_inverse=True)
        coeffs = np.zeros(len(zs))
        np.add.at(coeffs, inv, w)
        return ZSpectrum(self.n, zs, coeffs)

    def stats(self) -> dict:
        return {"n": self.n, "L": self.L, "mode": self.mode, "window": self.window,
                "blocks": self.n_blocks, "contraction_terms": self.contraction_terms,
                "left": self.left_stats.as_dict(), "right": self.right_stats.as_dict()}


class _Collector:
    def __init__(self):
        self.left: list = []  # (block, used, const, factors)
        self.right: list = []  # (block, used, const, factors, z)
        self.blocks = 0

    def add(self, lefts, rights) -> None:
        b = self.blocks
        self.blocks += 1
        self.left += [(b, used, v, f) for v, f, used, _ in lefts]
        self.right += [(b, used, v, f, z) for v, f, used, z in rights]


def build_distribution(c: CircuitIR, L: int, cap: int = 14, mode: str = "bidirectional") -> TruncatedDistribution:
    if L < 0:
        raise ValueError("truncation budget must be non-negative")
    if c.n > 62:
        raise ValueError("distribution engine supports at most 62 qubits")
    layers = c.resolved_layers()
    warn_if_gapless(ch for l in layers if isinstance(l, NoiseLayer) for ch in l.channels)
    layout = ParamLayout(c.n_theta, c.n_haar)
    lstats, rstats = TreeStats(), TreeStats()
    col = _Collector()
    n_terms = 0
    w = 0
    if mode == "dense-root":
        if c.n > DENSE_ROOT_MAX_QUBITS:
            raise ValueError(f"dense-root mode is limited to {DENSE_ROOT_MAX_QUBITS} qubits")
        steps = compile_steps(layers, "adjoint")
        for z in range(1 << c.n):
            lefts = grow_tree(steps, PauliString(c.n, 0, z), 1.0, L, layout, "adjoint", input_leaf, lstats)
            if lefts:
                col.add(lefts, [(1.0, (), 0, z)])
        n_terms = 1 << c.n
    elif mode == "bidirectional":
        pos = _param_positions(layers)
        w = window_length(len(pos), L)
        if w == 0:
            # no truncation: the input boundary is the window
            if c.n > cap:
                raise CapExceeded(f"input boundary has {c.n} generators (cap {cap})", None, c.n)
            steps = compile_steps(layers, "forward")
            for z in range(1 << c.n):
                rights = grow_tree(steps, PauliString(c.n, 0, z), 1.0, L, layout, "forward",
                                   _measure_leaf, rstats)
                if rights:
                    col.add([(1.0, (), 0, None)], rights)
            n_terms = 1 << c.n
        else:
            for s in range(len(pos) - w + 1):
                e = s + w - 1
                terms = contract_window(layers[pos[s]:pos[e] + 1], c.n, cap, window=(s, e))
                n_terms += len(terms)
                lsteps = compile_steps(layers[:pos[s]], "adjoint")
                rsteps = compile_steps(layers[pos[e] + 1:], "forward")
                for t in terms:
                    lefts = grow_tree(lsteps, t.left, 1.0, L, layout, "adjoint", input_leaf, lstats,
                                      run_limit=w, run_init=w - 1)
                    if not lefts:
                        continue
                    spare = L - min(used for _, _, used, _ in lefts)
                    rights = grow_tree(rsteps, t.right, t.value, spare, layout, "forward",
                                       _measure_leaf, rstats)
                    if rights:
                        col.add(lefts, rights)
    else:
        raise ValueError(f"unknown mode {mode!r}")

    lb = np.array([r[0] for r in col.left], dtype=np.int64)
    lu = np.array([r[1] for r in col.left], dtype=np.int64)
    lc, li = pack_paths((r[2], r[3]) for r in col.left)
    rb = np.array([r[0] for r in col.right], dtype=np.int64)
    ru = np.array([r[1] for r in col.right], dtype=np.int64)
    rc, ri = pack_paths((r[2], r[3]) for r in col.right)
    rz = np.array([r[4] for r in col.right], dtype=np.int64)
    return TruncatedDistribution(c.n, L, mode, w, c.n_theta, c.n_haar, col.blocks,
                                 lb, lu, lc, li, rb, ru, rc, ri, rz, lstats, rstats, n_terms)


# -- evaluation ---------------------------------------------------------------------

def _mask(x, n: int) -> int:
    if isinstance(x, str):
        if len(x) != n:
            raise ValueError(f"bitstring length {len(x)} != {n}")
        return bits_from_string(x)
    return int(x)


@dataclass
class ZSpectrum:
    """Coefficients ``c_z`` of the (truncated) output distribution at one parameter point."""

    n: int
    zs: np.ndarray
    coeffs: np.ndarray

    def _signed_sum(self, sel: np.ndarray, x: int) -> float:
        par = np.bitwise_count(self.zs[sel] & np.int64(x)) & 1
        return float(np.sum(np.where(par, -self.coeffs[sel], self.coeffs[sel])))

    def prob(self, x) -> float:
        xm = _mask(x, self.n)
        return self._signed_sum(np.ones(len(self.zs), dtype=bool), xm) / 2.0 ** self.n

    def marginal(self, prefix: str | Mapping[int, int]) -> float:
        """Probability that the given qubits read the given bits.

        A string fixes qubits ``0..len-1``; a mapping fixes arbitrary qubits.
        """
        if isinstance(prefix, str):
            if len(prefix) > self.n:
                raise ValueError("prefix longer than the register")
            fixed = {j: int(b) for j, b in enumerate(prefix)}
            if any(b not in "01" for b in prefix):
                raise ValueError(f"bad prefix {prefix!r}")
        else:
            fixed = dict(prefix)
        fm = xm = 0
        for q, b in fixed.items():
            if not 0 <= q < self.n:
                raise IndexError(f"qubit {q} out of range")
            fm |= 1 << q
            if b:
                xm |= 1 << q
        sel = (self.zs & np.int64(~fm & ((1 << self.n) - 1))) == 0
        return self._signed_sum(sel, xm) / 2.0 ** len(fixed)

    def probabilities(self) -> np.ndarray:
        """All ``2**n`` values; index bit ``n-1-j`` is qubit ``j`` (qubit 0 most significant)."""
        if self.n > 20:
            raise ValueError("dense probability vector limited to 20 qubits")
        dense = np.zeros(1 << self.n)
        np.add.at(dense, self.zs, self.coeffs)
        h = dense.copy()
        step = 1
        while step < len(h):  # Walsh-Hadamard transform
            h = h.reshape(-1, 2, step)
            h = np.stack([h[:, 0] + h[:, 1], h[:, 0] - h[:, 1]], axis=1).reshape(-1)
            step *= 2
        h /= 2.0 ** self.n
        # h is indexed by the qubit mask; reorder so qubit 0 is the top bit
        masks = np.arange(1 << self.n)
        rev = np.zeros_like(masks)
        for j in range(self.n):
            rev |= ((masks >> j) & 1) << (self.n - 1 - j)
        out = np.empty_like(h)
        out[rev] = h
        return out


def prob_value(d: TruncatedDistribution, x, params: ParamPoint) -> float:
    return d.spectrum(params).prob(x)


def marginal_value(d: TruncatedDistribution, prefix, params: ParamPoint) -> float:
    return d.spectrum(params).marginal(prefix)


# -- sampling ---------------------------------------------------------------------

@dataclass
class SampleRecord:
    bitstring: str
    conditionals: list[tuple[float, float]]
    clamps: int = 0
    fallbacks: int = 0
    marginal_calls: int = 0


def clamp_pair(q0: float, q1: float) -> tuple[float, float, bool, bool]:
    """Clip a conditional pair into [0, 1] and renormalise.

    Returns ``(q0, q1, clamped, fallback)``; ``fallback`` means no mass was
    left and the pair became uniform.
    """
    c0, c1 = min(max(q0, 0.0), 1.0), min(max(q1, 0.0), 1.0)
    clamped = (c0, c1) != (q0, q1)
    tot = c0 + c1
    if not tot > 0:
        return 0.5, 0.5, clamped, True
    return c0 / tot, c1 / tot, clamped, False


def _conditional(m0: float, m1: float) -> tuple[float, float, bool, bool]:
    tot = m0 + m1
    if not tot > 0:
        return 0.5, 0.5, False, True
    return clamp_pair(m0 / tot, m1 / tot)


def sample_bitstring(spec: ZSpectrum, rng: np.random.Generator) -> SampleRecord:
    """Bit-by-bit conditional sampling with two marginal evaluations per bit."""
    rec = SampleRecord("", [])
    prefix = ""
    for _ in range(spec.n):
        m0 = spec.marginal(prefix + "0")
        m1 = spec.marginal(prefix + "1")
        rec.marginal_calls += 2
        q0, q1, clamped, fallback = _conditional(m0, m1)
        rec.clamps += clamped
        rec.fallbacks += fallback
        rec.conditionals.append((q0, q1))
        prefix += "1" if rng.random() < q1 else "0"
    rec.bitstring = prefix
    return rec


def sample_bitstrings(d: TruncatedDistribution | ZSpectrum, count: int, rng: np.random.Generator,
                      params: ParamPoint | None = None) -> list[SampleRecord]:
    spec = d if isinstance(d, ZSpectrum) else d.spectrum(params)
    return [sample_bitstring(spec, rng) for _ in range(count)]


def clamped_distribution(spec: ZSpectrum) -> np.ndarray:
    """Exact law of :func:`sample_bitstring`, ordered like :meth:`ZSpectrum.probabilities`."""
    n = spec.n
    out = np.zeros(1 << n)

    def walk(prefix: str, weight: float):
        if len(prefix) == n:
            out[int(prefix, 2) if n else 0] = weight
            return
        q0, q1, _, _ = _conditional(spec.marginal(prefix + "0"), spec.marginal(prefix + "1"))
        walk(prefix + "0", weight * q0)
        walk(prefix + "1", weight * q1)

    walk("", 1.0)
    return out


def distribution_csv(spec: ZSpectrum) -> str:
    if spec.n > 16:
        raise ValueError("CSV dump is limited to 16 qubits")
    probs = spec.probabilities()
    lines = ["x,p"]
    for i, p in enumerate(probs):
        lines.append(f"{format(i, f'0{spec.n}b') if spec.n else ''},{float(p)!r}")
    return "\n".join(lines) + "\n"
