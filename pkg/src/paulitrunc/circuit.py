"""Circuit IR: Clifford layers, parametrized layers, noise, and the text format.

Text format (one statement per line, ``#`` starts a comment, keywords are
case-insensitive)::

    qubits 3
    h 0
    cx 0 1
    rp ZZI t0            # exp(i*t0*ZZI); the Pauli literal spans all qubits
    haar 1 2 g0          # Haar-parametrized two-qubit block
    noise depol1 0.05 0 1
    noise depol2 0.1 1 2
    noise-policy depol1 0.1

Consecutive Clifford gates fold into a single :class:`CliffordLayer`.
Layers are listed in time order: the first layer acts first on ``|0...0>``.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .clifford import GATE_ARITY, CliffordTableau, tableau_from_gates
from .noise import NoiseChannel, make_depolarizing
from .pauli import PauliString

__all__ = [
    "CliffordLayer",
    "RotationLayer",
    "HaarLayer",
    "NoiseLayer",
    "NoisePolicy",
    "CircuitIR",
    "ParamPoint",
    "Diagnostic",
    "CircuitParseError",
    "parse",
    "serialize",
    "validate",
    "gen_brickwork",
    "gen_random",
    "gen_2d_lattice",
    "lattice_sublayers",
    "random_params",
]


class CircuitParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class CliffordLayer:
    n: int
    gates: tuple[tuple, ...]
    tableau: CliffordTableau = field(compare=False, repr=False, default=None)

    def __post_init__(self):
        if self.tableau is None:
            object.__setattr__(self, "tableau", tableau_from_gates(self.n, self.gates))


@dataclass(frozen=True)
class RotationLayer:
    """``exp(i * theta[param] * axis)``."""

    axis: PauliString
    param: int

    @property
    def support(self) -> int:
        return self.axis.support


@dataclass(frozen=True)
class HaarLayer:
    """A 4x4 unitary ``su4s[param]`` on ``qubits``; the first qubit is the high tensor factor."""

    qubits: tuple[int, int]
    param: int

    @property
    def support(self) -> int:
        a, b = self.qubits
        return (1 << a) | (1 << b)


@dataclass(frozen=True)
class NoiseLayer:
    channels: tuple[NoiseChannel, ...]
    source: tuple | None = None  # ("depol1", p, qubits) / ("depol2", p, qubits) for round trips


Layer = Union[CliffordLayer, RotationLayer, HaarLayer, NoiseLayer]


@dataclass(frozen=True)
class NoisePolicy:
    """Noise inserted right after every parametrized layer, on that layer's support.

    ``depol1`` attaches an independent single-qubit depolarizing channel to
    each support qubit; ``depol2`` attaches one uniform depolarizing channel
    on the whole support.
    """

    kind: str = "none"
    p: float = 0.0

    def __post_init__(self):
        if self.kind not in ("none", "depol1", "depol2"):
            raise ValueError(f"unknown noise policy {self.kind!r}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("noise probability outside [0, 1]")

    def layer_for(self, support: int) -> NoiseLayer | None:
        if self.kind == "none":
            return None
        qubits = tuple(j for j in range(support.bit_length()) if (support >> j) & 1)
        if self.kind == "depol1":
            chans = tuple(make_depolarizing(1 << q, self.p) for q in qubits)
        else:
            chans = (make_depolarizing(support, self.p),)
        return NoiseLayer(chans)

    def __str__(self) -> str:
        return "none" if self.kind == "none" else f"{self.kind} {_fmt(self.p)}"


@dataclass(frozen=True)
class CircuitIR:
    n: int
    layers: tuple
    noise_policy: NoisePolicy = NoisePolicy()

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))

    @property
    def n_theta(self) -> int:
        return sum(1 for l in self.layers if isinstance(l, RotationLayer))

    @property
    def n_haar(self) -> int:
        return sum(1 for l in self.layers if isinstance(l, HaarLayer))

    @property
    def n_parametrized(self) -> int:
        return self.n_theta + self.n_haar

    def resolved_layers(self) -> tuple:
        """Layers with the policy's implicit noise spelled out."""
        out = []
        for layer in self.layers:
            out.append(layer)
            if isinstance(layer, (RotationLayer, HaarLayer)):
                extra = self.noise_policy.layer_for(layer.support)
                if extra is not None:
                    out.append(extra)
        return tuple(out)

    def channels(self) -> list[NoiseChannel]:
        return [ch for l in self.resolved_layers() if isinstance(l, NoiseLayer) for ch in l.channels]

    @property
    def is_noisy(self) -> bool:
        return bool(self.channels())

    def without_noise(self) -> CircuitIR:
        return CircuitIR(self.n, tuple(l for l in self.layers if not isinstance(l, NoiseLayer)))

    def with_policy(self, policy: NoisePolicy) -> CircuitIR:
        return CircuitIR(self.n, self.layers, policy)

    def fingerprint(self) -> str:
        try:
            text = serialize(self)
        except ValueError:  # explicit noise tables have no text form
            text = repr((self.n, self.layers, self.noise_policy))
        return hashlib.sha256(text.encode()).hexdigest()[:16]


@dataclass
class ParamPoint:
    thetas: np.ndarray
    su4s: np.ndarray

    def __init__(self, thetas=(), su4s=None):
        self.thetas = np.asarray(thetas, dtype=float).reshape(-1)
        if su4s is None or len(su4s) == 0:
            su4s = np.zeros((0, 4, 4), dtype=complex)
        self.su4s = np.asarray(su4s, dtype=complex).reshape(-1, 4, 4)
        if len(self.su4s):
            defect = np.abs(np.einsum("kji,kjl->kil", self.su4s.conj(), self.su4s) - np.eye(4)).max()
            if defect > 1e-10:
                raise ValueError(f"su4 parameter is not unitary (defect {defect:.2e})")

    def check(self, circuit: CircuitIR) -> None:
        if len(self.thetas) != circuit.n_theta or len(self.su4s) != circuit.n_haar:
            raise ValueError(
                f"parameter-count mismatch: circuit wants {circuit.n_theta} angles and "
                f"{circuit.n_haar} unitaries, got {len(self.thetas)} and {len(self.su4s)}"
            )


def random_params(circuit: CircuitIR, rng: np.random.Generator) -> ParamPoint:
    """Uniform angles in [0, 2pi) and Haar-random blocks."""
    from .irreps import haar_su4_batch

    thetas = rng.uniform(0.0, 2 * np.pi, size=circuit.n_theta)
    su4s = haar_su4_batch(rng, circuit.n_haar) if circuit.n_haar else None
    return ParamPoint(thetas, su4s)


# -- validation -------------------------------------------------------------

@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    layer: int | None = None


def validate(c: CircuitIR) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    seen = {"theta": [], "haar": []}
    for i, layer in enumerate(c.layers):
        if isinstance(layer, CliffordLayer):
            if layer.n != c.n:
                diags.append(Diagnostic("SizeMismatch", f"Clifford layer on {layer.n} qubits", i))
        elif isinstance(layer, RotationLayer):
            ax = layer.axis
            if ax.n != c.n:
                diags.append(Diagnostic("SizeMismatch", f"axis {ax} has {ax.n} qubits", i))
            elif ax.is_identity or not ax.is_hermitian:
                diags.append(Diagnostic("InvalidAxis", f"rotation axis {ax} is identity or non-Hermitian", i))
            seen["theta"].append((layer.param, i))
        elif isinstance(layer, HaarLayer):
            a, b = layer.qubits
            if a == b:
                diags.append(Diagnostic("DuplicateQubit", f"Haar block on ({a},{b})", i))
            if not (0 <= a < c.n and 0 <= b < c.n):
                diags.append(Diagnostic("QubitOutOfRange", f"Haar block on ({a},{b})", i))
            seen["haar"].append((layer.param, i))
        elif isinstance(layer, NoiseLayer):
            for ch in layer.channels:
                if ch.support >> c.n:
                    diags.append(Diagnostic("QubitOutOfRange", f"noise on qubits {ch.qubits}", i))
        else:
            diags.append(Diagnostic("UnknownLayer", f"unsupported layer {type(layer).__name__}", i))
    for kind, entries in seen.items():
        params = [p for p, _ in entries]
        for p, i in entries:
            if params.count(p) > 1:
                diags.append(Diagnostic("SharedParam", f"{kind} parameter {p} used more than once", i))
        if sorted(set(params)) != list(range(len(set(params)))):
            diags.append(Diagnostic("ParamGap", f"{kind} parameter indices are not 0..K-1"))
    return diags


# -- text format ------------------------------------------------------------

def _fmt(x: float) -> str:
    return repr(float(x))


def _param_index(tok: str, prefix: str, lineno: int) -> int:
    t = tok.lower()
    if not t.startswith(prefix) or not t[1:].isdigit():
        raise CircuitParseError(f"expected parameter name like {prefix}0, got {tok!r}", lineno)
    return int(t[1:])


def _qubit(tok: str, n: int, lineno: int) -> int:
    try:
        q = int(tok)
    except ValueError:
        raise CircuitParseError(f"bad qubit index {tok!r}", lineno) from None
    if not 0 <= q < n:
        raise CircuitParseError(f"qubit {q} out of range for {n} qubits", lineno)
    return q


def _prob(tok: str, lineno: int) -> float:
    try:
        p = float(tok)
    except ValueError:
        raise CircuitParseError(f"bad probability {tok!r}", lineno) from None
    if not 0.0 <= p <= 1.0:
        raise CircuitParseError(f"probability {p} outside [0, 1]", lineno)
    return p


def _noise_layer(kind: str, p: float, qubits: tuple[int, ...], lineno: int | None = None) -> NoiseLayer:
    if len(set(qubits)) != len(qubits) or not qubits:
        raise CircuitParseError("noise needs distinct qubits", lineno)
    if kind == "depol1":
        chans = tuple(make_depolarizing(1 << q, p) for q in qubits)
    elif kind == "depol2":
        if len(qubits) != 2:
            raise CircuitParseError("depol2 acts on exactly two qubits", lineno)
        chans = (make_depolarizing((1 << qubits[0]) | (1 << qubits[1]), p),)
    else:
        raise CircuitParseError(f"unknown noise kind {kind!r}", lineno)
    return NoiseLayer(chans, (kind, p, qubits))


def parse(text: str) -> CircuitIR:
    n = None
    layers: list = []
    pending: list[tuple] = []
    policy = NoisePolicy()
    policy_seen = False

    def flush():
        if pending:
            layers.append(CliffordLayer(n, tuple(pending)))
            pending.clear()

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        kw = toks[0].lower()
        if kw == "qubits":
            if n is not None:
                raise CircuitParseError("duplicate qubits declaration", lineno)
            if len(toks) != 2 or not toks[1].isdigit() or int(toks[1]) < 1:
                raise CircuitParseError("expected 'qubits N' with N >= 1", lineno)
            n = int(toks[1])
            continue
        if n is None:
            raise CircuitParseError("missing 'qubits N' declaration before first statement", lineno)
        if kw in GATE_ARITY:
            arity = GATE_ARITY[kw]
            if len(toks) != 1 + arity:
                raise CircuitParseError(f"{kw} takes {arity} qubit(s)", lineno)
            qs = tuple(_qubit(t, n, lineno) for t in toks[1:])
            if len(set(qs)) != len(qs):
                raise CircuitParseError(f"{kw} needs distinct qubits", lineno)
            pending.append((kw, *qs))
        elif kw == "rp":
            if len(toks) != 3:
                raise CircuitParseError("expected 'rp PAULI tK'", lineno)
            try:
                axis = PauliString.from_label(toks[1])
            except ValueError as exc:
                raise CircuitParseError(str(exc), lineno) from None
            if axis.n != n:
                raise CircuitParseError(f"axis {toks[1]} must span all {n} qubits", lineno)
            flush()
            layers.append(RotationLayer(axis, _param_index(toks[2], "t", lineno)))
        elif kw == "haar":
            if len(toks) != 4:
                raise CircuitParseError("expected 'haar A B gK'", lineno)
            a, b = _qubit(toks[1], n, lineno), _qubit(toks[2], n, lineno)
            flush()
            layers.append(HaarLayer((a, b), _param_index(toks[3], "g", lineno)))
        elif kw == "noise":
            if len(toks) < 4:
                raise CircuitParseError("expected 'noise KIND P QUBITS...'", lineno)
            qs = tuple(_qubit(t, n, lineno) for t in toks[3:])
            flush()
            layers.append(_noise_layer(toks[1].lower(), _prob(toks[2], lineno), qs, lineno))
        elif kw == "noise-policy":
            if policy_seen:
                raise CircuitParseError("duplicate noise-policy", lineno)
            policy_seen = True
            kind = toks[1].lower() if len(toks) > 1 else ""
            if kind == "none" and len(toks) == 2:
                policy = NoisePolicy()
            elif kind in ("depol1", "depol2") and len(toks) == 3:
                policy = NoisePolicy(kind, _prob(toks[2], lineno))
            else:
                raise CircuitParseError("expected 'noise-policy depol1 P | depol2 P | none'", lineno)
        else:
            raise CircuitParseError(f"unknown statement {toks[0]!r}", lineno)
    if n is None:
        raise CircuitParseError("missing 'qubits N' declaration")
    flush()
    return CircuitIR(n, tuple(layers), policy)


def serialize(c: CircuitIR) -> str:
    lines = [f"qubits {c.n}"]
    for layer in c.layers:
        if isinstance(layer, CliffordLayer):
            lines += [" ".join([g[0], *map(str, g[1:])]) for g in layer.gates]
        elif isinstance(layer, RotationLayer):
            lines.append(f"rp {layer.axis} t{layer.param}")
        elif isinstance(layer, HaarLayer):
            lines.append(f"haar {layer.qubits[0]} {layer.qubits[1]} g{layer.param}")
        elif isinstance(layer, NoiseLayer):
            if layer.source is None:
                raise ValueError("noise layer built from explicit tables has no text form")
            kind, p, qs = layer.source
            lines.append(f"noise {kind} {_fmt(p)} " + " ".join(map(str, qs)))
        else:
            raise TypeError(type(layer))
    if c.noise_policy.kind != "none":
        lines.append(f"noise-policy {c.noise_policy}")
    return "\n".join(lines) + "\n"


# -- generators ---------------------------------------------------------------

# Single-qubit Clifford prefixes used to scramble rotation axes.
_LOCAL_CLIFFORDS = ((), ("h",), ("s",), ("h", "s"), ("s", "h"), ("h", "s", "h"))


def gen_brickwork(n: int, depth: int, kind: str = "haar", seed: int = 0,
                  policy: NoisePolicy = NoisePolicy()) -> CircuitIR:
    """Alternating even/odd nearest-neighbour blocks.

    ``kind="rotation"`` makes each block: a random local Clifford on both
    qubits, ``Z`` rotations on both qubits, then ``cx``. That is two angles
    per block.
    """
    if n < 2:
        raise ValueError("brickwork needs at least two qubits")
    if kind not in ("haar", "rotation"):
        raise ValueError(f"unknown brickwork kind {kind!r}")
    rng = np.random.default_rng(seed)
    layers: list = []
    n_param = 0
    for d in range(depth):
        for a in range(d % 2, n - 1, 2):
            b = a + 1
            if kind == "haar":
                layers.append(HaarLayer((a, b), n_param))
                n_param += 1
                continue
            gates = []
            for q in (a, b):
                gates += [(g, q) for g in _LOCAL_CLIFFORDS[rng.integers(len(_LOCAL_CLIFFORDS))]]
            if gates:
                layers.append(CliffordLayer(n, tuple(gates)))
            for q in (a, b):
                layers.append(RotationLayer(PauliString.single(n, q, "Z"), n_param))
                n_param += 1
            layers.append(CliffordLayer(n, (("cx", a, b),)))
    return CircuitIR(n, _merge_cliffords(n, layers), policy)


def gen_random(n: int, n_rotations: int, n_cliffords: int, seed: int,
               max_axis_weight: int = 2, policy: NoisePolicy = NoisePolicy()) -> CircuitIR:
    """Random Clifford gates interleaved with rotations about random Pauli axes."""
    rng = np.random.default_rng(seed)
    one_q = ["h", "s", "x", "y", "z"]
    two_q = ["cx", "cz", "swap"] if n > 1 else []
    slots = ["r"] * n_rotations + ["c"] * n_cliffords
    rng.shuffle(slots)
    layers: list = []
    k = 0
    for slot in slots:
        if slot == "c":
            if two_q and rng.random() < 0.5:
                a, b = rng.choice(n, size=2, replace=False)
                layers.append(CliffordLayer(n, ((str(rng.choice(two_q)), int(a), int(b)),)))
            else:
                layers.append(CliffordLayer(n, ((str(rng.choice(one_q)), int(rng.integers(n))),)))
        else:
            w = int(rng.integers(1, min(max_axis_weight, n) + 1))
            qs = rng.choice(n, size=w, replace=False)
            label = ["I"] * n
            for q in qs:
                label[q] = "XYZ"[rng.integers(3)]
            layers.append(RotationLayer(PauliString.from_label("".join(label)), k))
            k += 1
    return CircuitIR(n, _merge_cliffords(n, layers), policy)


def lattice_sublayers(n1: int) -> list[list[tuple[int, int]]]:
    """The four depth-1 edge sets on a ``2n1 x 2n1`` grid (qubit = row * 2n1 + col).

    Sublayers 1-2 pair columns (even then odd offsets), 3-4 pair rows.
    """
    if n1 < 1:
        raise ValueError("n1 must be at least 1")
    m = 2 * n1
    out = []
    for horizontal in (True, False):
        for offset in (0, 1):
            edges = []
            for line in range(m):
                for s in range(offset, m - 1, 2):
                    if horizontal:
                        edges.append((line * m + s, line * m + s + 1))
                    else:
                        edges.append((s * m + line, (s + 1) * m + line))
            out.append(edges)
    return out


def gen_2d_lattice(n1: int, layers: int, seed: int = 0,
                   policy: NoisePolicy = NoisePolicy()) -> CircuitIR:
    """Haar blocks on every edge of a ``2n1 x 2n1`` grid, four sublayers per macro-layer.

    Edges inside one sublayer are disjoint; ``seed`` only shuffles their order.
    """
    rng = np.random.default_rng(seed)
    subs = lattice_sublayers(n1)
    out: list = []
    k = 0
    for _ in range(layers):
        for edges in subs:
            order = rng.permutation(len(edges)) if edges else []
            for e in order:
                out.append(HaarLayer(edges[int(e)], k))
                k += 1
    return CircuitIR(4 * n1 * n1, tuple(out), policy)


def _merge_cliffords(n: int, layers: Sequence) -> tuple:
    out: list = []
    for layer in layers:
        if isinstance(layer, CliffordLayer) and out and isinstance(out[-1], CliffordLayer):
            out[-1] = CliffordLayer(n, out[-1].gates + layer.gates)
        else:
            out.append(layer)
    return tuple(out)
