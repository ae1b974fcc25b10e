"""Truncated Pauli-path series for expectation values.

A path is grown by conjugating a Pauli through the circuit one layer at a
time. Rotations whose axis anticommutes with the current Pauli and Haar blocks
that the Pauli touches are *branch events*; each costs one unit of the budget
``L`` on every child, and an event met with no budget left drops the subtree.

Paths are stored flat: a constant plus a list of indices into a per-parameter
lookup table (see :class:`ParamLayout`), so one build serves any number of
parameter points.
"""

from __future__ import annotations

import hashlib
import json
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .circuit import CircuitIR, CliffordLayer, HaarLayer, NoiseLayer, ParamPoint, RotationLayer
from .clifford import conjugate
from .irreps import su4_adjoint_batch
from .noise import eigenvalue, warn_if_gapless
from .pauli import PauliString, branch_partner, commutes

__all__ = [
    "Observable",
    "ParamLayout",
    "TreeStats",
    "ExpectationSeries",
    "build_series",
    "evaluate_expectation",
    "evaluate_many",
    "path_count",
    "compile_steps",
    "grow_tree",
]


# -- observables --------------------------------------------------------------

_TERM_RE = re.compile(r"^\s*(?:([+-]?[0-9.eE+-]+)\s*\*\s*)?([+-]?(?:i)?[IXYZ]+)\s*$")


@dataclass(frozen=True)
class Observable:
    """A real combination of distinct Hermitian Pauli strings."""

    terms: tuple[tuple[float, PauliString], ...]

    def __post_init__(self):
        terms = []
        for coeff, p in self.terms:
            if not p.is_hermitian:
                raise ValueError(f"observable term {p} is not Hermitian")
            # fold the Pauli's sign into the coefficient
            terms.append((float(coeff) * p.sign, p.unsigned()))
        if not terms:
            raise ValueError("observable needs at least one term")
        ns = {p.n for _, p in terms}
        if len(ns) != 1:
            raise ValueError("observable terms act on different qubit counts")
        keys = [(p.x, p.z) for _, p in terms]
        if len(set(keys)) != len(keys):
            raise ValueError("observable terms must be distinct Paulis")
        object.__setattr__(self, "terms", tuple(terms))

    @classmethod
    def single(cls, label: str | PauliString, coeff: float = 1.0) -> Observable:
        p = PauliString.from_label(label) if isinstance(label, str) else label
        return cls(((coeff, p),))

    @classmethod
    def parse(cls, text: str) -> Observable:
        """``"ZZI"``, ``"-XY"``, ``"0.5*ZZ + 0.25*XX"``. Terms are separated by ``+``."""
        pieces = [s for s in re.split(r"\s+\+\s+|,", text.strip()) if s.strip()]
        terms = []
        for piece in pieces:
            m = _TERM_RE.match(piece)
            if not m:
                raise ValueError(f"cannot parse observable term {piece!r}")
            coeff = float(m.group(1)) if m.group(1) else 1.0
            terms.append((coeff, PauliString.from_label(m.group(2))))
        return cls(tuple(terms))

    @property
    def n(self) -> int:
        return self.terms[0][1].n

    @property
    def rank(self) -> int:
        return len(self.terms)

    def hs_norm(self) -> float:
        """``||O||_HS / 2**(n/2)``, i.e. the coefficient 2-norm."""
        return float(np.sqrt(sum(c * c for c, _ in self.terms)))

    def l1_norm(self) -> float:
        return float(sum(abs(c) for c, _ in self.terms))

    def __str__(self) -> str:
        return " + ".join(f"{c!r}*{p}" for c, p in self.terms)


# -- parameter lookup table ---------------------------------------------------

class ParamLayout:
    """Index layout of the per-point lookup table.

    ``[1, cos 2t_0 .. cos 2t_{K-1}, sin 2t_0 .. sin 2t_{K-1}, v_0[0,0] .. v_{H-1}[14,14]]``.
    Index 0 is the padding slot and always holds 1.
    """

    def __init__(self, n_theta: int, n_haar: int):
        self.n_theta = n_theta
        self.n_haar = n_haar
        self.size = 1 + 2 * n_theta + 225 * n_haar

    def cos(self, k: int) -> int:
        return 1 + k

    def sin(self, k: int) -> int:
        return 1 + self.n_theta + k

    def adj(self, h: int, row: int, col: int) -> int:
        return 1 + 2 * self.n_theta + 225 * h + 15 * row + col

    def check(self, params: ParamPoint) -> None:
        if len(params.thetas) != self.n_theta or len(params.su4s) != self.n_haar:
            raise ValueError(
                f"parameter-count mismatch: series wants {self.n_theta} angles and "
                f"{self.n_haar} unitaries, got {len(params.thetas)} and {len(params.su4s)}"
            )

    def table(self, params: ParamPoint, eps: float = 0.0) -> np.ndarray:
        self.check(params)
        t = np.empty(self.size)
        t[0] = 1.0
        th = 2 * params.thetas
        t[1:1 + self.n_theta] = np.cos(th)
        t[1 + self.n_theta:1 + 2 * self.n_theta] = np.sin(th)
        if self.n_haar:
            v = su4_adjoint_batch(params.su4s).reshape(-1)
            if eps > 0:
                v = np.where(np.abs(v) < eps, 0.0, v)
            t[1 + 2 * self.n_theta:] = v
        return t


# -- tree growth ------------------------------------------------------------------

@dataclass
class TreeStats:
    total: int = 0  # complete paths reached, including zero leaves
    pruned: int = 0  # branch events met with no budget left
    deduped: int = 0  # branches cut by a run-length predicate
    zero_leaves: int = 0
    histogram: Counter = field(default_factory=Counter)  # factor count -> complete paths

    @property
    def stored(self) -> int:
        return self.total - self.zero_leaves

    @property
    def max_depth(self) -> int:
        return max(self.histogram, default=0)

    def merge(self, other: TreeStats) -> None:
        self.total += other.total
        self.pruned += other.pruned
        self.deduped += other.deduped
        self.zero_leaves += other.zero_leaves
        self.histogram.update(other.histogram)

    def as_dict(self) -> dict:
        return {
            "paths": self.total,
            "stored": self.stored,
            "pruned": self.pruned,
            "deduped": self.deduped,
            "zero_leaves": self.zero_leaves,
            "max_depth": self.max_depth,
            "histogram": {str(k): v for k, v in sorted(self.histogram.items())},
        }


_CLIFF, _NOISE, _ROT, _HAAR = range(4)

# letter index I=0, X=1, Y=2, Z=3 from (x bit, z bit)
_LETTER_OF = {(0, 0): 0, (1, 0): 1, (1, 1): 2, (0, 1): 3}
_BITS_OF = {v: k for k, v in _LETTER_OF.items()}


def compile_steps(layers: Sequence, direction: str) -> list[tuple]:
    """Turn resolved layers into traversal-order steps.

    ``forward`` walks input to output; ``adjoint`` walks output to input.
    """
    if direction not in ("forward", "adjoint"):
        raise ValueError(f"unknown direction {direction!r}")
    seq = layers if direction == "forward" else list(reversed(layers))
    steps = []
    for layer in seq:
        if isinstance(layer, CliffordLayer):
            steps.append((_CLIFF, layer.tableau))
        elif isinstance(layer, NoiseLayer):
            if layer.channels:
                steps.append((_NOISE, layer.channels))
        elif isinstance(layer, RotationLayer):
            steps.append((_ROT, layer.axis, layer.param))
        elif isinstance(layer, HaarLayer):
            steps.append((_HAAR, layer.qubits[0], layer.qubits[1], layer.param))
        else:
            raise TypeError(f"unsupported layer {type(layer).__name__}")
    return steps


def _block_index(p: PauliString, a: int, b: int) -> int:
    la = _LETTER_OF[((p.x >> a) & 1, (p.z >> a) & 1)]
    lb = _LETTER_OF[((p.x >> b) & 1, (p.z >> b) & 1)]
    return 4 * la + lb - 1


def _replace_block(p: PauliString, a: int, b: int, k: int) -> PauliString:
    la, lb = divmod(k + 1, 4)
    clear = ~((1 << a) | (1 << b))
    xa, za = _BITS_OF[la]
    xb, zb = _BITS_OF[lb]
    x = (p.x & clear) | (xa << a) | (xb << b)
    z = (p.z & clear) | (za << a) | (zb << b)
    return PauliString(p.n, x, z, p.phase)


Leaf = Callable[[PauliString, float], "tuple[float, object] | None"]


def grow_tree(steps: Sequence[tuple], root: PauliString, const: float, budget: int,
              layout: ParamLayout, direction: str, leaf: Leaf, stats: TreeStats,
              run_limit: int | None = None, run_init: int = 0) -> list[tuple]:
    """Enumerate the truncated paths from ``root`` through ``steps``.

    Returns ``(value, factors, used_budget, key)`` per surviving leaf, where
    ``leaf(P, const)`` maps the final Pauli to ``(value, key)`` or ``None``
    for a vanishing leaf. With ``run_limit`` set, a branch is cut as soon as
    it has passed ``run_limit`` consecutive parametrized layers trivially
    (the counter starts at ``run_init``).
    """
    heis = direction == "adjoint"
    out = []
    n_steps = len(steps)
    stack = [(0, root, const, (), budget, run_init)]
    while stack:
        i, p, c, f, b, run = stack.pop()
        while True:
            if i == n_steps:
                stats.total += 1
                stats.histogram[len(f)] += 1
                r = leaf(p, c)
                if r is None:
                    stats.zero_leaves += 1
                else:
                    out.append((r[0], f, budget - b, r[1]))
                break
            step = steps[i]
            i += 1
            kind = step[0]
            if kind == _CLIFF:
                p = conjugate(step[1], p, direction)
                continue
            if kind == _NOISE:
                for ch in step[1]:
                    c *= eigenvalue(ch, p)
                continue
            if kind == _ROT:
                axis = step[1]
                trivial = commutes(axis, p)
            else:
                qa, qb = step[1], step[2]
                trivial = not (p.support >> qa) & 1 and not (p.support >> qb) & 1
            if trivial:
                if run_limit is not None:
                    run += 1
                    if run >= run_limit:
                        stats.deduped += 1
                        break
                continue
            if b == 0:
                stats.pruned += 1
                break
            b -= 1
            run = 0
            if kind == _ROT:
                k = step[2]
                q = branch_partner(axis, p)
                if heis:
                    q = q.negate()
                stack.append((i, q, c, f + (layout.sin(k),), b, 0))
                f = f + (layout.cos(k),)
                continue
            h = step[3]
            k_in = _block_index(p, qa, qb)
            for k_out in range(14, 0, -1):
                idx = layout.adj(h, k_in, k_out) if heis else layout.adj(h, k_out, k_in)
                stack.append((i, _replace_block(p, qa, qb, k_out), c, f + (idx,), b, 0))
            idx = layout.adj(h, k_in, 0) if heis else layout.adj(h, 0, k_in)
            p = _replace_block(p, qa, qb, 0)
            f = f + (idx,)
    return out


def input_leaf(p: PauliString, c: float):
    """``<0...0|P|0...0>`` contraction at the circuit input."""
    if p.x or c == 0.0:
        return None
    return c * p.sign, None


# -- series ---------------------------------------------------------------------

def _noise_fingerprint(c: CircuitIR) -> str:
    fp = repr([ch.fingerprint() for ch in c.channels()])
    return hashlib.sha256(fp.encode()).hexdigest()[:16]


def pack_paths(paths: Iterable[tuple[float, tuple]]) -> tuple[np.ndarray, np.ndarray]:
    """Constants and a zero-padded index matrix."""
    paths = list(paths)
    width = max((len(f) for _, f in paths), default=0)
    const = np.array([v for v, _ in paths], dtype=float)
    idx = np.zeros((len(paths), width), dtype=np.int64)
    for r, (_, f) in enumerate(paths):
        idx[r, :len(f)] = f
    return const, idx


@dataclass
class ExpectationSeries:
    n: int
    L: int
    n_theta: int
    n_haar: int
    circuit_fingerprint: str
    noise_fingerprint: str
    constants: np.ndarray
    indices: np.ndarray
    rank: int
    stats: TreeStats

    @property
    def layout(self) -> ParamLayout:
        return ParamLayout(self.n_theta, self.n_haar)

    def __len__(self) -> int:
        return len(self.constants)

    def stats_json(self) -> str:
        d = {"n": self.n, "L": self.L, "rank": self.rank,
             "circuit": self.circuit_fingerprint, "noise": self.noise_fingerprint}
        d.update(self.stats.as_dict())
        return json.dumps(d, sort_keys=True)


def build_series(c: CircuitIR, obs: Observable, L: int) -> ExpectationSeries:
    """Heisenberg-propagate every observable term back to ``|0...0>`` under budget ``L``."""
    if obs.n != c.n:
        raise ValueError(f"observable acts on {obs.n} qubits, circuit has {c.n}")
    if L < 0:
        raise ValueError("truncation budget must be non-negative")
    layers = c.resolved_layers()
    warn_if_gapless(ch for l in layers if isinstance(l, NoiseLayer) for ch in l.channels)
    layout = ParamLayout(c.n_theta, c.n_haar)
    steps = compile_steps(layers, "adjoint")
    stats = TreeStats()
    paths = []
    for coeff, p in obs.terms:
        for value, f, _, _ in grow_tree(steps, p, 1.0, L, layout, "adjoint", input_leaf, stats):
            paths.append((coeff * value, f))
    const, idx = pack_paths(paths)
    return ExpectationSeries(c.n, L, c.n_theta, c.n_haar, c.fingerprint(), _noise_fingerprint(c),
                             const, idx, obs.rank, stats)


def _fold(const: np.ndarray, idx: np.ndarray, table: np.ndarray) -> float:
    if not len(const):
        return 0.0
    return float(np.sum(const * np.prod(table[idx], axis=1)))


def evaluate_expectation(s: ExpectationSeries, params: ParamPoint, eps: float = 0.0) -> float:
    """Sum of ``constant * prod(factors)`` at one parameter point.

    ``eps > 0`` zeroes adjoint entries smaller than ``eps`` in magnitude.
    """
    return _fold(s.constants, s.indices, s.layout.table(params, eps))


def evaluate_many(s: ExpectationSeries, points: Sequence[ParamPoint], eps: float = 0.0) -> np.ndarray:
    layout = s.layout
    return np.array([_fold(s.constants, s.indices, layout.table(p, eps)) for p in points])


def path_count(s: ExpectationSeries) -> tuple[int, int]:
    """``(total, pruned)``: complete paths reached and branch events dropped for budget."""
    return s.stats.total, s.stats.pruned
