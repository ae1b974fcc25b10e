"""Monte-Carlo error sweeps, bound curves, total variation and anti-concentration."""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .circuit import CircuitIR, ParamPoint, random_params
from .expectation import Observable, build_series, evaluate_many
from .noise import spectral_gap
from .oracle import exact_distribution, exact_expectation

__all__ = [
    "SweepRecord",
    "ErrorSweep",
    "error_bound",
    "circuit_gamma",
    "norm_factor",
    "mc_l2_error",
    "tv_distance",
    "anticoncentration_estimate",
    "porter_thomas_moment",
]


def error_bound(gamma: float, L: int, norm_factor: float = 1.0) -> float:
    """``(1 - gamma)**L * norm_factor``."""
    if not 0.0 <= gamma <= 1.0:
        raise ValueError("gamma must lie in [0, 1]")
    if L < 0:
        raise ValueError("L must be non-negative")
    return (1.0 - gamma) ** L * norm_factor


def circuit_gamma(c: CircuitIR) -> float:
    """Smallest spectral gap over the circuit's channels; 0 for a noiseless circuit."""
    gaps = [spectral_gap(ch) for ch in c.channels()]
    return min(gaps) if gaps else 0.0


def norm_factor(obs: Observable, kind: str = "min") -> float:
    """``hs`` (coefficient 2-norm), ``l1``, ``one``, or ``min`` of ``hs`` and ``l1``."""
    if kind == "hs":
        return obs.hs_norm()
    if kind == "l1":
        return obs.l1_norm()
    if kind == "one":
        return 1.0
    if kind == "min":
        return min(obs.hs_norm(), obs.l1_norm())
    raise ValueError(f"unknown norm factor {kind!r}")


@dataclass(frozen=True)
class SweepRecord:
    L: int
    rms: float
    bound: float
    stderr: float
    draws: int


@dataclass
class ErrorSweep:
    records: list[SweepRecord] = field(default_factory=list)
    gamma: float = 0.0
    norm_factor: float = 1.0
    seed: int | None = None

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("L,rms,bound,stderr,draws,seed\n")
        seed = "" if self.seed is None else self.seed
        for r in self.records:
            buf.write(f"{r.L},{r.rms!r},{r.bound!r},{r.stderr!r},{r.draws},{seed}\n")
        return buf.getvalue()


def _rms_and_stderr(err: np.ndarray) -> tuple[float, float]:
    sq = err * err
    rms = float(np.sqrt(sq.mean()))
    # delta method: se(rms) = se(mean square) / (2 rms)
    se_sq = float(sq.std(ddof=1) / np.sqrt(len(sq)))
    return rms, (se_sq / (2 * rms) if rms > 0 else 0.0)


def mc_l2_error(c: CircuitIR, obs: Observable, L_values: Sequence[int], draws: int,
                rng: np.random.Generator, gamma: float | None = None, norm: str = "min",
                seed: int | None = None) -> ErrorSweep:
    """RMS of ``exact - truncated`` over shared parameter draws, one row per ``L``."""
    if draws < 2:
        raise ValueError("need at least two draws")
    gamma = circuit_gamma(c) if gamma is None else gamma
    nf = norm_factor(obs, norm)
    points = [random_params(c, rng) for _ in range(draws)]
    exact = np.array([exact_expectation(c, obs, p) for p in points])
    sweep = ErrorSweep(gamma=gamma, norm_factor=nf, seed=seed)
    for L in L_values:
        approx = evaluate_many(build_series(c, obs, L), points)
        rms, se = _rms_and_stderr(exact - approx)
        sweep.records.append(SweepRecord(L, rms, error_bound(gamma, L, nf), se, draws))
    return sweep


def tv_distance(p, q) -> float:
    """Half the l1 distance."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError(f"length mismatch: {p.shape} vs {q.shape}")
    return 0.5 * float(np.abs(p - q).sum())


def porter_thomas_moment(n: int) -> float:
    """``2**n * sum_x E[p(x)**2]`` for Haar-random states: ``2 * 2**n / (2**n + 1)``."""
    d = 2 ** n
    return 2 * d / (d + 1)


def anticoncentration_estimate(generator: Callable[[np.random.Generator], tuple[CircuitIR, ParamPoint]],
                               draws: int, rng: np.random.Generator) -> tuple[float, float]:
    """Monte-Carlo ``2**n * sum_x E[p(x)**2]`` and its standard error.

    ``generator(rng)`` returns a circuit and a parameter point per draw.
    """
    if draws < 1:
        raise ValueError("need at least one draw")
    vals = []
    for _ in range(draws):
        c, params = generator(rng)
        p = exact_distribution(c, params)
        vals.append(2 ** c.n * float(np.dot(p, p)))
    vals = np.array(vals)
    se = float(vals.std(ddof=1) / np.sqrt(draws)) if draws > 1 else 0.0
    return float(vals.mean()), se
