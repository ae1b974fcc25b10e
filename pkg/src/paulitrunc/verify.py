"""Self-check suite behind ``paulitrunc verify``: engines against the dense oracle."""

from __future__ import annotations

import warnings

import numpy as np

from .circuit import HaarLayer, CircuitIR, NoisePolicy, gen_brickwork, gen_random, random_params
from .distribution import build_distribution
from .expectation import Observable, build_series, evaluate_expectation, path_count
from .oracle import MAX_DENSITY_QUBITS, exact_distribution, exact_expectation

__all__ = ["run_verification"]


def _random_label(rng: np.random.Generator, n: int) -> str:
    while True:
        lab = "".join(rng.choice(list("IXYZ"), size=n))
        if set(lab) != {"I"}:
            return lab


def run_verification(max_n: int, seed: int, circuits_per_n: int = 4) -> list[tuple[str, bool, str]]:
    """Return ``(check, passed, detail)`` rows."""
    if max_n < 2:
        raise ValueError("--max-n must be at least 2")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    report = []
    worst = {"noiseless": 0.0, "noisy": 0.0}
    law_ok = True
    for n in range(2, max_n + 1):
        for k in range(circuits_per_n):
            c = gen_random(n, int(rng.integers(1, 9)), int(rng.integers(0, 10)), int(rng.integers(2**31)))
            obs = Observable.parse(_random_label(rng, n))
            for kind, circ in (("noiseless", c), ("noisy", c.with_policy(NoisePolicy("depol1", 0.1)))):
                if kind == "noisy" and n > MAX_DENSITY_QUBITS:
                    continue
                s = build_series(circ, obs, 8)
                for _ in range(2):
                    p = random_params(circ, rng)
                    err = abs(evaluate_expectation(s, p) - exact_expectation(circ, obs, p))
                    worst[kind] = max(worst[kind], err)
            for L in range(4):
                total, _ = path_count(build_series(c, obs, L))
                law_ok &= total <= obs.rank * 2 ** L
    for kind, err in worst.items():
        report.append((f"expectation-{kind}", err <= 1e-9, f"max error {err:.3e}"))

    block = CircuitIR(2, (HaarLayer((0, 1), 0),))
    for lab in ("XI", "ZZ", "IY"):
        total, _ = path_count(build_series(block, Observable.parse(lab), 1))
        law_ok &= total <= 15
    report.append(("path-count-law", law_ok, "rotation total <= r*2^L, Haar block total <= 15"))

    nd = min(max_n, 4)
    c = gen_brickwork(nd, 2, "haar", int(rng.integers(2**31)), NoisePolicy("depol2", 0.15))
    p = random_params(c, rng)
    exact = exact_distribution(c, p)
    norm_err = match_err = 0.0
    full_err = None
    tele_err = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for L in range(0, c.n_parametrized + 1):
            bi = build_distribution(c, L).spectrum(p)
            dense = build_distribution(c, L, mode="dense-root").spectrum(p)
            pb = bi.probabilities()
            norm_err = max(norm_err, abs(pb.sum() - 1))
            match_err = max(match_err, float(np.abs(pb - dense.probabilities()).max()))
            for pre in ("", "0", "1", "01"):
                if len(pre) < nd:
                    tele = bi.marginal(pre) - bi.marginal(pre + "0") - bi.marginal(pre + "1")
                    tele_err = max(tele_err, abs(tele))
            full_err = float(np.abs(pb - exact).max())
    report.append(("distribution-normalisation", norm_err <= 1e-9, f"max |sum-1| {norm_err:.3e}"))
    report.append(("distribution-full-budget", full_err <= 1e-9, f"max error {full_err:.3e}"))
    report.append(("distribution-dedup", match_err <= 1e-10, f"bidirectional vs dense-root {match_err:.3e}"))
    report.append(("marginal-telescoping", tele_err <= 1e-10, f"max defect {tele_err:.3e}"))
    return report
