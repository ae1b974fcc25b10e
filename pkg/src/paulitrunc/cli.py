"""Command-line front end.

Exit codes: 0 success, 1 invalid input, 2 engine error (e.g. a contraction
window over the cap), 3 verification failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
from typing import Sequence

import numpy as np

from .analysis import anticoncentration_estimate, mc_l2_error, porter_thomas_moment
from .circuit import (
    CircuitIR,
    CircuitParseError,
    NoisePolicy,
    ParamPoint,
    gen_2d_lattice,
    gen_brickwork,
    gen_random,
    parse,
    random_params,
    validate,
)
from .distribution import CapExceeded, build_distribution, distribution_csv, sample_bitstring
from .expectation import Observable, build_series, evaluate_many, path_count
from .irreps import haar_su4, su4_adjoint
from .oracle import OracleCapError

EXIT_OK, EXIT_INPUT, EXIT_ENGINE, EXIT_VERIFY = 0, 1, 2, 3
THREADS_ENV = "PAULITRUNC_THREADS"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# -- config helpers -------------------------------------------------------------

def _kv(spec: str) -> dict[str, str]:
    out = {}
    for part in filter(None, spec.split(",")):
        if "=" not in part:
            raise UsageError(f"expected key=value in generator spec, got {part!r}")
        k, v = part.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _policy(spec: str | None) -> NoisePolicy | None:
    if spec is None:
        return None
    if spec == "none":
        return NoisePolicy()
    kind, _, p = spec.partition(":")
    try:
        return NoisePolicy(kind, float(p))
    except ValueError as exc:
        raise UsageError(f"bad noise spec {spec!r}: {exc}") from None


def generate(spec: str) -> CircuitIR:
    """``brickwork:n=4,depth=2,kind=haar,seed=1``, ``random:n=3,rotations=6,cliffords=8,seed=0``
    or ``lattice:n1=1,layers=2,seed=0``."""
    name, _, rest = spec.partition(":")
    kv = _kv(rest)
    try:
        if name == "brickwork":
            return gen_brickwork(int(kv["n"]), int(kv["depth"]), kv.get("kind", "haar"), int(kv.get("seed", 0)))
        if name == "random":
            return gen_random(int(kv["n"]), int(kv["rotations"]), int(kv.get("cliffords", 0)),
                              int(kv.get("seed", 0)), int(kv.get("weight", 2)))
        if name == "lattice":
            return gen_2d_lattice(int(kv["n1"]), int(kv["layers"]), int(kv.get("seed", 0)))
    except KeyError as exc:
        raise UsageError(f"generator {name!r} needs {exc.args[0]!r}") from None
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    raise UsageError(f"unknown generator {name!r}")


def load_circuit(args) -> CircuitIR:
    if (args.circuit is None) == (args.gen is None):
        raise UsageError("give exactly one of --circuit or --gen")
    if args.circuit is not None:
        try:
            with open(args.circuit) as fh:
                c = parse(fh.read())
        except OSError as exc:
            raise UsageError(f"cannot read circuit: {exc}") from None
    else:
        c = generate(args.gen)
    pol = _policy(args.noise)
    if pol is not None:
        c = c.with_policy(pol)
    diags = validate(c)
    if diags:
        raise UsageError("; ".join(f"{d.code}: {d.message}" for d in diags))
    return c


def _seed_streams(seed: int, k: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(k)]


def param_points(args, c: CircuitIR, rng: np.random.Generator) -> list[ParamPoint]:
    sources = [args.theta is not None, args.draws is not None, args.haar_seed is not None]
    if sum(sources) > 1:
        raise UsageError("give at most one of --theta, --draws, --haar-seed")
    if args.theta is not None:
        try:
            thetas = [float(t) for t in args.theta.split(",") if t.strip()]
        except ValueError:
            raise UsageError(f"bad --theta list {args.theta!r}") from None
        if c.n_haar:
            raise UsageError("explicit --theta cannot supply Haar blocks; use --draws or --haar-seed")
        if len(thetas) != c.n_theta:
            raise UsageError(f"circuit has {c.n_theta} angles, --theta gave {len(thetas)}")
        return [ParamPoint(thetas)]
    if args.haar_seed is not None:
        return [random_params(c, np.random.default_rng(args.haar_seed))]
    if args.draws is not None:
        if args.draws < 1:
            raise UsageError("--draws must be positive")
        return [random_params(c, rng) for _ in range(args.draws)]
    if c.n_parametrized:
        raise UsageError("circuit has parameters; give --theta, --draws or --haar-seed")
    return [ParamPoint()]


def _range(spec: str) -> list[int]:
    try:
        if ".." in spec:
            a, b = spec.split("..")
            return list(range(int(a), int(b) + 1))
        return [int(v) for v in spec.split(",")]
    except ValueError:
        raise UsageError(f"bad L range {spec!r}") from None


def _emit(args, text: str) -> None:
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _need_seed(args) -> None:
    if args.seed is None:
        raise UsageError("--seed is required for this command")


# -- subcommands ----------------------------------------------------------------

def cmd_expect(args) -> int:
    c = load_circuit(args)
    obs = Observable.parse(args.obs)
    if obs.n != c.n:
        raise UsageError(f"observable acts on {obs.n} qubits, circuit has {c.n}")
    stochastic = args.draws is not None or (c.n_haar and args.haar_seed is None)
    if stochastic:
        _need_seed(args)
    (rng,) = _seed_streams(args.seed or 0, 1)
    points = param_points(args, c, rng)
    series = build_series(c, obs, args.L)
    vals = evaluate_many(series, points, args.eps)
    total, pruned = path_count(series)
    lines = ["point,value,paths,pruned"]
    lines += [f"{i},{float(v)!r},{total},{pruned}" for i, v in enumerate(vals)]
    _emit(args, "\n".join(lines) + "\n")
    if args.stats:
        with open(args.stats, "w") as fh:
            fh.write(series.stats_json() + "\n")
    return EXIT_OK


def _spectrum(args, c):
    (rng,) = _seed_streams(args.seed or 0, 1)
    points = param_points(args, c, rng)
    if len(points) != 1:
        raise UsageError("this command takes a single parameter point")
    d = build_distribution(c, args.L, cap=args.cap, mode=args.mode)
    return d, d.spectrum(points[0])


def cmd_probs(args) -> int:
    c = load_circuit(args)
    if args.draws is not None:
        raise UsageError("probs takes a single parameter point (--theta or --haar-seed)")
    d, spec = _spectrum(args, c)
    if args.marginal:
        lines = ["prefix,marginal"] + [f"{m},{spec.marginal(m)!r}" for m in args.marginal]
        _emit(args, "\n".join(lines) + "\n")
    else:
        _emit(args, distribution_csv(spec))
    if args.stats:
        with open(args.stats, "w") as fh:
            fh.write(json.dumps(d.stats(), sort_keys=True) + "\n")
    return EXIT_OK


def cmd_sample(args) -> int:
    _need_seed(args)
    c = load_circuit(args)
    if args.draws is not None:
        raise UsageError("sample takes a single parameter point (--theta or --haar-seed)")
    _, spec = _spectrum(args, c)
    _, rng = _seed_streams(args.seed, 2)
    clamps = fallbacks = calls = 0
    lines = []
    for _ in range(args.shots):
        rec = sample_bitstring(spec, rng)
        clamps += rec.clamps
        fallbacks += rec.fallbacks
        calls += rec.marginal_calls
        lines.append(rec.bitstring)
    footer = {"shots": args.shots, "clamps": clamps, "fallbacks": fallbacks, "marginal_calls": calls}
    _emit(args, "\n".join(lines + [json.dumps(footer, sort_keys=True)]) + "\n")
    return EXIT_OK


def cmd_sweep(args) -> int:
    _need_seed(args)
    c = load_circuit(args)
    obs = Observable.parse(args.obs)
    if obs.n != c.n:
        raise UsageError(f"observable acts on {obs.n} qubits, circuit has {c.n}")
    if args.gamma_from_noise == (args.gamma is not None):
        raise UsageError("give exactly one of --gamma-from-noise or --gamma")
    (rng,) = _seed_streams(args.seed, 1)
    sweep = mc_l2_error(c, obs, _range(args.L), args.draws, rng,
                        gamma=args.gamma, norm=args.norm, seed=args.seed)
    _emit(args, sweep.to_csv())
    return EXIT_OK


def cmd_anticoncentration(args) -> int:
    _need_seed(args)
    (rng,) = _seed_streams(args.seed, 1)
    n, depth = args.n, args.depth

    def draw(r):
        c = gen_brickwork(n, depth, "haar", 0) if depth else CircuitIR(n, ())
        return c, random_params(c, r)

    est, se = anticoncentration_estimate(draw, args.draws, rng)
    text = "n,depth,draws,estimate,stderr,porter_thomas\n"
    text += f"{n},{depth},{args.draws},{est!r},{se!r},{porter_thomas_moment(n)!r}\n"
    _emit(args, text)
    return EXIT_OK


def cmd_adjoint(args) -> int:
    _need_seed(args)
    v = su4_adjoint(haar_su4(np.random.default_rng(args.seed)))
    _emit(args, "\n".join(",".join(repr(float(e)) for e in row) for row in v) + "\n")
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import run_verification

    _need_seed(args)
    report = run_verification(args.max_n, args.seed)
    _emit(args, "\n".join(f"{'PASS' if ok else 'FAIL'} {name}: {detail}" for name, ok, detail in report) + "\n")
    return EXIT_OK if all(ok for _, ok, _ in report) else EXIT_VERIFY


# -- parser -------------------------------------------------------------------------

def _common(p: argparse.ArgumentParser, circuit=True, params=True) -> None:
    p.add_argument("--seed", type=int, help="master seed for every random stream")
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--threads", type=int, default=None,
                   help=f"worker count (env {THREADS_ENV}); results do not depend on it")
    if circuit:
        p.add_argument("--circuit", help="circuit file in the text format")
        p.add_argument("--gen", help="generator spec, e.g. brickwork:n=4,depth=2,kind=haar,seed=1")
        p.add_argument("--noise", help="noise policy override: none, depol1:P or depol2:P")
    if params:
        p.add_argument("--theta", help="comma-separated rotation angles")
        p.add_argument("--draws", type=int, help="number of random parameter points")
        p.add_argument("--haar-seed", type=int, help="one random parameter point from this seed")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="paulitrunc", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("expect", help="truncated expectation values")
    _common(p)
    p.add_argument("--obs", required=True)
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--eps", type=float, default=0.0, help="skip adjoint entries below this magnitude")
    p.add_argument("--stats", help="write path statistics JSON here")
    p.set_defaults(func=cmd_expect)

    for name, fn, hlp in (("probs", cmd_probs, "truncated output distribution"),
                          ("sample", cmd_sample, "sample bitstrings")):
        p = sub.add_parser(name, help=hlp)
        _common(p)
        p.add_argument("--L", type=int, required=True)
        p.add_argument("--cap", type=int, default=14)
        p.add_argument("--mode", choices=("bidirectional", "dense-root"), default="bidirectional")
        if name == "probs":
            p.add_argument("--marginal", action="append", help="qubit-0-first bit prefix (repeatable)")
            p.add_argument("--stats", help="write engine statistics JSON here")
        else:
            p.add_argument("--shots", type=int, default=1000)
        p.set_defaults(func=fn)

    p = sub.add_parser("sweep-l", help="Monte-Carlo truncation error against the bound")
    _common(p, params=False)
    p.add_argument("--obs", required=True)
    p.add_argument("--L", required=True, help="range like 1..6 or list like 1,2,4")
    p.add_argument("--draws", type=int, default=200)
    p.add_argument("--gamma", type=float)
    p.add_argument("--gamma-from-noise", action="store_true")
    p.add_argument("--norm", choices=("min", "hs", "l1", "one"), default="min")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="oracle-equivalence checks on generated circuits")
    _common(p, circuit=False, params=False)
    p.add_argument("--max-n", type=int, default=4)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("anticoncentration", help="second-moment estimator on Haar brickwork")
    _common(p, circuit=False, params=False)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--draws", type=int, default=200)
    p.set_defaults(func=cmd_anticoncentration)

    p = sub.add_parser("adjoint", help="dump the 15x15 adjoint matrix of one Haar draw")
    _common(p, circuit=False, params=False)
    p.set_defaults(func=cmd_adjoint)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.threads is None and os.environ.get(THREADS_ENV):
            args.threads = int(os.environ[THREADS_ENV])
        if args.threads is not None and args.threads < 1:
            raise UsageError("--threads must be positive")
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return args.func(args)
    except (CapExceeded, OracleCapError) as exc:
        print(f"engine error: {exc}", file=sys.stderr)
        return EXIT_ENGINE
    except (UsageError, CircuitParseError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
