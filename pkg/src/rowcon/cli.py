"""Command-line front end.

Usage::

    rowcon classify --input tuple.json [--output out.json]
    rowcon --command charfun --input tuple.json --grid-count 40
    rowcon gen --n 3 --d 2 --count 10 --seed 7 --output ensemble.json
    rowcon selftest

Every output document carries the ``rowcon/1`` schema tag, the tool version,
the seed, the grid settings, the tolerance block and the SHA-256 of the input
bytes. Exit status is 2 for unreadable or invalid input, 1 when a
mathematical precondition fails (the output then names a machine-readable
``reason``) and 0 otherwise.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .acceptance import run_acceptance
from .classify import classify
from .ensembles import KINDS, gen_ensemble
from .errors import RowconError, ShapeMismatch
from .frostman import frostman_identity_residual, phi, phi_inv
from .model import NagyFoiasTheta, characteristic_function, verify_model
from .numlin import TolerancePolicy
from .rowop import iso_pure_decompose, is_partial_isometry
from .sampling import BallSampler
from .schur import SchurFunction, coincide, coincide_weakly
from .serialize import (
    SCHEMA,
    SchemaError,
    atomic_write,
    dumps,
    input_hash,
    matrix_from_json,
    matrix_to_json,
    points_from_json,
    points_to_json,
    schur_from_json,
    schur_to_json,
    tuple_from_json,
    tuple_to_json,
)

__all__ = ["COMMANDS", "DEFAULT_SEED", "JobSpec", "build_parser", "run", "main"]

COMMANDS = ("classify", "decompose", "charfun", "theta", "frostman", "coincide", "verify", "gen",
            "selftest")
DEFAULT_SEED = 20240611
EXIT_OK, EXIT_MATH, EXIT_INPUT = 0, 1, 2

log = logging.getLogger("rowcon.cli")


class InputError(Exception):
    """Bad command line or input document (exit status 2)."""


@dataclass
class JobSpec:
    command: str
    input_path: str | None = None
    output_path: str | None = None
    grid_count: int = 40
    seed: int = DEFAULT_SEED
    ring_radius: float = 0.9
    tol: TolerancePolicy = field(default_factory=TolerancePolicy)
    gen: dict = field(default_factory=dict)

    def sampler(self, d: int) -> BallSampler:
        return BallSampler(d, count=self.grid_count, seed=self.seed, ring_radius=self.ring_radius)

    def header(self) -> dict:
        return {
            "schema": SCHEMA,
            "tool": "rowcon",
            "version": __version__,
            "command": self.command,
            "seed": self.seed,
            "grid": {"count": self.grid_count, "seed": self.seed, "ring_radius": self.ring_radius},
            "tolerances": self.tol.as_dict(),
        }


def _default_seed() -> int:
    raw = os.environ.get("ROWCON_SEED")
    if raw is None:
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError as exc:
        raise InputError(f"ROWCON_SEED must be an integer, got {raw!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rowcon", description="Row contraction models and checks.")
    ap.add_argument("command_pos", nargs="?", choices=COMMANDS, metavar="COMMAND",
                    help="one of: " + ", ".join(COMMANDS))
    ap.add_argument("--command", choices=COMMANDS, help="alternative to the positional command")
    ap.add_argument("--input", help="input JSON document")
    ap.add_argument("--output", help="output path (default: stdout)")
    ap.add_argument("--grid-count", type=int, default=40, help="sample points per grid (>= 2)")
    ap.add_argument("--seed", type=int, default=None, help="seed (default: $ROWCON_SEED or %d)" % DEFAULT_SEED)
    ap.add_argument("--ring-radius", type=float, default=0.9, help="outer radius of the sample grid")
    ap.add_argument("--tol-rank", type=float, default=1e-9, help="relative rank cutoff")
    ap.add_argument("--tol-residual", type=float, default=1e-8, help="identity residual tolerance")
    ap.add_argument("--tol-psd", type=float, default=1e-8, help="negative eigenvalue tolerance")
    ap.add_argument("--n", type=int, help="gen: state dimension")
    ap.add_argument("--d", type=int, help="gen: number of operators")
    ap.add_argument("--count", type=int, help="gen: number of tuples")
    ap.add_argument("--kind", choices=KINDS, help="gen: ensemble kind")
    ap.add_argument("--verbose", action="store_true", help="log progress to stderr")
    return ap


def job_from_args(args: argparse.Namespace) -> JobSpec:
    if args.command and args.command_pos and args.command != args.command_pos:
        raise InputError("positional command and --command disagree")
    command = args.command or args.command_pos
    if command is None:
        raise InputError("no command given")
    if args.grid_count < 2:
        raise InputError("--grid-count must be at least 2")
    if not 0 < args.ring_radius < 1:
        raise InputError("--ring-radius must lie in (0, 1)")
    try:
        tol = TolerancePolicy(args.tol_rank, args.tol_residual, args.tol_psd)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    gen = {k: getattr(args, k) for k in ("n", "d", "count", "kind") if getattr(args, k) is not None}
    return JobSpec(
        command=command,
        input_path=args.input,
        output_path=args.output,
        grid_count=args.grid_count,
        seed=_default_seed() if args.seed is None else args.seed,
        ring_radius=args.ring_radius,
        tol=tol,
        gen=gen,
    )


def _load(job: JobSpec) -> tuple[dict, str | None]:
    if job.input_path is None:
        return {}, None
    try:
        with open(job.input_path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {job.input_path}: {exc}") from exc
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise InputError("the input document must be a JSON object")
    if "schema" in doc and doc["schema"] != SCHEMA:
        raise InputError(f"unsupported schema {doc['schema']!r}")
    return doc, input_hash(raw)


def _tuple(doc: dict, job: JobSpec, key: str = "tuple"):
    src = doc.get(key, doc if key == "tuple" and "blocks" in doc else None)
    if src is None:
        raise InputError(f'the input needs a "{key}" row contraction')
    return tuple_from_json(src, job.tol)


def _points(doc: dict, job: JobSpec, d: int) -> np.ndarray:
    if "points" in doc:
        return points_from_json(doc["points"], d)
    return job.sampler(d).points()


def _table(b: SchurFunction, points) -> dict:
    return schur_to_json(b, points)


def cmd_classify(doc, job):
    T = _tuple(doc, job)
    return classify(T, job.sampler(T.d), job.tol).as_dict()


def cmd_decompose(doc, job):
    T = _tuple(doc, job)
    parts = iso_pure_decompose(T, job.tol)
    return {
        "V": tuple_to_json(parts.V),
        "C": tuple_to_json(parts.C),
        "initial_space_dim": parts.initial_space.dim,
        "final_space_dim": parts.final_space.dim,
        "V_is_partial_isometry": is_partial_isometry(parts.V, job.tol),
    }


def cmd_charfun(doc, job):
    T = _tuple(doc, job)
    data = characteristic_function(T, job.sampler(T.d), job.tol)
    P = _points(doc, job, T.d)
    return {
        "n": T.n,
        "d": T.d,
        "p": data.p,
        "q": data.q,
        "delta": matrix_to_json(data.delta),
        "kappa0": matrix_to_json(data.kappa0),
        "bT_at_origin": matrix_to_json(data.bT(np.zeros(T.d))),
        "bT": _table(data.bT, P),
        "bV": _table(data.bV, P),
    }


def cmd_theta(doc, job):
    T = _tuple(doc, job)
    theta = NagyFoiasTheta(T, job.tol)
    return {"p": theta.p, "q": theta.q, "theta": _table(theta, _points(doc, job, T.d))}


def cmd_frostman(doc, job):
    try:
        alpha = matrix_from_json(doc["alpha"])
        beta = matrix_from_json(doc["beta"])
    except KeyError as exc:
        raise InputError('frostman needs "alpha" and "beta" matrices') from exc
    out = {
        "phi": matrix_to_json(phi(alpha, beta, job.tol)),
        "phi_inv": matrix_to_json(phi_inv(alpha, beta, job.tol)),
        "round_trip_error": float(np.linalg.norm(phi_inv(alpha, phi(alpha, beta, job.tol), job.tol) - beta)),
    }
    if "gamma" in doc:
        gamma = matrix_from_json(doc["gamma"])
        out["identity_residual"] = frostman_identity_residual(alpha, beta, gamma, job.tol)
    return out


def _function(doc: dict, key: str, job: JobSpec) -> SchurFunction:
    if key not in doc:
        raise InputError(f'coincide needs "{key}"')
    src = doc[key]
    if isinstance(src, dict) and "blocks" in src:
        T = tuple_from_json(src, job.tol)
        return characteristic_function(T, job.sampler(T.d), job.tol).bT
    return schur_from_json(src)


def cmd_coincide(doc, job):
    b1, b2 = _function(doc, "b1", job), _function(doc, "b2", job)
    if b1.d != b2.d:
        raise ShapeMismatch("the two functions have different numbers of variables")
    if "points" in doc:
        P = points_from_json(doc["points"], b1.d)
    elif hasattr(b1, "points"):
        P = b1.points
    else:
        P = job.sampler(b1.d).points()
    weak = coincide_weakly(b1, b2, P, job.tol)
    out = {
        "points": len(P),
        "weak": {"coincide": weak is not None,
                 "residual": None if weak is None else weak.residual,
                 "W": None if weak is None else matrix_to_json(weak.W)},
    }
    if (b1.p, b1.q) == (b2.p, b2.q):
        strong = coincide(b1, b2, P, job.tol)
        out["strong"] = {"coincide": strong is not None,
                         "residual": None if strong is None else strong.residual,
                         "R": None if strong is None else matrix_to_json(strong.R),
                         "Q": None if strong is None else matrix_to_json(strong.Q)}
    else:
        out["strong"] = {"coincide": False, "residual": None, "reason": "shapes differ"}
    return out


def cmd_verify(doc, job):
    T = _tuple(doc, job)
    return verify_model(T, job.sampler(T.d), job.tol).as_dict()


def cmd_gen(doc, job):
    params = {"n": 2, "d": 2, "count": 10, "kind": "generic"}
    params.update({k: doc[k] for k in params if k in doc})
    params.update(job.gen)
    for key in ("n", "d", "count"):
        if not isinstance(params[key], int) or params[key] < 1:
            raise InputError(f'"{key}" must be a positive integer')
    if params["kind"] not in KINDS:
        raise InputError(f"unknown ensemble kind {params['kind']!r}")
    tuples = gen_ensemble(params["n"], params["d"], params["count"], job.seed, params["kind"], job.tol)
    return {**params, "tuples": [tuple_to_json(T) for T in tuples]}


def cmd_selftest(doc, job):
    report, results = run_acceptance(job.seed, job.tol)
    for r in results:
        print(r.line(), file=sys.stderr)
    return report


HANDLERS = {
    "classify": cmd_classify,
    "decompose": cmd_decompose,
    "charfun": cmd_charfun,
    "theta": cmd_theta,
    "frostman": cmd_frostman,
    "coincide": cmd_coincide,
    "verify": cmd_verify,
    "gen": cmd_gen,
    "selftest": cmd_selftest,
}


def _emit(job: JobSpec, doc: dict) -> None:
    text = dumps(doc)
    if job.output_path:
        atomic_write(job.output_path, text)
    else:
        sys.stdout.write(text)


def run(job: JobSpec) -> int:
    """Execute one job, write its output document and return the exit status."""
    out = job.header()
    try:
        doc, digest = _load(job)
        out["input_sha256"] = digest
        result = HANDLERS[job.command](doc, job)
    except (InputError, SchemaError, ShapeMismatch) as exc:
        out.update(status="error", error={"reason": "invalid_input", "message": str(exc)})
        _emit(job, out)
        return EXIT_INPUT
    except RowconError as exc:
        out.update(status="error", error={"reason": exc.reason, "message": str(exc)})
        _emit(job, out)
        return EXIT_MATH
    except ValueError as exc:
        out.update(status="error", error={"reason": "invalid_input", "message": str(exc)})
        _emit(job, out)
        return EXIT_INPUT
    out["result"] = result
    if job.command == "selftest" and not result["passed"]:
        out.update(status="error",
                   error={"reason": "criterion_failed", "message": result["first_failure"]})
        _emit(job, out)
        return EXIT_MATH
    out["status"] = "ok"
    _emit(job, out)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.INFO if args.verbose or (args.command or args.command_pos) == "selftest" else logging.WARNING
    logging.basicConfig(level=level, stream=sys.stderr, format="%(name)s: %(message)s")
    try:
        job = job_from_args(args)
    except InputError as exc:
        print(f"rowcon: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return run(job)


if __name__ == "__main__":
    sys.exit(main())
