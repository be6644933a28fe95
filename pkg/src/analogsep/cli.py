"""Command-line entry point.

Five subcommands: `separate` runs the set-intersection separator on one
instance (either loaded from matrix/vector files or generated from a seed),
`phase` runs a rate sweep from a JSON config, `boxdim` estimates the
box-counting dimension of a point cloud, `concentration` checks the
small-ball bound over a grid, and `transversality` tests whether every
s-column subset of a matrix has full rank.

Every command exits 0 when it completes, including computed negatives such
as an Ambiguous separation or a failed transversality verdict.  Failures
(bad arguments, unreadable files, exceeded enumeration budget) print one
JSON object on stderr, `{"error": <type>, "message": <text>}`, and exit
nonzero.  Reruns with identical arguments and seeds write byte-identical
output files.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .boxdim import ScaleSpec, estimate_dimension
from .concentration import (
    BOUND_REPORT_COLUMNS,
    BoundGrid,
    check_small_ball_bound,
    default_bound_grid,
    mixed_transversality,
    sparse_transversality,
    write_bound_reports_csv,
)
from .experiments import (
    RECORD_COLUMNS,
    ExperimentConfig,
    emit_results,
    run_phase_sweep,
    trial_streams,
)
from .measure import EnsembleA, build_A, build_B, load_matrix_csv
from .separator import DEFAULT_BUDGET, CandidateSet, SeparatorTolerances, separate
from .sources import MixedSourceSpec, sample_source, split_point

__all__ = ["main"]


class UsageError(ValueError):
    """Raised for malformed command lines; converted to the JSON error line."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # route argparse failures through our reporter
        raise UsageError(message)


def _fail(exc: BaseException, code: int) -> int:
    line = json.dumps({"error": type(exc).__name__, "message": str(exc)})
    print(line, file=sys.stderr)
    return code


def _write_text(path, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)


def _write_json(path, payload) -> None:
    _write_text(path, json.dumps(payload, indent=2) + "\n")


def _load_vector(path) -> np.ndarray:
    vals = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            vals.extend(float(tok) for tok in line.split(","))
    return np.asarray(vals, dtype=float)


def _load_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _require(doc: dict, key: str, path) -> object:
    if key not in doc:
        raise UsageError(f"{path}: missing required key {key!r}")
    return doc[key]


def _build_parser() -> _Parser:
    shared = _Parser(add_help=False)
    shared.add_argument("--seed", type=int, default=0, help="master seed (64-bit)")
    shared.add_argument("--trials", type=int, default=None, help="Monte Carlo trials")
    shared.add_argument("--out", default=None, help="output path (default: stdout)")
    shared.add_argument("--format", choices=("csv", "json"), default="csv",
                        help="output format for tabular commands")
    shared.add_argument("--budget", type=int, default=None,
                        help="enumeration budget in pattern-assignment pairs")

    parser = _Parser(prog="analogsep",
                     description="signal separation laboratory: exact separator, "
                                 "phase sweeps, dimension and bound checks")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("separate", parents=[shared],
                       help="separate one instance from files or a seeded draw")
    p.add_argument("--spec", required=True,
                   help="JSON file: source spec plus n, s_bar (and k, ensembleA, "
                        "kindB when generating)")
    p.add_argument("--matrix", default=None, help="measurement matrix CSV (k rows, n cols)")
    p.add_argument("--w", default=None, help="measurement vector file (floats, comma or line separated)")

    p = sub.add_parser("phase", parents=[shared], help="run a rate sweep from a JSON config")
    p.add_argument("--config", required=True, help="ExperimentConfig JSON file")

    p = sub.add_parser("boxdim", parents=[shared],
                       help="estimate box-counting dimension of a point cloud")
    p.add_argument("--points", required=True, help="point cloud CSV (header rows,cols)")
    p.add_argument("--eps0", type=float, default=None, help="coarsest scale (default: bbox diag / 4)")
    p.add_argument("--n-scales", type=int, default=8, help="number of dyadic scales")
    p.add_argument("--drop-coarse", type=int, default=1, help="coarse scales excluded from the fit")
    p.add_argument("--drop-fine", type=int, default=1, help="fine scales excluded from the fit")

    p = sub.add_parser("concentration", parents=[shared],
                       help="check the small-ball probability bound over a grid")
    p.add_argument("--grid", default=None,
                   help="JSON file {ns, ks, deltas, u_norms, r}; default: built-in 81-cell grid")

    p = sub.add_parser("transversality", parents=[shared],
                       help="test full rank of every s-column subset")
    p.add_argument("--matrix", required=True, help="matrix CSV (header k,m)")
    p.add_argument("--matrix-b", default=None,
                   help="optional second block; tests [A B] with B certified full column rank")
    p.add_argument("-s", "--s", dest="s", type=int, required=True, help="subset size")

    return parser


def _cmd_separate(args) -> int:
    spec_doc = _load_json(args.spec)
    source = MixedSourceSpec.from_json_dict(_require(spec_doc, "source", args.spec))
    n = int(_require(spec_doc, "n", args.spec))
    s_bar = int(_require(spec_doc, "s_bar", args.spec))
    ell = split_point(n, source.lam)
    budget = args.budget if args.budget is not None else DEFAULT_BUDGET

    if (args.matrix is None) != (args.w is None):
        raise UsageError("--matrix and --w must be given together")

    payload = {}
    if args.matrix is not None:
        H = load_matrix_csv(args.matrix)
        w = _load_vector(args.w)
        if H.shape[1] != n:
            raise UsageError(f"matrix has {H.shape[1]} columns, spec says n={n}")
        if H.shape[0] != w.shape[0]:
            raise UsageError(f"matrix has {H.shape[0]} rows but w has length {w.shape[0]}")
    else:
        if "k" not in spec_doc:
            raise UsageError("generation mode needs k in the spec file")
        k = int(spec_doc["k"])
        ensembleA = EnsembleA.from_json_dict(spec_doc.get("ensembleA", {}))
        kindB = spec_doc.get("kindB", "normal")
        rng_x, rng_a, rng_b = trial_streams(args.seed, 0, 0)
        src = sample_source(source, n, rng_x)
        A = build_A(k, n - ell, ensembleA, rng_a)
        B = build_B(kindB, k, ell, rng_b)
        H = np.hstack([A, B])
        w = H @ src.x
        payload["x_true"] = [float(v) for v in src.x]

    cand = CandidateSet.from_source_spec(source, n, ell, s_bar)
    outcome = separate(H, w, cand, SeparatorTolerances(), budget=budget)
    payload.update(outcome.to_json_dict())
    if "x_true" in payload and outcome.x_hat is not None:
        x_true = np.asarray(payload["x_true"])
        payload["recovery_error"] = float(np.linalg.norm(outcome.x_hat - x_true))
    _write_json(args.out, payload)
    return 0


def _cmd_phase(args) -> int:
    doc = _load_json(args.config)
    doc["master_seed"] = args.seed
    if args.trials is not None:
        doc["trials"] = args.trials
    if args.budget is not None:
        doc["budget"] = args.budget
    try:
        config = ExperimentConfig.from_json_dict(doc)
    except KeyError as exc:
        raise UsageError(f"{args.config}: missing required key {exc.args[0]!r}") from None
    records = run_phase_sweep(config)
    if args.out is not None:
        emit_results(records, args.format, args.out)
    elif args.format == "csv":
        lines = [",".join(RECORD_COLUMNS)] + [rec.csv_row() for rec in records]
        _write_text(None, "\n".join(lines) + "\n")
    else:
        _write_json(None, [rec.to_json_dict() for rec in records])
    return 0


def _cmd_boxdim(args) -> int:
    points = load_matrix_csv(args.points)
    spec = ScaleSpec(eps0=args.eps0, n_scales=args.n_scales,
                     drop_coarse=args.drop_coarse, drop_fine=args.drop_fine)
    est = estimate_dimension(points, spec)
    _write_json(args.out, est.to_json_dict())
    return 0


def _grid_from_json(doc: dict) -> BoundGrid:
    r = float(doc.get("r", 1.0))
    cells = []
    for n in doc["ns"]:
        for k in doc["ks"]:
            for delta in doc["deltas"]:
                for u_norm in doc["u_norms"]:
                    u = np.zeros(int(n))
                    u[0] = float(u_norm)
                    cells.append((int(n), int(k), r, u, np.zeros(int(k)), float(delta)))
    return BoundGrid(cells=tuple(cells))


def _cmd_concentration(args) -> int:
    grid = _grid_from_json(_load_json(args.grid)) if args.grid else default_bound_grid()
    trials = args.trials if args.trials is not None else 100_000
    rng = np.random.default_rng(np.random.SeedSequence(args.seed))
    reports = check_small_ball_bound(grid, trials, rng)
    if args.format == "csv":
        if args.out is not None:
            write_bound_reports_csv(args.out, reports)
        else:
            lines = [",".join(BOUND_REPORT_COLUMNS)] + [rep.csv_row() for rep in reports]
            _write_text(None, "\n".join(lines) + "\n")
    else:
        _write_json(args.out, [rep.to_json_dict() for rep in reports])
    return 0


def _cmd_transversality(args) -> int:
    A = load_matrix_csv(args.matrix)
    if args.matrix_b is not None:
        B = load_matrix_csv(args.matrix_b)
        verdict = mixed_transversality(A, B, args.s)
        n_cols = A.shape[1] + B.shape[1]
    else:
        verdict = sparse_transversality(A, args.s)
        n_cols = A.shape[1]
    payload = {"s": args.s, "k": A.shape[0], "n": n_cols, "transversal": bool(verdict)}
    _write_json(args.out, payload)
    return 0


_COMMANDS = {
    "separate": _cmd_separate,
    "phase": _cmd_phase,
    "boxdim": _cmd_boxdim,
    "concentration": _cmd_concentration,
    "transversality": _cmd_transversality,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        return _fail(exc, 2)
    try:
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        return _fail(exc, 2)
    except Exception as exc:  # noqa: BLE001  single reporting point for the contract
        return _fail(exc, 1)


if __name__ == "__main__":
    raise SystemExit(main())
