"""Command-line driver tying generation, reconstruction, and verification
into reproducible experiments.

Exit codes: 0 success, 1 verification mismatch, 2 no candidate base found,
3 malformed input file, 4 invalid experiment parameters.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .engine import NoBaseFound, reconstruct, verify
from .geometry import Configuration
from .io import (
    ExperimentSpec,
    InvalidSpec,
    MalformedInput,
    dumps_configuration,
    dumps_dataset,
    dumps_walks,
    random_configuration,
    read_configuration,
    read_dataset,
    write_text,
)
from .measurement import build_trilateration_ensemble, measure

EXIT_OK = 0
EXIT_UNMATCHED = 1
EXIT_NO_BASE = 2
EXIT_MALFORMED = 3
EXIT_BAD_SPEC = 4


def _sibling(path: str, tag: str) -> str:
    """data.json -> data.<tag>.json (or append when there is no .json)."""
    if path.endswith(".json"):
        return f"{path[:-5]}.{tag}.json"
    return f"{path}.{tag}.json"


def _cmd_gen(args) -> int:
    spec = ExperimentSpec(
        n=args.points,
        d=args.dim,
        mode=args.mode,
        extra=args.extra,
        max_hops=args.max_hops,
        seed_config=args.seed_config,
        seed_ensemble=args.seed_ensemble,
        seed_shuffle=args.seed_shuffle,
        tol=args.tol,
        rank_strategy=args.rank_strategy,
    )
    cfg = random_configuration(spec.n, spec.d, np.random.default_rng(spec.seed_config))
    ensemble = build_trilateration_ensemble(
        spec.n,
        spec.d,
        spec.mode,
        extra=spec.extra,
        max_hops=spec.max_hops,
        rng=np.random.default_rng(spec.seed_ensemble),
    )
    data, labeled = measure(ensemble, cfg, shuffle_seed=spec.seed_shuffle)
    truth_out = args.truth_out or _sibling(args.out, "truth")
    ensemble_out = args.ensemble_out or _sibling(args.out, "ensemble")
    write_text(args.out, dumps_dataset(data))
    write_text(truth_out, dumps_configuration(cfg))
    write_text(ensemble_out, dumps_walks(labeled.provenance))
    print(
        f"wrote {data.size} values (d={spec.d}, n={spec.n}, {spec.mode}, "
        f"bound={data.bound}) to {args.out}; truth in {truth_out}, "
        f"ensemble in {ensemble_out}"
    )
    return EXIT_OK


def _render_svg(cfg: Configuration, walks) -> str:
    """Scatter of the recovered points with the consumed walks as polylines."""
    pts = np.asarray(cfg.points)
    lo = pts.min(axis=0)
    span = float(max((pts.max(axis=0) - lo).max(), 1e-12))
    size, margin = 500.0, 25.0

    def xy(p):
        q = margin + (p - lo) / span * (size - 2 * margin)
        return q[0], size - q[1]  # flip: SVG y grows downward

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size:g}" '
        f'height="{size:g}" viewBox="0 0 {size:g} {size:g}">',
        f'<rect width="{size:g}" height="{size:g}" fill="white"/>',
    ]
    for walk in walks:
        coords = " ".join(
            "{:.2f},{:.2f}".format(*xy(pts[v])) for v in walk.vertices
        )
        parts.append(
            f'<polyline points="{coords}" fill="none" stroke="#d95f02" '
            'stroke-width="1" stroke-opacity="0.35"/>'
        )
    for i, p in enumerate(pts):
        x, y = xy(p)
        parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="4" fill="#1b6ca8"/>')
        parts.append(
            f'<text x="{x + 6:.2f}" y="{y - 6:.2f}" font-size="11" '
            f'font-family="sans-serif">{i}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _cmd_reconstruct(args) -> int:
    data = read_dataset(args.dataset)
    d = args.dim if args.dim is not None else data.dim
    if args.plot is not None and d != 2:
        raise InvalidSpec("--plot renders planar scatters only (d = 2)")
    if not (0.0 < args.tol < 1.0):
        raise InvalidSpec(f"tolerance must lie in (0, 1), got {args.tol}")
    result = reconstruct(
        data,
        d=d,
        mode=args.mode,
        b=args.bound,
        strategy=args.rank_strategy,
        tol=args.tol,
        max_hops=args.max_hops,
    )
    labeling_out = args.labeling_out or _sibling(args.out, "labeling")
    write_text(args.out, dumps_configuration(result.configuration))
    write_text(labeling_out, dumps_walks(sorted(result.labeling.items())))
    if args.plot is not None:
        walks = [w for _, w in sorted(result.labeling.items())]
        write_text(args.plot, _render_svg(result.configuration, walks))
    print(
        f"recovered {result.configuration.n} points in dimension {d}, "
        f"explaining {result.explained_count} of {data.size} values; "
        f"configuration in {args.out}, labeling in {labeling_out}"
    )
    return EXIT_OK


def _cmd_verify(args) -> int:
    truth = read_configuration(args.truth)
    recovered = read_configuration(args.recovered)
    if not (0.0 < args.tol < 1.0):
        raise InvalidSpec(f"tolerance must lie in (0, 1), got {args.tol}")
    verdict = verify(truth, recovered, tol=args.tol, b=args.bound)
    if verdict.matched:
        print(
            f"matched: scale s={verdict.scale}, "
            f"max length residual {verdict.max_residual:.3e}"
        )
        return EXIT_OK
    print("unmatched: no vertex relabeling and integer scale fit within tolerance")
    return EXIT_UNMATCHED


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trilat",
        description=(
            "Simulate unlabeled path/loop length measurements of a random "
            "point configuration, reconstruct configurations from such "
            "datasets, and verify reconstructions against ground truth."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a seeded experiment")
    gen.add_argument("--dim", type=int, required=True, help="ambient dimension d >= 2")
    gen.add_argument("--points", type=int, required=True, help="number of points n >= d+2")
    gen.add_argument("--mode", choices=("path", "loop"), required=True)
    gen.add_argument("--extra", type=int, default=0, help="distractor walk count")
    gen.add_argument("--max-hops", type=int, default=6, help="longest distractor walk")
    gen.add_argument("--seed-config", type=int, default=0)
    gen.add_argument("--seed-ensemble", type=int, default=0)
    gen.add_argument("--seed-shuffle", type=int, default=0)
    gen.add_argument("--tol", type=float, default=1e-9)
    gen.add_argument("--rank-strategy", choices=("brute", "reduced", "distinct"), default="reduced")
    gen.add_argument("--out", required=True, help="dataset file to write")
    gen.add_argument("--truth-out", help="truth configuration file (default: <out>.truth.json)")
    gen.add_argument("--ensemble-out", help="ground-truth walk file (default: <out>.ensemble.json)")
    gen.set_defaults(func=_cmd_gen)

    rec = sub.add_parser("reconstruct", help="reconstruct a configuration from a dataset")
    rec.add_argument("dataset", help="dataset file produced by gen (or compatible)")
    rec.add_argument("--out", required=True, help="recovered configuration file")
    rec.add_argument("--labeling-out", help="per-value explanation file (default: <out>.labeling.json)")
    rec.add_argument("--dim", type=int, help="override the dataset's dimension")
    rec.add_argument("--mode", choices=("path", "loop"), help="override the dataset's mode")
    rec.add_argument("--bound", type=int, help="override the dataset's multiplicity bound")
    rec.add_argument("--tol", type=float, default=1e-9)
    rec.add_argument("--rank-strategy", choices=("brute", "reduced", "distinct"), default="reduced")
    rec.add_argument(
        "--max-hops", type=int, default=6,
        help="hop budget assumed when ranking competing reconstructions",
    )
    rec.add_argument("--plot", help="write an SVG scatter (d = 2 only)")
    rec.set_defaults(func=_cmd_reconstruct)

    ver = sub.add_parser("verify", help="match a reconstruction against ground truth")
    ver.add_argument("truth", help="truth configuration file")
    ver.add_argument("recovered", help="recovered configuration file")
    ver.add_argument("--tol", type=float, default=1e-9)
    ver.add_argument("--bound", type=int, help="cap on the integer scale searched")
    ver.set_defaults(func=_cmd_verify)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except MalformedInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    except InvalidSpec as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_SPEC
    except NoBaseFound as exc:
        print(f"no base: {exc}", file=sys.stderr)
        return EXIT_NO_BASE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_SPEC


if __name__ == "__main__":
    sys.exit(main())
