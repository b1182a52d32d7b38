"""Batch command line: run job documents and one-shot verifier suites.

Exit codes: 0 when every executed check passes, 1 on a failed check or a
numerical error, 2 on usage / document-validation errors.  Reports are
deterministic for a fixed document; BLAS thread pools are pinned to one
thread before any numerics load so that byte-identical output does not
depend on the host's thread count.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

USAGE_ERROR = 2


def _pin_threads() -> None:
    # must run before numpy is imported anywhere in the process
    for var in (
        "OPENBLAS_NUM_THREADS",
        "MKL_NUM_THREADS",
        "OMP_NUM_THREADS",
        "NUMEXPR_NUM_THREADS",
    ):
        os.environ.setdefault(var, "1")


def _parse_point(text: str) -> complex:
    try:
        re_part, im_part = text.split(",")
        return complex(float(re_part), float(im_part))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(
            f"expected a point as 're,im', got {text!r}"
        ) from exc


def _parse_grid(text: str) -> list[complex]:
    return [_parse_point(chunk) for chunk in text.split(";") if chunk]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nevlab",
        description="verify invariance properties of Herglotz-class operator "
        "functions, pairs and relations at desk scale",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_doc=True):
        if with_doc:
            p.add_argument("doc", help="job document (nevlab/1 JSON)")
        p.add_argument("--out", default=None, help="report output directory")
        p.add_argument("--format", choices=("json", "csv", "both"), default=None)
        p.add_argument("--seed", type=int, default=None, help="override document seed")
        p.add_argument("--grid", type=_parse_grid, default=None,
                       help="z-grid override, 're,im;re,im;...'")
        p.add_argument("--tol-psd", type=float, default=None)
        p.add_argument("--tol-rank", type=float, default=None)
        p.add_argument("--tol-eq", type=float, default=None)

    common(sub.add_parser("run", help="execute every task in a document"))

    p = sub.add_parser("classify", help="classify family entities of a document")
    common(p)
    p.add_argument("--entity", default=None, help="restrict to one entity")

    p = sub.add_parser("invariance", help="run the invariance checks on an entity")
    common(p)
    p.add_argument("--entity", required=True)
    p.add_argument("--a", type=float, default=0.0, help="real spectral point")

    p = sub.add_parser("harnack", help="Harnack constants and certificates")
    common(p, with_doc=False)
    p.add_argument("--z1", type=_parse_point, default=1j)
    p.add_argument("--z2", type=_parse_point, default=2j)
    p.add_argument("--trials", type=int, default=1000)

    p = sub.add_parser("analysis", help="splitting / bounds / decay for an entity")
    common(p)
    p.add_argument("--entity", required=True)
    p.add_argument(
        "--analyses",
        default="split,c2,weak_strong,factor,schatten",
        help="comma-separated list",
    )
    p.add_argument("--z", type=_parse_point, default=2j)

    p = sub.add_parser("examples", help="example-family reports")
    common(p)
    p.add_argument("--entity", required=True)
    p.add_argument(
        "--what",
        choices=("decay", "form_domain", "gap_sweep", "conditioning"),
        default="decay",
    )

    p = sub.add_parser("demo", help="run the bundled demonstration document")
    common(p, with_doc=False)

    return parser


def _load_document(args, text: str):
    from . import document as docmod

    doc = docmod.parse_document(text)
    if args.seed is not None:
        doc.seed = args.seed
    if getattr(args, "grid", None):
        doc.grid = list(args.grid)
    overrides = {
        "eps_psd": args.tol_psd,
        "eps_rank": args.tol_rank,
        "eps_eq": args.tol_eq,
    }
    for key, value in overrides.items():
        if value is not None:
            doc.tolerances[key] = value
    if args.format is not None:
        doc.output_format = args.format
    return doc


def _execute(doc, args) -> int:
    from . import reports as repmod
    from . import runner as runmod

    try:
        task_reports = runmod.run_document(doc)
    except runmod.RunError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    out_dir = args.out or doc.output_dir or "nevlab-out"
    summary = repmod.write_reports(task_reports, out_dir, doc.output_format)
    for entry in summary["tasks"]:
        status = "pass" if entry["passed"] else "FAIL"
        print(f"[{status}] {entry['task']}: {entry['name']}")
    print(f"reports written to {out_dir}")
    return 0 if summary["passed"] else 1


def _synthetic_tasks(args, doc) -> list[dict]:
    """Replace document tasks for the one-shot subcommands."""
    if args.command == "classify":
        names = (
            [args.entity]
            if args.entity
            else [e["name"] for e in doc.entities]
        )
        return [
            {"name": f"classify-{n}", "task": "classify", "entity": n} for n in names
        ]
    if args.command == "invariance":
        return [
            {
                "name": f"invariance-{args.entity}",
                "task": "invariance",
                "entity": args.entity,
                "a": args.a,
            }
        ]
    if args.command == "analysis":
        return [
            {
                "name": f"analysis-{args.entity}",
                "task": "analysis",
                "entity": args.entity,
                "analyses": [a for a in args.analyses.split(",") if a],
                "z": [args.z.real, args.z.imag],
            }
        ]
    if args.command == "examples":
        return [
            {
                "name": f"examples-{args.entity}",
                "task": "examples",
                "entity": args.entity,
                "what": args.what,
            }
        ]
    raise AssertionError(args.command)


def demo_document_text() -> str:
    path = Path(__file__).with_name("data") / "demo_job.json"
    return path.read_text()


def main(argv=None) -> int:
    _pin_threads()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE_ERROR if exc.code not in (0, None) else 0

    from . import document as docmod

    if args.command == "harnack":
        from . import analysis

        try:
            hp = analysis.harnack_constants(args.z1, args.z2)
        except Exception as exc:
            print(f"error: {exc}", file=sys.stderr)
            return USAGE_ERROR
        import numpy as np

        worst = analysis.certify_harnack(
            args.z1, args.z2, args.trials, np.random.default_rng(args.seed or 0)
        )
        print(f"c1 = {hp.c1!r}")
        print(f"c2 = {hp.c2!r}")
        print(f"certificate worst violation over {args.trials} trials: {worst!r}")
        return 0 if worst <= 1e-12 else 1

    if args.command == "demo":
        text = demo_document_text()
    else:
        try:
            text = Path(args.doc).read_text()
        except OSError as exc:
            print(f"error: cannot read document: {exc}", file=sys.stderr)
            return USAGE_ERROR

    try:
        doc = _load_document(args, text)
    except docmod.DocumentError as exc:
        for line in exc.errors:
            print(f"document error: {line}", file=sys.stderr)
        return USAGE_ERROR
    except ValueError as exc:
        print(f"document error: {exc}", file=sys.stderr)
        return USAGE_ERROR

    if args.command in ("classify", "invariance", "analysis", "examples"):
        known = {e["name"] for e in doc.entities}
        entity = getattr(args, "entity", None)
        if entity is not None and entity not in known:
            print(f"error: unknown entity {entity!r}", file=sys.stderr)
            return USAGE_ERROR
        doc.tasks = _synthetic_tasks(args, doc)

    return _execute(doc, args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
