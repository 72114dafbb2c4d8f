"""Command-line front door: detect, inpaint, osmosis and serve.

Exit codes: 0 success, 1 usage error (message on stderr), 2 processing
error. Flags mirror the job-JSON parameter names one-to-one so the same
vocabulary works across CLI, service and UI; --json-report writes a
machine-readable summary that is sufficient to reproduce the run.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import asdict
from pathlib import Path

from .detect import SeedSet, close_holes, dilate_mask, grow_region
from .errors import LumenError
from .exemplar import ExemplarParams, inpaint_exemplar
from .osmosis import OsmosisParams, fuse_multispectral
from .pde import DiffusionMethod, inpaint_diffusion
from .png_io import load_image, load_mask, save_image, save_mask
from .raster import DamageClass, mask_stats

log = logging.getLogger("lumen")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would sys.exit(2); we want exit 1
        raise UsageError(message)


def _seed(text: str):
    try:
        x, y = text.split(",")
        return int(x), int(y)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must look like X,Y, got {text!r}")


def _build_parser() -> _Parser:
    parser = _Parser(prog="lumen", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_output=True):
        p.add_argument("--input", required=True, help="input image (PNG/PGM/PPM)")
        if needs_output:
            p.add_argument("--output", required=True, help="output file (PNG)")
        p.add_argument("--json-report", metavar="PATH", help="write a run summary")
        p.add_argument("--force", action="store_true",
                       help="allow writing over the input file")

    d = sub.add_parser("detect", help="grow a damage mask from seed pixels")
    common(d)
    d.add_argument("--seed", action="append", type=_seed, default=[],
                   metavar="X,Y", help="seed pixel, repeatable")
    d.add_argument("--tolerance", type=float, required=True,
                   help="intensity distance kept while growing")
    d.add_argument("--dilate-radius", type=int, default=0)
    d.add_argument("--close-holes", action="store_true",
                   help="fill enclosed false pockets in the grown mask")
    d.add_argument("--damage-class", default="lacuna",
                   choices=[c.value for c in DamageClass])

    i = sub.add_parser("inpaint", help="fill the masked region")
    common(i)
    i.add_argument("--mask", required=True, help="mask PNG (>=128 means damaged)")
    i.add_argument("--method", required=True, choices=["harmonic", "tv", "exemplar"])
    i.add_argument("--solver-tol", type=float, default=1e-10)
    i.add_argument("--tv-epsilon", type=float, default=1e-3)
    i.add_argument("--tv-outer-iters", type=int, default=30)
    i.add_argument("--patch-size", type=int, default=9)
    i.add_argument("--search-window", default="full",
                   help="'full' or a radius in pixels")
    i.add_argument("--data-term-alpha", type=float, default=1.0)

    o = sub.add_parser("osmosis", help="fuse a source channel into the image")
    common(o)
    o.add_argument("--source", required=True,
                   help="guidance image (e.g. infra-red), any supported format")
    o.add_argument("--mask", help="region mask; omitted means the full image",
                   default=None)
    o.add_argument("--dt", type=float, default=1000.0)
    o.add_argument("--steps", type=int, default=500)
    o.add_argument("--steady-tol", type=float, default=1e-8)
    o.add_argument("--offset", type=float, default=1.0 / 255.0)
    o.add_argument("--solver-tol", type=float, default=1e-12)
    o.add_argument("--presmooth-steps", type=int, default=0)
    o.add_argument("--presmooth-dt", type=float, default=1.0)

    s = sub.add_parser("serve", help="run the HTTP job service")
    s.add_argument("--port", type=int, default=8080)
    s.add_argument("--host", default="127.0.0.1")
    s.add_argument("--data-dir", default="./lumen-data")
    s.add_argument("--workers", type=int, default=2)
    s.add_argument("--ui-dir", default=None, help="static UI directory override")
    return parser


def _guard_overwrite(output: str, inputs, force: bool) -> None:
    out = Path(output).resolve()
    for src in inputs:
        if src and Path(src).resolve() == out and not force:
            raise UsageError(
                f"refusing to overwrite input {src!r} (pass --force to allow)"
            )


def _write_report(path, command, parameters, files, reports, wall, extra=None):
    if not path:
        return
    payload = {
        "command": command,
        "method": parameters.get("method"),
        "parameters": parameters,
        **files,
        "solver_reports": [asdict(r) for r in reports],
        "wall_time_seconds": wall,
    }
    if extra:
        payload.update(extra)
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


def _run_detect(args) -> int:
    _guard_overwrite(args.output, [args.input], args.force)
    t0 = time.perf_counter()
    image = load_image(args.input)
    seed_set = SeedSet(
        args.seed, args.tolerance, DamageClass(args.damage_class)
    )
    mask = grow_region(image, seed_set)
    if args.dilate_radius:
        mask = dilate_mask(mask, args.dilate_radius)
    if args.close_holes:
        mask = close_holes(mask)
    save_mask(mask, args.output)
    count, fraction = mask_stats(mask)
    log.info("detect: %d pixels (%.1f%%) marked", count, 100 * fraction)
    _write_report(
        args.json_report,
        "detect",
        {
            "method": "detect",
            "seeds": [[x, y] for x, y in args.seed],
            "tolerance": args.tolerance,
            "dilate_radius": args.dilate_radius,
            "close_holes": args.close_holes,
            "damage_class": args.damage_class,
        },
        {"input": args.input, "output": args.output},
        [],
        time.perf_counter() - t0,
        {"count_true": count, "fraction": fraction},
    )
    return 0


def _run_inpaint(args) -> int:
    _guard_overwrite(args.output, [args.input, args.mask], args.force)
    t0 = time.perf_counter()
    image = load_image(args.input)
    mask = load_mask(args.mask)
    reports = []
    if args.method in ("harmonic", "tv"):
        spec = (
            DiffusionMethod.harmonic()
            if args.method == "harmonic"
            else DiffusionMethod.total_variation(args.tv_epsilon, args.tv_outer_iters)
        )
        result = inpaint_diffusion(image, mask, spec, solver_tol=args.solver_tol)
        out = result.image
        reports = list(result.solver_reports)
        parameters = {"method": args.method, "solver_tol": args.solver_tol}
        if args.method == "tv":
            parameters.update(
                tv_epsilon=args.tv_epsilon, tv_outer_iters=args.tv_outer_iters
            )
    else:
        window = args.search_window
        if window != "full":
            try:
                window = int(window)
            except ValueError:
                raise UsageError("--search-window must be 'full' or an integer")
        out = inpaint_exemplar(
            image,
            mask,
            ExemplarParams(
                patch_size=args.patch_size,
                search_window=None if window == "full" else window,
                data_term_alpha=args.data_term_alpha,
            ),
        )
        parameters = {
            "method": "exemplar",
            "patch_size": args.patch_size,
            "search_window": args.search_window,
            "data_term_alpha": args.data_term_alpha,
        }
    save_image(out, args.output)
    _write_report(
        args.json_report,
        "inpaint",
        parameters,
        {"input": args.input, "mask": args.mask, "output": args.output},
        reports,
        time.perf_counter() - t0,
    )
    return 0


def _run_osmosis(args) -> int:
    _guard_overwrite(args.output, [args.input, args.source, args.mask], args.force)
    t0 = time.perf_counter()
    image = load_image(args.input)
    source = load_image(args.source)
    region = load_mask(args.mask) if args.mask else None
    params = OsmosisParams(
        dt=args.dt,
        steps=args.steps,
        steady_tol=args.steady_tol,
        offset=args.offset,
        solver_tol=args.solver_tol,
        presmooth_steps=args.presmooth_steps,
        presmooth_dt=args.presmooth_dt,
    )
    out = fuse_multispectral(image, source, region, params)
    save_image(out, args.output)
    _write_report(
        args.json_report,
        "osmosis",
        {
            "method": "osmosis",
            "region": "mask" if args.mask else "full",
            "dt": args.dt,
            "steps": args.steps,
            "steady_tol": args.steady_tol,
            "offset": args.offset,
            "solver_tol": args.solver_tol,
            "presmooth_steps": args.presmooth_steps,
            "presmooth_dt": args.presmooth_dt,
        },
        {"input": args.input, "source": args.source, "mask": args.mask,
         "output": args.output},
        [],
        time.perf_counter() - t0,
    )
    return 0


def _run_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(args.data_dir, workers=args.workers, ui_dir=args.ui_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def run_cli(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1

    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    handlers = {
        "detect": _run_detect,
        "inpaint": _run_inpaint,
        "osmosis": _run_osmosis,
        "serve": _run_serve,
    }
    try:
        return handlers[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (LumenError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
