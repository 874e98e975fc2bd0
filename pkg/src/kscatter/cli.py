"""Command-line surface: gen, sort, curves, chi, verify."""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

from .quiver import Quiver, build_covering_fragment
from .operators import NAIVE, NIL, AssumptionViolation
from .sorting import SortingDiagram
from .tropical import GeometryError
from .extraction import CapExceeded, curve_catalog, kronecker_euler
from .svg import curve_dump, render_curve
from . import verify as verify_mod


def _load_quiver(args) -> Quiver:
    if args.quiver:
        if args.m or args.depth:
            raise SystemExit("give either --quiver or the generator triple")
        return Quiver.from_text(Path(args.quiver).read_text())
    if not (args.m and args.depth):
        raise SystemExit("need --quiver <path> or --m/--depth[/--root]")
    return build_covering_fragment(args.m, args.depth, args.root)


def _outdir(args) -> Path:
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_gen(args):
    quiver = build_covering_fragment(args.m, args.depth, args.root)
    out = _outdir(args) / f"quiver_m{args.m}_d{args.depth}_{args.root}.json"
    out.write_text(quiver.to_text() + "\n")
    print(f"wrote {out} ({quiver.n_sinks} sinks, {quiver.n_sources} sources)")
    return 0


def cmd_sort(args):
    quiver = _load_quiver(args)
    mode = NIL if args.mode == "nilpotent" else NAIVE
    diagram = SortingDiagram.initial(quiver, mode, args.k,
                                     keep_history=args.debug_history)
    try:
        diagram.stabilize()
    except AssumptionViolation as exc:
        print(f"assumption violation: bracket {exc.bracket} at step {exc.step}")
        print(f"  d1 = {exc.d1}")
        print(f"  d2 = {exc.d2}")
        return 2
    print(f"stable after {diagram.step_count} steps, "
          f"{len(diagram.seq)} operators")
    dump = diagram.dump()
    print(dump)
    if args.emit_dump:
        out = _outdir(args) / "diagram.txt"
        out.write_text(dump + "\n")
        if args.debug_history:
            hist = _outdir(args) / "diagram_history.txt"
            with hist.open("w") as fh:
                for i, seq in enumerate(diagram.history):
                    fh.write(f"# diagram {i}\n")
                    for op in seq:
                        fh.write(repr(op) + "\n")
            print(f"wrote {out}, {hist}")
        else:
            print(f"wrote {out}")
    return 0


def _slope(text):
    if "/" in text:
        a, b = text.split("/")
        return Fraction(int(a), int(b))
    return Fraction(int(text))


def cmd_curves(args):
    quiver = _load_quiver(args)
    mode = NIL if args.mode == "nilpotent" else NAIVE
    k = args.k if mode == NIL else None
    catalog = curve_catalog(quiver, mode, k)
    slopes = ([_slope(args.mu)] if args.mu
              else catalog.diagram.slopes_present())
    out = _outdir(args)
    count = 0
    skipped = 0
    for mu in slopes:
        for idx, curve in enumerate(catalog.assemblies(mu)):
            d_sparse = "".join(f"v{v + 1}x{x}" for v, x in enumerate(curve.d_out) if x)
            stem = f"curve_{mu.numerator}-{mu.denominator}_{d_sparse}_{idx}"
            if args.emit_svg:
                try:
                    (out / f"{stem}.svg").write_text(render_curve(curve, catalog))
                except GeometryError:
                    skipped += 1
            if args.emit_dump:
                (out / f"{stem}.txt").write_text(curve_dump(curve, catalog) + "\n")
            count += 1
    print(f"{count} curves over {len(slopes)} slope(s)"
          + (f" in {out}" if args.emit_svg or args.emit_dump else "")
          + (f"; {skipped} combined walls without an embedding" if skipped else ""))
    return 0


def cmd_chi(args):
    try:
        report = kronecker_euler(args.m, tuple(args.dbar), framing=args.framing)
    except CapExceeded as exc:
        print(f"resource cap: {exc}")
        return 3
    print(report.table())
    if args.emit_curves or args.emit_svg:
        out = _outdir(args)
        emitted = 0
        for row in report.rows:
            if row.coefficient == 0:
                continue
            catalog = curve_catalog(
                row.quiver, NAIVE if args.m == 2 else NIL,
                None if args.m == 2 else max(row.rep))
            mu = row.quiver.slope(row.rep)
            for idx, curve in enumerate(catalog.assemblies(mu)):
                stem = f"chi_{args.dbar[0]}_{args.dbar[1]}_row{emitted}_c{idx}"
                try:
                    (out / f"{stem}.svg").write_text(render_curve(curve, catalog))
                except GeometryError:
                    pass
            emitted += 1
        print(f"witness curves for {emitted} contributing rows in {out}")
    return 0


def cmd_verify(args):
    print(f"verification suite seed={args.seed} slow_tier={args.slow_tier}")
    results = verify_mod.run_all(slow_tier=args.slow_tier, seed=args.seed)
    hard_fail = False
    for res in results:
        print(res.line())
        if res.hard and not res.ok:
            hard_fail = True
    return 1 if hard_fail else 0


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="kscatter",
        description="sorting diagrams, tropical curves, and framed Euler "
                    "characteristics on covering Kronecker quivers")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_quiver_opts(p):
        p.add_argument("--quiver", help="quiver file (JSON text format)")
        p.add_argument("--m", type=int, help="Kronecker arrow multiplicity")
        p.add_argument("--depth", type=int, help="covering-ball radius")
        p.add_argument("--root", choices=["sink", "source"], default="sink")

    def add_common(p):
        p.add_argument("--k", type=int, default=1)
        p.add_argument("--mode", choices=["naive", "nilpotent"], default="naive")
        p.add_argument("--out", help="output directory")
        p.add_argument("--emit-svg", action="store_true")
        p.add_argument("--emit-dump", action="store_true")

    p_gen = sub.add_parser("gen", help="write a covering fragment")
    p_gen.add_argument("--m", type=int, required=True)
    p_gen.add_argument("--depth", type=int, required=True)
    p_gen.add_argument("--root", choices=["sink", "source"], default="sink")
    p_gen.add_argument("--out")
    p_gen.set_defaults(fn=cmd_gen)

    p_sort = sub.add_parser("sort", help="stabilize a sorting diagram")
    add_quiver_opts(p_sort)
    add_common(p_sort)
    p_sort.add_argument("--debug-history", action="store_true")
    p_sort.set_defaults(fn=cmd_sort)

    p_curves = sub.add_parser("curves", help="emit tropical curves")
    add_quiver_opts(p_curves)
    add_common(p_curves)
    p_curves.add_argument("--mu", help="slope filter, e.g. 1/2")
    p_curves.set_defaults(fn=cmd_curves)

    p_chi = sub.add_parser("chi", help="framed Euler characteristic")
    p_chi.add_argument("--m", type=int, required=True)
    p_chi.add_argument("--dbar", type=int, nargs=2, required=True)
    p_chi.add_argument("--framing", choices=["B", "F"], default="B")
    p_chi.add_argument("--out")
    p_chi.add_argument("--emit-curves", action="store_true")
    p_chi.add_argument("--emit-svg", action="store_true")
    p_chi.set_defaults(fn=cmd_chi)

    p_verify = sub.add_parser("verify", help="run the acceptance suites")
    p_verify.add_argument("--slow-tier", action="store_true")
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.set_defaults(fn=cmd_verify)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
