"""Command-line front door.

Every subcommand validates its RunConfig first, echoes it into the output and
writes deterministic JSON, CSV or DOT.  Exit codes: 0 success, 2 precondition
violated, 3 precision or enumeration bound exhausted, 4 internal invariant
breach.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from fractions import Fraction

from .errors import ArborError, PreconditionError
from .padic import DEFAULT_PRECISION, PadicNumber

SCHEMA = "arbor-p/1"
FORMATS = ("json", "csv", "dot")


@dataclass(frozen=True)
class RunConfig:
    command: str
    p: int | None = None
    precision: int = DEFAULT_PRECISION
    depth: int = 0
    tolerance: float = 0.05
    format: str = "json"
    seed: int = 0
    jobs: int = 1

    def validate(self) -> None:
        if self.p is not None and not _is_prime(self.p):
            raise PreconditionError(f"p must be prime; got {self.p}")
        if self.precision < 2:
            raise PreconditionError("precision N >= 2 required")
        if self.depth < 0:
            raise PreconditionError("depth m >= 0 required")
        if not 0 < self.tolerance < 1:
            raise PreconditionError("tolerance must lie in (0, 1)")
        if self.format not in FORMATS:
            raise PreconditionError(f"format must be one of {FORMATS}")
        if self.jobs < 1:
            raise PreconditionError("jobs >= 1 required")


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def _require_prime(name: str, n: int) -> None:
    if not _is_prime(n):
        raise PreconditionError(f"{name} must be prime; got {n}")


def rat(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def padic_json(x: PadicNumber) -> dict:
    if x.is_zero():
        return {"p": x.prime, "valuation": None, "digits": [], "precision": x.precision}
    return {"p": x.prime, "valuation": x.valuation, "digits": x.digits(),
            "precision": x.precision}


def _mapper(cfg: RunConfig):
    if cfg.jobs == 1:
        return map, None
    pool = ProcessPoolExecutor(max_workers=cfg.jobs)
    return pool.map, pool


# rendering


def render_json(cfg: RunConfig, payload: dict) -> str:
    doc = {"schema": SCHEMA, "config": asdict(cfg), **payload}
    return json.dumps(doc, indent=2) + "\n"


def render_csv(cfg: RunConfig, header: list, rows: list) -> str:
    buf = io.StringIO()
    buf.write(f"# {SCHEMA} config={json.dumps(asdict(cfg), sort_keys=True)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def render_dot(cfg: RunConfig, dot: str) -> str:
    return f"// {SCHEMA} config={json.dumps(asdict(cfg), sort_keys=True)}\n{dot}"


def _no_dot(cfg: RunConfig):
    if cfg.format == "dot":
        raise PreconditionError(f"{cfg.command} has no DOT rendering; use json or csv")


# subcommands


def cmd_classgroup(args, cfg: RunConfig) -> str:
    from .quadforms import class_group

    _no_dot(cfg)
    cg = class_group(args.d)
    orders = [cg.order(f) for f in cg.reduced_forms]
    if cfg.format == "csv":
        return render_csv(cfg, ["A", "B", "C", "order"],
                          [[f.A, f.B, f.C, o] for f, o in zip(cg.reduced_forms, orders)])
    return render_json(cfg, {"d": args.d, "h": cg.h, "forms": [
        {"form": [f.A, f.B, f.C], "order": o} for f, o in zip(cg.reduced_forms, orders)]})


def cmd_pic(args, cfg: RunConfig) -> str:
    from .quadforms import pic_of_s_order

    _no_dot(cfg)
    pic = pic_of_s_order(args.d, cfg.p)
    cert = list(pic.u_norm_certificate) if pic.u_norm_certificate else None
    if cfg.format == "csv":
        rows = [[i, f.A, f.B, f.C] for i, c in enumerate(pic.cosets) for f in c]
        return render_csv(cfg, ["coset", "A", "B", "C"], rows)
    return render_json(cfg, {
        "d": pic.d, "p": pic.p, "split": pic.split, "h": pic.h, "k": pic.k,
        "h_prime": pic.h_prime, "unit_certificate": cert,
        "cosets": [[[f.A, f.B, f.C] for f in c] for c in pic.cosets]})


def _volcano_graph(args, cfg):
    from .volcano import build_volcano, build_volcano_from_tree

    if args.from_tree:
        return build_volcano_from_tree(args.d, cfg.p, cfg.depth)
    return build_volcano(args.d, cfg.p, cfg.depth)


def cmd_volcano(args, cfg: RunConfig) -> str:
    from .volcano import _node_label

    g = _volcano_graph(args, cfg)
    if cfg.format == "dot":
        return render_dot(cfg, g.to_dot())
    index = {n: i for i, n in enumerate(g.nodes)}
    if cfg.format == "csv":
        return render_csv(cfg, ["source", "target", "source_depth", "target_depth"],
                          [[index[a], index[b], g.depth[a], g.depth[b]] for a, b in g.edges])
    return render_json(cfg, {
        "d": g.d, "p": g.p, "k": g.k, "depth": g.m,
        "nodes": [{"id": index[n], "label": _node_label(n), "depth": g.depth[n],
                   "discriminant": g.cm_discriminant(n)} for n in g.nodes],
        "edges": [[index[a], index[b]] for a, b in g.edges]})


def cmd_iscycles(args, cfg: RunConfig) -> str:
    from .volcano import is_cycles

    _no_dot(cfg)
    cycles = is_cycles(args.d, cfg.p)
    if cfg.format == "csv":
        rows = [[i, j, f.A, f.B, f.C, rat(z.re), rat(z.im_sq)]
                for i, c in enumerate(cycles) for j, (f, z) in enumerate(zip(c.coset, c.cm_points))]
        return render_csv(cfg, ["cycle", "position", "A", "B", "C", "re", "im_squared"], rows)
    return render_json(cfg, {"d": args.d, "p": cfg.p, "count": len(cycles), "cycles": [
        {"length": len(c.coset),
         "forms": [[f.A, f.B, f.C] for f in c.coset],
         "cm_points": [{"re": rat(z.re), "im_squared": rat(z.im_sq)} for z in c.cm_points]}
        for c in cycles]})


def split_fundamental_discriminants(dmin: int, dmax: int, p: int) -> list[int]:
    from .quadforms import is_fundamental, kronecker

    return [d for d in range(dmax, dmin - 1, -1)
            if d % 4 in (0, 1) and d not in (-3, -4) and kronecker(d, p) == 1
            and is_fundamental(d)]


def _check_range(dmin: int, dmax: int) -> None:
    if not dmin <= dmax < 0:
        raise PreconditionError(f"dmin <= dmax < 0 required; got [{dmin}, {dmax}]")


def cmd_duke(args, cfg: RunConfig) -> str:
    from .volcano import DEFAULT_BOXES, Box, duke_statistic

    _no_dot(cfg)
    _check_range(args.dmin, args.dmax)
    boxes = [Box.parse(b) for b in args.box] if args.box else list(DEFAULT_BOXES)
    ds = split_fundamental_discriminants(args.dmin, args.dmax, cfg.p)
    if not ds:
        raise PreconditionError("no fundamental discriminant split at p in the range")
    Y = Fraction(args.Y)
    mapper, pool = _mapper(cfg)
    try:
        rep = duke_statistic(ds, cfg.p, Y, boxes, mapper=mapper)
    finally:
        if pool:
            pool.shutdown()
    for s in rep["summary"]:
        s["within_tolerance"] = abs(s["deviation"]) <= cfg.tolerance
    if cfg.format == "csv":
        rows = [[r["d"], r["h"], b["spec"], b["count"], b["observed"], b["predicted"]]
                for r in rep["discriminants"] for b in r["boxes"]]
        return render_csv(cfg, ["d", "h", "box", "count", "observed", "predicted"], rows)
    return render_json(cfg, rep)


def cmd_quotient(args, cfg: RunConfig) -> str:
    from .shimura import eichler_mass, quotient_graph

    _require_prime("q", args.q)
    if args.q == cfg.p:
        raise PreconditionError("q != p required")
    qg = quotient_graph(args.q, cfg.p)
    if cfg.format == "dot":
        lines = [f"graph quotient_q{args.q}_p{cfg.p} {{"]
        for v in qg.vertices:
            lines.append(f'  c{v.id} [label="{v.rep.label()} stab={v.stab} mass={rat(v.mass)}"];')
        done = set()
        for e in qg.edges:
            key = frozenset((e.id, e.reverse))
            if key in done:
                continue
            done.add(key)
            lines.append(f"  c{e.source} -- c{e.target};")
        lines.append("}")
        return render_dot(cfg, "\n".join(lines) + "\n")
    if cfg.format == "csv":
        return render_csv(cfg, ["class", "representative", "stabilizer", "mass"],
                          [[v.id, v.rep.label(), v.stab, rat(v.mass)] for v in qg.vertices])
    out = qg.to_json()
    out["eichler_mass"] = rat(eichler_mass(args.q))
    return render_json(cfg, out)


def cmd_heegner(args, cfg: RunConfig) -> str:
    from .shimura import heegner_set

    _no_dot(cfg)
    _require_prime("q", args.q)
    pts = heegner_set(args.d, args.q, cfg.p, cfg.precision)
    if cfg.format == "csv":
        return render_csv(cfg, ["index", "quotient_class", "vertex", "residue", "x"],
                          [[h.embedding_class, h.quotient_class, h.reduced_vertex.label(),
                            " ".join(map(str, h.residue_point)), " ".join(rat(c) for c in h.x)]
                           for h in pts])
    return render_json(cfg, {"d": args.d, "q": args.q, "p": cfg.p, "count": len(pts), "points": [
        {"index": h.embedding_class, "quotient_class": h.quotient_class,
         "vertex": h.reduced_vertex.label(), "residue": list(h.residue_point),
         "embedding": [rat(c) for c in h.x],
         "tau": {"x": padic_json(h.tau.x), "y": padic_json(h.tau.y)}} for h in pts]})


def cmd_equidist(args, cfg: RunConfig) -> str:
    from .shimura import eligible_discriminants, equidist_report

    _no_dot(cfg)
    _require_prime("q", args.q)
    _check_range(args.dmin, args.dmax)
    ds = [d for d in eligible_discriminants(args.q, cfg.p, args.dmin, args.dmax)
          if d % 2]
    if args.buckets:
        buckets = [tuple(int(x) for x in b.split(",")) for b in args.buckets]
    else:
        # decades of |d|
        lo, hi, buckets = -args.dmax, -args.dmin, []
        top = 10
        while top < lo:
            top *= 10
        start = lo
        while start <= hi:
            buckets.append((start, min(top, hi)))
            start, top = top + 1, top * 10
    rep = equidist_report(ds, args.q, cfg.p, buckets)
    last = next((b for b in reversed(rep["buckets"]) if b["tv"] is not None), None)
    rep["largest_bucket_within_tolerance"] = None if last is None else last["tv"] < cfg.tolerance
    if cfg.format == "csv":
        rows = [[r["d"], r["count"], *r["classes"], r["tv"]] for r in rep["discriminants"]]
        ncls = len(rep["masses"])
        return render_csv(cfg, ["d", "count", *[f"class_{i}" for i in range(ncls)], "tv"], rows)
    return render_json(cfg, rep)


# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=FORMATS, default=None)
    common.add_argument("--precision", "-N", type=int, default=DEFAULT_PRECISION)
    common.add_argument("--tolerance", type=float, default=None)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--jobs", "-j", type=int, default=1)
    common.add_argument("--output", "-o", default=None, help="write here instead of stdout")

    ap = argparse.ArgumentParser(prog="arborp", description="Bruhat-Tits tree arithmetic")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("classgroup", parents=[common], help="reduced forms and orders")
    s.add_argument("-d", type=int, required=True)
    s.set_defaults(func=cmd_classgroup)

    s = sub.add_parser("pic", parents=[common], help="Picard group of the Z[1/p]-order")
    s.add_argument("-d", type=int, required=True)
    s.add_argument("-p", type=int, required=True)
    s.set_defaults(func=cmd_pic)

    s = sub.add_parser("volcano", parents=[common], help="volcano graph to depth m")
    s.add_argument("-d", type=int, required=True)
    s.add_argument("-p", type=int, required=True)
    s.add_argument("--depth", "-m", type=int, default=1)
    s.add_argument("--dot", action="store_true", help="shorthand for --format dot")
    s.add_argument("--from-tree", action="store_true",
                   help="build as a torus quotient of the tree instead of synthetically")
    s.set_defaults(func=cmd_volcano)

    s = sub.add_parser("iscycles", parents=[common], help="cycles with their CM points")
    s.add_argument("-d", type=int, required=True)
    s.add_argument("-p", type=int, required=True)
    s.set_defaults(func=cmd_iscycles)

    s = sub.add_parser("duke", parents=[common], help="CM-point statistics over a range")
    s.add_argument("--dmin", type=int, required=True)
    s.add_argument("--dmax", type=int, required=True)
    s.add_argument("-p", type=int, required=True)
    s.add_argument("--Y", default="2")
    s.add_argument("--box", action="append", default=[],
                   help="x0,x1,y0,y1 (y1 may be inf); repeatable")
    s.set_defaults(func=cmd_duke)

    s = sub.add_parser("quotient", parents=[common], help="quotient graph and masses")
    s.add_argument("-q", type=int, required=True)
    s.add_argument("-p", type=int, required=True)
    s.set_defaults(func=cmd_quotient)

    s = sub.add_parser("heegner", parents=[common], help="Heegner points of discriminant d")
    s.add_argument("-d", type=int, required=True)
    s.add_argument("-q", type=int, required=True)
    s.add_argument("-p", type=int, required=True)
    s.set_defaults(func=cmd_heegner)

    s = sub.add_parser("equidist", parents=[common], help="quotient-class frequencies vs masses")
    s.add_argument("-q", type=int, required=True)
    s.add_argument("-p", type=int, required=True)
    s.add_argument("--dmin", type=int, default=None)
    s.add_argument("--dmax", type=int, default=-3,
                   help="most negative |d| if --dmin is absent")
    s.add_argument("--bucket", dest="buckets", action="append", default=[],
                   help="lo,hi range of |d|; repeatable")
    s.set_defaults(func=cmd_equidist)
    return ap


def config_from_args(args) -> RunConfig:
    fmt = args.format or ("dot" if getattr(args, "dot", False) else "json")
    tol = args.tolerance
    if tol is None:
        tol = 0.1 if args.command == "equidist" else 0.05
    return RunConfig(command=args.command, p=getattr(args, "p", None), precision=args.precision,
                     depth=getattr(args, "depth", 0), tolerance=tol, format=fmt,
                     seed=args.seed, jobs=args.jobs)


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.command == "equidist" and args.dmin is None:
        # --dmax alone names the far end of the range
        args.dmin, args.dmax = min(args.dmax, -3), -3
    try:
        cfg = config_from_args(args)
        cfg.validate()
        out = args.func(args, cfg)
    except ArborError as e:
        print(f"arborp: error: {e}", file=sys.stderr)
        return e.exit_code
    except (ValueError, ZeroDivisionError) as e:
        print(f"arborp: error: {e}", file=sys.stderr)
        return 2
    except (ArithmeticError, RecursionError) as e:
        print(f"arborp: error: {e}", file=sys.stderr)
        return 3
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
