"""Command line: limit sets, convergence reports, theorem tables, automata.

Exit codes: 0 ok, 2 bad input, 3 bad state, 4 failed hypothesis,
5 failed geometry.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import _parallel
from .automaton import (
    DEFAULT_TRUNCATION,
    automaton_from_dict,
    automaton_to_dict,
    build_pingpong_automaton,
    cap_from_json,
    default_caps,
    export_dot,
    refine_limit_set,
    verify_automaton,
)
from .cannon_thurston import DEFAULT_BUDGET, ct_composition_check, ct_map, ct_uniform_deviation, check_type_preserving
from .convergence import TruncationParams, convergence_report
from .errors import DocumentError, NotPingPong, NotTypePreserving, Rank1Error
from .families import builtin_family
from .fixtures import FIXTURES, fixture
from .groups import GroupSpec, PeripheralSpec, Representation
from .limit_set import hausdorff_distance, sample_limit_set
from .moebius import Moebius

REFINE_BUDGET = 64  # peripheral shells walked by automaton refinement

COMMANDS = ("limitset", "converge", "theorem1", "theorem2", "automaton")


# --------------------------------------------------------------------------
# documents


class Document:
    def __init__(self, rep=None, caps=None, family=None, raw=None):
        self.rep = rep
        self.caps = caps or {}
        self.family = family
        self.raw = raw or {}


def _complex(x) -> complex:
    if isinstance(x, (list, tuple)) and len(x) == 2:
        return complex(float(x[0]), float(x[1]))
    if isinstance(x, (int, float)):
        return complex(x)
    raise DocumentError(f"bad complex number {x!r}")


def _matrix(v) -> Moebius:
    try:
        if len(v) == 2 and all(len(row) == 2 for row in v) and not isinstance(v[0][0], (int, float)):
            entries = [v[0][0], v[0][1], v[1][0], v[1][1]]
        elif len(v) == 4:
            entries = list(v)
        else:
            raise DocumentError(f"bad matrix {v!r}")
        a, b, c, d = (_complex(e) for e in entries)
    except TypeError as exc:
        raise DocumentError(f"bad matrix {v!r}") from exc
    det = a * d - b * c
    if abs(det) < 1e-12:
        raise DocumentError("matrix is singular")
    m = Moebius(a, b, c, d)
    if abs(m.det - 1) > 1e-6:
        raise DocumentError("matrix does not normalize to determinant 1")
    return m


def complex_json(z: complex):
    return [z.real, z.imag]


def matrix_json(m: Moebius):
    return [[complex_json(m.a), complex_json(m.b)], [complex_json(m.c), complex_json(m.d)]]


def group_document(rep: Representation, caps: dict | None = None) -> dict:
    """JSON document for a representation and optional ping-pong caps."""
    g = rep.group
    d = {"generators": list(g.generator_names)}
    if g.relators:
        d["relators"] = [g.format(r) for r in g.relators]
    if g.peripherals:
        d["peripherals"] = [
            {"name": p.name, "generators": [g.format(w) for w in p.generators], "rank_hint": p.rank_hint}
            for p in g.peripherals
        ]
    d["images"] = {k: matrix_json(rep.images[k]) for k in g.generator_names}
    if caps:
        d["caps"] = {k: {"center": c.center.vector.tolist(), "radius": c.radius} for k, c in caps.items()}
    return d


def parse_document(d: dict) -> Document:
    if not isinstance(d, dict):
        raise DocumentError("document must be a JSON object")
    rep, caps = None, {}
    if "fixture" in d:
        name = d["fixture"]
        if name not in FIXTURES:
            raise DocumentError(f"unknown fixture {name!r}")
        rep, caps = fixture(name)
    elif "generators" in d:
        try:
            names = tuple(d["generators"])
            base = GroupSpec(names)
            relators = tuple(base.parse(r) for r in d.get("relators", []))
            pers = tuple(
                PeripheralSpec(p["name"], tuple(base.parse(g) for g in p["generators"]), int(p.get("rank_hint", 1)))
                for p in d.get("peripherals", [])
            )
            group = GroupSpec(names, relators, pers)
            images = {k: _matrix(v) for k, v in d["images"].items()}
        except (KeyError, TypeError, ValueError) as exc:
            raise DocumentError(f"malformed group document: {exc}") from exc
        rep = Representation(group, images).validate()
    if "caps" in d:
        caps = {k: cap_from_json(v) for k, v in d["caps"].items()}
    family = None
    if "family" in d:
        f = d["family"]
        if not isinstance(f, dict) or "name" not in f:
            raise DocumentError("family needs a name")
        family = builtin_family(f["name"], f.get("params"), f.get("indices"))
    return Document(rep, caps, family, d)


def load_document(path) -> Document:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise DocumentError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DocumentError(f"{path} is not valid JSON: {exc}") from exc
    return parse_document(raw)


def _need_rep(doc: Document) -> Representation:
    if doc.rep is None:
        raise DocumentError("document has no group or fixture")
    return doc.rep


def _need_family(doc: Document):
    if doc.family is None:
        raise DocumentError("document has no 'family' entry")
    return doc.family


# --------------------------------------------------------------------------
# emitters


def _g(x: float) -> str:
    return format(float(x), ".17g")


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.bool_):
        return bool(o)
    raise TypeError(f"cannot serialize {type(o).__name__}")


def _clean(o):
    """Non-finite floats become strings so the output stays strict JSON."""
    if isinstance(o, dict):
        return {str(k): _clean(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_clean(v) for v in o]
    if isinstance(o, (float, np.floating)):
        f = float(o)
        return f if math.isfinite(f) else str(f)
    return o


def write_json(path: Path, obj) -> None:
    text = json.dumps(_clean(obj), indent=2, sort_keys=True, default=_json_default)
    path.write_text(text + "\n")


def write_points_csv(path: Path, points, codes, group) -> None:
    lines = ["x,y,z,code"]
    for p, c in zip(points, codes):
        lines.append(f"{_g(p[0])},{_g(p[1])},{_g(p[2])},{group.format(c)}")
    path.write_text("\n".join(lines) + "\n")


def render_ppm(points: np.ndarray, width: int, height: int, projection: str = "stereographic", extent: float = 3.0) -> bytes:
    """P6 image: white background, one black pixel per point."""
    img = np.full((height, width, 3), 255, dtype=np.uint8)
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    if projection == "stereographic":
        with np.errstate(divide="ignore", invalid="ignore"):
            denom = 1.0 - pts[:, 2]
            u = pts[:, 0] / denom
            v = pts[:, 1] / denom
        half = extent
    elif projection == "orthographic":
        u, v = pts[:, 0], pts[:, 1]
        half = 1.0
    else:
        raise DocumentError(f"unknown projection {projection!r}")
    ok = np.isfinite(u) & np.isfinite(v) & (np.abs(u) <= half) & (np.abs(v) <= half)
    scale = min(width, height) / (2 * half)
    cols = np.floor(width / 2 + u[ok] * scale).astype(int)
    rows = np.floor(height / 2 - v[ok] * scale).astype(int)
    inside = (cols >= 0) & (cols < width) & (rows >= 0) & (rows < height)
    img[rows[inside], cols[inside]] = 0
    return f"P6\n{width} {height}\n255\n".encode("ascii") + img.tobytes()


# --------------------------------------------------------------------------
# commands


def _automaton_for(args, rep: Representation, doc: Document):
    if getattr(args, "automaton", None):
        try:
            with open(args.automaton) as fh:
                return automaton_from_dict(json.load(fh), rep.group)
        except OSError as exc:
            raise DocumentError(f"cannot read {args.automaton}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise DocumentError(f"{args.automaton} is not valid JSON") from exc
    caps = doc.caps or default_caps(rep)
    return build_pingpong_automaton(rep, caps, threads=args.threads)


def cmd_limitset(args, doc: Document, out: Path) -> None:
    rep = _need_rep(doc)
    if args.method == "oracle":
        sample = sample_limit_set(rep, args.depth)
    else:
        aut = _automaton_for(args, rep, doc)
        report = verify_automaton(rep, aut, args.truncation or DEFAULT_TRUNCATION, threads=args.threads)
        sample = refine_limit_set(rep, aut, args.depth, report=report, peripheral_budget=args.budget or REFINE_BUDGET)
    write_points_csv(out / "limitset.csv", sample.points, sample.codes, rep.group)
    (out / "limitset.ppm").write_bytes(render_ppm(sample.points, args.width, args.height, args.projection))


def _trunc(args) -> TruncationParams:
    base = TruncationParams()
    return TruncationParams(
        word_radius=args.truncation or base.word_radius,
        isom_compact_radius=args.compact_radius or base.isom_compact_radius,
        tolerance=args.tolerance or base.tolerance,
        peripheral_budget=args.budget or base.peripheral_budget,
    )


def cmd_converge(args, doc: Document, out: Path) -> None:
    fam = _need_family(doc)
    report = convergence_report(fam, _trunc(args), threads=args.threads)
    report["seed"] = args.seed
    write_json(out / "report.json", report)


def cmd_theorem1(args, doc: Document, out: Path) -> None:
    fam = _need_family(doc)
    lim = sample_limit_set(fam.limit, args.depth)
    rows = _parallel.ordered_map(
        lambda s: (s[0], hausdorff_distance(sample_limit_set(s[1], args.depth), lim)), fam.snapshots, args.threads
    )
    lines = ["n,hausdorff_to_limit"] + [f"{n},{_g(d)}" for n, d in rows]
    (out / "theorem1.csv").write_text("\n".join(lines) + "\n")


def cmd_theorem2(args, doc: Document, out: Path) -> None:
    fam = _need_family(doc)
    tp = check_type_preserving(fam)
    if not tp.weakly_type_preserving:
        raise NotTypePreserving(f"not weakly type-preserving: {json.dumps(tp.witness, sort_keys=True)}", tp.witness)
    budget = args.budget or DEFAULT_BUDGET
    dev = ct_uniform_deviation(fam, budget)
    lines = ["n,sup_deviation"] + [f"{n},{_g(d)}" for n, d in dev]
    (out / "theorem2.csv").write_text("\n".join(lines) + "\n")
    if args.composition:
        comp = [(n, ct_composition_check(fam, n, budget)) for n in fam.indices]
        lines = ["n,composition_error"] + [f"{n},{_g(d)}" for n, d in comp]
        (out / "composition.csv").write_text("\n".join(lines) + "\n")
    if args.pairs:
        for n in fam.indices:
            s = ct_map(fam, n, budget)
            rows = ["sx,sy,sz,tx,ty,tz,code"]
            for src, dst, code in s.pairs:
                rows.append(",".join([*map(_g, src), *map(_g, dst), fam.group.format(code)]))
            (out / f"pairs_{n}.csv").write_text("\n".join(rows) + "\n")


def cmd_automaton(args, doc: Document, out: Path) -> None:
    rep = _need_rep(doc)
    aut = _automaton_for(args, rep, doc)
    if args.action == "build":
        write_json(out / "automaton.json", automaton_to_dict(aut, rep.group))
    elif args.action == "verify":
        report = verify_automaton(rep, aut, args.truncation or DEFAULT_TRUNCATION, threads=args.threads)
        write_json(out / "verification.json", report.to_dict())
    else:
        (out / "automaton.dot").write_text(export_dot(aut))


HANDLERS = {
    "limitset": cmd_limitset,
    "converge": cmd_converge,
    "theorem1": cmd_theorem1,
    "theorem2": cmd_theorem2,
    "automaton": cmd_automaton,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", required=True, help="group or family document (JSON)")
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--depth", type=int, default=8)
    common.add_argument("--budget", type=int, default=None)
    common.add_argument("--truncation", type=int, default=None)
    common.add_argument("--tolerance", type=float, default=None)
    common.add_argument("--compact-radius", type=float, default=None)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=None)

    parser = argparse.ArgumentParser(prog="rank1-limits", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("limitset", parents=[common], help="sample a limit set")
    p.add_argument("--method", choices=("oracle", "automaton"), default="oracle")
    p.add_argument("--automaton", default=None, help="automaton JSON (default: build from caps)")
    p.add_argument("--width", type=int, default=512)
    p.add_argument("--height", type=int, default=512)
    p.add_argument("--projection", choices=("stereographic", "orthographic"), default="stereographic")

    sub.add_parser("converge", parents=[common], help="convergence report for a family")
    sub.add_parser("theorem1", parents=[common], help="Hausdorff distance of limit sets to the limit")

    p = sub.add_parser("theorem2", parents=[common], help="Cannon-Thurston deviation table")
    p.add_argument("--pairs", action="store_true", help="also write the sampled pairs per snapshot")
    p.add_argument("--composition", action="store_true", help="also write composition errors")

    p = sub.add_parser("automaton", parents=[common], help="build, verify or export an automaton")
    p.add_argument("action", choices=("build", "verify", "dot"))
    p.add_argument("--automaton", default=None)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    for name in ("depth", "budget", "truncation", "width", "height", "threads"):
        v = getattr(args, name, None)
        if v is not None and v <= 0:
            print(f"error: --{name} must be positive", file=sys.stderr)
            return 2
    args.threads = _parallel.resolve_threads(args.threads)
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        doc = load_document(args.input)
        HANDLERS[args.command](args, doc, out)
    except Rank1Error as exc:
        msg = f"error: {type(exc).__name__}: {exc}"
        if isinstance(exc, NotPingPong) and exc.point is not None:
            msg += f" (point {exc.point.vector.tolist()})"
        print(msg, file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
