"""Relative automata for ping-pong groups.

An automaton is a finite directed graph whose vertices carry a limit
point, a witness cap and a set of labels.  Reading labels along a
directed path and applying them to the witness of the final vertex
gives a nested family of caps shrinking onto the limit set.

Infinite label sets (cosets of a peripheral subgroup) are checked on a
finite range of peripheral elements plus a monotone shrinkage test on
the tail.  That is a finite-truncation verification, not a proof.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field, replace

import numpy as np

from ._parallel import ordered_map
from .errors import (
    CapTooLarge,
    DegenerateCircle,
    DocumentError,
    InvalidAutomaton,
    NotPingPong,
    RelativeLengthBudget,
    UnverifiedAutomaton,
)
from .groups import (
    IDENTITY_WORD,
    GroupSpec,
    Representation,
    Word,
    enumerate_ball,
    peripheral_elements,
    relative_length,
)
from .limit_set import LimitSetSample, make_sample
from .moebius import (
    BoundaryPoint,
    IsometryType,
    Moebius,
    SphericalCap,
    apply,
    boundary_distance,
    cap_contains,
    cap_from_disk,
    cap_image,
    cap_inflate,
    caps_disjoint_closures,
    classify,
    compose,
    farthest_point,
    limit_datum,
)

EPS_MAX = math.pi / 4
BISECTION_STEPS = 20
BUILD_TRUNCATION = 8
DEFAULT_TRUNCATION = 6
TRUNCATION_NOTE = "coset labels checked on a finite range plus a tail shrinkage test; not a proof"


@dataclass(frozen=True)
class Explicit:
    words: tuple[Word, ...]


@dataclass(frozen=True)
class CosetMinusFinite:
    coset: Word
    peripheral: str
    excluded: tuple[Word, ...] = (IDENTITY_WORD,)


@dataclass(frozen=True)
class AutomatonVertex:
    point: BoundaryPoint
    witness: SphericalCap
    labels: Explicit | CosetMinusFinite
    kind: str  # "conical" or "parabolic"
    peripheral: str | None = None
    coset: Word = IDENTITY_WORD
    name: str = ""


@dataclass(frozen=True)
class RelativeAutomaton:
    vertices: tuple[AutomatonVertex, ...]
    edges: tuple[tuple[int, int], ...]
    epsilon: float
    R: int
    Pi: tuple[tuple[str, BoundaryPoint], ...] = ()

    def out_edges(self, z: int) -> list[int]:
        return [y for (x, y) in self.edges if x == z]

    def invariant_problems(self) -> list[str]:
        out = []
        n = len(self.vertices)
        for x, y in self.edges:
            if not (0 <= x < n and 0 <= y < n):
                out.append(f"edge ({x}, {y}) out of range")
        for z in range(n):
            if not self.out_edges(z):
                out.append(f"vertex {z} has no outgoing edge")
        if not self.epsilon > 0:
            out.append("epsilon must be positive")
        if self.R < 0:
            out.append("R must be nonnegative")
        for v in self.vertices:
            if isinstance(v.labels, Explicit) and not v.labels.words:
                out.append(f"vertex {v.name!r} has an empty label set")
        return out


@dataclass
class VerificationReport:
    A1: bool
    A2: bool
    A3: bool
    A4: bool
    A5: bool
    A6: bool
    structural: bool
    truncation: int
    epsilon: float
    findings: list[str] = field(default_factory=list)
    tail_certificate: bool = True
    a6_max_residual: int = 0
    note: str = TRUNCATION_NOTE

    @property
    def properties(self) -> dict:
        return {k: getattr(self, k) for k in ("A1", "A2", "A3", "A4", "A5", "A6")}

    @property
    def all_pass(self) -> bool:
        return self.structural and all(self.properties.values())

    def failed(self) -> list[str]:
        out = [k for k, v in self.properties.items() if not v]
        if not self.structural:
            out.append("structural")
        return out

    def to_dict(self) -> dict:
        return {
            **self.properties,
            "structural": self.structural,
            "all_pass": self.all_pass,
            "truncation": self.truncation,
            "epsilon": self.epsilon,
            "tail_certificate": self.tail_certificate,
            "a6_max_residual": self.a6_max_residual,
            "findings": list(self.findings),
            "note": self.note,
        }


# --------------------------------------------------------------------------
# label enumeration


def label_words(group: GroupSpec, v: AutomatonVertex, budget: int):
    """Labels of ``v`` with their peripheral shell index (0 for explicit labels)."""
    if isinstance(v.labels, Explicit):
        return [(w, 0) for w in v.labels.words]
    per = group.peripheral(v.labels.peripheral)
    exps, words = peripheral_elements(group, per, budget)
    excluded = set(v.labels.excluded)
    out = []
    for e, h in zip(exps, words):
        w = v.labels.coset * h
        if w not in excluded:
            out.append((w, sum(abs(k) for k in e)))
    return out


def _a2_holds(m: Moebius, outer: SphericalCap, inner: SphericalCap, eps: float) -> bool:
    try:
        return cap_contains(outer, cap_image(m, cap_inflate(inner, eps)))
    except (CapTooLarge, DegenerateCircle):
        return False


def _a2_jobs(rep, aut, budget):
    """(edge, label, matrix) triples in canonical order."""
    jobs = []
    for z, v in enumerate(aut.vertices):
        labels = label_words(rep.group, v, budget)
        for y in aut.out_edges(z):
            for w, _ in labels:
                jobs.append((z, y, w))
    cache = {}
    out = []
    for z, y, w in jobs:
        if w not in cache:
            cache[w] = rep.evaluate(w)
        out.append((z, y, w, cache[w]))
    return out


def _all_a2(rep, aut, jobs, eps, threads=None) -> list[bool]:
    V = aut.vertices
    return ordered_map(
        lambda j: _a2_holds(j[3], V[j[0]].witness, V[j[1]].witness, eps), jobs, threads
    )


def _max_epsilon(check, hi: float = EPS_MAX, steps: int = BISECTION_STEPS) -> float:
    """Largest eps in (0, hi] with check(eps) true, by bisection; 0 if none found."""
    if check(hi):
        return hi
    lo = 0.0
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        if check(mid):
            lo = mid
        else:
            hi = mid
    return lo


# --------------------------------------------------------------------------
# construction


def _conical_letters(group: GroupSpec, caps: dict):
    out = []
    for i, name in enumerate(group.generator_names):
        if name in caps or name + "'" in caps:
            if name not in caps or name + "'" not in caps:
                raise DocumentError(f"generator {name!r} needs caps for both itself and its inverse")
            out.append((name, i + 1))
    return out


def _check_pingpong(rep: Representation, caps: dict, conical, truncation: int) -> None:
    group = rep.group
    keys = [k for k in caps]
    for i in range(len(keys)):
        for j in range(i + 1, len(keys)):
            if not caps_disjoint_closures(caps[keys[i]], caps[keys[j]]):
                raise NotPingPong(f"caps {keys[i]!r} and {keys[j]!r} overlap", keys[i], None)
    for name, idx in conical:
        for s, x, inv in ((name, idx, name + "'"), (name + "'", -idx, name)):
            m = rep.letter(x)
            body = caps[inv].complement()
            try:
                img = cap_image(m, body)
                ok = cap_contains(caps[s], img)
            except DegenerateCircle:
                img, ok = None, False
            if not ok:
                point = None
                if img is not None:
                    point = apply(m.inverse(), farthest_point(img, caps[s].center))
                raise NotPingPong(
                    f"generator {s!r} does not map the complement of cap {inv!r} into cap {s!r}",
                    s,
                    point,
                )
    for per in group.peripherals:
        if per.name not in caps:
            continue
        p = _peripheral_point(rep, per.name)
        if not caps[per.name].contains(p):
            raise NotPingPong(f"fixed point of {per.name!r} is not inside its cap", per.name, p)
        others = [caps[k] for k in keys if k != per.name]
        _, words = peripheral_elements(group, per, truncation)
        for h in words:
            m = rep.evaluate(h)
            for c in others:
                if not _a2_holds(m, caps[per.name], c, 0.0):
                    img = cap_image(m, c)
                    point = apply(m.inverse(), farthest_point(img, caps[per.name].center))
                    raise NotPingPong(
                        f"peripheral element {group.format(h)!r} moves a cap outside {per.name!r}",
                        group.format(h),
                        point,
                    )
    covered = {i for _, i in conical}
    for per in group.peripherals:
        if per.name in caps:
            for g in per.generators:
                covered.update(abs(x) for x in g.letters)
    missing = [group.generator_names[i - 1] for i in range(1, group.rank + 1) if i not in covered]
    if missing:
        raise NotPingPong(f"no cap covers generator {missing[0]!r}", missing[0], None)


def _peripheral_point(rep: Representation, name: str) -> BoundaryPoint:
    per = rep.group.peripheral(name)
    m = rep.evaluate(per.generators[0])
    kind, fps = classify(m)
    if kind is not IsometryType.PARABOLIC:
        raise NotPingPong(f"peripheral {name!r} is not parabolic", name, None)
    return fps[0].point


def default_caps(rep: Representation, margin: float = 0.05) -> dict:
    """Caps from fixed-point geometry.

    Non-peripheral generators get their inflated isometric disks; each
    peripheral gets a cap about its parabolic point reaching to within
    ``margin`` of the other caps.
    """
    group = rep.group
    per_letters = {abs(x) for p in group.peripherals for g in p.generators for x in g.letters}
    caps = {}
    for i, name in enumerate(group.generator_names):
        if i + 1 in per_letters:
            continue
        m = rep.images[name]
        if abs(m.c) < 1e-12:
            raise NotPingPong(f"generator {name!r} fixes infinity; no isometric disks", name, None)
        r = 1 / abs(m.c)
        try:
            caps[name] = cap_inflate(cap_from_disk(m.a / m.c, r), margin)
            caps[name + "'"] = cap_inflate(cap_from_disk(-m.d / m.c, r), margin)
        except (CapTooLarge, DegenerateCircle) as exc:
            raise NotPingPong(f"isometric disks of {name!r} are too large", name, None) from exc
    for per in group.peripherals:
        p = _peripheral_point(rep, per.name)
        room = min((boundary_distance(p, c.center) - c.radius for c in caps.values()), default=math.pi / 2)
        radius = min(room - margin, math.pi / 2)
        if radius <= 0:
            raise NotPingPong(f"no room for a cap about the fixed point of {per.name!r}", per.name, p)
        caps[per.name] = SphericalCap(p, radius)
    return caps


def build_pingpong_automaton(rep: Representation, caps: dict, truncation: int = BUILD_TRUNCATION, threads=None) -> RelativeAutomaton:
    """One vertex per cap; edges follow the free-product normal form.

    ``caps`` maps generator letters (``"a"``, ``"a'"``) and peripheral
    names to :class:`SphericalCap`.  Raises :class:`NotPingPong` when the
    classical ping-pong condition fails.
    """
    group = rep.group
    conical = _conical_letters(group, caps)
    _check_pingpong(rep, caps, conical, truncation)

    vertices = []
    inverse_of = {}
    for name, idx in conical:
        for s, x in ((name, idx), (name + "'", -idx)):
            m = rep.letter(x)
            fp = limit_datum(m)
            if fp is None or classify(m)[0] is not IsometryType.LOXODROMIC:
                raise NotPingPong(f"generator {s!r} is not loxodromic", s, None)
            vertices.append(
                AutomatonVertex(fp, caps[s], Explicit((Word((x,)),)), "conical", name=s)
            )
        inverse_of[len(vertices) - 2] = len(vertices) - 1
        inverse_of[len(vertices) - 1] = len(vertices) - 2
    Pi = []
    for per in group.peripherals:
        if per.name not in caps:
            continue
        p = _peripheral_point(rep, per.name)
        Pi.append((per.name, p))
        vertices.append(
            AutomatonVertex(
                p,
                caps[per.name],
                CosetMinusFinite(IDENTITY_WORD, per.name, (IDENTITY_WORD,)),
                "parabolic",
                peripheral=per.name,
                name=per.name,
            )
        )

    edges = []
    for z, v in enumerate(vertices):
        for y in range(len(vertices)):
            if inverse_of.get(z) == y:
                continue
            if v.kind == "parabolic" and y == z:
                continue
            edges.append((z, y))
    aut = RelativeAutomaton(tuple(vertices), tuple(edges), EPS_MAX, 0, tuple(Pi))

    # drop coset labels that fail the inclusion even without a margin
    jobs = _a2_jobs(rep, aut, truncation)
    base = _all_a2(rep, aut, jobs, 0.0, threads)
    bad = {}
    for (z, _, w, _m), ok in zip(jobs, base):
        if not ok and isinstance(vertices[z].labels, CosetMinusFinite):
            bad.setdefault(z, set()).add(w)
    for z, ws in bad.items():
        lab = vertices[z].labels
        excl = tuple(sorted(set(lab.excluded) | ws))
        vertices[z] = replace(vertices[z], labels=replace(lab, excluded=excl))
    aut = replace(aut, vertices=tuple(vertices))
    jobs = _a2_jobs(rep, aut, truncation)

    eps = _max_epsilon(lambda e: all(_all_a2(rep, aut, jobs, e, threads)))
    if eps <= 0:
        raise NotPingPong("no positive margin satisfies the nesting condition")
    R = max([len(v.coset) for v in vertices if v.kind == "parabolic"], default=0)
    return replace(aut, epsilon=eps, R=R)


# --------------------------------------------------------------------------
# verification


def _tail_shrinks(rep, aut, z, y, budget) -> bool:
    """Image caps of the coset tail shrink toward the parabolic point."""
    v = aut.vertices[z]
    W = aut.vertices[y].witness
    shells: dict[int, float] = {}
    for w, n in label_words(rep.group, v, budget):
        try:
            c = cap_image(rep.evaluate(w), W)
        except DegenerateCircle:
            return False
        reach = boundary_distance(c.center, v.point) + c.radius
        shells[n] = max(shells.get(n, 0.0), reach)
    keys = sorted(shells)
    upper = keys[len(keys) // 2:]
    vals = [shells[k] for k in upper]
    return all(b < a for a, b in zip(vals, vals[1:]))


def _readable(group: GroupSpec, aut: RelativeAutomaton, letters: tuple, budget: int):
    """Largest prefix length readable along a directed path."""
    n = len(letters)
    if n == 0:
        return 0
    V = aut.vertices
    adj = [aut.out_edges(z) for z in range(len(V))]

    def steps(z, i):
        v = V[z]
        out = []
        if isinstance(v.labels, Explicit):
            for w in v.labels.words:
                k = len(w)
                if k and tuple(letters[i:i + k]) == w.letters:
                    out.append(i + k)
        else:
            lab = v.labels
            g = lab.coset.letters
            if tuple(letters[i:i + len(g)]) != g:
                return out
            start = i + len(g)
            graph = group._graph(lab.peripheral)
            excluded = set(lab.excluded)
            cands = graph.returns(letters, start)
            if IDENTITY_WORD not in excluded and len(g):
                cands = [start, *cands]
            for j in cands:
                if Word(tuple(letters[i:j])) not in excluded:
                    out.append(j)
        return out

    best = 0
    seen = set()
    queue = deque((z, 0) for z in range(len(V)))
    seen.update(queue)
    while queue:
        z, i = queue.popleft()
        for j in steps(z, i):
            best = max(best, j)
            if j == n:
                return n
            for y in adj[z]:
                if (y, j) not in seen:
                    seen.add((y, j))
                    queue.append((y, j))
    return best


def verify_automaton(
    rep: Representation,
    aut: RelativeAutomaton,
    truncation: int = DEFAULT_TRUNCATION,
    epsilon: float | None = None,
    threads=None,
) -> VerificationReport:
    """Check properties A1-A6 to the given truncation.

    Failures are report entries, never exceptions.
    """
    if truncation < 1:
        raise ValueError("truncation must be at least 1")
    group = rep.group
    eps = aut.epsilon if epsilon is None else epsilon
    findings = []
    problems = aut.invariant_problems()
    structural = not problems
    findings.extend(f"structural: {p}" for p in problems)

    V = aut.vertices
    a1 = True
    for v in V:
        if not (0 < v.witness.radius < math.pi):
            a1 = False
            findings.append(f"A1: witness of {v.name!r} is not a proper cap")

    a3, a4, a5 = True, True, True
    for z, v in enumerate(V):
        if v.kind == "conical":
            if not (isinstance(v.labels, Explicit) and len(v.labels.words) == 1):
                a4 = False
                findings.append(f"A4: conical vertex {v.name!r} does not have a single label")
            continue
        if isinstance(v.labels, CosetMinusFinite):
            if v.labels.peripheral != v.peripheral or v.labels.coset != v.coset:
                a3 = False
                findings.append(f"A3: labels of {v.name!r} name the wrong coset")
        else:
            for w in v.labels.words:
                h = v.coset.inverse() * w
                if group.is_peripheral(h, v.peripheral) is None:
                    a3 = False
                    findings.append(f"A3: label {group.format(w)!r} of {v.name!r} is outside its coset")
        if not v.witness.contains(v.point):
            a5 = False
            findings.append(f"A5: parabolic point of {v.name!r} is outside its witness")
        for y in aut.out_edges(z):
            if V[y].witness.closure_contains(v.point):
                a5 = False
                findings.append(f"A5: witness of {V[y].name!r} touches the parabolic point of {v.name!r}")

    a2 = True
    jobs = _a2_jobs(rep, aut, truncation)
    if eps > 0:
        results = _all_a2(rep, aut, jobs, eps, threads)
    else:
        results = [False] * len(jobs)
    for (z, y, w, _m), ok in zip(jobs, results):
        if not ok:
            a2 = False
            findings.append(f"A2: edge {V[z].name}->{V[y].name} fails for label {group.format(w)!r}")
    tail_ok = True
    for z, v in enumerate(V):
        if isinstance(v.labels, CosetMinusFinite):
            for y in aut.out_edges(z):
                if not _tail_shrinks(rep, aut, z, y, truncation):
                    tail_ok = False
                    findings.append(f"A2: coset tail of {v.name}->{V[y].name} is not shrinking")
    a2 = a2 and tail_ok

    a6 = True
    worst = 0
    for w in enumerate_ball(group, truncation):
        k = _readable(group, aut, w.letters, truncation)
        if k == len(w):
            continue
        try:
            res = relative_length(group, Word(w.letters[k:]))
        except RelativeLengthBudget:
            res = len(w) - k
        worst = max(worst, res)
        if res > aut.R:
            if a6:
                findings.append(f"A6: word {group.format(w)!r} is {res} away from any path")
            a6 = False

    return VerificationReport(
        A1=a1, A2=a2, A3=a3, A4=a4, A5=a5, A6=a6,
        structural=structural,
        truncation=truncation,
        epsilon=eps,
        findings=findings,
        tail_certificate=tail_ok,
        a6_max_residual=worst,
    )


def reverify_under_deformation(rep2: Representation, aut: RelativeAutomaton, truncation: int = DEFAULT_TRUNCATION, threads=None):
    """Largest margin in (0, eps] keeping every checked inclusion under ``rep2``.

    Returns ``(report, eps_prime)``; ``eps_prime == 0`` means failure.
    """
    jobs = _a2_jobs(rep2, aut, truncation)
    eps_p = _max_epsilon(lambda e: all(_all_a2(rep2, aut, jobs, e, threads)), hi=aut.epsilon)
    return verify_automaton(rep2, aut, truncation, epsilon=eps_p, threads=threads), eps_p


# --------------------------------------------------------------------------
# refinement


def _label_budget(group: GroupSpec, v: AutomatonVertex, budget: int) -> int:
    """Shell count for ``v``; rank-2 shells are sized so labels stay O(budget)."""
    if isinstance(v.labels, Explicit) or len(group.peripheral(v.labels.peripheral).generators) == 1:
        return budget
    return max(1, math.isqrt(budget))


def refine_limit_set(
    rep: Representation,
    aut: RelativeAutomaton,
    path_depth: int,
    report: VerificationReport | None = None,
    min_radius: float = 1e-5,
    peripheral_budget: int = 64,
    truncation: int = DEFAULT_TRUNCATION,
) -> LimitSetSample:
    """Limit points read off directed paths.

    Every path z_1 -> ... -> z_m with labels a_1, ..., a_{m-1} gives the
    point rho(a_1 ... a_{m-1}) z_m inside the nested cap
    rho(a_1 ... a_{m-1}) W(z_m).  A branch stops at ``path_depth`` vertices
    or once its cap is smaller than ``min_radius``.  The resolution is a
    covering bound from the leaf caps and the unexplored coset tails.
    """
    if path_depth < 1:
        raise ValueError("path_depth must be at least 1")
    if report is None:
        report = verify_automaton(rep, aut, truncation)
    if not report.all_pass:
        raise UnverifiedAutomaton(f"automaton fails {', '.join(report.failed())}")
    group = rep.group
    V = aut.vertices
    labels = []
    for v in V:
        ls = label_words(group, v, _label_budget(group, v, peripheral_budget))
        labels.append([(w, rep.evaluate(w), n) for w, n in ls])
    adj = [aut.out_edges(z) for z in range(len(V))]
    top_shell = [max((n for _, _, n in ls), default=0) for ls in labels]

    # cap about each parabolic vertex point holding the unexplored tail
    tail = {}
    for z, v in enumerate(V):
        if isinstance(v.labels, CosetMinusFinite):
            reach = 0.0
            for y in adj[z]:
                for _w, m, n in labels[z]:
                    if n == top_shell[z]:
                        c = cap_image(m, V[y].witness)
                        reach = max(reach, boundary_distance(c.center, v.point) + c.radius)
            tail[z] = reach

    points, codes = [], []
    leaf_r, tail_r = 0.0, 0.0
    ident = Moebius.identity()
    stack = [(z, ident, IDENTITY_WORD, 1) for z in reversed(range(len(V)))]
    while stack:
        z, m, word, depth = stack.pop()
        cap = V[z].witness if depth == 1 else cap_image(m, V[z].witness)
        pt = V[z].point if depth == 1 else apply(m, V[z].point)
        points.append(pt.vector)
        codes.append(word)
        if depth >= path_depth or cap.radius < min_radius:
            leaf_r = max(leaf_r, cap.radius)
            continue
        if z in tail:
            tr = tail[z]
            if depth > 1:
                tr = cap_image(m, SphericalCap(V[z].point, min(tr, math.pi - 1e-12))).radius * 2
            tail_r = max(tail_r, tr)
        children = []
        for w, g, _n in labels[z]:
            mg = compose(m, g)
            for y in adj[z]:
                children.append((y, mg, word * w, depth + 1))
        stack.extend(reversed(children))
    pts = np.array(points)
    resolution = max(2 * leaf_r, tail_r)
    return make_sample(pts, path_depth, codes, resolution=resolution)


# --------------------------------------------------------------------------
# export and serialization


def _fmt(x: float) -> str:
    return format(x, ".17g")


def export_dot(aut: RelativeAutomaton) -> str:
    problems = aut.invariant_problems()
    if problems:
        raise InvalidAutomaton("; ".join(problems))
    lines = ["digraph automaton {"]
    for z, v in enumerate(aut.vertices):
        kind = v.kind if v.kind == "conical" else f"parabolic {v.peripheral}"
        lines.append(f'  v{z} [label="{v.name}\\n{kind}\\nr={_fmt(v.witness.radius)}"];')
    for x, y in aut.edges:
        lines.append(f"  v{x} -> v{y};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _point_json(p: BoundaryPoint):
    return [p.x, p.y, p.z]


def _cap_json(c: SphericalCap):
    return {"center": _point_json(c.center), "radius": c.radius}


def cap_from_json(d) -> SphericalCap:
    try:
        return SphericalCap(BoundaryPoint.from_vector(d["center"]), float(d["radius"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise DocumentError(f"bad cap {d!r}") from exc


def automaton_to_dict(aut: RelativeAutomaton, group: GroupSpec) -> dict:
    verts = []
    for v in aut.vertices:
        if isinstance(v.labels, Explicit):
            lab = {"explicit": [group.format(w) for w in v.labels.words]}
        else:
            lab = {
                "coset": group.format(v.labels.coset),
                "peripheral": v.labels.peripheral,
                "excluded": [group.format(w) for w in v.labels.excluded],
            }
        verts.append({
            "name": v.name,
            "kind": v.kind,
            "peripheral": v.peripheral,
            "coset": group.format(v.coset),
            "point": _point_json(v.point),
            "witness": _cap_json(v.witness),
            "labels": lab,
        })
    return {
        "vertices": verts,
        "edges": [list(e) for e in aut.edges],
        "epsilon": aut.epsilon,
        "R": aut.R,
        "Pi": [[n, _point_json(p)] for n, p in aut.Pi],
    }


def automaton_from_dict(d: dict, group: GroupSpec) -> RelativeAutomaton:
    try:
        verts = []
        for v in d["vertices"]:
            lab = v["labels"]
            if "explicit" in lab:
                labels = Explicit(tuple(group.parse(s) for s in lab["explicit"]))
            else:
                group.peripheral(lab["peripheral"])
                labels = CosetMinusFinite(
                    group.parse(lab["coset"]),
                    lab["peripheral"],
                    tuple(group.parse(s) for s in lab.get("excluded", [""])),
                )
            kind = v["kind"]
            if kind not in ("conical", "parabolic"):
                raise DocumentError(f"unknown vertex kind {kind!r}")
            verts.append(AutomatonVertex(
                BoundaryPoint.from_vector(v["point"]),
                cap_from_json(v["witness"]),
                labels,
                kind,
                peripheral=v.get("peripheral"),
                coset=group.parse(v.get("coset", "")),
                name=v.get("name", ""),
            ))
        edges = tuple((int(x), int(y)) for x, y in d["edges"])
        Pi = tuple((n, BoundaryPoint.from_vector(p)) for n, p in d.get("Pi", []))
        return RelativeAutomaton(tuple(verts), edges, float(d["epsilon"]), int(d["R"]), Pi)
    except (KeyError, TypeError, ValueError) as exc:
        raise DocumentError(f"malformed automaton document: {exc}") from exc
