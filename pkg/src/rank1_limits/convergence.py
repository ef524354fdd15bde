"""Finite-truncation checks for algebraic, Chabauty and relative convergence.

Compact subsets of the isometry group are balls about the identity for
the sign-aware Frobenius distance.  Everything here is evidence at a
fixed truncation, never a proof; reports echo the truncation used.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.spatial import cKDTree

from ._parallel import ordered_map
from .errors import BadStabilityInstance
from .families import DEFAULT_INDICES, RepFamily, builtin_family  # noqa: F401
from .groups import PeripheralSpec, Representation, Word, peripheral_elements, word_levels
from .moebius import (
    TYPE_CODES,
    BoundaryPoint,
    IsometryType,
    SphericalCap,
    batch_apply,
    batch_classify,
    batch_distance,
    batch_identity_distance,
    batch_normalize,
    classify,
    matrix_distance,
)

C1_SLACK = 2
RANK2_SHELL_CAP = 64


@dataclass(frozen=True)
class TruncationParams:
    word_radius: int = 8
    isom_compact_radius: float = 50.0
    tolerance: float = 1e-4
    peripheral_budget: int = 4096

    def __post_init__(self):
        if not (self.word_radius > 0 and self.isom_compact_radius > 0 and self.tolerance > 0 and self.peripheral_budget > 0):
            raise ValueError("truncation parameters must be positive")

    def to_dict(self) -> dict:
        return asdict(self)


# --------------------------------------------------------------------------
# element pools


class _Pool:
    """Matrices of a representation with a way back to their words."""

    def __init__(self, mats, namer):
        self.mats = mats
        self._namer = namer

    def __len__(self):
        return len(self.mats)

    def name(self, i: int) -> str:
        return self._namer(int(i))


def _word_pool(rep: Representation, radius: int) -> _Pool:
    levels = list(word_levels(rep, radius))
    mats = np.concatenate([lv.mats for lv in levels])
    offsets = np.cumsum([0] + [len(lv) for lv in levels])

    def namer(i):
        k = int(np.searchsorted(offsets, i, side="right")) - 1
        return rep.group.format(levels[k].word(i - offsets[k]))

    return _Pool(mats, namer)


def _projective_normalize(m: np.ndarray) -> np.ndarray:
    m = batch_normalize(m)
    # far outside any compact set only the projective class matters
    scale = np.abs(m.reshape(-1, 4)).max(axis=1)
    big = scale > 1e100
    m[big] /= scale[big, None, None]
    return m


def _powers(m: np.ndarray, n: int) -> np.ndarray:
    """m^1 .. m^n, built by doubling."""
    out = np.asarray(m, dtype=complex)[None]
    while len(out) < n:
        k = len(out)
        out = np.concatenate([out, _projective_normalize(out[-1][None] @ out[: n - k])])
    return out[:n]


def _with_identity(pool: _Pool) -> _Pool:
    mats = np.concatenate([np.eye(2, dtype=complex)[None], pool.mats])
    return _Pool(mats, lambda i: "" if i == 0 else pool.name(i - 1))


def _peripheral_pool(rep: Representation, per: PeripheralSpec, budget: int) -> _Pool:
    group = rep.group
    gens = [rep.evaluate(g).to_array() for g in per.generators]
    if per.rank_hint == 1 or len(gens) == 1:
        pos = _powers(gens[0], budget)
        neg = _powers(np.linalg.inv(gens[0]), budget)
        mats = np.empty((2 * budget, 2, 2), dtype=complex)
        mats[0::2] = pos
        mats[1::2] = neg
        exps = [(k,) for j in range(1, budget + 1) for k in (j, -j)]
    else:
        shells = min(budget, RANK2_SHELL_CAP)
        exps, _ = peripheral_elements(group, per, shells)

        def table(g):
            t = {0: np.eye(2, dtype=complex)}
            for k, m in enumerate(_powers(g, shells), 1):
                t[k] = m
            for k, m in enumerate(_powers(np.linalg.inv(g), shells), 1):
                t[-k] = m
            return t

        t1, t2 = table(gens[0]), table(gens[1])
        mats = _projective_normalize(np.array([t1[i] @ t2[j] for i, j in exps]))

    def namer(i):
        e = exps[i]
        parts = [f"{group.format(g)}^{k}" if len(g) == 1 else f"({group.format(g)})^{k}"
                 for g, k in zip(per.generators, e) if k]
        return " ".join(parts)

    return _Pool(mats, namer)


def _combined_pool(rep, radius, budget, peripherals) -> _Pool:
    pools = [_word_pool(rep, radius)] + [_peripheral_pool(rep, p, budget) for p in peripherals]
    return _merge(pools)


def _merge(pools) -> _Pool:
    if len(pools) == 1:
        return pools[0]
    mats = np.concatenate([p.mats for p in pools])
    offsets = np.cumsum([0] + [len(p) for p in pools])

    def namer(i):
        k = int(np.searchsorted(offsets, i, side="right")) - 1
        return pools[k].name(i - offsets[k])

    return _Pool(mats, namer)


def _embed(mats: np.ndarray) -> np.ndarray:
    flat = mats.reshape(-1, 4)
    return np.concatenate([flat.real, flat.imag], axis=1)


class _Matcher:
    """Nearest-element queries up to sign."""

    def __init__(self, mats: np.ndarray):
        e = _embed(mats)
        self.tree = cKDTree(np.concatenate([e, -e]))

    def nearest(self, mats: np.ndarray) -> np.ndarray:
        if len(mats) == 0:
            return np.zeros(0)
        d, _ = self.tree.query(_embed(mats), k=1)
        return d


def _compact(pool: _Pool, radius: float) -> np.ndarray:
    return np.nonzero(batch_identity_distance(pool.mats) <= radius)[0]


# --------------------------------------------------------------------------
# algebraic convergence


def check_algebraic(fam: RepFamily, trunc: TruncationParams | None = None) -> dict:
    trunc = trunc or TruncationParams()
    if not fam.snapshots:
        raise ValueError("family has no snapshots")
    tol = trunc.tolerance
    ok = True
    witness = None
    margins = {}
    for name in fam.group.generator_names:
        target = fam.limit.images[name]
        ds = [matrix_distance(rep.images[name], target) for _, rep in fam.snapshots]
        margins[name] = ds
        for (n, _), a, b in zip(fam.snapshots[1:], ds, ds[1:]):
            if b > a + tol and ok:
                ok = False
                witness = {"word": name, "index": n, "distance": b, "reason": "distance increased"}
        if ds[-1] > tol and ok:
            ok = False
            witness = {"word": name, "index": fam.snapshots[-1][0], "distance": ds[-1], "reason": "final distance above tolerance"}
    final = max(m[-1] for m in margins.values()) if margins else 0.0
    return {"pass": ok, "final": final, "margins": margins, "witness": witness}


# --------------------------------------------------------------------------
# Chabauty criteria


def _chabauty(fam: RepFamily, trunc: TruncationParams, pool_fn, threads=None) -> dict:
    tol = trunc.tolerance
    R = trunc.isom_compact_radius
    tail = fam.tail()
    tail_pools = ordered_map(lambda s: pool_fn(s[1], trunc.word_radius), tail, threads)
    matchers = [_Matcher(p.mats) for p in tail_pools]

    # C2: limit elements in the compact set are approximated along the tail
    lim = pool_fn(fam.limit, trunc.word_radius)
    idx = _compact(lim, R)
    c2_ok, c2_margin, c2_w = True, 0.0, None
    for (n, _), m in zip(tail, matchers):
        d = m.nearest(lim.mats[idx])
        if len(d):
            j = int(np.argmax(d))
            c2_margin = max(c2_margin, float(d[j]))
            if d[j] > tol and c2_ok:
                c2_ok = False
                c2_w = {"word": lim.name(idx[j]), "index": n, "distance": float(d[j])}

    # C1: tail-stable elements of the last snapshot lie near the limit group
    last = tail_pools[-1]
    idx = _compact(last, R)
    stable = np.ones(len(idx), dtype=bool)
    for m in matchers[:-1]:
        stable &= m.nearest(last.mats[idx]) <= tol
    cand = idx[stable]
    lim_big = pool_fn(fam.limit, trunc.word_radius + C1_SLACK)
    d = _Matcher(lim_big.mats).nearest(last.mats[cand])
    c1_ok, c1_margin, c1_w = True, 0.0, None
    if len(d):
        j = int(np.argmax(d))
        c1_margin = float(d[j])
        if d[j] > tol:
            c1_ok = False
            c1_w = {"word": last.name(cand[j]), "index": tail[-1][0], "distance": float(d[j])}
    return {
        "C1": {"pass": c1_ok, "margin": c1_margin, "witness": c1_w, "stable_elements": int(len(cand))},
        "C2": {"pass": c2_ok, "margin": c2_margin, "witness": c2_w},
        "tail_indices": [n for n, _ in tail],
    }


def check_chabauty(fam: RepFamily, trunc: TruncationParams | None = None, threads=None) -> dict:
    """Truncated C1/C2 over words and peripheral elements."""
    trunc = trunc or TruncationParams()
    if not fam.snapshots:
        raise ValueError("family has no snapshots")
    pers = fam.group.peripherals
    return _chabauty(
        fam, trunc, lambda rep, r: _combined_pool(rep, r, trunc.peripheral_budget, pers), threads
    )


def check_relative_strong(fam: RepFamily, trunc: TruncationParams | None = None, threads=None) -> dict:
    """C1/C2 restricted to each peripheral subgroup."""
    trunc = trunc or TruncationParams()
    out = {}
    for per in fam.group.peripherals:
        res = _chabauty(
            fam, trunc, lambda rep, r, per=per: _with_identity(_peripheral_pool(rep, per, trunc.peripheral_budget)), threads
        )
        res["pass"] = res["C1"]["pass"] and res["C2"]["pass"]
        out[per.name] = res
    return out


# --------------------------------------------------------------------------
# peripheral stability


def peripheral_point(rep: Representation, per: PeripheralSpec) -> BoundaryPoint | None:
    kind, fps = classify(rep.evaluate(per.generators[0]))
    if kind is IsometryType.IDENTITY or not fps:
        return None
    return fps[0].point


def _shell_of(per: PeripheralSpec, budget: int) -> np.ndarray:
    if per.rank_hint == 1 or len(per.generators) == 1:
        return np.repeat(np.arange(1, budget + 1), 2)
    exps, _ = peripheral_elements(None, per, min(budget, RANK2_SHELL_CAP))
    return np.array([abs(i) + abs(j) for i, j in exps])


def _escapes(rep, per, U: SphericalCap, K: np.ndarray, budget: int):
    """Per element: does it push every point of K into U.  Also the first bad point."""
    pool = _peripheral_pool(rep, per, budget)
    c = U.center.vector
    ok = np.ones(len(pool), dtype=bool)
    bad_k = np.full(len(pool), -1)
    for i, k in enumerate(K):
        img = batch_apply(pool.mats, k)
        inside = batch_distance(img, np.broadcast_to(c, img.shape)) < U.radius
        newly = ok & ~inside
        bad_k[newly] = i
        ok &= inside
    return pool, ok, bad_k


def minimal_stability_radius(rep, per, U, K, budget: int) -> int | None:
    """Smallest F with rho(h) K inside U for every h longer than F."""
    K = np.array([k.vector for k in K])
    _, ok, _ = _escapes(rep, per, U, K, budget)
    shells = _shell_of(per, budget)
    bad = shells[~ok]
    F = int(bad.max()) if len(bad) else 0
    if F >= shells.max():
        return None
    return F


def default_stability_instance(rep: Representation, per: PeripheralSpec, budget: int, radius: float = 0.5, n_points: int = 16):
    """U a cap about the parabolic point, K a ring at distance pi/2 from it."""
    p = peripheral_point(rep, per)
    if p is None:
        raise BadStabilityInstance(f"peripheral {per.name!r} has no fixed point")
    U = SphericalCap(p, radius)
    ring = SphericalCap(p, math.pi / 2).boundary_points(n_points)
    F = minimal_stability_radius(rep, per, U, ring, budget)
    if F is None:
        raise BadStabilityInstance(f"no finite exceptional set works for {per.name!r}")
    return U, ring, F


def check_peripheral_stability(
    fam: RepFamily,
    peripheral: PeripheralSpec,
    U: SphericalCap,
    K: list,
    F_radius: int,
    budget: int = 4096,
    threads=None,
) -> dict:
    lim_p = peripheral_point(fam.limit, peripheral)
    if lim_p is None or not U.contains(lim_p):
        raise BadStabilityInstance("the limit fixed point is not inside U")
    if any(U.closure_contains(k) for k in K):
        raise BadStabilityInstance("K meets the closure of U")
    Kv = np.array([k.vector for k in K])
    shells = _shell_of(peripheral, budget)
    beyond = shells > F_radius
    vacuous = not beyond.any()
    _, ok, _ = _escapes(fam.limit, peripheral, U, Kv, budget)
    if not ok[beyond].all():
        raise BadStabilityInstance(f"hypothesis fails for the limit with F_radius {F_radius}")

    def run(snap):
        n, rep = snap
        pool, ok, bad_k = _escapes(rep, peripheral, U, Kv, budget)
        bad = np.nonzero(beyond & ~ok)[0]
        if len(bad) == 0:
            return None
        i = int(bad[0])
        return {"index": n, "element": pool.name(i), "point": Kv[bad_k[i]].tolist()}

    results = ordered_map(run, fam.snapshots, threads)
    N = None
    for (n, _), r in zip(reversed(fam.snapshots), reversed(results)):
        if r is not None:
            break
        N = n
    tail_idx = {n for n, _ in fam.tail()}
    passed = all(r is None for (n, _), r in zip(fam.snapshots, results) if n in tail_idx)
    witness = None
    if not passed:
        witness = next(r for (n, _), r in zip(reversed(fam.snapshots), reversed(results)) if r is not None)
    return {
        "pass": passed,
        "N": N,
        "vacuous": vacuous,
        "F_radius": F_radius,
        "budget": budget,
        "witness": witness,
    }


# --------------------------------------------------------------------------
# full report


def faithful_peripherals(fam: RepFamily) -> bool:
    """Peripheral generators stay parabolic or loxodromic (infinite order) throughout."""
    reps = [r for _, r in fam.snapshots] + [fam.limit]
    for per in fam.group.peripherals:
        for rep in reps:
            for g in per.generators:
                kind, _ = classify(rep.evaluate(g))
                if kind in (IsometryType.ELLIPTIC, IsometryType.IDENTITY):
                    return False
    return True


def min_nonidentity_distance(rep: Representation, radius: int) -> float:
    best = math.inf
    for n, lv in enumerate(word_levels(rep, radius)):
        if n:
            best = min(best, float(batch_identity_distance(lv.mats).min()))
    return best


def convergence_report(fam: RepFamily, trunc: TruncationParams | None = None, threads=None) -> dict:
    """All verdicts for a family, with witnesses and the truncation echoed."""
    trunc = trunc or TruncationParams()
    alg = check_algebraic(fam, trunc)
    chab = check_chabauty(fam, trunc, threads)
    rel = check_relative_strong(fam, trunc, threads)
    stab = {}
    for per in fam.group.peripherals:
        try:
            U, K, F = default_stability_instance(fam.limit, per, trunc.peripheral_budget)
            res = check_peripheral_stability(fam, per, U, K, F, trunc.peripheral_budget, threads)
            res["U"] = {"center": U.center.vector.tolist(), "radius": U.radius}
        except BadStabilityInstance as exc:
            res = {"pass": False, "error": str(exc), "witness": None}
        stab[per.name] = res
    strong = alg["pass"] and chab["C1"]["pass"] and chab["C2"]["pass"]
    relative = alg["pass"] and all(r["pass"] for r in rel.values())
    stable = all(r["pass"] for r in stab.values())
    faithful = faithful_peripherals(fam)
    verdicts = {"strong": strong, "relative_strong": relative, "peripheral_stability": stable}
    return {
        "family": fam.name,
        "indices": fam.indices,
        "truncation": trunc.to_dict(),
        "algebraic": alg,
        "chabauty": chab,
        "relative_strong": rel,
        "peripheral_stability": stab,
        "verdicts": verdicts,
        "faithful_peripherals": faithful,
        "coherent": len(set(verdicts.values())) == 1,
        "min_nonidentity_distance": [
            [n, min_nonidentity_distance(r, min(trunc.word_radius, 4))] for n, r in fam.snapshots
        ],
        "note": "finite-truncation evidence, not a proof",
    }
