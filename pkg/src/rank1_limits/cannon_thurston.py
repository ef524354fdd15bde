"""Cannon-Thurston maps sampled on fixed points of group elements.

For each word w with rho_1(w) loxodromic or parabolic, the attracting
(or parabolic) fixed point of rho_1(w) is sent to the same datum of
rho_n(w).  Fixed points are dense in the limit set, so these pairings
determine the map; interpolation elsewhere is not attempted.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import ElementaryGroup, NotTypePreserving
from .families import RepFamily
from .groups import Representation, Word, word_levels
from .limit_set import dedup_points
from .moebius import IsometryType, batch_distance, batch_limit_data, classify

DEFAULT_BUDGET = 10


@dataclass
class TypePreservationReport:
    classes: dict  # peripheral -> {"first": type, "snapshots": [[n, type]], "limit": type}
    weakly_type_preserving: bool
    witness: dict | None
    limit_direction: bool  # rho_n parabolic implies rho parabolic
    limit_witness: dict | None = None

    def to_dict(self) -> dict:
        return {
            "classes": self.classes,
            "weakly_type_preserving": self.weakly_type_preserving,
            "witness": self.witness,
            "limit_direction": self.limit_direction,
            "limit_witness": self.limit_witness,
        }


def _kind(rep: Representation, w: Word) -> str:
    return classify(rep.evaluate(w))[0].value


def check_type_preserving(fam: RepFamily) -> TypePreservationReport:
    """Classify peripheral generator images along the family."""
    classes = {}
    ok, witness = True, None
    lim_ok, lim_witness = True, None
    first = fam.snapshots[0][1]
    par = IsometryType.PARABOLIC.value
    for per in fam.group.peripherals:
        for g in per.generators:
            key = per.name if len(per.generators) == 1 else f"{per.name}:{fam.group.format(g)}"
            k1 = _kind(first, g)
            snaps = [[n, _kind(rep, g)] for n, rep in fam.snapshots]
            kl = _kind(fam.limit, g)
            classes[key] = {"first": k1, "snapshots": snaps, "limit": kl}
            if k1 == par:
                for n, k in snaps:
                    if k != par and ok:
                        ok = False
                        witness = {"peripheral": per.name, "element": fam.group.format(g), "index": n, "type": k}
            for n, k in snaps:
                if k == par and kl != par and lim_ok:
                    lim_ok = False
                    lim_witness = {"peripheral": per.name, "element": fam.group.format(g), "index": n, "limit_type": kl}
    return TypePreservationReport(classes, ok, witness, lim_ok, lim_witness)


class CTSample:
    """Sampled pairs source -> target; ``ids`` index words in shortlex order."""

    def __init__(self, sources, targets, ids, levels):
        self.sources = sources
        self.targets = targets
        self.ids = ids
        self._levels = levels
        self._offsets = np.cumsum([0] + [len(lv) for lv in levels])

    def __len__(self):
        return len(self.ids)

    def code(self, k: int) -> Word:
        i = int(self.ids[k])
        j = int(np.searchsorted(self._offsets, i, side="right")) - 1
        return self._levels[j].word(i - int(self._offsets[j]))

    @property
    def codes(self) -> list[Word]:
        return [self.code(k) for k in range(len(self))]

    @property
    def pairs(self):
        return list(zip(self.sources, self.targets, self.codes))


class _Data:
    """Fixed-point data of all words of length 1..budget, in shortlex order."""

    def __init__(self, rep: Representation, budget: int):
        self.levels, pts = [], []
        for n, lv in enumerate(word_levels(rep, budget)):
            if n == 0:
                continue
            pts.append(batch_limit_data(lv.mats)[1])
            self.levels.append(lv)
        self.points = np.concatenate(pts)
        self._keep = None

    def kept(self) -> np.ndarray:
        """Rows surviving dedup of defined data; earliest code wins."""
        if self._keep is None:
            good = np.nonzero(~np.isnan(self.points[:, 0]))[0]
            self._keep = good[dedup_points(self.points[good])]
        return self._keep


def _require(fam: RepFamily) -> None:
    if not fam.snapshots:
        raise ElementaryGroup("family has no snapshots")
    rep = check_type_preserving(fam)
    if not rep.weakly_type_preserving:
        raise NotTypePreserving("family is not weakly type-preserving", rep.witness)


def _pairing(src: _Data, dst: _Data) -> CTSample:
    keep = src.kept()
    # codes whose target datum is undefined are dropped after dedup
    keep = keep[~np.isnan(dst.points[keep, 0])]
    return CTSample(src.points[keep], dst.points[keep], keep, src.levels)


def _target_rep(fam: RepFamily, n) -> Representation:
    if n in (None, "limit", "inf"):
        return fam.limit
    return fam.snapshot(int(n))


def _checked(sample: CTSample) -> CTSample:
    if len(sample) < 3:
        raise ElementaryGroup("fewer than three distinct limit points under the first snapshot")
    return sample


def ct_map(fam: RepFamily, n="limit", word_budget: int = DEFAULT_BUDGET) -> CTSample:
    """Pairs (fixed point under rho_1, fixed point under rho_n) by code."""
    _require(fam)
    src = _Data(fam.snapshots[0][1], word_budget)
    return _checked(_pairing(src, _Data(_target_rep(fam, n), word_budget)))


def _shared(a: CTSample, b: CTSample):
    _, i, j = np.intersect1d(a.ids, b.ids, assume_unique=True, return_indices=True)
    return i, j


def ct_uniform_deviation(fam: RepFamily, word_budget: int = DEFAULT_BUDGET) -> list:
    """(n, sup over shared codes of d(target_n, target_limit)) for every snapshot."""
    _require(fam)
    src = _Data(fam.snapshots[0][1], word_budget)
    lim = _checked(_pairing(src, _Data(fam.limit, word_budget)))
    out = []
    for n, rep in fam.snapshots:
        s = _pairing(src, _Data(rep, word_budget))
        i, j = _shared(s, lim)
        d = batch_distance(s.targets[i], lim.targets[j])
        out.append((n, float(d.max()) if len(d) else 0.0))
    return out


def ct_composition_check(fam: RepFamily, n, word_budget: int = DEFAULT_BUDGET) -> float:
    """sup |CT_{n,inf}(CT_{1,n}(x)) - CT_{1,inf}(x)| on fixed-point codes."""
    _require(fam)
    src = _Data(fam.snapshots[0][1], word_budget)
    mid = _Data(_target_rep(fam, n), word_budget)
    end = _Data(fam.limit, word_budget)
    first_n = _checked(_pairing(src, mid))
    first_lim = _pairing(src, end)
    # CT_{n,inf} on every defined code, so the lookup below hits exact sources
    rows = np.nonzero(~np.isnan(mid.points[:, 0]) & ~np.isnan(end.points[:, 0]))[0]
    _, k = cKDTree(mid.points[rows]).query(first_n.targets, k=1)
    via = end.points[rows[k]]
    i, j = _shared(first_n, first_lim)
    d = batch_distance(via[i], first_lim.targets[j])
    return float(d.max()) if len(d) else 0.0
