"""Parametric families of representations converging to a fixed limit."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

from .errors import DocumentError, UnknownFamily
from .fixtures import CUSP_TRANSLATION, FIXTURES, fixture
from .groups import GroupSpec, Representation
from .moebius import Moebius, compose


@dataclass(frozen=True)
class RepFamily:
    group: GroupSpec
    snapshots: tuple  # ((n, Representation), ...)
    limit: Representation
    name: str = ""
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        snaps = tuple((int(n), r) for n, r in self.snapshots)
        object.__setattr__(self, "snapshots", snaps)
        idx = [n for n, _ in snaps]
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise DocumentError("snapshot indices must be strictly increasing")
        for _, r in snaps:
            if r.group != self.group:
                raise DocumentError("snapshots must share the family's group")
        if self.limit.group != self.group:
            raise DocumentError("limit must share the family's group")

    @property
    def indices(self) -> list[int]:
        return [n for n, _ in self.snapshots]

    def snapshot(self, n: int) -> Representation:
        for k, r in self.snapshots:
            if k == n:
                return r
        raise KeyError(n)

    def tail(self) -> tuple:
        """Last third of the snapshots (at least one)."""
        k = max(1, len(self.snapshots) // 3)
        return self.snapshots[-k:]


DEFAULT_INDICES = {
    "constant": range(1, 9),
    "schottky_perturb": range(1, 37),
    "cusped_schottky": range(1, 37),
    "pinch": range(1, 37),
    "type_break": range(1, 37),
    "elliptic_cusp": range(1, 13),
    "indiscrete_translation": range(1, 9),
}

# conjugator entry scale for the perturbation families
PERTURB_SCALE = 0.25
ELLIPTIC_BETA = 0.01


def schedule(n: int, params: dict) -> float:
    amp = float(params.get("amplitude", 1.0))
    kind = params.get("schedule", "geometric")
    if kind == "geometric":
        return amp * 2.0 ** (-n)
    if kind == "harmonic":
        return amp / n
    raise DocumentError(f"unknown schedule {kind!r}")


def _perturb_last(rep: Representation, t: float) -> Representation:
    """Conjugate the last non-peripheral generator by a unipotent map."""
    group = rep.group
    per_letters = {abs(x) for p in group.peripherals for g in p.generators for x in g.letters}
    free = [n for i, n in enumerate(group.generator_names) if i + 1 not in per_letters]
    name = free[-1]
    c = Moebius(1, PERTURB_SCALE * t, 0, 1)
    images = dict(rep.images)
    images[name] = compose(compose(c, images[name]), c.inverse())
    return Representation(group, images)


def _pinched(t: float, tau: float = CUSP_TRANSLATION) -> Moebius:
    """z -> e^t z + tau; loxodromic for t != 0, translation at t = 0."""
    return Moebius(math.exp(t / 2), tau * math.exp(-t / 2), 0, math.exp(-t / 2))


def _elliptic(n: int, beta: float, tau: float = CUSP_TRANSLATION) -> Moebius:
    m = 2**n
    w = cmath.exp(1j * math.pi * (1 / m + beta / m**2))
    return Moebius(w, tau, 0, 1 / w)


def builtin_family(name: str, params: dict | None = None, indices=None) -> RepFamily:
    params = dict(params or {})
    if name not in DEFAULT_INDICES:
        raise UnknownFamily(f"unknown family {name!r}")
    idx = list(indices) if indices is not None else list(DEFAULT_INDICES[name])
    if not idx:
        raise DocumentError("family has no snapshots")

    if name == "constant":
        base_name = params.get("base", "schottky")
        if base_name not in FIXTURES:
            raise DocumentError(f"unknown base fixture {base_name!r}")
        base, _ = fixture(base_name)
        snaps = [(n, base) for n in idx]
        limit = base
    elif name in ("schottky_perturb", "cusped_schottky"):
        base, _ = fixture("schottky" if name == "schottky_perturb" else "cusped_schottky")
        snaps = [(n, _perturb_last(base, schedule(n, params))) for n in idx]
        limit = base
    elif name in ("pinch", "type_break"):
        base, _ = fixture("cusped_schottky")
        limit = base
        snaps = []
        for n in idx:
            t = schedule(n, params)
            if name == "type_break" and n == idx[0]:
                t = 0.0
            snaps.append((n, Representation(base.group, {**base.images, "p": _pinched(t)})))
    elif name == "elliptic_cusp":
        base, _ = fixture("cusped_schottky")
        beta = float(params.get("beta", ELLIPTIC_BETA))
        limit = base
        snaps = [(n, Representation(base.group, {**base.images, "p": _elliptic(n, beta)})) for n in idx]
    else:  # indiscrete_translation
        group = GroupSpec(("a",))
        snaps = [(n, Representation(group, {"a": Moebius(1, 1 / n, 0, 1)})) for n in idx]
        limit = Representation(group, {"a": Moebius.identity()})
    return RepFamily(limit.group, tuple(snaps), limit, name, params)
