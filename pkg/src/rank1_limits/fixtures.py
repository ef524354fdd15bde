"""Concrete groups used by the tests, the families and the shipped documents.

Each builder returns ``(rep, caps)`` where ``caps`` maps generator
letters (``"a"``, ``"a'"``) and peripheral names to ping-pong caps, or
is empty when no ping-pong structure is provided.
"""

from __future__ import annotations

import math

from .groups import GroupSpec, PeripheralSpec, Representation
from .moebius import Moebius, cap_from_disk, cap_inflate, cap_outside_disk

SQ3 = math.sqrt(3.0)

# loxodromics with trace 4 and fixed points +-1 / +-i
_A = Moebius(2, SQ3, SQ3, 2)
_B = Moebius(2, 1j * SQ3, -1j * SQ3, 2)

# inflation of the isometric disks, in radians; gives the strict ping-pong margin
CAP_MARGIN = 0.05

CUSP_TRANSLATION = 40.0
CUSP_DISK_RADIUS = 2.5


def _iso_caps(name: str, m: Moebius) -> dict:
    """Inflated isometric disks: m sends the outside of I(m) into I(m^-1)."""
    r = 1 / abs(m.c)
    return {
        name: cap_inflate(cap_from_disk(m.a / m.c, r), CAP_MARGIN),
        name + "'": cap_inflate(cap_from_disk(-m.d / m.c, r), CAP_MARGIN),
    }


def schottky():
    group = GroupSpec(("a", "b"))
    rep = Representation(group, {"a": _A, "b": _B}).validate()
    caps = {**_iso_caps("a", _A), **_iso_caps("b", _B)}
    return rep, caps


def cusped_schottky():
    """Free product of a loxodromic Z and a parabolic Z (peripheral ``P``)."""
    group = GroupSpec(("a", "p"), peripherals=(PeripheralSpec("P", (GroupSpec(("a", "p")).parse("p"),)),))
    p = Moebius(1, CUSP_TRANSLATION, 0, 1)
    rep = Representation(group, {"a": _A, "p": p}).validate()
    caps = {**_iso_caps("a", _A), "P": cap_outside_disk(0, CUSP_DISK_RADIUS)}
    return rep, caps


def rank2_cusp():
    """Free product of a loxodromic Z with a rank-2 parabolic Z^2."""
    names = ("a", "p", "q")
    base = GroupSpec(names)
    group = GroupSpec(
        names,
        relators=(base.parse("p q p' q'"),),
        peripherals=(PeripheralSpec("P", (base.parse("p"), base.parse("q")), rank_hint=2),),
    )
    rep = Representation(
        group,
        {
            "a": _A,
            "p": Moebius(1, CUSP_TRANSLATION, 0, 1),
            "q": Moebius(1, 1j * CUSP_TRANSLATION, 0, 1),
        },
    ).validate()
    caps = {**_iso_caps("a", _A), "P": cap_outside_disk(0, CUSP_DISK_RADIUS)}
    return rep, caps


def sl2z_level2():
    """The free subgroup of SL(2, Z) generated by z+2 and z/(2z+1); limit set R + inf."""
    group = GroupSpec(("a", "b"))
    rep = Representation(group, {"a": Moebius(1, 2, 0, 1), "b": Moebius(1, 0, 2, 1)}).validate()
    return rep, {}


def cyclic_parabolic():
    group = GroupSpec(("p",), peripherals=(PeripheralSpec("P", (GroupSpec(("p",)).parse("p"),)),))
    return Representation(group, {"p": Moebius(1, 1, 0, 1)}).validate(), {}


def cyclic_loxodromic():
    group = GroupSpec(("a",))
    return Representation(group, {"a": Moebius(2, 0, 0, 0.5)}).validate(), {}


FIXTURES = {
    "schottky": schottky,
    "cusped_schottky": cusped_schottky,
    "rank2_cusp": rank2_cusp,
    "sl2z_level2": sl2z_level2,
    "cyclic_parabolic": cyclic_parabolic,
    "cyclic_loxodromic": cyclic_loxodromic,
}


def fixture(name: str):
    return FIXTURES[name]()
