"""Deliberately broken automata, each expected to fail a specific property."""

import math
from dataclasses import replace

from rank1_limits.automaton import Explicit
from rank1_limits.moebius import SphericalCap


def _vertex(aut, name):
    return next(z for z, v in enumerate(aut.vertices) if v.name == name)


def with_witness_radius(aut, name, radius):
    z = _vertex(aut, name)
    verts = list(aut.vertices)
    verts[z] = replace(verts[z], witness=SphericalCap(verts[z].witness.center, radius))
    return replace(aut, vertices=tuple(verts))


def nearly_full_cap(aut, name="a"):
    return with_witness_radius(aut, name, math.pi - 1e-6)


def shrunk_cap(aut, name="a", radius=0.05):
    return with_witness_radius(aut, name, radius)


def drop_one_edge(aut):
    return replace(aut, edges=aut.edges[1:])


def drop_out_edges(aut, name="a"):
    z = _vertex(aut, name)
    return replace(aut, edges=tuple(e for e in aut.edges if e[0] != z))


def mislabeled_coset(aut, group, name="P"):
    """Parabolic vertex with explicit labels, one of which leaves the coset."""
    z = _vertex(aut, name)
    words = [group.parse("p").power(k) for k in range(1, 9)]
    words += [w.inverse() for w in words]
    words.append(group.parse("p a p"))
    verts = list(aut.vertices)
    verts[z] = replace(verts[z], labels=Explicit(tuple(words)))
    return replace(aut, vertices=tuple(verts))
