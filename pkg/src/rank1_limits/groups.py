"""Marked groups, words, representations and word enumeration.

Words are tuples of signed generator indices: ``+k`` is the k-th
generator (1-based), ``-k`` its inverse.  Group classes handled
exactly are free groups and free products whose peripheral subgroups
are declared explicitly; relators are only used to validate a
representation.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .errors import BadWord, RelativeLengthBudget
from .moebius import Moebius, batch_normalize, compose, is_identity


def free_reduce(letters) -> tuple[int, ...]:
    out: list[int] = []
    for x in letters:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def letter_key(x: int) -> int:
    """Shortlex letter order a < a' < b < b' < ..."""
    return 2 * (abs(x) - 1) + (1 if x < 0 else 0)


def code_to_letter(code: int) -> int:
    return (code // 2 + 1) * (-1 if code % 2 else 1)


@dataclass(frozen=True, order=False)
class Word:
    letters: tuple[int, ...] = ()

    def __post_init__(self):
        letters = tuple(int(x) for x in self.letters)
        if any(x == 0 for x in letters):
            raise BadWord("generator index 0 is not a letter")
        for u, v in zip(letters, letters[1:]):
            if u == -v:
                raise BadWord(f"word {letters} is not freely reduced")
        object.__setattr__(self, "letters", letters)

    @classmethod
    def reduced(cls, letters) -> "Word":
        return cls(free_reduce(letters))

    def __len__(self):
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __mul__(self, other: "Word") -> "Word":
        return Word.reduced(self.letters + other.letters)

    def inverse(self) -> "Word":
        return Word(tuple(-x for x in reversed(self.letters)))

    def power(self, k: int) -> "Word":
        base = self if k >= 0 else self.inverse()
        return Word.reduced(base.letters * abs(k))

    def shortlex_key(self):
        return (len(self.letters), tuple(letter_key(x) for x in self.letters))

    def __lt__(self, other: "Word"):
        return self.shortlex_key() < other.shortlex_key()


IDENTITY_WORD = Word()


@dataclass(frozen=True)
class PeripheralSpec:
    name: str
    generators: tuple[Word, ...]
    rank_hint: int = 1

    def __post_init__(self):
        object.__setattr__(self, "generators", tuple(self.generators))
        if not self.generators:
            raise BadWord(f"peripheral {self.name!r} has no generators")
        if any(len(g) == 0 for g in self.generators):
            raise BadWord(f"peripheral {self.name!r} has an empty generator")
        if self.rank_hint not in (1, 2):
            raise BadWord("rank_hint must be 1 or 2")


class _SubgroupGraph:
    """Folded (Stallings) graph of a finitely generated subgroup of a free group."""

    def __init__(self, gens):
        raw = []
        n = 1
        for g in gens:
            v = 0
            for i, x in enumerate(g.letters):
                t = 0 if i == len(g) - 1 else n
                if t:
                    n += 1
                raw.append((v, x, t))
                raw.append((t, -x, v))
                v = t
        parent = list(range(n))

        def find(v):
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            return v

        changed = True
        while changed:
            changed = False
            seen = {}
            for s, x, t in raw:
                s, t = find(s), find(t)
                if (s, x) in seen and find(seen[(s, x)]) != t:
                    parent[find(seen[(s, x)])] = t
                    changed = True
                else:
                    seen[(s, x)] = t
        self.base = find(0)
        self.edges = {(find(s), x): find(t) for s, x, t in raw}

    def returns(self, letters, start: int = 0):
        """Positions j such that letters[start:j] is a nonempty subgroup element."""
        v = self.base
        hits = []
        for j in range(start, len(letters)):
            key = (v, letters[j])
            if key not in self.edges:
                break
            v = self.edges[key]
            if v == self.base:
                hits.append(j + 1)
        return hits


@dataclass(frozen=True)
class GroupSpec:
    generator_names: tuple[str, ...]
    relators: tuple[Word, ...] = ()
    peripherals: tuple[PeripheralSpec, ...] = ()
    _graphs: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "generator_names", tuple(self.generator_names))
        object.__setattr__(self, "relators", tuple(self.relators))
        object.__setattr__(self, "peripherals", tuple(self.peripherals))
        if len(set(self.generator_names)) != len(self.generator_names):
            raise BadWord("generator names must be distinct")
        for name in self.generator_names:
            if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", name):
                raise BadWord(f"bad generator name {name!r}")
        for w in self.relators:
            self.check_word(w)
        for p in self.peripherals:
            for g in p.generators:
                self.check_word(g)

    @property
    def rank(self) -> int:
        return len(self.generator_names)

    def check_word(self, w: Word) -> Word:
        for x in w.letters:
            if abs(x) > self.rank:
                raise BadWord(f"letter {x} out of range for rank {self.rank}")
        return w

    def index(self, name: str) -> int:
        try:
            return self.generator_names.index(name) + 1
        except ValueError:
            raise BadWord(f"unknown generator {name!r}") from None

    def peripheral(self, name: str) -> PeripheralSpec:
        for p in self.peripherals:
            if p.name == name:
                return p
        raise BadWord(f"unknown peripheral {name!r}")

    def parse(self, text: str) -> Word:
        """Parse ``"a b' a^3 b^-2"`` into a reduced word."""
        letters: list[int] = []
        for tok in text.split():
            m = re.fullmatch(r"([A-Za-z_][A-Za-z0-9_]*)('?)(?:\^(-?\d+))?", tok)
            if not m:
                raise BadWord(f"cannot parse token {tok!r}")
            x = self.index(m.group(1))
            if m.group(2):
                x = -x
            k = int(m.group(3)) if m.group(3) is not None else 1
            letters.extend([x if k > 0 else -x] * abs(k))
        return Word.reduced(letters)

    def format(self, w: Word) -> str:
        return " ".join(
            self.generator_names[abs(x) - 1] + ("'" if x < 0 else "") for x in w.letters
        )

    def _graph(self, name: str) -> _SubgroupGraph:
        g = self._graphs.get(name)
        if g is None:
            g = _SubgroupGraph(self.peripheral(name).generators)
            self._graphs[name] = g
        return g

    def is_peripheral(self, w: Word, name: str | None = None) -> str | None:
        """Name of a declared peripheral subgroup containing ``w`` (syntactic check)."""
        if len(w) == 0:
            return None
        names = [name] if name else [p.name for p in self.peripherals]
        for n in names:
            if len(w) in self._graph(n).returns(w.letters):
                return n
        return None


def word_length(w: Word) -> int:
    return len(w)


def enumerate_sphere(group: GroupSpec, n: int) -> list[Word]:
    if n == 0:
        return [IDENTITY_WORD]
    letters = sorted(
        [x for i in range(1, group.rank + 1) for x in (i, -i)], key=letter_key
    )
    level = [()]
    for _ in range(n):
        level = [w + (x,) for w in level for x in letters if not (w and w[-1] == -x)]
    return [Word(w) for w in level]


def enumerate_ball(group: GroupSpec, radius: int) -> list[Word]:
    """All freely reduced words of length <= radius, in shortlex order."""
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    out: list[Word] = []
    for n in range(radius + 1):
        out.extend(enumerate_sphere(group, n))
    return out


def relative_length(group: GroupSpec, w: Word, budget: int = 10**6) -> int:
    """Length of ``w`` in the relative Cayley graph.

    One step is either a single generator letter or any nonempty
    subword lying in a declared peripheral subgroup.  Shortest paths
    over cut positions of the reduced word are found breadth first.
    """
    group.check_word(w)
    n = len(w)
    if n == 0:
        return 0
    graphs = [group._graph(p.name) for p in group.peripherals]
    dist = [None] * (n + 1)
    dist[0] = 0
    frontier = [0]
    work = 0
    while frontier:
        nxt = []
        for i in frontier:
            targets = {i + 1}
            for g in graphs:
                targets.update(g.returns(w.letters, i))
                work += n - i
            if work > budget:
                raise RelativeLengthBudget(f"relative length search exceeded budget {budget}")
            for j in targets:
                if dist[j] is None:
                    dist[j] = dist[i] + 1
                    nxt.append(j)
        if dist[n] is not None:
            return dist[n]
        frontier = sorted(nxt)
    raise AssertionError("unreachable")


def alternating_form(group: GroupSpec, w: Word) -> list[Word]:
    """Split ``w`` as g0 h1 g1 ... hk gk with each hi a maximal peripheral subword."""
    group.check_word(w)
    graphs = [group._graph(p.name) for p in group.peripherals]
    segments: list[Word] = []
    current: list[int] = []
    i = 0
    letters = w.letters
    while i < len(letters):
        best = 0
        for g in graphs:
            hits = g.returns(letters, i)
            if hits:
                best = max(best, hits[-1])
        if best:
            segments.append(Word(tuple(current)))
            segments.append(Word(letters[i:best]))
            current = []
            i = best
        else:
            current.append(letters[i])
            i += 1
    segments.append(Word(tuple(current)))
    return segments


def peripheral_elements(group: GroupSpec, peripheral: PeripheralSpec, budget: int):
    """Nontrivial elements of a cyclic or rank-2 abelian peripheral subgroup.

    Returns ``(exponents, words)``, listed by increasing l1 norm of the
    exponent vector.  Rank 1 elements are g^k, rank 2 elements g1^i g2^j.
    """
    gens = peripheral.generators
    exps = []
    if peripheral.rank_hint == 1 or len(gens) == 1:
        for k in range(1, budget + 1):
            exps.extend([(k,), (-k,)])
        words = [gens[0].power(e[0]) for e in exps]
    else:
        for n in range(1, budget + 1):
            shell = [(i, j) for i in range(-n, n + 1) for j in (n - abs(i), abs(i) - n)]
            exps.extend(sorted(set(shell), reverse=True))
        words = [gens[0].power(i) * gens[1].power(j) for i, j in exps]
    return exps, words


@dataclass(frozen=True)
class Representation:
    group: GroupSpec
    images: dict

    def __post_init__(self):
        images = dict(self.images)
        for name in self.group.generator_names:
            if name not in images:
                raise BadWord(f"no image for generator {name!r}")
        object.__setattr__(self, "images", images)

    def validate(self, tol: float = 1e-8) -> "Representation":
        for r in self.group.relators:
            if not is_identity(self.evaluate(r), tol):
                raise BadWord(f"relator {self.group.format(r)!r} is not sent to the identity")
        for p in self.group.peripherals:
            for g in p.generators:
                if is_identity(self.evaluate(g), tol):
                    raise BadWord(f"peripheral generator {self.group.format(g)!r} maps to identity")
        return self

    def letter(self, x: int) -> Moebius:
        if x == 0 or abs(x) > self.group.rank:
            raise BadWord(f"unknown generator index {x}")
        m = self.images[self.group.generator_names[abs(x) - 1]]
        return m if x > 0 else m.inverse()

    def evaluate(self, w) -> Moebius:
        if isinstance(w, str):
            w = self.group.parse(w)
        out = Moebius.identity()
        for x in w.letters:
            out = compose(out, self.letter(x))
        return out

    def letter_arrays(self) -> np.ndarray:
        """Generator matrices indexed by letter code (2i: g_i, 2i+1: g_i^-1)."""
        mats = []
        for i in range(self.group.rank):
            mats.append(self.letter(i + 1).to_array())
            mats.append(self.letter(-(i + 1)).to_array())
        return np.array(mats)

    def conjugate(self, g: Moebius) -> "Representation":
        gi = g.inverse()
        return Representation(
            self.group, {k: compose(compose(g, m), gi) for k, m in self.images.items()}
        )

    def restrict(self, peripheral: PeripheralSpec) -> "Representation":
        """The peripheral subgroup as a representation of a free group on its generators."""
        names = tuple(f"h{i + 1}" for i in range(len(peripheral.generators)))
        sub = GroupSpec(names)
        return Representation(
            sub, {n: self.evaluate(g) for n, g in zip(names, peripheral.generators)}
        )


def evaluate(rep: Representation, w: Word) -> Moebius:
    return rep.evaluate(w)


@dataclass
class WordLevel:
    """All reduced words of one length: letter codes (N, k) and matrices (N, 2, 2)."""

    codes: np.ndarray
    mats: np.ndarray

    def __len__(self):
        return len(self.mats)

    def word(self, i: int) -> Word:
        return Word(tuple(code_to_letter(int(c)) for c in self.codes[i]))


def word_levels(rep: Representation, radius: int, normalize_every: int = 1):
    """Yield :class:`WordLevel` for lengths 0..radius in shortlex order.

    Each level extends the previous one letter at a time, prefix-major,
    so rows stay in shortlex order.
    """
    gens = rep.letter_arrays()
    L = len(gens)
    codes = np.zeros((1, 0), dtype=np.int16)
    mats = np.eye(2, dtype=complex)[None]
    last = np.array([-1])
    yield WordLevel(codes, mats)
    for n in range(1, radius + 1):
        prod = np.einsum("pij,ljk->plik", mats, gens)
        allowed = (last[:, None] ^ 1) != np.arange(L)[None, :]
        allowed[last < 0] = True
        new_mats = prod[allowed]
        rows, letters = np.nonzero(allowed)
        codes = np.concatenate([codes[rows], letters[:, None].astype(np.int16)], axis=1)
        if n % normalize_every == 0:
            new_mats = batch_normalize(new_mats)
        mats = new_mats
        last = letters
        yield WordLevel(codes, mats)
