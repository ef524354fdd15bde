"""Moebius transformations acting on the Riemann sphere.

Elements of PSL(2, C) are stored as determinant-one 2x2 complex
matrices with a canonical sign.  Points of the sphere at infinity are
unit vectors in R^3; the complex plane is identified with the sphere by
inverse stereographic projection from the north pole, so that infinity
is (0, 0, 1).

The scalar API (:class:`Moebius`, :class:`BoundaryPoint`,
:class:`SphericalCap`) is used for exact-ish bookkeeping.  The ``batch_*``
helpers at the bottom do the same computations on stacks of matrices and
are what the enumeration code uses.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import CapTooLarge, DegenerateCircle

#: tolerance on |tr^2 - 4| (and on the imaginary part of tr^2) used by classify
TAU_CLASS = 1e-9

# rounding floor on tr^2 per unit of entry size; tr of a stored product is
# only known to about scale * eps, so tau alone misreads big conjugates
_TRACE_NOISE = 256 * 2.0**-52

_SIGN_EPS = 1e-14
# squared entry size above which ad - bc is pure rounding noise
_DET_RELIABLE = 1e12
# |det - 1| below this multiple of scale^2 * eps is rounding, not drift
_DET_NOISE = 16 * 2.0**-52


class IsometryType(enum.Enum):
    IDENTITY = "Identity"
    ELLIPTIC = "Elliptic"
    PARABOLIC = "Parabolic"
    LOXODROMIC = "Loxodromic"


def _canonical_sign(entries):
    scale = max(abs(x) for x in entries)
    for x in entries:
        if abs(x) <= _SIGN_EPS * scale:
            continue
        if abs(x.real) > _SIGN_EPS * scale:
            return -1 if x.real < 0 else 1
        return -1 if x.imag < 0 else 1
    return 1


@dataclass(frozen=True)
class Moebius:
    """A Moebius map z -> (az + b) / (cz + d).

    The entries are rescaled on construction so that ad - bc = 1 and the
    first non-negligible entry has nonnegative real part.
    """

    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        entries = [complex(x) for x in (self.a, self.b, self.c, self.d)]
        for x in entries:
            if not (math.isfinite(x.real) and math.isfinite(x.imag)):
                raise ValueError("non-finite matrix entry")
        det = entries[0] * entries[3] - entries[1] * entries[2]
        scale2 = max(abs(x) for x in entries) ** 2
        if scale2 <= _DET_RELIABLE:
            if abs(det) <= 1e-14 * scale2:
                raise ValueError("singular matrix")
            # rescaling by a noisy det would inject that noise into every entry
            if abs(det - 1) > _DET_NOISE * scale2:
                s = cmath.sqrt(det)
                entries = [x / s for x in entries]
        # beyond that size det has no correct digits; it is 1 by construction
        sign = _canonical_sign(entries)
        if sign < 0:
            entries = [-x for x in entries]
        for name, x in zip("abcd", entries):
            object.__setattr__(self, name, x)

    @classmethod
    def identity(cls) -> "Moebius":
        return cls(1, 0, 0, 1)

    @classmethod
    def from_array(cls, m) -> "Moebius":
        m = np.asarray(m, dtype=complex)
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    def to_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=complex)

    @property
    def det(self) -> complex:
        return self.a * self.d - self.b * self.c

    @property
    def trace(self) -> complex:
        return self.a + self.d

    def inverse(self) -> "Moebius":
        return Moebius(self.d, -self.b, -self.c, self.a)

    def __matmul__(self, other: "Moebius") -> "Moebius":
        return compose(self, other)

    def __call__(self, p: "BoundaryPoint") -> "BoundaryPoint":
        return apply(self, p)


@dataclass(frozen=True)
class BoundaryPoint:
    """A point of the round unit sphere (normalized on construction)."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        n = math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)
        if not n > 0 or not math.isfinite(n):
            raise ValueError("cannot normalize boundary point")
        object.__setattr__(self, "x", float(self.x) / n)
        object.__setattr__(self, "y", float(self.y) / n)
        object.__setattr__(self, "z", float(self.z) / n)

    @classmethod
    def infinity(cls) -> "BoundaryPoint":
        return cls(0.0, 0.0, 1.0)

    @classmethod
    def from_complex(cls, w) -> "BoundaryPoint":
        if w is None or cmath.isinf(w):
            return cls.infinity()
        return cls.from_homogeneous(complex(w), 1.0)

    @classmethod
    def from_homogeneous(cls, u: complex, w: complex) -> "BoundaryPoint":
        uu = abs(u) ** 2
        ww = abs(w) ** 2
        cross = u * w.conjugate()
        n = uu + ww
        return cls(2 * cross.real / n, 2 * cross.imag / n, (uu - ww) / n)

    @classmethod
    def from_vector(cls, v) -> "BoundaryPoint":
        return cls(float(v[0]), float(v[1]), float(v[2]))

    def homogeneous(self) -> tuple[complex, complex]:
        # pick the chart that avoids dividing by a small number
        if self.z <= 0:
            return complex(self.x, self.y), complex(1.0 - self.z)
        return complex(1.0 + self.z), complex(self.x, -self.y)

    def to_complex(self) -> complex:
        """Stereographic coordinate; ``complex(inf, 0)`` at the north pole."""
        u, w = self.homogeneous()
        if w == 0:
            return complex(math.inf, 0.0)
        return u / w

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def antipode(self) -> "BoundaryPoint":
        return BoundaryPoint(-self.x, -self.y, -self.z)


@dataclass(frozen=True)
class FixedPoint:
    point: BoundaryPoint
    role: str  # "attracting", "repelling" or "neutral"


@dataclass(frozen=True)
class SphericalCap:
    """Open metric ball on the unit sphere with angular radius in (0, pi)."""

    center: BoundaryPoint
    radius: float

    def __post_init__(self):
        if not (0.0 < self.radius < math.pi):
            raise CapTooLarge(f"cap radius {self.radius!r} outside (0, pi)")

    def contains(self, p: BoundaryPoint) -> bool:
        return boundary_distance(self.center, p) < self.radius

    def closure_contains(self, p: BoundaryPoint) -> bool:
        return boundary_distance(self.center, p) <= self.radius

    def complement(self) -> "SphericalCap":
        """The closed complementary cap (returned as a cap object)."""
        return SphericalCap(self.center.antipode(), math.pi - self.radius)

    def boundary_points(self, n: int) -> list[BoundaryPoint]:
        return [BoundaryPoint.from_vector(v) for v in _circle_points(self, n)]


# --------------------------------------------------------------------------
# scalar operations


def compose(f: Moebius, g: Moebius) -> Moebius:
    return Moebius(
        f.a * g.a + f.b * g.c,
        f.a * g.b + f.b * g.d,
        f.c * g.a + f.d * g.c,
        f.c * g.b + f.d * g.d,
    )


def apply(f: Moebius, p: BoundaryPoint) -> BoundaryPoint:
    u, w = p.homogeneous()
    return BoundaryPoint.from_homogeneous(f.a * u + f.b * w, f.c * u + f.d * w)


def matrix_distance(f: Moebius, g: Moebius) -> float:
    """Sign-aware Frobenius distance min(|F - G|, |F + G|)."""
    fa, ga = f.to_array(), g.to_array()
    return float(min(np.linalg.norm(fa - ga), np.linalg.norm(fa + ga)))


def _eigvec(f: Moebius, lam: complex) -> BoundaryPoint:
    v1 = (f.b, lam - f.a)
    v2 = (lam - f.d, f.c)
    n1 = abs(v1[0]) + abs(v1[1])
    n2 = abs(v2[0]) + abs(v2[1])
    u, w = v1 if n1 >= n2 else v2
    return BoundaryPoint.from_homogeneous(u, w)


def is_identity(f: Moebius, tol: float = TAU_CLASS) -> bool:
    return matrix_distance(f, Moebius.identity()) <= tol


def classify(f: Moebius, tol: float = TAU_CLASS) -> tuple[IsometryType, list[FixedPoint]]:
    """Dynamical type and fixed points of ``f``.

    Fixed points are eigenvectors of the matrix.  For a loxodromic map
    the eigenvector of the larger eigenvalue is attracting, since the
    derivative at the fixed point (u : 1) is 1 / lambda^2.
    """
    if is_identity(f, tol):
        return IsometryType.IDENTITY, []
    tr = f.trace
    t2 = tr * tr
    tol = max(tol, _TRACE_NOISE * max(abs(f.a), abs(f.b), abs(f.c), abs(f.d)))
    if abs(t2 - 4) <= tol:
        lam = tr / 2
        return IsometryType.PARABOLIC, [FixedPoint(_eigvec(f, lam), "neutral")]
    disc = cmath.sqrt(t2 - 4)
    l1 = (tr + disc) / 2
    l2 = (tr - disc) / 2
    if abs(t2.imag) <= tol and 0 <= t2.real < 4:
        return IsometryType.ELLIPTIC, [
            FixedPoint(_eigvec(f, l1), "neutral"),
            FixedPoint(_eigvec(f, l2), "neutral"),
        ]
    big, small = (l1, l2) if abs(l1) >= abs(l2) else (l2, l1)
    small = 1 / big
    return IsometryType.LOXODROMIC, [
        FixedPoint(_eigvec(f, big), "attracting"),
        FixedPoint(_eigvec(f, small), "repelling"),
    ]


def limit_datum(f: Moebius, tol: float = TAU_CLASS) -> BoundaryPoint | None:
    """Attracting fixed point if loxodromic, the fixed point if parabolic."""
    kind, fps = classify(f, tol)
    if kind in (IsometryType.LOXODROMIC, IsometryType.PARABOLIC):
        return fps[0].point
    return None


def boundary_distance(p: BoundaryPoint, q: BoundaryPoint) -> float:
    # atan2 form of arccos(<p, q>); keeps full precision at small angles
    cx = p.y * q.z - p.z * q.y
    cy = p.z * q.x - p.x * q.z
    cz = p.x * q.y - p.y * q.x
    dot = p.x * q.x + p.y * q.y + p.z * q.z
    return math.atan2(math.sqrt(cx * cx + cy * cy + cz * cz), dot)


def _tangent_basis(c: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    helper = np.array([1.0, 0.0, 0.0]) if abs(c[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(c, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(c, e1)
    return e1, e2


def _circle_points(cap: SphericalCap, n: int) -> np.ndarray:
    c = cap.center.vector
    e1, e2 = _tangent_basis(c)
    theta = 2 * np.pi * np.arange(n) / n
    ring = np.cos(theta)[:, None] * e1 + np.sin(theta)[:, None] * e2
    return math.cos(cap.radius) * c + math.sin(cap.radius) * ring


def cap_through(q1: np.ndarray, q2: np.ndarray, q3: np.ndarray, inside: np.ndarray) -> SphericalCap:
    """The cap bounded by the circle through three points, on the side of ``inside``.

    Small circles are located by their circumcenter in R^3, which stays
    well conditioned when the points are close together; large circles
    use the normal of the plane through the points.
    """
    a = q1 - q3
    b = q2 - q3
    axb = np.cross(a, b)
    nn = np.linalg.norm(axb)
    scale = max(np.linalg.norm(a), np.linalg.norm(b), 1e-300)
    if nn <= 1e-12 * scale * scale:
        raise DegenerateCircle("image circle is numerically degenerate")
    offset = np.cross(np.dot(a, a) * b - np.dot(b, b) * a, axb) / (2 * nn * nn)
    cc = q3 + offset
    if np.linalg.norm(cc) > 0.5:
        n = cc / np.linalg.norm(cc)
    else:
        n = axb / nn
        if np.dot(n, cc) < 0:
            n = -n
    center = BoundaryPoint.from_vector(n)
    qs = [BoundaryPoint.from_vector(q) for q in (q1, q2, q3)]
    radius = sum(boundary_distance(center, q) for q in qs) / 3
    if boundary_distance(center, BoundaryPoint.from_vector(inside)) > radius:
        center, radius = center.antipode(), math.pi - radius
    return SphericalCap(center, radius)


def cap_image(f: Moebius, cap: SphericalCap) -> SphericalCap:
    """Image of a cap under a Moebius map (Moebius maps send circles to circles)."""
    pts = _circle_points(cap, 3)
    imgs = [apply(f, BoundaryPoint.from_vector(p)).vector for p in pts]
    inside = apply(f, cap.center).vector
    return cap_through(imgs[0], imgs[1], imgs[2], inside)


def cap_inflate(cap: SphericalCap, eps: float) -> SphericalCap:
    if eps == 0:
        return cap
    if cap.radius + eps >= math.pi:
        raise CapTooLarge(f"inflated radius {cap.radius + eps!r} reaches pi")
    return SphericalCap(cap.center, cap.radius + eps)


def cap_contains(outer: SphericalCap, inner: SphericalCap) -> bool:
    return boundary_distance(outer.center, inner.center) + inner.radius <= outer.radius


def caps_disjoint_closures(c1: SphericalCap, c2: SphericalCap) -> bool:
    return boundary_distance(c1.center, c2.center) > c1.radius + c2.radius


def cap_about(p: BoundaryPoint, radius: float) -> SphericalCap:
    return SphericalCap(p, radius)


def cap_from_disk(center: complex, radius: float) -> SphericalCap:
    """Spherical cap corresponding to the planar disk |z - center| < radius."""
    qs = [
        BoundaryPoint.from_complex(center + radius * cmath.exp(2j * math.pi * k / 3)).vector
        for k in range(3)
    ]
    return cap_through(qs[0], qs[1], qs[2], BoundaryPoint.from_complex(center).vector)


def cap_outside_disk(center: complex, radius: float) -> SphericalCap:
    """Spherical cap for {|z - center| > radius} together with infinity."""
    qs = [
        BoundaryPoint.from_complex(center + radius * cmath.exp(2j * math.pi * k / 3)).vector
        for k in range(3)
    ]
    return cap_through(qs[0], qs[1], qs[2], BoundaryPoint.infinity().vector)


def farthest_point(cap: SphericalCap, target: BoundaryPoint) -> BoundaryPoint:
    """Point of ``cap`` farthest from ``target`` along the connecting great circle."""
    c = cap.center.vector
    t = target.vector
    d = boundary_distance(cap.center, target)
    axis = c - math.cos(d) * t
    nrm = np.linalg.norm(axis)
    if nrm < 1e-15:
        axis, _ = _tangent_basis(t)
    else:
        axis = axis / nrm
    ang = min(d + cap.radius, math.pi)
    return BoundaryPoint.from_vector(math.cos(ang) * t + math.sin(ang) * axis)


# --------------------------------------------------------------------------
# batched versions (arrays of shape (N, 2, 2) and points of shape (N, 3))

TYPE_CODES = {
    IsometryType.IDENTITY: 0,
    IsometryType.ELLIPTIC: 1,
    IsometryType.PARABOLIC: 2,
    IsometryType.LOXODROMIC: 3,
}
CODE_TYPES = {v: k for k, v in TYPE_CODES.items()}


def batch_normalize(m: np.ndarray) -> np.ndarray:
    det = m[:, 0, 0] * m[:, 1, 1] - m[:, 0, 1] * m[:, 1, 0]
    scale = np.abs(m.reshape(-1, 4)).max(axis=1)
    drift = np.abs(det - 1) > _DET_NOISE * scale**2
    det = np.where((scale**2 <= _DET_RELIABLE) & (det != 0) & drift, det, 1.0)
    m = m / np.sqrt(det)[:, None, None]
    flat = m.reshape(-1, 4)
    scale = np.abs(flat).max(axis=1)
    sign = np.zeros(len(flat))
    for k in range(4):
        x = flat[:, k]
        live = (sign == 0) & (np.abs(x) > _SIGN_EPS * scale)
        use_re = np.abs(x.real) > _SIGN_EPS * scale
        s = np.where(use_re, np.where(x.real < 0, -1.0, 1.0), np.where(x.imag < 0, -1.0, 1.0))
        sign = np.where(live, s, sign)
    sign[sign == 0] = 1.0
    return m * sign[:, None, None]


def batch_identity_distance(m: np.ndarray) -> np.ndarray:
    eye = np.eye(2)[None]
    d1 = np.linalg.norm((m - eye).reshape(-1, 4), axis=1)
    d2 = np.linalg.norm((m + eye).reshape(-1, 4), axis=1)
    return np.minimum(d1, d2)


def batch_from_homogeneous(u: np.ndarray, w: np.ndarray) -> np.ndarray:
    uu = np.abs(u) ** 2
    ww = np.abs(w) ** 2
    cross = u * np.conj(w)
    n = uu + ww
    return np.stack([2 * cross.real / n, 2 * cross.imag / n, (uu - ww) / n], axis=1)


def batch_homogeneous(p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    south = p[:, 2] <= 0
    u = np.where(south, p[:, 0] + 1j * p[:, 1], 1.0 + p[:, 2])
    w = np.where(south, 1.0 - p[:, 2], p[:, 0] - 1j * p[:, 1])
    return u.astype(complex), w.astype(complex)


def batch_apply(m: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Apply m[i] to p[i] (or a single point broadcast across m)."""
    p = np.broadcast_to(p, (len(m), 3))
    u, w = batch_homogeneous(p)
    return batch_from_homogeneous(m[:, 0, 0] * u + m[:, 0, 1] * w, m[:, 1, 0] * u + m[:, 1, 1] * w)


def _batch_eigvec(m: np.ndarray, lam: np.ndarray) -> np.ndarray:
    a, b, c, d = m[:, 0, 0], m[:, 0, 1], m[:, 1, 0], m[:, 1, 1]
    u1, w1 = b, lam - a
    u2, w2 = lam - d, c
    first = (np.abs(u1) + np.abs(w1)) >= (np.abs(u2) + np.abs(w2))
    return batch_from_homogeneous(np.where(first, u1, u2), np.where(first, w1, w2))


def batch_classify(m: np.ndarray, tol: float = TAU_CLASS) -> np.ndarray:
    tr = m[:, 0, 0] + m[:, 1, 1]
    t2 = tr * tr
    ttol = np.maximum(tol, _TRACE_NOISE * np.abs(m.reshape(-1, 4)).max(axis=1))
    codes = np.full(len(m), TYPE_CODES[IsometryType.LOXODROMIC], dtype=np.int8)
    ell = (np.abs(t2.imag) <= ttol) & (t2.real >= 0) & (t2.real < 4)
    codes[ell] = TYPE_CODES[IsometryType.ELLIPTIC]
    codes[np.abs(t2 - 4) <= ttol] = TYPE_CODES[IsometryType.PARABOLIC]
    codes[batch_identity_distance(m) <= tol] = TYPE_CODES[IsometryType.IDENTITY]
    return codes


def batch_limit_data(m: np.ndarray, tol: float = TAU_CLASS) -> tuple[np.ndarray, np.ndarray]:
    """Types and attracting-or-parabolic fixed points (NaN rows otherwise)."""
    codes = batch_classify(m, tol)
    tr = m[:, 0, 0] + m[:, 1, 1]
    disc = np.sqrt(tr * tr - 4)
    l1 = (tr + disc) / 2
    l2 = (tr - disc) / 2
    big = np.where(np.abs(l1) >= np.abs(l2), l1, l2)
    par = codes == TYPE_CODES[IsometryType.PARABOLIC]
    lam = np.where(par, tr / 2, big)
    with np.errstate(invalid="ignore", divide="ignore"):
        pts = _batch_eigvec(m, lam)
    keep = par | (codes == TYPE_CODES[IsometryType.LOXODROMIC])
    pts[~keep] = np.nan
    return codes, pts


def batch_distance(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    cross = np.linalg.norm(np.cross(p, q), axis=-1)
    dot = np.sum(p * q, axis=-1)
    return np.arctan2(cross, dot)
