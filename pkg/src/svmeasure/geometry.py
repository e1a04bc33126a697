"""Homogeneous 2D primitives: points and lines as 3-vectors.

Points and lines share one representation and are told apart by context
(duality). A finite point (x, y) is any vector with nonzero third
component; after dividing it out, the first two components are pixels.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInput, DegenerateLine, NotFinite, ZeroVector

# Relative threshold below which the third component counts as zero,
# i.e. the vector is an ideal point / the line at infinity.
IDEAL_EPS = 1e-12

# Absolute threshold for the all-zero test (homogeneous scale is
# arbitrary, so this is the only absolute tolerance in the module).
ZERO_EPS = 1e-12

# Relative tolerance of projective equality.
EQUAL_EPS = 1e-12


@dataclass(frozen=True)
class Homog3:
    """Homogeneous 3-vector, interpreted as a 2D point or a 2D line."""

    a: float
    b: float
    c: float

    def __post_init__(self):
        if max(abs(self.a), abs(self.b), abs(self.c)) < ZERO_EPS:
            raise ZeroVector("all components are (near) zero")

    @classmethod
    def point(cls, x: float, y: float) -> "Homog3":
        return cls(float(x), float(y), 1.0)

    @classmethod
    def from_vec(cls, v) -> "Homog3":
        return cls(float(v[0]), float(v[1]), float(v[2]))

    @property
    def vec(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c], dtype=float)

    def is_ideal(self) -> bool:
        """True for points at infinity (dually: the line at infinity)."""
        return abs(self.c) <= IDEAL_EPS * float(np.linalg.norm(self.vec))

    def xy(self) -> tuple[float, float]:
        """Inhomogeneous pixel coordinates of a finite point."""
        if self.is_ideal():
            raise NotFinite("ideal point has no pixel coordinates")
        return self.a / self.c, self.b / self.c


def cross(p: Homog3, q: Homog3) -> Homog3:
    """Join of two points (the line through them) or meet of two lines.

    Raises DegenerateInput when the operands are projectively equal and
    the product would collapse to the zero vector.
    """
    r = np.cross(p.vec, q.vec)
    norms = np.linalg.norm(p.vec) * np.linalg.norm(q.vec)
    if np.linalg.norm(r) <= EQUAL_EPS * norms:
        raise DegenerateInput("operands are projectively equal")
    return Homog3.from_vec(r)


def projectively_equal(p: Homog3, q: Homog3, tol: float = EQUAL_EPS) -> bool:
    r = np.cross(p.vec, q.vec)
    return float(np.linalg.norm(r)) <= tol * float(np.linalg.norm(p.vec)) * float(
        np.linalg.norm(q.vec)
    )


def normalize(x: Homog3) -> Homog3:
    """Canonical representative of the projective class of ``x``.

    Finite vectors are scaled to third component 1. Ideal vectors are
    scaled to unit Euclidean norm with the first nonzero component
    positive, so a canonical form exists for every input.
    """
    v = x.vec
    n = float(np.linalg.norm(v))
    if n < ZERO_EPS:
        raise ZeroVector("cannot normalize the zero vector")
    if abs(v[2]) > IDEAL_EPS * n:
        return Homog3.from_vec(v / v[2])
    u = v / n
    for comp in u:
        if comp != 0.0:
            if comp < 0.0:
                u = -u
            break
    return Homog3.from_vec(u)


def incidence_residual(p: Homog3, line: Homog3) -> float:
    """Perpendicular distance in pixels from a finite point to a line."""
    if p.is_ideal():
        raise NotFinite("point at infinity has no distance to a line")
    lv = line.vec
    ab = float(np.hypot(lv[0], lv[1]))
    if ab <= ZERO_EPS * float(np.linalg.norm(lv)):
        raise DegenerateLine("line at infinity")
    x, y = p.xy()
    return abs(lv[0] * x + lv[1] * y + lv[2]) / ab


_EPS = float(np.finfo(float).eps)


def _raw_foot(x: float, y: float, a: float, b: float, c: float) -> tuple[float, float]:
    ab2 = a * a + b * b
    t = (a * x + b * y + c) / ab2
    fx = x - a * t
    fy = y - b * t
    # Coordinates that are pure cancellation debris collapse to exact
    # zero, so reprojecting the foot cannot wander.
    if abs(fx) <= 64.0 * _EPS * (abs(x) + abs(a * t)):
        fx = 0.0
    if abs(fy) <= 64.0 * _EPS * (abs(y) + abs(b * t)):
        fy = 0.0
    return fx, fy


def project_onto_line(p: Homog3, line: Homog3) -> Homog3:
    """Foot of the perpendicular from a finite point onto a line.

    Exactly idempotent: a point already incident within floating-point
    noise is returned unchanged, and a computed foot is iterated to a
    bitwise fixed point of the projection.
    """
    if p.is_ideal():
        raise NotFinite("cannot project an ideal point")
    lv = line.vec
    if np.hypot(lv[0], lv[1]) <= ZERO_EPS * float(np.linalg.norm(lv)):
        raise DegenerateLine("line at infinity has no Euclidean foot")
    lv = lv / np.linalg.norm(lv)
    a, b, c = float(lv[0]), float(lv[1]), float(lv[2])
    x, y = p.xy()
    # Noise floor of the residual itself: below it the point is on the
    # line as far as doubles can tell.
    floor = 32.0 * _EPS * (abs(a * x) + abs(b * y) + abs(c))
    if abs(a * x + b * y + c) <= floor:
        return p
    prev = (x, y)
    cur = _raw_foot(x, y, a, b, c)
    for _ in range(8):
        nxt = _raw_foot(cur[0], cur[1], a, b, c)
        if nxt == cur:
            break
        if nxt == prev:
            cur = min(cur, nxt)
            break
        prev, cur = cur, nxt
    return Homog3.point(cur[0], cur[1])
