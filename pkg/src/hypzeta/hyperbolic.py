"""Moebius maps on the upper half plane, trace/length conversion, cusp model.

Matrices are real 2x2 with unit determinant.  A map and its negative act
identically on the half plane, so equality and hashing use a sign-canonical
representative (projective classes).  The hyperbolic area form is
dx dy / y^2; the normalized volume divides the area by 2 pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from scipy import integrate

from .errors import ConvergenceError

#: determinant drift allowed after renormalization
DET_TOL = 1e-12

#: default half-width of the parabolic band around |trace| = 2
PARABOLIC_TOL = 1e-10


class ElementType(Enum):
    IDENTITY = "identity"
    PARABOLIC = "parabolic"
    ELLIPTIC = "elliptic"
    HYPERBOLIC = "hyperbolic"


class MoebiusMap:
    """A projective class of unit-determinant real 2x2 matrices.

    The optional ``word`` records the map as a product of group generators:
    a tuple of signed indices, ``k`` for generator ``k`` and ``-k`` for its
    inverse (1-based).
    """

    __slots__ = ("a", "b", "c", "d", "word")

    def __init__(self, a: float, b: float, c: float, d: float,
                 word: tuple[int, ...] | None = None):
        det = a * d - b * c
        if not math.isfinite(det) or det <= 0.0:
            raise ValueError(f"matrix determinant must be positive, got {det}")
        if abs(det - 1.0) > 1e-15:
            r = math.sqrt(det)
            a, b, c, d = a / r, b / r, c / r, d / r
        if abs(a * d - b * c - 1.0) > DET_TOL:
            raise ValueError("determinant renormalization failed")
        self.a, self.b, self.c, self.d = a, b, c, d
        self.word = word

    @classmethod
    def identity(cls) -> "MoebiusMap":
        return cls(1.0, 0.0, 0.0, 1.0, word=())

    @classmethod
    def from_rows(cls, rows, word=None) -> "MoebiusMap":
        (a, b), (c, d) = rows
        return cls(float(a), float(b), float(c), float(d), word=word)

    # -- projective canonical form ------------------------------------

    def _canonical_entries(self) -> tuple[float, float, float, float]:
        for x in (self.a, self.b, self.c, self.d):
            if x != 0.0:
                if x < 0.0:
                    return (-self.a, -self.b, -self.c, -self.d)
                break
        return (self.a, self.b, self.c, self.d)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MoebiusMap):
            return NotImplemented
        return self._canonical_entries() == other._canonical_entries()

    def __hash__(self) -> int:
        return hash(self._canonical_entries())

    def isclose(self, other: "MoebiusMap", tol: float = 1e-12) -> bool:
        p = self._canonical_entries()
        q = other._canonical_entries()
        return max(abs(x - y) for x, y in zip(p, q)) <= tol

    def __repr__(self) -> str:
        return (f"MoebiusMap([[{self.a:.12g}, {self.b:.12g}], "
                f"[{self.c:.12g}, {self.d:.12g}]])")

    # -- group structure ----------------------------------------------

    def inverse(self) -> "MoebiusMap":
        word = None
        if self.word is not None:
            word = tuple(-x for x in reversed(self.word))
        return MoebiusMap(self.d, -self.b, -self.c, self.a, word=word)

    @property
    def trace(self) -> float:
        return self.a + self.d

    @property
    def abs_trace(self) -> float:
        return abs(self.a + self.d)

    def __matmul__(self, other: "MoebiusMap") -> "MoebiusMap":
        return compose(self, other)


def compose(m1: MoebiusMap, m2: MoebiusMap) -> MoebiusMap:
    """Matrix product with determinant renormalization and word concatenation."""
    a = m1.a * m2.a + m1.b * m2.c
    b = m1.a * m2.b + m1.b * m2.d
    c = m1.c * m2.a + m1.d * m2.c
    d = m1.c * m2.b + m1.d * m2.d
    word = None
    if m1.word is not None and m2.word is not None:
        word = m1.word + m2.word
    return MoebiusMap(a, b, c, d, word=word)


def classify(m: MoebiusMap, tol: float = PARABOLIC_TOL) -> ElementType:
    """Type of an isometry from its trace.

    Hyperbolic iff |tr| > 2 + tol, elliptic iff |tr| < 2 - tol, otherwise
    parabolic; inside the parabolic band, matrices that equal +-identity
    entrywise (within tol) report as the identity.
    """
    t = m.abs_trace
    if t > 2.0 + tol:
        return ElementType.HYPERBOLIC
    if t < 2.0 - tol:
        return ElementType.ELLIPTIC
    for s in (1.0, -1.0):
        if (abs(m.a - s) <= tol and abs(m.d - s) <= tol
                and abs(m.b) <= tol and abs(m.c) <= tol):
            return ElementType.IDENTITY
    return ElementType.PARABOLIC


def trace_to_length(abs_trace: float) -> float:
    """Translation length 2*arccosh(|tr|/2) of a hyperbolic isometry.

    Raises ValueError for |tr| <= 2 (parabolic or elliptic input).
    """
    if not abs_trace > 2.0:
        raise ValueError(
            f"|trace| = {abs_trace} is not hyperbolic (need |trace| > 2)")
    return 2.0 * math.acosh(abs_trace / 2.0)


def length_to_trace(length: float) -> float:
    """Inverse of :func:`trace_to_length`."""
    if length <= 0.0:
        raise ValueError("length must be positive")
    return 2.0 * math.cosh(length / 2.0)


@dataclass(frozen=True)
class SurfaceSignature:
    """Genus and puncture count of a finite-type hyperbolic surface.

    Construction enforces stability, 2g - 2 + n > 0.
    """

    g: int
    n: int

    def __post_init__(self):
        if self.g < 0 or self.n < 0:
            raise ValueError("genus and puncture count must be non-negative")
        if 2 * self.g - 2 + self.n <= 0:
            raise ValueError(
                f"unstable signature (g, n) = ({self.g}, {self.n}): "
                "need 2g - 2 + n > 0")

    @property
    def stable(self) -> bool:
        return True

    @property
    def euler_weight(self) -> int:
        """2g - 2 + n, the normalized hyperbolic volume."""
        return 2 * self.g - 2 + self.n

    @property
    def free_rank(self) -> int:
        """Generator count of a free presentation (2g + n - 1 for n >= 1)."""
        return 2 * self.g + max(self.n - 1, 0)


@dataclass(frozen=True)
class CuspModelPoint:
    """Point of the punctured-disc cusp model, 0 < |z| < 1."""

    z: complex

    def __post_init__(self):
        r = abs(self.z)
        if not 0.0 < r < 1.0:
            raise ValueError(
                f"cusp model point needs 0 < |z| < 1, got |z| = {r}")


def cusp_density(p: CuspModelPoint) -> float:
    """Length density 1 / (|z| log(1/|z|)) of the punctured-disc model."""
    r = abs(p.z)
    return 1.0 / (r * math.log(1.0 / r))


def modular_area_quadrature(rel_tol: float, *, level2: bool = True,
                            tail_height: float = 2.0) -> float:
    """Hyperbolic area of the standard level-2 fundamental domain.

    The domain is {|Re z| <= 1, |z - 1/2| >= 1/2, |z + 1/2| >= 1/2, Im z > 0},
    a once-punctured ideal region uniformizing the thrice-punctured sphere
    (g, n) = (0, 3).  Vertical strips are integrated adaptively in x; for each
    x the inner integral of dy / y^2 from the boundary circle up to Y is
    exact, and the cusp tail above Y contributes exactly (width)/Y = 2/Y.

    Returns the area, which should equal 2 pi (normalized volume 1).
    Raises ConvergenceError when the x quadrature cannot certify rel_tol.
    """
    if not level2:
        raise ValueError("only the level-2 fundamental domain is supported")
    if not 0.0 < rel_tol <= 1e-2:
        raise ValueError(f"rel_tol must lie in (0, 1e-2], got {rel_tol}")
    if tail_height <= 0.5:
        raise ValueError("tail height must clear the boundary circles (> 1/2)")

    y_cap = tail_height

    def strip(x: float) -> float:
        # lower boundary: circle of radius 1/2 centered at 1/2 (x in [0, 1])
        y_min = math.sqrt(x * (1.0 - x))
        return 1.0 / y_min - 1.0 / y_cap

    # the domain is symmetric in x -> -x; integrate [0, 1] and double
    val, abserr = integrate.quad(strip, 0.0, 1.0, epsabs=0.0,
                                 epsrel=rel_tol * 1e-2, limit=400)
    area = 2.0 * val + 2.0 / y_cap
    if abserr > rel_tol * abs(area):
        raise ConvergenceError(
            f"area quadrature reached {abserr:.3e} absolute, needed "
            f"{rel_tol:.3e} relative", achieved=area)
    return area
