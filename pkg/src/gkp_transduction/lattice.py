"""GKP lattices and the number theory of beam-splitter lattice matching.

A code is a dimension ``d`` plus a unit-determinant 2x2 basis matrix ``S``;
its stabilizer displacements are the rows of ``sqrt(2*pi*d) * S``.  Everything
about matching two codes to a beam splitter of efficiency ``m/n`` is integer
arithmetic, so the matched quantities that matter (rectangle ratios, output
dimensions, logical scalars) are kept as ``int``/``Fraction`` and the float
matrices are derived from them.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .errors import (
    BadFactors,
    GainUndefined,
    NonSymplectic,
    NotCoprime,
    NotFactorizable,
    NotFound,
    ZeroCoupling,
)

DET_TOL = 1e-9


def omega(u, v) -> float:
    """Symplectic form u_q v_p - u_p v_q (oriented parallelogram area)."""
    return float(u[0] * v[1] - u[1] * v[0])


def _egcd(a: int, b: int) -> tuple[int, int, int]:
    """Return ``(g, x, y)`` with ``a*x + b*y == g == gcd(a, b)``."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def _divisors(x: int) -> list[int]:
    small, large = [], []
    i = 1
    while i * i <= x:
        if x % i == 0:
            small.append(i)
            if i * i != x:
                large.append(x // i)
        i += 1
    return small + large[::-1]


@functools.total_ordering
@dataclass(frozen=True)
class RationalEfficiency:
    """Beam-splitter efficiency ``m/n`` in lowest terms with ``0 < m < n``."""

    m: int
    n: int

    def __post_init__(self):
        if not (0 < self.m < self.n):
            raise ValueError(f"need 0 < m < n, got {self.m}/{self.n}")
        if math.gcd(self.m, self.n) != 1:
            raise NotCoprime(f"{self.m}/{self.n} is not in lowest terms")

    @property
    def value(self) -> float:
        return self.m / self.n

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.m, self.n)

    @classmethod
    def from_fraction(cls, f: Fraction) -> "RationalEfficiency":
        f = Fraction(f)
        return cls(f.numerator, f.denominator)

    @classmethod
    def parse(cls, text: str) -> "RationalEfficiency":
        """Parse ``"m/n"``.  The fraction must already be reduced."""
        num, _, den = text.partition("/")
        if not den:
            raise ValueError(f"expected m/n, got {text!r}")
        return cls(int(num), int(den))

    def __str__(self) -> str:
        return f"{self.m}/{self.n}"

    def __lt__(self, other: "RationalEfficiency") -> bool:
        if not isinstance(other, RationalEfficiency):
            return NotImplemented
        return self.m * other.n < other.m * self.n


@dataclass(frozen=True, eq=False)
class GkpCode:
    """A ``d``-dimensional GKP code with normalized lattice basis ``S``.

    ``u`` and ``v`` are the X- and Z-stabilizer displacement vectors
    ``(q, p)``; logical X and Z displace by ``u/d`` and ``v/d``.
    """

    d: int
    S: np.ndarray
    u: np.ndarray = field(init=False)
    v: np.ndarray = field(init=False)

    def __post_init__(self):
        S = np.array(self.S, dtype=float).reshape(2, 2)
        S.flags.writeable = False
        rows = math.sqrt(2 * math.pi * self.d) * S
        u, v = rows[0].copy(), rows[1].copy()
        u.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    @property
    def omega(self) -> float:
        return omega(self.u, self.v)

    @property
    def is_rectangle(self) -> bool:
        return self.S[0, 1] == 0 and self.S[1, 0] == 0 and self.S[0, 0] > 0

    @property
    def r(self) -> float:
        """Squeezing parameter of a rectangle lattice, ``S = diag(sqrt r, 1/sqrt r)``."""
        if not self.is_rectangle:
            raise ValueError("code lattice is not a rectangle")
        return float(self.S[0, 0] ** 2)

    @classmethod
    def rectangle(cls, d: int, r: float = 1.0) -> "GkpCode":
        return make_code(d, np.diag([math.sqrt(r), 1 / math.sqrt(r)]))

    def same_lattice(self, other: "GkpCode", tol: float = 1e-10) -> bool:
        return self.d == other.d and np.allclose(self.S, other.S, atol=tol, rtol=0)

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "S": [float(x) for x in self.S.ravel()],
            "u": [float(x) for x in self.u],
            "v": [float(x) for x in self.v],
        }

    def __repr__(self) -> str:
        return f"GkpCode(d={self.d}, S={self.S.tolist()})"


def make_code(d: int, S) -> GkpCode:
    """Build a code from its dimension and unit-determinant basis matrix."""
    if int(d) != d or d < 1:
        raise ValueError(f"code dimension must be a positive integer, got {d!r}")
    S = np.asarray(S, dtype=float).reshape(2, 2)
    det = float(np.linalg.det(S))
    if abs(det - 1) > DET_TOL:
        raise NonSymplectic(f"det(S) = {det!r}, expected 1")
    return GkpCode(int(d), S)


def _diag_scale(ratio: Fraction, S: np.ndarray) -> np.ndarray:
    """``diag(sqrt(ratio), 1/sqrt(ratio)) @ S``."""
    s = math.sqrt(ratio.numerator / ratio.denominator)
    return np.diag([s, 1 / s]) @ S


class Factorization(NamedTuple):
    m1: int
    m2: int
    k1: int
    k2: int


@dataclass(frozen=True, eq=False)
class MatchedPair:
    """A complete matching instance for efficiency ``eta = m/n``.

    ``code2`` is ``code1`` rescaled by the rectangle ratio ``scale2`` (exact),
    and the outputs live in codes of dimension ``d1*n`` and ``d2*n`` with
    ratios ``scale3``/``scale4`` relative to ``code1``.  The logical scalars
    are the raw extended-Euclid choice; reduce them mod ``d1``/``d2`` for
    display.
    """

    eta: RationalEfficiency
    d1: int
    d2: int
    k: int
    m1: int
    m2: int
    k1: int
    k2: int
    code1: GkpCode
    code2: GkpCode
    code3: GkpCode
    code4: GkpCode
    alpha1: int
    alpha2: int
    beta1: int
    beta2: int

    @property
    def m(self) -> int:
        return self.eta.m

    @property
    def n(self) -> int:
        return self.eta.n

    @property
    def d3(self) -> int:
        return self.code3.d

    @property
    def d4(self) -> int:
        return self.code4.d

    @property
    def factors(self) -> Factorization:
        return Factorization(self.m1, self.m2, self.k1, self.k2)

    @property
    def scale2(self) -> Fraction:
        """S2 = diag(sqrt(x), 1/sqrt(x)) S1 with x = k2 m1 / (k1 m2)."""
        return Fraction(self.k2 * self.m1, self.k1 * self.m2)

    @property
    def scale3(self) -> Fraction:
        return Fraction(self.m1, self.m2)

    @property
    def scale4(self) -> Fraction:
        return Fraction(self.k2, self.k1)

    def output_scales_consistent(self) -> bool:
        """Both expressions for S3 and S4 (via S1 and via S2) agree exactly."""
        via2_3 = Fraction(self.k1, self.k2) * self.scale2
        via2_4 = Fraction(self.m2, self.m1) * self.scale2
        return via2_3 == self.scale3 and via2_4 == self.scale4

    def to_dict(self) -> dict:
        return {
            "eta": {"m": self.m, "n": self.n},
            "d1": self.d1,
            "d2": self.d2,
            "k": self.k,
            "factors": self.factors._asdict(),
            "code1": self.code1.to_dict(),
            "code2": self.code2.to_dict(),
            "code3": self.code3.to_dict(),
            "code4": self.code4.to_dict(),
            "scalars": {
                "alpha1": self.alpha1 % self.d1,
                "alpha2": self.alpha2 % self.d2,
                "beta1": self.beta1 % self.d1,
                "beta2": self.beta2 % self.d2,
            },
        }


def match_codes(
    eta: RationalEfficiency,
    d1: int,
    d2: int,
    m1: int,
    m2: int,
    k1: int,
    k2: int,
    S1=None,
) -> MatchedPair:
    """Build the matched input/output codes for ``eta = m/n``.

    Requires ``n = m1*m2 + k1*k2*d1*d2``.  ``S1`` defaults to the square
    lattice.
    """
    m, n = eta.m, eta.n
    if math.gcd(m, n) != 1:
        raise NotCoprime(f"gcd({m}, {n}) != 1")
    if (n - m) % (d1 * d2):
        raise NotFactorizable(f"n - m = {n - m} is not divisible by d1*d2 = {d1 * d2}")
    k = (n - m) // (d1 * d2)
    if m1 * m2 != m:
        raise BadFactors(f"m1*m2 = {m1 * m2} != m = {m}")
    if k1 * k2 != k:
        raise BadFactors(f"k1*k2 = {k1 * k2} != k = {k}")
    if min(m1, m2, k1, k2) < 1:
        raise BadFactors("factors must be positive")

    code1 = make_code(d1, np.eye(2) if S1 is None else S1)
    S1 = code1.S
    code2 = make_code(d2, _diag_scale(Fraction(k2 * m1, k1 * m2), S1))
    code3 = make_code(d1 * n, _diag_scale(Fraction(m1, m2), S1))
    code4 = make_code(d2 * n, _diag_scale(Fraction(k2, k1), S1))

    _, a, b = _egcd(m, n)
    return MatchedPair(
        eta=eta,
        d1=d1,
        d2=d2,
        k=k,
        m1=m1,
        m2=m2,
        k1=k1,
        k2=k2,
        code1=code1,
        code2=code2,
        code3=code3,
        code4=code4,
        alpha1=(a + b) * m2,
        alpha2=(a + b) * m1,
        beta1=(a + b) * m1,
        beta2=(a + b) * m2,
    )


def factorizations(m: int, k: int) -> list[Factorization]:
    """All splittings ``m = m1*m2``, ``k = k1*k2`` ordered by ``(m1, k1)``."""
    return [
        Factorization(m1, m // m1, k1, k // k1)
        for m1 in _divisors(m)
        for k1 in _divisors(k)
    ]


def enumerate_matchings(
    eta: RationalEfficiency, max_d1: int, max_d2: int
) -> list[tuple[int, int, list[Factorization]]]:
    """Every ``(d1, d2)`` admitting a matching at ``eta``, with all factor splittings.

    Ordered lexicographically by ``(d1, d2)``, and within each entry by
    ``(m1, k1)``.  For ``eta = (n-1)/n`` only ``(1, 1)`` survives.
    """
    m, n = eta.m, eta.n
    out = []
    for d1 in range(1, max_d1 + 1):
        for d2 in range(1, max_d2 + 1):
            if (n - m) % (d1 * d2) == 0:
                k = (n - m) // (d1 * d2)
                out.append((d1, d2, factorizations(m, k)))
    return out


def peak_efficiencies(a_max: int, b_max: int) -> list[RationalEfficiency]:
    """Efficiencies matched by the (d1, d2) = (2, 1) square-lattice encoding.

    ``eta = (2a+1)^2 / ((2a+1)^2 + 2 b^2)`` for ``0 <= a <= a_max``,
    ``1 <= b <= b_max`` and ``gcd(b, 2a+1) == 1``; sorted by value.
    """
    found = set()
    for a in range(a_max + 1):
        odd = 2 * a + 1
        for b in range(1, b_max + 1):
            if math.gcd(b, odd) != 1:
                continue
            found.add(Fraction(odd * odd, odd * odd + 2 * b * b))
    return [RationalEfficiency.from_fraction(f) for f in sorted(found)]


def rational_approx(eta: float, d: int, n_max: int) -> tuple[int, int]:
    """Smallest-denominator ``m/n`` with ``m = n = 1 (mod d)`` close to ``eta``.

    The closeness requirement is ``|eta - m/n| < d**2 / (4 n**2)``; among the
    admissible numerators for the first qualifying ``n`` the one nearest
    ``eta*n`` wins.  Raises :class:`NotFound` when nothing qualifies up to
    ``n_max``.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    if not 0 < eta < 1:
        raise ValueError("eta must lie in (0, 1)")
    start = d + 1 if d > 1 else 2
    for n in range(start, n_max + 1):
        if n % d != 1 % d:
            continue
        bound = d * d / (4 * n * n)
        # admissible numerators are 1 + j*d; scan the few inside the window
        lo = math.ceil((eta - bound) * n - 1e-12)
        hi = math.floor((eta + bound) * n + 1e-12)
        best = None
        for m in range(max(lo, 1), min(hi, n - 1) + 1):
            if m % d != 1 % d or math.gcd(m, n) != 1:
                continue
            err = abs(eta - m / n)
            if err < bound and (best is None or err < best[0]):
                best = (err, m)
        if best is not None:
            return best[1], n
    raise NotFound(f"no admissible m/n for eta={eta!r}, d={d} with n <= {n_max}")


def sweep_step(eta: float, nbar: float) -> float:
    """Efficiency step that keeps a finite-energy state's change small."""
    return math.sqrt(eta * (1 - eta)) / nbar


def _reflect(w: np.ndarray) -> np.ndarray:
    return np.array([w[0], -w[1]])


@dataclass(frozen=True, eq=False)
class SqueezerMatching:
    gain: Fraction
    code1: GkpCode
    code2: GkpCode
    swapped: bool


def tmss_matching(
    m: int,
    k: int,
    d1: int,
    d2: int,
    m1: int,
    m2: int,
    k1: int,
    k2: int,
    S2=None,
    swapped: bool = False,
) -> SqueezerMatching:
    """Matched codes for two-mode squeezing (or its swapped variant).

    Mode 2 uses ``S2`` (square by default); mode 1 is built from the reflected
    mode-2 vectors.  Both variants share the lattice scaling
    ``sqrt(m / (k d1 d2))``; only the gain differs.
    """
    kdd = k * d1 * d2
    if m1 * m2 != m or k1 * k2 != k:
        raise BadFactors("need m = m1*m2 and k = k1*k2")
    if math.gcd(m, kdd) != 1:
        raise NotCoprime(f"gcd(m, k d1 d2) = gcd({m}, {kdd}) != 1")
    denom = kdd - m if swapped else m - kdd
    if denom <= 0:
        raise GainUndefined(f"gain denominator {denom} <= 0")
    gain = Fraction(kdd if swapped else m, denom)

    code2 = make_code(d2, np.eye(2) if S2 is None else S2)
    scale = math.sqrt(m / kdd)
    u1 = d1 * k1 / m1 * scale * _reflect(code2.u)
    v1 = -d1 * k2 / m2 * scale * _reflect(code2.v)
    S1 = np.vstack([u1, v1]) / math.sqrt(2 * math.pi * d1)
    return SqueezerMatching(gain, make_code(d1, S1), code2, swapped)


def qnd_matching(eta: float, d: int) -> tuple[GkpCode, GkpCode]:
    """Rectangle codes transmitted perfectly in both directions by a QND gate."""
    if eta == 0:
        raise ZeroCoupling("QND coupling must be nonzero")
    x = abs(eta) / d
    S1 = np.diag([1 / math.sqrt(x), math.sqrt(x)])
    S2 = np.diag([math.sqrt(x), 1 / math.sqrt(x)])
    return make_code(d, S1), make_code(d, S2)
