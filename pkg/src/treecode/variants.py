"""Number-theoretic tree-code variants over three coefficient domains.

The evaluation map z_i = sum_j b_j * [i, j]_q generalizes the binomial
transform: the Gaussian binomial [r, s]_q obeys the lattice-path recurrence
[r, s] = [r-1, s-1] + q^s [r-1, s], so the machinery runs in any commutative
ring once the per-column weight q^s is supplied.  Three instantiations:

  * symbolic      -- exact polynomials in an indeterminate q
  * cyclotomic    -- q a primitive prime-order root of unity, exact in Z[zeta]
  * unit circle   -- q = e^(2*pi*I*theta) for an algebraic irrational theta,
                     in fixed-point complex arithmetic (plain multiples of
                     theta, or square multiples via per-column points)

All variants are encode-only; no decoder exists for them here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import mpmath

from treecode.lgv import BudgetExceeded, IndexPairSelection


class PrecisionUnderflow(ValueError):
    """Requested precision is too small to carry the computation."""


# ---------------------------------------------------------------------------
# Exact integer polynomials in q

class QPoly:
    """Dense integer polynomial, lowest degree first, canonical (no trailing zeros)."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence[int] = ()):
        cs = list(coeffs)
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)

    @classmethod
    def const(cls, v: int) -> "QPoly":
        return cls((v,))

    @classmethod
    def monomial(cls, degree: int, coeff: int = 1) -> "QPoly":
        return cls((0,) * degree + (coeff,))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1  # -1 for the zero polynomial

    def is_zero(self) -> bool:
        return not self.coeffs

    def __add__(self, other):
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, v in enumerate(b):
            out[i] += v
        return QPoly(out)

    def __neg__(self):
        return QPoly(tuple(-v for v in self.coeffs))

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, int):
            return QPoly(tuple(v * other for v in self.coeffs))
        if self.is_zero() or other.is_zero():
            return QPoly()
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return QPoly(out)

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, QPoly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __call__(self, q: int) -> int:
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * q + c
        return acc

    def __repr__(self):
        return f"QPoly({list(self.coeffs)})"


# ---------------------------------------------------------------------------
# Cyclotomic integers Z[zeta_ell], ell prime, power basis 1..zeta^(ell-2)

def _is_small_prime(v: int) -> bool:
    if v < 2:
        return False
    if v < 4:
        return True
    if v % 2 == 0:
        return False
    f = 3
    while f * f <= v:
        if v % f == 0:
            return False
        f += 2
    return True


def smallest_prime_above(bound: int) -> int:
    """Smallest prime strictly greater than bound, by exhaustive search."""
    v = bound + 1
    while not _is_small_prime(v):
        v += 1
    return v


class CyclotomicElement:
    """Element of Z[x]/(1 + x + ... + x^(ell-1)) for prime ell."""

    __slots__ = ("ell", "coeffs")

    def __init__(self, ell: int, coeffs: Sequence[int]):
        if not _is_small_prime(ell):
            raise ValueError(f"conductor {ell} must be prime")
        cs = list(coeffs)
        if len(cs) > ell - 1:
            raise ValueError("coefficient vector too long")
        cs += [0] * (ell - 1 - len(cs))
        self.ell = ell
        self.coeffs = tuple(cs)

    @classmethod
    def from_int(cls, ell: int, v: int) -> "CyclotomicElement":
        return cls(ell, (v,))

    @classmethod
    def zeta_power(cls, ell: int, k: int) -> "CyclotomicElement":
        k %= ell
        if k == ell - 1:
            return cls(ell, tuple([-1] * (ell - 1)))
        cs = [0] * (ell - 1)
        cs[k] = 1
        return cls(ell, cs)

    def _check(self, other):
        if self.ell != other.ell:
            raise ValueError("mixed conductors")

    def __add__(self, other):
        self._check(other)
        return CyclotomicElement(self.ell, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self):
        return CyclotomicElement(self.ell, tuple(-a for a in self.coeffs))

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, int):
            return CyclotomicElement(self.ell, tuple(a * other for a in self.coeffs))
        self._check(other)
        ell = self.ell
        # convolve with exponents folded mod ell (zeta^ell = 1)
        full = [0] * ell
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    if b:
                        full[(i + j) % ell] += a * b
        top = full[ell - 1]
        # zeta^(ell-1) = -(1 + zeta + ... + zeta^(ell-2))
        return CyclotomicElement(ell, tuple(full[k] - top for k in range(ell - 1)))

    __rmul__ = __mul__

    def __eq__(self, other):
        return (
            isinstance(other, CyclotomicElement)
            and self.ell == other.ell
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        return hash((self.ell, self.coeffs))

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def to_complex(self) -> complex:
        zeta = complex(math.cos(2 * math.pi / self.ell), math.sin(2 * math.pi / self.ell))
        acc = 0j
        for c in reversed(self.coeffs):
            acc = acc * zeta + c
        return acc

    def __repr__(self):
        return f"CyclotomicElement(ell={self.ell}, coeffs={list(self.coeffs)})"


def cyclotomic_unit(ell: int, k: int) -> CyclotomicElement:
    """(1 - zeta^k) / (1 - zeta) = 1 + zeta + ... + zeta^(k-1)."""
    acc = CyclotomicElement.from_int(ell, 0)
    for j in range(k):
        acc = acc + CyclotomicElement.zeta_power(ell, j)
    return acc


# ---------------------------------------------------------------------------
# Fixed-point complex arithmetic

def _rshift_round(v: int, k: int) -> int:
    # round half away from zero, deterministic for both signs
    if v >= 0:
        return (v + (1 << (k - 1))) >> k
    return -((-v + (1 << (k - 1))) >> k)


class HPComplex:
    """Complex number with both components scaled by 2^prec.

    Addition is exact; each multiplication rounds once per component, so the
    absolute error introduced per operation is below 2^(1-prec).
    """

    __slots__ = ("re", "im", "prec")

    def __init__(self, re: int, im: int, prec: int):
        self.re = re
        self.im = im
        self.prec = prec

    @classmethod
    def from_int(cls, v: int, prec: int) -> "HPComplex":
        return cls(v << prec, 0, prec)

    def _check(self, other):
        if self.prec != other.prec:
            raise ValueError("mixed precisions")

    def __add__(self, other):
        self._check(other)
        return HPComplex(self.re + other.re, self.im + other.im, self.prec)

    def __neg__(self):
        return HPComplex(-self.re, -self.im, self.prec)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, int):
            return HPComplex(self.re * other, self.im * other, self.prec)
        self._check(other)
        k = self.prec
        re = _rshift_round(self.re * other.re - self.im * other.im, k)
        im = _rshift_round(self.re * other.im + self.im * other.re, k)
        return HPComplex(re, im, k)

    __rmul__ = __mul__

    def __eq__(self, other):
        return (
            isinstance(other, HPComplex)
            and self.prec == other.prec
            and self.re == other.re
            and self.im == other.im
        )

    def __hash__(self):
        return hash((self.re, self.im, self.prec))

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def magnitude(self) -> float:
        return math.hypot(self.re, self.im) / 2.0**self.prec

    def to_complex(self) -> complex:
        scale = 2.0**self.prec
        return complex(self.re / scale, self.im / scale)

    def serialize(self) -> dict:
        return {"prec": self.prec, "re": hex(self.re), "im": hex(self.im)}

    @classmethod
    def deserialize(cls, data: dict) -> "HPComplex":
        return cls(int(data["re"], 16), int(data["im"], 16), int(data["prec"]))

    def __repr__(self):
        return f"HPComplex({self.to_complex()!r}, prec={self.prec})"


@dataclass(frozen=True)
class AlgebraicAngle:
    """Real algebraic irrational in (0, 1), as a minimal polynomial plus an
    isolating dyadic interval; expanded to any precision by exact bisection."""

    minpoly: tuple[int, ...]  # ascending coefficients
    lo: Fraction
    hi: Fraction

    def _sign_at(self, num: int, den_log2: int) -> int:
        # sign of minpoly(num / 2^den_log2) via integer arithmetic
        d = len(self.minpoly) - 1
        acc = 0
        for i, c in enumerate(self.minpoly):
            acc += c * num**i * (1 << (den_log2 * (d - i)))
        return (acc > 0) - (acc < 0)

    def _scaled_values(self, s: int, prec: int) -> tuple[int, int]:
        # minpoly and its derivative at s / 2^prec, both scaled by 2^(prec*d)
        d = len(self.minpoly) - 1
        f = 0
        fp = 0
        for i, c in enumerate(self.minpoly):
            f += c * s**i * (1 << (prec * (d - i)))
            if i >= 1:
                fp += i * c * s ** (i - 1) * (1 << (prec * (d - i)))
        return f, fp

    def scaled(self, prec: int) -> int:
        """floor(theta * 2^prec): coarse bisection, then Newton with
        precision doubling, then an exact floor correction."""
        base = min(prec, 64)
        lo_num = math.floor(self.lo * (1 << base))
        hi_num = math.ceil(self.hi * (1 << base))
        sign_lo = self._sign_at(lo_num, base)
        while hi_num - lo_num > 1:
            mid = (lo_num + hi_num) // 2
            sgn = self._sign_at(mid, base)
            if sgn == 0:
                lo_num = hi_num = mid
                break
            if sgn == sign_lo:
                lo_num = mid
            else:
                hi_num = mid
        s, cur = lo_num, base
        while cur < prec:
            step = min(cur, prec - cur)
            s <<= step
            cur += step
            f, fp = self._scaled_values(s, cur)
            if fp != 0:
                # correction f/f' in units of 2^-cur
                s -= round(Fraction(f, fp))
        # pin the exact floor: theta lies in [s/2^prec, (s+1)/2^prec)
        while self._sign_at(s, prec) not in (0, sign_lo):
            s -= 1
        while self._sign_at(s + 1, prec) in (0, sign_lo):
            s += 1
        return s


def golden_section() -> AlgebraicAngle:
    """(sqrt(5) - 1) / 2, the angle that maximizes the smallest circle gap."""
    return AlgebraicAngle(minpoly=(-1, 1, 1), lo=Fraction(1, 2), hi=Fraction(3, 4))


_GUARD_BITS = 64


def unit_circle_point(frac_scaled: int, guard_prec: int, prec: int) -> HPComplex:
    """e^(2*pi*I*t) for t = frac_scaled / 2^guard_prec, rounded to prec bits."""
    with mpmath.workprec(prec + _GUARD_BITS):
        t = mpmath.mpf(frac_scaled) / mpmath.mpf(1 << guard_prec)
        ang = 2 * mpmath.pi * t
        re = mpmath.cos(ang)
        im = mpmath.sin(ang)
        scale = mpmath.mpf(1 << prec)
        return HPComplex(int(mpmath.nint(re * scale)), int(mpmath.nint(im * scale)), prec)


# ---------------------------------------------------------------------------
# Coefficient domains

class SymbolicQDomain:
    """Exact polynomials in an indeterminate q."""

    def one(self):
        return QPoly((1,))

    def zero(self):
        return QPoly()

    def from_int(self, v: int):
        return QPoly.const(v)

    def weight(self, col: int):
        return QPoly.monomial(col)


class CyclotomicDomain:
    def __init__(self, ell: int, depth: int | None = None, enforce_bound: bool = True):
        if not _is_small_prime(ell):
            raise ValueError(f"conductor {ell} must be prime")
        if enforce_bound and depth is not None and ell <= depth**3:
            raise ValueError(f"conductor {ell} must exceed depth^3 = {depth**3}")
        self.ell = ell

    def one(self):
        return CyclotomicElement.from_int(self.ell, 1)

    def zero(self):
        return CyclotomicElement.from_int(self.ell, 0)

    def from_int(self, v: int):
        return CyclotomicElement.from_int(self.ell, v)

    def weight(self, col: int):
        return CyclotomicElement.zeta_power(self.ell, col)


class UnitCircleDomain:
    """q = e^(2*pi*I*theta); per-column weight is the point at col * theta
    (plain multiples) or col^2 * theta (square multiples)."""

    def __init__(self, theta: AlgebraicAngle, prec: int, squares: bool = False):
        if prec < 64:
            raise PrecisionUnderflow(f"precision {prec} below the working minimum 64")
        self.theta = theta
        self.prec = prec
        self.squares = squares
        self._theta_scaled = theta.scaled(prec + _GUARD_BITS)
        self._points: dict[int, HPComplex] = {}

    def one(self):
        return HPComplex.from_int(1, self.prec)

    def zero(self):
        return HPComplex(0, 0, self.prec)

    def from_int(self, v: int):
        return HPComplex.from_int(v, self.prec)

    def weight(self, col: int):
        pt = self._points.get(col)
        if pt is None:
            mult = col * col if self.squares else col
            gp = self.prec + _GUARD_BITS
            frac = (mult * self._theta_scaled) % (1 << gp)
            pt = unit_circle_point(frac, gp, self.prec)
            self._points[col] = pt
        return pt


# ---------------------------------------------------------------------------
# Generalized binomial tables and the transform

def _qbin_cell(domain, r: int, s: int, cache: dict):
    """[r, s] in the domain via the recurrence [r,s] = [r-1,s-1] + w(s)*[r-1,s]."""
    if s > r:
        return domain.zero()
    if s == 0 or s == r:
        return domain.one()
    key = (r, s)
    got = cache.get(key)
    if got is None:
        got = _qbin_cell(domain, r - 1, s - 1, cache) + domain.weight(s) * _qbin_cell(
            domain, r - 1, s, cache
        )
        cache[key] = got
    return got


class QBinTable:
    """Memoized generalized binomials for one domain instance."""

    def __init__(self, domain):
        self.domain = domain
        self._cache: dict = {}

    def __call__(self, r: int, s: int):
        return _qbin_cell(self.domain, r, s, self._cache)


@lru_cache(maxsize=None)
def _symbolic_qbin_table() -> QBinTable:
    return QBinTable(SymbolicQDomain())


def q_binomial(r: int, s: int) -> QPoly:
    """Gaussian binomial [r, s]_q as an exact integer polynomial."""
    if r < 0 or s < 0:
        raise ValueError("q_binomial expects nonnegative arguments")
    return _symbolic_qbin_table()(r, s)


def det_laplace(mat):
    """Determinant by memoized cofactor expansion; works in any commutative ring."""
    d = len(mat)
    cols = tuple(range(d))
    memo: dict = {}

    def expand(row: int, remaining: tuple[int, ...]):
        if not remaining:
            return None
        key = remaining
        got = memo.get(key)
        if got is not None:
            return got
        if len(remaining) == 1:
            memo[key] = mat[row][remaining[0]]
            return memo[key]
        acc = None
        for pos, col in enumerate(remaining):
            sub = expand(row + 1, remaining[:pos] + remaining[pos + 1 :])
            term = mat[row][col] * sub
            if pos % 2 == 1:
                term = -term
            acc = term if acc is None else acc + term
        memo[key] = acc
        return acc

    return expand(0, cols)


def q_lgv_det(sel: IndexPairSelection) -> QPoly:
    """Symbolic determinant of the Gaussian-binomial submatrix for sel.

    Monic of degree sum_i cols[i] * (rows[i] - cols[i]) with nonnegative
    coefficients; the sub-leading coefficients sum to the ordinary
    Pascal-submatrix determinant minus one.
    """
    qb = _symbolic_qbin_table()
    mat = [[qb(r, c) for c in sel.cols] for r in sel.rows]
    return det_laplace(mat)


def carlitz_newton_coeffs(z: Sequence[int], domain) -> list:
    """Coefficients b with z_i = sum_j b_j * [i, j] in the domain.

    Computed online by forward substitution (the diagonal of the generalized
    binomial table is 1), which matches the alternating-sign inversion
    formula and needs no division in any of the rings used here.
    """
    qb = QBinTable(domain)
    out = []
    for i, zi in enumerate(z):
        acc = domain.from_int(zi)
        for j in range(i):
            bj = out[j]
            if not bj.is_zero():
                acc = acc - bj * qb(i, j)
        out.append(acc)
    return out


def forward_evaluate(b: Sequence, domain) -> list:
    """Evaluations z_i = sum_j b_j * [i, j]; inverse of carlitz_newton_coeffs."""
    qb = QBinTable(domain)
    out = []
    for i in range(len(b)):
        acc = domain.zero()
        for j in range(i + 1):
            if not b[j].is_zero():
                acc = acc + b[j] * qb(i, j)
        out.append(acc)
    return out


# ---------------------------------------------------------------------------
# Encoders

def encode_cyclotomic(z: Sequence[int], ell: int) -> list[tuple[int, CyclotomicElement]]:
    """Pairs (z_i, b_i) with coefficients in Z[zeta_ell]; requires prime ell > n^3."""
    n = len(z)
    domain = CyclotomicDomain(ell, depth=n)
    b = carlitz_newton_coeffs(z, domain)
    return list(zip(list(z), b))


def encode_sunflower(
    z: Sequence[int],
    theta: AlgebraicAngle | None = None,
    prec: int | None = None,
    c_prec: int = 1,
) -> list[tuple[int, HPComplex]]:
    """Pairs (z_i, f_i) over q = e^(2*pi*I*theta), default golden section.

    When prec is omitted it defaults to c_prec * n^8, the scale at which the
    distance argument goes through; explicit prec supports desk-scale runs.
    """
    n = len(z)
    if theta is None:
        theta = golden_section()
    if prec is None:
        prec = c_prec * n**8
    domain = UnitCircleDomain(theta, prec, squares=False)
    b = carlitz_newton_coeffs(z, domain)
    return list(zip(list(z), b))


def encode_weyl_squares(
    z: Sequence[int],
    theta: AlgebraicAngle | None = None,
    prec: int | None = None,
    c_prec: int = 1,
) -> list[tuple[int, HPComplex]]:
    """Pairs (z_i, g_i) built from square multiples: per-column points
    e^(2*pi*I*col^2*theta) feed the path-matrix recurrence directly."""
    n = len(z)
    if theta is None:
        theta = golden_section()
    if prec is None:
        prec = c_prec * n**11
    domain = UnitCircleDomain(theta, prec, squares=True)
    b = carlitz_newton_coeffs(z, domain)
    return list(zip(list(z), b))


# ---------------------------------------------------------------------------
# Exhaustive distance verification

def check_distance_exhaustive(
    encoder: Callable[[Sequence[int]], list],
    n: int,
    alphabet: Sequence[int],
    budget: int = 10**5,
    delta: float = 0.5,
):
    """Verify the tree-code distance inequality over all input pairs.

    For every pair x != y with first disagreement s and every window length
    l, the encodings must differ on at least delta * (l + 1) of the
    coordinates s..s+l.  Returns None when every pair passes, else the first
    violating (x, y, split, window_length).
    """
    import itertools

    words = len(alphabet) ** n
    pairs = words * (words - 1) // 2
    if pairs > budget:
        raise BudgetExceeded(f"{pairs} pairs exceed the budget {budget}")
    all_words = [tuple(w) for w in itertools.product(alphabet, repeat=n)]
    encodings = [encoder(list(w)) for w in all_words]
    for ix in range(len(all_words)):
        for iy in range(ix + 1, len(all_words)):
            x, y = all_words[ix], all_words[iy]
            s = next(i for i in range(n) if x[i] != y[i])
            ex, ey = encodings[ix], encodings[iy]
            diff = 0
            for length in range(n - s):
                if ex[s + length] != ey[s + length]:
                    diff += 1
                if diff < delta * (length + 1):
                    return (x, y, s, length)
    return None


# ---------------------------------------------------------------------------
# Rounding-error budgets for unit-circle determinants

def hp_det_with_error(sel: IndexPairSelection, domain: UnitCircleDomain):
    """Determinant of the generalized binomial submatrix plus a worst-case
    bound on its accumulated fixed-point rounding error.

    Magnitude/error pairs follow each ring operation: adds are exact in
    fixed point, multiplies contribute one rounding per component plus the
    cross terms, and the stored circle points carry a small constant error
    from their high-precision construction.
    """
    ulp = 2.0 ** (1 - domain.prec)
    point_err = 2.0 ** (4 - domain.prec)

    class Tracked:
        __slots__ = ("val", "mag", "err")

        def __init__(self, val, mag, err):
            self.val, self.mag, self.err = val, mag, err

        def __add__(self, other):
            return Tracked(self.val + other.val, self.mag + other.mag, self.err + other.err)

        def __neg__(self):
            return Tracked(-self.val, self.mag, self.err)

        def __sub__(self, other):
            return self + (-other)

        def __mul__(self, other):
            return Tracked(
                self.val * other.val,
                self.mag * other.mag,
                self.mag * other.err + other.mag * self.err + self.err * other.err + ulp,
            )

        def is_zero(self):
            return self.val.is_zero()

    class TrackedDomain:
        def one(self):
            return Tracked(domain.one(), 1.0, 0.0)

        def zero(self):
            return Tracked(domain.zero(), 0.0, 0.0)

        def from_int(self, v):
            return Tracked(domain.from_int(v), abs(v), 0.0)

        def weight(self, col):
            return Tracked(domain.weight(col), 1.0, point_err)

    qb = QBinTable(TrackedDomain())
    mat = [[qb(r, c) for c in sel.cols] for r in sel.rows]
    det = det_laplace(mat)
    return det.val, det.err
