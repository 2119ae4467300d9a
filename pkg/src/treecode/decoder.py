"""Randomized decoder for the integer tree code.

The decoder works modulo a large prime and recovers one symbol at a time.
For each suffix it locates coordinates that are certainly correct: a
structured homogeneous linear system (one more unknown than constraints)
yields a low-degree polynomial whose nonzeros mark correct evaluations, and
a diagonal duality transports the same machinery to the coefficient side.
The located sets feed a lattice-path interpolation that pins down the
leading symbol, whose encoding is then subtracted before the next round.

Answers are only ever released after verification against the received
word, so amplification never returns an unverified result.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import gmpy2

from treecode.core import (
    Pair,
    PrimeFieldCtx,
    check_received_bounds,
    encode_tc,
    pair_hamming,
    pascal_row,
)
from treecode.lgv import IndexPairSelection, _staircase_cut, lgv_interpolate

mpz = gmpy2.mpz


class InfeasibleParams(ValueError):
    """No parameter assignment satisfies the locator conditions at this size."""


class LocatorFailure(RuntimeError):
    """The locator polynomial vanished everywhere it was allowed to witness."""


class DecodeBudgetExhausted(RuntimeError):
    """No decode attempt passed verification within the retry budget."""


# ---------------------------------------------------------------------------
# Parameters

@dataclass(frozen=True)
class DecodeParams:
    """Locator parameters; see validate_params for the governing conditions."""

    n: int
    alpha: int
    beta: int
    delta: int
    epsilon: int
    r: float
    c: float

    @property
    def locate_rounds(self) -> int:
        return self.delta - self.epsilon + 1


def validate_params(params: DecodeParams) -> list[str]:
    """Return the list of violated feasibility conditions (empty when valid)."""
    n, a, b = params.n, params.alpha, params.beta
    d, e = params.delta, params.epsilon
    r = Fraction(params.r)
    viol = []
    if not (0 < r < Fraction(a * e, n)):
        viol.append("(1) 0 < r < alpha*epsilon/n")
    if not (2 * (a + b - 1) <= n):
        viol.append("(2) alpha + beta - 1 <= n/2")
    rhs = -Fraction(a * a * e, n) - Fraction(a * b * e, n) - r * (n - (a + b) + 1) + a - 1
    if not (d <= rhs):
        viol.append("(3) delta <= -alpha^2*eps/n - alpha*beta*eps/n - r*(n-(alpha+beta)+1) + alpha - 1")
    if not (a <= b):
        viol.append("(4) alpha <= beta")
    if not (d - e + 1 >= 1):
        viol.append("delta - epsilon + 1 >= 1")
    return viol


def closed_form_params(n: int, c: float = 1.0) -> DecodeParams:
    """Asymptotic parameter assignment; only feasible for very large n.

    alpha = beta = floor((2 + 2*sqrt(c+1)) * sqrt(n ln n)),
    epsilon = floor(sqrt(n) / ((8c + 16*sqrt(c+1) + 17) * sqrt(ln n)) - 2),
    r = sqrt((c+1) ln(n) / n), delta = floor of the condition-(3) bound.
    """
    if n < 3:
        raise InfeasibleParams(f"closed form undefined at n={n}")
    ln_n = math.log(n)
    alpha = math.floor((2 + 2 * math.sqrt(c + 1)) * math.sqrt(n * ln_n))
    epsilon = math.floor(math.sqrt(n) / ((8 * c + 16 * math.sqrt(c + 1) + 17) * math.sqrt(ln_n)) - 2)
    if epsilon < 1:
        raise InfeasibleParams(f"closed-form epsilon < 1 at n={n}, c={c}")
    r = math.sqrt((c + 1) * ln_n / n)
    rr = Fraction(r)
    delta = math.floor(
        -Fraction(2 * alpha * alpha * epsilon, n) - rr * (n - 2 * alpha + 1) + alpha - 1
    )
    params = DecodeParams(n=n, alpha=alpha, beta=alpha, delta=delta, epsilon=epsilon, r=r, c=c)
    viol = validate_params(params)
    if viol:
        raise InfeasibleParams(f"closed form infeasible at n={n}, c={c}: {viol}")
    return params


# Dyadic r grid keeps every feasibility check exact in rational arithmetic.
_R_GRID = [Fraction(1, 2**j) for j in range(1, 21)]


def _alpha_grid(n: int) -> list[int]:
    hi = n // 4 + 1
    if n <= 4096:
        return list(range(2, hi + 1))
    # geometric coverage for large n, still deterministic
    out = set()
    a = 2.0
    while a <= hi:
        out.add(int(a))
        a *= 1.05
    out.add(hi)
    return sorted(out)


@lru_cache(maxsize=None)
def search_params(n: int, c: float = 1.0) -> DecodeParams:
    """Maximize epsilon over a deterministic (alpha, beta, r) grid.

    beta is pinned to alpha: raising beta strictly lowers the condition-(3)
    bound whenever condition (1) holds, so beta > alpha never helps.  Ties
    prefer more locate rounds, then larger r, then smaller alpha.
    """
    if n < 8:
        raise InfeasibleParams(f"search requires n >= 8, got {n}")
    best_key = None
    best = None

    def consider(alpha, beta, r, epsilon, delta):
        nonlocal best_key, best
        params = DecodeParams(n=n, alpha=alpha, beta=beta, delta=delta,
                              epsilon=epsilon, r=float(r), c=c)
        if validate_params(params):
            return
        key = (epsilon, delta - epsilon + 1, Fraction(r), -alpha, -beta)
        if best_key is None or key > best_key:
            best_key, best = key, params

    for alpha in _alpha_grid(n):
        beta = alpha
        if 2 * (2 * alpha - 1) > n:
            continue
        span = n - 2 * alpha + 1
        den = Fraction(2 * alpha * alpha, n) + 1
        for r in _R_GRID:
            num = alpha - 1 - r * span
            if num <= 0:
                continue
            epsilon = math.floor(num / den)
            if epsilon < 1:
                continue
            if not (r < Fraction(alpha * epsilon, n)):
                continue
            rhs = -Fraction(2 * alpha * alpha * epsilon, n) - r * span + alpha - 1
            delta = math.floor(rhs)
            if delta < epsilon or delta > n:
                continue
            consider(alpha, beta, r, epsilon, delta)

    try:
        cf = closed_form_params(n, c)
        consider(cf.alpha, cf.beta, Fraction(cf.r), cf.epsilon, cf.delta)
    except InfeasibleParams:
        pass

    if best is None:
        raise InfeasibleParams(f"no feasible locator parameters at n={n}, c={c}")
    return best


@lru_cache(maxsize=None)
def _params_or_none(n: int, c: float):
    try:
        return search_params(n, c)
    except InfeasibleParams:
        return None


# ---------------------------------------------------------------------------
# Residuals

def centered(v: int, p: int) -> int:
    """Lift a residue to the centered interval [-(p-1)/2, (p-1)/2]."""
    v = v % p
    return v - p if 2 * v > p else v


def _window_residual(zh: Sequence[int], ah: Sequence[int], start: int, p) -> list:
    """Residual y_i = z_i - sum_{j<=i} a_j C(i,j) mod p over indices [start, n)."""
    n = len(zh)
    out = []
    for i in range(start, n):
        row = pascal_row(i)
        acc = mpz(zh[i])
        for j in range(start, i + 1):
            aj = ah[j]
            if aj:
                acc -= aj * row[j]
        out.append(acc % p)
    return out


def residual_vector(received: Sequence[Pair], ctx: PrimeFieldCtx) -> list[int]:
    """Consistency residual of a received word, reduced mod ctx.p."""
    zh = [zv for zv, _ in received]
    ah = [av for _, av in received]
    return [int(v) for v in _window_residual(zh, ah, 0, mpz(ctx.p))]


def reverse_input(received: Sequence[Pair]) -> list[Pair]:
    """Swap the two tracks and flip signs at odd indices.

    Sends pair i to ((-1)^i * a_i, (-1)^i * z_i); an involution that turns
    coefficient errors into evaluation errors at the same positions.
    """
    out = []
    for i, (zv, av) in enumerate(received):
        s = -1 if i & 1 else 1
        out.append((s * av, s * zv))
    return out


# ---------------------------------------------------------------------------
# The locator
#
# Unknowns: a polynomial pair (b, c) with b supported on J u [start, start+beta)
# in the Newton basis and c of degree < alpha, not both zero, such that c
# vanishes on H and b(i) + c(i)*y_i = 0 off H.  Eliminating b (its support
# misses exactly alpha-1 window indices T, where the Newton coefficient of
# the value vector must vanish) leaves alpha - 1 + |H| homogeneous
# constraints on alpha + |H| unknowns: the coefficients of c plus one free
# value per H index.  A nonzero kernel vector always exists.


class _GCache:
    """Per-round lazy rows of the eliminated constraint system.

    Row t holds, for each coefficient c_u of c(x) = sum_u c_u * C(x, u), the
    value sum_{i in [start, t]} (-1)^(t-i) C(t,i) * (-y_i) * C(i,u) mod p.
    Membership corrections for H are applied per call by the solver.
    """

    def __init__(self, y, start, alpha, p):
        self.y = y
        self.start = start
        self.alpha = alpha
        self.p = p
        self.rows: dict[int, list] = {}

    def row(self, t: int) -> list:
        cached = self.rows.get(t)
        if cached is None:
            start, alpha, y = self.start, self.alpha, self.y
            acc = [mpz(0)] * alpha
            trow = pascal_row(t)
            for i in range(start, t + 1):
                yi = y[i - start]
                if not yi:
                    continue
                term = trow[i] * yi
                if (t - i) & 1 == 0:
                    term = -term  # coefficient of -y_i with sign (-1)^(t-i)
                irow = pascal_row(i)
                for u in range(min(alpha, i + 1)):
                    acc[u] += term * irow[u]
            cached = [v % self.p for v in acc]
            self.rows[t] = cached
        return cached


def _kernel_mod_p(rows: list[list], ncols: int, p) -> list[list]:
    """Kernel basis of a homogeneous system mod p, in column-echelon order."""
    m = [[v % p for v in row] for row in rows]
    pivots: list[int] = []
    rank = 0
    for col in range(ncols):
        piv = None
        for i in range(rank, len(m)):
            if m[i][col]:
                piv = i
                break
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        inv = gmpy2.invert(m[rank][col], p)
        m[rank] = [(v * inv) % p for v in m[rank]]
        for i in range(len(m)):
            if i != rank and m[i][col]:
                f = m[i][col]
                m[i] = [(a - f * b) % p for a, b in zip(m[i], m[rank])]
        pivots.append(col)
        rank += 1
        if rank == len(m):
            break
    pivot_set = set(pivots)
    basis = []
    for fc in range(ncols):
        if fc in pivot_set:
            continue
        vec = [mpz(0)] * ncols
        vec[fc] = mpz(1)
        for ri, pc in enumerate(pivots):
            vec[pc] = (-m[ri][fc]) % p
        basis.append(vec)
    return basis


def _locate_index(y, start, n, params, H, p, rng, gcache=None, allow_excess=False):
    """One locator call over the window [start, n); returns an absolute index.

    y is the residual window (y[i - start] for absolute i), H the absolute
    index set where c must vanish.
    """
    alpha, beta = params.alpha, params.beta
    m = n - start
    if not allow_excess and len(H) > params.delta - params.epsilon:
        raise ValueError(
            f"|H| = {len(H)} exceeds the budget delta - epsilon = "
            f"{params.delta - params.epsilon}"
        )
    if any(h < start or h >= start + alpha for h in H):
        raise ValueError("H must lie inside the first alpha window indices")
    j_size = m - (alpha + beta) + 1
    if j_size < 0:
        raise ValueError("window too short for these parameters")
    tail = range(start + beta, n)
    J = set(rng.sample(tail, j_size))
    T = [t for t in tail if t not in J]

    if gcache is None:
        gcache = _GCache(y, start, alpha, p)
    Hs = sorted(H)
    hpos = {h: alpha + idx for idx, h in enumerate(Hs)}
    width = alpha + len(Hs)

    rows = []
    for h in Hs:  # c(h) = 0
        hrow = pascal_row(h)
        row = [mpz(hrow[u]) if u <= h else mpz(0) for u in range(alpha)]
        row += [mpz(0)] * len(Hs)
        rows.append(row)
    for t in T:
        base = gcache.row(t)
        row = list(base)
        trow = pascal_row(t)
        for h in Hs:
            yh = y[h - start]
            if yh:
                term = trow[h] * yh
                if (t - h) & 1:
                    term = -term
                hrow = pascal_row(h)
                for u in range(min(alpha, h + 1)):
                    row[u] = row[u] + term * hrow[u]
        row = [v % p for v in row]
        for h in Hs:
            w = trow[h]
            row.append(mpz(-w if (t - h) & 1 else w) % p)
        rows.append(row)

    basis = _kernel_mod_p(rows, width, p)
    for vec in basis:
        gamma = vec[:alpha]
        if any(gamma):
            break
    else:
        raise LocatorFailure("every kernel vector has c identically zero")

    for i in range(start, start + alpha):
        irow = pascal_row(i)
        acc = mpz(0)
        for u in range(min(alpha, i + 1)):
            g = gamma[u]
            if g:
                acc += g * irow[u]
        if acc % p:
            return i
    raise LocatorFailure("c vanishes on the whole candidate window")


@dataclass(frozen=True)
class LocatorWitness:
    """The solved locator pair for one call, for inspection and testing.

    b is supported on sample_set union [0, beta) in the binomial basis, c has
    degree below alpha, they are not both zero, c vanishes on the excluded
    set, and b(i) + c(i) * y_i = 0 everywhere else.  located is the smallest
    index below alpha where c is nonzero, or None when c vanished there.
    """

    sample_set: frozenset[int]
    b_coeffs: tuple[int, ...]
    c_coeffs: tuple[int, ...]
    located: int | None


def locator_witness(yhat, H, params, ctx, rng) -> LocatorWitness:
    """Solve the locator system at offset 0 and reconstruct both polynomials."""
    p = mpz(ctx.p)
    n = params.n
    alpha, beta = params.alpha, params.beta
    y = [mpz(v) % p for v in yhat]
    rng_local = rng
    j_size = n - (alpha + beta) + 1
    J = set(rng_local.sample(range(beta, n), j_size))
    T = [t for t in range(beta, n) if t not in J]
    Hs = sorted(H)

    gcache = _GCache(y, 0, alpha, p)
    rows = []
    for h in Hs:
        hrow = pascal_row(h)
        row = [mpz(hrow[u]) if u <= h else mpz(0) for u in range(alpha)]
        row += [mpz(0)] * len(Hs)
        rows.append(row)
    for t in T:
        base = list(gcache.row(t))
        trow = pascal_row(t)
        for h in Hs:
            yh = y[h]
            if yh:
                term = trow[h] * yh
                if (t - h) & 1:
                    term = -term
                hrow = pascal_row(h)
                for u in range(min(alpha, h + 1)):
                    base[u] = base[u] + term * hrow[u]
        base = [v % p for v in base]
        for h in Hs:
            w = trow[h]
            base.append(mpz(-w if (t - h) & 1 else w) % p)
        rows.append(base)
    basis = _kernel_mod_p(rows, alpha + len(Hs), p)
    vec = None
    for cand in basis:
        if any(cand[:alpha]):
            vec = cand
            break
    if vec is None:
        vec = basis[0]
    gamma = vec[:alpha]
    wvals = {h: vec[alpha + i] for i, h in enumerate(Hs)}

    def c_at(i):
        irow = pascal_row(i)
        return sum(gamma[u] * irow[u] for u in range(min(alpha, i + 1))) % p

    support = sorted(set(range(beta)) | J)
    values = []
    for i in range(n):
        if i in wvals:
            values.append(wvals[i])
        else:
            values.append((-c_at(i) * y[i]) % p)
    b = [mpz(0)] * n
    for t in support:
        trow = pascal_row(t)
        acc = mpz(0)
        for i in range(t + 1):
            term = trow[i] * values[i]
            acc += -term if (t - i) & 1 else term
        b[t] = acc % p
    located = None
    for i in range(alpha):
        if c_at(i):
            located = i
            break
    return LocatorWitness(
        sample_set=frozenset(J),
        b_coeffs=tuple(int(v) for v in b),
        c_coeffs=tuple(int(v) for v in gamma),
        located=located,
    )


# ---------------------------------------------------------------------------
# Public location API (whole-word, offset zero)

def locate_one_nonerror(
    yhat: Sequence[int],
    H: set[int],
    params: DecodeParams,
    ctx: PrimeFieldCtx,
    rng: random.Random,
) -> int:
    """Locate one index in [0, alpha) where the residual matches the nearest
    sparse explanation; never returns a member of H."""
    p = mpz(ctx.p)
    y = [mpz(v) % p for v in yhat]
    return _locate_index(y, 0, params.n, params, set(H), p, rng)


def locate_eval_nonerrors(
    received: Sequence[Pair],
    params: DecodeParams,
    ctx: PrimeFieldCtx,
    rng: random.Random,
) -> set[int]:
    """Locate delta - epsilon + 1 evaluation-side non-error indices."""
    p = mpz(ctx.p)
    zh = [zv for zv, _ in received]
    ah = [av for _, av in received]
    y = _window_residual(zh, ah, 0, p)
    gcache = _GCache(y, 0, params.alpha, p)
    found: set[int] = set()
    for _ in range(params.locate_rounds):
        found.add(_locate_index(y, 0, params.n, params, found, p, rng, gcache))
    return found


def locate_newton_nonerrors(
    received: Sequence[Pair],
    params: DecodeParams,
    ctx: PrimeFieldCtx,
    rng: random.Random,
) -> set[int]:
    """Locate coefficient-side non-errors by running the evaluation locator
    on the reversed input."""
    return locate_eval_nonerrors(reverse_input(received), params, ctx, rng)


def recover_first_symbol(
    received: Sequence[Pair],
    i_z: set[int],
    i_a: set[int],
    params: DecodeParams,
    ctx: PrimeFieldCtx,
) -> int:
    """Recover z_0 from located non-error sets.

    Reads the answer directly when index 0 itself is located; otherwise
    interpolates the residual on the staircase selection and undoes the
    residual substitution with the received leading coefficient.
    """
    if 0 in i_z:
        return received[0][0]
    if 0 in i_a:
        return received[0][1]
    p = mpz(ctx.p)
    y = residual_vector(received, ctx)
    st = _staircase_cut(set(i_z), set(i_a), params.alpha)
    sel = st.selection
    values = [y[r] for r in sel.rows]
    g = lgv_interpolate(sel, values, ctx)
    return centered(g[0] + received[0][1], ctx.p)


# ---------------------------------------------------------------------------
# Full decoding

def decode_full(
    received: Sequence[Pair],
    z_bound: int,
    c: float = 1.0,
    rng: random.Random | None = None,
    ctx: PrimeFieldCtx | None = None,
) -> list[int]:
    """Decode a full received word, one leading symbol per suffix round.

    Each round re-derives parameters for the remaining length, locates
    non-errors on both tracks, recovers the leading symbol, and subtracts
    its encoding.  A window whose residual vanishes is an exact encoding and
    is read off directly, as are suffix lengths with no feasible parameters;
    the caller is expected to verify the result.
    """
    if rng is None:
        rng = random.Random(0)
    n = len(received)
    check_received_bounds(received, z_bound)
    if ctx is None:
        ctx = _shared_ctx(n, z_bound)
    p = mpz(ctx.p)

    zh = [zv for zv, _ in received]  # evaluations; never adjusted at live indices
    ah = [av for _, av in received]  # coefficients; adjusted as prefixes are subtracted
    y = _window_residual(zh, ah, 0, p)
    rev_zh = [-ah[i] if i & 1 else ah[i] for i in range(n)]
    rev_ah = [-zh[i] if i & 1 else zh[i] for i in range(n)]
    yr = _window_residual(rev_zh, rev_ah, 0, p)
    out: list[int] = []

    for k in range(n):
        if not any(y):
            out.extend(zh[k:])
            return out
        params = _params_or_none(n - k, c)
        if params is None:
            out.extend(zh[k:])
            return out

        sym = _decode_round(zh, ah, y, yr, k, n, params, ctx, rng)
        out.append(sym)

        # Subtract the encoding of (sym, 0, ..., 0) over the window [k, n) and
        # advance.  Only index k changes on the evaluation track; both
        # residuals shift by small multiples of the k-th binomial column.
        dz = zh[k] - sym
        da = ah[k] - sym
        if k & 1:
            dz = -dz
        y = [(y[i - k] + da * pascal_row(i)[k]) % p for i in range(k + 1, n)]
        yr = [(yr[i - k] + dz * pascal_row(i)[k]) % p for i in range(k + 1, n)]
        for j in range(k, n):
            w = pascal_row(j)[k]
            ah[j] -= sym * (w if (j - k) % 2 == 0 else -w)
    return out


def _decode_round(zh, ah, y, yr, k, n, params, ctx, rng):
    """Recover the symbol at absolute position k from the window [k, n)."""
    alpha = params.alpha
    need = (alpha + 1) // 2
    p = mpz(ctx.p)
    gz = _GCache(y, k, alpha, p)
    ga = _GCache(yr, k, alpha, p)
    i_z: set[int] = set()
    i_a: set[int] = set()

    def locate(side_y, cache, found, allow_excess):
        return _locate_index(side_y, k, n, params, found, p, rng, cache, allow_excess)

    for _ in range(params.locate_rounds):
        i = locate(y, gz, i_z, False)
        if i == k:
            return zh[k]
        i_z.add(i)
    for _ in range(params.locate_rounds):
        i = locate(yr, ga, i_a, False)
        if i == k:
            return _centered_symbol(ah[k], p)
        i_a.add(i)

    for _ in range(2 * alpha + 2):
        try:
            st = _staircase_cut({v - k for v in i_z}, {v - k for v in i_a}, alpha)
        except ValueError:
            # pad the smaller located set and retry; verification downstream
            # guards against the weakened per-round guarantee
            if len(i_z) >= need and len(i_a) >= need:
                raise LocatorFailure("staircase failed with fully padded sets")
            if len(i_z) <= len(i_a):
                i = locate(y, gz, i_z, True)
                if i == k:
                    return zh[k]
                i_z.add(i)
            else:
                i = locate(yr, ga, i_a, True)
                if i == k:
                    return _centered_symbol(ah[k], p)
                i_a.add(i)
            continue
        sel = st.selection
        abs_sel = IndexPairSelection(
            tuple(v + k for v in sel.rows), tuple(v + k for v in sel.cols)
        )
        values = [int(y[r]) for r in sel.rows]
        g = lgv_interpolate(abs_sel, values, ctx)
        return centered(g[0] + ah[k], int(p))
    raise LocatorFailure("staircase padding did not terminate")


def _centered_symbol(v, p):
    return centered(int(v), int(p))


_CTX_CACHE: dict[tuple[int, int], PrimeFieldCtx] = {}


def _shared_ctx(n: int, z_bound: int) -> PrimeFieldCtx:
    key = (n, z_bound)
    if key not in _CTX_CACHE:
        from treecode.core import generate_prime

        _CTX_CACHE[key] = generate_prime(n, z_bound, seed=0)
    return _CTX_CACHE[key]


@dataclass(frozen=True)
class AmplifiedResult:
    message: list[int]
    attempts: int
    distance: int


def amplified_decode(
    received: Sequence[Pair],
    z_bound: int,
    c: float = 1.0,
    rng: random.Random | None = None,
    budget: int = 25,
    ctx: PrimeFieldCtx | None = None,
) -> AmplifiedResult:
    """Retry decode_full until the re-encoding verifies within n/2 pair errors.

    Las Vegas: an answer is returned only after passing verification; the
    budget bounds the number of attempts, and exhausting it leaves open
    whether no valid message exists or the draws were unlucky.
    """
    if rng is None:
        rng = random.Random(0)
    n = len(received)
    if ctx is None:
        ctx = _shared_ctx(n, z_bound)
    for attempt in range(1, budget + 1):
        try:
            msg = decode_full(received, z_bound, c, rng, ctx=ctx)
        except LocatorFailure:
            continue  # counted against the budget; fresh draws next attempt
        dist = pair_hamming(encode_tc(msg), received)
        if 2 * dist <= n:
            return AmplifiedResult(message=msg, attempts=attempt, distance=dist)
    raise DecodeBudgetExhausted(f"no verified decoding within {budget} attempts")
