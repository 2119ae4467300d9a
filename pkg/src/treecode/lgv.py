"""Lattice-path determinant machinery for Pascal submatrices.

For strictly increasing rows r and cols c with r_i >= c_i, the matrix
{C(r_i, c_j)} has a positive determinant equal to the number of
vertex-disjoint lattice-path systems connecting the r's to the c's.  That
nonvanishing underpins both the distance of the tree code and the sparse
interpolation used when decoding.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import gmpy2

from treecode.core import PrimeFieldCtx, binomial


class BudgetExceeded(RuntimeError):
    """An exhaustive enumeration would exceed its configured work budget."""


@dataclass(frozen=True)
class IndexPairSelection:
    """Row/column index sets for a Pascal submatrix, rows dominating cols."""

    rows: tuple[int, ...]
    cols: tuple[int, ...]

    def __post_init__(self):
        if len(self.rows) != len(self.cols):
            raise ValueError("rows and cols must have equal length")
        if len(self.rows) == 0:
            raise ValueError("selection must be nonempty")
        if any(v < 0 for v in self.rows + self.cols):
            raise ValueError("indices must be nonnegative")
        if any(a >= b for a, b in zip(self.rows, self.rows[1:])):
            raise ValueError("rows must be strictly increasing")
        if any(a >= b for a, b in zip(self.cols, self.cols[1:])):
            raise ValueError("cols must be strictly increasing")
        if any(r < c for r, c in zip(self.rows, self.cols)):
            raise ValueError("requires rows[i] >= cols[i] for all i")

    @property
    def size(self) -> int:
        return len(self.rows)


@dataclass(frozen=True)
class StaircaseResult:
    cut_index: int
    selection: IndexPairSelection


def pascal_submatrix_det(sel: IndexPairSelection) -> int:
    """Exact determinant of {C(r_i, c_j)} over the integers."""
    m = [[binomial(r, c) for c in sel.cols] for r in sel.rows]
    return _bareiss_det(m)


def _bareiss_det(m: list[list[int]]) -> int:
    """Fraction-free Bareiss elimination; exact for integer matrices."""
    d = len(m)
    m = [row[:] for row in m]
    sign = 1
    prev = 1
    for k in range(d - 1):
        if m[k][k] == 0:
            for i in range(k + 1, d):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, d):
            for j in range(k + 1, d):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[d - 1][d - 1]


# ---------------------------------------------------------------------------
# Path-system oracle
#
# Lattice model: a path for row value r and col value c starts at (r, 0),
# ends at (c, c), and moves by (row-1, col) or (row, col+1), staying inside
# col <= row.  The number of such paths is C(r, c); vertex-disjoint systems
# are counted signed over all pairings, which the triangular geometry forces
# to the identity pairing.

def _paths(r: int, c: int) -> list[frozenset[tuple[int, int]]]:
    if c > r:
        return []
    out: list[frozenset[tuple[int, int]]] = []

    def walk(row: int, col: int, seen: list[tuple[int, int]]):
        if (row, col) == (c, c):
            out.append(frozenset(seen))
            return
        if row - 1 >= col and row - 1 >= c:
            walk(row - 1, col, seen + [(row - 1, col)])
        if col + 1 <= row and col + 1 <= c:
            walk(row, col + 1, seen + [(row, col + 1)])

    walk(r, 0, [(r, 0)])
    return out


_PERM_SIGN_CACHE: dict[tuple[int, ...], int] = {}


def _perm_sign(perm: tuple[int, ...]) -> int:
    if perm not in _PERM_SIGN_CACHE:
        sign = 1
        seen = [False] * len(perm)
        for i in range(len(perm)):
            if seen[i]:
                continue
            j, length = i, 0
            while not seen[j]:
                seen[j] = True
                j = perm[j]
                length += 1
            if length % 2 == 0:
                sign = -sign
        _PERM_SIGN_CACHE[perm] = sign
    return _PERM_SIGN_CACHE[perm]


def count_vertex_disjoint_paths(sel: IndexPairSelection, max_size: int = 4, max_row: int = 10) -> int:
    """Signed count of vertex-disjoint path systems; equals the determinant.

    Exponential-time test oracle; guarded by explicit size budgets.
    """
    if sel.size > max_size or sel.rows[-1] > max_row:
        raise BudgetExceeded(
            f"selection size {sel.size} / max row {sel.rows[-1]} exceeds "
            f"budget ({max_size}, {max_row})"
        )
    d = sel.size
    path_sets = {}
    for r in sel.rows:
        for c in sel.cols:
            path_sets[(r, c)] = _paths(r, c)

    import itertools

    total = 0
    for perm in itertools.permutations(range(d)):
        sign = _perm_sign(perm)
        count = _count_disjoint(sel, perm, path_sets, 0, frozenset())
        total += sign * count
    return total


def _count_disjoint(sel, perm, path_sets, i, occupied) -> int:
    if i == sel.size:
        return 1
    total = 0
    for path in path_sets[(sel.rows[i], sel.cols[perm[i]])]:
        if path & occupied:
            continue
        total += _count_disjoint(sel, perm, path_sets, i + 1, occupied | path)
    return total


# ---------------------------------------------------------------------------
# Staircase selection

def staircase_select(i_z: set[int], i_a: set[int], alpha: int) -> StaircaseResult:
    """Pick the interpolation row/column sets from located non-error sets.

    t(i) = |[0,i) ∩ I_z| - |[0,i) \\ I_a| starts at t(1) = -1 (0 is excluded
    from both sets by precondition) and moves by unit steps; the first return
    to zero cuts a selection with rows[i] >= cols[i] guaranteed.
    """
    if 0 in i_z or 0 in i_a:
        raise ValueError("0 must not belong to I_z or I_a (handled by direct readout)")
    need = (alpha + 1) // 2
    if len(i_z) < need or len(i_a) < need:
        raise ValueError(f"requires |I_z| >= {need} and |I_a| >= {need}")
    if any(v < 0 or v >= alpha for v in i_z | i_a):
        raise ValueError("index sets must lie inside [0, alpha)")
    return _staircase_cut(i_z, i_a, alpha)


def _staircase_cut(i_z: set[int], i_a: set[int], alpha: int) -> StaircaseResult:
    """Core staircase walk without the size preconditions (decoder internal)."""
    t = 0
    cut = None
    for i in range(1, alpha + 1):
        t += 1 if (i - 1) in i_z else 0
        t -= 1 if (i - 1) not in i_a else 0
        if t == 0:
            cut = i
            break
    if cut is None:
        raise ValueError("staircase never returns to zero; located sets too small")
    rows = tuple(sorted(v for v in i_z if v < cut))
    cols = tuple(sorted(v for v in range(cut) if v not in i_a))
    return StaircaseResult(cut_index=cut, selection=IndexPairSelection(rows, cols))


# ---------------------------------------------------------------------------
# Interpolation mod p

def lgv_interpolate(
    sel: IndexPairSelection,
    values: Sequence[int],
    ctx: PrimeFieldCtx,
) -> list[int]:
    """Coefficients of the unique polynomial supported on sel.cols in the
    Newton basis that matches the given values at sel.rows, mod ctx.p.

    Nonsingularity is guaranteed by the prime-size invariant; a singular
    system here is an internal-invariant violation.
    """
    d = sel.size
    if len(values) != d:
        raise ValueError(f"expected {d} values, got {len(values)}")
    if ctx.n is not None and sel.rows[-1] >= ctx.n:
        raise ValueError("selection indices must be below the context depth")
    p = gmpy2.mpz(ctx.p)
    mat = [[gmpy2.mpz(binomial(r, c)) for c in sel.cols] for r in sel.rows]
    rhs = [gmpy2.mpz(v) % p for v in values]
    sol = _solve_square_mod(mat, rhs, p)
    if sol is None:
        raise RuntimeError("singular interpolation system mod p; invariant violated")
    return [int(v) for v in sol]


def _solve_square_mod(mat, rhs, p):
    d = len(mat)
    m = [row[:] + [rhs[i]] for i, row in enumerate(mat)]
    for k in range(d):
        piv = None
        for i in range(k, d):
            if m[i][k] % p != 0:
                piv = i
                break
        if piv is None:
            return None
        m[k], m[piv] = m[piv], m[k]
        inv = gmpy2.invert(m[k][k], p)
        m[k] = [(v * inv) % p for v in m[k]]
        for i in range(d):
            if i != k and m[i][k] != 0:
                f = m[i][k]
                m[i] = [(a - f * b) % p for a, b in zip(m[i], m[k])]
    return [m[i][d] for i in range(d)]
