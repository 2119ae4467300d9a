"""Experimental l1 decoder and empirical restricted-isometry probes.

The decoding task is recast as  argmin ||u||_1 + ||v||_1  subject to
zhat - u = B (ahat - v),  i.e. basis pursuit on the online block matrix
[I | -B] with the consistency residual as right-hand side.  A small
self-contained alternating-direction solver handles desk-scale sizes; an
exact rational search over small error supports serves as the combinatorial
ground truth; Monte-Carlo probes estimate (lower-bound) restricted-isometry
constants for the binomial matrix and its number-theoretic cousins.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from treecode.core import Pair, binomial, spawn_seed


class SolverNonConvergence(RuntimeError):
    """The iterative solver missed its tolerance within the iteration budget."""


@dataclass(frozen=True)
class OnlineSystem:
    """Dense floating realization of the constraint matrix [I | -B]."""

    n: int
    B: np.ndarray          # (n, n) lower triangular binomials
    combined: np.ndarray   # (n, 2n) block [I | -B]
    col_norms: np.ndarray  # (2n,) Euclidean column norms of combined


@dataclass(frozen=True)
class RipEstimate:
    """Empirical lower bound on a restricted-isometry constant."""

    source: str
    sparsity: int
    trials: int
    delta_hat: float


def build_online_system(n: int, max_n: int = 40) -> OnlineSystem:
    """Binomial system with entries exactly representable as doubles.

    The default cap keeps every C(i, j) below 2^53 (C(39, 19) < 2^53).
    """
    if n < 1:
        raise ValueError("n must be positive")
    if n > max_n:
        raise ValueError(f"n = {n} exceeds the float-exactness bound {max_n}")
    B = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1):
            B[i, j] = float(binomial(i, j))
    combined = np.hstack([np.eye(n), -B])
    col_norms = np.linalg.norm(combined, axis=0)
    return OnlineSystem(n=n, B=B, combined=combined, col_norms=col_norms)


def _exact_residual(received: Sequence[Pair]) -> list[int]:
    zh = [zv for zv, _ in received]
    ah = [av for _, av in received]
    out = []
    for i in range(len(zh)):
        acc = zh[i]
        for j in range(i + 1):
            if ah[j]:
                acc -= ah[j] * binomial(i, j)
        out.append(acc)
    return out


def _admm_basis_pursuit(A: np.ndarray, b: np.ndarray, tol: float, max_iter: int):
    """min ||x||_1 s.t. Ax = b by ADMM with exact projection onto {Ax = b}.

    Rows are scaled to unit norm first (a pure re-description of the same
    constraint set, and much kinder to the Gram factorization).
    """
    m, d = A.shape
    row_norms = np.linalg.norm(A, axis=1)
    row_norms[row_norms == 0] = 1.0
    As = A / row_norms[:, None]
    bs = b / row_norms
    gram = As @ As.T
    gram[np.diag_indices_from(gram)] += 1e-12
    L = np.linalg.cholesky(gram)

    def project(w):
        resid = As @ w - bs
        t = np.linalg.solve(L, resid)
        t = np.linalg.solve(L.T, t)
        return w - As.T @ t

    rho = 1.0
    relax = 1.6
    x = np.zeros(d)
    z = np.zeros(d)
    u = np.zeros(d)
    for it in range(max_iter):
        x = project(z - u)
        x_hat = relax * x + (1.0 - relax) * z
        z_prev = z
        z = x_hat + u
        thresh = 1.0 / rho
        z = np.sign(z) * np.maximum(np.abs(z) - thresh, 0.0)
        u = u + x_hat - z
        primal = np.max(np.abs(x - z))
        dual = rho * np.max(np.abs(z - z_prev))
        if primal <= tol and dual <= tol:
            return project(z), it + 1
    raise SolverNonConvergence(
        f"primal/dual residuals above {tol} after {max_iter} iterations"
    )


def erasure_decode(
    received: Sequence[Pair],
    erasures: set[int],
    sys: OnlineSystem,
    tol: float = 1e-6,
    max_iter: int = 100_000,
):
    """l1 decoding with the constraint rows in `erasures` removed."""
    n = sys.n
    if len(received) != n:
        raise ValueError(f"received length {len(received)} does not match n = {n}")
    if any(e < 0 or e >= n for e in erasures):
        raise ValueError("erasure indices must lie in [0, n)")
    keep = [i for i in range(n) if i not in erasures]
    y = _exact_residual(received)
    A = sys.combined[keep, :]
    b = np.array([float(y[i]) for i in keep])
    x, _ = _admm_basis_pursuit(A, b, tol, max_iter)
    return x[:n].copy(), x[n:].copy()


def l1_decode(
    received: Sequence[Pair],
    sys: OnlineSystem,
    tol: float = 1e-6,
    max_iter: int = 100_000,
):
    """Convex relaxation of sparse error recovery; returns (u, v).

    The recovered pair satisfies  zhat - u = B (ahat - v)  up to tol; its
    objective is within solver tolerance of the linear-program optimum.
    """
    return erasure_decode(received, set(), sys, tol, max_iter)


# ---------------------------------------------------------------------------
# Exact combinatorial ground truth

def l0_oracle(received: Sequence[Pair], sys: OnlineSystem, max_support: int = 3):
    """Minimal-support exact solutions of u - B v = residual.

    Searches all supports of total size <= max_support in exact rational
    arithmetic.  Returns (k_min, solutions) where each solution is a length
    2n tuple of Fractions, or (None, []) when nothing fits the budget.
    """
    import itertools

    n = sys.n
    y = [Fraction(v) for v in _exact_residual(received)]
    if not any(y):
        return 0, [tuple(Fraction(0) for _ in range(2 * n))]

    def column(idx):
        if idx < n:
            return [Fraction(1) if i == idx else Fraction(0) for i in range(n)]
        j = idx - n
        return [Fraction(-binomial(i, j)) for i in range(n)]

    for k in range(1, max_support + 1):
        sols = []
        for support in itertools.combinations(range(2 * n), k):
            cols = [column(idx) for idx in support]
            sol = _exact_solve_overdetermined(cols, y)
            if sol is not None:
                full = [Fraction(0)] * (2 * n)
                for idx, val in zip(support, sol):
                    full[idx] = val
                sols.append(tuple(full))
        if sols:
            return k, sols
    return None, []


def _exact_solve_overdetermined(cols, rhs):
    """Solve sum_j x_j cols[j] = rhs exactly, or None when inconsistent."""
    n, k = len(rhs), len(cols)
    m = [[cols[j][i] for j in range(k)] + [rhs[i]] for i in range(n)]
    row = 0
    pivots = []
    for col in range(k):
        piv = next((i for i in range(row, n) if m[i][col] != 0), None)
        if piv is None:
            continue
        m[row], m[piv] = m[piv], m[row]
        inv = Fraction(1) / m[row][col]
        m[row] = [v * inv for v in m[row]]
        for i in range(n):
            if i != row and m[i][col] != 0:
                f = m[i][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[row])]
        pivots.append(col)
        row += 1
    for i in range(row, n):
        if m[i][k] != 0:
            return None
    sol = [Fraction(0)] * k
    for rI, col in enumerate(pivots):
        sol[col] = m[rI][k]
    return sol


# ---------------------------------------------------------------------------
# Restricted-isometry probes

def _probe_matrix(combined: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(combined, axis=0)
    norms = np.where(norms == 0, 1.0, norms)
    return combined / norms


def _rip_scan(A: np.ndarray, S: int, trials: int, rng: random.Random, source: str,
              complex_w: bool) -> RipEstimate:
    """Max deviation over trials and over all sparsity prefixes s <= S.

    Per trial, one column permutation and one Gaussian vector are drawn and
    shared across prefixes, so estimates at different S scan nested
    structures and the reported value is monotone in both S and trials on a
    shared seed stream.  The result lower-bounds the true constant.
    """
    d = A.shape[1]
    if S < 1 or S > d:
        raise ValueError(f"sparsity must lie in [1, {d}]")
    base = rng.getrandbits(64)
    worst = 0.0
    for t in range(trials):
        tr = random.Random(spawn_seed(base, "rip", t))
        perm = tr.sample(range(d), d)
        if complex_w:
            g = np.array(
                [complex(tr.gauss(0, 1), tr.gauss(0, 1)) for _ in range(S)]
            )
        else:
            g = np.array([tr.gauss(0, 1) for _ in range(S)])
        for s in range(1, S + 1):
            w = g[:s]
            nw = np.linalg.norm(w)
            if nw == 0:
                continue
            cols = A[:, perm[:s]]
            val = np.linalg.norm(cols @ w) ** 2 / nw**2
            dev = abs(val - 1.0)
            if dev > worst:
                worst = dev
    return RipEstimate(source=source, sparsity=S, trials=trials, delta_hat=worst)


def rip_probe(sys: OnlineSystem, S: int, trials: int, rng: random.Random) -> RipEstimate:
    """Empirical restricted-isometry deviation of [I | -B], columns normalized."""
    return _rip_scan(_probe_matrix(sys.combined), S, trials, rng, "newton", False)


def variant_matrix(source: str, n: int, theta: float | None = None,
                   ell: int | None = None) -> np.ndarray:
    """Lower-triangular generalized binomial matrix as floating values.

    Sources: 'newton' (plain binomials), 'cyclotomic' (q a primitive root of
    unity of prime order > n^3), 'sunflower' (q = e^(2*pi*I*theta)), 'weyl'
    (per-column points at square multiples of theta).
    """
    if source == "newton":
        return build_online_system(n).B.astype(complex)
    if theta is None:
        theta = (math.sqrt(5) - 1) / 2
    if source == "cyclotomic":
        from treecode.variants import smallest_prime_above

        if ell is None:
            ell = smallest_prime_above(n**3)
        weights = [np.exp(2j * math.pi * s / ell) for s in range(n)]
    elif source == "sunflower":
        weights = [np.exp(2j * math.pi * ((s * theta) % 1.0)) for s in range(n)]
    elif source == "weyl":
        weights = [np.exp(2j * math.pi * ((s * s * theta) % 1.0)) for s in range(n)]
    else:
        raise ValueError(f"unknown source {source!r}")
    M = np.zeros((n, n), dtype=complex)
    for r in range(n):
        M[r, 0] = 1.0
        M[r, r] = 1.0
        for s in range(1, r):
            M[r, s] = M[r - 1, s - 1] + weights[s] * M[r - 1, s]
    return M


def variant_rip_probe(source: str, n: int, S: int, trials: int, rng: random.Random,
                      theta: float | None = None, ell: int | None = None) -> RipEstimate:
    """rip_probe generalized over the variant coefficient matrices."""
    if source == "newton":
        est = rip_probe(build_online_system(n), S, trials, rng)
        return est
    M = variant_matrix(source, n, theta=theta, ell=ell)
    combined = np.hstack([np.eye(n, dtype=complex), -M])
    return _rip_scan(_probe_matrix(combined), S, trials, rng, source, True)
