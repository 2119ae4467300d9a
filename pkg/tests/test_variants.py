import itertools
import math
import random

import pytest

from treecode.core import binomial, encode_tc
from treecode.lgv import BudgetExceeded, IndexPairSelection, pascal_submatrix_det
from treecode.variants import (
    CyclotomicDomain,
    CyclotomicElement,
    HPComplex,
    PrecisionUnderflow,
    QPoly,
    SymbolicQDomain,
    UnitCircleDomain,
    carlitz_newton_coeffs,
    check_distance_exhaustive,
    cyclotomic_unit,
    det_laplace,
    encode_cyclotomic,
    encode_sunflower,
    encode_weyl_squares,
    forward_evaluate,
    golden_section,
    hp_det_with_error,
    q_binomial,
    q_lgv_det,
    smallest_prime_above,
)


def qbin_oracle(r, s):
    # independent recurrence, dense dict-based polynomials
    if s > r:
        return {}
    if s == 0 or s == r:
        return {0: 1}
    a = qbin_oracle(r - 1, s - 1)
    b = qbin_oracle(r - 1, s)
    out = dict(a)
    for k, v in b.items():
        out[k + s] = out.get(k + s, 0) + v
    return {k: v for k, v in out.items() if v}


def test_q_binomial_examples():
    assert q_binomial(3, 3) == QPoly((1,))
    assert q_binomial(2, 1) == QPoly((1, 1))
    assert q_binomial(4, 2) == QPoly((1, 1, 2, 1, 1))
    assert q_binomial(1, 2) == QPoly()


def test_q_binomial_matches_oracle_and_counts():
    for r in range(13):
        for s in range(13):
            got = dict(enumerate(q_binomial(r, s).coeffs))
            got = {k: v for k, v in got.items() if v}
            assert got == qbin_oracle(r, s)
            assert q_binomial(r, s)(1) == binomial(r, s)


def all_selections(max_d, max_row):
    vals = range(max_row + 1)
    for d in range(1, max_d + 1):
        for rows in itertools.combinations(vals, d):
            for cols in itertools.combinations(vals, d):
                if all(r >= c for r, c in zip(rows, cols)):
                    yield IndexPairSelection(rows, cols)


def test_q_lgv_det_examples():
    assert q_lgv_det(IndexPairSelection((0, 1, 2), (0, 1, 2))) == QPoly((1,))
    assert q_lgv_det(IndexPairSelection((1, 2), (0, 1))) == QPoly((0, 1))


def test_q_lgv_det_structure_small():
    # monic of the path degree, nonnegative coefficients, sub-leading sum
    # equal to the integer determinant minus one (depth-limited here; the
    # acceptance suite runs d <= 3, rows <= 7)
    for sel in all_selections(2, 6):
        det = q_lgv_det(sel)
        deg = sum(c * (r - c) for r, c in zip(sel.rows, sel.cols))
        assert det.degree == deg, sel
        assert det.coeffs[-1] == 1
        assert all(v >= 0 for v in det.coeffs)
        assert sum(det.coeffs[:-1]) == pascal_submatrix_det(sel) - 1


def test_det_laplace_matches_integer_det():
    rng = random.Random(0)
    for _ in range(50):
        d = rng.randint(1, 4)
        mat = [[QPoly.const(rng.randint(-5, 5)) for _ in range(d)] for _ in range(d)]
        sym = det_laplace(mat)
        from treecode.lgv import _bareiss_det

        plain = _bareiss_det([[m.coeffs[0] if m.coeffs else 0 for m in row] for row in mat])
        assert sym == QPoly.const(plain)


def test_carlitz_coefficients_symbolic():
    dom = SymbolicQDomain()
    assert carlitz_newton_coeffs([0, 0, 0], dom) == [QPoly(), QPoly(), QPoly()]
    ones = carlitz_newton_coeffs([1, 1, 1, 1], dom)
    assert ones == [QPoly((1,)), QPoly(), QPoly(), QPoly()]
    b = carlitz_newton_coeffs([0, 0, 1], dom)
    assert b == [QPoly(), QPoly(), QPoly((1,))]
    # forward evaluation reproduces the input
    z = [3, -1, 4, 1, -5]
    back = forward_evaluate(carlitz_newton_coeffs(z, dom), dom)
    assert back == [QPoly.const(v) for v in z]


def test_carlitz_matches_alternating_inversion_formula():
    # b_j = sum_i z_i * (-1)^(j-i) * q^C(j-i, 2) * [j, i]_q
    dom = SymbolicQDomain()
    rng = random.Random(1)
    for _ in range(20):
        n = rng.randint(1, 7)
        z = [rng.randint(-4, 4) for _ in range(n)]
        got = carlitz_newton_coeffs(z, dom)
        for j in range(n):
            acc = QPoly()
            for i in range(j + 1):
                term = q_binomial(j, i) * z[i]
                term = term * QPoly.monomial(binomial(j - i, 2))
                if (j - i) % 2 == 1:
                    term = -term
                acc = acc + term
            assert acc == got[j], (z, j)


def test_smallest_prime_above():
    assert smallest_prime_above(27) == 29
    assert smallest_prime_above(64) == 67
    assert smallest_prime_above(1) == 2


def test_cyclotomic_element_basics():
    ell = 7
    z1 = CyclotomicElement.zeta_power(ell, 1)
    acc = CyclotomicElement.from_int(ell, 1)
    prod = CyclotomicElement.from_int(ell, 1)
    for _ in range(ell):
        prod = prod * z1
    assert prod == CyclotomicElement.from_int(ell, 1)  # zeta^ell = 1
    total = CyclotomicElement.from_int(ell, 0)
    for k in range(ell):
        total = total + CyclotomicElement.zeta_power(ell, k)
    assert total.is_zero()  # 1 + zeta + ... + zeta^(ell-1) = 0
    with pytest.raises(ValueError):
        CyclotomicElement(6, [1])


def test_cyclotomic_round_trip_exact():
    ell = 29  # 29 > 27 = 3^3
    z = [2, -3, 5]
    pairs = encode_cyclotomic(z, ell)
    dom = CyclotomicDomain(ell, depth=len(z))
    back = forward_evaluate([b for _, b in pairs], dom)
    assert back == [CyclotomicElement.from_int(ell, v) for v in z]


def test_cyclotomic_preconditions():
    with pytest.raises(ValueError):
        encode_cyclotomic([1, 2, 3], 25)  # not prime
    with pytest.raises(ValueError):
        encode_cyclotomic([1, 2, 3], 23)  # 23 <= 27


def test_cyclotomic_unit_identity():
    # [r, s] * (eps_s ... eps_1) = eps_r ... eps_(r-s+1) in Z[zeta_29]
    ell = 29
    dom = CyclotomicDomain(ell, enforce_bound=False)
    from treecode.variants import QBinTable

    qb = QBinTable(dom)
    for r in range(7):
        for s in range(r + 1):
            lhs = qb(r, s)
            for k in range(1, s + 1):
                lhs = lhs * cyclotomic_unit(ell, k)
            rhs = CyclotomicElement.from_int(ell, 1)
            for k in range(r - s + 1, r + 1):
                rhs = rhs * cyclotomic_unit(ell, k)
            assert lhs == rhs, (r, s)


def test_cyclotomic_det_degree_bound():
    # the symbolic determinant has degree < n^3 <= ell - 1, so it cannot
    # vanish at a primitive ell-th root of unity
    n = 4
    for sel in all_selections(3, n):
        det = q_lgv_det(sel)
        assert det.degree < n**3


def test_hpcomplex_arithmetic_and_serialization():
    prec = 96
    a = HPComplex.from_int(3, prec)
    b = HPComplex.from_int(-2, prec)
    assert (a * b).to_complex() == pytest.approx(-6.0)
    assert (a + b).to_complex() == pytest.approx(1.0)
    ser = a.serialize()
    assert HPComplex.deserialize(ser) == a
    with pytest.raises(ValueError):
        a + HPComplex.from_int(1, 64)


def test_algebraic_angle_golden_matches_isqrt():
    theta = golden_section()
    for prec in (32, 80, 200):
        want = (math.isqrt(5 << (2 * prec)) - (1 << prec)) // 2
        assert theta.scaled(prec) == want


def test_sunflower_round_trip():
    z = [2, -4, 1, 0, 3, -1]
    pairs = encode_sunflower(z, prec=256)
    dom = UnitCircleDomain(golden_section(), 256, squares=False)
    back = forward_evaluate([f for _, f in pairs], dom)
    for v, got in zip(z, back):
        assert (got - HPComplex.from_int(v, 256)).magnitude() < 2**-64


def test_sunflower_zero_and_determinism():
    pairs = encode_sunflower([0, 0, 0], prec=128)
    assert all(f.is_zero() for _, f in pairs)
    a = encode_sunflower([1, -2, 3], prec=128)
    b = encode_sunflower([1, -2, 3], prec=128)
    assert [f.serialize() for _, f in a] == [f.serialize() for _, f in b]


def test_precision_underflow():
    with pytest.raises(PrecisionUnderflow):
        encode_sunflower([1, 2], prec=16)


def test_weyl_boundary_and_round_trip():
    dom = UnitCircleDomain(golden_section(), 128, squares=True)
    from treecode.variants import QBinTable

    qb = QBinTable(dom)
    for r in range(7):
        assert qb(r, r) == dom.one()
    z = [1, -2, 0, 3, 2]
    pairs = encode_weyl_squares(z, prec=512)
    dom512 = UnitCircleDomain(golden_section(), 512, squares=True)
    back = forward_evaluate([g for _, g in pairs], dom512)
    for v, got in zip(z, back):
        assert (got - HPComplex.from_int(v, 512)).magnitude() < 2**-64


def test_three_gap_structure():
    # circle gaps of {i * theta mod 1}: at most three distinct lengths, the
    # largest equal to the sum of the other two; exhaustive via 200-bit
    # dyadic approximations
    theta = golden_section()
    prec = 200
    one = 1 << prec
    ts = theta.scaled(prec)
    for n in (5, 8, 13, 21, 30):
        pts = sorted((i * ts) % one for i in range(n))
        gaps = [b - a for a, b in zip(pts, pts[1:])] + [one - pts[-1] + pts[0]]
        distinct: list[int] = []
        tol = 1 << 40  # 2^-160 slack on 200-bit values
        for g in gaps:
            for d in distinct:
                if abs(g - d) <= tol:
                    break
            else:
                distinct.append(g)
        assert len(distinct) <= 3, n
        if len(distinct) == 3:
            s = sorted(distinct)
            assert abs(s[2] - (s[0] + s[1])) <= 2 * tol
        assert min(gaps) == min(distinct)


def test_hp_determinant_margin_small_selections():
    for squares in (False, True):
        dom = UnitCircleDomain(golden_section(), 192, squares=squares)
        for sel in all_selections(2, 5):
            det, err = hp_det_with_error(sel, dom)
            assert det.magnitude() > err, (sel, squares, det.magnitude(), err)


def test_distance_check_chs_and_counterexample():
    assert check_distance_exhaustive(encode_tc, 5, (0, 1)) is None
    assert check_distance_exhaustive(encode_tc, 1, (0, 1)) is None
    # the identity "code" z -> (z_i, 0) fails the distance inequality
    bad = check_distance_exhaustive(lambda z: [(v, 0) for v in z], 3, (0, 1))
    assert bad is not None
    with pytest.raises(BudgetExceeded):
        check_distance_exhaustive(encode_tc, 8, (0, 1), budget=10)


def test_distance_check_cyclotomic_small():
    enc = lambda z: encode_cyclotomic(z, 29)
    assert check_distance_exhaustive(enc, 3, (0, 1)) is None
