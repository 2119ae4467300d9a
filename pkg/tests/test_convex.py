import random
from fractions import Fraction

import numpy as np
import pytest

from treecode.core import encode_tc
from treecode.convex import (
    build_online_system,
    erasure_decode,
    l0_oracle,
    l1_decode,
    rip_probe,
    variant_matrix,
    variant_rip_probe,
)


def test_build_online_system_small():
    sys = build_online_system(3)
    assert sys.B.tolist() == [[1, 0, 0], [1, 1, 0], [1, 2, 1]]
    assert sys.combined.shape == (3, 6)
    assert np.array_equal(sys.combined[:, :3], np.eye(3))
    assert np.array_equal(sys.combined[:, 3:], -sys.B)


def test_build_online_system_guard():
    with pytest.raises(ValueError):
        build_online_system(41)
    sys = build_online_system(40)
    # entries remain exactly representable
    from treecode.core import binomial

    assert sys.B[39, 19] == float(binomial(39, 19))


def test_b_strictly_online():
    sys = build_online_system(12)
    for i in range(12):
        for j in range(i + 1, 12):
            assert sys.B[i, j] == 0.0


def test_l1_zero_error_is_zero():
    z = [2, -1, 3, 0, 1, -2, 4, 1]
    sys = build_online_system(8)
    u, v = l1_decode(encode_tc(z), sys)
    assert np.max(np.abs(u)) <= 1e-6
    assert np.max(np.abs(v)) <= 1e-6


def test_l1_single_eval_error_recovery():
    n = 16
    sys = build_online_system(n)
    rng = random.Random(3)
    z = [rng.randint(-3, 3) for _ in range(n)]
    pairs = [list(p) for p in encode_tc(z)]
    pairs[3][0] += 1
    pairs = [tuple(p) for p in pairs]
    u, v = l1_decode(pairs, sys)
    want = np.zeros(n)
    want[3] = 1.0
    assert np.max(np.abs(u - want)) <= 1e-4
    assert np.sum(np.abs(v)) <= 1e-4


def test_l1_dimension_mismatch():
    sys = build_online_system(8)
    with pytest.raises(ValueError):
        l1_decode(encode_tc([1, 2, 3]), sys)


def test_l1_objective_never_beaten_by_feasible_point():
    # the solver objective is at most the injected-error objective plus tol
    n = 12
    sys = build_online_system(n)
    rng = random.Random(7)
    for trial in range(5):
        z = [rng.randint(-3, 3) for _ in range(n)]
        pairs = [list(p) for p in encode_tc(z)]
        injected = 0.0
        for pos in rng.sample(range(n), 2):
            delta = rng.choice([-2, -1, 1, 2])
            pairs[pos][0] += delta
            injected += abs(delta)
        pairs = [tuple(p) for p in pairs]
        u, v = l1_decode(pairs, sys)
        got = np.sum(np.abs(u)) + np.sum(np.abs(v))
        assert got <= injected + 1e-4


def test_l1_deterministic():
    n = 10
    sys = build_online_system(n)
    z = list(range(-5, 5))
    pairs = [list(p) for p in encode_tc(z)]
    pairs[4][0] += 2
    pairs = [tuple(p) for p in pairs]
    u1, v1 = l1_decode(pairs, sys)
    u2, v2 = l1_decode(pairs, sys)
    assert np.array_equal(u1, u2) and np.array_equal(v1, v2)


def test_erasure_empty_equals_l1():
    n = 10
    sys = build_online_system(n)
    z = [1, -2, 0, 3, 1, 0, -1, 2, 2, -3]
    pairs = [list(p) for p in encode_tc(z)]
    pairs[2][0] += 1
    pairs = [tuple(p) for p in pairs]
    u1, v1 = l1_decode(pairs, sys)
    u2, v2 = erasure_decode(pairs, set(), sys)
    assert np.array_equal(u1, u2) and np.array_equal(v1, v2)


def test_erasure_exact_encoding_rows_erased():
    n = 8
    sys = build_online_system(n)
    z = [0, 1, -1, 2, 0, 1, 1, -2]
    u, v = erasure_decode(encode_tc(z), {1, 5}, sys)
    assert np.max(np.abs(u)) <= 1e-6
    assert np.max(np.abs(v)) <= 1e-6


def test_erasure_covers_all_corruptions():
    n = 16
    sys = build_online_system(n)
    rng = random.Random(11)
    z = [rng.randint(-3, 3) for _ in range(n)]
    pairs = [list(p) for p in encode_tc(z)]
    corrupted = {2, 7, 12}
    for i in corrupted:
        pairs[i][0] += rng.choice([-3, -1, 1, 3])
    pairs = [tuple(p) for p in pairs]
    u, v = erasure_decode(pairs, corrupted, sys)
    # with every corrupted constraint erased, the zero solution is optimal
    assert np.sum(np.abs(u)) + np.sum(np.abs(v)) <= 1e-4


def test_erasure_validates_indices():
    sys = build_online_system(4)
    with pytest.raises(ValueError):
        erasure_decode(encode_tc([1, 2, 3, 4]), {9}, sys)


def test_l0_oracle_finds_injected_error():
    n = 10
    sys = build_online_system(n)
    z = [1, 0, -2, 3, 1, -1, 0, 2, 1, 0]
    pairs = [list(p) for p in encode_tc(z)]
    pairs[4][0] += 2
    pairs = [tuple(p) for p in pairs]
    k, sols = l0_oracle(pairs, sys)
    assert k == 1
    assert any(sol[4] == Fraction(2) for sol in sols)


def test_l0_oracle_zero_case():
    sys = build_online_system(6)
    k, sols = l0_oracle(encode_tc([1, 2, 3, 4, 5, 6]), sys)
    assert k == 0 and len(sols) == 1


def test_l1_versus_l0_oracle_on_single_errors():
    # the relaxation can genuinely beat the sparse solution through the huge
    # late binomial columns; what must always hold is that the solver output
    # is feasible and its objective never exceeds the sparse optimum.  The
    # agreement-rate baseline on pinned seeds lives in the acceptance suite.
    n = 16
    sys = build_online_system(n)
    agree = 0
    trials = 20
    for t in range(trials):
        rng = random.Random(500 + t)
        z = [rng.randint(-3, 3) for _ in range(n)]
        pairs = [list(p) for p in encode_tc(z)]
        pos = rng.randrange(n)
        pairs[pos][0] += rng.choice([-1, 1])
        pairs = [tuple(p) for p in pairs]
        k, sols = l0_oracle(pairs, sys, max_support=2)
        assert k == 1
        u, v = l1_decode(pairs, sys)
        x = np.concatenate([u, v])
        l0_obj = min(sum(abs(float(c)) for c in sol) for sol in sols)
        assert np.sum(np.abs(x)) <= l0_obj + 1e-4
        if any(
            np.max(np.abs(x - np.array([float(c) for c in sol]))) <= 1e-4 for sol in sols
        ):
            agree += 1
    assert agree == 16  # frozen observation for this seed set


def test_rip_probe_s1_isometric():
    sys = build_online_system(24)
    est = rip_probe(sys, 1, 300, random.Random(0))
    assert est.delta_hat <= 2**-50
    assert est.sparsity == 1 and est.trials == 300


def test_rip_probe_monotone_in_s_and_trials():
    sys = build_online_system(16)
    e2 = rip_probe(sys, 2, 200, random.Random(9))
    e4 = rip_probe(sys, 4, 200, random.Random(9))
    assert e2.delta_hat <= e4.delta_hat
    few = rip_probe(sys, 3, 50, random.Random(9))
    more = rip_probe(sys, 3, 200, random.Random(9))
    assert few.delta_hat <= more.delta_hat


def test_variant_matrix_lower_triangular_and_boundary():
    for source in ("newton", "cyclotomic", "sunflower", "weyl"):
        M = variant_matrix(source, 8)
        for i in range(8):
            assert M[i, i] == 1.0 or abs(M[i, i] - 1.0) < 1e-12
            for j in range(i + 1, 8):
                assert M[i, j] == 0.0


def test_variant_matrix_newton_matches_binomials():
    from treecode.core import binomial

    M = variant_matrix("newton", 10)
    for i in range(10):
        for j in range(i + 1):
            assert M[i, j] == complex(binomial(i, j))


def test_variant_rip_probe_contract():
    est = variant_rip_probe("sunflower", 12, 1, 100, random.Random(2))
    assert est.delta_hat <= 1e-9
    assert est.source == "sunflower"
    e_newton = variant_rip_probe("newton", 12, 3, 100, random.Random(4))
    direct = rip_probe(build_online_system(12), 3, 100, random.Random(4))
    assert e_newton.delta_hat == direct.delta_hat
    with pytest.raises(ValueError):
        variant_rip_probe("nope", 8, 2, 10, random.Random(0))
