import math
import numpy as np
import pytest

import oracles
from lyapopt.certify import EuclideanNorm, PolygonalNorm, barabanov_norm, cuneo_potential
from lyapopt.cocycle import OneStepCocycle, beta_bracket, beta_lower
from lyapopt.errors import InputError
from lyapopt.mather import (
    OptimalPair,
    compare_maximizers,
    cross_ratio,
    entropy_scaling_curve,
    mather_word_set,
    maximizing_orbits,
    optimal_pairs,
    verify_cross_ratio_certificate,
    verify_norm_monotonicity,
)
from lyapopt.projcone import Arc, Multicone
from lyapopt.symbolics import CyclicWord

PI = math.pi
A1 = np.array([[5.0, 2.0], [2.0, 1.0]])
A2 = np.array([[1.0, 2.0], [2.0, 5.0]])
NOC = OneStepCocycle((A1, A2))
SINGLE = OneStepCocycle((A1,))
EQUAL = OneStepCocycle((np.diag([2.0, 1.0]), np.diag([2.0, 1.0])))
QUADRANT = Multicone((Arc(0.0, PI / 2),))
LOG_SILVER = math.log(3 + 2 * math.sqrt(2))


@pytest.fixture(scope="module")
def noc_norm():
    return barabanov_norm(NOC, beta_bracket(NOC, 8))


@pytest.fixture(scope="module")
def noc_pairs(noc_norm):
    return optimal_pairs(NOC, noc_norm, mc=QUADRANT)


def symbols(cs):
    return sorted(c.symbols for c in cs)


class TestMaximizingOrbits:
    def test_noc_pair(self):
        orbits, value = maximizing_orbits(NOC, 6, 1e-9)
        assert symbols(orbits) == [(1,), (2,)]
        assert value == pytest.approx(LOG_SILVER, abs=1e-12)

    def test_single_and_equal(self):
        assert symbols(maximizing_orbits(SINGLE, 5)[0]) == [(1,)]
        orbits, value = maximizing_orbits(EQUAL, 2)
        assert symbols(orbits) == [(1,), (1, 2), (2,)]
        assert value == pytest.approx(math.log(2))

    def test_value_is_beta_lower(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            A = OneStepCocycle(tuple(rng.normal(size=(2, 2)) for _ in range(2)))
            assert maximizing_orbits(A, 6)[1] == beta_lower(A, 6)[0]

    def test_against_brute_force(self):
        rng = np.random.default_rng(12)
        mats = [rng.normal(size=(2, 2)) for _ in range(3)]
        A = OneStepCocycle(tuple(mats))
        orbits, value = maximizing_orbits(A, 5, 1e-9)
        assert value == pytest.approx(oracles.beta_lower(mats, 5), abs=1e-12)
        best = {w for n in range(1, 6) for w in oracles.necklaces(np.ones((3, 3)), n)
                if abs(math.log(oracles.spectral_radius(oracles.product(mats, w))) / n - value) <= 1e-9}
        assert {c.symbols for c in orbits} == best


def hereditary_oracle(mats, n, threshold):
    """Words all of whose subwords u satisfy log|A_u| >= |u| threshold (Euclidean)."""
    def good(u):
        return math.log(np.linalg.norm(oracles.product(mats, u), 2)) >= len(u) * threshold - 1e-12

    out = []
    for w in oracles.all_words(len(mats), n):
        if all(good(w[i:j]) for i in range(n) for j in range(i + 1, n + 1)):
            out.append(w)
    return out


class TestMatherWordSet:
    def test_equal_pair(self):
        for n in (2, 5, 8):
            for eps in (0.5, 0.01):
                m = mather_word_set(EQUAL, None, n, eps)
                assert len(m.survivors) == 2 ** n
                assert m.entropy_estimate == pytest.approx(math.log(2), abs=1e-9)

    def test_single_matrix(self):
        m = mather_word_set(SINGLE, None, 7, 0.1)
        assert m.survivors == [(1,) * 7] and m.entropy_estimate == 0.0

    def test_noc_pair_with_norm(self, noc_norm):
        m = mather_word_set(NOC, noc_norm, 12, 0.02)
        assert m.entropy_estimate <= 0.05
        assert (1,) * 12 in m.survivors and (2,) * 12 in m.survivors

    def test_survivors_match_oracle(self):
        rng = np.random.default_rng(6)
        for _ in range(5):
            mats = [rng.normal(size=(2, 2)) for _ in range(2)]
            A = OneStepCocycle(tuple(mats))
            b = beta_bracket(A, 6)
            m = mather_word_set(A, None, 6, 0.3, bracket=b)
            assert m.threshold == pytest.approx(b.midpoint - 0.3 - b.width)
            assert m.survivors == hereditary_oracle(mats, 6, m.threshold)

    def test_graph_is_overlap_core(self):
        rng = np.random.default_rng(7)
        mats = [rng.normal(size=(2, 2)) for _ in range(2)]
        m = mather_word_set(OneStepCocycle(tuple(mats)), None, 6, 0.5)
        if m.graph is None:
            pytest.skip("no cycle among survivors")
        q = m.graph.entries
        for i, u in enumerate(m.states):
            for j, v in enumerate(m.states):
                assert q[i, j] == (u[1:] == v[:-1])
        assert m.entropy_estimate == pytest.approx(oracles.entropy(q), abs=1e-9)
        assert m.entropy_estimate <= math.log(2) + 1e-12

    def test_empty_survivor_set(self):
        with pytest.raises(InputError, match="larger epsilon"):
            mather_word_set(NOC, EuclideanNorm(beta_hat=10.0), 4, 0.01)

    def test_validation(self):
        with pytest.raises(InputError):
            mather_word_set(NOC, None, 1, 0.1)
        with pytest.raises(InputError):
            mather_word_set(NOC, None, 4, 0.0)

    def test_serializes(self, noc_norm):
        d = mather_word_set(NOC, noc_norm, 6, 0.05).to_dict()
        assert d["n_survivors"] == len(d["survivors"]) and d["hereditary"] is True


class TestEntropyCurve:
    def test_noc_pair(self, noc_norm):
        table = entropy_scaling_curve(NOC, noc_norm, [6, 8, 10, 12], [0.05, 0.02])
        assert table.rows_nonincreasing()
        assert table.values[-1][-1] <= 0.05
        assert table.to_csv().splitlines()[0].startswith("epsilon")

    def test_equal_and_single(self):
        eq = entropy_scaling_curve(EQUAL, None, [4, 6], [0.05, 0.02])
        assert np.allclose(eq.values, math.log(2))
        single = entropy_scaling_curve(SINGLE, None, [4, 6], [0.05, 0.02])
        assert np.all(np.array(single.values) == 0.0)

    def test_single_scale_filter_is_not_monotone(self, noc_norm):
        # keeping only the top-level test lets long crossover words back in
        row = [mather_word_set(NOC, noc_norm, n, 0.05, hereditary=False).entropy_estimate for n in (6, 8, 10, 12)]
        assert row[0] == 0.0 and row[1] > 0.2
        assert any(b > a + 1e-9 for a, b in zip(row, row[1:]))

    def test_empty_lists(self):
        with pytest.raises(InputError):
            entropy_scaling_curve(NOC, None, [], [0.1])


class TestCrossRatio:
    def test_examples(self):
        assert cross_ratio((1, 0), (0, 1), (1, 1), (1, -1)) == pytest.approx(-1.0)
        assert cross_ratio((1, 0), (0, 1), (1, 0), (1, -1)) == 0.0

    def test_zero_denominator(self):
        with pytest.raises(InputError):
            cross_ratio((1, 0), (0, 1), (1, 1), (2, 0))

    def test_projective_invariance(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            a, b, c, d = rng.normal(size=(4, 2))
            m = rng.normal(size=(2, 2))
            ref = cross_ratio(a, b, c, d)
            assert cross_ratio(m @ a, m @ b, m @ c, m @ d) == pytest.approx(ref, rel=1e-9, abs=1e-9)
            assert cross_ratio(3 * a, b, 0.5 * c, 7 * d) == pytest.approx(ref, rel=1e-12)


class TestCertificates:
    def test_pairs_at_fixed_points(self, noc_pairs):
        assert [str(p.orbit) for p in noc_pairs] == ["1", "2"]
        p1 = noc_pairs[0]
        assert math.atan2(p1.v[1], p1.v[0]) % PI == pytest.approx(PI / 8, abs=1e-12)
        assert p1.e2_dir == pytest.approx(5 * PI / 8, abs=1e-9)
        assert all(p.defect <= 1e-6 for p in noc_pairs)

    def test_cross_ratio_certificate(self, noc_norm, noc_pairs):
        cert = verify_cross_ratio_certificate(NOC, noc_norm, noc_pairs)
        assert cert.passed and cert.min_abs >= 1 - 1e-6
        assert len(cert.values) == 4

    def test_self_pair_is_one(self, noc_norm, noc_pairs):
        cert = verify_cross_ratio_certificate(NOC, noc_norm, noc_pairs[:1])
        assert cert.min_abs == 1.0

    def test_random_non_optimal_vectors_go_below_one(self, noc_pairs):
        p, q = noc_pairs
        rng = np.random.default_rng(0)
        values = []
        for t in rng.uniform(0, PI, 200):
            try:
                values.append(abs(cross_ratio(oracles.direction(t), q.v, p.e2, q.e2)))
            except InputError:
                pass
        assert min(values) < 1.0

    def test_non_optimal_pair_rejected(self, noc_norm, noc_pairs):
        p = noc_pairs[0]
        bad = OptimalPair(p.orbit, p.e2, p.e2_dir)  # contracted, far from extremal growth
        with pytest.raises(InputError):
            verify_cross_ratio_certificate(NOC, noc_norm, [bad])

    def test_degenerate_pair_skipped(self, noc_norm, noc_pairs):
        p, q = noc_pairs
        # q's weak direction placed along p.v makes [p.v, q.v; p.e2, q.e2] undefined
        odd = OptimalPair(q.orbit, q.v, math.atan2(p.v[1], p.v[0]))
        with pytest.warns(UserWarning):
            cert = verify_cross_ratio_certificate(NOC, noc_norm, [p, odd])
        assert sorted(cert.skipped) == [("1", "2"), ("2", "1")]
        assert len(cert.values) == 2  # the two self-pairs

    def test_monotonicity(self, noc_norm, noc_pairs):
        for p in noc_pairs:
            assert verify_norm_monotonicity(NOC, noc_norm, p, p.v)
            for t in (-0.5, -0.1, 0.1, 0.5):
                assert verify_norm_monotonicity(NOC, noc_norm, p, p.v + t * p.e2)
            # one of the two larger steps leaves the quadrant; the small ones stay inside
            for t in (-0.1, 0.1):
                assert verify_norm_monotonicity(NOC, noc_norm, p, p.v + t * p.e2, mc=QUADRANT)

    def test_monotonicity_negative_control(self, noc_norm, noc_pairs):
        t = np.linspace(0, 2 * PI, 400, endpoint=False)
        ellipse = np.column_stack([2 * np.cos(t), 0.5 * np.sin(t)])
        c, s = math.cos(0.5), math.sin(0.5)
        skew = PolygonalNorm.from_points(ellipse @ np.array([[c, -s], [s, c]]).T, beta_hat=noc_norm.beta_hat)
        p = noc_pairs[0]
        results = [verify_norm_monotonicity(NOC, skew, p, p.v + t * p.e2) for t in (-0.5, -0.1, 0.1, 0.5)]
        assert not all(results)

    def test_monotonicity_preconditions(self, noc_norm, noc_pairs):
        p = noc_pairs[0]
        with pytest.raises(InputError):
            verify_norm_monotonicity(NOC, noc_norm, p, p.v + np.array([0.1, 0.0]))
        with pytest.raises(InputError):
            verify_norm_monotonicity(NOC, noc_norm, p, p.v - 2.0 * p.e2, mc=QUADRANT)
        with pytest.raises(InputError):
            verify_norm_monotonicity(NOC, noc_norm, p, p.v - p.v + p.e2)


class TestCompareMaximizers:
    def test_noc_pair_window_six(self):
        cmp = compare_maximizers(NOC, cuneo_potential(NOC, QUADRANT, 6), 6)
        assert cmp.equal
        assert symbols(cmp.lyapunov_set) == symbols(cmp.potential_set) == [(1,), (2,)]
        assert cmp.defect < cmp.gap / 2

    def test_gap_against_brute_force(self):
        cmp = compare_maximizers(NOC, cuneo_potential(NOC, QUADRANT, 6), 6)
        vals = sorted({round(math.log(oracles.spectral_radius(oracles.product([A1, A2], w))) / n, 12)
                       for n in range(1, 7) for w in oracles.necklaces(np.ones((2, 2)), n)}, reverse=True)
        assert cmp.gap == pytest.approx(vals[0] - vals[1], abs=1e-9)
        assert cmp.gap == pytest.approx(0.1107, abs=1e-4)

    def test_window_one_inconclusive(self):
        cmp = compare_maximizers(NOC, cuneo_potential(NOC, QUADRANT, 1), 6)
        assert cmp.verdict == "inconclusive"
        assert cmp.defect >= cmp.gap / 2

    def test_single_matrix(self):
        mc = Multicone((Arc(0.2, 0.4),))
        for m in (1, 3):
            cmp = compare_maximizers(SINGLE, cuneo_potential(SINGLE, mc, m), 6)
            assert cmp.equal and symbols(cmp.potential_set) == [(1,)]
            assert cmp.to_dict()["gap"] is None

    def test_serialization(self):
        d = compare_maximizers(NOC, cuneo_potential(NOC, QUADRANT, 4), 6).to_dict()
        assert d["lyapunov_set"] == ["1", "2"]
