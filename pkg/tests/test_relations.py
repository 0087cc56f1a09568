"""Integer relation search and rational rank certification."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from trilat import (
    exact_integer_det,
    find_integer_relation_brute,
    find_integer_relation_reduced,
    rational_rank_at_least,
)

PHI = (1.0 + 5.0**0.5) / 2.0


def planted(rng, k, bound):
    """Random w whose last entry is forced onto a random integer relation."""
    while True:
        c = rng.integers(-bound, bound + 1, size=k)
        if c.any() and c[-1] != 0:
            w = rng.uniform(0.5, 3.0, size=k)
            w[-1] = -float(c[:-1] @ w[:-1]) / float(c[-1])
            if 1e-3 < abs(w[-1]) < 1e3:
                return w


class TestBrute:
    def test_glued_rectangle_values(self):
        # two values coincide by construction, so a +-1 relation must exist
        w = 1.7 * np.array([3.0, 4.0, 5.0, 5.0, 4.0, 3.0])
        cert = find_integer_relation_brute(w, 1)
        assert cert.kind == "relation"
        assert cert.coefficients == (0, 0, 1, -1, 0, 0)  # first in scan order
        assert cert.residual == pytest.approx(0.0, abs=1e-12)

    def test_equal_pair(self):
        cert = find_integer_relation_brute(np.array([1.0, 1.0]), 1)
        assert cert.kind == "relation"
        assert cert.coefficients == (1, -1)

    def test_generic_base_values_independent(self, rng):
        from trilat import canonical_matrix, measure_all_lengths, random_configuration

        cfg = random_configuration(4, 2, rng)
        n = canonical_matrix("base", 2)
        w = np.array(n.entries, dtype=float) @ measure_all_lengths(cfg)
        assert find_integer_relation_brute(w, 1).kind == "independent"
        # at the loop-data bound 2^5 the window must shrink with the box
        assert find_integer_relation_brute(w, 32, tol=1e-13).kind == "independent"

    def test_matches_exhaustive_oracle(self, rng):
        for _ in range(40):
            k = int(rng.integers(2, 5))
            bound = int(rng.integers(1, 4))
            if rng.random() < 0.5:
                w = planted(rng, k, bound)
            else:
                w = rng.uniform(0.5, 3.0, size=k)
            mine = find_integer_relation_brute(w, bound)
            ref = oracles.brute_integer_relation(w, bound)
            assert (mine.kind == "relation") == (ref is not None)
            if ref is not None:
                assert mine.coefficients == ref

    def test_scan_order_prefers_small_coefficients(self):
        # both (1,-1,0) and larger vectors qualify; the max-norm-first order
        # must return the +-1 hit
        w = np.array([2.0, 2.0, 4.0])
        cert = find_integer_relation_brute(w, 3)
        assert cert.coefficients == (1, -1, 0)

    def test_meet_in_middle_consistency(self, rng):
        # bound 13 at k=6 exceeds the direct-enumeration budget, so this
        # exercises the split-box route; bound 3 stays naive
        w = planted(rng, 6, 3)
        fast = find_integer_relation_brute(w, 13, tol=1e-12)
        slow = find_integer_relation_brute(w, 3, tol=1e-12)
        assert fast.kind == slow.kind == "relation"
        assert fast.coefficients == slow.coefficients

    def test_meet_in_middle_independence(self, rng):
        w = rng.uniform(1.0, 2.0, size=6)
        assert find_integer_relation_brute(w, 13, tol=1e-12).kind == "independent"


class TestReduced:
    def test_golden_ratio(self):
        cert = find_integer_relation_reduced(np.array([1.0, PHI, PHI * PHI]), 10.0)
        assert cert.kind == "relation"
        assert cert.coefficients == (1, 1, -1)

    def test_random_reals_independent_at_large_norm(self, rng):
        for k in (3, 4, 6):
            w = rng.uniform(1.0, 2.0, size=k)
            assert find_integer_relation_reduced(w, 1e6).kind == "independent"

    def test_scaled_345(self):
        w = 1.7 * np.array([3.0, 4.0, 5.0])
        cert = find_integer_relation_reduced(w, 10.0)
        assert cert.kind == "relation"
        c = np.asarray(cert.coefficients, dtype=float)
        assert abs(float(c @ w)) < 1e-9

    def test_agreement_with_brute(self, rng):
        disagreements = 0
        for t in range(1000):
            k = int(rng.integers(2, 5))
            bound = int(rng.integers(1, 21))
            if t % 2 == 0:
                w = planted(rng, k, bound)
            else:
                w = rng.uniform(0.5, 3.0, size=k)
            b = find_integer_relation_brute(w, bound)
            r = find_integer_relation_reduced(w, float(bound))
            disagreements += (b.kind == "relation") != (r.kind == "relation")
        assert disagreements == 0

    @settings(max_examples=80, deadline=None)
    @given(
        seed=st.integers(min_value=0, max_value=2**32 - 1),
        k=st.integers(min_value=2, max_value=5),
        bound=st.integers(min_value=1, max_value=8),
    )
    def test_property_planted_relations_found(self, seed, k, bound):
        gen = np.random.default_rng(seed)
        w = planted(gen, k, bound)
        assert find_integer_relation_brute(w, bound).kind == "relation"
        assert find_integer_relation_reduced(w, float(bound)).kind == "relation"


class TestSoundness:
    @settings(max_examples=80, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=2**32 - 1))
    def test_property_certified_relations_evaluate_small(self, seed):
        """Any returned relation must actually annihilate the input."""
        gen = np.random.default_rng(seed)
        k = int(gen.integers(2, 6))
        bound = int(gen.integers(1, 6))
        w = planted(gen, k, bound) if seed % 2 else gen.uniform(0.5, 3.0, size=k)
        maxw = float(np.abs(w).max())
        for cert in (
            find_integer_relation_brute(w, bound),
            find_integer_relation_reduced(w, float(bound)),
        ):
            if cert.kind != "relation":
                continue
            c = np.asarray(cert.coefficients, dtype=float)
            assert c.any()
            assert np.abs(cert.coefficients).max() <= cert.bound_used
            assert abs(float(c @ w)) < 1e-9 * float(np.abs(c).sum() + 1) * maxw

    def test_dependent_functionals_always_related(self, rng):
        """Values measured by linearly dependent functionals admit a relation."""
        from trilat import (
            Configuration,
            Path,
            apply_functional,
            functional_from_path,
        )

        for _ in range(25):
            pts = rng.uniform(-2.0, 2.0, size=(4, 2))
            cfg = Configuration(2, pts)
            fs = [
                functional_from_path(Path.ping(0, 1), 4),
                functional_from_path(Path.ping(0, 2), 4),
                functional_from_path(Path.triangle(0, 1, 2), 4),
            ]
            w = np.array([apply_functional(f, cfg) for f in fs])
            # add the dependent combination ping(1,2) = 2*tri - ping(0,1) - ping(0,2)
            w = np.append(w, 2.0 * w[2] - w[0] - w[1])
            assert find_integer_relation_brute(w, 2).kind == "relation"
            assert find_integer_relation_reduced(w, 4.0).kind == "relation"


class TestRationalRank:
    def test_glued_set_not_rank_6(self):
        w = 1.7 * np.array([3.0, 4.0, 5.0, 5.0, 4.0, 3.0])
        v = rational_rank_at_least(w, 6, 1, "brute")
        assert not v.at_least
        assert v.certificate is not None and v.certificate.kind == "relation"

    def test_generic_base_measurements_rank_6(self, rng):
        from trilat import canonical_matrix, measure_all_lengths, random_configuration

        cfg = random_configuration(4, 2, rng)
        n = canonical_matrix("base", 2)
        w = np.array(n.entries, dtype=float) @ measure_all_lengths(cfg)
        assert rational_rank_at_least(w, 6, 1, "brute").at_least
        assert rational_rank_at_least(w, 6, 2, "brute", tol=1e-13).at_least

    def test_rank_one_trivial(self):
        assert rational_rank_at_least(np.array([0.0, 2.5]), 1, 3).at_least

    def test_reports_offending_subset(self):
        w = np.array([1.3, 2.9, 1.3 + 2.9])
        v = rational_rank_at_least(w, 3, 2)
        assert not v.at_least
        assert v.subset == (0, 1, 2)
        assert v.certificate.coefficients == (1, 1, -1)

    def test_subset_search_finds_partial_rank(self):
        # rank is exactly 2: any pair avoiding the glue certifies it
        w = np.array([1.3, 1.3, 2.9])
        v = rational_rank_at_least(w, 2, 2)
        assert v.at_least

    def test_distinct_strategy_needs_assumption(self):
        with pytest.raises(ValueError):
            rational_rank_at_least(np.array([1.0, 2.0]), 2, 2, "distinct")
        v = rational_rank_at_least(
            np.array([1.0, 2.0, 3.3]), 3, 2, "distinct", assume_restricted=True
        )
        assert v.at_least
        v2 = rational_rank_at_least(
            np.array([1.0, 2.0, 1.0]), 3, 2, "distinct", assume_restricted=True
        )
        assert not v2.at_least


class TestExactIntegerDet:
    def test_small_examples(self):
        assert exact_integer_det([[2, 0], [0, 2]]) == 4
        assert exact_integer_det([[1, 2], [2, 4]]) == 0
        assert exact_integer_det([[0, 1], [1, 0]]) == -1

    def test_matches_float_det(self, rng):
        for _ in range(50):
            n = int(rng.integers(1, 6))
            m = rng.integers(-9, 10, size=(n, n))
            want = round(float(np.linalg.det(m)))
            assert exact_integer_det(m.tolist()) == want

    def test_big_entries_stay_exact(self):
        # floats would lose these low-order bits
        m = [[10**8, 1], [1, 10**8]]
        assert exact_integer_det(m) == 10**16 - 1
