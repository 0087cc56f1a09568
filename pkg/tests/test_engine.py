"""End-to-end behaviour of the trilateration engine: base recognition,
growth, result selection, and ground-truth verification."""

import numpy as np
import pytest

import oracles
from trilat import (
    Configuration,
    DataSet,
    NoBaseFound,
    apply_functional,
    build_trilateration_ensemble,
    canonical_matrix,
    find_candidate_bases,
    functional_from_path,
    measure,
    random_configuration,
    reconstruct,
    trilaterate_step,
    verify,
)
from trilat import engine
from trilat.engine import PartialReconstruction, grow


def simulate(n, d, mode, extra=0, seed=0, scale=1):
    """Hidden configuration, its shuffled dataset, and the aligned labels."""
    rng = np.random.default_rng(seed)
    cfg = random_configuration(n, d, rng)
    ens = build_trilateration_ensemble(n, d, mode, extra=extra, rng=rng)
    if scale != 1:
        ens = ens.scaled(scale)
    data, labeled = measure(ens, cfg, shuffle_seed=seed + 1)
    return cfg, data, labeled


def noise_dataset(size, seed=7, mode="loop"):
    values = np.random.default_rng(seed).uniform(1.0, 3.0, size=size)
    return DataSet(2, 2, mode, values)


class TestFindCandidateBases:
    @pytest.mark.parametrize("mode", ["loop", "path"])
    def test_minimal_instance_recovers_truth(self, mode):
        cfg, data, _ = simulate(4, 2, mode, seed=11)
        bases = find_candidate_bases(data)
        assert bases
        for base in bases:
            verdict = verify(cfg, base.embedded)
            assert verdict.matched and verdict.scale == 1

    def test_indices_address_the_dataset(self):
        cfg, data, _ = simulate(4, 2, "path", seed=3)
        base = find_candidate_bases(data)[0]
        idxs = base.value_indices
        assert len(set(idxs)) == 6
        assert all(0 <= i < data.size for i in idxs)
        # path-mode slots are flat K4 edges of the embedded geometry
        edges = oracles.flat_lengths(base.embedded.points)
        assert data.values[list(idxs)] == pytest.approx(edges, rel=1e-7)

    def test_loop_slots_follow_the_canonical_matrix(self):
        cfg, data, _ = simulate(4, 2, "loop", seed=5)
        base = find_candidate_bases(data)[0]
        entries = np.array(canonical_matrix("base", 2).entries, dtype=float)
        expected = entries @ np.array(oracles.flat_lengths(base.embedded.points))
        assert data.values[list(base.value_indices)] == pytest.approx(
            expected, rel=1e-7
        )

    def test_noise_yields_no_bases(self):
        assert find_candidate_bases(noise_dataset(9)) == []

    def test_undersized_dataset_yields_no_bases(self):
        assert find_candidate_bases(noise_dataset(5)) == []

    def test_dimension_one_refused(self):
        with pytest.raises(ValueError):
            find_candidate_bases(noise_dataset(6), d=1)

    def test_unknown_mode_refused(self):
        with pytest.raises(ValueError):
            find_candidate_bases(noise_dataset(6), mode="ring")

    @pytest.mark.parametrize(
        "d,n,mode",
        [(2, 4, "loop"), (2, 4, "path"), (3, 5, "loop"), (3, 5, "path")],
    )
    @pytest.mark.parametrize("seed", [1, 2])
    def test_vectorized_enumerator_matches_scalar(self, d, n, mode, seed):
        _, data, _ = simulate(n, d, mode, seed=seed)
        fast = find_candidate_bases(data)
        view = engine._make_view(data.values, (), 1e-9)
        matrix = canonical_matrix("base", d) if mode == "loop" else None
        seen, slow = set(), []
        for pos in engine._bases_scalar(view, d, mode, 1e-9):
            engine._finish_base(
                view, pos, matrix, d, data.bound, 1e-9, "reduced", seen, slow
            )
        slow.sort(key=lambda cb: cb.value_indices)
        assert [cb.value_indices for cb in fast] == [cb.value_indices for cb in slow]


class TestGrowth:
    def test_growth_consumes_every_trilateration_group(self):
        cfg, data, _ = simulate(7, 2, "loop", seed=21)
        base = find_candidate_bases(data)[0]
        res = grow(base, data)
        assert res.configuration.n == 7
        assert res.explained_count == data.size == 6 + 3 * 3
        verdict = verify(cfg, res)
        assert verdict.matched and verdict.scale == 1

    def test_base_only_dataset_stays_a_base(self):
        cfg, data, _ = simulate(4, 2, "path", seed=8)
        base = find_candidate_bases(data)[0]
        res = grow(base, data)
        assert res.configuration.n == 4
        assert res.explained_count == 6

    def test_labeling_reproduces_consumed_values(self):
        _, data, _ = simulate(6, 2, "loop", extra=3, seed=13)
        res = reconstruct(data)
        assert set(res.labeling) <= set(range(data.size))
        for idx, walk in res.labeling.items():
            f = functional_from_path(walk, res.configuration.n)
            got = apply_functional(f, res.configuration)
            assert got == pytest.approx(float(data.values[idx]), rel=1e-7)

    def test_partial_data_grows_a_partial_configuration(self):
        # drop every value whose walk touches the last vertex: the engine
        # should recover the remaining five points and stop there
        cfg, data, labeled = simulate(6, 2, "loop", seed=34)
        keep = [
            k
            for k, p in enumerate(labeled.provenance)
            if 5 not in p.vertices
        ]
        assert len(keep) == data.size - 3
        pruned = DataSet(2, data.bound, "loop", data.values[keep])
        res = reconstruct(pruned)
        assert res.configuration.n == 5
        verdict = verify(cfg, res)
        assert verdict.matched and verdict.scale == 1


class TestTrilaterateStep:
    def test_single_step_extends_by_one_point(self):
        cfg, data, _ = simulate(5, 2, "loop", seed=2)
        base = find_candidate_bases(data)[0]
        partial = PartialReconstruction(
            base.embedded, {i: 1 for i in base.value_indices}, ()
        )
        ext = trilaterate_step(partial, data)
        assert ext is not None
        assert ext.points.n == 5
        assert len(ext.consumed) == len(partial.consumed) + 3
        assert len(ext.history) == 1
        for i in ext.history[0].value_indices:
            assert i in ext.consumed and i not in partial.consumed

    def test_exhausted_data_returns_none(self):
        _, data, _ = simulate(4, 2, "loop", seed=2)
        base = find_candidate_bases(data)[0]
        partial = PartialReconstruction(
            base.embedded, {i: 1 for i in base.value_indices}, ()
        )
        assert trilaterate_step(partial, data) is None

    def test_dimension_one_refused(self):
        _, data, _ = simulate(4, 2, "loop", seed=2)
        base = find_candidate_bases(data)[0]
        partial = PartialReconstruction(
            base.embedded, {i: 1 for i in base.value_indices}, ()
        )
        with pytest.raises(ValueError):
            trilaterate_step(partial, data, d=1)


class TestReconstruct:
    @pytest.mark.parametrize("mode", ["loop", "path"])
    @pytest.mark.parametrize("n,extra", [(4, 0), (5, 4), (6, 0)])
    def test_roundtrip(self, mode, n, extra):
        cfg, data, _ = simulate(n, 2, mode, extra=extra, seed=100 * n + extra)
        res = reconstruct(data)
        verdict = verify(cfg, res)
        assert verdict.matched
        assert verdict.scale == 1
        assert verdict.max_residual < 1e-7
        assert res.configuration.n == n

    def test_three_dimensional_roundtrip(self):
        cfg, data, _ = simulate(5, 3, "loop", seed=77)
        res = reconstruct(data)
        verdict = verify(cfg, res)
        assert verdict.matched and verdict.scale == 1

    def test_noise_raises(self):
        with pytest.raises(NoBaseFound):
            reconstruct(noise_dataset(8))

    def test_dimension_one_refused(self):
        with pytest.raises(ValueError):
            reconstruct(noise_dataset(6), d=1)

    def test_distractors_left_unexplained(self):
        _, data, _ = simulate(5, 2, "loop", extra=8, seed=19)
        res = reconstruct(data)
        assert data.size == 6 + 3 + 8
        assert res.explained_count == 6 + 3

    def test_scaled_measurements_reconstruct_at_scale(self):
        cfg, data, _ = simulate(4, 2, "loop", seed=51, scale=3)
        res = reconstruct(data)
        verdict = verify(cfg, res, b=6)
        assert verdict.matched
        assert verdict.scale == 3

    def test_mixed_scales_prefer_the_smaller(self):
        # the same hidden geometry read out twice, plain and doubled: both
        # interpretations explain six values, so the shorter one must win
        rng = np.random.default_rng(42)
        cfg = random_configuration(4, 2, rng)
        ens = build_trilateration_ensemble(4, 2, "loop", rng=rng)
        plain, _ = measure(ens, cfg, shuffle_seed=1)
        doubled, _ = measure(ens.scaled(2), cfg, shuffle_seed=2)
        data = DataSet(
            2, 2, "loop", np.concatenate([plain.values, doubled.values])
        )
        bases = find_candidate_bases(data)
        scales = {verify(cfg, b.embedded, b=4).scale for b in bases}
        assert {1, 2} <= scales
        res = reconstruct(data)
        assert verify(cfg, res, b=4).scale == 1

    def test_brute_strategy_agrees(self):
        # path mode: multiplicity bound 1 keeps the exhaustive certificate
        # search well inside the regime where its threshold is selective
        cfg, data, _ = simulate(4, 2, "path", seed=12)
        a = reconstruct(data)
        b = reconstruct(data, strategy="brute")
        assert verify(a.configuration, b.configuration).matched


class TestVerify:
    def test_identity(self, rng):
        cfg = random_configuration(6, 2, rng)
        verdict = verify(cfg, cfg)
        assert verdict.matched
        assert verdict.scale == 1
        assert verdict.max_residual < 1e-12

    def test_recovers_relabeling(self, rng):
        cfg = random_configuration(6, 2, rng)
        perm = tuple(int(v) for v in rng.permutation(6))
        shuffled = Configuration(2, cfg.points[list(perm)])
        verdict = verify(cfg, shuffled)
        assert verdict.matched
        assert verdict.relabeling == perm

    def test_congruence_invariance(self, rng):
        cfg = random_configuration(5, 3, rng)
        q = oracles.random_orthogonal(rng, 3)
        moved = Configuration(3, cfg.points @ q.T + rng.normal(size=3))
        assert verify(cfg, moved).matched

    def test_integer_scale_reported(self, rng):
        cfg = random_configuration(5, 2, rng)
        tripled = Configuration(2, cfg.points * 3.0)
        verdict = verify(cfg, tripled)
        assert verdict.matched and verdict.scale == 3

    def test_scale_cap_respected(self, rng):
        cfg = random_configuration(5, 2, rng)
        tripled = Configuration(2, cfg.points * 3.0)
        assert not verify(cfg, tripled, b=2).matched

    def test_fractional_scale_rejected(self, rng):
        cfg = random_configuration(5, 2, rng)
        stretched = Configuration(2, cfg.points * 1.5)
        assert not verify(cfg, stretched).matched

    def test_subset_matches(self, rng):
        cfg = random_configuration(7, 2, rng)
        assert verify(cfg, cfg.subset(range(4))).matched

    def test_unrelated_configurations_differ(self, rng):
        a = random_configuration(5, 2, rng)
        b = random_configuration(5, 2, rng)
        assert not verify(a, b).matched

    def test_dimension_mismatch(self, rng):
        a = random_configuration(5, 2, rng)
        b = random_configuration(5, 3, rng)
        assert not verify(a, b).matched

    def test_profile_route_for_large_truths(self, rng):
        cfg = random_configuration(12, 2, rng)
        perm = list(rng.permutation(12))
        shuffled = Configuration(2, cfg.points[perm] * 2.0)
        verdict = verify(cfg, shuffled)
        assert verdict.matched
        assert verdict.scale == 2
        assert verdict.relabeling == tuple(perm)
