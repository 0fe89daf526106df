"""Tests for nearest-neighbor search, slice synthesis, and pool generation."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tsmote.data import Observation, Sample, TimeSeriesDataset
from tsmote.slicing import assign_slices, build_slice_grid
from tsmote.synthesis import (
    LambdaSpec,
    PoolUnderflowError,
    SynthesisConfig,
    SynthesisError,
    generate_pool,
    knn_1d,
    synthesize_slice,
)


def brute_force_knn(values, query, k):
    """Oracle: exhaustive distances, ties by smaller index."""
    order = sorted(
        (i for i in range(len(values)) if i != query),
        key=lambda i: (abs(values[i] - values[query]), i),
    )
    return order[:k]


class TestKnn1d:
    def test_basic(self):
        idx = knn_1d(np.array([1.0, 2.0, 5.0, 9.0]), 1, 2)
        assert sorted(idx.tolist()) == [0, 2]  # values 1 and 5

    def test_two_element_slice(self):
        assert knn_1d(np.array([4.0, 7.0]), 0, 1).tolist() == [1]

    def test_tie_breaks_to_smaller_index(self):
        idx = knn_1d(np.array([0.0, 1.0, 1.0, 3.0]), 0, 1)
        assert idx.tolist() == [1]

    def test_k_reduced_with_warning(self, caplog):
        with caplog.at_level("WARNING"):
            idx = knn_1d(np.array([1.0, 2.0, 3.0]), 0, 10)
        assert len(idx) == 2
        assert any("reducing" in r.message for r in caplog.records)

    @settings(max_examples=60, deadline=None)
    @given(
        values=st.lists(
            st.integers(min_value=-20, max_value=20).map(float), min_size=2, max_size=40
        ),
        q=st.integers(min_value=0, max_value=39),
        k=st.integers(min_value=1, max_value=10),
    )
    def test_matches_oracle(self, values, q, k):
        q = q % len(values)
        k = min(k, len(values) - 1)
        got = knn_1d(np.array(values), q, k).tolist()
        assert got == brute_force_knn(values, q, k)


class TestSynthesizeSlice:
    def _single_column(self, vals):
        return np.asarray(vals, dtype=float).reshape(-1, 1)

    def test_lambda_zero_copies_seed(self):
        cfg = SynthesisConfig(k_neighbors=1, lambda_dist=LambdaSpec.point_mass(0.0))
        out = synthesize_slice(self._single_column([1.0, 3.0]), cfg, 2, np.random.default_rng(0))
        assert out[:, 0].tolist() == [1.0, 3.0]

    def test_lambda_one_copies_neighbor(self):
        cfg = SynthesisConfig(k_neighbors=1, lambda_dist=LambdaSpec.point_mass(1.0))
        out = synthesize_slice(self._single_column([1.0, 3.0]), cfg, 2, np.random.default_rng(0))
        assert out[:, 0].tolist() == [3.0, 1.0]

    def test_lambda_half_is_midpoint(self):
        cfg = SynthesisConfig(k_neighbors=1, lambda_dist=LambdaSpec.point_mass(0.5))
        out = synthesize_slice(self._single_column([1.0, 3.0]), cfg, 1, np.random.default_rng(0))
        assert out[0, 0] == 2.0

    def test_range_containment(self):
        rng = np.random.default_rng(3)
        obs = rng.normal(0, 5, (40, 3))
        obs[5, 1] = np.nan  # independent-column path
        cfg = SynthesisConfig(k_neighbors=4)
        out = synthesize_slice(obs, cfg, 500, rng)
        for f in range(3):
            col = obs[:, f]
            col = col[~np.isnan(col)]
            assert out[:, f].min() >= col.min() - 1e-12
            assert out[:, f].max() <= col.max() + 1e-12

    def test_too_few_values_error_names_feature_and_slice(self):
        obs = np.array([[1.0, np.nan], [2.0, 3.0]])
        cfg = SynthesisConfig()
        with pytest.raises(SynthesisError, match=r"feature 1 in class='c' slice=4"):
            synthesize_slice(obs, cfg, 5, np.random.default_rng(0), label="class='c' slice=4")

    def test_deterministic_given_rng_seed(self):
        obs = np.random.default_rng(1).normal(size=(20, 2))
        cfg = SynthesisConfig(k_neighbors=3)
        a = synthesize_slice(obs, cfg, 50, np.random.default_rng(42))
        b = synthesize_slice(obs, cfg, 50, np.random.default_rng(42))
        np.testing.assert_array_equal(a, b)

    def test_correlated_assembly_preserves_correlation_sign(self):
        # Null-free path: components of one vector share a seed observation,
        # so strong correlations survive (contracted, not destroyed).
        rng = np.random.default_rng(7)
        z = rng.standard_normal(200)
        obs = np.column_stack([z, z + 0.1 * rng.standard_normal(200)])
        cfg = SynthesisConfig(k_neighbors=5)
        out = synthesize_slice(obs, cfg, 2000, rng)
        corr = np.corrcoef(out.T)[0, 1]
        assert corr > 0.9

    def test_mean_preserved_over_full_enumeration(self):
        rng = np.random.default_rng(11)
        obs = rng.standard_normal((60, 2))
        cfg = SynthesisConfig(k_neighbors=59)
        reps = 30
        errs = np.empty((reps, 2))
        for r in range(reps):
            out = synthesize_slice(obs, cfg, 60 * 59, np.random.default_rng(r))
            errs[r] = out.mean(axis=0) - obs.mean(axis=0)
        se = errs.std(axis=0, ddof=1) / np.sqrt(reps)
        assert np.all(np.abs(errs.mean(axis=0)) <= 3 * se)


class TestLambdaSpec:
    def test_uniform_moments(self):
        lam = LambdaSpec.uniform()
        assert lam.mean == 0.5
        assert lam.variance == pytest.approx(1 / 12)
        assert lam.second_moment == pytest.approx(1 / 3)

    def test_beta_moments(self):
        lam = LambdaSpec.beta(2, 5)
        assert lam.mean == pytest.approx(2 / 7)
        assert lam.second_moment == pytest.approx(3 / 28)

    def test_point_mass_bounds(self):
        with pytest.raises(ValueError):
            LambdaSpec.point_mass(1.5)

    def test_parse(self):
        assert LambdaSpec.parse("uniform") == LambdaSpec.uniform()
        assert LambdaSpec.parse("beta:2,5") == LambdaSpec.beta(2, 5)
        assert LambdaSpec.parse("point:0.3") == LambdaSpec.point_mass(0.3)
        with pytest.raises(ValueError):
            LambdaSpec.parse("gaussian")

    @settings(max_examples=30, deadline=None)
    @given(
        a=st.floats(min_value=0.2, max_value=10),
        b=st.floats(min_value=0.2, max_value=10),
    )
    def test_moment_consistency_and_support(self, a, b):
        lam = LambdaSpec.beta(a, b)
        assert lam.variance == pytest.approx(lam.second_moment - lam.mean**2)
        draws = lam.sample(np.random.default_rng(0), 100)
        assert np.all((draws >= 0) & (draws <= 1))


def two_class_dataset(n_per_class=50, n_obs=4, seed=0, with_null=False):
    rng = np.random.default_rng(seed)
    samples = []
    for label in ("u", "v"):
        for i in range(n_per_class):
            times = np.sort(rng.uniform(0, 10, n_obs))
            obs = []
            for j, t in enumerate(times):
                vals = [float(rng.normal()), float(rng.normal())]
                if with_null and i == 0 and j == 0:
                    vals[0] = None
                obs.append(Observation(float(t), tuple(vals)))
            samples.append(Sample(id=f"{label}{i}", observations=tuple(obs), class_label=label))
    return TimeSeriesDataset(tuple(samples), n_features=2)


class TestGeneratePool:
    def test_pool_size_matches_missing_count(self):
        # 100 samples, one observation each; a slice covers 40 of them
        rng = np.random.default_rng(5)
        samples = []
        for i in range(100):
            t = rng.uniform(0, 1) if i < 40 else rng.uniform(1, 2)
            samples.append(
                Sample(id=f"s{i}", observations=(Observation(float(t), (float(rng.normal()),)),))
            )
        ds = TimeSeriesDataset(tuple(samples), n_features=1)
        grid = build_slice_grid(ds, 2, bounds=(0.0, 2.0))
        # grid split is count-based; rebuild membership from the assignment
        a = assign_slices(ds, grid)
        in_slice0 = sum(1 for idx in a.indices if 0 in idx)
        cfg = SynthesisConfig(surplus_factor=1.0, seed=1)
        pool = generate_pool(ds, grid, a, cfg)
        assert pool.size(None, 0) >= 100 - in_slice0
        cfg2 = SynthesisConfig(surplus_factor=2.0, seed=1)
        pool2 = generate_pool(ds, grid, a, cfg2)
        assert pool2.size(None, 0) == 2 * (100 - in_slice0)

    def test_no_missing_means_empty_pool(self):
        # every sample observes every slice: nothing to draw
        samples = tuple(
            Sample(
                id=f"s{i}",
                observations=tuple(Observation(float(t), (float(i + t),)) for t in (0.0, 1.0, 2.0, 3.0)),
            )
            for i in range(6)
        )
        ds = TimeSeriesDataset(samples, n_features=1)
        grid = build_slice_grid(ds, 2)
        a = assign_slices(ds, grid)
        pool = generate_pool(ds, grid, a, SynthesisConfig(surplus_factor=1.0))
        assert pool.size(None, 0) == 0 and pool.size(None, 1) == 0

    def test_pool_deterministic_from_seed(self):
        ds = two_class_dataset()
        grid = build_slice_grid(ds, 5)
        a = assign_slices(ds, grid)
        p1 = generate_pool(ds, grid, a, SynthesisConfig(seed=9))
        p2 = generate_pool(ds, grid, a, SynthesisConfig(seed=9))
        for key in p1.keys():
            np.testing.assert_array_equal(p1.vectors(*key), p2.vectors(*key))

    def test_parallel_generation_equals_serial(self):
        ds = two_class_dataset(seed=2)
        grid = build_slice_grid(ds, 5)
        a = assign_slices(ds, grid)
        serial = generate_pool(ds, grid, a, SynthesisConfig(seed=9), threads=1)
        parallel = generate_pool(ds, grid, a, SynthesisConfig(seed=9), threads=4)
        assert set(serial.keys()) == set(parallel.keys())
        for key in serial.keys():
            np.testing.assert_array_equal(serial.vectors(*key), parallel.vectors(*key))

    def test_without_replacement_consumes_and_underflows(self):
        ds = two_class_dataset()
        grid = build_slice_grid(ds, 5)
        a = assign_slices(ds, grid)
        pool = generate_pool(ds, grid, a, SynthesisConfig(seed=3, surplus_factor=1.0))
        rng = np.random.default_rng(0)
        key = ("u", 0)
        n = pool.size(*key)
        assert n > 0
        for _ in range(n):
            pool.draw(*key, rng)
        with pytest.raises(PoolUnderflowError, match="slice=0"):
            pool.draw(*key, rng)

    def test_with_replacement_never_underflows(self):
        ds = two_class_dataset()
        grid = build_slice_grid(ds, 5)
        a = assign_slices(ds, grid)
        pool = generate_pool(
            ds, grid, a, SynthesisConfig(seed=3, surplus_factor=1.0, replacement_policy="with")
        )
        rng = np.random.default_rng(0)
        n = pool.size("u", 0)
        for _ in range(3 * n):
            pool.draw("u", 0, rng)

    def test_null_bearing_observations_reserve_draws(self):
        ds = two_class_dataset(with_null=True)
        grid = build_slice_grid(ds, 5)
        a = assign_slices(ds, grid)
        base = generate_pool(two_class_dataset(), grid, assign_slices(two_class_dataset(), grid),
                             SynthesisConfig(surplus_factor=1.0))
        with_null = generate_pool(ds, grid, a, SynthesisConfig(surplus_factor=1.0))
        total_base = sum(base.size(*k) for k in base.keys())
        total_null = sum(with_null.size(*k) for k in with_null.keys())
        # one null-bearing observation per class reserves one extra draw each
        assert total_null == total_base + 2
