"""Imputation: reshape ragged samples onto the slice grid and fill the gaps.

Pipeline order per sample: replace null components, reshape observations
into their slices (averaging degenerate slots componentwise so each slot
holds one value), then fill empty slots. The tsmote method fills from the
per-class synthetic pool; the slice_mean / slice_median baselines fill with
the per-class per-slice per-feature statistic of the observed values.

Real observations are never overwritten: a slot that had original data keeps
it exactly (or its degenerate average). Time-independent prefix features are
copied from the sample itself into every filled slot.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .data import ImputedTensor, Observation, Sample, TimeSeriesDataset
from .slicing import SliceAssignment, SliceGrid, assign_slices
from .synthesis import SynthesisConfig, SyntheticPool, generate_pool

TSMOTE = "tsmote"
SLICE_MEAN = "slice_mean"
SLICE_MEDIAN = "slice_median"
METHODS = (TSMOTE, SLICE_MEAN, SLICE_MEDIAN)


@dataclass(frozen=True)
class ImputationConfig:
    method: str = TSMOTE
    replacement_policy: Optional[str] = None  # None -> follow the synthesis config
    allow_null_feature_imputation: bool = False
    seed: int = 0
    class_blind_baselines: bool = False

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if self.replacement_policy not in (None, "with", "without"):
            raise ValueError("replacement_policy must be 'with', 'without' or None")


def replace_nulls(
    sample: Sample,
    slice_indices: tuple[int, ...],
    pool: SyntheticPool,
    rng: np.random.Generator,
) -> Sample:
    """Replace each null component from one pool vector of the same slice.

    One vector is drawn per null-bearing observation; non-null components are
    untouched. The caller is responsible for asserting feature independence
    (see ``ImputationConfig.allow_null_feature_imputation``).
    """
    if not any(o.has_nulls() for o in sample.observations):
        return sample
    new_obs = []
    for o, si in zip(sample.observations, slice_indices):
        if not o.has_nulls():
            new_obs.append(o)
            continue
        drawn = pool.draw(sample.class_label, si, rng)
        vals = tuple(
            float(drawn[k]) if v is None else v for k, v in enumerate(o.values)
        )
        new_obs.append(Observation(o.time, vals))
    return dataclasses.replace(sample, observations=tuple(new_obs))


def reshape_to_grid(
    sample: Sample,
    slice_indices: tuple[int, ...],
    n_slices: int,
) -> np.ndarray:
    """(n_slices, n_features) row; empty slots are NaN, degenerate slots averaged.

    Expects nulls to have been replaced already (or absent).
    """
    mat = sample.value_matrix()
    if np.isnan(mat).any():
        raise ValueError(
            f"sample {sample.id!r} still contains nulls; replace them before reshaping"
        )
    n_feat = mat.shape[1]
    row = np.full((n_slices, n_feat), np.nan)
    counts = np.zeros(n_slices, dtype=int)
    for obs_vals, si in zip(mat, slice_indices):
        if counts[si] == 0:
            row[si] = obs_vals
        else:
            row[si] = (row[si] * counts[si] + obs_vals) / (counts[si] + 1)
        counts[si] += 1
    return row


def fill_missing_slices(
    row: np.ndarray,
    class_label: Optional[str],
    pool: SyntheticPool,
    fixed_values: np.ndarray,
    rng: np.random.Generator,
) -> np.ndarray:
    """Fill NaN slots of a reshaped row with pool draws; returns a copy.

    The leading ``len(fixed_values)`` entries of every drawn vector are
    overwritten with the sample's own fixed values. Without-replacement draws
    permanently consume pool vectors.
    """
    out = row.copy()
    n_fix = len(fixed_values)
    for si in range(out.shape[0]):
        if not np.isnan(out[si]).any():
            continue
        drawn = pool.draw(class_label, si, rng).copy()
        if n_fix:
            drawn[:n_fix] = fixed_values
        out[si] = drawn
    return out


def _resolve_fixed_values(sample: Sample, n_feat: int) -> np.ndarray:
    """First non-null value of each fixed-prefix feature across observations."""
    n_fix = min(sample.fixed_prefix_len, n_feat)
    vals = np.full(n_fix, np.nan)
    for o in sample.observations:
        for k in range(n_fix):
            if np.isnan(vals[k]) and o.values[k] is not None:
                vals[k] = o.values[k]
    return vals


def _apply_fixed_prefix(sample: Sample, fixed: np.ndarray) -> Sample:
    """Overwrite known fixed-prefix entries so they are consistent and non-null."""
    if fixed.size == 0 or np.isnan(fixed).all():
        return sample
    new_obs = []
    for o in sample.observations:
        vals = list(o.values)
        changed = False
        for k, fv in enumerate(fixed):
            if not np.isnan(fv) and vals[k] != fv:
                vals[k] = float(fv)
                changed = True
        new_obs.append(Observation(o.time, tuple(vals)) if changed else o)
    return dataclasses.replace(sample, observations=tuple(new_obs))


def _slice_statistics(
    dataset: TimeSeriesDataset,
    n_slices: int,
    assignment: SliceAssignment,
    method: str,
    class_blind: bool,
) -> dict[tuple[Optional[str], int], np.ndarray]:
    """Per-(class, slice) featurewise mean or median of observed values."""
    reduce = np.nanmean if method == SLICE_MEAN else np.nanmedian
    cells: dict[tuple[Optional[str], int], list[np.ndarray]] = {}
    for pos, sample in enumerate(dataset.samples):
        lab = None if class_blind else sample.class_label
        mat = sample.value_matrix()
        for row, si in zip(mat, assignment.indices[pos]):
            cells.setdefault((lab, si), []).append(row)

    stats: dict[tuple[Optional[str], int], np.ndarray] = {}
    labels = [None] if class_blind else (dataset.class_labels() or [None])
    for lab in labels:
        for si in range(n_slices):
            rows = cells.get((lab, si))
            if not rows:
                raise ValueError(
                    f"class={lab!r} has no observations in slice {si}; cannot compute baseline statistic"
                )
            stacked = np.vstack(rows)
            if np.isnan(stacked).all(axis=0).any():
                raise ValueError(
                    f"class={lab!r} slice={si} has a feature with no observed values"
                )
            stats[(lab, si)] = reduce(stacked, axis=0)
    return stats


def impute_dataset(
    dataset: TimeSeriesDataset,
    grid: SliceGrid,
    assignment: Optional[SliceAssignment] = None,
    synthesis_config: Optional[SynthesisConfig] = None,
    imputation_config: Optional[ImputationConfig] = None,
    threads: int = 1,
) -> ImputedTensor:
    """Produce one complete trajectory per sample on the slice grid.

    The returned tensor's grid times are in original units
    (``grid.t_min + elapsed grid time``).
    """
    imp = imputation_config or ImputationConfig()
    syn = synthesis_config or SynthesisConfig()
    if imp.replacement_policy is not None and imp.replacement_policy != syn.replacement_policy:
        syn = dataclasses.replace(syn, replacement_policy=imp.replacement_policy)
    if assignment is None:
        assignment = assign_slices(dataset, grid)

    rng = np.random.default_rng(imp.seed)
    n_t, n_f = grid.n_slices, dataset.n_features

    has_nulls = any(o.has_nulls() for s in dataset.samples for o in s.observations)
    if imp.method == TSMOTE and has_nulls and not imp.allow_null_feature_imputation:
        raise ValueError(
            "dataset contains null feature entries; imputing them samples each feature "
            "from its marginal distribution, which destroys cross-feature correlations. "
            "Set allow_null_feature_imputation=True only if the features are independent."
        )

    pool: Optional[SyntheticPool] = None
    stats: Optional[dict] = None
    if imp.method == TSMOTE:
        pool = generate_pool(dataset, grid, assignment, syn, threads=threads)
    else:
        stats = _slice_statistics(dataset, n_t, assignment, imp.method, imp.class_blind_baselines)

    rows = np.empty((dataset.n_samples, n_t, n_f), dtype=float)
    for pos, sample in enumerate(dataset.samples):
        idx = assignment.indices[pos]
        fixed = _resolve_fixed_values(sample, n_f)
        work = _apply_fixed_prefix(sample, fixed)

        if imp.method == TSMOTE:
            work = replace_nulls(work, idx, pool, rng)
            if fixed.size and np.isnan(fixed).any():
                # a fully-null fixed feature takes its value from the first
                # replacement draw, then stays constant
                fixed = _resolve_fixed_values(work, n_f)
                work = _apply_fixed_prefix(work, fixed)
            row = reshape_to_grid(work, idx, n_t)
            row = fill_missing_slices(row, sample.class_label, pool, fixed, rng)
        else:
            lab = None if imp.class_blind_baselines else sample.class_label
            mat = work.value_matrix()
            for r, si in enumerate(idx):
                nulls = np.isnan(mat[r])
                if nulls.any():
                    mat[r, nulls] = stats[(lab, si)][nulls]
            filled_sample = dataclasses.replace(
                work,
                observations=tuple(
                    Observation(o.time, tuple(float(v) for v in mat[r]))
                    for r, o in enumerate(work.observations)
                ),
            )
            row = reshape_to_grid(filled_sample, idx, n_t)
            for si in range(n_t):
                if np.isnan(row[si]).any():
                    vec = stats[(lab, si)].copy()
                    if fixed.size:
                        known = ~np.isnan(fixed)
                        vec[: fixed.size][known] = fixed[known]
                    row[si] = vec
        rows[pos] = row

    labels = tuple(s.class_label for s in dataset.samples) if dataset.has_labels else None
    return ImputedTensor(
        sample_ids=tuple(s.id for s in dataset.samples),
        grid_times=grid.t_min + np.asarray(grid.grid_times, dtype=float),
        data=rows,
        class_labels=labels,
        feature_names=dataset.feature_names,
    )
