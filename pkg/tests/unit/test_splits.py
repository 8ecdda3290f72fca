"""Unit tests for seeded re-splitting, subsampling and overhead timing."""

import pytest

from comclip.composition import ComposedScorer
from comclip.encoders import CachedBackend, MockBackend
from comclip.evaluation.models import EvalReport
from comclip.evaluation.splits import (
    SVO_SPLIT_SEEDS,
    balanced_subset,
    mean_accuracy,
    seeded_subsets,
    split_instances,
)
from comclip.evaluation.timing import OverheadReport, measure_overhead


class TestSplitInstances:
    def test_partition_covers_everything_once(self):
        folds = split_instances(list(range(10)), seed=42, n_splits=3)

        assert sorted(x for fold in folds for x in fold) == list(range(10))
        assert sorted(len(f) for f in folds) == [3, 3, 4]

    def test_same_seed_same_folds(self):
        assert split_instances(list(range(20)), seed=11) == split_instances(list(range(20)), seed=11)

    def test_different_seeds_differ(self):
        assert split_instances(list(range(20)), seed=11) != split_instances(list(range(20)), seed=2)

    def test_invalid_split_count(self):
        with pytest.raises(ValueError, match="n_splits"):
            split_instances([1, 2], seed=0, n_splits=0)


class TestSeededSubsets:
    def test_default_seeds(self):
        assert SVO_SPLIT_SEEDS == (42, 11, 2)

    def test_one_subset_per_seed_in_original_order(self):
        items = list(range(30))

        subsets = seeded_subsets(items)

        assert len(subsets) == 3
        for subset in subsets:
            assert len(subset) == 10
            assert subset == sorted(subset)
            assert len(set(subset)) == 10

    def test_deterministic(self):
        assert seeded_subsets(list(range(30))) == seeded_subsets(list(range(30)))

    def test_empty_input(self):
        assert seeded_subsets([]) == [[], [], []]

    @pytest.mark.parametrize("fraction", [0.0, 1.5])
    def test_invalid_fraction(self, fraction):
        with pytest.raises(ValueError, match="fraction"):
            seeded_subsets([1, 2, 3], fraction=fraction)


class TestBalancedSubset:
    def test_even_draw_across_groups(self):
        items = [("a", i) for i in range(10)] + [("b", i) for i in range(10)] + [("c", i) for i in range(2)]

        subset = balanced_subset(items, n=9, seed=0, key=lambda x: x[0])

        groups = [g for g, _ in subset]
        assert groups.count("a") == 3
        assert groups.count("b") == 3
        assert groups.count("c") == 2
        assert subset == [x for x in items if x in subset]

    def test_empty(self):
        assert balanced_subset([], n=5, seed=0, key=str) == []


class TestMeanAccuracy:
    def test_ignores_empty_reports(self):
        reports = [
            EvalReport(dataset="svo_probes", config="full", overall=0.5),
            EvalReport(dataset="svo_probes", config="full", overall=0.7),
            EvalReport(dataset="svo_probes", config="full"),
        ]

        assert mean_accuracy(reports) == pytest.approx(0.6)
        assert mean_accuracy([]) == 0.0


class TestOverhead:
    """Baseline against composed timing."""

    @pytest.mark.asyncio
    async def test_measures_every_pair(self, image):
        scorer = ComposedScorer(CachedBackend(MockBackend(dim=16)))

        report = await measure_overhead(scorer, [(image, "A cat sits on a table")], repeats=2)

        assert report.n_pairs == 1
        assert report.repeats == 2
        assert report.baseline_mean_s >= 0
        assert report.composed_mean_s >= 0

    @pytest.mark.asyncio
    async def test_invalid_repeats(self, image):
        with pytest.raises(ValueError, match="repeats"):
            await measure_overhead(ComposedScorer(MockBackend(dim=16)), [], repeats=0)

    def test_ratio(self):
        report = OverheadReport(
            n_pairs=1,
            repeats=1,
            baseline_mean_s=0.5,
            baseline_std_s=0.0,
            composed_mean_s=2.0,
            composed_std_s=0.0,
        )

        assert report.ratio == 4.0
        assert report.model_copy(update={"baseline_mean_s": 0.0}).ratio == float("inf")
