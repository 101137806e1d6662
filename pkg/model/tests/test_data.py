import numpy as np

from nopress_model import Dataset, analytic_uniform_accuracy


def test_dataset_shapes(small_dataset):
    ds = small_dataset
    assert ds.boards.shape[1:] == (81, 35)
    assert ds.prevs.shape[1:] == (81, 40)
    assert ds.adjacency.shape == (81, 81)
    assert len(ds.locations) == 81
    assert len(ds.powers) == 7
    assert len(ds.supply_centers) == 34
    assert len(ds.samples) > 50


def test_samples_reference_valid_steps(small_dataset):
    for s in small_dataset.samples[:200]:
        assert len(s.loc_rows) == len(s.gold) == len(s.candidates)
        for gold, cands in zip(s.gold, s.candidates):
            assert gold in cands
        assert 0 <= s.power < 7
        assert s.season in (0, 1, 2)


def test_split_by_game(small_dataset):
    train, held = small_dataset.split(0.25)
    assert train and held
    assert {s.game for s in train}.isdisjoint({s.game for s in held})
    assert max(s.game for s in train) < min(s.game for s in held)


def test_analytic_baseline_in_sane_range(small_dataset):
    b = analytic_uniform_accuracy(small_dataset.samples)
    assert 0.02 < b < 0.5


def test_final_scores_bounded(small_dataset):
    assert (small_dataset.final_scores >= 0).all()
    assert (small_dataset.final_scores <= 34).all()
    # proportional draw scores sum to 34 per finished game
    sums = small_dataset.final_scores.sum(axis=1)
    assert np.allclose(sums[sums > 0], 34.0, atol=1e-4)
