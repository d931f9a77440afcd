import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from robustseed.core import PointSet
from robustseed.data import (
    KDD_FEATURES,
    Provenance,
    SyntheticSpec,
    generate_synthetic,
    inject_gaussian_noise,
    label_small_classes,
    load_csv,
    prepare,
    smallest_classes,
    write_csv,
    zscore_normalize,
)


class TestSynthetic:
    def test_degenerate_sigma(self):
        ds = generate_synthetic(SyntheticSpec(n=30, d=3, k=1, z=0, sigma=0.0, rng_seed=1))
        assert np.allclose(ds.X, ds.X[0])
        assert ds.true_outliers == frozenset()

    def test_default_instance_shape(self):
        ds = generate_synthetic(SyntheticSpec(n=1000, d=2, k=20, z=25, side=100, sigma=1, rng_seed=0))
        assert ds.X.shape == (1025, 2)
        assert ds.true_outliers == frozenset(range(1000, 1025))
        assert ds.provenance is Provenance.SYNTHETIC
        assert np.all((ds.X[1000:] >= 0) & (ds.X[1000:] <= 100))

    def test_cluster_means_concentrate(self):
        spec = SyntheticSpec(n=1000, d=2, k=20, z=25, rng_seed=3)
        ds = generate_synthetic(spec)
        means = np.asarray(ds.meta["means"])
        per = spec.n // spec.k
        for j in range(spec.k):
            sample = ds.X[ds.class_labels == j].mean(axis=0)
            assert np.all(np.abs(sample - means[j]) <= 5 * spec.sigma / np.sqrt(per))

    def test_remainder_goes_to_first_clusters(self):
        spec = SyntheticSpec(n=23, d=2, k=5, z=2, rng_seed=0)
        assert spec.cluster_sizes() == [5, 5, 5, 4, 4]
        ds = generate_synthetic(spec)
        assert ds.X.shape[0] == 25
        assert list(np.bincount(ds.class_labels[:23])) == [5, 5, 5, 4, 4]

    def test_bit_reproducible(self):
        a = generate_synthetic(SyntheticSpec(rng_seed=11)).X
        b = generate_synthetic(SyntheticSpec(rng_seed=11)).X
        assert a.tobytes() == b.tobytes()

    def test_acceptance_seeds_are_separated(self):
        from robustseed.verification import SEPARATED_SEEDS

        for s in SEPARATED_SEEDS:
            means = np.asarray(generate_synthetic(SyntheticSpec(rng_seed=s)).meta["means"])
            D = np.sqrt(((means[:, None] - means[None]) ** 2).sum(-1))
            np.fill_diagonal(D, np.inf)
            assert (D.min(axis=1) >= 10.0).mean() >= 0.9


class TestLoadCsv:
    def test_round_trip(self, tmp_path):
        p = tmp_path / "a.csv"
        p.write_text("1.5,2,a\n-3,4.25,b\n0,0,a\n")
        ds = load_csv(p, [0, 1], label_column=2)
        assert ds.X.tolist() == [[1.5, 2.0], [-3.0, 4.25], [0.0, 0.0]]
        assert ds.class_labels.tolist() == ["a", "b", "a"]

    def test_header_and_names(self, tmp_path):
        p = tmp_path / "h.csv"
        p.write_text("x,y,cls\n1,2,u\n3,4,v\n")
        ds = load_csv(p, ["y"], label_column="cls", header=True)
        assert ds.X.ravel().tolist() == [2.0, 4.0]

    def test_bad_cell_names_location(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("1,2\n3,oops\n")
        with pytest.raises(ValueError, match=r"row 2, column 1.*'oops'"):
            load_csv(p)

    def test_ragged_rows(self, tmp_path):
        p = tmp_path / "r.csv"
        p.write_text("1,2\n3\n")
        with pytest.raises(ValueError, match="row 2"):
            load_csv(p)

    def test_write_then_read(self, tmp_path):
        ds = generate_synthetic(SyntheticSpec(n=40, d=3, k=4, z=3, rng_seed=2))
        p = tmp_path / "syn.csv"
        write_csv(p, ds)
        back = load_csv(p, ["x0", "x1", "x2"], header=True)
        assert np.array_equal(back.X, ds.X)

    def test_shuttle_fixture(self, fixtures_dir):
        ds = load_csv(f"{fixtures_dir}/shuttle_sample.trn", list(range(9)), 9, delimiter=None)
        assert ds.X.shape == (187, 9)


class TestZscore:
    def test_two_values(self):
        assert zscore_normalize([[0.0], [2.0]]).points.ravel().tolist() == [-1.0, 1.0]

    def test_constant_column(self):
        out = zscore_normalize(np.array([[3.0, 1.0], [3.0, 2.0], [3.0, 5.0]])).points
        assert np.all(out[:, 0] == 0)

    def test_moments(self, rng):
        out = zscore_normalize(rng.normal(size=(100, 4)) * [1, 10, 100, 0.1] + 7).points
        assert np.allclose(out.mean(axis=0), 0, atol=1e-9)
        assert np.allclose(out.std(axis=0), 1, atol=1e-9)

    @given(arrays(np.float64, st.tuples(st.integers(2, 30), st.integers(1, 4)),
                  elements=st.floats(-1e4, 1e4, allow_nan=False)))  # fmt: skip
    def test_idempotent(self, X):
        once = zscore_normalize(X).points
        twice = zscore_normalize(once).points
        assert np.allclose(once, twice, atol=1e-9)


class TestSmallClasses:
    def test_shuttle_fixture_recipe(self, fixtures_dir):
        ds = prepare("shuttle-small", f"{fixtures_dir}/shuttle_sample.trn")
        assert len(ds.true_outliers) == 7
        assert set(ds.class_labels[sorted(ds.true_outliers)]) == {"6", "7"}
        assert smallest_classes(ds.class_labels, 2) == ["6", "7"]

    def test_kdd_fixture_recipe(self, fixtures_dir):
        ds = prepare("kdd-small", f"{fixtures_dir}/kdd_sample.csv")
        assert ds.X.shape == (190, 34)
        assert len(KDD_FEATURES) == 34
        assert len(ds.true_outliers) == 10
        assert np.allclose(ds.X.mean(axis=0), 0, atol=1e-9)

    def test_single_class(self):
        ds = label_small_classes(np.zeros((4, 1)), ["a"] * 4, major_classes=["a"])
        assert ds.true_outliers == frozenset()

    def test_min_fraction(self):
        labels = ["a"] * 90 + ["b"] * 8 + ["c"] * 2
        ds = label_small_classes(np.zeros((100, 1)), labels, min_fraction=0.05)
        assert ds.true_outliers == frozenset(range(98, 100))

    def test_empty_major(self):
        with pytest.raises(ValueError):
            label_small_classes(np.zeros((2, 1)), ["a", "b"], major_classes=[])


class TestNoise:
    def test_count_and_labels(self, rng):
        X = rng.normal(size=(200, 3))
        ds = inject_gaussian_noise(X, rng, count=10, noise_sigma=50.0)
        assert len(ds.true_outliers) == 10
        moved = np.flatnonzero(np.any(ds.X != X, axis=1))
        assert set(moved) == set(ds.true_outliers)

    def test_fraction(self, rng):
        ds = inject_gaussian_noise(np.zeros((400, 2)), rng, fraction=0.025, noise_sigma=1.0)
        assert len(ds.true_outliers) == 10

    def test_tiny_sigma(self, rng):
        X = rng.normal(size=(50, 2))
        ds = inject_gaussian_noise(X, rng, count=5, noise_sigma=1e-300)
        assert np.array_equal(ds.X, X)
        assert len(ds.true_outliers) == 5

    def test_count_too_large(self, rng):
        with pytest.raises(ValueError):
            inject_gaussian_noise(np.zeros((5, 1)), rng, count=5, noise_sigma=1.0)

    def test_recipes_on_fixtures(self, fixtures_dir):
        skin = prepare("skin-noise", f"{fixtures_dir}/skin_sample.txt", seed=1)
        assert skin.X.shape == (200, 3) and len(skin.true_outliers) == 5
        # the fixture holds fewer rows than the recipe's 1000 noisy points
        with pytest.raises(ValueError, match="count=1000"):
            prepare("shuttle-noise", f"{fixtures_dir}/shuttle_sample.trn", seed=1)

    def test_unknown_recipe(self, fixtures_dir):
        with pytest.raises(ValueError):
            prepare("iris", f"{fixtures_dir}/skin_sample.txt")
