import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dmc.clustering import (
    AgglomerativeClustering, DiffusionSpectralClustering, KMeans, Partition, agglomerative,
    cut_dendrogram, hierarchy_distances, kmeans, kmeans_fit, lloyd, partitions_equal,
    spectral_threshold, wcss,
)
from dmc.diffusion import diffusion_embed, epsilon_scan, gaussian_affinity, select_epsilon
from dmc.exceptions import DegenerateSplitWarning, ValidationError
from dmc.linalg import pairwise_sq_dists

from oracles import exhaustive_min_wcss, naive_agglomerative


def P(*labels):
    return Partition.from_labels(labels)


class TestPartition:
    def test_from_labels_canonicalizes(self):
        p = Partition.from_labels([7, 7, 3, 9, 3])
        assert p.labels.tolist() == [0, 0, 1, 2, 1] and p.k == 3
        assert p.sizes().tolist() == [2, 2, 1]
        assert p.members(1).tolist() == [2, 4]

    def test_missing_id_rejected(self):
        with pytest.raises(ValidationError):
            Partition(np.array([0, 2, 0]), 3)

    def test_equal_examples(self):
        assert partitions_equal(P(0, 0, 1), P(1, 1, 0))
        assert not partitions_equal(P(0, 0, 1), P(0, 1, 1))
        assert not partitions_equal(P(0, 0, 0), P(0, 1, 2))
        assert not partitions_equal(P(0, 1, 2), P(0, 0, 0))

    def test_size_mismatch(self):
        with pytest.raises(ValidationError):
            partitions_equal(P(0, 1), P(0, 1, 1))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 4), min_size=1, max_size=30), st.permutations(range(5)))
def test_partitions_equal_under_relabeling(labels, perm):
    a = Partition.from_labels(labels)
    b = Partition.from_labels([perm[v] for v in labels])
    assert partitions_equal(a, b) and partitions_equal(b, a)


class TestThreshold:
    def test_example(self):
        assert spectral_threshold([-0.3, -0.1, 0.2, 0.4]).labels.tolist() == [0, 0, 1, 1]

    def test_zero_goes_positive(self):
        assert spectral_threshold([-1.0, 0.0, 1.0]).labels.tolist() == [0, 1, 1]

    def test_all_zero_is_degenerate(self):
        with pytest.warns(DegenerateSplitWarning):
            p = spectral_threshold(np.zeros((4, 2)))
        assert p.k == 1 and p.labels.tolist() == [0, 0, 0, 0]

    def test_sign_flip_invariance(self, rng):
        c = rng.normal(size=(20, 3))
        assert partitions_equal(spectral_threshold(c), spectral_threshold(-c))

    def test_recovers_preset_blobs(self, preset_data):
        X, truth = preset_data
        sq = pairwise_sq_dists(X)
        emb = diffusion_embed(gaussian_affinity(sq, select_epsilon(epsilon_scan(sq))), 1)
        assert partitions_equal(spectral_threshold(emb), truth)


class TestKMeans:
    def test_two_points(self):
        res = kmeans_fit([[0.0, 0.0], [0.0, 1.0]], 2)
        assert res.wcss == 0.0 and sorted(res.labels.tolist()) == [0, 1]

    def test_single_cluster_wcss_is_n_times_variance(self, rng):
        X = rng.normal(size=(9, 3))
        res = kmeans_fit(X, 1)
        assert res.labels.tolist() == [0] * 9
        assert res.wcss == pytest.approx(9 * X.var(axis=0).sum(), rel=1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_six_points_reach_exhaustive_minimum(self, seed):
        X = np.random.default_rng(seed).normal(size=(6, 2))
        assert kmeans_fit(X, 2).wcss == pytest.approx(exhaustive_min_wcss(X, 2), rel=1e-12)

    def test_history_nonincreasing(self, rng):
        X = rng.normal(size=(40, 2))
        res = lloyd(X, X[:4])
        assert all(b <= a + 1e-9 for a, b in zip(res.history, res.history[1:]))
        assert res.wcss == pytest.approx(wcss(X, res.labels))

    def test_empty_cluster_is_reseeded(self):
        X = np.array([[0.0], [1.0], [10.0], [11.0]])
        # the third center starts far from every point and captures nobody
        res = lloyd(X, [[0.5], [10.5], [1000.0]])
        assert sorted(set(res.labels.tolist())) == [0, 1, 2]

    def test_deterministic_across_workers(self, rng):
        X = rng.normal(size=(30, 4))
        a = kmeans_fit(X, 3, seed=5, n_jobs=1)
        b = kmeans_fit(X, 3, seed=5, n_jobs=4)
        assert a.labels.tolist() == b.labels.tolist() and a.wcss == b.wcss

    def test_k_out_of_range(self):
        with pytest.raises(ValidationError):
            kmeans(np.eye(3), 4)
        with pytest.raises(ValidationError):
            kmeans(np.eye(3), 0)


class TestAgglomerative:
    def line(self):
        return np.sqrt(pairwise_sq_dists([[0.0], [1.0], [10.0]]))

    def test_line_single(self):
        t = agglomerative(self.line(), "single")
        assert [(m.left, m.right, m.height, m.node) for m in t.merges] == [(0, 1, 1.0, 3), (2, 3, 9.0, 4)]

    def test_identical_points(self):
        t = agglomerative(np.zeros((2, 2)))
        assert t.merges[0].height == 0.0

    @pytest.mark.parametrize("linkage", ["single", "complete", "average"])
    def test_matches_naive_oracle(self, linkage):
        X = np.random.default_rng(3).normal(size=(7, 2))
        D = np.sqrt(pairwise_sq_dists(X))
        got = agglomerative(D, linkage).merges
        ref = naive_agglomerative(D, linkage)
        assert [(m.left, m.right, m.node) for m in got] == [(a, b, node) for a, b, _, node in ref]
        np.testing.assert_allclose([m.height for m in got], [h for _, _, h, _ in ref], rtol=1e-12)

    @pytest.mark.parametrize("linkage", ["single", "complete", "average"])
    def test_dendrogram_invariants(self, rng, linkage):
        D = np.sqrt(pairwise_sq_dists(rng.normal(size=(15, 3))))
        t = agglomerative(D, linkage)
        assert len(t.merges) == 14
        heights = [m.height for m in t.merges]
        assert all(b >= a for a, b in zip(heights, heights[1:]))
        used = [x for m in t.merges for x in (m.left, m.right)]
        assert sorted(used) == list(range(15 + 13))
        assert sorted(t.leaf_order()) == list(range(15))
        assert t.to_linkage()[-1, 3] == 15

    def test_rejects_bad_input(self):
        with pytest.raises(ValidationError):
            agglomerative(np.ones((3, 3)))
        with pytest.raises(ValidationError):
            agglomerative(np.zeros((3, 3)), "ward")


class TestCut:
    def test_line_cuts(self):
        t = agglomerative(np.sqrt(pairwise_sq_dists([[0.0], [1.0], [10.0]])), "single")
        assert cut_dendrogram(t, 1).labels.tolist() == [0, 0, 0]
        assert cut_dendrogram(t, 2).labels.tolist() == [0, 0, 1]
        assert cut_dendrogram(t, 3).labels.tolist() == [0, 1, 2]

    def test_k_range(self):
        t = agglomerative(np.zeros((3, 3)))
        with pytest.raises(ValidationError):
            cut_dendrogram(t, 4)


def test_hierarchy_modes(rng):
    X = rng.normal(size=(5, 20))
    np.testing.assert_allclose(hierarchy_distances(X, "raw") ** 2, pairwise_sq_dists(X), rtol=1e-12)
    C = hierarchy_distances(X, "correlation")
    assert np.all(np.diag(C) == 0) and C.min() >= 0
    with pytest.raises(ValidationError):
        hierarchy_distances(X, "cosine")


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31), st.integers(3, 8), st.integers(3, 8), st.integers(2, 10))
def test_methods_agree_on_well_separated_blobs(seed, n0, n1, p):
    # centroid separation 10x the within-blob standard deviation
    rng = np.random.default_rng(seed)
    shift = np.zeros(p)
    shift[0] = 10.0
    X = np.vstack([rng.normal(size=(n0, p)) * 0.1, rng.normal(size=(n1, p)) * 0.1 + shift * 0.1])
    truth = Partition.from_labels([0] * n0 + [1] * n1)
    sq = pairwise_sq_dists(X)
    emb = diffusion_embed(gaussian_affinity(sq, float(np.median(sq[sq > 0]))), 1)
    parts = [
        spectral_threshold(emb),
        kmeans(X, 2),
        cut_dendrogram(agglomerative(np.sqrt(sq)), 2),
    ]
    assert all(partitions_equal(q, truth) for q in parts)


class TestEstimators:
    def test_spectral(self, preset_data):
        X, truth = preset_data
        est = DiffusionSpectralClustering().fit(X)
        assert partitions_equal(Partition.from_labels(est.labels_), truth)
        assert est.fit_predict(X).tolist() == est.labels_.tolist()

    def test_kmeans_predict(self, rng):
        X = np.vstack([rng.normal(size=(10, 2)), rng.normal(size=(10, 2)) + 20])
        est = KMeans(n_clusters=2).fit(X)
        assert est.predict(X).tolist() == est.labels_.tolist()
        assert est.inertia_ == pytest.approx(wcss(X, est.labels_))

    def test_agglomerative(self, rng):
        X = np.vstack([rng.normal(size=(6, 2)), rng.normal(size=(6, 2)) + 30])
        est = AgglomerativeClustering(linkage="complete").fit(X)
        assert est.labels_.tolist() == [0] * 6 + [1] * 6
        assert len(est.dendrogram_.merges) == 11
