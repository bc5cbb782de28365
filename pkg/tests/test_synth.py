import numpy as np
import pytest

from dmc.exceptions import ValidationError
from dmc.synth import NormalStream, PRESETS, SynthSpec, make_dense_sparse, preset, rng_stream, splitmix64

MASK = (1 << 64) - 1


def splitmix64_reference(state):
    """Textbook SplitMix64 step on Python ints; returns (new_state, output)."""
    state = (state + 0x9E3779B97F4A7C15) & MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return state, z ^ (z >> 31)


def test_splitmix_known_first_output():
    assert int(splitmix64(0, [0])[0]) == 0xE220A8397B1DCDAF


@pytest.mark.parametrize("seed", [0, 1, 12345, 2**63 + 7])
def test_splitmix_matches_sequential_reference(seed):
    state, expected = seed, []
    for _ in range(50):
        state, out = splitmix64_reference(state)
        expected.append(out)
    assert [int(v) for v in splitmix64(seed, np.arange(50))] == expected


def test_same_seed_identical_million():
    a = rng_stream(3).draw(1_000_000)
    b = rng_stream(3).draw(1_000_000)
    assert a.tobytes() == b.tobytes()


def test_different_seeds_differ():
    assert not np.array_equal(rng_stream(1).draw(1000), rng_stream(2).draw(1000))


def test_moments():
    v = rng_stream(2024).draw(1_000_000)
    assert abs(v.mean()) < 0.005
    assert abs(v.var() - 1.0) < 0.01


def test_chunked_draws_match_one_draw():
    whole = NormalStream(9).draw(101)
    s = NormalStream(9)
    parts = np.concatenate([s.draw(1), s.draw(4), s.draw(7), s.draw(89)])
    assert parts.tobytes() == whole.tobytes()
    s = NormalStream(9)
    assert [next(s) for _ in range(5)] == whole[:5].tolist()


def test_deterministic_matrix():
    spec = SynthSpec(n_dense=5, n_sparse=4, p=300, seed=17)
    X1, t1 = make_dense_sparse(spec)
    X2, t2 = make_dense_sparse(spec)
    assert X1.tobytes() == X2.tobytes() and t1.labels.tolist() == t2.labels.tolist()
    assert not X1.flags.writeable


def test_distance_ordering():
    X, truth = make_dense_sparse(SynthSpec(12, 11, 5000, 1.0, 3.0, 50.0, seed=42))
    D = np.sqrt(((X[:, None, :] - X[None, :, :]) ** 2).sum(axis=2))
    dense, sparse = truth.labels == 0, truth.labels == 1
    iu = np.triu_indices(23, 1)
    same_d = (dense[:, None] & dense[None, :])[iu]
    same_s = (sparse[:, None] & sparse[None, :])[iu]
    cross = ~(same_d | same_s)
    d = D[iu]
    assert d[same_d].mean() < d[same_s].mean() < d[cross].mean()


def test_planted_sizes_and_finite():
    X, truth = make_dense_sparse(preset("paper", seed=4))
    assert X.shape == (23, 5000) and np.isfinite(X).all()
    assert [(truth.labels == c).sum() for c in (0, 1)] == [12, 11]


def test_center_separation():
    spec = SynthSpec(n_dense=2, n_sparse=2, p=4000, dense_spread=1e-9, sparse_spread=1e-9,
                     separation=7.0, seed=1)
    X, truth = make_dense_sparse(spec)
    c0 = X[truth.labels == 0].mean(axis=0)
    c1 = X[truth.labels == 1].mean(axis=0)
    assert np.linalg.norm(c0 - c1) == pytest.approx(7.0, rel=1e-6)


def test_degenerate_control():
    X, truth = make_dense_sparse(SynthSpec(5, 5, 50, 1.0, 1.0, 0.0, seed=3))
    assert X.shape == (10, 50) and truth.k == 2


def test_preset_defaults():
    assert PRESETS["paper"]["n_dense"] + PRESETS["paper"]["n_sparse"] == 23
    with pytest.raises(ValidationError):
        preset("nope")


@pytest.mark.parametrize("kwargs", [
    dict(n_dense=1, n_sparse=2), dict(dense_spread=0.0), dict(dense_spread=2.0, sparse_spread=1.0),
    dict(separation=-1.0), dict(p=1),
])
def test_invalid_specs(kwargs):
    with pytest.raises(ValidationError):
        SynthSpec(**kwargs)
