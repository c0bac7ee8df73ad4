from __future__ import annotations

import numpy as np
import pytest

from errors import NoNegativesAvailableError
from graphs.core import build_graph
from models import (
    Graph,
    NegativeDistribution,
)
from training.sampling import (
    NegativeSampler,
    augment,
    gaussian_noise,
    sample_negatives,
)


def random_graph(n: int, p: float, seed: int) -> Graph:
    rng = np.random.default_rng(seed)
    rows, cols = np.triu_indices(n, k=1)
    keep = rng.random(rows.size) < p
    return build_graph(n, rows[keep], cols[keep])


def test_augment_with_zero_sigma_is_exact() -> None:
    z = np.random.default_rng(0).random((5, 3))

    assert np.array_equal(augment(z, 0.0, seed=1), z)


def test_augment_is_reproducible() -> None:
    z = np.random.default_rng(0).random((5, 3))

    assert np.array_equal(augment(z, 0.1, seed=4), augment(z, 0.1, seed=4))


def test_gaussian_noise_is_centred() -> None:
    n, d = 200, 16

    noise = gaussian_noise((n, d), 0.1, seed=3)

    assert abs(noise.mean()) < 4.0 * 0.1 / np.sqrt(n * d)


def test_gaussian_noise_rejects_negative_sigma() -> None:
    with pytest.raises(ValueError, match="negative"):
        gaussian_noise((2, 2), -0.1, seed=0)


def test_path_graph_negatives_avoid_the_neighbourhood() -> None:
    path = build_graph(4, [0, 1, 2], [1, 2, 3])

    drawn = sample_negatives(0, path, 2, seed=5)

    assert len(drawn) == 2
    assert set(drawn.tolist()) <= {2, 3}


def test_node_adjacent_to_all_others_has_no_negatives() -> None:
    complete = build_graph(2, [0], [1])

    with pytest.raises(NoNegativesAvailableError, match="adjacent_to_all_nodes"):
        sample_negatives(0, complete, 3, seed=0)


@pytest.mark.parametrize("distribution", list(NegativeDistribution))
def test_sampler_is_reproducible(distribution: NegativeDistribution) -> None:
    graph = random_graph(20, 0.2, seed=1)

    first = NegativeSampler(graph, 5, distribution=distribution, seed=9).sample_all()
    second = NegativeSampler(graph, 5, distribution=distribution, seed=9).sample_all()

    assert first.shape == (20, 5)
    assert np.array_equal(first, second)


@pytest.mark.parametrize("distribution", list(NegativeDistribution))
@pytest.mark.parametrize("p", [0.05, 0.8])
def test_sampled_negatives_are_never_neighbours(distribution: NegativeDistribution, p: float) -> None:
    for seed in range(5):
        graph = random_graph(30, p, seed)
        sampler = NegativeSampler(graph, 40, distribution=distribution, seed=seed)
        for node in range(graph.n):
            if graph.neighbors(node).size == graph.n - 1:
                continue
            excluded = {node, *graph.neighbors(node).tolist()}
            assert not excluded & set(sampler.sample(node).tolist())


def test_candidates_exclude_self_and_neighbours() -> None:
    star = build_graph(5, [0, 0], [1, 2])

    assert NegativeSampler(star, 1).candidates(0).tolist() == [3, 4]
    assert NegativeSampler(star, 1).candidates(1).tolist() == [2, 3, 4]


def test_degree_distribution_prefers_high_degree_nodes() -> None:
    # node 5 has degree 4, node 6 has degree 1; node 0 may draw either
    graph = build_graph(7, [1, 2, 3, 4, 6, 1], [5, 5, 5, 5, 4, 2])

    drawn = NegativeSampler(graph, 4000, distribution=NegativeDistribution.DEGREE, seed=2).sample(0)

    assert np.count_nonzero(drawn == 5) > np.count_nonzero(drawn == 6)


def test_sampler_rejects_zero_negatives() -> None:
    with pytest.raises(ValueError, match="below_one"):
        NegativeSampler(random_graph(5, 0.3, seed=0), 0)
