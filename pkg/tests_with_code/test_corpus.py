"""
Tests for the graph and network corpora.
"""

from collections import Counter

import numpy as np
import pytest

from wpn.corpus import (
    DEFAULT_FAMILIES,
    build_corpus,
    connected_atlas_graphs,
    family_graphs,
    random_geometric_corpus,
    random_integer_network,
)


class TestAtlas:
    """Tests for the connected small-graph atlas."""

    def test_counts_per_size(self):
        """Connected graphs up to isomorphism: 1, 1, 2, 6, 21, 112."""
        sizes = Counter(e.graph.n for e in connected_atlas_graphs(6))
        assert [sizes[n] for n in range(1, 7)] == [1, 1, 2, 6, 21, 112]

    def test_all_connected(self):
        assert all(e.graph.is_connected() for e in connected_atlas_graphs(5))

    def test_names_unique(self):
        names = [e.name for e in connected_atlas_graphs(6)]
        assert len(names) == len(set(names))

    def test_beyond_atlas(self):
        with pytest.raises(ValueError):
            connected_atlas_graphs(8)


class TestBuildCorpus:
    """Tests for corpus assembly."""

    def test_default_families_appended(self):
        entries = build_corpus(3)
        assert [e.name for e in entries[-len(DEFAULT_FAMILIES):]] == list(DEFAULT_FAMILIES)
        assert len(entries) == 4 + len(DEFAULT_FAMILIES)

    def test_empty(self):
        assert build_corpus(0, ()) == []

    def test_families(self):
        entries = family_graphs(["K1,5"])
        assert entries[0].graph.n == 6


class TestRandomGeometricCorpus:
    """Tests for seeded unit-disk corpora."""

    def test_deterministic(self):
        a = random_geometric_corpus(5, seed=9)
        b = random_geometric_corpus(5, seed=9)
        assert [e.name for e in a] == [e.name for e in b]
        assert [e.graph for e in a] == [e.graph for e in b]

    def test_size_range(self):
        entries = random_geometric_corpus(20, seed=1, n_min=4, n_max=6)
        assert all(4 <= e.graph.n <= 6 for e in entries)


class TestRandomIntegerNetwork:
    """Tests for integer-weight networks."""

    @pytest.mark.parametrize("seed", range(10))
    def test_shape(self, seed):
        p = random_integer_network(6, seed)
        W = p.W
        assert np.array_equal(W, W.T)
        assert not np.any(np.diag(W))
        assert np.array_equal(W, np.round(W))
        assert np.all(np.abs(W).sum(axis=1) % 2 == 1)
        assert np.array_equal(p.b, -0.5 * W.sum(axis=1))

    @pytest.mark.parametrize("seed", range(10))
    def test_no_zero_inputs(self, seed):
        """Every binary state gives every unit a nonzero input."""
        p = random_integer_network(4, seed)
        for code in range(16):
            z = np.array([code >> i & 1 for i in range(4)], dtype=float)
            assert np.all(p.W @ z + p.b != 0)

    def test_deterministic(self):
        assert np.array_equal(random_integer_network(8, 3).W, random_integer_network(8, 3).W)

    def test_odd_size_rejected(self):
        with pytest.raises(ValueError):
            random_integer_network(5, 0)
