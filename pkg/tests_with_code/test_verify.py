"""
Tests for the invariant suite.
"""

import pytest

from wpn.corpus import CorpusEntry, build_corpus
from wpn.graph_core import Graph, named_graph
from wpn.oracle import OracleLimitExceeded
from wpn.verify import (
    VerifySummary,
    check_energy_ipds,
    check_distributed_stable,
    check_equivalence,
    check_flip_bound,
    verify_corpus,
)


def _never_ipds(g, s):
    return False


class TestChecks:
    """Tests for the individual checks."""

    def test_energy_ipds_exhaustive(self):
        summary = VerifySummary()
        check_energy_ipds(CorpusEntry("C6", named_graph("C6")), summary)
        assert summary.checks["energy_ipds"] == 64
        assert summary.passed

    def test_energy_ipds_corrupted_predicate(self):
        """A validator that rejects everything disagrees on P3's center."""
        summary = VerifySummary()
        check_energy_ipds(CorpusEntry("P3", named_graph("P3")), summary, _never_ipds)
        assert len(summary.violations) == 1
        violation = summary.violations[0]
        assert violation.check == "energy_ipds"
        assert violation.reproducer.startswith("n 3\n")
        assert "# subset 1" in violation.reproducer

    @pytest.mark.parametrize("k", [2, 4, 6, 8, 10])
    def test_flip_bound(self, k):
        summary = VerifySummary()
        for seed in range(10):
            check_flip_bound(k, seed, summary)
        assert summary.checks["flip_bound"] == 10
        assert summary.passed

    @pytest.mark.parametrize("k", [4, 6, 10])
    def test_distributed_stable(self, k):
        summary = VerifySummary()
        for seed in range(3):
            check_distributed_stable(k, seed, summary)
        assert summary.checks["distributed_stable"] == 3
        assert summary.passed

    def test_equivalence(self):
        summary = VerifySummary()
        check_equivalence(CorpusEntry("C5", named_graph("C5")), 0, summary)
        assert summary.passed


class TestVerifyCorpus:
    """Tests for the full suite."""

    def test_small_corpus_passes(self):
        summary = verify_corpus(build_corpus(4, ("P3", "K1,3")), networks=5, equivalence_graphs=1)
        assert summary.passed
        assert summary.checks["equivalence"] == 1
        assert summary.checks["flip_bound"] == 5
        assert summary.checks["distributed_stable"] == 5
        assert summary.to_dict()["passed"] is True

    def test_negative_control(self):
        summary = verify_corpus(build_corpus(0, ("P3",)), _never_ipds, networks=0, equivalence_graphs=0)
        assert not summary.passed
        assert summary.to_dict()["violations"][0]["subject"] == "P3"

    def test_empty_corpus_warns(self):
        summary = verify_corpus([], networks=0, equivalence_graphs=0)
        assert summary.passed
        assert summary.total_checks == 0
        assert summary.warnings

    def test_oracle_cap(self):
        big = CorpusEntry("P17", Graph.from_edges(17, [(i, i + 1) for i in range(16)]))
        with pytest.raises(OracleLimitExceeded):
            verify_corpus([big], networks=0, equivalence_graphs=0)

    @pytest.mark.slow
    def test_default_corpus_passes(self):
        """Every connected graph up to six vertices plus the named families."""
        summary = verify_corpus(build_corpus(6))
        assert summary.passed, [v.to_dict() for v in summary.violations[:5]]
