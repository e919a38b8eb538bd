"""
Tests for energy_model.

Covers:
- the domination penalty energy and its exact gradient
- compilation onto Hopfield weights and biases
- the quadratic Liapunov function
- the flat compiled-problem text format
"""

import itertools
import math

import numpy as np
import pytest

from wpn.corpus import connected_atlas_graphs, random_geometric_corpus
from wpn.energy_model import (
    CompiledFormatError,
    CompiledProblem,
    DimensionMismatchError,
    EnergyConfig,
    HopfieldParams,
    LiapunovDomainError,
    bipolar_parameters,
    compile_mcds,
    integral_penalty,
    local_gradient,
    mcds_energy,
    mcds_energy_gradient,
    parse_compiled,
    quadratic_liapunov,
    render_compiled,
)
from wpn.graph_core import indicator, is_independent_perfect_dominating, named_graph


class TestEnergyConfig:
    """Tests for the gain configuration."""

    def test_defaults(self):
        """Both gains default to 1."""
        cfg = EnergyConfig()
        assert (cfg.g_a, cfg.g_b) == (1.0, 1.0)
        assert cfg.strictly_positive

    def test_negative_gain_rejected(self):
        """Negative gains are invalid."""
        with pytest.raises(ValueError):
            EnergyConfig(g_a=-1.0)

    def test_both_zero_rejected(self):
        """At least one penalty must be active."""
        with pytest.raises(ValueError):
            EnergyConfig(g_a=0.0, g_b=0.0)


class TestMcdsEnergy:
    """Tests for the penalty energy."""

    def test_p3_center_zero(self):
        """The IPDS {1} of P3 has zero energy."""
        assert mcds_energy(named_graph("P3"), [0, 1, 0]) == 0.0

    def test_p3_empty(self):
        """Each undominated vertex contributes 1/2."""
        assert mcds_energy(named_graph("P3"), [0, 0, 0]) == 1.5

    def test_edgeless_all_active(self):
        """No edges and no inactive vertices give zero."""
        assert mcds_energy(named_graph("E3"), [1, 1, 1]) == 0.0

    def test_dimension_mismatch(self):
        """State length must equal the vertex count."""
        with pytest.raises(DimensionMismatchError):
            mcds_energy(named_graph("P3"), [0.5, 0.5])

    def test_non_negative_on_cube(self):
        """Energy is non-negative on [0,1]^N."""
        rng = np.random.default_rng(0)
        for name in ("P5", "C6", "K4", "K1,5"):
            g = named_graph(name)
            for _ in range(50):
                assert mcds_energy(g, rng.uniform(size=g.n)) >= 0.0

    def test_zero_exactly_on_ipds(self):
        """Zero energy at a binary indicator iff the set is an IPDS."""
        graphs = [e.graph for e in connected_atlas_graphs(5)] + [named_graph("C6"), named_graph("K1,5")]
        for g in graphs:
            for code in range(1 << g.n):
                s = [v for v in range(g.n) if code >> v & 1]
                zero = mcds_energy(g, indicator(g, s)) == 0.0
                assert zero == is_independent_perfect_dominating(g, s)


class TestGradient:
    """Tests for the exact gradient."""

    def test_k2_independence_only(self):
        """With g_b = 0 the gradient is g_a times the active-neighbor sum."""
        grad = mcds_energy_gradient(named_graph("K2"), [1, 1], EnergyConfig(g_a=1.0, g_b=0.0))
        assert grad.tolist() == [1.0, 1.0]

    def test_edgeless_without_domination(self):
        """No edges and g_b = 0 leave nothing to differentiate."""
        grad = mcds_energy_gradient(named_graph("E4"), [0.2, 0.4, 0.6, 0.8], EnergyConfig(g_a=3.0, g_b=0.0))
        assert grad.tolist() == [0.0, 0.0, 0.0, 0.0]

    def test_finite_differences(self):
        """Central differences with step 1e-5 agree to 1e-6 relative."""
        rng = np.random.default_rng(1)
        h = 1e-5
        for entry in random_geometric_corpus(10, seed=2, n_max=12):
            g = entry.graph
            for _ in range(100):
                z = rng.uniform(0.05, 0.95, size=g.n)
                grad = mcds_energy_gradient(g, z)
                for k in range(g.n):
                    up, down = z.copy(), z.copy()
                    up[k] += h
                    down[k] -= h
                    fd = (mcds_energy(g, up) - mcds_energy(g, down)) / (2 * h)
                    assert abs(fd - grad[k]) <= 1e-6 * max(1.0, abs(grad[k]))

    def test_local_gradient_matches_global(self):
        """A vertex computing from its neighborhood gets the same bits."""
        g = named_graph("C5")
        z = np.array([0.1, 0.7, 0.3, 0.9, 0.4])
        s = [math.fsum(z[j] for j in nb) for nb in g.neighbors]
        grad = mcds_energy_gradient(g, z)
        for k in range(g.n):
            nb = g.neighbors[k]
            local = local_gradient(EnergyConfig(), s[k], [s[j] for j in nb], [z[j] for j in nb])
            assert local == grad[k]


class TestCompileMcds:
    """Tests for compilation onto Hopfield parameters."""

    def test_edgeless(self):
        """No couplings, biases g_b/2, exactly quadratic."""
        prob = compile_mcds(named_graph("E3"), EnergyConfig(g_a=1.0, g_b=2.0))
        assert not np.any(prob.quadratic.W)
        assert prob.quadratic.b.tolist() == [1.0, 1.0, 1.0]
        assert prob.residual_order == 0

    def test_k2_independence_only(self):
        """g_b = 0 leaves w_01 = -g_a and zero bias."""
        prob = compile_mcds(named_graph("K2"), EnergyConfig(g_a=1.0, g_b=0.0))
        assert prob.quadratic.W[0, 1] == -1.0
        assert prob.quadratic.b.tolist() == [0.0, 0.0]
        assert prob.residual_order == 0

    def test_p3_cubic(self):
        """P3 with both gains carries a cubic remainder."""
        assert compile_mcds(named_graph("P3")).residual_order == 3

    def test_independence_weights(self):
        """With g_a only, weights are 0 or -g_a and symmetric."""
        prob = compile_mcds(named_graph("C6"), EnergyConfig(g_a=2.5, g_b=0.0))
        W = prob.quadratic.W
        assert set(np.unique(W).tolist()) <= {0.0, -2.5}
        assert np.array_equal(W, W.T)

    def test_quadratic_plus_residual_reconstructs(self):
        """Quadratic part plus the residual equals the energy."""
        rng = np.random.default_rng(3)
        for entry in random_geometric_corpus(5, seed=4):
            prob = compile_mcds(entry.graph, EnergyConfig(g_a=1.3, g_b=0.7))
            for _ in range(20):
                z = rng.uniform(size=entry.graph.n)
                total = prob.quadratic_energy(z) + prob.residual(z)
                assert total == pytest.approx(prob.energy(z), abs=1e-12)

    def test_two_hop_coupling(self):
        """Common-neighbor pairs couple through g_b."""
        prob = compile_mcds(named_graph("P3"))
        assert prob.quadratic.W[0, 2] == -1.0
        assert prob.quadratic.W[0, 1] == -3.0

    def test_from_params_exact(self):
        """Raw parameters wrap into an exactly quadratic problem."""
        p = HopfieldParams(W=[[0, 2], [2, 0]], b=[1, -1])
        prob = CompiledProblem.from_params(p)
        z = np.array([0.3, 0.6])
        assert prob.residual_order == 0
        assert prob.energy(z) == pytest.approx(-0.5 * z @ p.W @ z - p.b @ z)
        assert np.allclose(prob.gradient(z), -(p.W @ z + p.b))


class TestHopfieldParams:
    """Tests for parameter validation."""

    def test_asymmetric_rejected(self):
        with pytest.raises(ValueError):
            HopfieldParams(W=[[0, 1], [2, 0]], b=[0, 0])

    def test_diagonal_rejected(self):
        with pytest.raises(ValueError):
            HopfieldParams(W=[[1, 0], [0, 0]], b=[0, 0])

    def test_bias_shape(self):
        with pytest.raises(DimensionMismatchError):
            HopfieldParams(W=[[0, 1], [1, 0]], b=[0, 0, 0])

    def test_read_only(self):
        p = HopfieldParams(W=[[0, 1], [1, 0]], b=[0, 0])
        with pytest.raises(ValueError):
            p.W[0, 1] = 5.0


class TestLiapunov:
    """Tests for the quadratic Liapunov function."""

    def test_midpoint_is_zero(self):
        """The integral term vanishes at z = 0.5."""
        p = HopfieldParams(W=np.zeros((3, 3)), b=np.zeros(3), lam=1.0)
        assert quadratic_liapunov(p, [0.5, 0.5, 0.5]) == pytest.approx(0.0, abs=1e-15)

    def test_vanishing_integral_term(self):
        """Large lambda leaves the bias term."""
        p = HopfieldParams(W=np.zeros((1, 1)), b=[1.0], lam=1e9)
        assert quadratic_liapunov(p, [0.9]) == pytest.approx(-0.9, abs=1e-6)

    def test_integral_term_shrinks_with_lambda(self):
        """The integral term scales as 1/lambda."""
        z = [0.2, 0.7]
        values = [
            quadratic_liapunov(HopfieldParams(W=np.zeros((2, 2)), b=np.zeros(2), lam=lam), z)
            for lam in (1.0, 10.0, 100.0)
        ]
        assert values[0] > values[1] > values[2] > 0.0

    def test_open_interval(self):
        """Finite lambda requires outputs strictly inside (0, 1)."""
        p = HopfieldParams(W=np.zeros((2, 2)), b=np.zeros(2), lam=5.0)
        with pytest.raises(LiapunovDomainError):
            quadratic_liapunov(p, [0.0, 0.5])

    def test_threshold_limit(self):
        """Infinite lambda admits binary states and drops the integral term."""
        p = HopfieldParams(W=[[0, -1], [-1, 0]], b=[0.5, 0.5], lam=math.inf)
        assert quadratic_liapunov(p, [1, 1]) == pytest.approx(0.0)
        assert quadratic_liapunov(p, [1, 0]) == pytest.approx(-0.5)

    def test_integral_penalty(self):
        """Penalty is zero at the midpoint and finite at the boundary."""
        assert integral_penalty(np.array([0.5, 0.5]), 20.0) == pytest.approx(0.0, abs=1e-15)
        assert math.isfinite(integral_penalty(np.array([0.0, 1.0]), 20.0))
        assert integral_penalty(np.array([0.1]), math.inf) == 0.0


class TestBipolar:
    """Tests for the unipolar-to-bipolar rewrite."""

    def test_forms_agree_up_to_constant(self):
        """The two quadratic forms differ by a constant."""
        rng = np.random.default_rng(6)
        p = compile_mcds(named_graph("C5")).quadratic
        Wv, theta = bipolar_parameters(p.W, p.b)
        differences = []
        for _ in range(10):
            z = rng.uniform(size=5)
            v = 2 * z - 1
            unipolar = -0.5 * z @ p.W @ z - p.b @ z
            bipolar = -0.5 * v @ Wv @ v - theta @ v
            differences.append(unipolar - bipolar)
        assert np.allclose(differences, differences[0])


class TestCompiledFormat:
    """Tests for the flat text format."""

    def test_round_trip_graph_problem(self):
        """A compiled graph problem survives render and parse."""
        prob = compile_mcds(named_graph("K1,3"), EnergyConfig(g_a=1.5, g_b=0.5), lam=12.0)
        back = parse_compiled(render_compiled(prob))
        assert np.array_equal(back.quadratic.W, prob.quadratic.W)
        assert np.array_equal(back.quadratic.b, prob.quadratic.b)
        assert back.quadratic.lam == 12.0
        assert back.residual_order == prob.residual_order
        z = np.array([0.2, 0.4, 0.6, 0.8])
        assert back.energy(z) == prob.energy(z)
        assert np.array_equal(back.gradient(z), prob.gradient(z))

    def test_header_layout(self):
        """Header lines come first, weights as sparse triples."""
        text = render_compiled(compile_mcds(named_graph("K2"), EnergyConfig(g_a=1.0, g_b=0.0)))
        lines = text.splitlines()
        assert lines[0] == "K 2"
        assert "w 0 1 -1.0" in lines
        assert "e 0 1" in lines

    def test_unknown_record(self):
        """Unknown records are rejected with their line number."""
        with pytest.raises(CompiledFormatError, match="line 2"):
            parse_compiled("K 1\nq 1\nb 0.0\n")

    def test_missing_bias(self):
        with pytest.raises(CompiledFormatError):
            parse_compiled("K 2\n")

    def test_parameters_only(self):
        """Without gains the text parses to an exactly quadratic problem."""
        prob = parse_compiled("K 2\nlambda 3.0\nb 1.0 2.0\nw 0 1 0.5\nw 1 0 0.5\n")
        assert prob.residual_order == 0
        assert prob.graph is None
        assert prob.quadratic.W[1, 0] == 0.5


def test_cube_corners_nonnegative():
    """Every corner of the cube of a small graph has non-negative energy."""
    g = named_graph("P4")
    for corner in itertools.product((0.0, 1.0), repeat=g.n):
        assert mcds_energy(g, corner) >= 0.0
