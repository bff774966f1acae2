"""Graphs: construction rules, sampling, relabeling, condition checks, IO."""

from __future__ import annotations

import math
import pickle

import numpy as np
import pytest

from graphlim import (
    ExposureGraph,
    HalfGraphKernel,
    Permutation,
    StepKernel,
    check_graph_conditions,
    graph_to_step_kernel,
    half_graph,
    permute_graph,
    read_edge_list,
    sample_graphon_graph,
    sparsify,
    write_edge_list,
)


def complete_graph(n: int) -> ExposureGraph:
    return ExposureGraph(~np.eye(n, dtype=bool))


def test_half_graph_four_vertices():
    g = half_graph(4)
    assert g.edges() == [(0, 3), (1, 2), (1, 3), (2, 3)]
    assert g.true_degrees.tolist() == [1, 2, 2, 3]
    assert g.clamped_degrees.tolist() == [1, 2, 2, 3]
    assert g.edge_count == 4


def test_half_graph_single_vertex():
    g = half_graph(1)
    assert g.edge_count == 0
    assert g.true_degrees.tolist() == [0]
    assert g.clamped_degrees.tolist() == [1]


def test_half_graph_edge_rule():
    n = 9
    g = half_graph(n)
    for i in range(n):
        for j in range(n):
            expected = (i + 1) + (j + 1) > n and i != j
            assert bool(g.adjacency[i, j]) == expected


def test_adjacency_validation():
    with pytest.raises(ValueError):
        ExposureGraph(np.zeros((2, 3), dtype=bool))
    asym = np.zeros((3, 3), dtype=bool)
    asym[0, 1] = True
    with pytest.raises(ValueError):
        ExposureGraph(asym)
    loop = np.zeros((2, 2), dtype=bool)
    loop[0, 0] = True
    with pytest.raises(ValueError):
        ExposureGraph(loop)


def test_adjacency_is_write_locked():
    g = half_graph(3)
    with pytest.raises(ValueError):
        g.adjacency[0, 1] = True


def test_from_edges_one_based_matches_construction():
    g = ExposureGraph.from_edges(4, [(1, 4), (2, 3), (2, 4), (3, 4)], one_based=True)
    assert np.array_equal(g.adjacency, half_graph(4).adjacency)


def test_from_edges_rejects_bad_edges():
    with pytest.raises(ValueError):
        ExposureGraph.from_edges(3, [(0, 3)])
    with pytest.raises(ValueError):
        ExposureGraph.from_edges(3, [(1, 1)])


def test_permutation_validation_and_apply():
    with pytest.raises(ValueError):
        Permutation(np.array([0, 0, 2]))
    with pytest.raises(ValueError):
        Permutation(np.array([0, 2]))
    perm = Permutation(np.array([2, 0, 1]))
    values = np.array([10.0, 11.0, 12.0])
    assert perm.apply(values).tolist() == [12.0, 10.0, 11.0]
    ident = Permutation.identity(3)
    assert ident.apply(values).tolist() == values.tolist()


def test_permute_graph_path_example():
    g = ExposureGraph.from_edges(3, [(0, 1), (1, 2)])
    perm = Permutation(np.array([2, 0, 1]))
    h = permute_graph(g, perm)
    assert h.edges() == [(0, 2), (1, 2)]


def test_permute_graph_preserves_degree_multiset():
    rng = np.random.default_rng(3)
    for _ in range(10):
        n = int(rng.integers(2, 12))
        adj = rng.random((n, n)) < 0.4
        adj = np.triu(adj, k=1)
        g = ExposureGraph(adj | adj.T)
        perm = Permutation(rng.permutation(n))
        h = permute_graph(g, perm)
        assert sorted(h.true_degrees) == sorted(g.true_degrees)
        assert h.edge_count == g.edge_count


def test_sparsify_extremes_and_reproducibility():
    g = half_graph(20)
    full = sparsify(g, 1.0, np.random.default_rng(0))
    assert np.array_equal(full.adjacency, g.adjacency)
    empty = sparsify(g, 0.0, np.random.default_rng(0))
    assert empty.edge_count == 0

    a = sparsify(g, 0.4, np.random.default_rng(42))
    b = sparsify(g, 0.4, np.random.default_rng(42))
    assert np.array_equal(a.adjacency, b.adjacency)
    # sparsification only removes edges
    assert not np.any(a.adjacency & ~g.adjacency)
    with pytest.raises(ValueError):
        sparsify(g, 1.2, np.random.default_rng(0))


def test_sample_graphon_graph_midpoint_latents():
    # with latents at (i - 0.5)/4 the half-graph kernel gives edge
    # probabilities in {0, 1}: u_i + u_j > 1 holds exactly for the 1-based
    # pairs (2,4) and (3,4); (1,4) and (2,3) sit on the boundary and are out
    latents = np.array([0.125, 0.375, 0.625, 0.875])
    g = sample_graphon_graph(HalfGraphKernel(), latents, 1.0, np.random.default_rng(0))
    assert g.edges() == [(1, 3), (2, 3)]


def test_sample_graphon_graph_degenerate_kernels():
    rng = np.random.default_rng(1)
    latents = rng.random(8)
    complete = sample_graphon_graph(StepKernel(np.array([[1.0]])), latents, 1.0, rng)
    assert complete.edge_count == 8 * 7 // 2
    empty = sample_graphon_graph(StepKernel(np.array([[0.0]])), latents, 1.0, rng)
    assert empty.edge_count == 0


def test_sample_graphon_graph_validates_inputs():
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError):
        sample_graphon_graph(HalfGraphKernel(), np.array([0.5, 1.5]), 1.0, rng)
    with pytest.raises(ValueError):
        sample_graphon_graph(HalfGraphKernel(), np.array([0.5, 0.5]), 0.0, rng)


def test_sample_graphon_graph_seeded_reproducibility():
    latents = np.random.default_rng(9).random(30)
    a = sample_graphon_graph(HalfGraphKernel(), latents, 0.5, np.random.default_rng(7))
    b = sample_graphon_graph(HalfGraphKernel(), latents, 0.5, np.random.default_rng(7))
    assert np.array_equal(a.adjacency, b.adjacency)


def test_graph_to_step_kernel_scales_by_rho():
    g = half_graph(4)
    k = graph_to_step_kernel(g, 0.5)
    assert k.values[0, 3] == 2.0
    assert k.values[0, 1] == 0.0
    with pytest.raises(ValueError):
        graph_to_step_kernel(g, 0.0)


class TestGraphConditions:
    def test_complete_graph_values(self):
        report = check_graph_conditions(complete_graph(4), 1.0)
        assert report.n == 4
        assert report.sum_d == 12
        assert report.sum_d2 == 36
        assert report.sum_d4 == 4 * 81
        assert report.gamma_sum == 36
        assert report.delta_n == 3
        assert report.min_clamped_degree == 3
        expected_bound = 1.0 / math.sqrt(4 * 3) + math.sqrt(36) / (4 * 3**1.5)
        assert report.remainder_bound == pytest.approx(expected_bound, rel=1e-12)
        assert report.ratio_3a == pytest.approx(4 * 81 / 4**5)
        assert report.ratio_3b == pytest.approx(3 / 4)

    def test_c_bound_scales_remainder(self):
        g = complete_graph(4)
        base = check_graph_conditions(g, 1.0, c_bound=1.0)
        double = check_graph_conditions(g, 1.0, c_bound=2.0)
        assert double.remainder_bound == pytest.approx(2 * base.remainder_bound)

    def test_isolated_vertex_gives_infinite_bound(self):
        adj = np.zeros((3, 3), dtype=bool)
        adj[0, 1] = adj[1, 0] = True
        report = check_graph_conditions(ExposureGraph(adj), 1.0)
        assert report.delta_n == 0
        assert report.min_clamped_degree == 1
        assert math.isinf(report.remainder_bound)

    def test_gamma_sum_matches_triple_loop(self):
        rng = np.random.default_rng(12)
        for _ in range(5):
            n = int(rng.integers(2, 10))
            adj = rng.random((n, n)) < 0.4
            adj = np.triu(adj, k=1)
            g = ExposureGraph(adj | adj.T)
            gamma = sum(
                int(g.adjacency[i, k] and g.adjacency[k, j])
                for i in range(n)
                for j in range(n)
                for k in range(n)
            )
            report = check_graph_conditions(g, 1.0)
            assert report.gamma_sum == gamma
            # ordered-pair common-neighbor count equals the squared-degree sum
            assert gamma == int((g.true_degrees.astype(np.int64) ** 2).sum())

    def test_rho_enters_ratios(self):
        report = check_graph_conditions(complete_graph(4), 0.5)
        assert report.rho == 0.5
        assert report.ratio_3a == pytest.approx(4 * 81 / (4**5 * 0.5**4))
        assert report.ratio_3b == pytest.approx(3 / (4 * 0.5))


def test_edge_list_round_trip(tmp_path):
    g = half_graph(6)
    path = tmp_path / "edges.txt"
    write_edge_list(g, path)
    back = read_edge_list(path)
    assert np.array_equal(back.adjacency, g.adjacency)
    explicit = read_edge_list(path, n=6)
    assert np.array_equal(explicit.adjacency, g.adjacency)


def test_edge_list_io_empty_graph(tmp_path):
    path = tmp_path / "edges.txt"
    write_edge_list(half_graph(1), path)
    assert read_edge_list(path, n=3).edge_count == 0


def test_read_edge_list_reports_line_numbers(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("1 2\n3 oops\n")
    with pytest.raises(ValueError, match="line 2"):
        read_edge_list(path)
    path.write_text("1 2\n\n2 1\n")
    with pytest.raises(ValueError, match="line 3"):
        read_edge_list(path)
    path.write_text("1 2 3\n")
    with pytest.raises(ValueError, match="line 1"):
        read_edge_list(path)


def test_graph_pickles_cleanly():
    g = half_graph(5)
    clone = pickle.loads(pickle.dumps(g))
    assert np.array_equal(clone.adjacency, g.adjacency)
    assert clone.true_degrees.tolist() == g.true_degrees.tolist()
    assert clone.edge_count == g.edge_count
