"""Topology generators, the lazy transform, and flocking construction."""

import numpy as np
import pytest

from consensus_robustness import (
    TopologyDescriptor,
    errors,
    family_matrix,
    flocking,
    generate,
    invariant_distribution,
    is_primitive,
    lazy,
    mixing_example,
    random_flocking,
    validate_stochastic,
)
from consensus_robustness.topology import complete_edges, family_names, path_edges


class TestNamedTopologies:
    def test_lazy_star_rows_n4(self):
        A = family_matrix("lazy-star", 4)
        assert np.allclose(A.entries[0], [0.5, 1 / 6, 1 / 6, 1 / 6], atol=1e-15)
        for i in (1, 2, 3):
            expected = np.zeros(4)
            expected[0] = 0.5
            expected[i] = 0.5
            assert np.allclose(A.entries[i], expected, atol=1e-15)

    def test_lazy_cycle_rows_n5(self):
        A = family_matrix("lazy-cycle", 5)
        for i in range(5):
            assert A.entries[i, i] == pytest.approx(0.5)
            assert A.entries[i, (i + 1) % 5] == pytest.approx(0.25)
            assert A.entries[i, (i - 1) % 5] == pytest.approx(0.25)

    def test_directed_cycle_is_shift_permutation(self):
        A = generate(TopologyDescriptor(kind="directed_cycle", n=3))
        expected = np.zeros((3, 3))
        for i in range(3):
            expected[i, (i + 1) % 3] = 1.0
        assert np.array_equal(A.entries, expected)

    def test_complete_is_uniform(self):
        A = family_matrix("complete", 6)
        assert np.allclose(A.entries, 1.0 / 6)

    def test_path_endpoint_rows(self):
        A = family_matrix("path", 4)
        assert A.entries[0].tolist() == [0.0, 1.0, 0.0, 0.0]
        assert A.entries[3].tolist() == [0.0, 0.0, 1.0, 0.0]
        assert np.allclose(A.entries[1], [0.5, 0.0, 0.5, 0.0])

    @pytest.mark.parametrize("kind,n", [("star", 1), ("cycle", 2), ("directed_cycle", 2)])
    def test_dimension_floors(self, kind, n):
        with pytest.raises(errors.InvalidDimension):
            generate(TopologyDescriptor(kind=kind, n=n))

    @pytest.mark.parametrize("family", family_names())
    def test_every_family_passes_validation(self, family):
        A = family_matrix(family, 8, p=0.5, seed=1)
        revalidated = validate_stochastic(A.entries)
        assert revalidated.n == 8


class TestLazy:
    def test_identity_is_fixed_point(self):
        I3 = validate_stochastic(np.eye(3))
        assert np.array_equal(lazy(I3).entries, np.eye(3))

    def test_lazy_directed_cycle_is_primitive(self):
        dc = family_matrix("directed-cycle", 7)
        assert not is_primitive(dc)
        assert is_primitive(lazy(dc))

    @pytest.mark.parametrize("family", ["star", "cycle", "path", "directed-cycle"])
    def test_eigenvalues_map_affinely(self, family):
        # spec(lazy(A)) = (1 + spec(A)) / 2, checked against a dense solve.
        A = family_matrix(family, 11)
        before = np.sort_complex(np.linalg.eigvals(A.entries))
        after = np.sort_complex(np.linalg.eigvals(lazy(A).entries))
        assert np.allclose(after, (1.0 + before) / 2.0, atol=1e-9)

    @pytest.mark.parametrize("family", ["lazy-cycle", "complete", "lazy-complete"])
    def test_undirected_families_doubly_stochastic(self, family):
        A = family_matrix(family, 9)
        assert np.max(np.abs(A.entries.sum(axis=0) - 1.0)) <= 1e-10


class TestMixingExample:
    def test_n5_entries(self):
        B = mixing_example(5)
        assert B.entries[0, 0] == pytest.approx(0.8)
        assert B.entries[2, 1] == pytest.approx(0.05)

    @pytest.mark.parametrize("n", [3, 4, 8, 33])
    def test_primitive_for_all_n(self, n):
        assert is_primitive(mixing_example(n))

    def test_invariant_distribution_uniform(self):
        pi = invariant_distribution(mixing_example(12))
        assert np.allclose(pi.pi, 1.0 / 12, atol=1e-12)

    def test_too_small_rejected(self):
        with pytest.raises(errors.InvalidDimension):
            mixing_example(2)


class TestFlocking:
    def test_complete_without_self_loops(self):
        n = 5
        A = flocking(complete_edges(n), n, self_loops=False)
        expected = (np.ones((n, n)) - np.eye(n)) / (n - 1)
        assert np.allclose(A.entries, expected, atol=1e-15)
        assert np.allclose(A.entries, A.entries.T)

    def test_path_three_nodes_with_self_loops(self):
        A = flocking(path_edges(3), 3, self_loops=True)
        assert np.allclose(A.entries[0], [0.5, 0.5, 0.0])
        assert np.allclose(A.entries[1], [1 / 3, 1 / 3, 1 / 3])

    def test_degree_times_matrix_recovers_adjacency(self):
        A = family_matrix("flocking-random", 16, p=0.4, seed=9)
        structure = A.flocking
        rebuilt = structure.degrees[:, None] * A.entries
        assert np.allclose(rebuilt, structure.adjacency, rtol=1e-15, atol=0.0)

    def test_asymmetric_edge_list_rejected(self):
        with pytest.raises(errors.AsymmetricEdgeList) as info:
            flocking([(0, 1), (1, 0), (1, 2)], 3)
        assert (1, 2) in info.value.missing

    def test_disconnected_rejected(self):
        edges = [(0, 1), (1, 0), (2, 3), (3, 2)]
        with pytest.raises(errors.DisconnectedGraph):
            flocking(edges, 4, self_loops=True)

    def test_zero_degree_rejected(self):
        with pytest.raises(errors.ZeroDegreeNode):
            flocking([], 3, self_loops=False)

    def test_out_of_range_edge_rejected(self):
        with pytest.raises(errors.UsageError):
            flocking([(0, 9), (9, 0)], 3)


class TestRandomFlocking:
    def test_deterministic_under_seed(self):
        A = random_flocking(32, 0.2, 7)
        B = random_flocking(32, 0.2, 7)
        assert np.array_equal(A.entries, B.entries)

    def test_p_one_gives_complete_with_self_loops(self):
        A = random_flocking(8, 1.0, 0)
        assert np.array_equal(A.flocking.adjacency, np.ones((8, 8)))
        assert np.allclose(A.entries, 1.0 / 8)

    def test_adjacency_symmetric(self):
        A = random_flocking(32, 0.2, 7)
        adj = A.flocking.adjacency
        assert np.array_equal(adj, adj.T)

    def test_connected_and_primitive(self):
        A = random_flocking(32, 0.2, 42)
        assert is_primitive(A)

    def test_retries_exhausted_for_tiny_p(self):
        with pytest.raises(errors.RetriesExhausted):
            random_flocking(24, 1e-6, 0)

    def test_invalid_p_rejected(self):
        with pytest.raises(errors.UsageError):
            random_flocking(8, 0.0, 0)


class TestDescriptor:
    def test_config_line_round_trip(self):
        desc = TopologyDescriptor(kind="flocking", n=32, p=0.2, seed=7, self_loops=True)
        line = desc.config_line()
        assert line == "kind=flocking n=32 p=0.2 seed=7 self_loops=true"
        assert TopologyDescriptor.parse(line) == desc

    def test_simple_kind_round_trip(self):
        desc = TopologyDescriptor(kind="star", n=8)
        assert TopologyDescriptor.parse(desc.config_line()) == desc

    def test_parse_rejects_unknown_keys(self):
        with pytest.raises(errors.UsageError):
            TopologyDescriptor.parse("kind=star n=8 color=red")

    def test_provenance_recorded_on_generate(self):
        A = generate(TopologyDescriptor(kind="cycle", n=6))
        assert A.provenance == "kind=cycle n=6"

    def test_unknown_family_rejected(self):
        with pytest.raises(errors.UsageError):
            family_matrix("moebius", 8)
