import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from codevo.analysis import (
    DistanceMatrix,
    classical_mds,
    code_distance,
    concept_table,
    connected_components,
    distance_matrix,
    group_codes,
    structure_graph,
)
from codevo.infotheory import jensen_shannon_divergence
from codevo.model import (
    GRID_TYPES,
    EnvironmentSpec,
    PopulationModel,
    grid_structure,
    type_sensor,
    well_mixed_structure,
)

from conftest import random_model

IDENTITY = np.eye(2)
SWAP = np.eye(2)[::-1]
UNIFORM = np.full((2, 2), 0.5)


def pairwise(points):
    diff = points[:, None, :] - points[None, :, :]
    return np.sqrt((diff**2).sum(-1))


class TestCodeDistance:
    def test_identical(self):
        assert code_distance(IDENTITY, IDENTITY) == 0.0

    def test_disjoint_rows(self):
        assert code_distance(IDENTITY, SWAP) == pytest.approx(1.0, abs=1e-12)

    def test_identity_vs_uniform(self):
        # every row pair is JSD(point mass, uniform)
        per_row = jensen_shannon_divergence([1.0, 0.0], [0.5, 0.5])
        assert code_distance(IDENTITY, UNIFORM) == pytest.approx(math.sqrt(per_row), abs=1e-12)
        assert code_distance(IDENTITY, UNIFORM) == pytest.approx(0.557923, abs=1e-6)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError, match="shape"):
            code_distance(IDENTITY, np.full((2, 3), 1 / 3))

    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(1, 4), st.integers(2, 5))
    def test_metric(self, seed, ny, nx):
        rng = np.random.default_rng(seed)
        a, b, c = rng.dirichlet(np.full(nx, 0.4), size=(3, ny))
        assert code_distance(a, b) == code_distance(b, a)
        assert code_distance(a, c) <= code_distance(a, b) + code_distance(b, c) + 1e-9
        assert 0 <= code_distance(a, b) <= 1


class TestDistanceMatrix:
    def test_identical_codes(self):
        assert not distance_matrix([IDENTITY] * 4).values.any()

    def test_two_codes(self):
        np.testing.assert_allclose(distance_matrix([IDENTITY, SWAP]).values, [[0, 1], [1, 0]], atol=1e-12)

    def test_matches_pairwise_and_triangle(self, rng):
        codes = rng.dirichlet(np.ones(3), size=(8, 2))
        d = distance_matrix(codes).values
        for i in range(8):
            for j in range(8):
                assert d[i, j] == pytest.approx(code_distance(codes[i], codes[j]), abs=1e-12)
                for k in range(8):
                    assert d[i, k] <= d[i, j] + d[j, k] + 1e-9
        np.testing.assert_array_equal(d, d.T)

    def test_shape_mismatch_names_index(self):
        with pytest.raises(ValueError, match="code 2"):
            distance_matrix([IDENTITY, IDENTITY, np.full((2, 3), 1 / 3)])


class TestMds:
    def test_two_points(self):
        y = classical_mds(DistanceMatrix(("a", "b"), np.array([[0, 0.7], [0.7, 0]])))
        assert np.linalg.norm(y[0] - y[1]) == pytest.approx(0.7, abs=1e-12)

    def test_equilateral(self):
        d = 1 - np.eye(3)
        y = classical_mds(d)
        np.testing.assert_allclose(pairwise(y), d, atol=1e-9)
        np.testing.assert_allclose(y.mean(axis=0), 0, atol=1e-12)

    def test_planar_recovery(self, rng):
        for _ in range(50):
            pts = rng.normal(size=(int(rng.integers(3, 30)), 2))
            d = pairwise(pts)
            np.testing.assert_allclose(pairwise(classical_mds(d)), d, atol=1e-9)

    def test_collinear_gives_zero_column(self):
        pts = np.array([[0.0, 0.0], [1.0, 0.0], [3.0, 0.0]])
        y = classical_mds(pairwise(pts))
        np.testing.assert_allclose(y[:, 1], 0.0, atol=1e-7)
        np.testing.assert_allclose(pairwise(y), pairwise(pts), atol=1e-9)

    def test_single_point(self):
        assert classical_mds(np.zeros((1, 1))).tolist() == [[0.0, 0.0]]

    def test_orientation_canonical(self, rng):
        pts = rng.normal(size=(6, 2))
        y = classical_mds(pairwise(pts))
        for k in range(2):
            assert y[np.argmax(np.abs(y[:, k])), k] > 0


class TestGroupCodes:
    def test_all_identical(self):
        clusters = group_codes([IDENTITY] * 5)
        assert len(clusters) == 1 and clusters[0].count == 5

    def test_two_families(self, rng):
        codes = [IDENTITY] * 3 + [SWAP] * 4
        codes = [c + rng.normal(scale=1e-6, size=c.shape) * 0 for c in codes]
        clusters = group_codes(codes)
        assert [c.count for c in clusters] == [4, 3]
        assert clusters[0].members == (3, 4, 5, 6)
        np.testing.assert_allclose(clusters[0].representative, SWAP)

    def test_partition_at_zero_tolerance(self, rng):
        base = rng.dirichlet(np.ones(3), size=(4, 2))
        picks = rng.integers(0, 4, size=12)
        clusters = group_codes([base[i] for i in picks], 0.0)
        members = sorted(m for c in clusters for m in c.members)
        assert members == list(range(12))
        assert len(clusters) == len(set(picks.tolist()))

    def test_audit_of_clusters(self, rng):
        codes = rng.dirichlet(np.full(3, 0.2), size=(15, 2))
        tol = 0.3
        clusters = group_codes(codes, tol)
        d = distance_matrix(codes).values
        label = {m: k for k, c in enumerate(clusters) for m in c.members}
        # codes within tolerance always share a cluster
        for i in range(15):
            for j in range(15):
                if d[i, j] <= tol:
                    assert label[i] == label[j]

    def test_negative_tolerance(self):
        with pytest.raises(ValueError):
            group_codes([IDENTITY], -1.0)


def hetero_model(codes):
    env = EnvironmentSpec.uniform(9)
    sensors = [type_sensor(t, env).table for t in GRID_TYPES]
    return PopulationModel.from_arrays(env.distribution, sensors, codes, well_mixed_structure(5), GRID_TYPES)


class TestConcepts:
    def test_constant_codes_give_prior(self):
        codes = np.zeros((5, 2, 3))
        codes[:, :, 1] = 1.0
        table = concept_table(hetero_model(codes))
        assert table.pairs == ((1, 1),)
        np.testing.assert_allclose(table.pair_posterior[0], np.full(9, 1 / 9))

    def test_centre_state_concept(self):
        # phi2 inside -> symbol 0, phi5 inside -> symbol 1, everything else -> symbol 2
        codes = np.zeros((5, 2, 3))
        codes[:, :, 2] = 1.0
        codes[1, 0] = [1, 0, 0]
        codes[4, 0] = [0, 1, 0]
        table = concept_table(hetero_model(codes))
        np.testing.assert_allclose(table.posterior(0, 1), np.eye(9)[4], atol=1e-12)
        assert table.best_pair_for(4) == ((0, 1), pytest.approx(1.0))

    def test_rows_normalized_and_symmetric(self, rng):
        for _ in range(20):
            m = random_model(rng, well_mixed=True, nx=3)
            table = concept_table(m)
            np.testing.assert_allclose(table.pair_posterior.sum(axis=1), 1.0, atol=1e-9)
            assert table.pair_marginal.sum() == pytest.approx(1.0, abs=1e-9)
            for (x, xp) in table.pairs:
                np.testing.assert_allclose(table.posterior(x, xp), table.posterior(xp, x), atol=1e-9)

    def test_absent_pairs_not_fabricated(self):
        codes = np.zeros((5, 2, 3))
        codes[:, :, 0] = 1.0
        table = concept_table(hetero_model(codes))
        assert table.posterior(2, 2) is None


class TestStructureGraph:
    def test_well_mixed_complete(self):
        g = structure_graph(well_mixed_structure(3))
        assert len(g.links) == 3 and len(g.self_loops) == 3
        assert len({w for _, _, w in g.links}) == 1
        assert len(connected_components(g)) == 1

    def test_grid_edges(self):
        g = structure_graph(grid_structure(5, 5))
        # 5 rows x 4 horizontal + 5 columns x 4 vertical
        assert len(g.links) == 2 * 5 * 4 == 40
        assert len(g.self_loops) == 25

    def test_isolated_node(self):
        p = np.zeros((3, 3))
        p[:2, :2] = 0.25
        g = structure_graph(p)
        assert g.isolated == (2,)
        assert connected_components(g) == [{0, 1}, {2}]

    def test_threshold(self):
        p = np.array([[0.5, 1e-6], [1e-6, 0.5 - 2e-6]])
        assert len(structure_graph(p, 1e-3).links) == 0


class TestComponents:
    def test_empty_edges(self):
        assert connected_components([], 4) == [{0}, {1}, {2}, {3}]

    def test_two_cliques(self):
        edges = [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0), (3, 4, 1.0), (3, 3, 1.0)]
        assert connected_components(edges, 5) == [{0, 1, 2}, {3, 4}]

    def test_self_loops_ignored(self):
        assert connected_components([(0, 0, 1.0), (1, 1, 1.0)], 2) == [{0}, {1}]
