import itertools
import math

import numpy as np
import pytest

from codevo.infotheory import (
    JointTable,
    Variable,
    conditional_mutual_information,
    entropy,
    marginalize,
    mutual_information,
)
from codevo.model import (
    GRID_TYPES,
    MU,
    THETA,
    THETA_P,
    X,
    X_P,
    Y,
    Y_P,
    Agent,
    AgentType,
    Code,
    EnvironmentSpec,
    SensorSpec,
    PopulationModel,
    agent_env_info,
    agent_output_info,
    blind_info,
    build_joint,
    code_similarity,
    env_info_pair,
    factored_sensor,
    grid_structure,
    own_sensor_info,
    relabel_outputs,
    side_information,
    similarity_bound,
    symmetric_sensor,
    type_sensor,
    well_mixed_structure,
)

from conftest import random_model, two_listener_model


def hb(p):
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


class TestStructures:
    def test_well_mixed(self):
        np.testing.assert_array_equal(well_mixed_structure(25).pair_probabilities, np.full((25, 25), 1 / 625))
        assert well_mixed_structure(1).pair_probabilities.tolist() == [[1.0]]
        np.testing.assert_array_equal(well_mixed_structure(2).pair_probabilities, np.full((2, 2), 0.25))
        with pytest.raises(ValueError):
            well_mixed_structure(0)

    def test_grid_5x5(self):
        s = grid_structure(5, 5)
        assert s.support_size == 105
        np.testing.assert_allclose(s.pair_probabilities[s.pair_probabilities > 0], 1 / 105)
        np.testing.assert_array_equal(s.pair_probabilities, s.pair_probabilities.T)

    def test_grid_3x3_edge_count(self):
        # explicit enumeration of 4-neighbour ordered pairs
        cells = [(r, c) for r in range(3) for c in range(3)]
        ordered = sum(1 for a, b in itertools.product(cells, cells)
                      if abs(a[0] - b[0]) + abs(a[1] - b[1]) == 1)
        assert ordered == 24
        s = grid_structure(3, 3)
        assert s.support_size == ordered + 9 == 33
        np.testing.assert_allclose(s.pair_probabilities[s.pair_probabilities > 0], 1 / 33)

    def test_grid_degenerate(self):
        assert grid_structure(1, 1).pair_probabilities.tolist() == [[1.0]]
        with pytest.raises(ValueError):
            grid_structure(0, 3)


class TestSensors:
    def test_type_phi2(self):
        env = EnvironmentSpec.uniform(9)
        t = type_sensor(GRID_TYPES[1], env).table
        inside = [s + 1 for s in range(9) if t[s, 0] == 1.0]
        assert inside == [1, 2, 4, 5]
        np.testing.assert_array_equal(t[:, 0] + t[:, 1], 1.0)

    def test_blind(self):
        t = type_sensor(GRID_TYPES[0], EnvironmentSpec.uniform(9)).table
        np.testing.assert_array_equal(t, np.full((9, 2), 0.5))

    def test_region_centre_only(self):
        env = EnvironmentSpec.uniform(9)
        s = type_sensor(AgentType("c", frozenset({5})), env)
        j = JointTable((Variable("mu", 9), Variable("y", 2)), env.distribution[:, None] * s.table)
        # two-column marginal is (1/9, 8/9)
        assert mutual_information(j, "mu", "y") == pytest.approx(hb(1 / 9), abs=1e-12)
        assert mutual_information(j, "mu", "y") == pytest.approx(0.503258, abs=1e-6)

    def test_full_region_rejected(self):
        with pytest.raises(ValueError, match="every state"):
            type_sensor(AgentType("all", frozenset(range(1, 10))), EnvironmentSpec.uniform(9))

    def test_factored_sensor_layout(self):
        t = factored_sensor(2, 0.01).table
        assert t.shape == (4, 4)
        np.testing.assert_allclose(np.diag(t), 0.99**2)
        assert t[0, 3] == pytest.approx(0.01**2)
        np.testing.assert_allclose(t.sum(axis=1), 1.0)

    def test_noise_range(self):
        with pytest.raises(ValueError):
            symmetric_sensor(2, 1.0)


class TestTwoListenerExample:
    def test_matching_codes(self):
        m = two_listener_model(opposite=False)
        assert env_info_pair(m) == pytest.approx(0.97872, abs=1e-5)

    def test_opposite_codes(self):
        m = two_listener_model(opposite=True)
        assert env_info_pair(m) == pytest.approx(0.919207, abs=1e-6)
        assert side_information(m) == pytest.approx(0.0, abs=1e-9)

    def test_joint_route_agrees(self):
        for opposite in (False, True):
            m = two_listener_model(opposite)
            j = build_joint(m)
            np.testing.assert_allclose(marginalize(j, MU).probabilities, [0.5, 0.5], atol=1e-12)
            assert mutual_information(j, MU, (Y, X_P)) == pytest.approx(env_info_pair(m), abs=1e-12)

    def test_chain_identity(self):
        j = build_joint(two_listener_model(opposite=False))
        total = mutual_information(j, MU, (Y, X_P))
        own = mutual_information(j, MU, Y)
        side = conditional_mutual_information(j, MU, X_P, Y)
        assert own == pytest.approx(0.91921, abs=1e-5)
        # 0.97872 - 0.91921 from the rounded values
        assert side == pytest.approx(0.05951, abs=2e-5)
        assert total == pytest.approx(own + side, abs=1e-12)


class TestBuildJoint:
    def test_single_agent_identity(self):
        m = PopulationModel.from_arrays([0.5, 0.5], np.eye(2), np.eye(2)[None], [[1.0]])
        j = build_joint(m)
        assert np.count_nonzero(j.probabilities) == 2
        np.testing.assert_allclose(j.probabilities[j.probabilities > 0], 0.5)

    def test_marginal_consistency_random(self, rng):
        for _ in range(50):
            m = random_model(rng)
            j = build_joint(m)
            p = j.probabilities  # theta, theta', mu, y, y', x, x'
            np.testing.assert_allclose(p.sum(axis=(2, 3, 4, 5, 6)), m.structure.pair_probabilities, atol=1e-9)
            np.testing.assert_allclose(p.sum(axis=(0, 1, 3, 4, 5, 6)), m.environment.distribution, atol=1e-9)
            p_tmy = p.sum(axis=(1, 4, 5, 6))
            p_tm = p_tmy.sum(-1, keepdims=True)
            mask = p_tm[..., 0] > 1e-12
            np.testing.assert_allclose((p_tmy / np.where(p_tm > 0, p_tm, 1))[mask], m.sensors[mask], atol=1e-9)
            p_tyx = p.sum(axis=(1, 2, 4, 6))
            p_ty = p_tyx.sum(-1, keepdims=True)
            mask = p_ty[..., 0] > 1e-12
            np.testing.assert_allclose((p_tyx / np.where(p_ty > 0, p_ty, 1))[mask], m.codes[mask], atol=1e-9)

    def test_factorized_objectives_match_joint(self, rng):
        for _ in range(50):
            m = random_model(rng)
            j = build_joint(m)
            assert code_similarity(m) == pytest.approx(mutual_information(j, X, X_P), abs=1e-10)
            assert similarity_bound(m) == pytest.approx(mutual_information(j, Y, Y_P), abs=1e-10)
            assert env_info_pair(m) == pytest.approx(mutual_information(j, MU, (Y, X_P)), abs=1e-10)
            assert blind_info(m) == pytest.approx(mutual_information(j, MU, (X, X_P)), abs=1e-10)
            assert side_information(m) == pytest.approx(
                conditional_mutual_information(j, MU, X_P, Y), abs=1e-10)

    def test_dimension_mismatch_names_agent(self):
        env = EnvironmentSpec.uniform(2)
        good = Agent(SensorSpec(np.eye(2)), Code(np.eye(2)))
        bad = Agent(SensorSpec(np.eye(2)), Code(np.full((2, 3), 1 / 3)))
        with pytest.raises(ValueError, match="agent 1"):
            PopulationModel(env, (good, bad), well_mixed_structure(2))
        with pytest.raises(ValueError, match="structure"):
            PopulationModel.from_arrays([0.5, 0.5], np.eye(2), [np.eye(2)], well_mixed_structure(2))


def noiseless_pair(codes):
    return PopulationModel.from_arrays([0.5, 0.5], np.eye(2), codes, well_mixed_structure(len(codes)))


class TestObjectives:
    def test_identical_codes_one_bit(self):
        m = noiseless_pair([np.eye(2), np.eye(2)])
        assert code_similarity(m) == pytest.approx(1.0, abs=1e-12)
        assert similarity_bound(m) == pytest.approx(1.0, abs=1e-12)

    def test_opposite_codes_zero(self):
        m = noiseless_pair([np.eye(2), np.eye(2)[::-1]])
        # exhaustive enumeration of (theta, theta', mu) -> (x, x')
        pxx = np.zeros((2, 2))
        codes = [np.eye(2), np.eye(2)[::-1]]
        for t, tp, mu in itertools.product(range(2), range(2), range(2)):
            pxx[codes[t][mu].argmax(), codes[tp][mu].argmax()] += 1 / 8
        np.testing.assert_allclose(pxx, 0.25)
        assert code_similarity(m) == pytest.approx(0.0, abs=1e-12)

    def test_constant_codes(self):
        m = noiseless_pair([[[1, 0], [1, 0]], [[1, 0], [1, 0]]])
        assert code_similarity(m) == 0.0
        assert blind_info(m) == 0.0

    def test_blind_population_bound(self):
        env = EnvironmentSpec.uniform(9)
        s = type_sensor(GRID_TYPES[0], env).table
        m = PopulationModel.from_arrays(env.distribution, s, np.tile(np.eye(2), (3, 1, 1)), well_mixed_structure(3))
        assert similarity_bound(m) == pytest.approx(0.0, abs=1e-12)

    def test_scenario_one_bound(self):
        m = PopulationModel.from_arrays(np.full(4, 0.25), factored_sensor(2, 0.01).table,
                                        np.tile(np.eye(4), (25, 1, 1)), well_mixed_structure(25))
        # two independent binary components, each BSC∘BSC with crossover 2ε(1-ε)
        c = 2 * 0.01 * 0.99
        assert similarity_bound(m) == pytest.approx(2 * (1 - hb(c)), abs=1e-12)
        assert similarity_bound(m) == pytest.approx(1.71936, abs=1e-5)
        assert code_similarity(m) == pytest.approx(similarity_bound(m), abs=1e-12)

    def test_noiseless_env_info_pair(self, rng):
        codes = rng.dirichlet(np.ones(3), size=(3, 2))
        m = PopulationModel.from_arrays([0.5, 0.5], np.eye(2), codes, well_mixed_structure(3))
        assert env_info_pair(m) == pytest.approx(1.0, abs=1e-12)

    def test_agent_info(self):
        env = EnvironmentSpec.uniform(9)
        sensors = [type_sensor(t, env).table for t in GRID_TYPES]
        m = PopulationModel.from_arrays(env.distribution, sensors, np.tile(np.eye(2), (5, 1, 1)),
                                        well_mixed_structure(5))
        assert agent_env_info(m, 0) == 0.0
        assert agent_output_info(m, 0) == 0.0
        for i in range(1, 5):
            assert agent_env_info(m, i) == pytest.approx(0.991076, abs=1e-6)
            assert agent_output_info(m, i) == pytest.approx(0.991076, abs=1e-6)
        with pytest.raises(IndexError):
            agent_env_info(m, 5)

    def test_constant_code_agent_info(self):
        m = PopulationModel.from_arrays([0.5, 0.5], np.eye(2), [[[1, 0], [1, 0]]], [[1.0]])
        assert agent_env_info(m, 0) == pytest.approx(1.0)
        assert agent_output_info(m, 0) == 0.0


class TestInvariants:
    def test_data_processing(self, rng):
        # X' sees mu only through (Y', theta')
        for _ in range(200):
            m = random_model(rng)
            j = build_joint(m)
            assert mutual_information(j, MU, X_P) <= mutual_information(j, MU, (Y_P, THETA_P)) + 1e-9

    def test_data_processing_shared_codes(self, rng):
        for _ in range(200):
            m = random_model(rng)
            m = m.with_codes(np.broadcast_to(m.codes[0], m.codes.shape))
            j = build_joint(m)
            assert mutual_information(j, MU, X_P) <= mutual_information(j, MU, Y_P) + 1e-9

    def test_agent_identity_can_beat_pooled_sensor(self):
        # opposite sensors, opposite codes: pooled Y' is useless, X' is not
        sensors = [np.eye(2), np.eye(2)[::-1]]
        codes = [np.eye(2), np.eye(2)[::-1]]
        m = PopulationModel.from_arrays([0.5, 0.5], sensors, codes, well_mixed_structure(2))
        j = build_joint(m)
        assert mutual_information(j, MU, Y_P) == pytest.approx(0.0, abs=1e-12)
        assert mutual_information(j, MU, X_P) == pytest.approx(1.0, abs=1e-12)

    def test_similarity_bounded_well_mixed(self, rng):
        for _ in range(200):
            m = random_model(rng, shared_sensor=True, well_mixed=True)
            assert code_similarity(m) <= similarity_bound(m) + 1e-9

    def test_side_information_decomposition(self, rng):
        for _ in range(200):
            m = random_model(rng)
            assert env_info_pair(m) == pytest.approx(own_sensor_info(m) + side_information(m), abs=1e-9)

    def test_output_relabelling(self, rng):
        for _ in range(100):
            m = random_model(rng, nx=int(rng.integers(2, 5)))
            r = relabel_outputs(m, rng.permutation(m.output_states))
            assert code_similarity(r) == pytest.approx(code_similarity(m), abs=1e-12)
            assert env_info_pair(r) == pytest.approx(env_info_pair(m), abs=1e-12)
            assert blind_info(r) == pytest.approx(blind_info(m), abs=1e-12)

    def test_environment_entropy_nine_states(self):
        j = JointTable.uniform((Variable(MU, 9),))
        assert entropy(j, MU) == pytest.approx(3.16993, abs=1e-5)
