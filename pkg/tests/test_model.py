import numpy as np
import pytest

from nast.model import (
    AssumptionReport,
    CommunityLabels,
    ConnectivityModel,
    GeneratorConfig,
    MultiLayerNetwork,
    check_assumptions,
    generate_msbm,
    make_experiment_connectivity,
    misclustering_error,
)


def conn(K, L, B):
    return ConnectivityModel(K=K, L=L, B=[np.array(B, dtype=float) for _ in range(L)])


class TestGenerate:
    def test_probability_one_gives_complete_graph(self):
        cfg = GeneratorConfig(n=3, L=1, K=1, connectivity=conn(1, 1, [[1.0]]), seed=0)
        net, labels = generate_msbm(cfg)
        expected = np.ones((3, 3), dtype=np.uint8) - np.eye(3, dtype=np.uint8)
        assert np.array_equal(net.layers[0], expected)
        assert (labels.labels == 1).all()

    def test_probability_zero_gives_empty_graphs(self):
        cfg = GeneratorConfig(n=5, L=2, K=1, connectivity=conn(1, 2, [[0.0]]), seed=1)
        net, _ = generate_msbm(cfg)
        assert all(A.sum() == 0 for A in net.layers)

    def test_within_block_edge_frequency(self):
        # Monte Carlo frequency oracle: pooled within-community edge rate
        # over 200 replicates stays within 3 binomial SE of 0.7.
        B = [[0.7, 0.3], [0.3, 0.7]]
        edges = 0
        pairs = 0
        for rep in range(200):
            cfg = GeneratorConfig(n=200, L=1, K=2, connectivity=conn(2, 1, B), seed=rep)
            net, labels = generate_msbm(cfg)
            same = labels.labels[:, None] == labels.labels[None, :]
            iu = np.triu_indices(200, 1)
            mask = same[iu]
            edges += int(net.layers[0][iu][mask].sum())
            pairs += int(mask.sum())
        freq = edges / pairs
        se = np.sqrt(0.7 * 0.3 / pairs)
        assert abs(freq - 0.7) <= 3 * se

    def test_invariants_and_determinism(self):
        cfg = GeneratorConfig(n=40, L=3, K=3, connectivity="exp1", seed=11)
        net, labels = generate_msbm(cfg)
        for A in net.layers:
            assert np.array_equal(A, A.T)
            assert not np.diagonal(A).any()
            assert set(np.unique(A)) <= {0, 1}
        assert labels.labels.min() >= 1 and labels.labels.max() <= 3
        net2, labels2 = generate_msbm(cfg)
        assert all(np.array_equal(a, b) for a, b in zip(net.layers, net2.layers))
        assert np.array_equal(labels.labels, labels2.labels)
        net3, _ = generate_msbm(
            GeneratorConfig(n=40, L=3, K=3, connectivity="exp1", seed=12)
        )
        assert any(not np.array_equal(a, b) for a, b in zip(net.layers, net3.layers))

    def test_explicit_membership(self):
        theta = np.array([1, 1, 2, 2, 2])
        cfg = GeneratorConfig(
            n=5, L=1, K=2, connectivity=conn(2, 1, [[1.0, 0.0], [0.0, 1.0]]),
            seed=0, membership=theta,
        )
        net, labels = generate_msbm(cfg)
        assert np.array_equal(labels.labels, theta)
        A = net.layers[0]
        assert A[0, 1] == 1 and A[2, 3] == 1 and A[0, 2] == 0

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError):
            GeneratorConfig(n=5, L=1, K=2, connectivity=conn(3, 1, np.eye(3)), seed=0)
        with pytest.raises(ValueError):
            GeneratorConfig(n=1, L=1, K=2, connectivity=conn(2, 1, np.eye(2)), seed=0)

    def test_bad_probability_rejected(self):
        with pytest.raises(ValueError):
            conn(1, 1, [[1.5]])
        with pytest.raises(ValueError):
            conn(1, 1, [[-0.1]])


class TestRecipes:
    def test_exp1_ranges(self):
        model = make_experiment_connectivity("exp1", K=2, L=5, seed=3)
        for B in model.B:
            diag = np.diagonal(B)
            off = B[~np.eye(2, dtype=bool)]
            assert ((diag >= 0.65) & (diag <= 0.75)).all()
            assert ((off >= 0.25) & (off <= 0.35)).all()
        assert model.delta == 0.25

    def test_exp2or3_forced_epsilon(self):
        model = make_experiment_connectivity(
            "exp2or3", K=3, L=2, rho=0.5, seed=0, epsilons=[0.0, 0.0]
        )
        for B in model.B:
            assert np.allclose(np.diagonal(B), 0.35)
            assert np.allclose(B[~np.eye(3, dtype=bool)], 0.15)

    def test_exp2or3_sparse_range(self):
        model = make_experiment_connectivity("exp2or3", K=5, L=10, rho=0.01, seed=4)
        for B in model.B:
            assert B.min() >= 0.002 - 1e-12
            assert B.max() <= 0.008 + 1e-12

    def test_exp2or3_requires_valid_rho(self):
        with pytest.raises(ValueError):
            make_experiment_connectivity("exp2or3", K=2, L=1, rho=1.3, seed=0)
        with pytest.raises(ValueError):
            make_experiment_connectivity("exp2or3", K=2, L=1, seed=0)

    def test_unknown_recipe(self):
        with pytest.raises(ValueError):
            make_experiment_connectivity("exp9", K=2, L=1, rho=0.5, seed=0)

    def test_recipes_deterministic(self):
        a = make_experiment_connectivity("exp1", K=3, L=4, seed=9)
        b = make_experiment_connectivity("exp1", K=3, L=4, seed=9)
        assert all(np.array_equal(x, y) for x, y in zip(a.B, b.B))


class TestMisclustering:
    def test_identity(self):
        a = CommunityLabels(np.array([1, 1, 2, 2]), 2)
        assert misclustering_error(a, a).m == 0

    def test_label_swap(self):
        a = CommunityLabels(np.array([1, 1, 2, 2]), 2)
        b = CommunityLabels(np.array([2, 2, 1, 1]), 2)
        assert misclustering_error(a, b).m == 0

    def test_three_block_example(self):
        # brute force over all 3! permutations gives 2
        a = CommunityLabels(np.array([1, 1, 2, 2, 3]), 3)
        b = CommunityLabels(np.array([1, 2, 2, 3, 3]), 3)
        assert misclustering_error(a, b).m == 2

    def test_relabel_invariance(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            K = int(rng.integers(2, 6))
            a = CommunityLabels(rng.integers(1, K + 1, size=30), K)
            b = CommunityLabels(rng.integers(1, K + 1, size=30), K)
            m = misclustering_error(a, b).m
            perm = rng.permutation(K) + 1
            a_perm = CommunityLabels(perm[a.labels - 1], K)
            assert misclustering_error(a_perm, b).m == m
            assert misclustering_error(b, a).m == m

    def test_assignment_matches_brute_force(self):
        # K=9 exercises the assignment branch; brute force is the oracle
        from itertools import permutations

        rng = np.random.default_rng(8)
        a = CommunityLabels(rng.integers(1, 10, size=60), 9)
        b = CommunityLabels(rng.integers(1, 10, size=60), 9)
        C = np.zeros((9, 9), dtype=int)
        np.add.at(C, (a.labels - 1, b.labels - 1), 1)
        best = max(C[np.arange(9), perm].sum() for perm in permutations(range(9)))
        assert misclustering_error(a, b).m == 60 - best

    def test_unequal_label_spaces(self):
        a = CommunityLabels(np.array([1, 1, 2, 2, 3, 3]), 3)
        b = CommunityLabels(np.array([1, 1, 1, 1, 2, 2]), 2)
        report = misclustering_error(a, b)
        assert report.m == 2
        assert len(report.mapping) == 2

    def test_length_mismatch(self):
        a = CommunityLabels(np.array([1, 2]), 2)
        b = CommunityLabels(np.array([1, 2, 1]), 2)
        with pytest.raises(ValueError):
            misclustering_error(a, b)


class TestAssumptions:
    def test_delta_from_range(self):
        model = conn(2, 1, [[0.75, 0.25], [0.25, 0.75]])
        labels = CommunityLabels(np.array([1, 1, 2, 2]), 2)
        report = check_assumptions(model, labels)
        assert report.delta == pytest.approx(0.25)
        assert report.balance_ratio == pytest.approx(1.0)
        assert not report.warnings

    def test_boundary_entry_warns(self):
        model = conn(2, 1, [[0.5, 0.0], [0.0, 0.5]])
        labels = CommunityLabels(np.array([1, 2]), 2)
        with pytest.warns(UserWarning):
            report = check_assumptions(model, labels)
        assert report.delta == 0.0
        assert report.warnings

    def test_never_raises_on_empty_cluster(self):
        model = conn(2, 1, [[0.5, 0.4], [0.4, 0.5]])
        labels = CommunityLabels(np.array([1, 1, 1]), 2)
        with pytest.warns(UserWarning):
            report = check_assumptions(model, labels)
        assert isinstance(report, AssumptionReport)
        assert report.balance_ratio == 0.0


class TestTypes:
    def test_network_validation(self):
        A = np.zeros((3, 3), dtype=np.uint8)
        A[0, 1] = 1  # asymmetric
        with pytest.raises(ValueError):
            MultiLayerNetwork(n=3, L=1, layers=[A])
        B = np.zeros((3, 3), dtype=np.uint8)
        B[1, 1] = 1  # diagonal
        with pytest.raises(ValueError):
            MultiLayerNetwork(n=3, L=1, layers=[B])

    def test_labels_validation(self):
        with pytest.raises(ValueError):
            CommunityLabels(np.array([0, 1]), 2)
        with pytest.raises(ValueError):
            CommunityLabels(np.array([1, 3]), 2)
        labels = CommunityLabels(np.array([1, 1, 2]), 3)
        assert labels.sizes().tolist() == [2, 1, 0]
        assert labels.sizes().sum() == labels.n

    def test_delta_margin_enforced(self):
        with pytest.raises(ValueError):
            ConnectivityModel(K=1, L=1, B=[np.array([[0.1]])], delta=0.2)
