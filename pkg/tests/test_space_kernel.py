import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sisgraphon import (
    ConstantGraphonSpec,
    CounterexampleChainSpec,
    GeometricSpec,
    GraphonSpec,
    GraphSpec,
    KernelModel,
    MatrixSpec,
    SBMSpec,
    ValidationError,
    apply_T,
    build_kernel,
    degrees,
    is_connected,
    validate,
)
from sisgraphon.space_kernel import (
    DiscreteSpace,
    load_matrix_csv,
    load_vector_csv,
    save_matrix_csv,
    save_vector_csv,
)

from conftest import random_graphon


def half_circle(r):
    return (np.abs(r) <= np.pi / 2).astype(float)


def cut_connected(model):
    """Brute force over all cuts of the positive-mass atoms."""
    w = model.weights
    atoms = np.flatnonzero(w > 0)
    k = model.density
    for size in range(1, len(atoms)):
        for A in itertools.combinations(atoms, size):
            Ac = [j for j in atoms if j not in A]
            if sum(k[i, j] * w[i] * w[j] for i in A for j in Ac) <= 0:
                return False
    return True


class TestBuildKernel:
    def test_constant_graphon(self):
        m = build_kernel(ConstantGraphonSpec(p=0.5, n=4))
        np.testing.assert_allclose(m.kappa, np.full((4, 4), 0.125), rtol=0, atol=1e-15)

    def test_counterexample_chain(self):
        m = build_kernel(CounterexampleChainSpec(3))
        np.testing.assert_array_equal(m.kappa, [[0, 4, 0], [0, 0, 2], [0, 0, 0]])
        np.testing.assert_array_equal(m.gamma, 1.0)

    def test_matrix_embedding(self):
        K = [[1.0, 2.0], [3.0, 1.0]]
        m = build_kernel(MatrixSpec(K, [1, 1]))
        np.testing.assert_array_equal(m.kappa, K)

    def test_graphon_product_formula(self, rng):
        n = 5
        W = random_graphon(rng, n)
        beta, theta, mu = rng.uniform(0, 2, n), rng.uniform(0, 2, n), rng.dirichlet(np.ones(n))
        m = build_kernel(GraphonSpec(W, beta, theta, 1.0, mu))
        for i, j in itertools.product(range(n), repeat=2):
            assert m.kappa[i, j] == pytest.approx(beta[i] * W[i, j] * theta[j] * mu[j], rel=1e-15)

    def test_graph_variant(self):
        A = np.array([[0, 1, 1], [1, 0, 0], [1, 0, 0]])
        m = build_kernel(GraphSpec(A, beta=[1, 2, 3], theta=[4, 5, 6]))
        expected = np.array([[0, 5, 6], [8, 0, 0], [12, 0, 0]], dtype=float)
        np.testing.assert_array_equal(m.kappa, expected)

    def test_sbm_is_lajmanovich_yorke(self):
        m = build_kernel(SBMSpec([0.25, 0.75], [[1.0, 0.2], [0.2, 0.4]], beta=[1, 2], theta=[3, 1]))
        np.testing.assert_allclose(m.kappa, [[1 * 1.0 * 3 * 0.25, 1 * 0.2 * 1 * 0.75], [2 * 0.2 * 3 * 0.25, 2 * 0.4 * 1 * 0.75]])

    @pytest.mark.parametrize(
        "spec, msg",
        [
            (MatrixSpec([[1.0, -0.5], [0.0, 1.0]], [1, 1]), "negative transmission rate"),
            (MatrixSpec([[1.0]], [0.0]), "recovery rate not positive"),
            (GraphonSpec([[0.5, 0.1], [0.2, 0.5]]), "symmetric"),
            (GraphonSpec([[1.5, 0.1], [0.1, 0.5]]), r"\[0, 1\]"),
            (GraphonSpec([[0.5, 0.1], [0.1, 0.5]], beta=-1.0), "beta"),
            (GraphonSpec([[0.5, 0.1], [0.1, 0.5]], weights=[0.5, -0.5]), "negative atom weight"),
            (GraphSpec([[0, 2], [1, 0]]), "0 or 1"),
        ],
    )
    def test_rejects_invalid(self, spec, msg):
        with pytest.raises(ValidationError, match=msg):
            build_kernel(spec)

    def test_zero_mass_atom_density_flagged(self):
        m = build_kernel(GraphonSpec(np.full((3, 3), 0.5), weights=[0.5, 0.5, 0.0]))
        assert np.isnan(m.density[:, 2]).all()
        assert not m.density_defined[2]
        np.testing.assert_allclose(m.density[:, :2], 0.5)

    def test_model_is_immutable(self, two_by_two):
        with pytest.raises(ValueError):
            two_by_two.kappa[0, 0] = 5.0


class TestApplyT:
    def test_zero(self, two_by_two):
        np.testing.assert_array_equal(apply_T(two_by_two, [0, 0]), [0, 0])

    def test_constant_graphon(self):
        m = build_kernel(ConstantGraphonSpec(p=0.3, n=6))
        np.testing.assert_allclose(apply_T(m, np.full(6, 0.7)), 0.3 * 0.7, rtol=1e-14)

    def test_chain(self):
        m = build_kernel(CounterexampleChainSpec(3))
        np.testing.assert_array_equal(apply_T(m, [1, 1, 1]), [4, 2, 0])

    def test_dimension_mismatch(self, two_by_two):
        with pytest.raises(ValidationError):
            apply_T(two_by_two, [1, 2, 3])


class TestDegrees:
    def test_constant(self):
        rep = degrees(ConstantGraphonSpec(p=0.35, n=7))
        np.testing.assert_allclose(rep.degrees, 0.35, rtol=1e-14)
        assert rep.mean_degree == pytest.approx(0.35, rel=1e-14)

    @pytest.mark.parametrize("n", [6, 10, 42, 102])
    def test_geometric_half_circle(self, n):
        # n = 2 mod 4 keeps the indicator's edge off the grid of offsets
        rep = degrees(GeometricSpec(n, half_circle))
        np.testing.assert_allclose(rep.degrees, 0.5, rtol=0, atol=1e-15)

    def test_sbm_diagonal(self):
        rep = degrees(SBMSpec([0.5, 0.5], [[1.0, 0.0], [0.0, 1.0]]))
        np.testing.assert_allclose(rep.degrees, 0.5)
        assert rep.mean_degree == pytest.approx(0.5)

    def test_rejects_non_graphon(self):
        with pytest.raises(ValidationError):
            degrees(MatrixSpec([[1.0]], [1.0]))

    @settings(max_examples=50, deadline=None)
    @given(st.integers(1, 30), st.floats(0, 1), st.integers(0, 2**31))
    def test_constant_any_weights(self, n, p, seed):
        mu = np.random.default_rng(seed).dirichlet(np.ones(n))
        rep = degrees(ConstantGraphonSpec(p=p, n=n, weights=mu))
        np.testing.assert_allclose(rep.degrees, p, atol=1e-12)


class TestConnectivity:
    def test_positive(self, rng):
        m = KernelModel(DiscreteSpace(np.ones(4)), rng.uniform(0.1, 1, (4, 4)), np.ones(4))
        assert is_connected(m)

    def test_block_diagonal(self):
        K = np.zeros((4, 4))
        K[:2, :2] = 1
        K[2:, 2:] = 1
        assert not is_connected(build_kernel(MatrixSpec(K, np.ones(4))))

    @pytest.mark.parametrize("N", [2, 3, 10])
    def test_chain(self, N):
        assert not is_connected(build_kernel(CounterexampleChainSpec(N)))

    def test_zero_mass_atoms_ignored(self):
        W = np.array([[1.0, 0.0, 1.0], [0.0, 1.0, 1.0], [1.0, 1.0, 1.0]])
        assert is_connected(build_kernel(GraphonSpec(W, weights=[0.5, 0.5, 0.5])))
        assert not is_connected(build_kernel(GraphonSpec(W, weights=[0.5, 0.5, 0.0])))

    def test_matches_cut_definition(self, rng):
        for _ in range(150):
            n = int(rng.integers(1, 7))
            K = rng.uniform(0, 1, (n, n)) * (rng.uniform(0, 1, (n, n)) < 0.35)
            w = rng.uniform(0, 1, n) * (rng.uniform(0, 1, n) < 0.85)
            if w.sum() == 0:
                w[0] = 1.0
            m = KernelModel(DiscreteSpace(w), K, np.ones(n))
            assert is_connected(m) == cut_connected(m)

    def test_invariant_under_positive_rescaling(self, rng):
        for _ in range(50):
            n = 6
            K = rng.uniform(0, 1, (n, n)) * (rng.uniform(0, 1, (n, n)) < 0.3)
            m = KernelModel(DiscreteSpace(np.ones(n)), K, np.ones(n))
            scaled = m.with_kappa(K * rng.uniform(0.01, 100, (n, n)))
            assert is_connected(m) == is_connected(scaled)


class TestValidate:
    def test_pass(self):
        rep = validate(KernelModel(DiscreteSpace([1, 1]), [[0.0, 1.0], [1.0, 0.0]], [1, 1]))
        assert rep.ok and rep.errors == []
        assert rep.sup_row_sum == 1.0
        assert rep.gamma_min == rep.gamma_max == 1.0

    def test_zero_gamma(self):
        rep = validate(KernelModel(DiscreteSpace([1, 1]), np.eye(2), [1, 0]))
        assert not rep.ok
        assert "recovery rate not positive" in rep.errors

    def test_negative_kappa(self):
        rep = validate(KernelModel(DiscreteSpace([1, 1]), [[0, -0.1], [0, 0]], [1, 1]))
        assert "negative transmission rate" in rep.errors

    def test_reports_zero_mass(self):
        rep = validate(KernelModel(DiscreteSpace([1, 0, 1]), np.eye(3), np.ones(3)))
        assert rep.zero_mass_atoms == [1]


class TestProperties:
    def test_density_symmetry_relation(self, rng):
        n = 6
        W = random_graphon(rng, n)
        beta, theta, mu = rng.uniform(0.5, 2, n), rng.uniform(0.5, 2, n), rng.dirichlet(np.ones(n))
        kappa = build_kernel(GraphonSpec(W, beta, theta, 1.0, mu)).kappa
        for i, j in itertools.product(range(n), repeat=2):
            lhs = kappa[i, j] * (beta[j] * theta[i]) / (beta[i] * theta[j])
            assert lhs == pytest.approx(kappa[j, i] * mu[j] / mu[i], rel=1e-12)

    @pytest.mark.parametrize("N", [1, 2, 5, 17])
    def test_chain_nilpotent(self, N):
        kappa = build_kernel(CounterexampleChainSpec(N)).kappa
        assert not np.linalg.matrix_power(kappa, N).any()


class TestCsv:
    def test_round_trip(self, tmp_path, rng):
        K = rng.uniform(0, 3, (5, 5))
        g = rng.uniform(0.1, 2, 5)
        save_matrix_csv(tmp_path / "K.csv", K)
        save_vector_csv(tmp_path / "g.csv", g)
        np.testing.assert_array_equal(load_matrix_csv(tmp_path / "K.csv"), K)
        np.testing.assert_array_equal(load_vector_csv(tmp_path / "g.csv"), g)

    def test_single_entry(self, tmp_path):
        (tmp_path / "k.csv").write_text("2.5\n")
        assert load_matrix_csv(tmp_path / "k.csv").shape == (1, 1)

    def test_non_square(self, tmp_path):
        (tmp_path / "k.csv").write_text("1,2\n3,4\n5,6\n")
        with pytest.raises(ValidationError):
            load_matrix_csv(tmp_path / "k.csv")
