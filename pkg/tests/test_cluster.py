import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spopo import cluster as cl
from spopo import gaussian as g
from spopo.errors import DimensionMismatch, NoImprovementWarning, UnknownGraph, WrongAngleCount

FAST = cl.ESConfig(seed=3, max_generations=300, stagnation=60, max_restarts=1, reflections=(False,))


def p_squeezed(s, anti=None):
    """Uncorrelated modes with p-variances ``s`` (x-variances ``anti`` or 1/s)."""
    s = np.asarray(s, dtype=float)
    anti = 1 / s if anti is None else np.asarray(anti, dtype=float)
    return np.diag(np.concatenate([anti, s]))


def rearrangement_bound(V, s):
    """Smallest mean nullifier over all O for uncorrelated p-squeezed inputs.

    delta_i = sum_k (A O)_ik^2 s_k / (A^2)_ii with A = (I + V^2)^(1/2), so the
    mean is sum_k s_k o_k^T M o_k / N with M = A D^-1 A; its minimum pairs the
    largest s with the smallest eigenvalue of M.
    """
    w, Q = np.linalg.eigh(np.eye(len(V)) + V @ V)
    A = (Q * np.sqrt(w)) @ Q.T
    M = A @ np.diag(1 / np.diag(A @ A)) @ A
    return float(np.sort(s)[::-1] @ np.linalg.eigvalsh(M)) / len(V)


def test_library_examples():
    lin = cl.graph_library("linear4").adjacency
    assert np.array_equal(lin, np.diag([1, 1, 1], 1) + np.diag([1, 1, 1], -1))
    hexa = cl.graph_library("hexagon").adjacency
    assert np.all(hexa.sum(axis=1) == 2) and hexa[0, 5] == 1
    assert not cl.graph_library("linear1").adjacency.any()
    with pytest.raises(UnknownGraph):
        cl.graph_library("moebius")


def test_library_graph_shapes():
    degrees = {name: sorted(cl.graph_library(name).adjacency.sum(axis=1).astype(int)) for name in cl.TABLE_GRAPHS}
    assert degrees["maximally_connected_hexagon"] == [5] * 6
    assert degrees["prism"] == [3] * 6
    assert degrees["connected_hexagon"] == [3] * 6
    assert degrees["pentagonal_pyramid"] == [3, 3, 3, 3, 3, 5]
    assert degrees["double_square"] == [2, 2, 2, 2, 3, 3]
    assert cl.graph_library("T4").adjacency.sum() == 6
    for name in cl.graph_names():
        V = cl.graph_library(name).adjacency
        assert np.array_equal(V, V.T) and not np.diag(V).any()


def test_graph_json_round_trip(tmp_path):
    graph = cl.graph_library("prism")
    path = tmp_path / "g.json"
    path.write_text(json.dumps(graph.to_dict()))
    back = cl.load_graph(str(path))
    assert np.array_equal(back.adjacency, graph.adjacency)
    weighted = cl.ClusterGraph.from_dict({"name": "w", "n": 2, "edges": [[1, 2]], "weights": [0.5]})
    assert weighted.adjacency[0, 1] == 0.5
    with pytest.raises(DimensionMismatch):
        cl.ClusterGraph.from_dict({"n": 2, "edges": [[1, 3]]})


def test_canonical_unitary_examples():
    assert np.allclose(cl.canonical_unitary(np.zeros((3, 3))).unitary, np.eye(3))
    net = cl.canonical_unitary(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert np.allclose(net.X, np.eye(2) / np.sqrt(2))
    assert np.allclose(net.Y, np.array([[0, 1], [1, 0]]) / np.sqrt(2))


@pytest.mark.parametrize("name", cl.graph_names())
def test_canonical_unitary_invariants(name):
    V = cl.graph_library(name).adjacency
    U = cl.canonical_unitary(V)
    assert np.allclose(U.unitary @ U.unitary.conj().T, np.eye(len(V)), atol=1e-12)
    assert U.closure_defect(V) < 1e-12


@pytest.mark.parametrize("name", cl.TABLE_GRAPHS)
def test_orthogonal_freedom_preserves_closure(name):
    V = cl.graph_library(name).adjacency
    U0 = cl.canonical_unitary(V).unitary
    rng = np.random.default_rng(7)
    for _ in range(100):
        O = cl.orthogonal_from_angles(cl.AngleVector(rng.uniform(-np.pi, np.pi, 15), bool(rng.integers(2))), 6)
        assert cl.UnitaryNetwork(U0 @ O).closure_defect(V) < 1e-8


def test_orthogonal_from_angles_examples():
    assert np.array_equal(cl.orthogonal_from_angles(np.zeros(6), 4), np.eye(4))
    assert np.allclose(cl.orthogonal_from_angles([np.pi / 2], 2), [[0, -1], [1, 0]])
    with pytest.raises(WrongAngleCount):
        cl.orthogonal_from_angles(np.zeros(5), 4)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(2, 7), st.booleans())
def test_orthogonal_from_angles_properties(seed, n, refl):
    theta = np.random.default_rng(seed).uniform(-4, 4, cl.n_angles(n))
    O = cl.orthogonal_from_angles(cl.AngleVector(theta, refl), n)
    assert np.allclose(O @ O.T, np.eye(n), atol=1e-12)
    assert np.linalg.det(O) == pytest.approx(-1.0 if refl else 1.0, abs=1e-12)


def test_angles_wrapped():
    a = cl.AngleVector([np.pi, -np.pi, 3 * np.pi / 2])
    assert np.allclose(a.theta, [np.pi, np.pi, -np.pi / 2])


def test_delta_sqz_examples():
    assert np.array_equal(cl.delta_sqz(["p", "p"]), np.eye(2))
    assert np.array_equal(np.diag(cl.delta_sqz(list("xpxp"))), [1j, 1, 1j, 1])
    assert np.allclose(g.unitary_to_symplectic(cl.delta_sqz(["x"])), g.rotation(np.pi / 2))


@pytest.mark.parametrize("name", cl.graph_names())
def test_vacuum_baseline(name):
    V = cl.graph_library(name).adjacency
    rep = cl.nullifier_variances(np.eye(2 * len(V)), V)
    assert np.array_equal(rep.variances, np.ones(len(V)))
    assert not rep.passed


def test_nullifier_dimension_check():
    with pytest.raises(DimensionMismatch):
        cl.nullifier_variances(np.eye(4), cl.graph_library("linear3"))


def test_ideal_cluster_limit():
    V = cl.graph_library("linear6").adjacency
    U = cl.canonical_unitary(V).unitary
    S = g.unitary_to_symplectic(U)
    r = 10.0
    cov = S @ p_squeezed(np.full(6, np.exp(-2 * r))) @ S.T
    assert np.all(cl.nullifier_variances(cov, V).variances < 1e-6)


def test_build_cluster_covariance_identity_and_quadratures():
    cov = p_squeezed([0.3, 0.5])
    out, U_tot = cl.build_cluster_covariance(cov, np.eye(2), ["p", "p"], np.eye(2))
    assert np.allclose(out, cov) and np.allclose(U_tot, np.eye(2))
    # alternating supermodes become all p-squeezed after the phase matrix
    alt = np.diag([0.3, 4.0, 1 / 0.3, 0.25])
    out, _ = cl.build_cluster_covariance(alt, np.eye(2), ["x", "p"], np.eye(2))
    assert np.allclose(np.diag(out)[2:], [0.3, 0.25])


def test_cluster_pipeline_preserves_purity(rng):
    cov = g.random_covariance(5, rng)
    U_T = np.linalg.qr(rng.normal(size=(5, 5)))[0]
    U_V = cl.canonical_unitary(cl.graph_library("linear4")).unitary
    out_full, _ = cl.build_cluster_covariance(cov, U_T, list("xpxpx"), np.pad(U_V, ((0, 1), (0, 1))) + np.diag([0, 0, 0, 0, 1]))
    assert g.purity(out_full) == pytest.approx(g.purity(cov), abs=1e-10)


def test_permutation_equivariance_at_fixed_angles():
    rng = np.random.default_rng(5)
    graph = cl.graph_library("pentagonal_pyramid")
    inputs = p_squeezed(rng.uniform(0.2, 0.9, 6), rng.uniform(1.2, 4.0, 6))
    O = cl.orthogonal_from_angles(rng.uniform(-np.pi, np.pi, 15), 6)
    perm = rng.permutation(6)
    P = np.eye(6)[perm]

    def deltas(V, cov, O):
        S = g.unitary_to_symplectic(cl.canonical_unitary(V).unitary @ O)
        return cl.nullifier_variances(S @ cov @ S.T, V).variances

    base = deltas(graph.adjacency, inputs, O)
    P2 = np.kron(np.eye(2), P)
    moved = deltas(P @ graph.adjacency @ P.T, P2 @ inputs @ P2.T, P @ O @ P.T)
    assert np.allclose(moved, P @ base, atol=1e-12)


def test_empty_graph_reports_input_p_variances():
    s = [0.4, 0.6, 0.8]
    res = cl.optimize_cluster_basis(p_squeezed(s), cl.graph_library("empty3"), FAST)
    # any network mixes the inputs without changing the total
    assert res.report.mean == pytest.approx(np.mean(s), abs=1e-12)
    assert np.all(res.report.variances >= min(s) - 1e-12) and np.all(res.report.variances <= max(s) + 1e-12)


def test_uniform_squeezing_is_basis_independent():
    cov = p_squeezed(np.full(6, 0.3))
    res = cl.optimize_cluster_basis(cov, cl.graph_library("hexagon"), FAST)
    assert np.allclose(res.report.variances, 0.3)


def test_objective_monotone_in_squeezing():
    graph = cl.graph_library("linear6")
    means = [
        cl.optimize_cluster_basis(p_squeezed(np.exp(-2 * r * np.linspace(1, 0.6, 6))), graph, FAST).report.mean
        for r in (0.25, 0.5, 1.0, 1.5)
    ]
    assert all(b <= a + 1e-12 for a, b in zip(means, means[1:]))


def test_optimizer_reaches_rearrangement_bound():
    s = np.array([0.25, 0.3, 0.36, 0.42, 0.5, 0.6])
    V = cl.graph_library("linear6").adjacency
    res = cl.optimize_cluster_basis(p_squeezed(s), V, cl.ESConfig(seed=1, max_restarts=1))
    bound = rearrangement_bound(V, s)
    assert res.report.mean >= bound - 1e-12
    assert res.report.mean == pytest.approx(bound, abs=2e-3)


def test_optimizer_selects_most_squeezed_modes_and_rotates_x():
    vx = np.array([1 / 0.7, 0.3, 1.02, 0.7])
    vp = np.array([0.7, 1 / 0.3, 1 / 1.02, 1 / 0.7])
    modes, pattern = cl.select_supermodes(np.diag(np.concatenate([vx, vp])), 3)
    assert modes == [0, 1, 3] and pattern == ["p", "x", "x"]


def test_optimizer_deterministic():
    cov = p_squeezed([0.3, 0.4, 0.5, 0.6])
    a = cl.optimize_cluster_basis(cov, cl.graph_library("square4"), FAST)
    b = cl.optimize_cluster_basis(cov, cl.graph_library("square4"), FAST)
    assert np.array_equal(a.angles.theta, b.angles.theta)


def test_no_improvement_warning():
    with pytest.warns(NoImprovementWarning):
        cl.optimize_cluster_basis(1.5 * np.eye(8), cl.graph_library("square4"), FAST)


def test_max_objective():
    cov = p_squeezed([0.2, 0.4, 0.6, 0.8])
    cfg = cl.ESConfig(seed=2, objective="max", max_generations=300, stagnation=60, max_restarts=1)
    res = cl.optimize_cluster_basis(cov, cl.graph_library("linear4"), cfg)
    assert res.objective == pytest.approx(res.report.max)
    assert res.to_dict()["objective"] == "max"


def test_optimizer_network_satisfies_closure():
    res = cl.optimize_cluster_basis(p_squeezed([0.3, 0.4, 0.5, 0.6]), cl.graph_library("T4"), FAST)
    assert res.network.closure_defect(res.graph.adjacency) < 1e-8
