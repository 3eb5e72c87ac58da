import json
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spopo import gaussian as g
from spopo.errors import (
    DimensionMismatch,
    IndexOutOfRange,
    NotPositiveDefinite,
    NotSymplectic,
    NotUnitary,
    SingularMatrix,
    UnphysicalWarning,
)


def tms_oracle(r):
    """Two-mode squeezed vacuum written out in xpxp order, then reordered."""
    c, s = np.cosh(2 * r), np.sinh(2 * r)
    xpxp = np.array([[c, 0, s, 0], [0, c, 0, -s], [s, 0, c, 0], [0, -s, 0, c]])
    perm = [0, 2, 1, 3]
    return xpxp[np.ix_(perm, perm)]


def symplectic_eigs_oracle(cov):
    n = len(cov) // 2
    ev = np.abs(np.linalg.eigvals(1j * g.symplectic_form(n) @ cov))
    return np.sort(ev)[::-1][::2]


seeds = st.integers(0, 2**31 - 1)


def test_symplectic_form_layout():
    J = g.symplectic_form(2)
    assert np.array_equal(J, [[0, 0, 1, 0], [0, 0, 0, 1], [-1, 0, 0, 0], [0, -1, 0, 0]])
    assert np.array_equal(J @ J, -np.eye(4))


def test_n_modes_rejects_odd_shapes():
    with pytest.raises(DimensionMismatch):
        g.n_modes(np.eye(3))
    with pytest.raises(DimensionMismatch):
        g.n_modes(np.ones((2, 4)))


def test_vacuum_is_pure_and_physical():
    rep = g.validate_covariance(g.vacuum(3))
    assert rep.physical and rep.block_diagonal
    assert rep.min_eig == pytest.approx(0.0, abs=1e-12)
    assert g.purity(g.vacuum(3)) == 1.0


def test_validation_statuses():
    assert g.validate_covariance(np.diag([0.5, 2.0])).status == "physical"
    with pytest.warns(UnphysicalWarning):
        rep = g.validate_covariance(np.diag([0.9995, 1.0]))
    assert rep.status == "marginal"
    assert g.validate_covariance(np.diag([0.5, 1.0])).status == "unphysical"


def test_purity_of_thermal_state_and_singular():
    assert g.purity(np.diag([2.0, 2.0, 3.0, 3.0])) == pytest.approx(1 / 6)
    with pytest.raises(SingularMatrix):
        g.purity(np.zeros((2, 2)))


def test_purity_clamps_unphysical_input():
    with pytest.warns(UnphysicalWarning):
        assert g.purity(np.diag([0.5, 1.0])) == 1.0


def test_two_mode_squeezed_state_matches_oracle():
    assert np.allclose(g.two_mode_squeezed_state(0.5), tms_oracle(0.5), atol=1e-14)


def test_unitary_to_symplectic_acts_on_quadratures(rng):
    U = g.random_unitary(3, rng)
    S = g.unitary_to_symplectic(U)
    a = rng.normal(size=3) + 1j * rng.normal(size=3)
    b = U @ a
    xp = np.concatenate([a.real, a.imag])
    assert np.allclose(S @ xp, np.concatenate([b.real, b.imag]))
    assert g.is_symplectic(S)
    assert np.allclose(g.symplectic_to_unitary(S), U)


def test_unitary_to_symplectic_rejects_non_unitary():
    with pytest.raises(NotUnitary):
        g.unitary_to_symplectic(np.array([[2.0]]))


def test_rotation_by_quarter_turn_swaps_quadratures():
    R = g.rotation(np.pi / 2)
    assert np.allclose(R, [[0, -1], [1, 0]])


def test_extract_submatrix_is_partial_trace():
    cov = g.direct_sum(g.two_mode_squeezed_state(0.3), np.diag([2.0, 0.5]))
    assert np.allclose(g.extract_submatrix(cov, [2]), np.diag([2.0, 0.5]))
    sub = g.extract_submatrix(cov, [1, 0])
    assert sub.shape == (4, 4)
    with pytest.raises(IndexOutOfRange):
        g.extract_submatrix(cov, [3])
    with pytest.raises(IndexOutOfRange):
        g.extract_submatrix(cov, [0, 0])


def test_direct_sum_layout():
    cov = g.direct_sum(np.diag([1.0, 2.0]), np.diag([3.0, 4.0]))
    assert np.allclose(np.diag(cov), [1, 3, 2, 4])


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(1, 5))
def test_random_covariances_are_physical(seed, n):
    cov = g.random_covariance(n, seed)
    assert g.validate_covariance(cov).physical
    assert 0 < g.purity(cov) <= 1


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(1, 5))
def test_williamson_matches_eigenvalue_oracle(seed, n):
    cov = g.random_covariance(n, seed)
    dec = g.williamson(cov)
    assert np.allclose(dec.nu, symplectic_eigs_oracle(cov), rtol=1e-8)
    assert g.is_symplectic(dec.symplectic, 1e-8)
    err = np.linalg.norm(dec.recompose() - cov) / np.linalg.norm(cov)
    assert err < 1e-9
    assert g.purity(cov) == pytest.approx(1 / np.prod(dec.nu), rel=1e-8)


def test_williamson_of_pure_state_and_identity(rng):
    S = g.random_symplectic(4, rng)
    dec = g.williamson(S @ S.T)
    assert np.allclose(dec.nu, 1.0, atol=1e-8)
    ident = g.williamson(np.eye(6))
    assert np.allclose(ident.symplectic, np.eye(6))


def test_williamson_rejects_indefinite():
    with pytest.raises(NotPositiveDefinite):
        g.williamson(np.diag([1.0, -1.0]))


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(1, 5))
def test_bloch_messiah_round_trip_and_singular_values(seed, n):
    S = g.random_symplectic(n, seed, max_squeezing=1.2)
    dec = g.bloch_messiah(S)
    assert np.linalg.norm(dec.recompose() - S) / np.linalg.norm(S) < 1e-9
    for P in (dec.left, dec.right):
        assert np.allclose(P @ P.T, np.eye(2 * n), atol=1e-9)
        assert g.is_symplectic(P, 1e-9)
    sv = np.linalg.svd(S, compute_uv=False)
    expected = np.sort(np.concatenate([np.exp(dec.squeezers), np.exp(-dec.squeezers)]))
    assert np.allclose(np.sort(sv), expected, rtol=1e-8)


def test_bloch_messiah_of_passive_is_trivial(rng):
    O = g.random_passive(3, rng)
    dec = g.bloch_messiah(O)
    assert np.allclose(dec.squeezers, 0.0)
    assert np.allclose(dec.recompose(), O)


def test_bloch_messiah_rejects_non_symplectic():
    with pytest.raises(NotSymplectic):
        g.bloch_messiah(np.diag([2.0, 2.0]))


def test_json_round_trip(tmp_path, rng):
    cov = g.random_covariance(3, rng)
    path = tmp_path / "cov.json"
    g.save_covariance(path, cov)
    doc = json.loads(path.read_text())
    assert doc["ordering"] == "xxpp" and doc["n_modes"] == 3
    assert np.array_equal(g.load_covariance(path), cov)


def test_json_rejects_other_ordering():
    text = json.dumps({"n_modes": 1, "ordering": "xpxp", "matrix": [[1, 0], [0, 1]]})
    with pytest.raises(DimensionMismatch):
        g.covariance_from_json(text)


def test_apply_symplectic_preserves_purity(rng):
    cov = g.random_covariance(3, rng)
    S = g.random_symplectic(3, rng)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert g.purity(g.apply_symplectic(S, cov)) == pytest.approx(g.purity(cov), rel=1e-9)
