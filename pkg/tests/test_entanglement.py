import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spopo import gaussian as g
from spopo.entanglement import (
    Bipartition,
    enumerate_bipartitions,
    ppt_all,
    ppt_min_eigenvalue,
    single_mode_reference,
)
from spopo.errors import DimensionMismatch, TooManyModes, UnphysicalVariances


def tms_ppt_oracle(r):
    """Closed form: the partially transposed two-mode squeezed vacuum has
    smallest symplectic eigenvalue e^{-2r}, so min eig(G S G + iJ) follows
    from diagonalizing the 4x4 Hermitian matrix built by hand."""
    c, s = np.cosh(2 * r), np.sinh(2 * r)
    # xxpp order, p of mode 2 flipped
    mat = np.array(
        [[c, s, 1j, 0], [s, c, 0, 1j], [-1j, 0, c, s], [0, -1j, s, c]],
        dtype=complex,
    )
    return np.linalg.eigvalsh(mat)[0]


def test_counts():
    assert [len(enumerate_bipartitions(n)) for n in (2, 3, 4, 8)] == [1, 3, 7, 127]
    with pytest.raises(DimensionMismatch):
        enumerate_bipartitions(1)


def test_canonical_and_deterministic():
    parts = enumerate_bipartitions(4)
    assert parts == enumerate_bipartitions(4)
    assert all(1 in p.side_a for p in parts)
    assert len({p.key for p in parts}) == len(parts)
    assert parts[0].key == "1|2,3,4"
    assert Bipartition.from_side([2, 3], 4) == Bipartition.from_side([1, 4], 4)
    with pytest.raises(DimensionMismatch):
        Bipartition.from_side([1, 2], 2)


def test_vacuum_sits_on_boundary():
    for p in enumerate_bipartitions(3):
        assert ppt_min_eigenvalue(np.eye(6), p) == pytest.approx(0.0, abs=1e-12)
    assert ppt_all(np.eye(6)).n_entangled == 0


def test_two_mode_squeezed_state_entangled():
    r = 0.5
    v = ppt_min_eigenvalue(g.two_mode_squeezed_state(r), enumerate_bipartitions(2)[0])
    assert v == pytest.approx(tms_ppt_oracle(r), abs=1e-12)
    assert v < 0


def test_tms_times_vacuum():
    cov = g.direct_sum(g.two_mode_squeezed_state(0.5), np.eye(2))
    res = ppt_all(cov)
    flagged = {r.bipartition.key for r in res.results if r.entangled}
    assert flagged == {"1|2,3", "1,3|2"}
    assert not res.all_entangled


def test_product_of_squeezed_states_separable():
    cov = g.direct_sum(np.diag([0.2, 5.0]), np.diag([3.0, 1 / 3]))
    assert ppt_min_eigenvalue(cov, enumerate_bipartitions(2)[0]) >= -1e-9


def test_dimension_checks():
    with pytest.raises(DimensionMismatch):
        ppt_min_eigenvalue(np.eye(4), enumerate_bipartitions(3)[0])
    with pytest.raises(TooManyModes):
        ppt_all(np.eye(2 * 21))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_transposing_either_side_agrees(seed):
    cov = g.random_covariance(4, seed)
    n = 4
    for p in enumerate_bipartitions(n):
        swapped = Bipartition(p.side_b, p.side_a)
        assert ppt_min_eigenvalue(cov, p) == pytest.approx(ppt_min_eigenvalue(cov, swapped), abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_random_product_states_never_flagged(seed):
    rng = np.random.default_rng(seed)
    parts = [g.random_covariance(1, rng, max_squeezing=1.5) for _ in range(4)]
    res = ppt_all(g.direct_sum(*parts))
    assert res.n_entangled == 0


def test_single_mode_reference_examples():
    assert np.allclose(single_mode_reference(0.5, 2.0, [1.0]), np.diag([0.5, 2.0]))
    ref = single_mode_reference(0.5, 2.0, [1.0, 1.0])
    assert ppt_min_eigenvalue(ref, enumerate_bipartitions(2)[0]) < 0
    assert g.purity(ref) == pytest.approx(1.0)
    with pytest.raises(UnphysicalVariances):
        single_mode_reference(0.5, 1.5, [1.0, 1.0])


def test_single_mode_reference_depends_on_power_split_only():
    powers = np.array([1.0, 2.0, 1.0, 2.0])
    ref = single_mode_reference(0.4, 2.5, powers)
    base = ppt_min_eigenvalue(ref, Bipartition.from_side([1, 2], 4))
    # swap bands 2 and 4 (same power, same side) and 1 with 3 across sides
    for perm in ([0, 3, 2, 1], [2, 1, 0, 3], [2, 3, 0, 1]):
        p = powers[perm]
        val = ppt_min_eigenvalue(single_mode_reference(0.4, 2.5, p), Bipartition.from_side([1, 2], 4))
        assert val == pytest.approx(base, abs=1e-10)


def test_summary_fields():
    res = ppt_all(g.two_mode_squeezed_state(0.3))
    doc = res.to_dict()
    assert doc["n_partitions"] == 1 and doc["all_entangled"]
    assert doc["min"] == doc["max"]


def test_results_sorted(six_db_run):
    vals = ppt_all(six_db_run.cov_pixels).values
    assert np.all(np.diff(vals) >= 0)
