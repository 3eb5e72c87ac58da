"""Bipartite entanglement of multimode Gaussian states by partial transposition.

Transposing one side of a bipartition flips the sign of its momenta.  The
state is entangled across the cut when ``G cov G + iJ`` has a negative
eigenvalue, ``G`` being that sign flip.  Vacuum sits exactly on the boundary
with smallest eigenvalue 0.
"""

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .config import DEFAULT_TOLERANCES
from .errors import DimensionMismatch, TooManyModes, UnphysicalVariances
from .gaussian import as_covariance, n_modes, symplectic_form

MAX_MODES = 20


@dataclass(frozen=True)
class Bipartition:
    """Split of modes ``1..n`` into two non-empty sides (1-based labels).

    ``side_a`` always contains mode 1, which makes the key canonical.
    """

    side_a: tuple
    side_b: tuple

    @classmethod
    def from_side(cls, side, n):
        side = {int(i) for i in side}
        if not side or not side <= set(range(1, n + 1)) or len(side) == n:
            raise DimensionMismatch(f"invalid side {sorted(side)} for {n} modes")
        other = set(range(1, n + 1)) - side
        a, b = (side, other) if 1 in side else (other, side)
        return cls(tuple(sorted(a)), tuple(sorted(b)))

    @property
    def n_modes(self):
        return len(self.side_a) + len(self.side_b)

    @property
    def key(self):
        """Canonical label such as ``"1,2|3"``."""
        return ",".join(map(str, self.side_a)) + "|" + ",".join(map(str, self.side_b))

    def __str__(self):
        return self.key


def enumerate_bipartitions(n):
    """All ``2^(n-1) - 1`` bipartitions of ``n`` modes, by size of the side holding mode 1."""
    if n < 2:
        raise DimensionMismatch("need at least two modes to split")
    out = []
    others = range(2, n + 1)
    for extra in range(0, n - 1):
        for rest in combinations(others, extra):
            out.append(Bipartition.from_side((1,) + rest, n))
    return out


def _transpose_signs(part, n):
    signs = np.ones(2 * n)
    for i in part.side_b:
        signs[n + i - 1] = -1.0
    return signs


def ppt_min_eigenvalue(cov, part):
    """Smallest eigenvalue of ``G cov G + iJ`` with ``side_b`` transposed."""
    cov = as_covariance(cov)
    n = n_modes(cov)
    if part.n_modes != n:
        raise DimensionMismatch(f"bipartition of {part.n_modes} modes applied to a {n}-mode state")
    s = _transpose_signs(part, n)
    mat = s[:, None] * cov * s[None, :] + 1j * symplectic_form(n)
    return float(np.linalg.eigvalsh(mat)[0])


@dataclass(frozen=True)
class PptResult:
    bipartition: Bipartition
    min_eig: float
    entangled: bool


@dataclass(frozen=True)
class PptSummary:
    results: list
    all_entangled: bool
    n_entangled: int

    @property
    def n_partitions(self):
        return len(self.results)

    @property
    def values(self):
        return np.array([r.min_eig for r in self.results])

    def to_dict(self):
        v = self.values
        return {
            "all_entangled": self.all_entangled,
            "n_partitions": self.n_partitions,
            "n_entangled": self.n_entangled,
            "min": float(v.min()),
            "max": float(v.max()),
            "mean": float(v.mean()),
        }


def ppt_all(cov, tol=None, max_modes=MAX_MODES):
    """PPT test on every bipartition; results sorted by ``min_eig``.

    Raises:
        TooManyModes: more than ``max_modes`` modes.
    """
    tol = tol or DEFAULT_TOLERANCES
    cov = as_covariance(cov)
    n = n_modes(cov)
    if n > max_modes:
        raise TooManyModes(f"{n} modes give {2 ** (n - 1) - 1} bipartitions; limit is {max_modes} modes")
    results = []
    for part in enumerate_bipartitions(n):
        v = ppt_min_eigenvalue(cov, part)
        results.append(PptResult(part, v, v < -tol.eps_ppt))
    results.sort(key=lambda r: r.min_eig)
    n_ent = sum(r.entangled for r in results)
    return PptSummary(results, n_ent == len(results), n_ent)


def single_mode_reference(v_x, v_p, powers, tol=None):
    """A single squeezed mode spread over bands with amplitudes ``sqrt(P_i / sum P)``.

    The orthogonal combinations are vacuum, so the result is
    ``I + (V - 1) u u^T`` per quadrature.
    """
    tol = tol or DEFAULT_TOLERANCES
    if v_x <= 0 or v_p <= 0 or v_x * v_p < 1 - tol.eps_phys:
        raise UnphysicalVariances(f"V_x V_p = {v_x * v_p:.6g} is below 1")
    powers = np.asarray(powers, dtype=float)
    if powers.ndim != 1 or powers.size < 1 or np.any(powers <= 0):
        raise DimensionMismatch("powers must be a non-empty vector of positive numbers")
    u = np.sqrt(powers / powers.sum())
    n = powers.size
    out = np.eye(2 * n)
    out[:n, :n] += (v_x - 1) * np.outer(u, u)
    out[n:, n:] += (v_p - 1) * np.outer(u, u)
    return out
