"""Covariance matrices and symplectic transformations of Gaussian states.

Conventions used throughout the package:

* quadratures are ordered ``(x_1, ..., x_N, p_1, ..., p_N)`` ("xxpp");
* the vacuum covariance matrix is the identity (vacuum variance 1);
* the symplectic form is ``J = [[0, I], [-I, 0]]``.

Covariance matrices and symplectic matrices are plain ``numpy`` arrays.
"""

import json
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import schur
from scipy.stats import unitary_group

from .config import DEFAULT_TOLERANCES
from .errors import (
    DimensionMismatch,
    IndexOutOfRange,
    NotPositiveDefinite,
    NotSymplectic,
    NotUnitary,
    SingularMatrix,
    UnphysicalWarning,
)

ORDERING = "xxpp"
VACUUM_VARIANCE = 1.0


def symplectic_form(n):
    """Return the ``2n x 2n`` symplectic form ``[[0, I], [-I, 0]]``."""
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]])


def n_modes(cov):
    """Number of modes of a ``2N x 2N`` matrix; raises on bad shapes."""
    cov = np.asarray(cov)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1] or cov.shape[0] % 2:
        raise DimensionMismatch(f"expected a square 2N x 2N matrix, got shape {cov.shape}")
    return cov.shape[0] // 2


def as_covariance(cov):
    """Validate the shape of ``cov`` and return a symmetrized float copy."""
    n_modes(cov)
    cov = np.array(cov, dtype=float)
    return 0.5 * (cov + cov.T)


def vacuum(n):
    return np.eye(2 * n)


def xp_blocks(cov):
    """Split a covariance matrix into its ``x`` and ``p`` diagonal blocks."""
    n = n_modes(cov)
    cov = np.asarray(cov)
    return cov[:n, :n], cov[n:, n:]


def block_covariance(cov_x, cov_p):
    """Assemble a block-diagonal covariance from its ``x`` and ``p`` blocks."""
    cov_x = np.asarray(cov_x, dtype=float)
    cov_p = np.asarray(cov_p, dtype=float)
    if cov_x.shape != cov_p.shape or cov_x.shape[0] != cov_x.shape[1]:
        raise DimensionMismatch("x and p blocks must be square and of equal size")
    n = cov_x.shape[0]
    out = np.zeros((2 * n, 2 * n))
    out[:n, :n] = cov_x
    out[n:, n:] = cov_p
    return out


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of :func:`validate_covariance`.

    ``status`` is ``"physical"``, ``"marginal"`` (violation smaller than the
    warning floor, typical of noisy measured matrices) or ``"unphysical"``.
    """

    n_modes: int
    symmetry_defect: float
    min_eig: float
    block_defect: float
    status: str

    @property
    def physical(self):
        return self.status == "physical"

    @property
    def block_diagonal(self):
        return self.block_defect == 0.0


def heisenberg_min_eig(cov):
    """Smallest eigenvalue of the Hermitian matrix ``cov + iJ``."""
    n = n_modes(cov)
    return float(np.linalg.eigvalsh(np.asarray(cov) + 1j * symplectic_form(n))[0])


def validate_covariance(cov, tol=None, warn=True):
    """Check symmetry, the uncertainty relation and block structure.

    Args:
        cov: ``2N x 2N`` real matrix.
        tol (Tolerances): thresholds; ``eps_phys`` and ``warn_floor`` are used.
        warn (bool): emit :class:`UnphysicalWarning` for marginal matrices.

    Returns:
        ValidationReport
    """
    tol = tol or DEFAULT_TOLERANCES
    n = n_modes(cov)
    raw = np.asarray(cov, dtype=float)
    sym_defect = float(np.max(np.abs(raw - raw.T)))
    sym = 0.5 * (raw + raw.T)
    min_eig = heisenberg_min_eig(sym)
    block_defect = float(np.max(np.abs(sym[:n, n:]))) if n else 0.0

    if min_eig >= -tol.eps_phys:
        status = "physical"
    elif min_eig >= -tol.warn_floor:
        status = "marginal"
        if warn:
            warnings.warn(
                f"covariance violates the uncertainty relation slightly (min eig {min_eig:.3g})",
                UnphysicalWarning,
                stacklevel=2,
            )
    else:
        status = "unphysical"
    return ValidationReport(n, sym_defect, min_eig, block_defect, status)


def purity(cov, tol=None):
    """Purity ``1/sqrt(det cov)`` of a Gaussian state (vacuum variance 1).

    Values above ``1 + purity_slack`` can only come from an unphysical input;
    they trigger an :class:`UnphysicalWarning` and are clamped to 1.
    """
    tol = tol or DEFAULT_TOLERANCES
    n_modes(cov)
    sign, logdet = np.linalg.slogdet(np.asarray(cov, dtype=float))
    if sign <= 0:
        raise SingularMatrix("covariance determinant is not positive")
    p = float(np.exp(-0.5 * logdet))
    if p > 1.0 + tol.purity_slack:
        warnings.warn(f"purity {p:.6g} exceeds 1: input is unphysical", UnphysicalWarning, stacklevel=2)
        return 1.0
    return min(p, 1.0)


def is_symplectic(S, atol=None):
    S = np.asarray(S)
    n = n_modes(S)
    J = symplectic_form(n)
    scale = max(1.0, float(np.max(np.abs(S))) ** 2)
    atol = DEFAULT_TOLERANCES.symplectic if atol is None else atol
    return bool(np.max(np.abs(S @ J @ S.T - J)) <= atol * scale)


def apply_symplectic(S, cov):
    """Transform a covariance matrix, ``S cov S^T``."""
    S = np.asarray(S, dtype=float)
    cov = np.asarray(cov, dtype=float)
    if S.shape != cov.shape:
        raise DimensionMismatch(f"symplectic {S.shape} and covariance {cov.shape} differ")
    n_modes(cov)
    out = S @ cov @ S.T
    return 0.5 * (out + out.T)


def unitary_to_symplectic(U, tol=None):
    """Real symplectic (and orthogonal) matrix of a passive mode transformation.

    With ``U = X + iY`` acting on annihilation operators, the quadratures
    transform with ``[[X, -Y], [Y, X]]``.
    """
    tol = tol or DEFAULT_TOLERANCES
    U = np.asarray(U, dtype=complex)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise DimensionMismatch(f"unitary must be square, got {U.shape}")
    defect = np.max(np.abs(U @ U.conj().T - np.eye(U.shape[0])))
    if defect > tol.unitary:
        raise NotUnitary(f"matrix is not unitary (defect {defect:.3g})")
    X, Y = U.real, U.imag
    return np.block([[X, -Y], [Y, X]])


def symplectic_to_unitary(O):
    """Inverse of :func:`unitary_to_symplectic` for orthogonal symplectic ``O``."""
    n = n_modes(O)
    O = np.asarray(O)
    return O[:n, :n] + 1j * O[n:, :n]


def extract_submatrix(cov, modes):
    """Reduced covariance of the listed modes (0-based), keeping xxpp order.

    For Gaussian states this is the partial trace over the other modes.
    """
    n = n_modes(cov)
    modes = [int(m) for m in modes]
    if len(set(modes)) != len(modes):
        raise IndexOutOfRange(f"duplicate mode indices in {modes}")
    for m in modes:
        if not 0 <= m < n:
            raise IndexOutOfRange(f"mode index {m} out of range for {n} modes")
    idx = np.array(modes + [m + n for m in modes], dtype=int)
    return np.asarray(cov, dtype=float)[np.ix_(idx, idx)]


def squeezer(r):
    """Diagonal single/multimode squeezer ``diag(e^r, e^-r)`` (x stretched)."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    return np.diag(np.concatenate([np.exp(r), np.exp(-r)]))


def rotation(phi):
    """Single-mode phase rotation ``a -> e^{i phi} a``."""
    return unitary_to_symplectic(np.array([[np.exp(1j * phi)]]))


def two_mode_squeezer(r):
    """Two-mode squeezing symplectic, ``a1 -> cosh r a1 + sinh r a2^dag``."""
    c, s = np.cosh(r), np.sinh(r)
    return np.array(
        [
            [c, s, 0, 0],
            [s, c, 0, 0],
            [0, 0, c, -s],
            [0, 0, -s, c],
        ]
    )


def two_mode_squeezed_state(r):
    S = two_mode_squeezer(r)
    return S @ S.T


def direct_sum(*covs):
    """Covariance of a product state, in xxpp order."""
    sizes = [n_modes(c) for c in covs]
    n = sum(sizes)
    out = np.zeros((2 * n, 2 * n))
    offset = 0
    for c, k in zip(covs, sizes):
        c = np.asarray(c, dtype=float)
        idx = np.r_[offset : offset + k, n + offset : n + offset + k]
        out[np.ix_(idx, idx)] = c
        offset += k
    return out


def random_unitary(n, rng=None):
    rng = np.random.default_rng(rng)
    if n == 1:
        return np.array([[np.exp(2j * np.pi * rng.random())]])
    return unitary_group.rvs(n, random_state=rng)


def random_passive(n, rng=None):
    """Random orthogonal symplectic matrix (Haar passive network)."""
    return unitary_to_symplectic(random_unitary(n, rng))


def random_symplectic(n, rng=None, max_squeezing=1.0):
    """Random symplectic matrix ``O1 diag(e^r, e^-r) O2`` with ``r`` uniform."""
    rng = np.random.default_rng(rng)
    r = rng.uniform(0.0, max_squeezing, size=n)
    return random_passive(n, rng) @ squeezer(r) @ random_passive(n, rng)


def random_covariance(n, rng=None, max_squeezing=1.0, max_thermal=2.0):
    """Random physical covariance ``S diag(nu, nu) S^T`` with ``nu >= 1``."""
    rng = np.random.default_rng(rng)
    nu = rng.uniform(1.0, max_thermal, size=n)
    S = random_symplectic(n, rng, max_squeezing)
    return apply_symplectic(S, np.diag(np.concatenate([nu, nu])))


@dataclass(frozen=True)
class WilliamsonDecomposition:
    """``cov = symplectic @ diag(nu, nu) @ symplectic.T`` with ``nu`` descending."""

    symplectic: np.ndarray
    nu: np.ndarray

    def recompose(self):
        d = np.diag(np.concatenate([self.nu, self.nu]))
        return self.symplectic @ d @ self.symplectic.T


def _sym_sqrt(mat):
    w, v = np.linalg.eigh(mat)
    return (v * np.sqrt(w)) @ v.T, (v / np.sqrt(w)) @ v.T


def williamson(cov, tol=None):
    """Williamson normal form of a positive-definite covariance matrix.

    The symplectic eigenvalues are the moduli of the eigenvalues of ``J cov``.
    Numerically they are obtained from the real Schur form of the
    antisymmetric matrix ``cov^{-1/2} J cov^{-1/2}``, whose 2x2 blocks carry
    ``1/nu``.  When every ``nu`` is degenerate the symplectic factor is
    chosen as the positive square root of ``cov / nu``, so the identity maps
    to the identity.

    Raises:
        NotPositiveDefinite: if ``cov`` has a non-positive eigenvalue.
    """
    tol = tol or DEFAULT_TOLERANCES
    cov = as_covariance(cov)
    n = cov.shape[0] // 2
    if np.linalg.eigvalsh(cov)[0] <= 0:
        raise NotPositiveDefinite("covariance matrix is not positive definite")

    root, inv_root = _sym_sqrt(cov)
    K = inv_root @ symplectic_form(n) @ inv_root
    K = 0.5 * (K - K.T)
    T, Z = schur(K, output="real")

    betas = np.empty(n)
    for i in range(n):
        beta = T[2 * i, 2 * i + 1]
        if beta < 0:
            Z[:, [2 * i, 2 * i + 1]] = Z[:, [2 * i + 1, 2 * i]]
            beta = -beta
        betas[i] = beta
    nu = 1.0 / betas
    order = np.argsort(-nu, kind="stable")
    nu = nu[order]
    O = np.hstack([Z[:, 0::2][:, order], Z[:, 1::2][:, order]])

    if nu[0] - nu[-1] <= tol.degeneracy * max(1.0, nu[0]):
        level = float(np.mean(nu))
        S, _ = _sym_sqrt(cov / level)
        return WilliamsonDecomposition(S, np.full(n, level))

    S = root @ O @ np.diag(np.concatenate([nu, nu]) ** -0.5)
    return WilliamsonDecomposition(S, nu)


@dataclass(frozen=True)
class BlochMessiahDecomposition:
    """``S = left @ diag(e^r, e^-r) @ right`` with passive ``left``/``right``."""

    left: np.ndarray
    squeezers: np.ndarray
    right: np.ndarray

    def recompose(self):
        return self.left @ squeezer(self.squeezers) @ self.right


def _complex_gram_schmidt(candidates, basis, n, tol):
    """Extend ``basis`` with vectors ``u`` keeping ``{u, Ju}`` orthonormal."""
    J = symplectic_form(n)
    basis = list(basis)
    for c in candidates:
        if len(basis) == n:
            break
        v = c.copy()
        for _ in range(2):
            for u in basis:
                v -= (u @ v) * u
                ju = J @ u
                v -= (ju @ v) * ju
        norm = np.linalg.norm(v)
        if norm > tol:
            basis.append(v / norm)
    return basis


def bloch_messiah(S, tol=None):
    """Passive-squeezer-passive factorization of a symplectic matrix.

    The left factor diagonalizes ``S S^T`` (eigenvalues come in pairs
    ``e^{2r}, e^{-2r}`` with eigenvectors related by ``J``); the right factor
    follows as ``D^{-1} O_1^T S``.  Squeezers are returned in descending
    order.  Unsqueezed directions are completed with a ``J``-adapted
    Gram-Schmidt over the standard basis, so passive inputs give an identity
    left factor.

    Raises:
        NotSymplectic: if ``S J S^T`` differs from ``J``.
    """
    tol = tol or DEFAULT_TOLERANCES
    S = np.asarray(S, dtype=float)
    n = n_modes(S)
    if not is_symplectic(S, tol.symplectic):
        raise NotSymplectic("matrix does not preserve the symplectic form")
    J = symplectic_form(n)

    M = S @ S.T
    M = 0.5 * (M + M.T)
    w, v = np.linalg.eigh(M)
    logw = np.log(w)
    order = np.argsort(-logw, kind="stable")
    squeezed = [i for i in order if logw[i] > tol.pairing][:n]
    basis = [v[:, i] for i in squeezed]
    r = [0.5 * logw[i] for i in squeezed]

    if len(basis) < n:
        unit = [i for i in range(2 * n) if abs(logw[i]) <= tol.pairing]
        Q = v[:, unit]
        candidates = [Q @ (Q.T @ e) for e in np.eye(2 * n)]
        start = len(basis)
        basis = _complex_gram_schmidt(candidates, basis, n, 1e-6)
        if len(basis) < n:
            raise NotSymplectic("could not pair the spectrum of S S^T")
        r += [0.0] * (len(basis) - start)

    U = np.column_stack(basis)
    left = np.hstack([U, -J @ U])
    r = np.array(r)
    right = np.diag(np.concatenate([np.exp(-r), np.exp(r)])) @ left.T @ S
    return BlochMessiahDecomposition(left, r, right)


def covariance_to_json(cov):
    """Serialize a covariance matrix to the package's JSON document."""
    cov = as_covariance(cov)
    doc = {
        "n_modes": cov.shape[0] // 2,
        "ordering": ORDERING,
        "vacuum_variance": VACUUM_VARIANCE,
        "matrix": cov.tolist(),
    }
    return json.dumps(doc, indent=1)


def covariance_from_json(text):
    doc = json.loads(text)
    if doc.get("ordering", ORDERING) != ORDERING:
        raise DimensionMismatch(f"unsupported quadrature ordering {doc['ordering']!r}")
    if float(doc.get("vacuum_variance", VACUUM_VARIANCE)) != VACUUM_VARIANCE:
        raise DimensionMismatch("only vacuum_variance = 1 is supported")
    cov = np.array(doc["matrix"], dtype=float)
    if n_modes(cov) != int(doc["n_modes"]):
        raise DimensionMismatch(f"n_modes={doc['n_modes']} does not match matrix shape {cov.shape}")
    return as_covariance(cov)


def save_covariance(path, cov):
    with open(path, "w") as fh:
        fh.write(covariance_to_json(cov))
        fh.write("\n")


def load_covariance(path):
    with open(path) as fh:
        return covariance_from_json(fh.read())
