"""Parametric coupling, supermodes and simulated homodyne detection of a SPOPO.

Frequencies are angular detunings from the comb carrier, in rad/s.  The
coupling kernel is the Gaussian model

    L(w, w') = exp(-a (w + w')^2) * exp(-b (w - w')^2)

whose eigenfunctions are Hermite-Gauss functions and whose eigenvalues form
the geometric progression ``Lambda_0 rho^k`` exactly when
``rho = (sqrt(b) - sqrt(a)) / (sqrt(b) + sqrt(a))``.  ``a`` carries the pump
duration broadened by group-velocity walk-off, ``b`` is fixed by requiring
the kernel ratio to equal the closed-form ``rho`` of the crystal model.
"""

import json
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.special import erf, erfinv

from .errors import (
    BandOverlap,
    DegenerateSpectrumWarning,
    DimensionMismatch,
    GridTooCoarse,
    InvalidEigenvalue,
    InvalidEta,
    InvalidPumpRatio,
    InvalidSpec,
)
from .gaussian import block_covariance, purity

C_LIGHT = 299_792_458.0
FWHM_PER_WIDTH = 2.0 * np.sqrt(np.log(2.0))  # intensity FWHM of exp(-w^2/(2 s^2)) amplitude


@dataclass(frozen=True)
class PumpCrystalSpec:
    """Pump pulse and crystal dispersion (SI units).

    Attributes:
        tau_p: pump pulse duration (s).
        omega_fsr: repetition rate / free spectral range (rad/s).
        crystal_length: crystal length (m).
        kp_prime, ks_prime: group delays per length of pump and signal (s/m).
        ks_double_prime: signal group-velocity dispersion (s^2/m).
    """

    tau_p: float
    omega_fsr: float
    crystal_length: float
    kp_prime: float
    ks_prime: float
    ks_double_prime: float

    @property
    def tau_1(self):
        return abs(self.kp_prime - self.ks_prime) * self.crystal_length / np.sqrt(10.0)

    @property
    def tau_2(self):
        return np.sqrt(abs(self.ks_double_prime) * self.crystal_length) / (4.0 * np.sqrt(3.0))

    def check(self):
        for name in ("tau_p", "omega_fsr", "crystal_length", "tau_1", "tau_2"):
            if not getattr(self, name) > 0:
                raise InvalidSpec(f"{name} must be positive, got {getattr(self, name)!r}")


def realistic_spec():
    """BIBO-like crystal and pump; the eigenvalue ratio is about -0.92."""
    return PumpCrystalSpec(
        tau_p=80e-15,
        omega_fsr=2 * np.pi * 76e6,
        crystal_length=2e-3,
        kp_prime=6.40e-9,
        ks_prime=6.30e-9,
        ks_double_prime=4.0e-25,
    )


def analytic_eigenvalues(spec, n_modes=1):
    """Closed-form leading eigenvalue, ratio and progression ``Lambda_0 rho^k``.

    Returns:
        tuple: ``(lambda0, rho, lambdas)`` with ``lambdas`` of length ``n_modes``.
    """
    spec.check()
    if n_modes < 1:
        raise ValueError("n_modes must be at least 1")
    tp, t1, t2 = spec.tau_p, spec.tau_1, spec.tau_2
    lam0 = np.pi**0.25 * np.sqrt(2.0 / (tp * spec.omega_fsr)) * np.sqrt(tp**2 / (t1**2 + tp**2))
    rho = -1.0 + 2.0 * np.sqrt(t2**2 / (t1**2 + tp**2))
    if rho >= 1.0:
        raise InvalidSpec(f"eigenvalue ratio {rho:.3g} >= 1: phase matching broader than the pump model allows")
    if abs(rho) < 1e-12:
        warnings.warn("eigenvalue ratio is zero: a single supermode carries all the gain", DegenerateSpectrumWarning)
        rho = 0.0
    lambdas = lam0 * rho ** np.arange(n_modes)
    return lam0, rho, lambdas


def kernel_parameters(spec):
    """Gaussian kernel coefficients ``(a, b)`` in s^2 reproducing the analytic ratio."""
    _, rho, _ = analytic_eigenvalues(spec)
    a = 0.5 * (spec.tau_p**2 + spec.tau_1**2)
    ratio = (1.0 + rho) / (1.0 - rho)  # sqrt(b / a)
    return a, a * ratio**2


def supermode_width(spec):
    """Width ``s`` (rad/s) of the leading supermode amplitude ``exp(-w^2 / 2 s^2)``."""
    a, b = kernel_parameters(spec)
    _, rho, _ = analytic_eigenvalues(spec)
    sigma2 = 2.0 * (a + b) * (1.0 - rho**2) / (1.0 + rho**2)
    return 1.0 / np.sqrt(sigma2)


def frequency_grid(spec, n_points=128, span_fwhm=3.0, lo_fwhm=None):
    """Uniform detuning grid over ``+-span_fwhm`` LO intensity bandwidths.

    The LO defaults to the leading supermode shape.
    """
    if n_points < 2:
        raise DimensionMismatch("grid needs at least two points")
    if lo_fwhm is None:
        lo_fwhm = FWHM_PER_WIDTH * supermode_width(spec)
    half = span_fwhm * lo_fwhm
    return np.linspace(-half, half, n_points)


@dataclass(frozen=True)
class CouplingMatrix:
    grid: np.ndarray
    matrix: np.ndarray

    @property
    def spacing(self):
        return float(self.grid[1] - self.grid[0])


def _check_grid(grid):
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise DimensionMismatch("grid must be a 1-D array with at least two samples")
    step = np.diff(grid)
    if np.any(step <= 0) or np.ptp(step) > 1e-9 * abs(step[0]):
        raise DimensionMismatch("grid must be uniform and increasing")
    if np.max(np.abs(grid + grid[::-1])) > 1e-9 * np.max(np.abs(grid)):
        raise DimensionMismatch("grid must be symmetric about the carrier")
    return grid


def build_coupling_matrix(spec, grid, verify=True, rtol=0.02):
    """Sampled Gaussian coupling matrix scaled so its top eigenvalue is ``Lambda_0``.

    The continuous kernel's leading eigenvalue is known in closed form (Mehler
    kernel), so the sampled matrix is rescaled by ``Lambda_0 * dw / mu_0``.

    Args:
        verify (bool): diagonalize and require ``Lambda_0`` and ``rho`` to be
            reproduced within ``rtol``; raises :class:`GridTooCoarse` otherwise.
    """
    grid = _check_grid(grid)
    lam0, rho, _ = analytic_eigenvalues(spec)
    a, b = kernel_parameters(spec)
    s, d = grid[:, None] + grid[None, :], grid[:, None] - grid[None, :]
    kernel = np.exp(-a * s**2 - b * d**2)
    sigma = 1.0 / supermode_width(spec)
    mu0 = np.sqrt(np.pi * (1.0 - rho**2)) / sigma
    dw = grid[1] - grid[0]
    L = CouplingMatrix(grid, lam0 * dw / mu0 * kernel)

    if verify:
        lam = np.linalg.eigvalsh(L.matrix)
        lam = lam[np.argsort(-np.abs(lam), kind="stable")]
        err0 = abs(abs(lam[0]) - lam0) / lam0
        err_rho = abs(lam[1] / lam[0] - rho) if lam.size > 1 else 0.0
        if err0 > rtol or err_rho > rtol:
            raise GridTooCoarse(
                f"grid of {grid.size} points reproduces Lambda_0 to {err0:.2%} and rho to {err_rho:.3g}"
            )
    return L


@dataclass(frozen=True)
class SupermodeSet:
    """Orthonormal supermodes (rows of ``modes``) and their coupling eigenvalues.

    ``lambda0`` is the reference (largest) eigenvalue magnitude used for
    threshold normalization.
    """

    modes: np.ndarray
    lambdas: np.ndarray
    lambda0: float
    grid: np.ndarray = field(default=None, repr=False)

    def __len__(self):
        return len(self.lambdas)

    @property
    def quadrature(self):
        return [squeezing_quadrature(lam) for lam in self.lambdas]

    @property
    def squeezing_db(self):
        """Squeezing at threshold, in dB (negative is below vacuum)."""
        return np.array([10 * np.log10(max(squeezing_at_threshold(lam, self.lambda0), 1e-300)) for lam in self.lambdas])

    def rms_widths(self):
        """RMS spectral width of each mode's intensity about the carrier."""
        grid = np.asarray(self.grid)
        p = self.modes**2
        mean = p @ grid / p.sum(axis=1)
        return np.sqrt(p @ grid**2 / p.sum(axis=1) - mean**2)


def squeezing_at_threshold(lam_k, lam0):
    """Squeezed-quadrature variance of a supermode at threshold (vacuum = 1)."""
    if not lam0 > 0:
        raise InvalidEigenvalue("reference eigenvalue must be positive")
    if abs(lam_k) > lam0 * (1 + 1e-12):
        raise InvalidEigenvalue(f"|Lambda_k| = {abs(lam_k):.6g} exceeds Lambda_0 = {lam0:.6g}")
    return ((lam0 - abs(lam_k)) / (lam0 + abs(lam_k))) ** 2


def squeezing_quadrature(lam_k):
    return "x" if lam_k > 0 else "p"


def diagonalize_coupling(L, n_modes):
    """Leading ``n_modes`` eigenpairs of a symmetric coupling matrix, by ``|Lambda|``.

    Eigenvectors are signed so that their largest-magnitude entry is positive.
    """
    grid = None
    if isinstance(L, CouplingMatrix):
        grid, L = L.grid, L.matrix
    L = np.asarray(L, dtype=float)
    if L.ndim != 2 or L.shape[0] != L.shape[1]:
        raise DimensionMismatch(f"coupling matrix must be square, got {L.shape}")
    if n_modes > L.shape[0]:
        raise DimensionMismatch(f"asked for {n_modes} modes from a {L.shape[0]}-point grid")
    lam, vec = np.linalg.eigh(0.5 * (L + L.T))
    order = np.argsort(-np.abs(lam), kind="stable")
    lam, vec = lam[order], vec[:, order]
    lam0 = float(abs(lam[0]))
    lam, vec = lam[:n_modes], vec[:, :n_modes]
    peak = np.argmax(np.abs(vec), axis=0)
    vec = vec * np.sign(vec[peak, np.arange(n_modes)])
    return SupermodeSet(vec.T.copy(), lam.copy(), lam0, grid)


def _check_pump_and_loss(pump_ratio, loss):
    if not 0 <= pump_ratio < 1:
        raise InvalidPumpRatio(f"pump ratio must lie in [0, 1), got {pump_ratio}")
    if not 0 <= loss < 1:
        raise InvalidEta(f"loss must lie in [0, 1), got {loss}")


def supermode_variances(lambdas, lambda0, pump_ratio, loss=0.0):
    """Per-mode ``(V_x, V_p)`` below threshold after uniform loss.

    Each supermode is a degenerate OPO with gain ``g = r |Lambda_k| / Lambda_0``;
    the squeezed variance is ``((1 - g)/(1 + g))^2``, the conjugate one its
    inverse.  Modes with positive ``Lambda_k`` are squeezed in ``x``.
    """
    _check_pump_and_loss(pump_ratio, loss)
    lambdas = np.asarray(lambdas, dtype=float)
    g = pump_ratio * np.abs(lambdas) / lambda0
    if np.any(g >= 1):
        raise InvalidEigenvalue("a supermode is at or above threshold")
    sq = ((1 - g) / (1 + g)) ** 2
    eta = 1.0 - loss
    sq, anti = eta * sq + loss, eta / sq + loss
    x_sq = lambdas > 0
    return np.where(x_sq, sq, anti), np.where(x_sq, anti, sq)


def supermode_covariance(lambdas, lambda0, pump_ratio, loss=0.0):
    """Diagonal covariance of independent supermodes (the supermode basis)."""
    vx, vp = supermode_variances(lambdas, lambda0, pump_ratio, loss)
    return np.diag(np.concatenate([vx, vp]))


def simulate_output_covariance(modes, pump_ratio, loss=0.0, loss_profile=None):
    """Grid-basis covariance of the SPOPO output below threshold.

    Args:
        modes (SupermodeSet): squeezed supermodes; other grid directions are vacuum.
        pump_ratio (float): pump amplitude relative to threshold, in ``[0, 1)``.
        loss (float): uniform loss applied to every supermode.
        loss_profile (array, optional): extra spectrally dependent
            transmission, one value per grid point.

    Returns:
        ``2M x 2M`` covariance in the grid basis.
    """
    X = np.asarray(modes.modes, dtype=float)
    gram = X @ X.T
    if np.max(np.abs(gram - np.eye(len(X)))) > 1e-8:
        raise DimensionMismatch("supermodes are not orthonormal")
    vx, vp = supermode_variances(modes.lambdas, modes.lambda0, pump_ratio, loss)
    M = X.shape[1]
    cov_x = np.eye(M) + (X.T * (vx - 1)) @ X
    cov_p = np.eye(M) + (X.T * (vp - 1)) @ X
    if loss_profile is not None:
        t = np.asarray(loss_profile, dtype=float)
        if t.shape != (M,) or np.any(t < 0) or np.any(t > 1):
            raise InvalidEta("loss_profile must hold one transmission in [0, 1] per grid point")
        d = np.sqrt(t)
        cov_x = d[:, None] * cov_x * d[None, :] + np.diag(1 - t)
        cov_p = d[:, None] * cov_p * d[None, :] + np.diag(1 - t)
    return block_covariance(cov_x, cov_p)


def pump_ratio_for_squeezing(squeezing_db, lam_ratio=1.0):
    """Pump ratio giving ``squeezing_db`` on a mode with ``|Lambda_k|/Lambda_0 = lam_ratio``."""
    root = np.sqrt(10 ** (squeezing_db / 10.0))
    g = (1 - root) / (1 + root)
    return g / lam_ratio


def tune_pump_and_loss(lambdas, lambda0, max_squeezing_db, target_purity):
    """Find ``(pump_ratio, loss)`` so the supermode state hits both targets.

    ``max_squeezing_db`` is the lossy variance of the strongest mode and
    ``target_purity`` the purity of the product state of all ``lambdas``.
    """
    v_target = 10 ** (max_squeezing_db / 10.0)
    top = np.max(np.abs(lambdas)) / lambda0

    def pump_for(loss):
        eta = 1 - loss
        v0 = (v_target - loss) / eta
        return pump_ratio_for_squeezing(10 * np.log10(v0), top)

    def gap(loss):
        cov = supermode_covariance(lambdas, lambda0, pump_for(loss), loss)
        return purity(cov) - target_purity

    lo, hi = 0.0, v_target * (1 - 1e-9)
    if gap(lo) < 0:
        raise InvalidSpec("target purity unreachable even without loss")
    loss = brentq(gap, lo, hi, xtol=1e-14)
    return pump_for(loss), loss


@dataclass(frozen=True)
class PixelBasis:
    """Disjoint spectral bands of a Gaussian (or flat) local oscillator.

    Attributes:
        edges: ``(n_pixels, 2)`` band limits in detuning (rad/s), increasing.
        lo_width: LO amplitude width ``s`` in ``exp(-w^2/2s^2)``; ``None`` is flat.
        window: ``(low, high)`` detuning interval the LO is confined to.
        gap_fraction: fraction of LO energy falling in the gaps.
    """

    edges: np.ndarray
    lo_width: float | None
    window: tuple
    gap_fraction: float = 0.0

    @property
    def n_pixels(self):
        return len(self.edges)

    def _energy(self, lo, hi):
        if self.lo_width is None:
            return hi - lo
        s = self.lo_width
        return 0.5 * np.sqrt(np.pi) * s * (erf(hi / s) - erf(lo / s))

    def _amplitude_integral(self, lo, hi):
        if self.lo_width is None:
            return hi - lo
        s = self.lo_width
        return np.sqrt(np.pi / 2) * s * (erf(hi / (s * np.sqrt(2))) - erf(lo / (s * np.sqrt(2))))

    @property
    def band_powers(self):
        """Relative LO energy in each band (sums to ``1 - gap_fraction``)."""
        total = self._energy(*self.window)
        return np.array([self._energy(lo, hi) for lo, hi in self.edges]) / total

    def lo_spectrum(self, grid):
        grid = np.asarray(grid, dtype=float)
        if self.lo_width is None:
            return np.ones_like(grid)
        return np.exp(-(grid**2) / (2 * self.lo_width**2))

    def overlaps(self, grid):
        """Overlaps ``W[j, m]`` of pixel mode ``j`` with grid cell ``m``.

        Grid samples are treated as orthonormal box functions of width ``dw``.
        """
        grid = _check_grid(grid)
        dw = grid[1] - grid[0]
        left, right = grid - dw / 2, grid + dw / 2
        W = np.zeros((self.n_pixels, grid.size))
        for j, (lo, hi) in enumerate(self.edges):
            a, b = np.maximum(left, lo), np.minimum(right, hi)
            inside = b > a
            norm = np.sqrt(self._energy(lo, hi))
            W[j, inside] = self._amplitude_integral(a[inside], b[inside]) / (norm * np.sqrt(dw))
        return W


def _check_edges(edges):
    edges = np.asarray(edges, dtype=float)
    if edges.ndim != 2 or edges.shape[1] != 2 or np.any(edges[:, 1] <= edges[:, 0]):
        raise BandOverlap("band edges must be (low, high) pairs with low < high")
    order = np.argsort(edges[:, 0])
    edges = edges[order]
    if np.any(edges[1:, 0] < edges[:-1, 1]):
        raise BandOverlap("spectral bands intersect")
    return edges


def equal_energy_pixels(n_pixels, gap_fraction, lo_width, window):
    """Split the LO energy inside ``window`` into equal bands separated by gaps."""
    if n_pixels < 1:
        raise ValueError("need at least one pixel")
    if not 0 <= gap_fraction < 1 or (n_pixels == 1 and gap_fraction):
        raise BandOverlap(f"invalid gap fraction {gap_fraction}")
    lo, hi = window
    band = (1 - gap_fraction) / n_pixels
    gap = gap_fraction / (n_pixels - 1) if n_pixels > 1 else 0.0
    cuts = []
    for j in range(n_pixels):
        start = j * (band + gap)
        cuts.append((start, start + band))
    if lo_width is None:
        def inverse(f):
            return lo + f * (hi - lo)
    else:
        s = lo_width
        e_lo, e_hi = erf(lo / s), erf(hi / s)

        def inverse(f):
            return s * erfinv(e_lo + f * (e_hi - e_lo))
    edges = np.array([[inverse(a), inverse(b)] for a, b in cuts])
    edges[0, 0], edges[-1, 1] = lo, hi
    return PixelBasis(_check_edges(edges), lo_width, (lo, hi), gap_fraction)


def pixels_from_edges(edges, lo_width, window=None):
    edges = _check_edges(edges)
    if window is None:
        window = (edges[0, 0], edges[-1, 1])
    basis = PixelBasis(edges, lo_width, tuple(window))
    gap = 1.0 - basis.band_powers.sum()
    return PixelBasis(edges, lo_width, tuple(window), float(gap))


def grid_window(grid):
    grid = np.asarray(grid)
    dw = grid[1] - grid[0]
    return (float(grid[0] - dw / 2), float(grid[-1] + dw / 2))


def project_to_pixels(cov_grid, basis, grid, transmission=None):
    """Covariance seen by homodyne detection with each pixel mode as LO.

    Spectral content of the pixel modes that is not represented on the grid
    is vacuum, so ``cov_pix = W cov W^T + (I - W W^T)`` per quadrature.
    ``transmission`` optionally applies a per-pixel detection efficiency.
    """
    W = basis.overlaps(grid)
    M = W.shape[1]
    cov_grid = np.asarray(cov_grid, dtype=float)
    if cov_grid.shape != (2 * M, 2 * M):
        raise DimensionMismatch(f"grid covariance {cov_grid.shape} does not match a {M}-point grid")
    T = np.zeros((2 * basis.n_pixels, 2 * M))
    T[: basis.n_pixels, :M] = W
    T[basis.n_pixels :, M:] = W
    out = T @ cov_grid @ T.T + np.eye(2 * basis.n_pixels) - T @ T.T
    if transmission is not None:
        t = np.asarray(transmission, dtype=float)
        if t.shape != (basis.n_pixels,) or np.any(t < 0) or np.any(t > 1):
            raise InvalidEta("transmission must hold one value in [0, 1] per pixel")
        d = np.sqrt(np.concatenate([t, t]))
        out = d[:, None] * out * d[None, :] + np.diag(1 - np.concatenate([t, t]))
    return 0.5 * (out + out.T)


@dataclass(frozen=True)
class SimulationSettings:
    pump_ratio: float = 0.2
    loss: float = 0.25
    n_supermodes: int = 25
    grid_points: int = 128
    span_fwhm: float = 3.0
    n_pixels: int = 8
    gap_fraction: float = 0.07
    center_wavelength: float = 795e-9


@dataclass(frozen=True)
class SimulationResult:
    spec: PumpCrystalSpec
    settings: SimulationSettings
    coupling: CouplingMatrix
    supermodes: SupermodeSet
    cov_grid: np.ndarray
    pixels: PixelBasis
    cov_pixels: np.ndarray

    @property
    def grid(self):
        return self.coupling.grid


def simulate(spec, settings=None, pixels=None, lo_fwhm=None):
    """Full pipeline: coupling matrix, supermodes, output state, pixel projection."""
    settings = settings or SimulationSettings()
    grid = frequency_grid(spec, settings.grid_points, settings.span_fwhm, lo_fwhm)
    L = build_coupling_matrix(spec, grid)
    modes = diagonalize_coupling(L, settings.n_supermodes)
    cov_grid = simulate_output_covariance(modes, settings.pump_ratio, settings.loss)
    if pixels is None:
        lo_width = (lo_fwhm / FWHM_PER_WIDTH) if lo_fwhm else supermode_width(spec)
        pixels = equal_energy_pixels(settings.n_pixels, settings.gap_fraction, lo_width, grid_window(grid))
    cov_pix = project_to_pixels(cov_grid, pixels, grid)
    return SimulationResult(spec, settings, L, modes, cov_grid, pixels, cov_pix)


# --- JSON interfaces -------------------------------------------------------


def spec_from_dict(doc):
    """Parse the spec-file document into ``(PumpCrystalSpec, SimulationSettings)``."""
    try:
        crystal = doc["crystal"]
        spec = PumpCrystalSpec(
            tau_p=float(doc["tau_p_fs"]) * 1e-15,
            omega_fsr=2 * np.pi * float(doc["rep_rate_mhz"]) * 1e6,
            crystal_length=float(crystal["l_mm"]) * 1e-3,
            kp_prime=float(crystal["kp_prime"]),
            ks_prime=float(crystal["ks_prime"]),
            ks_double_prime=float(crystal["ks_dprime"]),
        )
    except KeyError as exc:
        raise InvalidSpec(f"spec file lacks field {exc.args[0]!r}") from None
    defaults = SimulationSettings()
    settings = SimulationSettings(
        pump_ratio=float(doc.get("pump_ratio", defaults.pump_ratio)),
        loss=float(doc.get("loss", defaults.loss)),
        n_supermodes=int(doc.get("n_supermodes", defaults.n_supermodes)),
        grid_points=int(doc.get("grid_points", defaults.grid_points)),
        span_fwhm=float(doc.get("span_fwhm", defaults.span_fwhm)),
        center_wavelength=float(doc.get("center_wavelength_nm", defaults.center_wavelength * 1e9)) * 1e-9,
    )
    spec.check()
    _check_pump_and_loss(settings.pump_ratio, settings.loss)
    return spec, settings


def spec_to_dict(spec, settings=None):
    settings = settings or SimulationSettings()
    return {
        "tau_p_fs": spec.tau_p * 1e15,
        "rep_rate_mhz": spec.omega_fsr / (2 * np.pi * 1e6),
        "crystal": {
            "l_mm": spec.crystal_length * 1e3,
            "kp_prime": spec.kp_prime,
            "ks_prime": spec.ks_prime,
            "ks_dprime": spec.ks_double_prime,
        },
        "pump_ratio": settings.pump_ratio,
        "loss": settings.loss,
        "n_supermodes": settings.n_supermodes,
        "grid_points": settings.grid_points,
        "span_fwhm": settings.span_fwhm,
        "center_wavelength_nm": settings.center_wavelength * 1e9,
    }


def load_spec(path):
    with open(path) as fh:
        return spec_from_dict(json.load(fh))


def detuning_from_wavelength(wavelength, center_wavelength):
    return 2 * np.pi * C_LIGHT * (1.0 / np.asarray(wavelength) - 1.0 / center_wavelength)


def wavelength_from_detuning(detuning, center_wavelength):
    return 2 * np.pi * C_LIGHT / (2 * np.pi * C_LIGHT / center_wavelength + np.asarray(detuning))


def pixels_from_dict(doc, spec, grid):
    """Pixel basis from its JSON document.

    Either ``band_edges_nm`` (explicit ``[low, high]`` wavelength pairs) or
    ``n_pixels`` with ``gap_fraction`` (equal-energy split) must be given.
    ``lo_fwhm_nm`` sets the LO intensity FWHM; by default the LO matches the
    leading supermode.
    """
    center = float(doc.get("center_wavelength_nm", 795.0)) * 1e-9
    if "lo_fwhm_nm" in doc and doc["lo_fwhm_nm"] is not None:
        half = 0.5 * float(doc["lo_fwhm_nm"]) * 1e-9
        w = detuning_from_wavelength([center - half, center + half], center)
        lo_width = abs(w[0] - w[1]) / FWHM_PER_WIDTH
    elif doc.get("flat_lo"):
        lo_width = None
    else:
        lo_width = supermode_width(spec)
    if doc.get("band_edges_nm"):
        nm = np.asarray(doc["band_edges_nm"], dtype=float) * 1e-9
        det = detuning_from_wavelength(nm, center)
        edges = np.sort(det, axis=1)
        return pixels_from_edges(edges, lo_width, grid_window(grid))
    return equal_energy_pixels(int(doc["n_pixels"]), float(doc.get("gap_fraction", 0.0)), lo_width, grid_window(grid))


def pixels_to_dict(basis, center_wavelength=795e-9):
    nm = wavelength_from_detuning(basis.edges, center_wavelength) * 1e9
    return {
        "n_pixels": basis.n_pixels,
        "gap_fraction": basis.gap_fraction,
        "center_wavelength_nm": center_wavelength * 1e9,
        "band_edges_nm": np.sort(nm, axis=1).tolist(),
    }
