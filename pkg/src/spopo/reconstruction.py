"""Covariance reconstruction from band-resolved homodyne noise powers.

A measurement set holds normalized noise variances for every single band and
every pair of bands, in both quadratures.  Lighting two bands ``i`` and ``j``
together measures the combined mode with LO amplitudes ``sqrt(P_i)`` and
``sqrt(P_j)``, whose variance is

    v_ij = (P_i v_i + P_j v_j + 2 sqrt(P_i P_j) c_ij) / (P_i + P_j)

so the cross covariance ``c_ij`` follows by inversion.  Band indices are
1-based in files and records, 0-based in matrices.
"""

import json
import logging
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .config import DEFAULT_TOLERANCES
from .errors import (
    DegenerateBasis,
    DimensionMismatch,
    IncompleteSet,
    InvalidEta,
    NonPositiveInput,
    SpopoError,
    UnphysicalWarning,
    ZeroVariance,
)
from .gaussian import as_covariance, block_covariance, n_modes, validate_covariance, xp_blocks

log = logging.getLogger(__name__)

QUADRATURES = ("x", "p")


@dataclass(frozen=True)
class BandMeasurement:
    """Normalized noise variance of one band or one pair of bands."""

    bands: tuple
    quadrature: str
    variance_mean: float
    variance_sigma: float = 0.0
    n_samples: int = 1

    def __post_init__(self):
        bands = tuple(int(b) for b in np.atleast_1d(self.bands))
        object.__setattr__(self, "bands", bands)
        if len(bands) not in (1, 2):
            raise DimensionMismatch(f"a record names one band or a pair, got {bands}")
        if len(bands) == 2 and bands[0] == bands[1]:
            raise DimensionMismatch(f"pair record repeats band {bands[0]}")
        if min(bands) < 1:
            raise DimensionMismatch("band indices are 1-based")
        if self.quadrature not in QUADRATURES:
            raise ValueError(f"quadrature must be 'x' or 'p', got {self.quadrature!r}")
        if not self.variance_mean > 0:
            raise NonPositiveInput(f"variance of {self.quadrature}{list(bands)} must be positive")
        if not self.variance_sigma >= 0:
            raise NonPositiveInput(f"sigma of {self.quadrature}{list(bands)} must be non-negative")

    @property
    def key(self):
        return (tuple(sorted(self.bands)), self.quadrature)

    def to_dict(self):
        return {
            "bands": list(self.bands),
            "quadrature": self.quadrature,
            "variance_mean": float(self.variance_mean),
            "variance_sigma": float(self.variance_sigma),
            "n_samples": int(self.n_samples),
        }


def required_keys(n_bands):
    """All ``(bands, quadrature)`` keys a complete set must contain."""
    keys = []
    for q in QUADRATURES:
        keys += [((i,), q) for i in range(1, n_bands + 1)]
        keys += [((i, j), q) for i, j in combinations(range(1, n_bands + 1), 2)]
    return keys


@dataclass(frozen=True)
class MeasurementSet:
    n_bands: int
    band_powers: np.ndarray
    records: tuple
    eta: float | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        powers = np.asarray(self.band_powers, dtype=float)
        if powers.shape != (self.n_bands,):
            raise DimensionMismatch(f"expected {self.n_bands} band powers, got {powers.shape}")
        if np.any(powers <= 0):
            raise NonPositiveInput("band powers must be positive")
        object.__setattr__(self, "band_powers", powers)
        object.__setattr__(self, "records", tuple(self.records))
        for rec in self.records:
            if max(rec.bands) > self.n_bands:
                raise DimensionMismatch(f"record {rec.key} exceeds {self.n_bands} bands")
        if self.eta is not None and not 0 < self.eta <= 1:
            raise InvalidEta(f"eta must lie in (0, 1], got {self.eta}")

    def lookup(self):
        """Records keyed by ``(sorted bands, quadrature)``; later duplicates win."""
        return {rec.key: rec for rec in self.records}

    def missing(self):
        table = self.lookup()
        return [k for k in required_keys(self.n_bands) if k not in table]

    def ordered_records(self):
        """Records in canonical order; raises :class:`IncompleteSet` if any is absent."""
        missing = self.missing()
        if missing:
            raise IncompleteSet(missing)
        table = self.lookup()
        return [table[k] for k in required_keys(self.n_bands)]

    def to_dict(self):
        doc = {"n_bands": self.n_bands, "band_powers": self.band_powers.tolist()}
        if self.eta is not None:
            doc["eta"] = float(self.eta)
        if self.metadata:
            doc["metadata"] = self.metadata
        doc["records"] = [rec.to_dict() for rec in self.records]
        return doc

    @classmethod
    def from_dict(cls, doc):
        try:
            records = [
                BandMeasurement(
                    tuple(r["bands"]),
                    r["quadrature"],
                    float(r["variance_mean"]),
                    float(r.get("variance_sigma", 0.0)),
                    int(r.get("n_samples", 1)),
                )
                for r in doc["records"]
            ]
            return cls(int(doc["n_bands"]), doc["band_powers"], records, doc.get("eta"), doc.get("metadata", {}))
        except KeyError as exc:
            raise DimensionMismatch(f"measurement document lacks field {exc.args[0]!r}") from None


def save_measurements(path, mset):
    with open(path, "w") as fh:
        json.dump(mset.to_dict(), fh, indent=2)
        fh.write("\n")


def load_measurements(path):
    with open(path) as fh:
        return MeasurementSet.from_dict(json.load(fh))


def cross_covariance(v_sum, v_i, v_j, P_i, P_j):
    """Cross covariance ``<x_i x_j>`` from single-band and combined-band variances."""
    if min(v_sum, v_i, v_j) <= 0:
        raise NonPositiveInput("variances must be positive")
    if min(P_i, P_j) <= 0:
        raise NonPositiveInput("band powers must be positive")
    tot = P_i + P_j
    return (v_sum - P_i / tot * v_i - P_j / tot * v_j) * tot / (2 * np.sqrt(P_i * P_j))


def combined_variance(c_ij, v_i, v_j, P_i, P_j):
    """Forward model: variance with both bands lit, given their covariance."""
    return (P_i * v_i + P_j * v_j + 2 * np.sqrt(P_i * P_j) * c_ij) / (P_i + P_j)


def _pair_index(n):
    i, j = np.array(list(combinations(range(n), 2)), dtype=int).reshape(-1, 2).T
    return i, j


def _assemble_blocks(values, powers):
    """Vectorized assembly from values in canonical record order."""
    n = len(powers)
    n_pairs = n * (n - 1) // 2
    per_q = n + n_pairs
    i, j = _pair_index(n)
    Pi, Pj = powers[i], powers[j]
    tot = Pi + Pj
    blocks = []
    for q in range(2):
        chunk = values[q * per_q : (q + 1) * per_q]
        single, pair = chunk[:n], chunk[n:]
        c = (pair - Pi / tot * single[i] - Pj / tot * single[j]) * tot / (2 * np.sqrt(Pi * Pj))
        block = np.diag(single)
        block[i, j] = c
        block[j, i] = c
        blocks.append(block)
    return block_covariance(*blocks)


def _correct_values(values, eta):
    return (values - (1 - eta)) / eta


def assemble_covariance(mset, loss_order="none", eta=None, tol=None):
    """Block-diagonal covariance from a complete measurement set.

    Args:
        mset (MeasurementSet): complete set of singles and pairs.
        loss_order (str): ``"none"`` leaves the data as measured, ``"after"``
            corrects the assembled matrix and ``"before"`` corrects each
            record first.  Both corrections give the same matrix.
        eta (float, optional): transmission; defaults to ``mset.eta``.

    Emits :class:`UnphysicalWarning` when the result violates the
    uncertainty relation.
    """
    values = np.array([rec.variance_mean for rec in mset.ordered_records()])
    return _assemble_values(values, mset, loss_order, eta, tol, warn=True)


def _resolve_eta(mset, loss_order, eta):
    if loss_order not in ("none", "before", "after"):
        raise ValueError(f"loss_order must be 'none', 'before' or 'after', got {loss_order!r}")
    if loss_order == "none":
        return None
    eta = mset.eta if eta is None else eta
    if eta is None:
        raise InvalidEta("loss correction requested but no transmission given")
    if not 0 < eta <= 1:
        raise InvalidEta(f"eta must lie in (0, 1], got {eta}")
    return eta


def _assemble_values(values, mset, loss_order, eta, tol, warn):
    eta = _resolve_eta(mset, loss_order, eta)
    if loss_order == "before":
        values = _correct_values(values, eta)
    cov = _assemble_blocks(values, mset.band_powers)
    if loss_order == "after":
        cov = (cov - (1 - eta) * np.eye(len(cov))) / eta
    if warn:
        _warn_if_unphysical(cov, tol)
    return cov


def _warn_if_unphysical(cov, tol):
    report = validate_covariance(cov, tol, warn=False)
    if not report.physical:
        warnings.warn(
            f"reconstructed covariance is unphysical (min eig {report.min_eig:.3g})", UnphysicalWarning, stacklevel=3
        )
    return report


def generate_measurements(cov, band_powers, sigma=0.0, n_samples=1, eta=None, metadata=None):
    """Noiseless measurement set reproducing the x and p blocks of ``cov``.

    ``x``-``p`` correlations are not measurable this way and are ignored.
    ``sigma`` is attached to every record as its standard deviation.
    """
    cov = as_covariance(cov)
    n = n_modes(cov)
    powers = np.asarray(band_powers, dtype=float)
    if powers.shape != (n,):
        raise DimensionMismatch(f"need {n} band powers, got {powers.shape}")
    records = []
    for q, block in zip(QUADRATURES, xp_blocks(cov)):
        for i in range(n):
            records.append(BandMeasurement((i + 1,), q, block[i, i], sigma, n_samples))
        for i, j in combinations(range(n), 2):
            v = combined_variance(block[i, j], block[i, i], block[j, j], powers[i], powers[j])
            records.append(BandMeasurement((i + 1, j + 1), q, v, sigma, n_samples))
    return MeasurementSet(n, powers, records, eta, metadata or {})


def correlation_matrix(cov):
    """Normalized correlations of the ``x`` and ``p`` blocks, vacuum removed.

    ``C_ij = c_ij / sqrt(c_ii c_jj) - delta_ij / c_ii``: zero for vacuum, and
    positive on the diagonal for excess noise.
    """
    cov = as_covariance(cov)
    out = []
    for block in xp_blocks(cov):
        d = np.diag(block)
        if np.any(d <= 0):
            raise ZeroVariance("a band has zero or negative variance")
        s = np.sqrt(d)
        out.append(block / np.outer(s, s) - np.diag(1.0 / d))
    return tuple(out)


def _check_eta(eta):
    if not 0 < eta <= 1:
        raise InvalidEta(f"eta must lie in (0, 1], got {eta}")


def loss_apply(cov, eta):
    """State after a uniform transmission ``eta``."""
    _check_eta(eta)
    cov = as_covariance(cov)
    return eta * cov + (1 - eta) * np.eye(len(cov))


def loss_correct(cov, eta, tol=None):
    """Undo a uniform transmission ``eta``; warns if the result is unphysical."""
    _check_eta(eta)
    cov = as_covariance(cov)
    out = (cov - (1 - eta) * np.eye(len(cov))) / eta
    _warn_if_unphysical(out, tol)
    return out


def to_db(variance):
    return 10 * np.log10(variance)


@dataclass(frozen=True)
class SqueezingSpectrum:
    """Per-mode squeezing with uncertainties.

    ``modes`` holds the supermode vectors in the pixel basis as rows.
    ``squeezing_db`` is the squeezed-quadrature level, ``antisqueezing_db``
    the conjugate one, ``quadrature`` names the squeezed quadrature.
    """

    squeezing_db: np.ndarray
    antisqueezing_db: np.ndarray
    quadrature: tuple
    modes: np.ndarray
    sigma_db: np.ndarray = None
    antisqueezing_sigma_db: np.ndarray = None

    def __post_init__(self):
        zeros = np.zeros(len(self.squeezing_db))
        if self.sigma_db is None:
            object.__setattr__(self, "sigma_db", zeros)
        if self.antisqueezing_sigma_db is None:
            object.__setattr__(self, "antisqueezing_sigma_db", zeros.copy())

    def __len__(self):
        return len(self.squeezing_db)

    def n_squeezed(self, threshold_db=-0.5):
        return int(np.sum(self.squeezing_db < threshold_db))

    def rows(self):
        """Table rows ``(index, squeezing dB, sigma dB, quadrature)``."""
        return [
            (k, float(self.squeezing_db[k]), float(self.sigma_db[k]), self.quadrature[k]) for k in range(len(self))
        ]


@dataclass(frozen=True)
class GramSchmidtResult:
    spectrum: SqueezingSpectrum
    cov_supermodes: np.ndarray
    transform: np.ndarray  # U_T: columns are supermodes in the pixel basis


def _sign_fix(vec):
    k = np.argmax(np.abs(vec))
    return vec if vec[k] >= 0 else -vec


def gram_schmidt_supermodes(cov, tol=None):
    """Decoupled supermodes of a block-diagonal covariance.

    The anti-squeezed eigenvectors of the ``x`` and ``p`` blocks are taken in
    descending order of their eigenvalue, alternating between quadratures and
    starting with the block holding the largest one, and orthogonalized in
    that order.  A candidate that is linearly dependent on the vectors already
    accepted is skipped.

    Returns:
        GramSchmidtResult: spectrum, covariance in the new basis and ``U_T``.

    Raises:
        DegenerateBasis: the candidates do not span the pixel space.
    """
    tol = tol or DEFAULT_TOLERANCES
    cov = as_covariance(cov)
    n = n_modes(cov)
    cx, cp = xp_blocks(cov)
    wx, vx = np.linalg.eigh(cx)
    wp, vp = np.linalg.eigh(cp)
    pools = {
        "x": [vx[:, k] for k in np.argsort(-wx, kind="stable")],
        "p": [vp[:, k] for k in np.argsort(-wp, kind="stable")],
    }
    turn = "x" if wx.max() >= wp.max() else "p"
    basis = []
    while len(basis) < n:
        if not pools["x"] and not pools["p"]:
            raise DegenerateBasis(f"only {len(basis)} of {n} independent supermodes found")
        pool = pools[turn] or pools["p" if turn == "x" else "x"]
        while pool:
            v = pool.pop(0)
            for b in basis:
                v = v - (b @ v) * b
            norm = np.linalg.norm(v)
            if norm > tol.gram_schmidt:
                basis.append(_sign_fix(v / norm))
                break
        turn = "p" if turn == "x" else "x"
    U = np.array(basis).T
    new = block_covariance(U.T @ cx @ U, U.T @ cp @ U)
    dx, dp = np.diag(new)[:n], np.diag(new)[n:]
    if np.any(dx <= 0) or np.any(dp <= 0):
        raise ZeroVariance("a supermode has non-positive variance")
    quad = tuple("x" if a <= b else "p" for a, b in zip(dx, dp))
    spectrum = SqueezingSpectrum(to_db(np.minimum(dx, dp)), to_db(np.maximum(dx, dp)), quad, U.T.copy())
    return GramSchmidtResult(spectrum, new, U)


# --- Monte-Carlo resampling ----------------------------------------------------


def _draw_values(means, sigmas, rng):
    values = rng.normal(means, sigmas)
    bad = values <= 0
    while np.any(bad):
        values[bad] = rng.normal(means[bad], sigmas[bad])
        bad = values <= 0
    return values


def draw_generator(seed, draw):
    """Generator owned by Monte-Carlo draw number ``draw``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(draw,)))


def draw_covariance(mset, seed, draw, loss_order="none", eta=None):
    """Covariance assembled from resampled record values of one draw."""
    records = mset.ordered_records()
    means = np.array([r.variance_mean for r in records])
    sigmas = np.array([r.variance_sigma for r in records])
    values = _draw_values(means, sigmas, draw_generator(seed, draw))
    return _assemble_values(values, mset, loss_order, eta, None, warn=False)


def _mc_chunk(args):
    means, sigmas, mset, loss_order, eta, seed, start, stop = args
    out_sq = np.full((stop - start, mset.n_bands), np.nan)
    out_anti = np.full_like(out_sq, np.nan)
    failures = []
    for k, draw in enumerate(range(start, stop)):
        values = _draw_values(means, sigmas, draw_generator(seed, draw))
        try:
            cov = _assemble_values(values, mset, loss_order, eta, None, warn=False)
            res = gram_schmidt_supermodes(cov)
        except (SpopoError, np.linalg.LinAlgError) as exc:
            failures.append((draw, f"{type(exc).__name__}: {exc}"))
            continue
        out_sq[k] = res.spectrum.squeezing_db
        out_anti[k] = res.spectrum.antisqueezing_db
    return out_sq, out_anti, failures


@dataclass(frozen=True)
class MonteCarloResult:
    """Distribution of the squeezing spectrum over resampled data sets.

    ``samples_db`` holds one row per kept draw.  ``spectrum`` carries the
    per-mode mean and standard deviation, with quadrature labels and mode
    vectors taken from the point estimate.
    """

    spectrum: SqueezingSpectrum
    point: SqueezingSpectrum
    samples_db: np.ndarray
    n_draws: int
    n_discarded: int
    seed: int


def monte_carlo_spectrum(mset, n_draws=10_000, seed=0, workers=1, loss_order="none", eta=None, chunk=500):
    """Propagate record uncertainties into the supermode squeezing spectrum.

    Every record is redrawn from a normal distribution truncated to positive
    values, the matrix is reassembled and decomposed again.  Draw ``k`` uses
    its own generator derived from ``(seed, k)``, so the result does not
    depend on ``workers`` or ``chunk``.  Draws whose assembly or
    decomposition fails are dropped and logged.
    """
    if n_draws < 1:
        raise ValueError("n_draws must be positive")
    records = mset.ordered_records()
    means = np.array([r.variance_mean for r in records])
    sigmas = np.array([r.variance_sigma for r in records])
    _resolve_eta(mset, loss_order, eta)
    point = gram_schmidt_supermodes(_assemble_values(means, mset, loss_order, eta, None, warn=False)).spectrum

    tasks = [
        (means, sigmas, mset, loss_order, eta, seed, s, min(s + chunk, n_draws)) for s in range(0, n_draws, chunk)
    ]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_mc_chunk, tasks))
    else:
        parts = [_mc_chunk(t) for t in tasks]
    sq = np.concatenate([p[0] for p in parts])
    anti = np.concatenate([p[1] for p in parts])
    failures = [f for p in parts for f in p[2]]
    for draw, msg in failures:
        log.info("draw %d discarded: %s", draw, msg)
    keep = ~np.isnan(sq[:, 0])
    sq, anti = sq[keep], anti[keep]
    if len(sq) == 0:
        raise DegenerateBasis("every Monte-Carlo draw failed")
    spectrum = SqueezingSpectrum(
        sq.mean(axis=0),
        anti.mean(axis=0),
        point.quadrature,
        point.modes,
        sq.std(axis=0),
        anti.std(axis=0),
    )
    return MonteCarloResult(spectrum, point, sq, n_draws, len(failures), seed)
