"""Numerical tolerances shared by every module.

All thresholds live in one frozen record so that a run can snapshot them
alongside its outputs.  Functions take an optional ``tol`` argument and fall
back to :data:`DEFAULT_TOLERANCES`.
"""

from dataclasses import asdict, dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    #: Heisenberg slack: min eig of (sigma + iJ) may dip this far below zero.
    eps_phys: float = 1e-9
    #: Below -eps_phys but above -warn_floor only warns (measurement noise).
    warn_floor: float = 1e-3
    #: PPT violation threshold.
    eps_ppt: float = 1e-9
    symplectic: float = 1e-10
    unitary: float = 1e-10
    #: purity above 1 + this is reported as unphysical
    purity_slack: float = 1e-6
    #: Gram-Schmidt residual norm below which a vector is considered dependent
    gram_schmidt: float = 1e-8
    #: Bloch-Messiah: singular values closer than this are paired/degenerate
    pairing: float = 1e-6
    #: Williamson: symplectic eigenvalues closer than this are degenerate
    degeneracy: float = 1e-9

    def to_dict(self):
        return asdict(self)

    def updated(self, **changes):
        return replace(self, **changes)


DEFAULT_TOLERANCES = Tolerances()
