"""Spectral perturbing operators and the stabilized operators they induce.

Every variant is diagonal in the Dirichlet eigenbasis, i.e. a multiplier on
the coefficients. With ``lam = log gamma(T, beta)`` the stabilized multipliers
(``Mbar * Laplacian + perturbation``) are

* truncation: ``-Mbar mu`` for ``mu <= lam``, zero above;
* classical: ``-Mbar mu (1 - Mbar mu / (4 lam))`` on every mode;
* hybrid: ``Mbar^2 mu^2 / (4 lam) - Mbar mu`` for ``mu <= lam^(1/4)``, zero above.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .spectral import basis_matrix, eigenvalues


class OperatorKind(str, Enum):
    TRUNCATION = "truncation"
    CLASSICAL = "classical"
    HYBRID = "hybrid"


@dataclass(frozen=True)
class OperatorVariant:
    kind: OperatorKind
    Mbar: float

    def __post_init__(self):
        object.__setattr__(self, "kind", OperatorKind(self.kind))
        if self.Mbar <= 0:
            raise ValueError(f"Mbar must be positive, got {self.Mbar}")

    @property
    def C0bar(self):
        if self.kind is OperatorKind.TRUNCATION:
            return self.Mbar
        if self.kind is OperatorKind.CLASSICAL:
            return self.Mbar**2 / 4
        return self.Mbar**2 / 4 + self.Mbar

    @property
    def source_order(self):
        """Sobolev order of the source space (2 for H^2, 4 for H^4)."""
        return 4 if self.kind is OperatorKind.CLASSICAL else 2

    @property
    def C1(self):
        return self.Mbar if self.kind is OperatorKind.TRUNCATION else 1.0


@dataclass(frozen=True)
class FrequencyThreshold:
    lam: float

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"frequency threshold must be positive, got {self.lam}")


def frequency_threshold(params):
    """Threshold ``lam = e* ln(eps) / (C1 T)`` from a :class:`~qrbackward.params.RegParams`."""
    if not 0 < params.epsilon < 1:
        raise ValueError(f"epsilon must lie in (0, 1), got {params.epsilon}")
    return FrequencyThreshold(params.lam)


def _lam(threshold):
    lam = threshold.lam if isinstance(threshold, FrequencyThreshold) else float(threshold)
    if lam <= 0:
        raise ValueError(f"frequency threshold must be positive, got {lam}")
    return lam


def admissible_set(threshold, interval):
    """Mode indices ``j >= 1`` with ``mu_j <= lam``, ascending (possibly empty)."""
    lam = _lam(threshold)
    j_top = int(np.floor(np.sqrt(lam) * interval.length / np.pi)) + 1
    modes = np.arange(1, j_top + 1)
    return modes[eigenvalues(modes, interval) <= lam]


def perturbing_multipliers(variant, mu, threshold):
    lam = _lam(threshold)
    mu = np.asarray(mu, dtype=float)
    Mbar = variant.Mbar
    if variant.kind is OperatorKind.TRUNCATION:
        return np.where(mu > lam, Mbar * mu, 0.0)
    if variant.kind is OperatorKind.CLASSICAL:
        return Mbar**2 / (4 * lam) * mu**2
    return np.where(mu <= lam**0.25, Mbar**2 / (4 * lam) * mu**2, Mbar * mu)


def stabilized_multipliers(variant, mu, threshold):
    """Multipliers of ``Mbar * Laplacian + perturbing operator``."""
    lam = _lam(threshold)
    mu = np.asarray(mu, dtype=float)
    Mbar = variant.Mbar
    if variant.kind is OperatorKind.TRUNCATION:
        return np.where(mu <= lam, -Mbar * mu, 0.0)
    if variant.kind is OperatorKind.CLASSICAL:
        return -Mbar * mu * (1.0 - Mbar / (4 * lam) * mu)
    return np.where(mu <= lam**0.25, Mbar**2 / (4 * lam) * mu**2 - Mbar * mu, 0.0)


def apply_perturbing(variant, coeffs, threshold, interval):
    coeffs = np.asarray(coeffs, dtype=float)
    mu = eigenvalues(np.arange(1, coeffs.size + 1), interval)
    return perturbing_multipliers(variant, mu, threshold) * coeffs


def apply_stabilized_coeffs(variant, coeffs, threshold, interval):
    coeffs = np.asarray(coeffs, dtype=float)
    mu = eigenvalues(np.arange(1, coeffs.size + 1), interval)
    return stabilized_multipliers(variant, mu, threshold) * coeffs


class StabilizedOperator:
    """The stabilized operator on grid functions as a dense ``(M+1, M+1)`` matrix.

    Application is trapezoid projection onto modes ``1..j_max``, scaling by the
    variant multipliers and synthesis back onto the grid. Modes with a zero
    multiplier are skipped.
    """

    def __init__(self, variant, grid, threshold, j_max=None):
        self.variant = variant
        self.grid = grid
        self.lam = _lam(threshold)
        j_max = grid.max_mode if j_max is None else min(j_max, grid.max_mode)
        modes = np.arange(1, j_max + 1)
        mult = stabilized_multipliers(variant, eigenvalues(modes, grid.interval), self.lam)
        keep = mult != 0.0
        self.modes = modes[keep]
        self.multipliers = mult[keep]
        phi = basis_matrix(self.modes, grid.x, grid.interval)
        self.matrix = (phi.T * self.multipliers) @ (phi * grid.trapezoid_weights)
        self.matrix[[0, -1], :] = 0.0

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        if u.shape[0] != self.grid.M + 1:
            raise ValueError(f"expected {self.grid.M + 1} samples, got {u.shape[0]}")
        return self.matrix @ u


def apply_stabilized(variant, u, grid, threshold, j_max=None):
    return StabilizedOperator(variant, grid, threshold, j_max=j_max)(u)
