"""Dirichlet eigenbasis of -d^2/dx^2 on an interval, plus box eigenvalues."""

from dataclasses import dataclass
from functools import cached_property
import itertools
import math

import numpy as np
from scipy.integrate import simpson


@dataclass(frozen=True)
class Interval:
    a: float = 0.0
    b: float = math.pi

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError(f"interval needs a < b, got ({self.a}, {self.b})")

    @property
    def length(self):
        return self.b - self.a


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid ``x_m = a + m dx`` for ``m = 0..M``."""

    interval: Interval
    M: int

    def __post_init__(self):
        if self.M < 2:
            raise ValueError(f"grid needs M >= 2, got {self.M}")

    @property
    def dx(self):
        return self.interval.length / self.M

    @cached_property
    def x(self):
        x = self.interval.a + self.dx * np.arange(self.M + 1)
        x[-1] = self.interval.b
        return x

    @cached_property
    def trapezoid_weights(self):
        w = np.full(self.M + 1, self.dx)
        w[0] = w[-1] = 0.5 * self.dx
        return w

    @property
    def max_mode(self):
        """Highest mode a grid function can carry without aliasing."""
        return self.M - 1


@dataclass(frozen=True)
class EigenPair:
    j: int
    mu: float
    interval: Interval

    def phi(self, x):
        return basis_matrix([self.j], np.asarray(x, dtype=float), self.interval)[0]

    __call__ = phi


@dataclass(frozen=True)
class BoxSpec:
    edges: tuple

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(float(e) for e in self.edges))
        if len(self.edges) < 1 or any(e <= 0 for e in self.edges):
            raise ValueError(f"box edges must be positive, got {self.edges}")

    @property
    def dim(self):
        return len(self.edges)


def eigenvalues(modes, iv):
    """``mu_j = (j pi / (b - a))^2`` for each mode index in ``modes``."""
    modes = np.asarray(modes, dtype=float)
    return (modes * np.pi / iv.length) ** 2


def eigenpair(j, iv=Interval()):
    if int(j) != j or j < 1:
        raise ValueError(f"mode index must be an integer >= 1, got {j}")
    j = int(j)
    return EigenPair(j=j, mu=float(eigenvalues(j, iv)), interval=iv)


def basis_matrix(modes, x, iv):
    """Rows ``phi_j(x)`` for ``j`` in ``modes``; shape ``(len(modes), len(x))``."""
    modes = np.atleast_1d(np.asarray(modes, dtype=float))
    x = np.asarray(x, dtype=float)
    scale = math.sqrt(2.0 / iv.length)
    return scale * np.sin(np.outer(modes * np.pi / iv.length, x - iv.a))


def _check_modes(j):
    modes = np.atleast_1d(np.asarray(j))
    if modes.size == 0:
        return modes.astype(int)
    if np.any(modes < 1) or np.any(modes != np.round(modes)):
        raise ValueError(f"mode indices must be integers >= 1, got {j}")
    return modes.astype(int)


def project(f, j, grid, refine=10):
    """Inner product ``<f, phi_j>``.

    A callable ``f`` is integrated with composite Simpson on a grid ``refine``
    times finer than ``grid``; a sampled ``f`` (length ``M + 1``) uses the
    trapezoid rule on ``grid`` itself. ``j`` may be a single mode or a
    sequence of modes, in which case an array is returned.
    """
    modes = _check_modes(j)
    iv = grid.interval
    if callable(f):
        xf = np.linspace(iv.a, iv.b, refine * grid.M + 1)
        vals = np.asarray(f(xf), dtype=float) * np.ones_like(xf)
        out = simpson(basis_matrix(modes, xf, iv) * vals, x=xf, axis=1)
    else:
        vals = np.asarray(f, dtype=float)
        if vals.shape != (grid.M + 1,):
            raise ValueError(f"grid function must have {grid.M + 1} samples, got shape {vals.shape}")
        out = basis_matrix(modes, grid.x, iv) @ (grid.trapezoid_weights * vals)
    return float(out[0]) if np.ndim(j) == 0 else out


def project_all(f, grid, n_modes=None, refine=10):
    """Coefficients ``<f, phi_j>`` for ``j = 1..n_modes`` (default ``M - 1``)."""
    n_modes = grid.max_mode if n_modes is None else n_modes
    return project(f, np.arange(1, n_modes + 1), grid, refine=refine)


def synthesize(coeffs, grid, j_max=None):
    """Grid samples of ``sum_j c_j phi_j`` with ``c_j = coeffs[j - 1]``.

    Modes above ``j_max`` (default ``M - 1``) are dropped; they alias on the grid.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    j_max = grid.max_mode if j_max is None else j_max
    coeffs = coeffs[:j_max]
    out = np.zeros(grid.M + 1)
    if coeffs.size:
        out = coeffs @ basis_matrix(np.arange(1, coeffs.size + 1), grid.x, grid.interval)
    out[0] = out[-1] = 0.0
    return out


def sobolev_norm_sq(coeffs, s, iv=Interval()):
    """Spectral seminorm ``sum_j mu_j^s c_j^2``."""
    if s < 0:
        raise ValueError(f"smoothness order must be >= 0, got {s}")
    coeffs = np.asarray(coeffs, dtype=float)
    mu = eigenvalues(np.arange(1, coeffs.size + 1), iv)
    return float(np.sum(mu**s * coeffs**2))


def box_eigenvalues(box, count):
    """The ``count`` smallest Dirichlet eigenvalues of a box, with multiplicity."""
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    if not isinstance(box, BoxSpec):
        box = BoxSpec(tuple(box))
    freq = np.pi / np.asarray(box.edges)
    # a cube of side N holds >= count multi-indices, so its count-th value bounds the answer
    side = math.ceil(count ** (1.0 / box.dim))
    cube = sorted(
        float(np.sum((freq * np.array(idx)) ** 2))
        for idx in itertools.product(range(1, side + 1), repeat=box.dim)
    )
    bound = cube[count - 1]
    base = float(np.sum(freq**2))
    limits = [int(math.floor(math.sqrt(bound - base + f * f) / f + 1e-9)) for f in freq]
    axes = [(freq[i] * np.arange(1, limits[i] + 1)) ** 2 for i in range(box.dim)]
    grid = np.zeros(1)
    for ax in axes:
        grid = (grid[:, None] + ax[None, :]).ravel()
    return sorted(grid.tolist())[:count]
