"""Binned white-noise observations of terminal data and their truncated reconstruction.

Noise is drawn from numpy's PCG64 generator (``numpy.random.default_rng``)
seeded with a plain integer, so every observation set replays exactly.
"""

from dataclasses import dataclass
import math

import numpy as np

from .spectral import basis_matrix, eigenvalues, synthesize


@dataclass(frozen=True)
class NoiseModel:
    epsilon: float
    seed: int = 0

    def __post_init__(self):
        # epsilon = 0 is accepted for noiseless verification runs
        if not 0.0 <= self.epsilon < 1.0:
            raise ValueError(f"noise amplitude must lie in [0, 1), got {self.epsilon}")


@dataclass(frozen=True)
class ObservationSet:
    epsilon: float
    n: int
    u_obs: np.ndarray
    v_obs: np.ndarray
    seed: int

    def __post_init__(self):
        if self.n < 1 or len(self.u_obs) != self.n or len(self.v_obs) != self.n:
            raise ValueError("observation sequences must both have length n >= 1")


@dataclass(frozen=True)
class MSEEstimate:
    mean: float
    stderr: float
    samples: int


def standard_normals(seed, n, channels=2):
    """The ``(channels, n)`` block of N(0, 1) draws used for one observation set."""
    return np.random.default_rng(seed).standard_normal((channels, n))


def observe(true_u_coeffs, true_v_coeffs, noise, n):
    """Noisy coefficients ``<u_f, phi_j> + eps g_j`` for ``j = 1..n``.

    The u and v channels get independent draws (rows 0 and 1 of the same
    seeded block).
    """
    true_u = np.asarray(true_u_coeffs, dtype=float)
    true_v = np.asarray(true_v_coeffs, dtype=float)
    if n < 1:
        raise ValueError(f"need at least one observed mode, got n={n}")
    if n > min(true_u.size, true_v.size):
        raise ValueError(
            f"n={n} exceeds the available true coefficients ({true_u.size}, {true_v.size})"
        )
    g = standard_normals(noise.seed, n)
    return ObservationSet(
        epsilon=noise.epsilon,
        n=n,
        u_obs=true_u[:n] + noise.epsilon * g[0],
        v_obs=true_v[:n] + noise.epsilon * g[1],
        seed=noise.seed,
    )


def reconstruct(obs, grid, j_max=None):
    """Truncated Fourier reconstructions ``(U_f, V_f)`` sampled on ``grid``."""
    return synthesize(obs.u_obs, grid, j_max=j_max), synthesize(obs.v_obs, grid, j_max=j_max)


def mse_bound(epsilon, n, sobolev_norm_sq_2p, mu_n, p):
    """Upper bound ``eps^2 n + ||u_f||^2_{H^{2p}} / mu_n^{2p}`` on the reconstruction MSE."""
    if mu_n <= 0:
        raise ValueError(f"mu_n must be positive, got {mu_n}")
    if n < 1 or p <= 0:
        raise ValueError("need n >= 1 and p > 0")
    return epsilon**2 * n + sobolev_norm_sq_2p / mu_n ** (2 * p)


def nth_eigenvalue(n, iv):
    return float(eigenvalues(n, iv))


def empirical_mse(true_uf, epsilon, n, samples, base_seed, grid):
    """Monte Carlo estimate of ``E ||U_f^{eps,n} - u_f||^2``.

    ``true_uf`` is sampled on ``grid``; its coefficients and all distances use
    the trapezoid rule on that grid, which must resolve ``n`` modes
    (``grid.M - 1 >= n``). Sample ``s`` uses seed ``base_seed + s``.
    """
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    if grid.max_mode < n:
        raise ValueError(f"grid with M={grid.M} cannot resolve n={n} modes")
    true_uf = np.asarray(true_uf, dtype=float)
    w = grid.trapezoid_weights
    phi = basis_matrix(np.arange(1, n + 1), grid.x, grid.interval)
    coeffs = phi @ (w * true_uf)
    noise = np.stack([standard_normals(base_seed + s, n)[0] for s in range(samples)])
    recon = (coeffs + epsilon * noise) @ phi
    recon[:, 0] = recon[:, -1] = 0.0
    sq = ((recon - true_uf) ** 2) @ w
    mean = math.fsum(sq) / samples
    stderr = float(np.std(sq, ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    return MSEEstimate(mean=mean, stderr=stderr, samples=samples)
