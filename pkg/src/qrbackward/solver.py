"""Backward Euler march of the regularized system, and a forward reference solver.

Each backward step solves, for both species independently,

    (I - Dbar dt Lap_h) w_k = w_{k+1} - dt F_ell(x, t_{k+1}, u_{k+1}, v_{k+1}) - dt P w_{k+1}

where ``Lap_h`` is the three-point Laplacian with Dirichlet zeros. The
coefficient ``Dbar``, the cut-off source and the stabilized operator ``P`` are
all frozen at the known level ``k + 1``, so every step is one tridiagonal
solve per species.
"""

from dataclasses import dataclass
import math

import numpy as np

from .kernels import thomas_solve
from .params import cutoff_radius
from .problems import cutoff_apply
from .regops import OperatorKind, OperatorVariant, StabilizedOperator


class DivergenceError(RuntimeError):
    """A non-finite value appeared while marching; ``level`` is the offending index."""

    def __init__(self, level, message="non-finite values in solution"):
        super().__init__(f"level {level}: {message}")
        self.level = level


@dataclass(frozen=True)
class SchemeConfig:
    grid: object
    K: int
    T: float = 1.0

    def __post_init__(self):
        if self.K < 1:
            raise ValueError(f"need K >= 1 time levels, got {self.K}")
        if self.T <= 0:
            raise ValueError(f"final time must be positive, got {self.T}")

    @property
    def dt(self):
        return self.T / self.K

    @property
    def alpha_bar(self):
        return self.dt / self.grid.dx**2

    def time(self, k):
        return k * self.dt


@dataclass(frozen=True)
class StateField:
    u: np.ndarray
    v: np.ndarray
    k: int


@dataclass
class Trajectory:
    """Levels ``0..K`` stored as ``(K + 1, M + 1)`` arrays indexed by level."""

    u: np.ndarray
    v: np.ndarray
    cfg: SchemeConfig

    def level(self, k):
        return StateField(self.u[k], self.v[k], k)

    def __len__(self):
        return self.u.shape[0]

    @property
    def times(self):
        return self.cfg.dt * np.arange(len(self))


@dataclass(frozen=True)
class TridiagonalSystem:
    lower: np.ndarray
    diag: np.ndarray
    upper: np.ndarray

    def dense(self):
        n = self.diag.size
        A = np.diag(self.diag)
        A[np.arange(1, n), np.arange(n - 1)] = self.lower[1:]
        A[np.arange(n - 1), np.arange(1, n)] = self.upper[:-1]
        return A

    def solve(self, rhs):
        return thomas_solve(self.lower, self.diag, self.upper, rhs)

    def is_diagonally_dominant(self):
        off = np.abs(self.lower) + np.abs(self.upper)
        off[0] = abs(self.upper[0])
        off[-1] = abs(self.lower[-1])
        if self.diag.size == 1:
            off[0] = 0.0
        return bool(np.all(self.diag > off))


def assemble_block(D_bar, alpha_bar, M, allow_zero=False):
    """``(M - 1)``-unknown block with diagonal ``1 + 2 Dbar alpha`` and off-diagonals ``-Dbar alpha``.

    ``Dbar <= 0`` is rejected unless ``allow_zero`` is set, in which case
    exactly zero is accepted (the block degenerates to the identity).
    """
    if alpha_bar <= 0:
        raise ValueError(f"alpha_bar must be positive, got {alpha_bar}")
    if D_bar < 0 or (D_bar == 0 and not allow_zero):
        raise ValueError(f"effective diffusion must be positive, got {D_bar}")
    n = M - 1
    if n < 1:
        raise ValueError(f"need M >= 2, got {M}")
    off = np.full(n, -D_bar * alpha_bar)
    return TridiagonalSystem(lower=off.copy(), diag=np.full(n, 1 + 2 * D_bar * alpha_bar), upper=off)


def _check_dirichlet(w, name):
    if w[0] != 0.0 or w[-1] != 0.0:
        raise ValueError(f"{name} must vanish at both endpoints")


def _sources(case, x, t, u, v, ell):
    if math.isinf(ell):
        return case.F(x, t, u, v), case.G(x, t, u, v)
    return cutoff_apply(case.F, ell, x, t, u, v), cutoff_apply(case.G, ell, x, t, u, v)


def _solve_interior(system, rhs):
    out = np.zeros(rhs.size)
    out[1:-1] = system.solve(rhs[1:-1])
    return out


def default_variant(case, kind=OperatorKind.TRUNCATION):
    return OperatorVariant(kind, case.Mbar)


def step_backward(state, case, params, cfg, variant, operator=None):
    """One level ``k + 1 -> k`` of the regularized backward march."""
    grid = cfg.grid
    if operator is None:
        operator = StabilizedOperator(variant, grid, params.lam)
    k1 = state.k
    if k1 < 1:
        raise ValueError(f"cannot step below level 0 (state at level {k1})")
    t1 = cfg.time(k1)
    u1, v1 = state.u, state.v

    Db1 = case.D1.effective(u1, grid)
    Db2 = case.D2.effective(v1, grid)
    ell = cutoff_radius(t1, params, case.lipschitz_inverse) if t1 < params.T else math.inf
    fu, fv = _sources(case, grid.x, t1, u1, v1, ell)

    dt = cfg.dt
    rhs_u = u1 - dt * fu - dt * operator(u1)
    rhs_v = v1 - dt * fv - dt * operator(v1)
    u0 = _solve_interior(assemble_block(Db1, cfg.alpha_bar, grid.M, allow_zero=True), rhs_u)
    v0 = _solve_interior(assemble_block(Db2, cfg.alpha_bar, grid.M, allow_zero=True), rhs_v)
    if not (np.all(np.isfinite(u0)) and np.all(np.isfinite(v0))):
        raise DivergenceError(k1 - 1)
    return StateField(u0, v0, k1 - 1)


def solve_backward(terminal, case, params, cfg, variant=None):
    """March from the terminal fields at level ``K`` down to level 0."""
    variant = default_variant(case) if variant is None else variant
    u_T, v_T = (np.asarray(w, dtype=float) for w in terminal)
    _check_dirichlet(u_T, "terminal u")
    _check_dirichlet(v_T, "terminal v")
    K, n_pts = cfg.K, cfg.grid.M + 1
    U = np.empty((K + 1, n_pts))
    V = np.empty((K + 1, n_pts))
    U[K], V[K] = u_T, v_T
    operator = StabilizedOperator(variant, cfg.grid, params.lam)
    state = StateField(u_T, v_T, K)
    for k in range(K - 1, -1, -1):
        state = step_backward(state, case, params, cfg, variant, operator=operator)
        U[k], V[k] = state.u, state.v
    return Trajectory(U, V, cfg)


def forward_solve(initial, case, cfg):
    """Implicit Euler forward march of the unregularized system (verification only).

    Diffusion is implicit at the new level; the rate ``D`` and the sources are
    taken at the known level, with sources evaluated at the new time.
    """
    grid = cfg.grid
    u0, v0 = (np.asarray(w, dtype=float) for w in initial)
    _check_dirichlet(u0, "initial u")
    _check_dirichlet(v0, "initial v")
    K, n_pts = cfg.K, grid.M + 1
    U = np.empty((K + 1, n_pts))
    V = np.empty((K + 1, n_pts))
    U[0], V[0] = u0, v0
    dt = cfg.dt
    for k in range(K):
        t_new = cfg.time(k + 1)
        u, v = U[k], V[k]
        fu, fv = case.F(grid.x, t_new, u, v), case.G(grid.x, t_new, u, v)
        A1 = assemble_block(case.D1.evaluate(u, grid), cfg.alpha_bar, grid.M)
        A2 = assemble_block(case.D2.evaluate(v, grid), cfg.alpha_bar, grid.M)
        U[k + 1] = _solve_interior(A1, u + dt * fu)
        V[k + 1] = _solve_interior(A2, v + dt * fv)
        if not (np.all(np.isfinite(U[k + 1])) and np.all(np.isfinite(V[k + 1]))):
            raise DivergenceError(k + 1)
    return Trajectory(U, V, cfg)


def pick_time_index(t_eps, cfg):
    """Smallest ``k`` with ``k dt >= t_eps``."""
    if not 0 < t_eps < cfg.T:
        raise ValueError(f"t_eps must lie in (0, T), got {t_eps}")
    k = max(1, math.ceil(t_eps / cfg.dt))
    # undo float overshoot such as 0.27 / 0.01 = 27.000000000000004
    while k > 1 and (k - 1) * cfg.dt >= t_eps:
        k -= 1
    return k
