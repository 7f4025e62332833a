"""Self-checks shared by the ``verify`` subcommand and the test suite."""

import math

import numpy as np

from . import problems
from .params import select_params
from .regops import (
    OperatorKind,
    OperatorVariant,
    apply_perturbing,
    apply_stabilized_coeffs,
    stabilized_multipliers,
)
from .solver import SchemeConfig, forward_solve
from .spectral import Grid1D, eigenvalues, project, sobolev_norm_sq
from .statdata import empirical_mse, mse_bound

CHECK_EPSILONS = (1e-3, 1e-4, 1e-5)


def forward_error(case, M, K):
    """Discrete L2 error of ``(u, v)`` at ``t = T`` for a forward run from the exact initial state."""
    grid = Grid1D(case.interval, M)
    cfg = SchemeConfig(grid, K, case.T)
    u0 = case.u_exact(grid.x, 0.0) * np.ones_like(grid.x)
    v0 = case.v_exact(grid.x, 0.0) * np.ones_like(grid.x)
    u0[[0, -1]] = v0[[0, -1]] = 0.0
    traj = forward_solve((u0, v0), case, cfg)
    w = grid.trapezoid_weights
    du = traj.u[-1] - case.u_exact(grid.x, case.T)
    dv = traj.v[-1] - case.v_exact(grid.x, case.T)
    return math.sqrt(float(w @ (du * du) + w @ (dv * dv)))


def forward_refinement(case, M=400, Ks=(10, 20, 40, 80)):
    """Errors and successive reduction factors under ``dt -> dt / 2`` at fixed fine ``M``."""
    errors = [forward_error(case, M, K) for K in Ks]
    factors = [a / b for a, b in zip(errors, errors[1:])]
    return errors, factors


def random_coefficients(rng, count, J):
    """``count`` random sequences of length ``J`` with randomly decaying spectra."""
    decay = rng.uniform(0.0, 3.0, size=(count, 1))
    scale = np.arange(1, J + 1) ** -decay
    return rng.standard_normal((count, J)) * scale


def operator_bound_violations(variant, lam, coeffs, interval, tol=1e-8):
    """Counts of sequences violating the stabilized and perturbing norm bounds.

    Returns ``(stabilized_violations, perturbing_violations, worst_stabilized_ratio)``
    where the ratio is ``||P u|| / (C1 lam ||u||)``.
    """
    stab_bad = pert_bad = 0
    worst = 0.0
    for c in coeffs:
        Pu = np.linalg.norm(apply_stabilized_coeffs(variant, c, lam, interval))
        norm = np.linalg.norm(c)
        bound = variant.C1 * lam * norm
        worst = max(worst, Pu / bound if bound > 0 else 0.0)
        if Pu > bound + tol:
            stab_bad += 1
        Qu = np.linalg.norm(apply_perturbing(variant, c, lam, interval))
        if Qu > variant.C0bar * math.sqrt(sobolev_norm_sq(c, variant.source_order, interval)) + tol:
            pert_bad += 1
    return stab_bad, pert_bad, worst


def classical_multiplier_holds(Mbar, lam, mu_max=1e4, points=20001):
    """One-sided bound ``mu (1 - Mbar mu / (4 lam)) <= lam / Mbar`` on a ``mu`` sweep."""
    mu = np.linspace(0.0, mu_max, points)
    m = mu * (1 - Mbar / (4 * lam) * mu)
    return bool(np.all(m <= lam / Mbar + 1e-12))


def reconstruction_bound_check(case, epsilon, batches=20, samples=500, theta=0.3, p=1.0, base_seed=0, grid_factor=2):
    """Fraction of batches with ``empirical_mse <= bound + 3 SE`` for both terminal fields."""
    params = select_params(epsilon, theta, p, case.T, C1=case.Mbar)
    n = params.n
    grid = Grid1D(case.interval, grid_factor * n + 1)
    ok = 0
    total = 0
    for field in (case.u_f, case.v_f):
        true = field(grid.x) * np.ones_like(grid.x)
        true[[0, -1]] = 0.0
        coeffs = project(field, np.arange(1, grid.max_mode + 1), grid)
        norm = sobolev_norm_sq(coeffs, 2 * p, case.interval)
        bound = mse_bound(epsilon, n, norm, float(eigenvalues(n, case.interval)), p)
        for b in range(batches):
            est = empirical_mse(true, epsilon, n, samples, base_seed + b * samples, grid)
            ok += est.mean <= bound + 3 * est.stderr
            total += 1
    return ok / total


def run_checks(quick=False):
    results = []

    case1 = problems.test1()
    errors, factors = forward_refinement(case1)
    results.append(("forward refinement test1 (factor >= 1.8)", min(factors) >= 1.8,
                    "factors " + ", ".join(f"{f:.3f}" for f in factors)))

    case2 = problems.test2()
    grid = Grid1D(case2.interval, 60)
    err_v = _forward_v_error(case2, grid, 400)
    results.append(("forward test2 v(T) (max err <= 5e-3)", err_v <= 5e-3, f"max err {err_v:.2e}"))

    rng = np.random.default_rng(0)
    count = 200 if quick else 1000
    for case in (case1, case2):
        for eps in CHECK_EPSILONS:
            lam = select_params(eps, C1=case.Mbar).lam
            J = 14
            coeffs = random_coefficients(rng, count, J)
            for kind in (OperatorKind.TRUNCATION, OperatorKind.HYBRID):
                variant = OperatorVariant(kind, case.Mbar)
                stab, pert, _ = operator_bound_violations(variant, lam, coeffs, case.interval)
                results.append((f"{kind.value} bounds {case.name} eps={eps:g}", stab == 0 and pert == 0,
                                f"violations {stab}/{pert}"))
            classical = OperatorVariant(OperatorKind.CLASSICAL, case.Mbar)
            _, pert, _ = operator_bound_violations(classical, lam, coeffs, case.interval)
            one_sided = classical_multiplier_holds(case.Mbar, lam)
            results.append((f"classical bounds {case.name} eps={eps:g}", pert == 0 and one_sided,
                            f"perturbing violations {pert}, one-sided multiplier {'ok' if one_sided else 'broken'}"))

    batches, samples = (5, 100) if quick else (20, 500)
    for case in (case1, case2):
        for eps in CHECK_EPSILONS:
            frac = reconstruction_bound_check(case, eps, batches=batches, samples=samples)
            results.append((f"reconstruction MSE bound {case.name} eps={eps:g}", frac >= 0.95,
                            f"{100 * frac:.0f}% of batches within bound"))
    return results


def _forward_v_error(case, grid, K):
    cfg = SchemeConfig(grid, K, case.T)
    u0 = case.u_exact(grid.x, 0.0) * np.ones_like(grid.x)
    v0 = case.v_exact(grid.x, 0.0) * np.ones_like(grid.x)
    u0[[0, -1]] = v0[[0, -1]] = 0.0
    traj = forward_solve((u0, v0), case, cfg)
    return float(np.max(np.abs(traj.v[-1] - case.v_exact(grid.x, case.T))))


__all__ = [
    "forward_error",
    "forward_refinement",
    "random_coefficients",
    "operator_bound_violations",
    "classical_multiplier_holds",
    "reconstruction_bound_check",
    "run_checks",
    "stabilized_multipliers",
]
