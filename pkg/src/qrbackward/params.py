"""Noise-driven regularization parameters.

With ``beta = eps`` the decay function is
``gamma(t) = eps^{t e* / (C1 T^2)}`` where ``e* = max(theta - 1, -4 theta p)``,
so ``log gamma(T) = e* ln(eps) / (C1 T)`` is the frequency threshold.
"""

from dataclasses import asdict, dataclass, field
import math

import numpy as np
from scipy.optimize import bisect

KAPPA_EPS_CAP = 0.999


def rate_exponent(theta, p):
    return max(theta - 1.0, -4.0 * theta * p)


def observed_modes(epsilon, theta):
    """``n = floor(eps^{-2 theta})``."""
    # the tiny relative nudge keeps exact powers such as 1e-5^{-0.6} = 1000 from rounding down
    return max(1, int(math.floor(epsilon ** (-2.0 * theta) * (1 + 1e-12))))


def log_gamma(t, epsilon, theta, p, T, C1):
    return t * rate_exponent(theta, p) * math.log(epsilon) / (C1 * T**2)


def _check(epsilon, theta, p, T, C1=1.0):
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    if not 0.0 < theta < 1.0:
        raise ValueError(f"theta must lie in (0, 1), got {theta}")
    if p <= 0 or T <= 0 or C1 <= 0:
        raise ValueError("p, T and C1 must be positive")


def t_eps_slope(epsilon, theta, p, T):
    """``c`` in ``ln t + c t = 0``."""
    return rate_exponent(theta, p) * math.log(epsilon) / T


def solve_t_eps(epsilon, theta, p, T):
    """Unique root in ``(0, T)`` of ``ln t + c t`` with ``c = e* ln(eps) / T``.

    Raises ``ValueError`` if ``c <= 0``. When ``c T < -ln T`` the root lies
    beyond ``T`` and ``ValueError`` is raised as well.
    """
    _check(epsilon, theta, p, T)
    c = t_eps_slope(epsilon, theta, p, T)
    if c <= 0:
        raise ValueError(f"t_eps equation needs a positive slope, got c={c}")

    def g(t):
        return math.log(t) + c * t

    lo, hi = 1e-300, min(T, 1.0 / math.sqrt(c))
    if g(hi) < 0:
        raise ValueError(f"no root of ln t + {c} t in (0, {T})")
    root = bisect(g, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=2000)
    # bisection leaves the bracket ends; keep whichever endpoint neighbour has the smaller residual
    best = min((root, math.nextafter(root, 0), math.nextafter(root, 1)), key=lambda t: abs(g(t)))
    return best


@dataclass(frozen=True)
class RegParams:
    epsilon: float
    theta: float
    p: float
    T: float
    C1: float
    ell_floor: float
    n: int = field(init=False)
    exponent: float = field(init=False)
    lam: float = field(init=False)
    t_eps: float = field(init=False)
    kappa_eps: float = field(init=False)
    kappa_eps_capped: bool = field(init=False)

    def __post_init__(self):
        _check(self.epsilon, self.theta, self.p, self.T, self.C1)
        if self.ell_floor <= 0:
            raise ValueError(f"ell_floor must be positive, got {self.ell_floor}")
        setattr_ = object.__setattr__
        setattr_(self, "n", observed_modes(self.epsilon, self.theta))
        setattr_(self, "exponent", rate_exponent(self.theta, self.p))
        setattr_(self, "lam", log_gamma(self.T, self.epsilon, self.theta, self.p, self.T, self.C1))
        setattr_(self, "t_eps", solve_t_eps(self.epsilon, self.theta, self.p, self.T))
        raw = self.kappa(self.t_eps)
        setattr_(self, "kappa_eps", min(raw, KAPPA_EPS_CAP))
        setattr_(self, "kappa_eps_capped", raw > KAPPA_EPS_CAP)

    @property
    def beta(self):
        return self.epsilon

    def gamma(self, t):
        return math.exp(log_gamma(t, self.epsilon, self.theta, self.p, self.T, self.C1))

    def kappa(self, t):
        return self.C1 * t

    def as_dict(self):
        d = asdict(self)
        d["beta"] = self.beta
        d["gamma_T"] = self.gamma(self.T)
        return d


def select_params(epsilon, theta=0.3, p=1.0, T=1.0, C1=1.0, ell_floor=2.0):
    return RegParams(epsilon=epsilon, theta=theta, p=p, T=T, C1=C1, ell_floor=ell_floor)


def raw_cutoff_radius(t, params, lipschitz_inverse):
    """Radius from ``L(ell) = kappa(t) ln(lambda) / (8 (T - t))`` before clamping.

    ``lipschitz_inverse`` of ``None`` means the sources are solution independent
    and no cut-off is needed (infinite radius).
    """
    if t >= params.T:
        raise ValueError(f"cut-off radius is defined for t < T, got t={t}")
    if lipschitz_inverse is None:
        return math.inf
    level = params.kappa(t) * math.log(params.lam) / (8.0 * (params.T - t))
    return lipschitz_inverse(level)


def cutoff_radius(t, params, lipschitz_inverse):
    """``max(raw radius, ell_floor)``; see :func:`raw_cutoff_radius`."""
    return max(raw_cutoff_radius(t, params, lipschitz_inverse), params.ell_floor)


def predicted_rate(t, params):
    """Shape of the theoretical error bound (constants dropped).

    For ``t > 0``: ``eps^{(2t/T) min(1 - theta, 4 theta p)} lambda^{kappa(t)}``;
    at ``t = 0``: ``lambda^{kappa_eps - 1}``.
    """
    if t < 0 or t > params.T:
        raise ValueError(f"t must lie in [0, T], got {t}")
    if t == 0:
        return params.lam ** (params.kappa_eps - 1.0)
    holder = min(1.0 - params.theta, 4.0 * params.theta * params.p)
    return params.epsilon ** (2.0 * t / params.T * holder) * params.lam ** params.kappa(t)
