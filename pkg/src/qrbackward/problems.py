"""Problem definitions: diffusion descriptors, cut-off nonlinearities and the two
manufactured test cases on ``(0, pi)`` with ``T = 1``.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .kernels import windowed_logistic_sum
from .spectral import Interval

PI = math.pi


@dataclass(frozen=True)
class DiffusionSpec:
    """Either a constant rate or ``d + int_{u in [0,1]} |u (1 - u)| dx``.

    ``lower``/``upper`` are the bounds ``M_lower <= D <= Mbar``; ``M1`` is the
    essential sup used for ``Dbar = Mbar - D in (Mbar - M1, Mbar)``.
    """

    kind: str
    value: float
    lower: float
    upper: float
    M1: float

    def __post_init__(self):
        if self.kind not in ("constant", "nonlocal"):
            raise ValueError(f"unknown diffusion kind {self.kind!r}")
        if not 0 < self.lower <= self.M1 < self.upper:
            raise ValueError(
                f"need 0 < lower <= M1 < Mbar, got ({self.lower}, {self.M1}, {self.upper})"
            )
        # a constant rate may sit anywhere up to Mbar; Dbar = 0 still gives a solvable step
        if self.kind == "constant" and not self.lower <= self.value <= self.upper:
            raise ValueError(f"constant rate {self.value} outside [{self.lower}, {self.upper}]")

    @classmethod
    def constant(cls, value, lower, upper, M1):
        return cls("constant", value, lower, upper, M1)

    @classmethod
    def nonlocal_(cls, base_rate, lower, upper, M1):
        return cls("nonlocal", base_rate, lower, upper, M1)

    def evaluate(self, u, grid):
        if self.kind == "constant":
            return self.value
        return nonlocal_diffusion(u, self, grid)

    def effective(self, u, grid):
        """``Dbar = Mbar - D``, the coefficient of the regularized system."""
        return self.upper - self.evaluate(u, grid)


def nonlocal_diffusion(u, spec, grid):
    """Midpoint-rule value ``d + dx * sum_{m=1}^{M-1} |u_m (1 - u_m)|`` over ``u_m in [0, 1]``."""
    u = np.asarray(u, dtype=float)
    if u.shape != (grid.M + 1,):
        raise ValueError(f"expected {grid.M + 1} samples, got shape {u.shape}")
    return spec.value + grid.interval.length / grid.M * windowed_logistic_sum(u[1:-1])


@dataclass(frozen=True)
class NonlinearitySpec:
    """A source ``func(x, t, u, v)`` with Lipschitz profile ``L(ell)``.

    ``lipschitz_inverse`` maps a bound on ``L`` back to a radius; ``None``
    marks a source that does not depend on ``(u, v)``.
    """

    func: object
    lipschitz: object = None
    lipschitz_inverse: object = None

    def __call__(self, x, t, u=None, v=None):
        return self.func(x, t, u, v)

    @property
    def solution_dependent(self):
        return self.lipschitz_inverse is not None


def cutoff_apply(F, ell, x, t, u, v):
    """Evaluate the cut-off source ``F_ell``, elementwise.

    The branch is chosen on ``max(u, v)`` (signed): above ``ell`` both
    arguments become ``ell``, below ``-ell`` both become ``-ell``, otherwise
    they are passed through unchanged. Note that a pair such as
    ``(-10 ell, 0)`` falls in the pass-through branch.
    """
    if not ell > 0:
        raise ValueError(f"cut-off radius must be positive, got {ell}")
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    top = np.maximum(u, v)
    uu = np.where(top > ell, ell, np.where(top < -ell, -ell, u))
    vv = np.where(top > ell, ell, np.where(top < -ell, -ell, v))
    return F(x, t, uu, vv)


@dataclass(frozen=True)
class ManufacturedCase:
    name: str
    u_exact: object
    v_exact: object
    F: NonlinearitySpec
    G: NonlinearitySpec
    D1: DiffusionSpec
    D2: DiffusionSpec
    Mbar: float
    M1: float
    constants: dict = field(default_factory=dict)
    interval: Interval = Interval(0.0, PI)
    T: float = 1.0
    ell_floor: float = 2.0

    def u_f(self, x):
        return self.u_exact(x, self.T)

    def v_f(self, x):
        return self.v_exact(x, self.T)

    @property
    def lipschitz_inverse(self):
        if self.F.solution_dependent or self.G.solution_dependent:
            return self.F.lipschitz_inverse or self.G.lipschitz_inverse
        return None


TEST1_CONSTANTS = {
    "D1": 0.5,
    "D2": 1.0,
    "Mbar": 1.0,
    "M1": 0.75,
    "M_lower": 0.5,
    "r_u": 1.0,
    "r_v": 1.0,
    "K_u": 1.0,
    "K_v": 1.0,
    "b_u": 2.0,
    "b_v": 0.5,
}

TEST2_CONSTANTS = {
    "d1": 0.01,
    "d2": 0.05,
    "Mbar": 4.0,
    "M1": 3.5,
    "M_lower": 0.01,
}


def test1(**overrides):
    """Lotka-Volterra competition with constant diffusion.

    ``u = exp(-t) sin x``, ``v = t^2 x (pi - x)``; ``L(ell) = 1 + 3 ell``.
    """
    c = {**TEST1_CONSTANTS, **overrides}
    r_u, r_v, K_u, K_v, b_u, b_v = (c[k] for k in ("r_u", "r_v", "K_u", "K_v", "b_u", "b_v"))

    def u_exact(x, t):
        return np.exp(-t) * np.sin(x)

    def v_exact(x, t):
        return t**2 * x * (PI - x)

    def F1(x, t):
        e = np.exp(-t) * np.sin(x)
        return e * (e + 2 * t**2 * x * (PI - x) - 1.5)

    def F2(x, t):
        q = x * (PI - x)
        return 2 * t**2 + t * q * (2 - t + t**3 * q + t / 2 * np.exp(-t) * np.sin(x))

    def F(x, t, u, v):
        return r_u * u * (1 - u / K_u - b_u * v / K_u) + F1(x, t)

    def G(x, t, u, v):
        return r_v * v * (1 - v / K_v - b_v * u / K_v) + F2(x, t)

    # sup |v| on [0, 1] x [0, pi] is pi^2 / 4; the floor keeps F_ell = F on the true solution
    floor = max(2.0, PI**2 / 4)
    return ManufacturedCase(
        name="test1",
        u_exact=u_exact,
        v_exact=v_exact,
        F=NonlinearitySpec(F, lambda ell: 1 + 3 * ell, lambda y: (y - 1) / 3),
        G=NonlinearitySpec(G, lambda ell: 1 + 3 * ell, lambda y: (y - 1) / 3),
        D1=DiffusionSpec.constant(c["D1"], c["M_lower"], c["Mbar"], c["M1"]),
        D2=DiffusionSpec.constant(c["D2"], c["M_lower"], c["Mbar"], c["M1"]),
        Mbar=c["Mbar"],
        M1=c["M1"],
        constants=c,
        ell_floor=floor,
    )


def test2(**overrides):
    """Uncoupled nonlocal-diffusion problem with solution-independent sources.

    ``u = log(3 + t) sin^2(x) / 4``, ``v = t sin x``.
    """
    c = {**TEST2_CONSTANTS, **overrides}

    def u_exact(x, t):
        return 0.25 * np.log(3 + t) * np.sin(x) ** 2

    def v_exact(x, t):
        return t * np.sin(x)

    def F(x, t, u=None, v=None):
        lg = np.log(3 + t)
        return (
            np.sin(x) ** 2 / (4 * (3 + t))
            - (1 / 25 + PI / 2 * lg * (1 - 3 / 16 * lg)) * lg * np.cos(2 * x) / 8
        )

    def G(x, t, u=None, v=None):
        return (1 - t * (t * (PI * t - 4) / 2 - 1 / 20)) * np.sin(x)

    return ManufacturedCase(
        name="test2",
        u_exact=u_exact,
        v_exact=v_exact,
        F=NonlinearitySpec(F, lambda ell: 0.0),
        G=NonlinearitySpec(G, lambda ell: 0.0),
        D1=DiffusionSpec.nonlocal_(c["d1"], c["M_lower"], c["Mbar"], c["M1"]),
        D2=DiffusionSpec.nonlocal_(c["d2"], c["M_lower"], c["Mbar"], c["M1"]),
        Mbar=c["Mbar"],
        M1=c["M1"],
        constants=c,
        ell_floor=2.0,
    )


CASES = {"test1": test1, "test2": test2}


def get_case(name, **overrides):
    try:
        return CASES[name](**overrides)
    except KeyError:
        raise ValueError(f"unknown case {name!r}; choose from {sorted(CASES)}") from None
