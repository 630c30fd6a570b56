"""Parameters, normalization constants and special-function plumbing.

Everything here is a closed-form function of the dimension N and the
fractional order s in (0,1).  The three kernel regimes (N above, equal to,
or below 2s) are decided once at parameter construction and drive branch
selection in the kernel modules.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import special as _spec

__all__ = [
    "Regime",
    "FracParams",
    "SpecialFunctionTable",
    "CriticalExponents",
    "normalization_a",
    "green_constant_k",
    "poisson_constant_C",
    "incomplete_kernel_integral",
    "critical_exponents",
    "dimension_reduction_ratio",
    "getoor_constant",
]


class Regime(enum.Enum):
    """Kernel regime: decides power-law vs. logarithmic vs. bounded kernels."""

    N_GT_2S = "N>2s"
    N_EQ_2S = "N=1=2s"
    N_LT_2S = "N=1<2s"


@dataclass(frozen=True)
class FracParams:
    """Dimension N >= 1 and fractional order s in (0,1).

    Invalid combinations are rejected at construction; all derived
    constants are finite and strictly positive for valid parameters.
    """

    N: int
    s: float

    def __post_init__(self):
        if not isinstance(self.N, (int, np.integer)) or isinstance(self.N, bool):
            raise ValueError(f"dimension N must be an integer, got {self.N!r}")
        if self.N < 1:
            raise ValueError(f"dimension N must be >= 1, got {self.N}")
        s = float(self.s)
        if not (0.0 < s < 1.0) or not math.isfinite(s):
            raise ValueError(f"order s must lie in (0,1), got {self.s!r}")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "s", s)

    @property
    def regime(self) -> Regime:
        if self.N > 2.0 * self.s:
            return Regime.N_GT_2S
        if self.N == 1 and self.s == 0.5:
            return Regime.N_EQ_2S
        return Regime.N_LT_2S

    def __str__(self):
        return f"(N={self.N}, s={self.s:g}, {self.regime.value})"


class SpecialFunctionTable:
    """Gamma/Beta evaluations plus the bump profile used for regularization.

    Backed by scipy.special; kept as an explicit surface so the contract
    (recurrence and Beta identities to 1e-12 relative) stays testable in
    one place.
    """

    #: bump chi(r) = c * exp(-1/(1-(4r-3)^2)) supported on (1/2, 1)
    BUMP_SUPPORT = (0.5, 1.0)
    BUMP_CENTER = 0.75

    def gamma(self, x):
        return _spec.gamma(x)

    def log_gamma(self, x):
        return _spec.gammaln(x)

    def beta(self, a, b):
        return _spec.beta(a, b)

    def bump(self, r):
        """Unnormalized bump profile on (1/2, 1); zero elsewhere."""
        r = np.asarray(r, dtype=float)
        t = 4.0 * r - 3.0
        inside = np.abs(t) < 1.0
        denom = np.where(inside, 1.0 - t * t, 1.0)
        out = np.where(inside, np.exp(-1.0 / denom), 0.0)
        return float(out) if out.ndim == 0 else out

    @property
    def bump_normalization(self):
        """Constant c with integral of c*bump over (1/2,1) equal to 1."""
        return _bump_norm()


_BUMP_NORM_CACHE = []


def _bump_norm():
    if not _BUMP_NORM_CACHE:
        # C^infty integrand, flat at both endpoints: high-order GL converges fast
        nodes, weights = np.polynomial.legendre.leggauss(200)
        r = 0.75 + 0.25 * nodes
        t = 4.0 * r - 3.0
        vals = np.exp(-1.0 / (1.0 - t * t))
        _BUMP_NORM_CACHE.append(1.0 / (0.25 * np.dot(weights, vals)))
    return _BUMP_NORM_CACHE[0]


def normalization_a(params: FracParams) -> float:
    """Constant in front of the singular integral defining (-Delta)^s."""
    N, s = params.N, params.s
    return (
        s
        * (1.0 - s)
        * math.pi ** (-N / 2.0)
        * 4.0**s
        * _spec.gamma(N / 2.0 + s)
        / _spec.gamma(2.0 - s)
    )


def green_constant_k(params: FracParams) -> float:
    """Normalization of the ball/half-space Green functions.

    2 Gamma(N/2) / (4^s pi^(N/2) Gamma(s)^2): the constant that makes the
    kernel-integral form reproduce (-Delta)^s inverses (checked against
    the singular-integral quadrature and the classical s -> 1 limit).  At
    s = 1/2 it equals pi^(-(N/2+1)) Gamma(N/2) sin(pi s).
    """
    N, s = params.N, params.s
    return (
        2.0 * _spec.gamma(N / 2.0) / (4.0**s * math.pi ** (N / 2.0) * _spec.gamma(s) ** 2)
    )


def poisson_constant_C(params: FracParams) -> float:
    """Constant making the exterior integral of the ball Poisson kernel 1."""
    N, s = params.N, params.s
    return _spec.gamma(N / 2.0) * math.sin(math.pi * s) * math.pi ** (-N / 2.0 - 1.0)


def getoor_constant(params: FracParams) -> float:
    """Value of (-Delta)^s applied to (1-|x|^2)_+^s inside the unit ball."""
    N, s = params.N, params.s
    return 4.0**s * _spec.gamma(1.0 + s) * _spec.gamma(N / 2.0 + s) / _spec.gamma(N / 2.0)


def _hyp2f1_1u_series(c, u, kmax=220):
    """2F1(1, 1/2; c; u) by its power series; u must satisfy |u| <= 0.5."""
    u = np.asarray(u, dtype=float)
    term = np.ones_like(u)
    total = np.ones_like(u)
    for k in range(kmax):
        term = term * ((0.5 + k) / (c + k)) * u
        total = total + term
        if np.all(np.abs(term) <= 1e-17 * np.abs(total)):
            break
    return total


def incomplete_kernel_integral(params: FracParams, t):
    """The kernel integral I(t) = int_0^t z^(s-1) (1+z)^(-N/2) dz.

    Monotone nondecreasing in t; converges to B(s, N/2-s) as t -> infinity
    when N > 2s.  Vectorized over t.  Branch strategy:

    * N > 2s: regularized incomplete Beta at x = t/(1+t); for x near 1 the
      complement is evaluated at u = 1/(1+t) so no precision is lost.
    * N = 1 = 2s: exact closed form 2*arcsinh(sqrt(t)).
    * N = 1 < 2s: Gauss series at small x, and the u -> 0 connection
      formula of the hypergeometric representation at large t (again with
      u = 1/(1+t) kept exact).
    """
    N, s = params.N, params.s
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0.0) or np.any(np.isnan(t_arr)):
        raise ValueError("incomplete_kernel_integral requires t >= 0")
    scalar = t_arr.ndim == 0
    t_arr = np.atleast_1d(t_arr)
    regime = params.regime

    if regime is Regime.N_EQ_2S:
        out = 2.0 * np.arcsinh(np.sqrt(t_arr))
    elif regime is Regime.N_GT_2S:
        b = N / 2.0 - s
        B = _spec.beta(s, b)
        with np.errstate(invalid="ignore"):
            x = t_arr / (1.0 + t_arr)
            u = 1.0 / (1.0 + t_arr)
        inf = np.isinf(t_arr)
        near1 = (x > 0.9) | inf
        out = np.empty_like(t_arr)
        out[~near1] = B * _spec.betainc(s, b, x[~near1])
        out[near1] = B * (1.0 - _spec.betainc(b, s, u[near1]))
        out[inf] = B
    else:  # N = 1 < 2s: diverges like t^(s-1/2)/(s-1/2) as t -> infinity
        x = t_arr / (1.0 + t_arr)
        u = 1.0 / (1.0 + t_arr)
        out = np.empty_like(t_arr)
        small = x <= 0.7
        xs = x[small]
        out[small] = np.where(
            xs > 0.0, xs**s / s * _spec.hyp2f1(s, s + 0.5, s + 1.0, xs), 0.0
        )
        if np.any(~small):
            ub = u[~small]
            b_cont = _spec.gamma(s) * _spec.gamma(0.5 - s) / _spec.gamma(0.5)
            x_pow_s = np.exp(s * np.log1p(-ub))
            out[~small] = b_cont + x_pow_s * ub ** (0.5 - s) / (s - 0.5) * _hyp2f1_1u_series(
                1.5 - s, ub
            )
    return float(out[0]) if scalar else out


@dataclass(frozen=True)
class CriticalExponents:
    """Critical powers for the half-space and full-space Liouville theorems.

    A value of None means the theorem branch imposes no upper bound on q
    ("unbounded"); it is never encoded as a sentinel float.
    """

    halfspace: float | None
    fullspace: float | None

    @staticmethod
    def _subcritical(q: float, bound: float | None) -> bool:
        return True if bound is None else q < bound

    def halfspace_subcritical(self, q: float) -> bool:
        """True when q > 1 falls in the half-space nonexistence range."""
        return q > 1.0 and self._subcritical(q, self.halfspace)

    def fullspace_subcritical(self, q: float) -> bool:
        return q > 0.0 and self._subcritical(q, self.fullspace)


def critical_exponents(params: FracParams) -> CriticalExponents:
    """Upper exponent bounds (N-1+2s)/(N-1-2s) and (N+2s)/(N-2s)."""
    N, s = params.N, params.s
    half = (N - 1.0 + 2.0 * s) / (N - 1.0 - 2.0 * s) if N > 1.0 + 2.0 * s else None
    full = (N + 2.0 * s) / (N - 2.0 * s) if N > 2.0 * s else None
    return CriticalExponents(halfspace=half, fullspace=full)


def dimension_reduction_ratio(params: FracParams) -> float:
    """B(1/2, (N-1)/2 + s) = sqrt(pi) Gamma((N-1)/2+s) / Gamma(N/2+s).

    Equals the ratio of the singular-integral constants in dimensions N-1
    and N, and the full-line integral of (1+lambda^2)^(-N/2-s).
    """
    N, s = params.N, params.s
    if N < 2:
        raise ValueError("dimension reduction needs N >= 2")
    return math.sqrt(math.pi) * _spec.gamma((N - 1.0) / 2.0 + s) / _spec.gamma(N / 2.0 + s)
