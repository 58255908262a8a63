"""Special functions used by the cost/latency formulas.

Real-argument harmonic numbers, Gamma/Beta with negative non-integer
parameters, the incomplete Beta function extended to non-positive second
parameter, and exact/approximate expectations over a binomial index.

All functions are pure and reject NaN at the boundary.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np
from scipy import integrate
from scipy import special as sp

from .errors import DegenerateError, DivergenceError, DomainError, PoleError

__all__ = [
    "harmonic",
    "gen_harmonic2",
    "gamma_fn",
    "beta",
    "inc_beta",
    "reg_inc_beta",
    "gamma_ratio_sum",
    "binom_expect",
    "approx_binom_harmonic",
    "approx_binom_reg_inc_beta",
]

_EULER_GAMMA = float(np.euler_gamma)


def _check_finite(**kwargs: float) -> None:
    for name, value in kwargs.items():
        if not math.isfinite(value):
            raise DomainError(f"{name} must be finite, got {value!r}")


def harmonic(x: float) -> float:
    """Harmonic number H_x for real x >= 0.

    For integer x this equals sum(1/i for i in 1..x); for real x it is the
    analytic continuation psi(x+1) + gamma, which agrees with the integral
    of (1 - t**x) / (1 - t) over [0, 1].
    """
    _check_finite(x=x)
    if x < 0:
        raise DomainError(f"harmonic requires x >= 0, got {x}")
    if x == 0:
        return 0.0
    return float(sp.digamma(x + 1.0)) + _EULER_GAMMA


def gen_harmonic2(n: int) -> float:
    """Generalized harmonic number of order two: sum(1/i**2 for i in 1..n)."""
    if n != int(n) or n < 1:
        raise DomainError(f"gen_harmonic2 requires an integer n >= 1, got {n}")
    n = int(n)
    # zeta(2) - psi'(n+1) avoids an O(n) loop for large n.
    return float(math.pi**2 / 6.0 - sp.polygamma(1, n + 1))


def _is_pole(x: float) -> bool:
    return x <= 0 and x == math.floor(x)


def gamma_fn(x: float) -> float:
    """Gamma(x) for real x, including negative non-integer arguments."""
    _check_finite(x=x)
    if _is_pole(x):
        raise PoleError(f"Gamma has a pole at {x}")
    return float(sp.gamma(x))


def _log_gamma(x: float) -> tuple[float, float]:
    """(log|Gamma(x)|, sign of Gamma(x)) with pole check."""
    if _is_pole(x):
        raise PoleError(f"Gamma has a pole at {x}")
    return float(sp.gammaln(x)), float(sp.gammasgn(x))


def gamma_ratio(num: float, den: float) -> float:
    """Gamma(num) / Gamma(den), evaluated in log space to avoid overflow."""
    _check_finite(num=num, den=den)
    ln_n, sg_n = _log_gamma(num)
    ln_d, sg_d = _log_gamma(den)
    return sg_n * sg_d * math.exp(ln_n - ln_d)


def beta(m: float, n: float) -> float:
    """Complete Beta function B(m, n) = Gamma(m)Gamma(n)/Gamma(m+n).

    Negative non-integer parameters are allowed through the Gamma relation
    (analytic continuation); any Gamma pole raises :class:`PoleError`.
    """
    _check_finite(m=m, n=n)
    ln_m, sg_m = _log_gamma(m)
    ln_n, sg_n = _log_gamma(n)
    ln_mn, sg_mn = _log_gamma(m + n)
    return sg_m * sg_n * sg_mn * math.exp(ln_m + ln_n - ln_mn)


def _inc_beta_n0_integer_m(q: float, m: int) -> float:
    # B(q; m, 0) = -log(1-q) - sum_{j=1}^{m-1} q^j / j for integer m >= 1.
    acc = -math.log1p(-q)
    powq = 1.0
    for j in range(1, m):
        powq *= q
        acc -= powq / j
    return acc


def inc_beta(q: float, m: float, n: float) -> float:
    """Incomplete Beta function B(q; m, n) = integral of u^(m-1) (1-u)^(n-1).

    Supports n <= 0 (the integrand then diverges at u = 1, so q must be < 1).
    For n > 0 the regularized continued-fraction evaluation is used; for
    n <= 0 the integral is computed by adaptive quadrature after the
    substitution u = 1 - exp(-v), which removes the endpoint steepness.
    """
    _check_finite(q=q, m=m, n=n)
    if not 0.0 <= q <= 1.0:
        raise DomainError(f"inc_beta requires q in [0, 1], got {q}")
    if m <= 0:
        raise DomainError(f"inc_beta requires m > 0, got {m}")
    if q == 0.0:
        return 0.0
    if n > 0:
        return float(sp.betainc(m, n, q)) * beta(m, n)
    if q == 1.0:
        raise DivergenceError("B(q; m, n) diverges at q = 1 for n <= 0")
    if n == 0 and m == int(m):
        return _inc_beta_n0_integer_m(q, int(m))
    v_hi = -math.log1p(-q)

    def integrand(v: float) -> float:
        return (-math.expm1(-v)) ** (m - 1.0) * math.exp(-n * v)

    value, _ = integrate.quad(integrand, 0.0, v_hi, limit=200)
    return float(value)


def reg_inc_beta(q: float, m: float, n: float) -> float:
    """Regularized incomplete Beta I(q; m, n) = B(q; m, n) / B(m, n)."""
    _check_finite(q=q, m=m, n=n)
    if not 0.0 <= q <= 1.0:
        raise DomainError(f"reg_inc_beta requires q in [0, 1], got {q}")
    if m > 0 and n > 0:
        return float(sp.betainc(m, n, q))
    denom = beta(m, n)
    if denom == 0.0 or not math.isfinite(denom):
        raise DegenerateError(f"B({m}, {n}) is zero or non-finite")
    return inc_beta(q, m, n) / denom


def gamma_ratio_sum(n: int, beta_param: float) -> float:
    """Closed form of sum(Gamma(m - b) / Gamma(m) for m in 0..n), b in (0,1).

    Equals Gamma(n + 1 - b) / ((1 - b) Gamma(n)); the m = 0 term is zero
    because 1/Gamma(0) = 0.
    """
    if n != int(n) or n < 1:
        raise DomainError(f"gamma_ratio_sum requires an integer n >= 1, got {n}")
    _check_finite(beta_param=beta_param)
    if not 0.0 < beta_param < 1.0:
        raise DomainError(f"gamma_ratio_sum requires beta in (0, 1), got {beta_param}")
    return gamma_ratio(n + 1 - beta_param, float(n)) / (1.0 - beta_param)


def binom_expect(f: Callable[[int], float], k: int, q: float) -> float:
    """E[f(R)] for R ~ Binomial(k, q), summed over the exact PMF.

    PMF weights are evaluated in log space, which stays stable for large k.
    """
    if k != int(k) or k < 0:
        raise DomainError(f"binom_expect requires an integer k >= 0, got {k}")
    _check_finite(q=q)
    if not 0.0 <= q <= 1.0:
        raise DomainError(f"binom_expect requires q in [0, 1], got {q}")
    k = int(k)
    if q == 0.0:
        return _checked_eval(f, 0)
    if q == 1.0:
        return _checked_eval(f, k)
    r = np.arange(k + 1)
    log_pmf = (
        sp.gammaln(k + 1)
        - sp.gammaln(r + 1)
        - sp.gammaln(k - r + 1)
        + r * math.log(q)
        + (k - r) * math.log1p(-q)
    )
    pmf = np.exp(log_pmf)
    values = np.array([_checked_eval(f, int(ri)) for ri in r])
    return float(np.dot(pmf, values))


def _checked_eval(f: Callable[[int], float], r: int) -> float:
    value = float(f(r))
    if not math.isfinite(value):
        raise DomainError(f"f({r}) evaluated to a non-finite value {value!r}")
    return value


def approx_binom_harmonic(n: float, k: int, q: float) -> float:
    """First-moment approximation E[H_{n-R}] ~ H_{n-kq} for R ~ Binomial(k, q).

    Exact at q = 0 and q = 1.
    """
    _check_finite(n=n, q=q)
    if n - k * q < 0:
        raise DomainError(f"approx_binom_harmonic requires n - k*q >= 0, got {n - k * q}")
    return harmonic(n - k * q)


def approx_binom_reg_inc_beta(z: float, x: float, y: float, k: int, q: float) -> float:
    """First-moment approximation E[I(z; x-R, y)] ~ I(z; x-kq, y).

    Exact at q = 0 and q = 1.
    """
    _check_finite(z=z, x=x, y=y, q=q)
    if x - k * q <= 0:
        raise DomainError(f"approx_binom_reg_inc_beta requires x - k*q > 0, got {x - k * q}")
    return reg_inc_beta(z, x - k * q, y)
