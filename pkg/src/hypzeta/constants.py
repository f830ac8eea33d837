"""Normalization constants of the determinant metrics and their growth.

Every constant here funnels through zeta'(-1), so that number is computed
once at import of the default bundle, at 50 significant digits, by two
independent routes that must agree:

* Glaisher route: zeta'(-1) = 1/12 - log A with
  log A = (euler_gamma + log 2 pi)/12 - zeta'(2)/(2 pi^2), where zeta'(2)
  comes from an Euler-Maclaurin accelerated series written here;
* direct route: mpmath's derivative of the zeta function at -1.

The finite sums over j <= 2k use exact compensated summation (math.fsum)
for single arguments and 80-bit cumulative sums for sweeps; arguments
beyond k = 1e5 are refused rather than silently degraded.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from mpmath import mp
from scipy.special import gammaln

from .errors import ResourceLimitError
from .hyperbolic import SurfaceSignature

#: the two zeta'(-1) routes must agree at least this well
ZETA_PRIME_ROUTE_TOL = 1e-30

#: refuse finite j-sums beyond this weight
MAX_WEIGHT = 100_000

LOG_2PI = math.log(2.0 * math.pi)
LOG_2 = math.log(2.0)
LOG_PI = math.log(math.pi)


def _zeta_prime_2_euler_maclaurin(n_cut: int = 40, terms: int = 14):
    """zeta'(2) = -sum log n / n^2, accelerated with Euler-Maclaurin tails.

    Derivatives of f(x) = x^{-2} log x are x^{-2-m} (a_m log x + b_m) with
    (a, b, p) -> (-p a, a - p b, p + 1).
    """
    total = mp.mpf(0)
    for n in range(2, n_cut):
        total += mp.log(n) / mp.mpf(n) ** 2
    log_n = mp.log(n_cut)
    tail = (log_n + 1) / n_cut + log_n / mp.mpf(n_cut) ** 2 / 2
    a, b, p = mp.mpf(1), mp.mpf(0), 2
    derivs = []
    for _ in range(2 * terms):
        a, b, p = -p * a, a - p * b, p + 1
        derivs.append((a, b, p))
    corr = mp.mpf(0)
    for j in range(1, terms + 1):
        am, bm, pm = derivs[2 * j - 2]
        corr += (mp.bernoulli(2 * j) / mp.factorial(2 * j)
                 * mp.mpf(n_cut) ** (-pm) * (am * log_n + bm))
    return -(total + tail - corr)


def zeta_prime_minus1_routes() -> tuple[float, float]:
    """zeta'(-1) by the Glaisher route and by direct differentiation."""
    with mp.workdps(60):
        zp2 = _zeta_prime_2_euler_maclaurin()
        log_glaisher = (mp.euler + mp.log(2 * mp.pi)) / 12 - zp2 / (2 * mp.pi ** 2)
        route1 = mp.mpf(1) / 12 - log_glaisher
        route2 = mp.zeta(-1, derivative=1)
        return float(route1), float(route2)


@dataclass(frozen=True)
class ZetaSpecials:
    """The zeta data every constant needs, fixed once.

    ``zeta_minus1`` is carried as the exact rational -1/12.
    """

    zeta_prime_minus1: float
    zeta_prime_minus1_hp: object  # mpmath.mpf at >= 50 digits
    zeta_minus1: Fraction = Fraction(-1, 12)
    log_2pi: float = LOG_2PI

    @classmethod
    def compute(cls, perturbation: float = 0.0) -> "ZetaSpecials":
        with mp.workdps(60):
            zp2 = _zeta_prime_2_euler_maclaurin()
            log_glaisher = ((mp.euler + mp.log(2 * mp.pi)) / 12
                            - zp2 / (2 * mp.pi ** 2))
            route1 = mp.mpf(1) / 12 - log_glaisher
            route2 = mp.zeta(-1, derivative=1)
            if abs(route1 - route2) > ZETA_PRIME_ROUTE_TOL:
                raise ArithmeticError(
                    "independent zeta'(-1) evaluations disagree: "
                    f"{route1} vs {route2}")
            value = route2 + mp.mpf(perturbation)
        return cls(zeta_prime_minus1=float(value), zeta_prime_minus1_hp=value)

    @property
    def zeta_ratio_minus1(self) -> float:
        """zeta'(-1)/zeta(-1) = -12 zeta'(-1)."""
        return -12.0 * self.zeta_prime_minus1


@functools.lru_cache(maxsize=1)
def default_specials() -> ZetaSpecials:
    return ZetaSpecials.compute()


def _check_weight(k: int) -> None:
    if k > MAX_WEIGHT:
        raise ResourceLimitError(
            f"weight k = {k} exceeds the supported {MAX_WEIGHT}; the finite "
            "log sums would accumulate too much rounding")


def _half_shift_log_sum(k: int) -> float:
    """sum_{j=1}^{2k} (j - k - 1/2) log j, exactly compensated."""
    return math.fsum((j - k - 0.5) * math.log(j) for j in range(1, 2 * k + 1))


# ---------------------------------------------------------------------------
# the normalization constants


def log_norm_constant(g: int, n: int,
                      specials: ZetaSpecials | None = None) -> float:
    """(2g - 2 + n)(zeta'(-1)/zeta(-1) + 1/2), the log of the global
    normalization constant attached to a stable signature.

    Clutching relation: the value at (g + n, 0) equals the value at (g, n)
    plus n times the value at (1, 1).
    """
    sp = specials or default_specials()
    chi = SurfaceSignature(g, n).euler_weight
    return chi * (sp.zeta_ratio_minus1 + 0.5)


def log_torsion_norm_constant(g: int, n: int, k: int,
                              specials: ZetaSpecials | None = None) -> float:
    """Log of the Quillen normalization constant of weight k + 1 sections.

    For k = 0:
        (g + 2 - n)/3 log 2 - (n/2) log pi
        + (2g - 2 + n)(2 zeta'(-1) - 1/4 + log(2 pi)/2);
    for k >= 1:
        ((3k + 1)(g - 1) - n)/3 log 2 - (n/2) log((2k)! pi^{2k+1})
        + (2g - 2 + n)(2 zeta'(-1) - (k + 1/2)^2 + (k + 1/2) log(2 pi)
                        + sum_{j=1}^{2k} (j - k - 1/2) log j).
    """
    if k < 0:
        raise ValueError("weight k must be >= 0")
    _check_weight(k)
    sp = specials or default_specials()
    chi = SurfaceSignature(g, n).euler_weight
    zp = sp.zeta_prime_minus1
    if k == 0:
        return ((g + 2 - n) / 3.0 * LOG_2 - n / 2.0 * LOG_PI
                + chi * (2.0 * zp - 0.25 + 0.5 * sp.log_2pi))
    per_chi = (2.0 * zp - (k + 0.5) ** 2 + (k + 0.5) * sp.log_2pi
               + _half_shift_log_sum(k))
    return (((3 * k + 1) * (g - 1) - n) / 3.0 * LOG_2
            - n / 2.0 * (math.lgamma(2 * k + 1) + (2 * k + 1) * LOG_PI)
            + chi * per_chi)


def analytic_torsion_constant(k: int,
                              specials: ZetaSpecials | None = None) -> float:
    """The per-Euler-unit constant of the analytic torsion of weight k + 1:

        2 zeta'(-1) - (k + 1/2)^2 + (k + 1/2) log(2 pi)
        + sum_{j=1}^{2k} (j - k - 1/2) log j + ((k + 1)/2 - 1/3) log 2.

    For unpunctured signatures the torsion normalization constant is exactly
    (2g - 2) times this value.
    """
    if k < 0:
        raise ValueError("weight k must be >= 0")
    _check_weight(k)
    sp = specials or default_specials()
    return (2.0 * sp.zeta_prime_minus1 - (k + 0.5) ** 2
            + (k + 0.5) * sp.log_2pi + _half_shift_log_sum(k)
            + ((k + 1) / 2.0 - 1.0 / 3.0) * LOG_2)


# ---------------------------------------------------------------------------
# large-weight growth


def double_gamma_growth(k: int) -> float:
    """alpha_k = (sum_{j=1}^{2k} (j - k) log j) - k^2, the double-gamma
    combination controlling the large-weight growth of the torsion
    normalization.  Grows like (k/2) log(k/pi)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    _check_weight(k)
    return math.fsum((j - k) * math.log(j) for j in range(1, 2 * k + 1)) - k * k


def log_double_gamma(k: int) -> float:
    """log Gamma_2(2k + 1) in the normalization fixed by the rearrangement
    alpha_k - k log (2k)! + k^2, which evaluates to the finite sum
    sum_{j=1}^{2k} (j - 2k) log j (the negative of the log Barnes G value).

    No external double-gamma convention is adopted; conventions in the
    literature differ by elementary factors, and this finite sum is the one
    the growth analysis actually uses.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    _check_weight(k)
    return math.fsum((j - 2 * k) * math.log(j) for j in range(1, 2 * k + 1))


def double_gamma_expansion_residual(k: int) -> float:
    """[log Gamma_2(2k + 1) + (2k)^2 (log(2k)/2 - 3/4)] / k.

    In the rearrangement normalization, log Gamma_2(2k + 1) is negative and
    its quadratic term is -(2k)^2 (log(2k)/2 - 3/4); the residual against
    that main term, divided by k, stays bounded (it tends to -log(2 pi)).
    Note the sign: pairing the positive quadratic term with this
    normalization would diverge like -8 k log k.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    return (log_double_gamma(k)
            + (2 * k) ** 2 * (math.log(2 * k) / 2.0 - 0.75)) / k


def stirling_companion_residual(k: int) -> float:
    """[k log((2k)!) - 2 k^2 log(2k) + 2 k^2] / (k log k).

    Stirling gives k log((2k)!) = 2 k^2 log(2k) - 2 k^2 + O(k log k), so
    this stays bounded (it tends to 1/2).
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    return ((k * math.lgamma(2 * k + 1) - 2.0 * k * k * math.log(2 * k)
             + 2.0 * k * k) / (k * math.log(k)))


# ---------------------------------------------------------------------------
# vectorized sweeps (for the bounded-growth checks up to k = 1e4)


def _cumulative_log_sums(kmax: int):
    j = np.arange(1, 2 * kmax + 1, dtype=np.longdouble)
    logs = np.log(j)
    s0 = np.cumsum(logs)           # sum log j
    s1 = np.cumsum(j * logs)       # sum j log j
    return s0, s1


def double_gamma_growth_sweep(kmax: int) -> np.ndarray:
    """alpha_k for k = 1 .. kmax as float64, via 80-bit cumulative sums."""
    if kmax < 1:
        raise ValueError("kmax must be >= 1")
    _check_weight(kmax)
    s0, s1 = _cumulative_log_sums(kmax)
    k = np.arange(1, kmax + 1, dtype=np.longdouble)
    alpha = s1[2 * np.arange(1, kmax + 1) - 1] \
        - k * s0[2 * np.arange(1, kmax + 1) - 1] - k * k
    return alpha.astype(np.float64)


def double_gamma_expansion_residual_sweep(kmax: int) -> np.ndarray:
    """The expansion residual for k = 2 .. kmax."""
    if kmax < 2:
        raise ValueError("kmax must be >= 2")
    _check_weight(kmax)
    s0, s1 = _cumulative_log_sums(kmax)
    k = np.arange(2, kmax + 1, dtype=np.longdouble)
    idx = 2 * np.arange(2, kmax + 1) - 1
    lg2 = s1[idx] - 2 * k * s0[idx]
    main = (2 * k) ** 2 * (np.log(2 * k) / 2 - 0.75)
    return ((lg2 + main) / k).astype(np.float64)


def log_torsion_norm_constant_sweep(g: int, n: int, kmax: int,
                                    specials: ZetaSpecials | None = None
                                    ) -> np.ndarray:
    """log torsion normalization constant for k = 1 .. kmax (vectorized)."""
    if kmax < 1:
        raise ValueError("kmax must be >= 1")
    _check_weight(kmax)
    sp = specials or default_specials()
    chi = SurfaceSignature(g, n).euler_weight
    s0, s1 = _cumulative_log_sums(kmax)
    k = np.arange(1, kmax + 1, dtype=np.longdouble)
    idx = 2 * np.arange(1, kmax + 1) - 1
    half_sum = s1[idx] - (k + 0.5) * s0[idx]
    per_chi = (2.0 * sp.zeta_prime_minus1 - (k + 0.5) ** 2
               + (k + 0.5) * sp.log_2pi + half_sum)
    lf = gammaln(2.0 * np.arange(1, kmax + 1, dtype=np.float64) + 1.0)
    out = (((3 * k + 1) * (g - 1) - n) / 3.0 * LOG_2
           - n / 2.0 * (lf + (2 * k + 1) * LOG_PI)
           + chi * per_chi)
    return out.astype(np.float64)
