"""Selberg zeta local factors, partial products over a length spectrum, and
the pinching-family asymptotics of the local factor.

Everything here works on logarithms.  The quantities involved span hundreds
of orders of magnitude along a degeneration (exp(L/6) at L = 300 is e^50),
so no intermediate is ever exponentiated; callers exponentiate at the API
boundary if they really want the raw value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spectrum import LengthSpectrum

_CHUNK = 1 << 20


@dataclass(frozen=True)
class ZetaEvaluation:
    """Log-space value of a (partial) zeta product with an error budget.

    ``truncation_bound`` bounds the absolute error of ``log_value`` from
    truncating infinite products.  When the value came from a spectrum,
    ``spectral_cutoff`` records the length cutoff used and
    ``heuristic_tail`` marks that the bound includes a tail term based on a
    crude exponential geodesic-counting estimate, which is honest but not
    rigorous.
    """

    log_value: float
    truncation_bound: float
    s: float
    spectral_cutoff: float | None = None
    heuristic_tail: bool = False

    def __post_init__(self):
        if not (math.isfinite(self.truncation_bound)
                and self.truncation_bound >= 0.0):
            raise ValueError("truncation bound must be finite and >= 0")


def log_local_factor(length: float, s: float, tol: float = 1e-14) -> ZetaEvaluation:
    """log of the local zeta factor of one closed geodesic,
    2 * sum_{m >= 0} log(1 - e^{-(s+m) length}).

    The sum is truncated at the first index K whose geometric tail bound
    2 e^{-(s+K) length} / (1 - e^{-length}) drops below ``tol``; that bound
    is returned as the truncation bound.
    """
    if length <= 0.0:
        raise ValueError(f"geodesic length must be positive, got {length}")
    if s <= 0.0:
        raise ValueError(f"argument s must be positive, got {s}")
    if not 0.0 < tol <= 1e-6:
        raise ValueError(f"tol must lie in (0, 1e-6], got {tol}")

    one_minus_q = -math.expm1(-length)
    k_stop = max(0, math.ceil(math.log(2.0 / (tol * one_minus_q)) / length - s))
    if k_stop > 200_000_000:
        raise ValueError(
            f"local factor at length {length} needs {k_stop} terms; "
            "refusing (tighten the length or loosen tol)")
    total = 0.0
    for start in range(0, k_stop, _CHUNK):
        m = np.arange(start, min(start + _CHUNK, k_stop), dtype=np.float64)
        total += float(np.sum(np.log(-np.expm1(-(s + m) * length))))
    bound = 2.0 * math.exp(-(s + k_stop) * length) / one_minus_q
    return ZetaEvaluation(log_value=2.0 * total, truncation_bound=bound, s=s)


def small_length_law_residual(length: float, s: float) -> float:
    """Relative defect of the short-geodesic law for the local factor.

    As the length l tends to 0, Gamma(s)^2 Z_l(s) e^{pi^2/(3l)} l^{2s-1}
    tends to 2 pi.  The return value is that combination divided by 2 pi,
    minus 1, assembled entirely in log space (the exponential factor alone
    overflows doubles below l = 1e-2).  Empirically the defect decays like
    (s^2/2 - s/2 + 1/12) * l.
    """
    if not 0.0 < length <= 0.5:
        raise ValueError(f"length must lie in (0, 0.5], got {length}")
    if s <= 0.0:
        raise ValueError(f"argument s must be positive, got {s}")
    ev = log_local_factor(length, s, tol=1e-13)
    log_combination = (2.0 * math.lgamma(s) + ev.log_value
                       + math.pi ** 2 / (3.0 * length)
                       + (2.0 * s - 1.0) * math.log(length)
                       - math.log(2.0 * math.pi))
    return math.expm1(log_combination)


def log_zeta_product(spectrum: LengthSpectrum, s: float,
                     tol: float = 1e-12) -> ZetaEvaluation:
    """Multiplicity-weighted sum of local factor logs over a spectrum.

    Only the region of absolute convergence s > 1 is supported; there is no
    analytic continuation here.  The truncation bound combines the
    per-factor bounds with a spectral tail term that models the classes
    beyond ``complete_below`` by an e^l counting density:
    2 e^{(1-s) L} / (s - 1).  That tail model is heuristic and the result
    is flagged accordingly.
    """
    if s <= 1.0:
        raise ValueError(
            f"s = {s} is outside the region of absolute convergence (s > 1)")
    if not 0.0 < tol <= 1e-6:
        raise ValueError(f"tol must lie in (0, 1e-6], got {tol}")
    per_factor_tol = tol / max(1, len(spectrum))
    logs = []
    bounds = []
    for cls in spectrum:
        ev = log_local_factor(cls.length, s, tol=per_factor_tol)
        logs.append(cls.multiplicity * ev.log_value)
        bounds.append(cls.multiplicity * ev.truncation_bound)
    tail = 2.0 * math.exp((1.0 - s) * spectrum.complete_below) / (s - 1.0)
    return ZetaEvaluation(
        log_value=math.fsum(logs),
        truncation_bound=math.fsum(bounds) + tail,
        s=s,
        spectral_cutoff=spectrum.cutoff,
        heuristic_tail=True,
    )


# ---------------------------------------------------------------------------
# pinching families


@dataclass(frozen=True)
class PinchingParameter:
    """Plumbing data of a family pinching ``node_count`` geodesics.

    ``t_modulus`` is the modulus of the plumbing parameter, ``collar_constant``
    the outer radius of the collar annulus {t/c < |u| < c}, and ``weight``
    the tensor power index k of the sections under study.
    """

    t_modulus: float
    collar_constant: float = 0.1
    node_count: int = 1
    weight: int = 1

    def __post_init__(self):
        if not 0.0 < self.t_modulus < 1.0:
            raise ValueError(
                f"t_modulus must lie in (0, 1), got {self.t_modulus}")
        if not 0.0 < self.collar_constant < 1.0:
            raise ValueError("collar constant must lie in (0, 1)")
        if self.t_modulus >= self.collar_constant ** 2:
            raise ValueError(
                "annulus degenerates: need t_modulus < collar_constant^2")
        if self.node_count < 1:
            raise ValueError("node_count must be >= 1")
        if self.weight < 0:
            raise ValueError("weight must be >= 0")

    @property
    def log_scale(self) -> float:
        """L = log(1/t), the large parameter of every expansion here."""
        return -math.log(self.t_modulus)

    @classmethod
    def from_log_scale(cls, log_scale: float, **kw) -> "PinchingParameter":
        if log_scale <= 0.0:
            raise ValueError("log scale must be positive")
        return cls(t_modulus=math.exp(-log_scale), **kw)


def pinching_length(pinch: PinchingParameter | float) -> float:
    """Leading term 2 pi^2 / log(1/t) of the pinched geodesic length.

    The correction of order log(1/t)^{-4} is deliberately not modeled.
    """
    if isinstance(pinch, PinchingParameter):
        t = pinch.t_modulus
    else:
        t = float(pinch)
        if not 0.0 < t < 1.0:
            raise ValueError(f"t modulus must lie in (0, 1), got {t}")
    return 2.0 * math.pi ** 2 / (-math.log(t))


def log_pinched_factor_asymptotic(pinch: PinchingParameter) -> float:
    """Log of the predicted size of the pinched-geodesic local factor at
    s = k + 1:

        -log(pi (2 pi^2)^{2k} (k!)^2) - L/6 + (2k + 1) log L,   L = log(1/t).

    Supported for weight k >= 1; the k = 0 story runs through the zeta
    derivative at s = 1, which this library does not evaluate.
    """
    k = pinch.weight
    if k < 1:
        raise ValueError("weight k must be >= 1 for the pinched factor law")
    big_l = pinch.log_scale
    return (-log_pinched_factor_constant(k) - big_l / 6.0
            + (2.0 * k + 1.0) * math.log(big_l))


def log_pinched_factor_constant(k: int) -> float:
    """log(pi (2 pi^2)^{2k} (k!)^2), the constant of the pinched factor law."""
    if k < 1:
        raise ValueError("weight k must be >= 1")
    return (math.log(math.pi) + 2.0 * k * math.log(2.0 * math.pi ** 2)
            + 2.0 * math.lgamma(k + 1))


def pinched_factor_closure_defect(log_scale: float, k: int) -> float:
    """Difference between the directly computed local factor log at the
    pinched length 2 pi^2 / L and the asymptotic law.

    Substituting l = 2 pi^2 / L into the short-geodesic law reproduces the
    pinched factor law exactly (e^{pi^2/(3l)} = t^{-1/6} and
    l^{2s-1} = (2 pi^2 / L)^{2k+1} at s = k + 1), so this defect tends to 0
    as L grows; its decay rate is the short-geodesic defect rate.
    """
    pinch = PinchingParameter.from_log_scale(log_scale, weight=k)
    lhs = log_local_factor(pinching_length(pinch), k + 1, tol=1e-13).log_value
    return lhs - log_pinched_factor_asymptotic(pinch)
