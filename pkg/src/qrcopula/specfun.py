"""Univariate distribution functions, quantiles and margin models.

The numerical kernels are the Cephes/Boost routines exposed by
``scipy.special``; this module adds argument validation and the margin
models used by the finance experiments.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

__all__ = [
    "normal_cdf",
    "normal_quantile",
    "t_cdf",
    "t_quantile",
    "gamma_cdf",
    "gamma_quantile",
    "LogNormal",
    "Pareto",
    "Exponential",
    "Uniform",
    "Margin",
    "margin_quantile",
    "lognormal_for_drift",
    "pareto_matching",
    "kendall_tau_maps",
]


def _check_prob(p):
    p = np.asarray(p, dtype=float)
    if np.any(~((p > 0.0) & (p < 1.0))):
        raise ValueError("probabilities must lie strictly inside (0, 1)")
    return p


def _out(x):
    return x if np.ndim(x) else float(x)


def normal_cdf(x):
    return _out(special.ndtr(np.asarray(x, dtype=float)))


def normal_quantile(p):
    return _out(special.ndtri(_check_prob(p)))


def _check_df(nu):
    nu = np.asarray(nu, dtype=float)
    if np.any(~(nu > 0)):
        raise ValueError(f"degrees of freedom must be positive, got {nu}")
    return nu


def t_cdf(x, nu):
    nu = _check_df(nu)
    return _out(special.stdtr(nu, np.asarray(x, dtype=float)))


def t_quantile(p, nu):
    nu = _check_df(nu)
    return _out(special.stdtrit(nu, _check_prob(p)))


def _check_gamma(shape, rate):
    if np.any(~(np.asarray(shape) > 0)) or np.any(~(np.asarray(rate) > 0)):
        raise ValueError("gamma shape and rate must be positive")


def gamma_cdf(x, shape, rate=1.0):
    _check_gamma(shape, rate)
    return _out(special.gammainc(shape, np.asarray(x, dtype=float) * rate))


def gamma_quantile(p, shape, rate=1.0):
    """Quantile of the Gamma(shape, rate) distribution."""
    _check_gamma(shape, rate)
    return _out(special.gammaincinv(shape, _check_prob(p)) / rate)


# --------------------------------------------------------------------------
# Margins
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class LogNormal:
    meanlog: float
    sdlog: float

    def __post_init__(self):
        if not self.sdlog > 0:
            raise ValueError(f"sdlog must be positive, got {self.sdlog}")

    def quantile(self, p):
        return np.exp(self.meanlog + self.sdlog * special.ndtri(_check_prob(p)))

    @property
    def mean(self) -> float:
        return math.exp(self.meanlog + self.sdlog**2 / 2)

    @property
    def var(self) -> float:
        return math.expm1(self.sdlog**2) * self.mean**2


@dataclass(frozen=True)
class Pareto:
    """Pareto margin with tail index ``shape``.

    ``support="lomax"``: ``F(x) = 1 - (1 + x / scale)^(-shape)`` on ``x >= 0``.
    ``support="classical"``: ``F(x) = 1 - (scale / x)^shape`` on ``x >= scale``.
    """

    shape: float
    scale: float
    support: str = "lomax"

    def __post_init__(self):
        if not self.shape > 2:
            raise ValueError(f"Pareto shape must exceed 2 (finite variance), got {self.shape}")
        if not self.scale > 0:
            raise ValueError(f"Pareto scale must be positive, got {self.scale}")
        if self.support not in ("lomax", "classical"):
            raise ValueError(f"unknown Pareto support {self.support!r}")

    def quantile(self, p):
        p = _check_prob(p)
        if self.support == "classical":
            return self.scale * np.exp(-np.log1p(-p) / self.shape)
        return self.scale * np.expm1(-np.log1p(-p) / self.shape)

    @property
    def mean(self) -> float:
        a = self.shape
        return self.scale * (a if self.support == "classical" else 1.0) / (a - 1)

    @property
    def var(self) -> float:
        a = self.shape
        return self.scale**2 * a / ((a - 1) ** 2 * (a - 2))


@dataclass(frozen=True)
class Exponential:
    rate: float = 1.0

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError(f"rate must be positive, got {self.rate}")

    def quantile(self, p):
        return -np.log1p(-_check_prob(p)) / self.rate

    @property
    def mean(self) -> float:
        return 1.0 / self.rate

    @property
    def var(self) -> float:
        return 1.0 / self.rate**2


@dataclass(frozen=True)
class Uniform:
    def quantile(self, p):
        return np.array(_check_prob(p), dtype=float)

    mean = 0.5
    var = 1.0 / 12.0


Margin = LogNormal | Pareto | Exponential | Uniform


def margin_quantile(m: Margin, p):
    return _out(m.quantile(p))


def lognormal_for_drift(mu: float = 0.0001, sigma: float = 0.2, s0: float = 100.0) -> LogNormal:
    """``LN(log(s0) + mu - sigma^2 / 2, sigma^2)``, the terminal value of a GBM-like asset."""
    return LogNormal(math.log(s0) + mu - sigma**2 / 2, sigma)


def pareto_matching(m: LogNormal | float, var: float | None = None, support: str = "classical") -> Pareto:
    """Pareto margin with the given mean and variance (or those of a margin).

    With ``r = var / mean^2`` the moment equations solve in closed form:
    classical ``r = 1 / (a (a - 2))`` gives ``a = 1 + sqrt(1 + 1/r)`` and
    ``scale = mean (a - 1) / a``; Lomax ``r = a / (a - 2)`` gives
    ``a = 2r / (r - 1)`` and ``scale = mean (a - 1)``. A Lomax margin always
    has ``r > 1``, so it cannot match a margin with coefficient of
    variation below one.
    """
    if var is None:
        mean, var = m.mean, m.var
    else:
        mean = float(m)
    if not mean > 0 or not var > 0:
        raise ValueError("mean and variance must be positive")
    r = var / mean**2
    if support == "classical":
        shape = 1.0 + math.sqrt(1.0 + 1.0 / r)
        return Pareto(shape, mean * (shape - 1.0) / shape, "classical")
    if support == "lomax":
        if not r > 1:
            raise ValueError(
                f"no Lomax margin has coefficient of variation {math.sqrt(r):.4g} <= 1; use support='classical'"
            )
        shape = 2.0 * r / (r - 1.0)
        return Pareto(shape, mean * (shape - 1.0), "lomax")
    raise ValueError(f"unknown Pareto support {support!r}")


def kendall_tau_maps(tau: float) -> dict[str, float]:
    """Clayton parameter and elliptical correlation with Kendall's tau ``tau``."""
    if not 0.0 < tau < 1.0:
        raise ValueError(f"Kendall's tau must lie in (0, 1), got {tau}")
    return {"theta_clayton": 2.0 * tau / (1.0 - tau), "rho_t": math.sin(math.pi * tau / 2.0)}
