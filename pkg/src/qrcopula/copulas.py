"""Copula families, conditional distributions and sampling transforms.

Every sampler is a deterministic map from points in the unit cube to
copula samples, so it can be fed pseudo-random or quasi-random input:

* :func:`cdm_sample` -- conditional distribution method (``k = d``), and
  its inverse :func:`rosenblatt`;
* :func:`stochastic_sample_gauss` -- ``Phi(A z)`` with ``P = A A^T``;
* :func:`stochastic_sample_t` -- ``t_nu(sqrt(W) A z)``, ``W = 1/Gamma``
  (``k = d + 1``);
* :func:`mo_algorithm_sample` -- Marshall--Olkin frailty algorithm for
  Clayton (``k = d + 1``);
* :func:`mo_copula_sample` -- shock representation of the bivariate
  Marshall--Olkin copula (``k = 3``).

Arrays of points are ``(n, d)``; a 1-d input is treated as one point.
Indices ``j`` of conditional distributions are 1-based.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import linalg, special

__all__ = [
    "CdfUnavailable",
    "RootFindingError",
    "Copula",
    "GaussCopula",
    "TCopula",
    "ClaytonCopula",
    "GumbelCopula",
    "MarshallOlkinCopula",
    "MixtureCopula",
    "ConditionalWorkspace",
    "exchangeable_correlation",
    "copula_cdf",
    "cond_cdf",
    "cond_quantile",
    "cdm_sample",
    "rosenblatt",
    "stochastic_sample_gauss",
    "stochastic_sample_t",
    "mo_algorithm_sample",
    "mo_copula_sample",
    "clamp_unit",
    "kendall_tau",
]

EPS = 2.0**-53


class CdfUnavailable(NotImplementedError):
    """The copula has no closed-form distribution function here."""


class RootFindingError(ArithmeticError):
    """Numerical inversion of a conditional distribution did not converge."""


def clamp_unit(v):
    """Clamp to ``[2^-53, 1 - 2^-53]`` so quantile transforms stay finite."""
    return np.clip(np.asarray(v, dtype=float), EPS, 1.0 - EPS)


def _nudge_boundary(u):
    """Move exact 0 and 1 to ``2^-53`` and ``1 - 2^-53``; interior values are kept."""
    u = np.array(u, dtype=float)
    u[u <= 0.0] = EPS
    u[u >= 1.0] = 1.0 - EPS
    return u


def _as_2d(u):
    u = np.asarray(u, dtype=float)
    return (u[None, :], True) if u.ndim == 1 else (u, False)


def _interior(u, what="arguments"):
    if np.any(~((u > 0.0) & (u < 1.0))):
        raise ValueError(f"{what} must lie strictly inside (0, 1)")


def exchangeable_correlation(d: int, rho: float) -> np.ndarray:
    P = np.full((d, d), float(rho))
    np.fill_diagonal(P, 1.0)
    return P


class Copula:
    """Base class. Subclasses provide ``cond_cdf``/``cond_quantile`` at least."""

    family = "copula"
    d: int

    def cdf(self, u):
        raise CdfUnavailable(f"{self.family} copula: cdf-unavailable")

    def cond_cdf(self, j: int, u):
        raise NotImplementedError

    def cond_quantile(self, j: int, u_prev, p):
        raise NotImplementedError

    def _check_j(self, j):
        if not 2 <= j <= self.d:
            raise ValueError(f"conditioning index j must be in 2..{self.d}, got {j}")

    def cdm(self, v):
        v, single = _as_2d(v)
        u = np.empty_like(v)
        u[:, 0] = v[:, 0]
        for j in range(2, self.d + 1):
            u[:, j - 1] = self.cond_quantile(j, u[:, : j - 1], v[:, j - 1])
        return u[0] if single else u

    def rosenblatt(self, u):
        u, single = _as_2d(u)
        v = np.empty_like(u)
        v[:, 0] = u[:, 0]
        for j in range(2, self.d + 1):
            v[:, j - 1] = self.cond_cdf(j, u[:, :j])
        return v[0] if single else v

    def params(self) -> dict:
        return {}

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.params().items())
        return f"{type(self).__name__}(d={self.d}, {args})"


# --------------------------------------------------------------------------
# Elliptical copulas
# --------------------------------------------------------------------------


class ConditionalWorkspace:
    """Conditioning quantities of an elliptical copula at step ``j``.

    ``coef`` is ``P[j, :j-1] @ inv(P[:j-1, :j-1])``, ``cond_var`` the
    Schur complement ``P_{j|1:(j-1)}`` and ``prec_jj`` the ``(j, j)`` entry
    of ``inv(P[:j, :j])`` (equal to ``1 / cond_var``). Built from one
    Cholesky factor ``L`` of ``P``: ``L[j, :j] = coef @ L[:j, :j]`` and
    ``L[j, j]^2 = cond_var``.
    """

    def __init__(self, L: np.ndarray, j: int):
        self.j = j
        self.row = L[j - 1, : j - 1]
        self.sd = L[j - 1, j - 1]
        self.cond_var = self.sd**2
        self.prec_jj = 1.0 / self.cond_var
        self.coef = linalg.solve_triangular(L[: j - 1, : j - 1], self.row, lower=True, trans="T") if j > 1 else self.row

    def whiten(self, L, x_prev):
        """``z_{1:(j-1)} = inv(L_{1:(j-1)}) x_{1:(j-1)}`` for rows of ``x_prev``."""
        if self.j == 1:
            return np.zeros((x_prev.shape[0], 0))
        return linalg.solve_triangular(L[: self.j - 1, : self.j - 1], x_prev.T, lower=True).T

    def cond_mean(self, z_prev):
        return z_prev @ self.row


class _Elliptical(Copula):
    def __init__(self, P):
        P = np.array(P, dtype=float)
        if P.ndim != 2 or P.shape[0] != P.shape[1]:
            raise ValueError("correlation matrix must be square")
        if not np.allclose(P, P.T, atol=1e-12):
            raise ValueError("correlation matrix must be symmetric")
        if not np.allclose(np.diag(P), 1.0, atol=1e-12):
            raise ValueError("correlation matrix must have unit diagonal")
        try:
            self.L = np.linalg.cholesky(P)
        except np.linalg.LinAlgError as exc:
            raise ValueError("correlation matrix is not positive definite") from exc
        self.P = P
        self.d = P.shape[0]
        self.P.setflags(write=False)
        self.L.setflags(write=False)

    def workspace(self, j: int) -> ConditionalWorkspace:
        return ConditionalWorkspace(self.L, j)

    def params(self):
        return {"P": self.P.tolist()}


class GaussCopula(_Elliptical):
    family = "gauss"

    def cond_cdf(self, j, u):
        self._check_j(j)
        u = np.atleast_2d(np.asarray(u, dtype=float))
        _interior(u[:, :j])
        x = special.ndtri(u[:, :j])
        ws = self.workspace(j)
        mu = ws.cond_mean(ws.whiten(self.L, x[:, : j - 1]))
        return special.ndtr((x[:, j - 1] - mu) / math.sqrt(ws.cond_var))

    def cond_quantile(self, j, u_prev, p):
        self._check_j(j)
        u_prev = np.atleast_2d(np.asarray(u_prev, dtype=float))
        ws = self.workspace(j)
        mu = ws.cond_mean(ws.whiten(self.L, special.ndtri(u_prev[:, : j - 1])))
        return special.ndtr(mu + math.sqrt(ws.cond_var) * special.ndtri(np.asarray(p, dtype=float)))

    def cdm(self, v):
        v, single = _as_2d(v)
        u = special.ndtr(special.ndtri(v) @ self.L.T)
        return u[0] if single else u

    def rosenblatt(self, u):
        u, single = _as_2d(u)
        z = linalg.solve_triangular(self.L, special.ndtri(u).T, lower=True).T
        v = special.ndtr(z)
        return v[0] if single else v


class TCopula(_Elliptical):
    family = "t"

    def __init__(self, nu: float, P):
        if not nu > 0:
            raise ValueError(f"degrees of freedom must be positive, got {nu}")
        super().__init__(P)
        self.nu = float(nu)

    def params(self):
        return {"nu": self.nu, "P": self.P.tolist()}

    def _step(self, j, x_prev):
        """``(sqrt(prec_jj), s1, s2)`` for step ``j`` given ``x_{1:(j-1)}``."""
        ws = self.workspace(j)
        z_prev = ws.whiten(self.L, x_prev)
        g = np.sum(z_prev**2, axis=1)
        s1 = np.sqrt((self.nu + j - 1) / (self.nu + g))
        # x_prev . P^{-1}_{1:(j-1), j} / sqrt(P^{-1}_{jj}) = -mu / sd
        s2 = -ws.cond_mean(z_prev) / ws.sd
        return math.sqrt(ws.prec_jj), s1, s2

    def cond_cdf(self, j, u):
        self._check_j(j)
        u = np.atleast_2d(np.asarray(u, dtype=float))
        _interior(u[:, :j])
        x = special.stdtrit(self.nu, u[:, :j])
        r, s1, s2 = self._step(j, x[:, : j - 1])
        return special.stdtr(self.nu + j - 1, s1 * (r * x[:, j - 1] + s2))

    def cond_quantile(self, j, u_prev, p):
        self._check_j(j)
        u_prev = np.atleast_2d(np.asarray(u_prev, dtype=float))
        x_prev = special.stdtrit(self.nu, u_prev[:, : j - 1])
        r, s1, s2 = self._step(j, x_prev)
        q = special.stdtrit(self.nu + j - 1, np.asarray(p, dtype=float))
        return special.stdtr(self.nu, (q / s1 - s2) / r)

    def cdm(self, v):
        v, single = _as_2d(v)
        n = v.shape[0]
        x = np.empty_like(v)
        z = np.empty_like(v)
        g = np.zeros(n)
        for j in range(1, self.d + 1):
            sd = self.L[j - 1, j - 1]
            mu = z[:, : j - 1] @ self.L[j - 1, : j - 1]
            s1 = np.sqrt((self.nu + j - 1) / (self.nu + g))
            q = special.stdtrit(self.nu + j - 1, v[:, j - 1])
            # (q / s1 - s2) / sqrt(prec_jj) with s2 = -mu / sd
            x[:, j - 1] = mu + sd * q / s1
            z[:, j - 1] = (x[:, j - 1] - mu) / sd
            g += z[:, j - 1] ** 2
        u = special.stdtr(self.nu, x)
        return u[0] if single else u

    def rosenblatt(self, u):
        u, single = _as_2d(u)
        x = special.stdtrit(self.nu, u)
        z = linalg.solve_triangular(self.L, x.T, lower=True).T
        g = np.concatenate([np.zeros((u.shape[0], 1)), np.cumsum(z**2, axis=1)[:, :-1]], axis=1)
        dfs = self.nu + np.arange(self.d)
        v = special.stdtr(dfs, np.sqrt(dfs / (self.nu + g)) * z)
        return v[0] if single else v


# --------------------------------------------------------------------------
# Archimedean copulas
# --------------------------------------------------------------------------


class ClaytonCopula(Copula):
    """Generator ``psi(t) = (1 + t)^(-1/theta)``, ``theta > 0``."""

    family = "clayton"

    def __init__(self, theta: float, d: int = 2):
        if not theta > 0:
            raise ValueError(f"Clayton theta must be positive, got {theta}")
        if d < 2:
            raise ValueError(f"dimension must be >= 2, got {d}")
        self.theta = float(theta)
        self.d = int(d)

    def params(self):
        return {"theta": self.theta}

    def psi(self, t):
        return np.power(1.0 + t, -1.0 / self.theta)

    def psi_inv(self, u):
        return np.expm1(-self.theta * np.log(u))

    def cdf(self, u):
        u, single = _as_2d(u)
        out = np.zeros(u.shape[0])
        pos = np.all(u > 0, axis=1)
        s = np.sum(self.psi_inv(np.clip(u[pos], 0.0, 1.0)), axis=1)
        out[pos] = self.psi(s)
        return out[0] if single else out

    def cond_cdf(self, j, u):
        self._check_j(j)
        u = np.atleast_2d(np.asarray(u, dtype=float))
        _interior(u[:, :j])
        # ((1 - j + sum_{l<=j} u^-th) / (2 - j + sum_{l<j} u^-th))^-(j - 1 + 1/th)
        denom = 1.0 + np.sum(self.psi_inv(u[:, : j - 1]), axis=1)
        return np.exp(-(j - 1 + 1.0 / self.theta) * np.log1p(self.psi_inv(u[:, j - 1]) / denom))

    def cond_quantile(self, j, u_prev, p):
        self._check_j(j)
        u_prev = np.atleast_2d(np.asarray(u_prev, dtype=float))
        p = np.asarray(p, dtype=float)
        denom = 1.0 + np.sum(self.psi_inv(u_prev[:, : j - 1]), axis=1)
        inner = denom * np.expm1(-np.log(p) / (j - 1 + 1.0 / self.theta))
        return self.psi(inner)

    def cdm(self, v):
        v, single = _as_2d(v)
        u = np.empty_like(v)
        u[:, 0] = v[:, 0]
        acc = 1.0 + self.psi_inv(v[:, 0])
        for j in range(2, self.d + 1):
            t = acc * np.expm1(-np.log(v[:, j - 1]) / (j - 1 + 1.0 / self.theta))
            u[:, j - 1] = self.psi(t)
            acc = acc + t
        return u[0] if single else u

    def rosenblatt(self, u):
        u, single = _as_2d(u)
        w = self.psi_inv(u)
        acc = 1.0 + np.concatenate([np.zeros((u.shape[0], 1)), np.cumsum(w, axis=1)[:, :-1]], axis=1)
        expo = np.arange(self.d) + 1.0 / self.theta
        v = np.exp(-expo * np.log1p(w / acc))
        v[:, 0] = u[:, 0]
        return v[0] if single else v


def _gumbel_coefficients(k: int, alpha: float) -> np.ndarray:
    """Coefficients ``a_{k,1..k}`` with ``(-1)^k psi^(k)(t) = psi(t) t^-k sum_i a_ki t^(alpha i)``.

    Recursion ``a_{k+1,i} = alpha a_{k,i-1} + (k - alpha i) a_{k,i}``, ``a_00 = 1``.
    """
    a = np.array([1.0])
    for m in range(k):
        nxt = np.zeros(m + 2)
        i = np.arange(m + 1)
        nxt[1:] += alpha * a
        nxt[:-1] += (m - alpha * i) * a
        a = nxt
    return a


class GumbelCopula(Copula):
    """Generator ``psi(t) = exp(-t^(1/theta))``, ``theta >= 1``.

    Conditional inverses have no closed form and are found by safeguarded
    Newton iteration with a bisection fallback on ``[eps, 1 - eps]``.
    """

    family = "gumbel"
    root_eps = 1e-15
    root_tol = 1e-12
    max_iter = 200

    def __init__(self, theta: float, d: int = 2):
        if not theta >= 1:
            raise ValueError(f"Gumbel theta must be >= 1, got {theta}")
        if d < 2:
            raise ValueError(f"dimension must be >= 2, got {d}")
        self.theta = float(theta)
        self.alpha = 1.0 / self.theta
        self.d = int(d)
        self._coef = [_gumbel_coefficients(k, self.alpha) for k in range(self.d + 1)]

    def params(self):
        return {"theta": self.theta}

    def psi(self, t):
        return np.exp(-np.power(t, self.alpha))

    def psi_inv(self, u):
        return np.power(-np.log(u), self.theta)

    def cdf(self, u):
        u, single = _as_2d(u)
        out = np.zeros(u.shape[0])
        pos = np.all(u > 0, axis=1)
        out[pos] = self.psi(np.sum(self.psi_inv(np.clip(u[pos], 0.0, 1.0)), axis=1))
        return out[0] if single else out

    def log_abs_deriv(self, k: int, t):
        """``log |psi^(k)(t)|`` for ``t > 0``."""
        t = np.asarray(t, dtype=float)
        if k == 0:
            return -np.power(t, self.alpha)
        a = self._coef[k]
        i = np.arange(k + 1)
        lt = np.log(t)[..., None]
        s = special.logsumexp(self.alpha * i * lt, b=a, axis=-1)
        return -np.power(t, self.alpha) - k * lt[..., 0] + s

    def _cond(self, j, t_prev, w):
        return np.exp(self.log_abs_deriv(j - 1, t_prev + w) - self.log_abs_deriv(j - 1, t_prev))

    def cond_cdf(self, j, u):
        self._check_j(j)
        u = np.atleast_2d(np.asarray(u, dtype=float))
        _interior(u[:, :j])
        t_prev = np.sum(self.psi_inv(u[:, : j - 1]), axis=1)
        return self._cond(j, t_prev, self.psi_inv(u[:, j - 1]))

    def cond_quantile(self, j, u_prev, p):
        self._check_j(j)
        u_prev = np.atleast_2d(np.asarray(u_prev, dtype=float))
        t_prev = np.sum(self.psi_inv(u_prev[:, : j - 1]), axis=1)
        p = np.broadcast_to(np.asarray(p, dtype=float), t_prev.shape)
        return self._invert(j, t_prev, p)

    def _invert(self, j, t_prev, p):
        eps = self.root_eps
        lo = np.full(p.shape, eps)
        hi = np.full(p.shape, 1.0 - eps)
        f_lo = self._cond(j, t_prev, self.psi_inv(lo)) - p
        f_hi = self._cond(j, t_prev, self.psi_inv(hi)) - p
        x = np.clip(p, eps, 1.0 - eps)
        done = np.zeros(p.shape, dtype=bool)
        # targets outside the bracket map to its ends
        out = np.empty(p.shape)
        below, above = f_lo >= 0, f_hi <= 0
        out[below], out[above] = lo[below], hi[above]
        done |= below | above
        for _ in range(self.max_iter):
            act = ~done
            if not act.any():
                return out
            xa, ta, pa = x[act], t_prev[act], p[act]
            w = self.psi_inv(xa)
            F = self._cond(j, ta, w)
            f = F - pa
            lo_a, hi_a = lo[act], hi[act]
            neg = f < 0
            lo_a = np.where(neg, xa, lo_a)
            hi_a = np.where(neg, hi_a, xa)
            # dF/du = F * |psi^(j)/psi^(j-1)|(t) * theta (-log u)^(theta-1) / u
            ratio = np.exp(self.log_abs_deriv(j, ta + w) - self.log_abs_deriv(j - 1, ta + w))
            dF = F * ratio * self.theta * np.power(-np.log(xa), self.theta - 1.0) / xa
            with np.errstate(divide="ignore", invalid="ignore"):
                step = f / dF
            x_new = xa - step
            bad = ~np.isfinite(x_new) | (x_new <= lo_a) | (x_new >= hi_a)
            x_new = np.where(bad, 0.5 * (lo_a + hi_a), x_new)
            conv = (np.abs(f) <= self.root_tol) & (np.abs(x_new - xa) <= 4e-16 + 1e-13 * xa) | (hi_a - lo_a <= 4e-16)
            lo[act], hi[act], x[act] = lo_a, hi_a, x_new
            idx = np.flatnonzero(act)
            out[idx[conv]] = x_new[conv]
            done[idx[conv]] = True
        raise RootFindingError(
            f"Gumbel conditional inverse (j={j}) did not converge after {self.max_iter} "
            f"iterations for {int((~done).sum())} of {done.size} points; "
            f"max bracket width {float(np.max(hi[~done] - lo[~done])):.3g}"
        )


# --------------------------------------------------------------------------
# Marshall--Olkin and mixture
# --------------------------------------------------------------------------


class MarshallOlkinCopula(Copula):
    """``C(u1, u2) = min(u1^(1-a1) u2, u1 u2^(1-a2))``, ``a1, a2 in (0, 1)``.

    The copula has a singular component on ``u1^a1 = u2^a2``; there the
    conditional distribution of ``U2`` given ``U1`` has an atom and the
    CDM maps a whole interval of inputs onto it.
    """

    family = "marshall_olkin"

    def __init__(self, alpha1: float, alpha2: float):
        for a in (alpha1, alpha2):
            if not 0 < a < 1:
                raise ValueError(f"Marshall-Olkin parameters must lie in (0, 1), got {a}")
        self.alpha1 = float(alpha1)
        self.alpha2 = float(alpha2)
        self.d = 2

    def params(self):
        return {"alpha1": self.alpha1, "alpha2": self.alpha2}

    def cdf(self, u):
        u, single = _as_2d(u)
        u1, u2 = u[:, 0], u[:, 1]
        out = np.minimum(u1 ** (1 - self.alpha1) * u2, u1 * u2 ** (1 - self.alpha2))
        return out[0] if single else out

    def cond_cdf(self, j, u):
        self._check_j(j)
        u = np.atleast_2d(np.asarray(u, dtype=float))
        _interior(u[:, :2])
        a1, a2 = self.alpha1, self.alpha2
        u1, u2 = u[:, 0], u[:, 1]
        atom = u1 ** (a1 / a2)
        return np.where(u2 < atom, (1 - a1) * u1 ** (-a1) * u2, u2 ** (1 - a2))

    def cond_quantile(self, j, u_prev, p):
        self._check_j(j)
        u1 = np.atleast_2d(np.asarray(u_prev, dtype=float))[:, 0]
        p = np.asarray(p, dtype=float)
        a1, a2 = self.alpha1, self.alpha2
        upper = u1 ** (a1 * (1 / a2 - 1))
        lower = (1 - a1) * upper
        return np.where(
            p <= lower,
            u1**a1 / (1 - a1) * p,
            np.where(p < upper, u1 ** (a1 / a2), p ** (1 / (1 - a2))),
        )

    def kendall_tau(self) -> float:
        a1, a2 = self.alpha1, self.alpha2
        return a1 * a2 / (a1 + a2 - a1 * a2)


class MixtureCopula(Copula):
    """``lam * prod(u) + (1 - lam) * min(u)``; distribution function only."""

    family = "mixture"

    def __init__(self, lam: float, d: int):
        if not 0 < lam <= 1:
            raise ValueError(f"mixture weight must lie in (0, 1], got {lam}")
        if d < 1:
            raise ValueError(f"dimension must be >= 1, got {d}")
        self.lam = float(lam)
        self.d = int(d)

    def params(self):
        return {"lam": self.lam}

    def cdf(self, u):
        u, single = _as_2d(u)
        u = np.clip(u, 0.0, 1.0)
        out = self.lam * np.prod(u, axis=1) + (1 - self.lam) * np.min(u, axis=1)
        return out[0] if single else out

    def cond_cdf(self, j, u):
        raise NotImplementedError("the mixture copula supports cdf evaluation only")

    cond_quantile = cond_cdf


# --------------------------------------------------------------------------
# Functional interface
# --------------------------------------------------------------------------


def copula_cdf(c: Copula, u):
    """Distribution function; boundary values follow groundedness."""
    u = np.asarray(u, dtype=float)
    if np.any((u < 0) | (u > 1)):
        raise ValueError("copula arguments must lie in [0, 1]")
    return c.cdf(u)


def cond_cdf(c: Copula, j: int, u):
    """``C(u_j | u_1, ..., u_{j-1})`` for rows ``u[:, :j]``."""
    out = c.cond_cdf(j, u)
    return out[0] if np.ndim(u) == 1 else out


def cond_quantile(c: Copula, j: int, u_prev, p):
    """Inverse of ``cond_cdf`` in its last argument."""
    p_arr = np.asarray(p, dtype=float)
    _interior(p_arr, "probabilities")
    u_prev = np.asarray(u_prev, dtype=float)
    out = c.cond_quantile(j, u_prev, p_arr)
    return out[0] if u_prev.ndim == 1 and np.ndim(out) else out


def cdm_sample(c: Copula, v):
    """Conditional distribution method: ``u_1 = v_1``, ``u_j = C^-(v_j | u_1..u_{j-1})``."""
    v = clamp_unit(v)
    if v.shape[-1] != c.d:
        raise ValueError(f"CDM needs {c.d}-dimensional points, got {v.shape[-1]}")
    return c.cdm(v)


def rosenblatt(c: Copula, u):
    """Rosenblatt transform, the inverse of :func:`cdm_sample`.

    Exact 0/1 coordinates (e.g. rounded sampler output) are moved inside.
    """
    u = _nudge_boundary(u)
    if u.shape[-1] != c.d:
        raise ValueError(f"expected {c.d}-dimensional points, got {u.shape[-1]}")
    return c.rosenblatt(u)


def stochastic_sample_gauss(c: GaussCopula, v):
    if not isinstance(c, GaussCopula):
        raise TypeError("stochastic_sample_gauss needs a Gauss copula")
    v, single = _as_2d(clamp_unit(v))
    if v.shape[1] != c.d:
        raise ValueError(f"expected {c.d}-dimensional points, got {v.shape[1]}")
    u = special.ndtr(special.ndtri(v) @ c.L.T)
    return u[0] if single else u


def stochastic_sample_t(c: TCopula, v):
    """``t_nu(sqrt(W) A z)``; the last coordinate of ``v`` drives ``W = 1 / Gamma(nu/2, nu/2)``."""
    if not isinstance(c, TCopula):
        raise TypeError("stochastic_sample_t needs a t copula")
    v, single = _as_2d(clamp_unit(v))
    if v.shape[1] != c.d + 1:
        raise ValueError(f"expected {c.d + 1}-dimensional points, got {v.shape[1]}")
    W = c.nu / 2 / special.gammaincinv(c.nu / 2, v[:, -1])
    x = np.sqrt(W)[:, None] * (special.ndtri(v[:, :-1]) @ c.L.T)
    u = special.stdtr(c.nu, x)
    return u[0] if single else u


def mo_algorithm_sample(c: ClaytonCopula, v):
    """Marshall--Olkin algorithm: ``u_j = psi(-log(v_{j+1}) / V)``, ``V = F^-(v_1)``.

    ``V ~ Gamma(1/theta, 1)``. Each ``u_j`` increases in ``v_1`` and ``v_{j+1}``.
    """
    if not isinstance(c, ClaytonCopula):
        raise TypeError("the Marshall-Olkin algorithm is implemented for Clayton copulas")
    v, single = _as_2d(clamp_unit(v))
    if v.shape[1] != c.d + 1:
        raise ValueError(f"expected {c.d + 1}-dimensional points, got {v.shape[1]}")
    V = special.gammaincinv(1.0 / c.theta, v[:, 0])
    E = -np.log(v[:, 1:])
    u = c.psi(E / V[:, None])
    return u[0] if single else u


def mo_copula_sample(c: MarshallOlkinCopula, v):
    """Shock representation ``(max(v1^(1/(1-a1)), v3^(1/a1)), max(v2^(1/(1-a2)), v3^(1/a2)))``."""
    if not isinstance(c, MarshallOlkinCopula):
        raise TypeError("mo_copula_sample needs a Marshall-Olkin copula")
    v, single = _as_2d(np.asarray(v, dtype=float))
    if v.shape[1] != 3:
        raise ValueError(f"expected 3-dimensional points, got {v.shape[1]}")
    a1, a2 = c.alpha1, c.alpha2
    u = np.column_stack(
        [
            np.maximum(v[:, 0] ** (1 / (1 - a1)), v[:, 2] ** (1 / a1)),
            np.maximum(v[:, 1] ** (1 / (1 - a2)), v[:, 2] ** (1 / a2)),
        ]
    )
    return u[0] if single else u


def kendall_tau(u) -> float:
    """Empirical Kendall's tau of a bivariate sample."""
    from scipy.stats import kendalltau

    u = np.asarray(u, dtype=float)
    return float(kendalltau(u[:, 0], u[:, 1]).statistic)
