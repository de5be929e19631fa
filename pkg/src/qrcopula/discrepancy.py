"""Uniform and copula-induced discrepancies of point sets.

``star_discrepancy_exact`` and ``star_copula_discrepancy_grid`` share one
exact evaluator: for a continuous, coordinate-wise nondecreasing target
measure the supremum of the local discrepancy over anchored boxes is
attained (or approached) at nodes of the grid spanned by the point
coordinates and 1, using closed counts from below and open counts from
above.

L2 versions use the pair-sum expansion

    T*_C(P)^2 = n^-2 sum_{k,l} prod_i (1 - max(u_ki, u_li))
                + int C(z)^2 dz - (2/n) sum_k int_{[u_k, 1]} C(z) dz

with closed forms for the independence and mixture copulas, and a nested
Gauss--Legendre rule otherwise.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .copulas import Copula, MixtureCopula
from .lds import PointSet, format_float

__all__ = [
    "QuadratureError",
    "DiscrepancyReport",
    "star_discrepancy_exact",
    "l2_star_discrepancy",
    "l2_star_copula_discrepancy",
    "l2_star_copula_discrepancy_mixture",
    "star_copula_discrepancy_grid",
    "min_tail_integral",
    "EXACT_MAX_N",
    "EXACT_MAX_K",
    "MIXTURE_MAX_D",
]

EXACT_MAX_N = 512
EXACT_MAX_K = 2
MIXTURE_MAX_D = 8
QUADRATURE_MAX_D = 4


class QuadratureError(ArithmeticError):
    """The quadrature error estimate exceeds the requested tolerance."""


@dataclass(frozen=True)
class DiscrepancyReport:
    kind: str
    value: float
    n: int
    k: int
    copula: Copula | None = field(default=None, compare=False)

    def __post_init__(self):
        if not self.value >= 0:
            raise ValueError(f"discrepancy must be nonnegative, got {self.value}")

    HEADER = ("kind", "n", "k", "family", "params", "value")

    def csv_row(self) -> list[str]:
        family = self.copula.family if self.copula is not None else "uniform"
        params = json.dumps(self.copula.params(), separators=(",", ":")) if self.copula is not None else "{}"
        return [self.kind, str(self.n), str(self.k), family, params, format_float(self.value)]


def _points(P) -> np.ndarray:
    u = np.asarray(P, dtype=float)
    if u.ndim == 1:
        u = u[:, None]
    if u.ndim != 2 or u.shape[0] == 0:
        raise ValueError("expected a nonempty n x k array of points")
    if np.any((u < 0) | (u > 1)):
        raise ValueError("points must lie in [0, 1]^k")
    return u


# --------------------------------------------------------------------------
# Sup-norm discrepancies
# --------------------------------------------------------------------------


def _grid_sup(u: np.ndarray, measure) -> float:
    n, k = u.shape
    if k > EXACT_MAX_K or n > EXACT_MAX_N:
        raise ValueError(
            f"exact evaluation limited to k <= {EXACT_MAX_K} and n <= {EXACT_MAX_N}, got k={k}, n={n}"
        )
    axes = [np.union1d(u[:, j], [1.0]) for j in range(k)]
    idx = [np.searchsorted(axes[j], u[:, j]) for j in range(k)]
    shape = tuple(len(a) for a in axes)
    hist = np.zeros(shape, dtype=np.int64)
    np.add.at(hist, tuple(idx), 1)
    closed = hist
    for j in range(k):
        closed = np.cumsum(closed, axis=j)
    # open count at node t = closed count at the previous node on every axis
    opened = np.pad(closed, [(1, 0)] * k)[tuple(slice(0, s) for s in shape)]
    mesh = np.meshgrid(*axes, indexing="ij")
    vol = measure(np.stack([m.ravel() for m in mesh], axis=1)).reshape(shape)
    return float(max(np.max(closed / n - vol), np.max(vol - opened / n), 0.0))


def star_discrepancy_exact(P: PointSet | np.ndarray) -> float:
    """``D*(P) = sup_z |#{v in [0, z)} / n - prod z|``, exact for ``k <= 2``, ``n <= 512``."""
    return _grid_sup(_points(P), lambda z: np.prod(z, axis=1))


def star_copula_discrepancy_grid(P: PointSet | np.ndarray, c: Copula) -> float:
    """``sup_z |#{u in [0, z)} / n - C(z)|`` over anchored boxes.

    The grid evaluator is exact for every continuous copula: between grid
    nodes the counts are constant and ``C`` is nondecreasing.
    """
    u = _points(P)
    if u.shape[1] != c.d:
        raise ValueError(f"points have dimension {u.shape[1]}, copula has {c.d}")
    return _grid_sup(u, c.cdf)


# --------------------------------------------------------------------------
# L2 discrepancies
# --------------------------------------------------------------------------


def _pair_sum(u: np.ndarray, block: int = 256) -> float:
    """``sum_{k,l} prod_i (1 - max(u_ki, u_li))`` in a fixed summation order."""
    n = u.shape[0]
    total = 0.0
    one_minus = 1.0 - u
    for s in range(0, n, block):
        blk = np.prod(np.minimum(one_minus[s : s + block, None, :], one_minus[None, :, :]), axis=2)
        total += float(np.sum(blk))
    return total


def l2_star_discrepancy(P: PointSet | np.ndarray) -> float:
    """Warnock's formula for the L2 star discrepancy."""
    u = _points(P)
    n, d = u.shape
    t2 = 3.0**-d - 2.0 ** (1 - d) / n * float(np.sum(np.prod(1.0 - u**2, axis=1))) + _pair_sum(u) / n**2
    return math.sqrt(max(t2, 0.0))


def min_tail_integral(a) -> np.ndarray:
    """``int_{[a, 1]} min(z) dz = int_0^1 prod_i (1 - max(a_i, t)) dt`` for rows ``a``.

    Piecewise in ``t`` between the sorted ``a``: on ``[a_(m), a_(m+1)]`` the
    integrand is ``(1 - t)^m prod_{i > m} (1 - a_(i))``.
    """
    a = np.sort(np.atleast_2d(np.asarray(a, dtype=float)), axis=1)
    n, d = a.shape
    knots = np.concatenate([np.zeros((n, 1)), a, np.ones((n, 1))], axis=1)
    comp = 1.0 - knots
    # prod_{i > m} (1 - a_(i)) for m = 0..d (a_(i) is knots[:, i])
    tail = np.ones((n, d + 1))
    for m in range(d - 1, -1, -1):
        tail[:, m] = tail[:, m + 1] * comp[:, m + 1]
    out = np.zeros(n)
    for m in range(d + 1):
        out += tail[:, m] * (comp[:, m] ** (m + 1) - comp[:, m + 1] ** (m + 1)) / (m + 1)
    return out


def l2_star_copula_discrepancy_mixture(P: PointSet | np.ndarray, lam: float) -> float:
    """Closed-form ``T*_C`` for ``C = lam * Pi + (1 - lam) * M``.

    Terms: ``int C^2 = lam^2 / 3^d + 2 lam (1 - lam) d! / prod_i (2i + 1)
    + 2 (1 - lam)^2 / ((d + 1)(d + 2))`` and
    ``int_{[a,1]} C = lam prod(1 - a_i^2) / 2^d + (1 - lam) int_{[a,1]} min``.
    """
    u = _points(P)
    n, d = u.shape
    if not 0 < lam <= 1:
        raise ValueError(f"mixture weight must lie in (0, 1], got {lam}")
    if d > MIXTURE_MAX_D:
        raise ValueError(f"closed form limited to d <= {MIXTURE_MAX_D}, got {d}")
    mu = 1.0 - lam
    sq = (
        lam**2 / 3.0**d
        + 2.0 * mu**2 / ((d + 1) * (d + 2))
        + 2.0 * lam * mu * math.factorial(d) / math.prod(2 * i + 1 for i in range(1, d + 1))
    )
    tails = lam * np.prod(1.0 - u**2, axis=1) / 2.0**d
    if mu > 0:
        tails = tails + mu * min_tail_integral(u)
    t2 = _pair_sum(u) / n**2 + sq - 2.0 / n * float(np.sum(tails))
    return math.sqrt(max(t2, 0.0))


def _gauss_legendre(q: int):
    x, w = np.polynomial.legendre.leggauss(q)
    return 0.5 * (x + 1.0), 0.5 * w


def _panel_nodes(lo, breaks, x, w):
    """Nodes/weights on ``[lo, 1]`` split at ``clip(breaks, lo, 1)``.

    ``lo`` has shape ``(N,)`` and ``breaks`` shape ``(N, d)``.
    """
    cuts = np.concatenate([lo[:, None], np.clip(breaks, lo[:, None], 1.0), np.ones((lo.size, 1))], axis=1)
    left, width = cuts[:, :-1], np.diff(cuts, axis=1)
    nodes = left[:, :, None] + width[:, :, None] * x
    weights = width[:, :, None] * w
    return nodes.reshape(lo.size, -1), weights.reshape(lo.size, -1)


def _box_integrals(c: Copula, A: np.ndarray, q: int, power: int) -> np.ndarray:
    """``int_{[a, 1]} C(z)^power dz`` for each row ``a`` of ``A``.

    Nested Gauss--Legendre on ordering cells: the box is split into the
    ``d!`` cells ``z_s1 <= ... <= z_sd``. Inside a cell the smallest
    coordinate is fixed, so piecewise-smooth integrands such as ``min``
    become smooth; panel breaks at the sorted ``a`` absorb the kinks of the
    nested lower limits.
    """
    m_pts, d = A.shape
    x, w = _gauss_legendre(q)
    breaks = np.sort(A, axis=1)
    total = np.zeros(m_pts)
    for perm in itertools.permutations(range(d)):
        owner = np.arange(m_pts)
        nodes, weights = _panel_nodes(A[:, perm[0]], breaks, x, w)
        m = nodes.shape[1]
        owner = np.repeat(owner, m)
        cols = [nodes.ravel()]
        wt = weights.ravel()
        for level in range(1, d):
            lo = np.maximum(A[owner, perm[level]], cols[-1])
            nodes, weights = _panel_nodes(lo, breaks[owner], x, w)
            m = nodes.shape[1]
            owner = np.repeat(owner, m)
            cols = [np.repeat(col, m) for col in cols] + [nodes.ravel()]
            wt = np.repeat(wt, m) * weights.ravel()
        z = np.empty((wt.size, d))
        for level, j in enumerate(perm):
            z[:, j] = cols[level]
        total += np.bincount(owner, weights=wt * c.cdf(z) ** power, minlength=m_pts)
    return total


def _quadrature_t2(u: np.ndarray, c: Copula, q: int, block: int = 8) -> float:
    n, d = u.shape
    sq = float(_box_integrals(c, np.zeros((1, d)), q, 2)[0])
    tails = sum(float(np.sum(_box_integrals(c, u[s : s + block], q, 1))) for s in range(0, n, block))
    return _pair_sum(u) / n**2 + sq - 2.0 / n * tails


def l2_star_copula_discrepancy(
    P: PointSet | np.ndarray,
    c: Copula,
    method: str = "auto",
    order: int = 8,
    tol: float = 1e-6,
) -> float:
    """``T*_C`` of a point set with respect to copula ``c``.

    ``method="auto"`` uses the closed form for the mixture family and
    nested Gauss--Legendre quadrature (``d <= 4``) otherwise;
    ``"quadrature"`` forces the quadrature path. The quadrature error is
    estimated by comparing rules of order ``order`` and ``order + 4``;
    :class:`QuadratureError` is raised if it exceeds ``tol`` in ``T*_C^2``.
    """
    if method not in ("auto", "quadrature"):
        raise ValueError(f"unknown method {method!r}")
    u = _points(P)
    n, d = u.shape
    if d != c.d:
        raise ValueError(f"points have dimension {d}, copula has {c.d}")
    c.cdf(np.full(d, 0.5))  # raises CdfUnavailable for elliptical families
    if method == "auto" and isinstance(c, MixtureCopula):
        return l2_star_copula_discrepancy_mixture(u, c.lam)
    if d > QUADRATURE_MAX_D:
        raise ValueError(f"quadrature path limited to d <= {QUADRATURE_MAX_D}, got {d}")
    lo = _quadrature_t2(u, c, order)
    hi = _quadrature_t2(u, c, order + 4)
    if abs(hi - lo) > tol:
        raise QuadratureError(
            f"quadrature error estimate {abs(hi - lo):.3g} exceeds tolerance {tol:.3g} "
            f"(orders {order} and {order + 4}); increase order"
        )
    return math.sqrt(max(hi, 0.0))
