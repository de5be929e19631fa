"""RQMC/MC estimation harness: functionals, replicate statistics, rate fits.

A run draws ``B`` independently randomized copies of a point set for every
sample size ``n`` and every method (sequence + sampler), maps them to
copula samples, evaluates a functional per replicate and summarizes the
``B`` estimates. All randomness is derived from
``(master_seed, method index, n, replicate)``, so results do not depend on
thread scheduling.
"""
from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import copulas as cop
from .lds import PseudoRandom, Randomizer, SequenceSpec, format_float, randomized_replicates
from .specfun import Margin

__all__ = [
    "FUNCTIONAL_KINDS",
    "SAMPLERS",
    "DegenerateReplicate",
    "Functional",
    "Method",
    "ExperimentConfig",
    "ExperimentResult",
    "risk_measures",
    "evaluate_functional",
    "psi2_mean",
    "true_value",
    "sample_copula",
    "run_experiment",
    "fit_alpha",
]

FUNCTIONAL_KINDS = (
    "basket_call",
    "best_of_call",
    "var",
    "es",
    "allocation_first",
    "allocation_middle",
    "psi1",
    "psi2",
)
FINANCE_KINDS = FUNCTIONAL_KINDS[:6]
TAIL_KINDS = FUNCTIONAL_KINDS[2:6]

# sampler name -> (function, extra point dimensions, required family)
SAMPLERS = {
    "cdm": (cop.cdm_sample, 0, None),
    "stoch_gauss": (cop.stochastic_sample_gauss, 0, cop.GaussCopula),
    "stoch_t": (cop.stochastic_sample_t, 1, cop.TCopula),
    "mo": (cop.mo_algorithm_sample, 1, cop.ClaytonCopula),
    "mo_shock": (cop.mo_copula_sample, 1, cop.MarshallOlkinCopula),
}


class DegenerateReplicate(ArithmeticError):
    """Empty exceedance set in a tail functional."""


@dataclass(frozen=True)
class Functional:
    """What to estimate from a copula sample.

    Finance kinds map ``U`` through ``margins`` to losses ``X`` with sum
    ``S``; ``psi1``/``psi2`` act on the copula scale.
    """

    kind: str
    margins: tuple[Margin, ...] = ()
    level: float = 0.99
    strike: float = 100.0

    def __post_init__(self):
        if self.kind not in FUNCTIONAL_KINDS:
            raise ValueError(f"unknown functional {self.kind!r}; expected one of {FUNCTIONAL_KINDS}")
        if not 0 < self.level < 1:
            raise ValueError(f"level must lie in (0, 1), got {self.level}")
        if not self.strike > 0:
            raise ValueError(f"strike must be positive, got {self.strike}")
        object.__setattr__(self, "margins", tuple(self.margins))
        if self.kind in FINANCE_KINDS and not self.margins:
            raise ValueError(f"functional {self.kind!r} needs margins")


def risk_measures(X: np.ndarray, level: float) -> dict:
    """VaR, ES and Euler allocations of ``S = X.sum(1)`` from one sample.

    VaR is the order statistic ``S_(ceil(level n))``; ES and allocations
    average over the strict exceedances ``S > VaR``.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n = X.shape[0]
    if level * n < 10:
        raise ValueError(f"level * n must be at least 10 for tail estimates, got {level * n:g}")
    S = X.sum(axis=1)
    r = math.ceil(level * n - 1e-9)
    var = float(np.partition(S, r - 1)[r - 1])
    tail = S > var
    if not tail.any():
        raise DegenerateReplicate(f"no sample exceeds the VaR estimate {var:g} (n={n}, level={level})")
    return {
        "var": var,
        "es": float(S[tail].mean()),
        "allocations": X[tail].mean(axis=0),
        "exceedances": int(tail.sum()),
    }


def _g1(v: np.ndarray) -> np.ndarray:
    j = np.arange(1, v.shape[1] + 1)
    return np.prod((np.abs(4.0 * v - 1.0) + j) / (1.0 + j), axis=1)


def psi2_mean(d: int) -> float:
    """``prod_{j<=d} (j + 5/4) / (j + 1)``, using ``int_0^1 |4v - 1| dv = 5/4``."""
    return math.prod((j + 1.25) / (j + 1) for j in range(1, d + 1))


def true_value(f: Functional, d: int) -> float | None:
    if f.kind == "psi1":
        return 1.0
    if f.kind == "psi2":
        return psi2_mean(d)
    return None


def evaluate_functional(f: Functional, U, copula: cop.Copula | None = None) -> float:
    """One replicate estimate of ``f`` from the ``n x d`` copula sample ``U``."""
    U = np.asarray(U, dtype=float)
    if U.ndim == 1:
        U = U[:, None]
    n, d = U.shape
    if f.kind == "psi1":
        return float(np.mean(3.0 * np.sum(U**2, axis=1) / d))
    if f.kind == "psi2":
        if copula is None:
            raise ValueError("psi2 needs the copula for the Rosenblatt transform")
        return float(np.mean(_g1(cop.rosenblatt(copula, U))))
    if len(f.margins) != d:
        raise ValueError(f"{len(f.margins)} margins given for a {d}-dimensional sample")
    Uc = cop.clamp_unit(U)
    X = np.column_stack([m.quantile(Uc[:, j]) for j, m in enumerate(f.margins)])
    if f.kind == "basket_call":
        return float(np.mean(np.maximum(X.mean(axis=1) - f.strike, 0.0)))
    if f.kind == "best_of_call":
        return float(np.mean(np.maximum(X.max(axis=1) - f.strike, 0.0)))
    rm = risk_measures(X, f.level)
    if f.kind == "var":
        return rm["var"]
    if f.kind == "es":
        return rm["es"]
    if f.kind == "allocation_first":
        return float(rm["allocations"][0])
    return float(rm["allocations"][math.ceil(d / 2) - 1])


@dataclass(frozen=True)
class Method:
    """A point sequence (``"pseudo"``, ``"sobol"``, ``"halton"``, ``"ghalton"``) and a sampler."""

    sequence: str
    sampler: str = "cdm"
    name: str | None = None

    def __post_init__(self):
        if self.sequence not in ("pseudo", "sobol", "halton", "ghalton"):
            raise ValueError(f"unknown sequence {self.sequence!r}")
        if self.sampler not in SAMPLERS:
            raise ValueError(f"unknown sampler {self.sampler!r}; expected one of {tuple(SAMPLERS)}")
        if self.name is None:
            object.__setattr__(self, "name", f"{self.sequence}-{self.sampler}")

    def point_dimension(self, d: int) -> int:
        return d + SAMPLERS[self.sampler][1]

    def spec(self, d: int, seed: int = 0) -> SequenceSpec | PseudoRandom:
        k = self.point_dimension(d)
        if self.sequence == "pseudo":
            return PseudoRandom(k, seed)
        return SequenceSpec(self.sequence, k)

    def check(self, c: cop.Copula) -> None:
        family = SAMPLERS[self.sampler][2]
        if family is not None and not isinstance(c, family):
            raise ValueError(f"sampler {self.sampler!r} needs a {family.family} copula, got {c.family}")
        if isinstance(c, cop.MixtureCopula):
            raise ValueError("the mixture copula cannot be sampled")


def sample_copula(c: cop.Copula, sampler: str, v) -> np.ndarray:
    fn, extra, _ = SAMPLERS[sampler]
    return fn(c, v)


@dataclass(frozen=True)
class ExperimentConfig:
    copula: cop.Copula
    functional: Functional
    methods: tuple[Method, ...]
    n_grid: tuple[int, ...]
    B: int = 25
    randomization: str | None = "digital_shift"
    master_seed: int = 0
    threads: int = 1

    def __post_init__(self):
        object.__setattr__(self, "methods", tuple(self.methods))
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        if not self.methods:
            raise ValueError("at least one method is required")
        if not self.n_grid or min(self.n_grid) < 1:
            raise ValueError("n_grid must be a nonempty list of positive sizes")
        if self.B < 1:
            raise ValueError(f"B must be >= 1, got {self.B}")
        Randomizer(self.randomization, self.master_seed)
        names = [m.name for m in self.methods]
        if len(set(names)) != len(names):
            raise ValueError(f"method names must be unique, got {names}")
        for m in self.methods:
            m.check(self.copula)
        f = self.functional
        if f.kind in FINANCE_KINDS and len(f.margins) != self.copula.d:
            raise ValueError(f"{len(f.margins)} margins given for a {self.copula.d}-dimensional copula")
        if f.kind in TAIL_KINDS and f.level * min(self.n_grid) < 10:
            raise ValueError("level * n must be at least 10 for every n in the grid")


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    estimates: dict[tuple[str, int], np.ndarray] = field(default_factory=dict)
    degenerate: dict[tuple[str, int], int] = field(default_factory=dict)

    @property
    def truth(self) -> float | None:
        return true_value(self.config.functional, self.config.copula.d)

    def mean(self, method: str, n: int) -> float:
        return float(np.nanmean(self.estimates[method, n]))

    def variance(self, method: str, n: int) -> float:
        """Sample variance of the ``B`` replicate estimates (0 when ``B = 1``)."""
        est = self.estimates[method, n]
        est = est[np.isfinite(est)]
        return float(np.var(est, ddof=1)) if est.size > 1 else 0.0

    def mean_abs_error(self, method: str, n: int) -> float | None:
        if self.truth is None:
            return None
        return float(np.nanmean(np.abs(self.estimates[method, n] - self.truth)))

    def alpha(self, method: str, what: str = "variance") -> float | None:
        """Fitted decay exponent of the variance (or mean absolute error) over ``n``."""
        grid = self.config.n_grid
        if len(grid) < 3:
            return None
        vals = [self.variance(method, n) if what == "variance" else self.mean_abs_error(method, n) for n in grid]
        if any(v is None or not v > 0 for v in vals):
            return None
        return fit_alpha(grid, vals)

    def write_replicates(self, path) -> None:
        rnd = self.config.randomization or "none"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["method", "sequence", "randomization", "n", "replicate", "estimate"])
            for m in self.config.methods:
                for n in self.config.n_grid:
                    for r, e in enumerate(self.estimates[m.name, n]):
                        w.writerow([m.name, m.sequence, rnd if m.sequence != "pseudo" else "none", n, r, format_float(e)])

    def write_summary(self, path) -> None:
        def fmt(x):
            return "" if x is None else format_float(x)

        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["method", "n", "mean", "variance", "meanAbsError", "alpha", "alpha_mae", "degenerate"])
            for m in self.config.methods:
                a, a_mae = self.alpha(m.name), self.alpha(m.name, "mae")
                for n in self.config.n_grid:
                    w.writerow(
                        [
                            m.name,
                            n,
                            fmt(self.mean(m.name, n)),
                            fmt(self.variance(m.name, n)),
                            fmt(self.mean_abs_error(m.name, n)),
                            fmt(a),
                            fmt(a_mae),
                            self.degenerate.get((m.name, n), 0),
                        ]
                    )


def _run_cell(cfg: ExperimentConfig, mi: int, n: int) -> tuple[np.ndarray, int]:
    m = cfg.methods[mi]
    c = cfg.copula
    spec = m.spec(c.d, cfg.master_seed)
    randomized = cfg.randomization is not None
    # an unrandomized sequence starts after the origin
    start = 1 if randomized or m.sequence == "pseudo" else 2
    rnd = Randomizer(cfg.randomization, cfg.master_seed)
    reps = randomized_replicates(spec, n, cfg.B, rnd, start=start, key=(mi, n))
    est = np.empty(cfg.B)
    bad = 0
    for r, P in enumerate(reps):
        U = sample_copula(c, m.sampler, P.points)
        try:
            est[r] = evaluate_functional(cfg.functional, U, c)
        except DegenerateReplicate:
            est[r] = np.nan
            bad += 1
    return est, bad


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    tasks = [(mi, n) for mi in range(len(cfg.methods)) for n in cfg.n_grid]
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            outs = list(pool.map(lambda t: _run_cell(cfg, *t), tasks))
    else:
        outs = [_run_cell(cfg, *t) for t in tasks]
    res = ExperimentResult(cfg)
    for (mi, n), (est, bad) in zip(tasks, outs):
        key = (cfg.methods[mi].name, n)
        res.estimates[key] = est
        if bad:
            res.degenerate[key] = bad
    return res


def fit_alpha(n_grid, values) -> float:
    """``alpha`` such that ``values ~ c n^-alpha``, by least squares on the log-log scale."""
    n = np.asarray(n_grid, dtype=float)
    v = np.asarray(values, dtype=float)
    if n.shape != v.shape or n.size < 3:
        raise ValueError("need at least 3 (n, value) pairs")
    if np.any(~(v > 0)) or np.any(~(n > 0)):
        raise ValueError("sample sizes and values must be positive")
    slope = np.polyfit(np.log(n), np.log(v), 1)[0]
    return float(-slope)
