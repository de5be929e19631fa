"""Quasi-random copula sampling: low-discrepancy point sets, copula
transforms, discrepancies and RQMC experiments."""
from . import copulas, discrepancy, experiments, lds, specfun
from .copulas import (
    ClaytonCopula,
    GaussCopula,
    GumbelCopula,
    MarshallOlkinCopula,
    MixtureCopula,
    TCopula,
    cdm_sample,
    exchangeable_correlation,
    kendall_tau,
    rosenblatt,
)
from .discrepancy import l2_star_copula_discrepancy, l2_star_discrepancy, star_discrepancy_exact
from .experiments import ExperimentConfig, Functional, Method, run_experiment
from .lds import PointSet, PseudoRandom, Randomizer, SequenceSpec, generate, randomized_replicates
from .specfun import lognormal_for_drift, pareto_matching

__version__ = "0.1.0"
