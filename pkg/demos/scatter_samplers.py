"""Draw 1000-point samples from three dependence structures and plot them.

Clayton (theta=2) by conditional inversion, t (nu=3, rho=1/sqrt 2) by the
stochastic representation and the bivariate shock copula (0.25, 0.75), each
fed by pseudo-random and by Sobol' points. Prints the empirical Kendall tau
of every sample; writes ``scatter_samplers.png`` when matplotlib is present.

    python3 demos/scatter_samplers.py
"""
import math

import numpy as np

from qrcopula import (
    ClaytonCopula,
    MarshallOlkinCopula,
    PseudoRandom,
    Randomizer,
    SequenceSpec,
    TCopula,
    exchangeable_correlation,
    generate,
    kendall_tau,
    randomized_replicates,
)
from qrcopula.experiments import sample_copula

N = 1000
CASES = [
    ("Clayton theta=2", ClaytonCopula(2.0, 2), "cdm"),
    ("t nu=3 rho=1/sqrt2", TCopula(3.0, exchangeable_correlation(2, 1 / math.sqrt(2))), "stoch_t"),
    ("shock (0.25, 0.75)", MarshallOlkinCopula(0.25, 0.75), "mo_shock"),
]


def points(kind, k):
    if kind == "pseudo":
        return randomized_replicates(PseudoRandom(k, 1), N, 1, Randomizer(None, 1))[0].points
    # skip the origin of the unrandomized sequence
    return generate(SequenceSpec("sobol", k), N, start=2).points


def main():
    samples = {}
    for label, c, sampler in CASES:
        k = c.d + (0 if sampler == "cdm" else 1)
        for kind in ("pseudo", "sobol"):
            U = sample_copula(c, sampler, points(kind, k))
            samples[label, kind] = U
            print(f"{label:22s} {kind:7s} tau = {kendall_tau(U):.3f}")
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        return
    fig, axes = plt.subplots(2, 3, figsize=(12, 8))
    for col, (label, _, _) in enumerate(CASES):
        for row, kind in enumerate(("pseudo", "sobol")):
            U = samples[label, kind]
            ax = axes[row, col]
            ax.scatter(U[:, 0], U[:, 1], s=2)
            ax.set_title(f"{label}, {kind}")
            ax.set_aspect("equal")
    fig.tight_layout()
    fig.savefig("scatter_samplers.png", dpi=120)
    print("wrote scatter_samplers.png")


if __name__ == "__main__":
    main()
