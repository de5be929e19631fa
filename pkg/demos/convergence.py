"""Compare replicate variance of plain MC against randomized Sobol' points.

Estimates the basket-call price and the 99% expected shortfall of five
lognormal assets joined by a Clayton copula, then prints the variance per
sample size and the fitted decay exponent of each method.

    python3 demos/convergence.py [--B 25] [--threads 4]
"""
import argparse

from qrcopula import ClaytonCopula, lognormal_for_drift
from qrcopula.experiments import ExperimentConfig, Functional, Method, run_experiment


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--B", type=int, default=25)
    ap.add_argument("--threads", type=int, default=4)
    args = ap.parse_args(argv)

    d = 5
    margins = (lognormal_for_drift(),) * d
    grid = [2**m for m in range(10, 16)]
    methods = [Method("pseudo", name="MC"), Method("sobol", name="Sobol"), Method("ghalton", name="GHalton")]
    for f in (Functional("basket_call", margins, strike=100.0), Functional("es", margins)):
        cfg = ExperimentConfig(ClaytonCopula(2.0, d), f, methods, grid, B=args.B, master_seed=1, threads=args.threads)
        res = run_experiment(cfg)
        print(f"\n{f.kind}")
        print("n".rjust(8) + "".join(m.name.rjust(14) for m in methods))
        for n in grid:
            print(f"{n:8d}" + "".join(f"{res.variance(m.name, n):14.4e}" for m in methods))
        print("alpha".rjust(8) + "".join(f"{res.alpha(m.name):14.3f}" for m in methods))


if __name__ == "__main__":
    main()
