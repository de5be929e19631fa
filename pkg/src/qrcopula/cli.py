"""Command-line interface: ``qrcopula {gen,sample,discrepancy,experiment}``.

Every command reads one JSON config file. Exit status is 0 on success,
1 for I/O errors, 2 for invalid configuration and 3 for numerical failures.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import copulas as cop
from . import discrepancy as disc
from . import experiments as exp
from . import specfun
from .lds import PointSet, PseudoRandom, Randomizer, SequenceSpec, generate, randomized_replicates, write_rows

EXIT_OK, EXIT_IO, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


def _strict(block, name: str, allowed: set[str], required: set[str] = frozenset()) -> dict:
    if not isinstance(block, dict):
        raise ConfigError(f"{name}: expected an object, got {type(block).__name__}")
    unknown = sorted(set(block) - allowed)
    if unknown:
        raise ConfigError(f"{name}: unknown key(s) {', '.join(unknown)}")
    missing = sorted(required - set(block))
    if missing:
        raise ConfigError(f"{name}: missing key(s) {', '.join(missing)}")
    return block


def _field(name: str, fn, *args):
    try:
        return fn(*args)
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{name}: {exc}") from exc


# --------------------------------------------------------------------------
# Config blocks
# --------------------------------------------------------------------------

SEQUENCE_KEYS = {"kind", "dimension", "n", "start", "bases", "scramble_factors", "randomization", "seed"}


def parse_sequence(block: dict, dimension: int | None = None):
    b = _strict(block, "sequence", SEQUENCE_KEYS, {"kind", "n"})
    kind = b["kind"]
    k = b.get("dimension", dimension)
    if k is None:
        raise ConfigError("sequence: missing key dimension")
    if dimension is not None and k != dimension:
        raise ConfigError(f"sequence.dimension: sampler needs {dimension}, got {k}")
    if kind == "pseudo":
        for key in ("bases", "scramble_factors"):
            if key in b:
                raise ConfigError(f"sequence.{key}: not used by pseudo-random sequences")
        spec = PseudoRandom(int(k), int(b.get("seed", 0)))
    else:
        spec = _field(
            "sequence",
            SequenceSpec,
            kind,
            k,
            tuple(b["bases"]) if "bases" in b else None,
            tuple(b["scramble_factors"]) if "scramble_factors" in b else None,
        )
    n = b["n"]
    if not isinstance(n, int) or n < 1:
        raise ConfigError(f"sequence.n: expected a positive integer, got {n!r}")
    start = b.get("start", 1)
    if not isinstance(start, int) or start < 1:
        raise ConfigError(f"sequence.start: expected an integer >= 1, got {start!r}")
    rnd = _field("sequence.randomization", Randomizer, b.get("randomization"), int(b.get("seed", 0)))
    return spec, n, start, rnd


COPULA_KEYS = {"family", "d", "theta", "nu", "P", "rho", "tau", "alpha1", "alpha2", "lam"}


def _correlation(b: dict, d: int | None) -> np.ndarray:
    if "P" in b:
        return np.asarray(b["P"], dtype=float)
    if d is None:
        raise ConfigError("copula: d is required with rho/tau")
    if "rho" in b:
        rho = float(b["rho"])
    elif "tau" in b:
        rho = _field("copula.tau", specfun.kendall_tau_maps, float(b["tau"]))["rho_t"]
    else:
        raise ConfigError("copula: one of P, rho or tau is required")
    return cop.exchangeable_correlation(d, rho)


def parse_copula(block: dict) -> cop.Copula:
    b = _strict(block, "copula", COPULA_KEYS, {"family"})
    fam = b["family"]
    d = b.get("d")
    allowed = {
        "gauss": {"family", "d", "P", "rho", "tau"},
        "t": {"family", "d", "nu", "P", "rho", "tau"},
        "clayton": {"family", "d", "theta", "tau"},
        "gumbel": {"family", "d", "theta"},
        "marshall_olkin": {"family", "d", "alpha1", "alpha2"},
        "mixture": {"family", "d", "lam"},
    }
    if fam not in allowed:
        raise ConfigError(f"copula.family: unknown family {fam!r}; expected one of {sorted(allowed)}")
    _strict(b, f"copula ({fam})", allowed[fam])

    def build():
        if fam == "gauss":
            return cop.GaussCopula(_correlation(b, d))
        if fam == "t":
            return cop.TCopula(float(b.get("nu", 3.0)), _correlation(b, d))
        if fam == "clayton":
            theta = b["theta"] if "theta" in b else specfun.kendall_tau_maps(float(b["tau"]))["theta_clayton"]
            return cop.ClaytonCopula(float(theta), int(d or 2))
        if fam == "gumbel":
            return cop.GumbelCopula(float(b["theta"]), int(d or 2))
        if fam == "marshall_olkin":
            if d not in (None, 2):
                raise ValueError("the Marshall-Olkin copula is bivariate")
            return cop.MarshallOlkinCopula(float(b["alpha1"]), float(b["alpha2"]))
        return cop.MixtureCopula(float(b["lam"]), int(d))

    try:
        return _field("copula", build)
    except KeyError as exc:
        raise ConfigError(f"copula ({fam}): missing key {exc.args[0]}") from exc


MARGIN_KEYS = {"kind", "meanlog", "sdlog", "mu", "sigma", "s0", "shape", "scale", "rate", "support"}


def parse_margin(block: dict) -> specfun.Margin:
    b = _strict(block, "functional.margins", MARGIN_KEYS, {"kind"})
    kind = b["kind"]

    def drift():
        return specfun.lognormal_for_drift(b.get("mu", 0.0001), b.get("sigma", 0.2), b.get("s0", 100.0))

    def build():
        if kind == "lognormal":
            if "meanlog" in b or "sdlog" in b:
                return specfun.LogNormal(float(b["meanlog"]), float(b["sdlog"]))
            return drift()
        if kind == "pareto":
            if "shape" in b or "scale" in b:
                return specfun.Pareto(float(b["shape"]), float(b["scale"]), b.get("support", "lomax"))
            return specfun.pareto_matching(drift(), support=b.get("support", "classical"))
        if kind == "exponential":
            return specfun.Exponential(float(b.get("rate", 1.0)))
        if kind == "uniform":
            return specfun.Uniform()
        raise ValueError(f"unknown margin kind {kind!r}")

    try:
        return _field("functional.margins", build)
    except KeyError as exc:
        raise ConfigError(f"functional.margins: missing key {exc.args[0]}") from exc


def parse_functional(block: dict, d: int) -> exp.Functional:
    b = _strict(block, "functional", {"kind", "margins", "level", "strike"}, {"kind"})
    margins = b.get("margins", [])
    if isinstance(margins, dict):
        margins = [margins] * d
    ms = tuple(parse_margin(m) for m in margins)
    return _field("functional", exp.Functional, b["kind"], ms, float(b.get("level", 0.99)), float(b.get("strike", 100.0)))


def parse_experiment(cfg: dict, seed: int | None, threads: int | None) -> exp.ExperimentConfig:
    c = parse_copula(cfg["copula"])
    f = parse_functional(cfg["functional"], c.d)
    b = _strict(
        cfg["experiment"], "experiment", {"methods", "n_grid", "B", "randomization", "seed", "threads"}, {"methods", "n_grid"}
    )
    methods = []
    for i, m in enumerate(b["methods"]):
        if isinstance(m, str):
            m = {"sequence": m}
        _strict(m, f"experiment.methods[{i}]", {"sequence", "sampler", "name"}, {"sequence"})
        methods.append(_field(f"experiment.methods[{i}]", exp.Method, m["sequence"], m.get("sampler", cfg.get("sampler", "cdm")), m.get("name")))
    return _field(
        "experiment",
        exp.ExperimentConfig,
        c,
        f,
        tuple(methods),
        tuple(b["n_grid"]),
        int(b.get("B", 25)),
        b.get("randomization", "digital_shift"),
        int(seed if seed is not None else b.get("seed", 0)),
        int(threads if threads is not None else b.get("threads", 1)),
    )


DISCREPANCY_KEYS = {"measure", "sequences", "coordinates"}
MEASURES = ("star_exact", "l2_star", "l2_star_copula", "star_copula_grid")


# --------------------------------------------------------------------------
# Commands
# --------------------------------------------------------------------------


def _points(spec, n, start, rnd, key=()) -> PointSet:
    if rnd.kind is None and not isinstance(spec, PseudoRandom):
        return generate(spec, n, start)
    return randomized_replicates(spec, n, 1, rnd, start=start, key=key)[0]


def _seeded(block: dict, seed: int | None) -> dict:
    if seed is None:
        return block
    return {**block, "seed": seed}


def _write_csv(path, rows: np.ndarray, comment: str) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(f"# {comment}\n")
        write_rows(fh, rows)


def cmd_gen(cfg: dict, args) -> int:
    _strict(cfg, "config", {"sequence"}, {"sequence"})
    spec, n, start, rnd = parse_sequence(_seeded(cfg["sequence"], args.seed))
    P = _points(spec, n, start, rnd)
    seed = rnd.seed if (rnd.kind is not None or isinstance(spec, PseudoRandom)) else "none"
    _write_csv(args.out, P.points, f"{P.provenance()} seed={seed}")
    return EXIT_OK


def _sampler_points(cfg: dict, seed: int | None, sampler: str, c: cop.Copula):
    extra = exp.SAMPLERS[sampler][1]
    try:
        exp.Method("pseudo", sampler).check(c)
    except ValueError as exc:
        raise ConfigError(f"sampler: {exc}") from exc
    block = dict(cfg["sequence"])
    # an unrandomized low-discrepancy sequence skips the origin by default
    if block.get("randomization") is None and block.get("kind") != "pseudo":
        block.setdefault("start", 2)
    spec, n, start, rnd = parse_sequence(_seeded(block, seed), c.d + extra)
    return _points(spec, n, start, rnd)


def cmd_sample(cfg: dict, args) -> int:
    _strict(cfg, "config", {"sequence", "copula", "sampler"}, {"sequence", "copula"})
    c = parse_copula(cfg["copula"])
    sampler = cfg.get("sampler", "cdm")
    if sampler not in exp.SAMPLERS:
        raise ConfigError(f"sampler: unknown sampler {sampler!r}; expected one of {sorted(exp.SAMPLERS)}")
    P = _sampler_points(cfg, args.seed, sampler, c)
    U = exp.sample_copula(c, sampler, P.points)
    _write_csv(args.out, U, f"{P.provenance()} copula={c.family} params={json.dumps(c.params())} sampler={sampler}")
    return EXIT_OK


def cmd_discrepancy(cfg: dict, args) -> int:
    _strict(cfg, "config", {"sequence", "copula", "sampler", "discrepancy"}, {"sequence", "discrepancy"})
    b = _strict(cfg["discrepancy"], "discrepancy", DISCREPANCY_KEYS, {"measure"})
    measure = b["measure"]
    if measure not in MEASURES:
        raise ConfigError(f"discrepancy.measure: unknown measure {measure!r}; expected one of {MEASURES}")
    coords = b.get("coordinates")
    if coords is not None and (not coords or any(not isinstance(j, int) or j < 1 for j in coords)):
        raise ConfigError("discrepancy.coordinates: expected a list of 1-based coordinate indices")
    c = parse_copula(cfg["copula"]) if "copula" in cfg else None
    if measure in ("l2_star_copula", "star_copula_grid") and c is None:
        raise ConfigError(f"discrepancy.measure: {measure} needs a copula block")
    kinds = b.get("sequences", [cfg["sequence"].get("kind")])
    rows = []
    for kind in kinds:
        seq = {**cfg["sequence"], "kind": kind}
        if coords is not None:
            seq.setdefault("dimension", max(coords))
        if c is not None:
            sampler = cfg.get("sampler", "cdm")
            if sampler not in exp.SAMPLERS:
                raise ConfigError(f"sampler: unknown sampler {sampler!r}")
            P = _sampler_points({**cfg, "sequence": seq}, args.seed, sampler, c)
            u = exp.sample_copula(c, sampler, P.points)
        else:
            spec, n, start, rnd = parse_sequence(_seeded(seq, args.seed))
            P = _points(spec, n, start, rnd)
            u = P.points
        if coords is not None:
            if max(coords) > u.shape[1]:
                raise ConfigError(f"discrepancy.coordinates: index {max(coords)} exceeds dimension {u.shape[1]}")
            u = u[:, [j - 1 for j in coords]]
        try:
            if measure == "star_exact":
                value = disc.star_discrepancy_exact(u)
            elif measure == "l2_star":
                value = disc.l2_star_discrepancy(u)
            elif measure == "l2_star_copula":
                value = disc.l2_star_copula_discrepancy(u, c)
            else:
                value = disc.star_copula_discrepancy_grid(u, c)
        except (ValueError, cop.CdfUnavailable) as exc:
            raise ConfigError(f"discrepancy: {exc}") from exc
        label = kind if coords is None else f"{kind}[{','.join(map(str, coords))}]"
        rep = disc.DiscrepancyReport(measure, value, u.shape[0], u.shape[1], c)
        rows.append([label, *rep.csv_row()])
        print(f"{label}: {measure} = {value:.6g}")
    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["source", *disc.DiscrepancyReport.HEADER])
            w.writerows(rows)
    return EXIT_OK


def cmd_experiment(cfg: dict, args) -> int:
    _strict(cfg, "config", {"copula", "functional", "sampler", "experiment"}, {"copula", "functional", "experiment"})
    ec = parse_experiment(cfg, args.seed, args.threads)
    res = exp.run_experiment(ec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    res.write_replicates(out / "replicates.csv")
    res.write_summary(out / "summary.csv")
    for m in ec.methods:
        a = res.alpha(m.name)
        shown = "n/a" if a is None else f"{a:.3f}"
        print(f"{m.name}: alpha = {shown}")
        bad = sum(res.degenerate.get((m.name, n), 0) for n in ec.n_grid)
        if bad:
            print(f"{m.name}: {bad} degenerate replicate(s)", file=sys.stderr)
    return EXIT_OK


COMMANDS = {"gen": cmd_gen, "sample": cmd_sample, "discrepancy": cmd_discrepancy, "experiment": cmd_experiment}


def bundled_configs() -> list[str]:
    return sorted(p.name for p in resources.files("qrcopula.configs").iterdir() if p.name.endswith(".cfg"))


def load_config(path: str) -> dict:
    p = Path(path)
    if not p.exists() and p.name == path and path in bundled_configs():
        text = resources.files("qrcopula.configs").joinpath(path).read_text()
    else:
        text = p.read_text()
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return cfg


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qrcopula", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", required=True, help="JSON config file, or the name of a bundled config")
    ap.add_argument("--out", help="output file (gen, sample, discrepancy) or directory (experiment)")
    ap.add_argument("--seed", type=int, help="override the seed in the config")
    ap.add_argument("--threads", type=int, help="worker threads for experiments")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command in ("gen", "sample", "experiment") and not args.out:
        print(f"error: {args.command} requires --out", file=sys.stderr)
        return EXIT_CONFIG
    if args.threads is not None and args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config)
        return COMMANDS[args.command](cfg, args)
    except OSError as exc:
        print(f"error: {exc.strerror or exc}: {exc.filename or args.config}", file=sys.stderr)
        return EXIT_IO
    except ArithmeticError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, TypeError, KeyError, NotImplementedError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) else exc
        print(f"invalid configuration: {msg}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
