"""Command line experiment runner.

Usage::

    riccatiflow <experiment> [--config FILE] [--surface NAME|PATH] ... [--out DIR]

Every flag can also be given in a key-value config file (``key = value``,
``#`` comments, keys spelled like the long flag without dashes, e.g.
``T = 500`` or ``representation = schottky``).  Command line flags win.

Artifacts are CSV files whose first lines are ``#`` comments carrying the
software version, the experiment, a hash of the effective configuration and
the seed.  Nothing is written unless the experiment completes.

Exit codes:
    0  success
    1  the experiment ran but its check failed (certify, canonical-check)
    2  usage error or unknown experiment
    3  malformed configuration
    4  preset or input file not found
    5  numerical failure (vertex hit, cusp capture, invalid geometry)
    6  output directory not writable
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__, config
from .moebius import GeometryError
from .presets import PresetNotFound, load_pingpong, load_representation, load_surface
from .surface import CuspCapture

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_NOT_FOUND = 4
EXIT_NUMERICAL = 5
EXIT_OUTPUT = 6

OUT_ENV = "RICCATIFLOW_OUT"

EXPERIMENTS = ("lyapunov", "sections", "srb", "schottky-sections", "cusp-integrability",
               "canonical-check", "certify")

# parameter name -> (type, default)
PARAMETERS = {
    "surface": (str, "thrice-punctured-sphere"),
    "representation": (str, "canonical"),
    "pingpong": (str, "schottky-9"),
    "T": (float, None),
    "dt": (float, 0.1),
    "step": (float, 1.0),
    "orbits": (int, 200),
    "samples": (int, 100),
    "words": (int, 100),
    "times": (str, "1,5,10"),
    "seed": (int, 0),
    "workers": (int, 1),
    "kind": (str, "parabolic"),
    "lambda": (float, 3.0),
    "theta": (float, 0.0),
    "n": (int, 2),
    "eps_exponents": (str, "4-16"),
    "base_bins": (int, 32),
    "fiber_chart": (str, "trivialized"),
    "factor": (float, 3.0),
}

DEFAULT_T = {"lyapunov": 1000.0, "sections": 30.0, "srb": 200.0}


# -- configuration ----------------------------------------------------------

def _convert(key, value):
    typ = PARAMETERS[key][0]
    try:
        if typ is int:
            return int(value)
        if typ is float:
            return config.parse_number(value) if isinstance(value, str) else float(value)
        return str(value)
    except (TypeError, ValueError) as exc:
        raise config.ConfigError(f"bad value for {key}: {value!r}") from exc


def build_config(experiment: str, file_values: dict, cli_values: dict) -> dict:
    cfg = {k: default for k, (_, default) in PARAMETERS.items()}
    for k, v in file_values.items():
        if k not in PARAMETERS:
            raise config.ConfigError(f"unknown config key {k!r}")
        cfg[k] = _convert(k, v)
    for k, v in cli_values.items():
        if v is not None:
            cfg[k] = _convert(k, v)
    if cfg["T"] is None:
        cfg["T"] = DEFAULT_T.get(experiment, 0.0)
    if not 0 <= cfg["seed"] < 2 ** 64:
        raise config.ConfigError("seed must be a 64-bit unsigned integer")
    if cfg["workers"] < 1:
        raise config.ConfigError("workers must be positive")
    for key in ("orbits", "samples", "words", "n", "base_bins"):
        if cfg[key] < 1:
            raise config.ConfigError(f"{key} must be positive")
    for key in ("T", "step"):
        if cfg[key] < 0 or (key == "step" and cfg[key] == 0):
            raise config.ConfigError(f"{key} must be positive")
    if not 0 < cfg["dt"] <= 0.1:
        raise config.ConfigError("dt must lie in (0, 0.1]")
    if cfg["fiber_chart"] not in ("fixed", "trivialized"):
        raise config.ConfigError("fiber_chart must be fixed or trivialized")
    if cfg["kind"] not in ("parabolic", "hyperbolic"):
        raise config.ConfigError("kind must be parabolic or hyperbolic")
    cfg["experiment"] = experiment
    return cfg


def config_hash(cfg: dict) -> str:
    blob = json.dumps({k: cfg[k] for k in sorted(cfg)}, sort_keys=True, default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed))


def _eps_exponents(spec: str) -> range:
    try:
        lo, hi = (int(x) for x in spec.split("-"))
    except ValueError as exc:
        raise config.ConfigError(f"eps_exponents must look like 4-16, got {spec!r}") from exc
    if not 1 <= lo < hi:
        raise config.ConfigError("eps_exponents needs 1 <= lo < hi")
    return range(lo, hi + 1)


def _times(spec: str) -> list:
    try:
        return [float(x) for x in spec.split(",") if x.strip()]
    except ValueError as exc:
        raise config.ConfigError(f"times must be a comma separated list, got {spec!r}") from exc


# -- output -----------------------------------------------------------------

def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


class Artifacts:
    """Collects files in memory and writes them only once the run has succeeded."""

    def __init__(self, cfg: dict):
        self.cfg = cfg
        self.files = {}
        self.report = []

    def header(self) -> list:
        return [f"# riccatiflow {__version__}",
                f"# experiment: {self.cfg['experiment']}",
                f"# config_hash: {config_hash(self.cfg)}",
                f"# seed: {self.cfg['seed']}"]

    def csv(self, name: str, columns, rows):
        buf = io.StringIO()
        for line in self.header():
            buf.write(line + "\n")
        buf.write(",".join(columns) + "\n")
        for row in rows:
            buf.write(",".join(fmt(x) for x in row) + "\n")
        self.files[name] = buf.getvalue()

    def say(self, line: str = ""):
        self.report.append(line)

    def commit(self, out: Path):
        text = "\n".join(self.header() + [""] + self.report) + "\n"
        self.files[f"{self.cfg['experiment']}-report.txt"] = text
        out.mkdir(parents=True, exist_ok=True)
        staged = []
        try:
            for name, content in self.files.items():
                fd, tmp = tempfile.mkstemp(dir=out, prefix=".tmp-", suffix=".part")
                with os.fdopen(fd, "w", newline="\n") as fh:
                    fh.write(content)
                staged.append((tmp, out / name))
        except BaseException:
            for tmp, _ in staged:
                Path(tmp).unlink(missing_ok=True)
            raise
        for tmp, final in staged:
            os.replace(tmp, final)
        return [final for _, final in staged]


# -- experiments ------------------------------------------------------------

def run_lyapunov(cfg, art: Artifacts) -> int:
    from .cocycle import check_integrability, lyapunov_spectrum
    from .surface import liouville_sample

    G = load_surface(cfg["surface"])
    rho = load_representation(cfg["representation"], G)
    rng = _rng(cfg["seed"])
    v0 = liouville_sample(G, rng)
    est = lyapunov_spectrum(rho, G, v0, cfg["T"], cfg["step"], rng)
    partial = est.partial_exponents()
    n = rho.n
    cols = ["block_index", "t"] + [f"partial_exponent_{i + 1}" for i in range(n)]
    art.csv("lyapunov.csv", cols,
            [(k + 1, (k + 1) * est.step, *row) for k, row in enumerate(partial)])
    integ = check_integrability(rho, G)
    art.say(f"surface: {G.name}  representation: {rho.name}  T = {est.T}  step = {est.step}")
    for i, (lam, se) in enumerate(zip(est.exponents, est.stderr), 1):
        art.say(f"lambda_{i} = {lam:.6f} +/- {se:.6f}")
    art.say(f"restarts after cusp capture: {est.restarts}")
    art.say(f"integrability (eigenvalue criterion): {'yes' if integ.integrable else 'no'}")
    if est.advisory:
        art.say(f"note: {est.advisory}")
    return EXIT_OK


def run_sections(cfg, art: Artifacts) -> int:
    from .cocycle import bottom_section_estimate, top_section_estimate
    from .surface import liouville_sample

    G = load_surface(cfg["surface"])
    rho = load_representation(cfg["representation"], G)
    if rho.n != 2:
        raise config.ConfigError("sections are reported as points of the Riemann sphere (n = 2)")
    rng = _rng(cfg["seed"])
    rows = []
    worst = 0.0
    for k, v in enumerate(liouville_sample(G, rng, cfg["samples"])):
        top = top_section_estimate(rho, G, v, cfg["T"])
        bot = bottom_section_estimate(rho, G, v, cfg["T"])
        zt, zb = top.point.affine(), bot.point.affine()
        worst = max(worst, top.change, bot.change)
        rows.append((k, v.base_point.real, v.base_point.imag, v.direction_angle,
                     zt.real, zt.imag, zb.real, zb.imag, top.change, bot.change))
    art.csv("sections.csv", ["sample", "base_re", "base_im", "direction", "top_re", "top_im",
                             "bottom_re", "bottom_im", "top_change", "bottom_change"], rows)
    art.say(f"surface: {G.name}  representation: {rho.name}  T = {cfg['T']}")
    art.say(f"largest change between T and T/2 estimates: {worst:.3e}")
    return EXIT_OK


def run_srb(cfg, art: Artifacts) -> int:
    from .srb import Grid, basin_test

    G = load_surface(cfg["surface"])
    rho = load_representation(cfg["representation"], G)
    grid = Grid(base_bins=cfg["base_bins"], fiber_chart=cfg["fiber_chart"])
    rep = basin_test(rho, G, T=cfg["T"], n_orbits=cfg["orbits"], seed=cfg["seed"],
                     dt=cfg["dt"], factor=cfg["factor"], grid=grid, backward=True,
                     workers=cfg["workers"])
    for j, name in enumerate(rep.names):
        art.csv(f"srb-{name}.csv", ["orbit_id", "average", "stderr"],
                [(i, rep.averages[i, j], rep.stderrs[i, j]) for i in range(len(rep.averages))])
    cols = ["base_i", "base_j", "lat", "lon", "weight"]
    art.csv("srb-hist-forward.csv", cols, rep.forward.rows())
    art.csv("srb-hist-backward.csv", cols, rep.backward.rows())
    tv = rep.forward.tv_distance(rep.backward)
    art.say(f"surface: {G.name}  representation: {rho.name}  T = {rep.T}  orbits = {cfg['orbits']}")
    for j, name in enumerate(rep.names):
        art.say(f"{name}: mean {rep.means[j]:.6f}  across {rep.across[j]:.4e}  "
                f"within {rep.within[j]:.4e}  ok={rep.per_observable[j]}")
    art.say(f"criterion: across < {rep.factor} x within for every observable")
    art.say(f"verdict: {rep.verdict}")
    art.say(f"orbits redrawn after cusp capture: {rep.resampled}")
    art.say(f"TV(forward, backward occupation) = {tv:.4f}")
    return EXIT_OK


def run_schottky_sections(cfg, art: Artifacts) -> int:
    from .schottky import ReducedBiWord, s_minus, s_plus

    system = load_pingpong(cfg["pingpong"])
    rng = _rng(cfg["seed"])
    rows = []
    for _ in range(cfg["words"]):
        b = ReducedBiWord.random(system.k, 64, rng)
        p, m = s_plus(system, b), s_minus(system, b)
        zp, zm = p.point.affine(), m.point.affine()
        word = " ".join(map(str, reversed(b.past))) + " | " + " ".join(map(str, b.future))
        rows.append((word, zp.real, zp.imag, zm.real, zm.imag, max(p.bound, m.bound)))
    art.csv("schottky-sections.csv",
            ["word", "s_plus_re", "s_plus_im", "s_minus_re", "s_minus_im", "bound"], rows)
    art.say(f"system: {system.name}  words: {cfg['words']}")
    art.say(f"largest bound: {max(r[-1] for r in rows):.3e}")
    return EXIT_OK


def run_cusp(cfg, art: Artifacts) -> int:
    from .cusp import CuspMonodromySpec, integrability_dichotomy

    try:
        spec = CuspMonodromySpec(cfg["n"], cfg["kind"], theta=cfg["theta"],
                                 lam=cfg["lambda"] if cfg["kind"] == "hyperbolic" else 1.0)
    except ValueError as exc:
        raise config.ConfigError(str(exc)) from exc
    rep = integrability_dichotomy(spec, _eps_exponents(cfg["eps_exponents"]))
    art.csv("cusp-integrability.csv", ["epsilon", "I_epsilon"], zip(rep.eps, rep.values))
    verdict = "integrable" if rep.integrable else "log-divergent"
    art.say(f"kind: {spec.kind}  n = {spec.n}  theta = {spec.theta}  lambda = {spec.lam}")
    art.say(f"fit I = a log(1/eps) + b: slope {rep.slope:.6f}  R^2 {rep.r2:.6f}")
    art.say(f"last increment: {rep.tail_increment:.3e}")
    art.say(f"verdict: {verdict}")
    return EXIT_OK


def run_canonical_check(cfg, art: Artifacts, tol: float = 1e-8) -> int:
    from .canonical import coordinate_rows

    G = load_surface(cfg["surface"])
    rows = coordinate_rows(G, _rng(cfg["seed"]), cfg["samples"], _times(cfg["times"]))
    art.csv("canonical-check.csv", ["t", "max_error"], rows)
    worst = max(r[1] for r in rows)
    ok = worst < tol
    art.say(f"surface: {G.name}  samples: {cfg['samples']}")
    art.say(f"max contraction error {worst:.3e} (tolerance {tol:g}): {'PASS' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def run_certify(cfg, art: Artifacts) -> int:
    from .schottky import certify_ping_pong

    system = load_pingpong(cfg["pingpong"])
    cert = certify_ping_pong(system)
    art.csv("certify.csv", ["quantity", "value"],
            [("min_gap", cert.min_gap), ("min_nesting", cert.min_nesting),
             ("contraction", cert.contraction), ("ok", cert.ok)])
    art.say(f"system: {system.name}")
    art.say(f"min gap {cert.min_gap:.6f}  min nesting {cert.min_nesting:.6f}  "
            f"contraction {cert.contraction:.6f}")
    for f in cert.failures:
        art.say(f"failure: {f}")
    art.say(f"certificate: {'PASS' if cert.ok else 'FAIL'}")
    return EXIT_OK if cert.ok else EXIT_CHECK_FAILED


RUNNERS = {
    "lyapunov": run_lyapunov,
    "sections": run_sections,
    "srb": run_srb,
    "schottky-sections": run_schottky_sections,
    "cusp-integrability": run_cusp,
    "canonical-check": run_canonical_check,
    "certify": run_certify,
}


# -- entry point ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="riccatiflow",
                                     description="Foliated geodesic flow experiments.")
    parser.add_argument("--version", action="version", version=f"riccatiflow {__version__}")
    parser.add_argument("experiment", help="one of: " + ", ".join(EXPERIMENTS))
    parser.add_argument("--config", help="key-value file with parameters")
    parser.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./riccatiflow-out)")
    for name, (typ, _) in PARAMETERS.items():
        flag = "--" + name.replace("_", "-")
        parser.add_argument(flag, dest=name, default=None, type=str,
                            metavar=typ.__name__.upper())
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    if args.experiment not in RUNNERS:
        print(f"riccatiflow: unknown experiment {args.experiment!r}; "
              f"choose from {', '.join(EXPERIMENTS)}", file=sys.stderr)
        return EXIT_USAGE
    try:
        file_values = config.read_keyvalue(args.config) if args.config else {}
        cli_values = {k: getattr(args, k) for k in PARAMETERS}
        cfg = build_config(args.experiment, file_values, cli_values)
        out = Path(args.out or os.environ.get(OUT_ENV) or "riccatiflow-out")
        art = Artifacts(cfg)
        status = RUNNERS[args.experiment](cfg, art)
    except FileNotFoundError as exc:
        print(f"riccatiflow: file not found: {exc.filename or exc}", file=sys.stderr)
        return EXIT_NOT_FOUND
    except PresetNotFound as exc:
        print(f"riccatiflow: {exc}", file=sys.stderr)
        return EXIT_NOT_FOUND
    except config.ConfigError as exc:
        print(f"riccatiflow: malformed configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (GeometryError, CuspCapture, FloatingPointError) as exc:
        print(f"riccatiflow: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    try:
        written = art.commit(out)
    except OSError as exc:
        print(f"riccatiflow: cannot write to {out}: {exc}", file=sys.stderr)
        return EXIT_OUTPUT
    print("\n".join(art.report))
    for p in written:
        print(f"wrote {p}")
    return status


if __name__ == "__main__":
    sys.exit(main())
