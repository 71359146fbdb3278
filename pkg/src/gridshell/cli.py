"""
Command-line front end: ``gridshell map | optimize | baseline``.

Settings come from an optional INI-style config file (``--config``) with
sections ``[surface]``, ``[mesh]``, ``[ga]``, ``[baseline]``, ``[genome]`` and
``[output]``; every key has a command-line flag of the same name (dashes for
underscores), and flags win.  Angles on the command line and in config
files are in degrees; genome JSON files store radians.

Exit codes: 0 ok, 2 configuration or parse error, 3 invalid net,
4 optimizer initialisation failure.
"""

from __future__ import annotations

import argparse
import configparser
import json
import logging
import math
import sys
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from . import export
from .baseline import DEFAULT_SWEEP_DEG, angle_sweep, random_lots
from .evolve import GAConfig, InitializationError, default_seed_box, evolve_run, parse_fitness_kind
from .expr import ExprError
from .genome import Genome
from .net import MappingError, TooFewNodesError, map_surface, net_stats, validate_net
from .surface import CATALOG, Box, SurfaceSpec, catalog, from_expression

log = logging.getLogger("gridshell")

EXIT_OK, EXIT_CONFIG, EXIT_INVALID_NET, EXIT_INIT = 0, 2, 3, 4

DEFAULT_WIDTH = {"hemisphere": 2.0, "sinusoid": 1.0, "hypar": 0.3}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    surface: SurfaceSpec
    width: float
    ga: GAConfig
    baseline: dict = field(default_factory=dict)
    genome: dict = field(default_factory=dict)
    out: Path = Path("out")
    plot: bool = False


# ---------------------------------------------------------------------------
# parsing helpers


def _floats(text, n=None, what="value"):
    try:
        vals = [float(v) for v in str(text).replace(";", ",").split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse {what} {text!r} as numbers") from None
    if n is not None and len(vals) != n:
        raise ConfigError(f"{what} needs {n} numbers, got {len(vals)}")
    return vals


def _angle_list(text):
    """``"10:170:5"`` (inclusive range) or ``"10,20,30"``, degrees."""
    text = str(text).strip()
    if ":" in text:
        parts = _floats(text.replace(":", ","), 3, "angle range")
        lo, hi, step = parts
        if step <= 0:
            raise ConfigError("angle range step must be positive")
        n = int(math.floor((hi - lo) / step + 1e-9)) + 1
        return [lo + k * step for k in range(n)]
    return _floats(text, what="angle list")


def _bool(text):
    return str(text).strip().lower() in ("1", "true", "yes", "on")


_FLAG_KEYS = {
    "surface": ("surface", "name"),
    "surface_param": ("surface", None),
    "expr": ("surface", "expr"),
    "domain": ("surface", "domain"),
    "eval_tol": ("surface", "eval_tol"),
    "width": ("mesh", "width"),
    "pop": ("ga", "pop"),
    "tournament": ("ga", "tournament"),
    "pc": ("ga", "pc"),
    "pm": ("ga", "pm"),
    "eps": ("ga", "eps"),
    "patience": ("ga", "patience"),
    "max_gens": ("ga", "max_gens"),
    "seed": ("ga", "seed"),
    "fitness": ("ga", "fitness"),
    "turn_max": ("ga", "turn_max"),
    "seed_box": ("ga", "seed_box"),
    "turns": ("ga", "turns"),
    "threads": ("ga", "threads"),
    "method": ("baseline", "method"),
    "draws": ("baseline", "draws"),
    "angles": ("baseline", "angles"),
    "fixed_a": ("baseline", "fixed_a"),
    "sweep_alpha1": ("baseline", "alpha1"),
    "genome": ("genome", "file"),
    "a": ("genome", "a"),
    "alpha1": ("genome", "alpha1"),
    "alpha2": ("genome", "alpha2"),
    "beta1": ("genome", "beta1"),
    "beta2": ("genome", "beta2"),
    "gamma1": ("genome", "gamma1"),
    "gamma2": ("genome", "gamma2"),
    "eps1": ("genome", "eps1"),
    "eps2": ("genome", "eps2"),
    "steps": ("genome", "steps"),
    "out": ("output", "dir"),
    "plot": ("output", "plot"),
}


def _merged_settings(args):
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                cp.read_file(fh)
        except (OSError, configparser.Error) as exc:
            raise ConfigError(f"cannot read config file: {exc}") from None
    settings = {s: dict(cp[s]) for s in cp.sections()}
    if getattr(args, "surface", None) and getattr(args, "expr", None):
        raise ConfigError("give exactly one surface source: a catalog name or an expression")
    for flag, (section, key) in _FLAG_KEYS.items():
        value = getattr(args, flag, None)
        if value is None or value is False:
            continue
        sec = settings.setdefault(section, {})
        if flag == "surface_param":
            for item in value:
                if "=" not in item:
                    raise ConfigError(f"--surface-param expects key=value, got {item!r}")
                k, v = item.split("=", 1)
                sec[k.strip()] = v.strip()
        else:
            if section == "surface" and key in ("name", "expr"):
                sec.pop("expr" if key == "name" else "name", None)
            sec[key] = str(value) if not isinstance(value, bool) else ("true" if value else "false")
    return settings


def build_surface(sec: dict) -> SurfaceSpec:
    sec = dict(sec)
    has_name, has_expr = "name" in sec, "expr" in sec
    if has_name == has_expr:
        raise ConfigError("give exactly one surface source: a catalog name or an expression")
    eval_tol = float(sec.pop("eval_tol", 1e-8))
    if has_expr:
        if "domain" not in sec:
            raise ConfigError("an expression surface needs --domain xmin,xmax,ymin,ymax,zmin,zmax")
        vals = _floats(sec["domain"], 6, "domain")
        try:
            box = Box(*vals)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return from_expression(sec["expr"], box, eval_tol)
    name = sec.pop("name")
    if name not in CATALOG:
        raise ConfigError(f"unknown surface {name!r}; choose from {', '.join(sorted(CATALOG))}")
    sec.pop("domain", None)
    params = {}
    for k, v in sec.items():
        vals = _floats(v, what=f"surface parameter {k}")
        params[k] = vals[0] if len(vals) == 1 else tuple(vals)
    try:
        return catalog(name, eval_tol=eval_tol, **params)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for {name}: {exc}") from None


def build_ga(sec: dict, surface: SurfaceSpec) -> GAConfig:
    kw = {}
    conv = {
        "pop": ("n_pop", int),
        "tournament": ("n_can", int),
        "pc": ("p_c", float),
        "pm": ("p_m", float),
        "eps": ("eps_conv", float),
        "patience": ("patience", int),
        "max_gens": ("max_generations", int),
        "seed": ("seed", int),
        "threads": ("threads", int),
    }
    try:
        for key, (name, fn) in conv.items():
            if key in sec:
                kw[name] = fn(sec[key])
        if "fitness" in sec:
            parse_fitness_kind(sec["fitness"])
            kw["fitness_kind"] = sec["fitness"]
        if "turn_max" in sec:
            kw["turn_max"] = math.radians(float(sec["turn_max"]))
        if "turns" in sec:
            kw["n_turns"] = tuple(int(v) for v in _floats(sec["turns"], 4, "turn counts"))
        kw["seed_box"] = tuple(_floats(sec["seed_box"], 4, "seed box")) if "seed_box" in sec else default_seed_box(surface)
        return GAConfig(**kw)
    except ValueError as exc:
        raise ConfigError(f"bad GA setting: {exc}") from None


def load_run_config(args) -> RunConfig:
    settings = _merged_settings(args)
    try:
        surface = build_surface(settings.get("surface", {}))
    except ExprError:
        raise
    ga = build_ga(settings.get("ga", {}), surface)
    mesh = settings.get("mesh", {})
    d = surface.domain
    width = float(mesh["width"]) if "width" in mesh else DEFAULT_WIDTH.get(surface.name, min(d.xmax - d.xmin, d.ymax - d.ymin) / 10)
    if not 0 < width < min(d.xmax - d.xmin, d.ymax - d.ymin):
        raise ConfigError("mesh width must be positive and smaller than the domain's shortest x/y extent")
    out = settings.get("output", {})
    return RunConfig(
        surface=surface,
        width=width,
        ga=ga,
        baseline=settings.get("baseline", {}),
        genome=settings.get("genome", {}),
        out=Path(out.get("dir", "out")),
        plot=_bool(out.get("plot", "false")),
    )


def genome_from_settings(sec: dict, n_turns=(11, 11, 11, 11)) -> Genome:
    if "file" in sec:
        try:
            data = json.loads(Path(sec["file"]).read_text())
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read genome file: {exc}") from None
        return Genome.from_dict(data.get("genome", data))
    a = _floats(sec.get("a", "0,0"), 2, "seed point A")
    alpha1 = math.radians(float(sec.get("alpha1", 0.0)))
    beta1 = math.radians(float(sec.get("beta1", 90.0)))
    alpha2 = math.radians(float(sec["alpha2"])) if "alpha2" in sec else alpha1 + math.pi
    beta2 = math.radians(float(sec["beta2"])) if "beta2" in sec else beta1 + math.pi
    steps = int(sec.get("steps", n_turns[0]))
    turns = []
    for key in ("gamma1", "gamma2", "eps1", "eps2"):
        turns.append(tuple(math.radians(v) for v in _floats(sec[key], what=key)) if key in sec else (0.0,) * steps)
    return Genome(a[0], a[1], alpha1, alpha2 % (2 * math.pi), beta1, beta2 % (2 * math.pi), *turns)


# ---------------------------------------------------------------------------
# commands


def _write(path: Path, data):
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(data, bytes):
        path.write_bytes(data)
    else:
        path.write_text(data)


def _net_summary(net, spec, w, genome):
    report = validate_net(net, spec, w)
    try:
        stats = net_stats(net)
        st = {
            "c_max": stats.c_max,
            "c_mean": stats.c_mean,
            "c_top_mean_10pct": stats.c_top_mean(0.1),
            "node_count": stats.node_count,
            "max_edge_error": stats.max_edge_error,
        }
    except TooFewNodesError:
        st = {"c_max": None, "c_mean": None, "node_count": net.node_count(), "max_edge_error": None}
    return report, {
        **st,
        "coverage_ratio": report.coverage_ratio,
        "complete": report.complete,
        "overlap_free": report.overlap_free,
        "messages": report.messages,
        "width": w,
        "surface": spec.name,
        "surface_text": spec.text,
        "genome": genome.to_dict(),
        "genome_digest": genome.digest(),
    }


def cmd_map(cfg: RunConfig) -> int:
    genome = genome_from_settings(cfg.genome, cfg.ga.n_turns)
    try:
        net = map_surface(cfg.surface, genome, cfg.width)
    except MappingError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    report, summary = _net_summary(net, cfg.surface, cfg.width, genome)
    _write(cfg.out / "net.obj", export.export_obj(net, cfg.surface.text, genome.digest()))
    _write(cfg.out / "nodes.csv", export.nodes_csv(net))
    _write(cfg.out / "stats.json", export.dump_json(summary))
    log.info("c_max=%s coverage=%.3f overlap_free=%s", summary["c_max"], report.coverage_ratio, report.overlap_free)
    return EXIT_OK if report.valid else EXIT_INVALID_NET


def cmd_optimize(cfg: RunConfig) -> int:
    def progress(gen, best, mean):
        log.info("generation %d best %.6g mean %.6g", gen, best, mean)

    try:
        run = evolve_run(cfg.surface, cfg.width, cfg.ga, progress=progress)
    except InitializationError as exc:
        log.error("%s", exc)
        return EXIT_INIT
    best = run.best
    net = map_surface(cfg.surface, best.genome, cfg.width)
    _write(cfg.out / "history.csv", export.history_csv(run.history))
    _write(cfg.out / "best_genome.json", export.dump_json({"genome": best.genome.to_dict(), "fitness": best.fitness}))
    _write(cfg.out / "best_net.obj", export.export_obj(net, cfg.surface.text, best.genome.digest()))
    ga = asdict(cfg.ga)
    _write(
        cfg.out / "report.json",
        export.dump_json(
            {
                "surface": cfg.surface.name,
                "surface_text": cfg.surface.text,
                "width": cfg.width,
                "config": ga,
                "generations_run": run.generations_run,
                "converged": run.converged,
                "evaluations": run.evaluations,
                "best_fitness": best.fitness,
                "best_genome": best.genome.to_dict(),
                "history": [{"generation": g, "best": b, "mean": m} for g, (b, m) in enumerate(run.history, 1)],
            }
        ),
    )
    if cfg.plot:
        _write(cfg.out / "history.svg", export.history_svg(run.history))
    log.info("best fitness %.6g after %d generations (converged=%s)", best.fitness, run.generations_run, run.converged)
    return EXIT_OK


def cmd_baseline(cfg: RunConfig) -> int:
    sec = cfg.baseline
    method = sec.get("method", "sweep")
    if method == "lots":
        n = int(sec.get("draws", 10000))
        if n < 1:
            raise ConfigError("draws must be at least 1")
        res = random_lots(cfg.surface, cfg.width, cfg.ga, n)
        header = ("draw", "fitness")
        rows = [(int(p), f) for p, f in res.all_values]
    elif method == "sweep":
        angles = _angle_list(sec["angles"]) if "angles" in sec else list(DEFAULT_SWEEP_DEG)
        fixed_a = _floats(sec.get("fixed_a", "0,0"), 2, "fixed A")
        alpha1 = float(sec.get("alpha1", 0.0))
        res = angle_sweep(
            cfg.surface, cfg.width, [math.radians(a) for a in angles], tuple(fixed_a), math.radians(alpha1), cfg.ga
        )
        header = ("angle_deg", "fitness")
        rows = [(a, f) for a, (_, f) in zip(angles, res.all_values)]
    else:
        raise ConfigError(f"unknown baseline method {method!r}; use lots or sweep")
    _write(cfg.out / "values.csv", export.values_csv(header, rows))
    best_param = res.best_parameter if method == "lots" else math.degrees(res.best_parameter)
    _write(
        cfg.out / "baseline.json",
        export.dump_json(
            {"method": res.method, "best_fitness": res.best.fitness, "best_parameter": best_param,
             "best_genome": res.best.genome.to_dict()}
        ),
    )
    try:
        net = map_surface(cfg.surface, res.best.genome, cfg.width)
        _write(cfg.out / "best_net.obj", export.export_obj(net, cfg.surface.text, res.best.genome.digest()))
    except MappingError as exc:
        log.warning("best genome cannot be mapped: %s", exc)
    log.info("%s best %.6g", res.method, res.best.fitness)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def _common(p):
    p.add_argument("--config", help="INI-style config file")
    g = p.add_argument_group("surface")
    g.add_argument("--surface", help=f"catalog surface ({', '.join(sorted(CATALOG))})")
    g.add_argument("--surface-param", action="append", metavar="KEY=VALUE", help="catalog parameter, repeatable")
    g.add_argument("--expr", help="implicit equation F(x,y,z), e.g. 'z - (x^2 - y^2)'")
    g.add_argument("--domain", help="xmin,xmax,ymin,ymax,zmin,zmax for --expr")
    g.add_argument("--eval-tol", type=float)
    g.add_argument("--width", type=float, help="mesh width w")
    ga = p.add_argument_group("genetic algorithm")
    ga.add_argument("--pop", type=int)
    ga.add_argument("--tournament", type=int)
    ga.add_argument("--pc", type=float)
    ga.add_argument("--pm", type=float)
    ga.add_argument("--eps", type=float)
    ga.add_argument("--patience", type=int)
    ga.add_argument("--max-gens", type=int)
    ga.add_argument("--seed", type=int)
    ga.add_argument("--fitness", help="max | mean | top:<fraction>")
    ga.add_argument("--turn-max", type=float, help="turn angle bound, degrees")
    ga.add_argument("--seed-box", help="xmin,xmax,ymin,ymax for seed point A")
    ga.add_argument("--turns", help="turn genes per branch, four integers")
    ga.add_argument("--threads", type=int)
    o = p.add_argument_group("output")
    o.add_argument("--out", help="output directory")
    o.add_argument("--plot", action="store_true", default=None, help="write an SVG convergence plot")
    p.add_argument("-v", "--verbose", action="store_true")


def make_parser():
    parser = argparse.ArgumentParser(prog="gridshell", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    pm = sub.add_parser("map", help="map one genome onto the surface")
    _common(pm)
    gg = pm.add_argument_group("genome")
    gg.add_argument("--genome", help="genome JSON file (as written by optimize)")
    gg.add_argument("--a", help="seed point x,y")
    for name in ("alpha1", "alpha2", "beta1", "beta2"):
        gg.add_argument(f"--{name}", type=float, help="degrees")
    for name in ("gamma1", "gamma2", "eps1", "eps2"):
        gg.add_argument(f"--{name}", help="comma-separated turn angles, degrees")
    gg.add_argument("--steps", type=int, help="guideline steps when turns are not given")
    po = sub.add_parser("optimize", help="run the genetic algorithm")
    _common(po)
    pb = sub.add_parser("baseline", help="random lots or guideline-angle sweep")
    _common(pb)
    pb.add_argument("--method", choices=("lots", "sweep"))
    pb.add_argument("--draws", type=int)
    pb.add_argument("--angles", help="degrees, 'lo:hi:step' or comma list")
    pb.add_argument("--fixed-a", help="seed point x,y for the sweep")
    pb.add_argument("--sweep-alpha1", type=float, help="azimuth of the first guideline, degrees")
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_run_config(args)
        if args.command == "map":
            return cmd_map(cfg)
        if args.command == "optimize":
            return cmd_optimize(cfg)
        return cmd_baseline(cfg)
    except ExprError as exc:
        print(f"gridshell: expression error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConfigError, KeyError) as exc:
        print(f"gridshell: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
