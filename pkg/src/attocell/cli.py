"""Command-line front end: parameter sweeps, sum reports, MC validation.

Subcommands
-----------
sweep      compute coverage curves for every (p, height, method) in the
           run configuration and write one CSV per curve plus a JSON
           manifest echoing the fully resolved configuration.
sums       print the interference moment sums at one receiver position:
           brute force vs closed form, relative errors, truncation tail
           bounds and the per-mode series breakdown.
validate   run the Monte Carlo oracle against the analytic curves across
           the threshold grid and report the worst absolute deviation;
           fails (exit 2) if it exceeds the agreement budget.

Configuration comes from an INI-style file (``key = value`` under
``[optical]``, ``[geometry]``, ``[thinning]``, ``[sweep]``, ``[output]``),
from a previously written ``manifest.json``, or from nothing at all: the
defaults reproduce the shipped reference setup (0.5 m pitch, heights 1.5 to
3.0 m, p in {0.3, 0.5, 0.8}, thresholds -20..10 dB in 0.25 dB steps).
Flags override file values.  CSV cells are printed with 17 significant
digits and '\\n' line endings, so identical configurations and seeds
produce byte-identical files.

Exit codes: 0 success, 1 configuration error, 2 validation failure,
3 I/O error.
"""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .coverage import CoverageCurve, coverage_curve, db_to_linear
from .lattice_sums import series_mode_terms, sm_brute, sm_series, sv_brute, sv_series
from .model import DerivedConstants, NetworkGeometry, OpticalConfig, TABLE_DEFAULT_OPTICS
from .montecarlo import ThinningModel, clt_diagnostics, empirical_coverage_curves

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_VALIDATION = 2
EXIT_IO = 3

_METHODS = ("analytic", "montecarlo", "brute")


class ConfigError(Exception):
    """Malformed run configuration; the message names the offending field."""


@dataclass
class RunConfig:
    """Fully resolved run configuration (defaults reproduce the reference
    sweep: one curve per (p, height) pair with the analytic method)."""

    optical: OpticalConfig = TABLE_DEFAULT_OPTICS
    pitch: float = 0.5
    heights: tuple[float, ...] = (1.5, 2.0, 2.5, 3.0)
    trunc: int = 200
    p_list: tuple[float, ...] = (0.3, 0.5, 0.8)
    theta_db_start: float = -20.0
    theta_db_stop: float = 10.0
    theta_db_step: float = 0.25
    methods: tuple[str, ...] = ("analytic",)
    seed: int = 20250809
    trials: int = 10000
    quad_order: int = 32
    mc_quad_order: int = 16
    mc_trunc: int = 40
    jobs: int = 1
    out_dir: str = "attocell_out"

    def validate(self) -> None:
        if not self.p_list:
            raise ConfigError("thinning.p_list: must not be empty")
        for p in self.p_list:
            if not 0.0 <= p <= 1.0:
                raise ConfigError(f"thinning.p_list: probabilities must be in [0, 1], got {p!r}")
        if not self.heights:
            raise ConfigError("geometry.heights: must not be empty")
        for h in self.heights:
            if not (math.isfinite(h) and h > 0):
                raise ConfigError(f"geometry.heights: heights must be > 0, got {h!r}")
        if not (math.isfinite(self.pitch) and self.pitch > 0):
            raise ConfigError(f"geometry.pitch: must be > 0, got {self.pitch!r}")
        if self.trunc < 1:
            raise ConfigError(f"geometry.trunc: must be >= 1, got {self.trunc!r}")
        if self.theta_db_step <= 0:
            raise ConfigError(f"sweep.theta_db_step: must be > 0, got {self.theta_db_step!r}")
        if self.theta_db_stop < self.theta_db_start:
            raise ConfigError("sweep.theta_db_stop: must be >= theta_db_start")
        for m in self.methods:
            if m not in _METHODS:
                raise ConfigError(f"sweep.methods: unknown method {m!r} (choose from {_METHODS})")
        if not self.methods:
            raise ConfigError("sweep.methods: must not be empty")
        if self.seed < 0:
            raise ConfigError(f"thinning.seed: must be >= 0, got {self.seed!r}")
        if self.trials < 1:
            raise ConfigError(f"thinning.trials: must be >= 1, got {self.trials!r}")
        if self.quad_order < 1:
            raise ConfigError(f"sweep.quad_order: must be >= 1, got {self.quad_order!r}")
        if self.mc_quad_order < 1:
            raise ConfigError(f"sweep.mc_quad_order: must be >= 1, got {self.mc_quad_order!r}")
        if self.mc_trunc < 1:
            raise ConfigError(f"thinning.mc_trunc: must be >= 1, got {self.mc_trunc!r}")
        if self.jobs < 1:
            raise ConfigError(f"sweep.jobs: must be >= 1, got {self.jobs!r}")

    def theta_db_grid(self) -> np.ndarray:
        n = int(math.floor((self.theta_db_stop - self.theta_db_start) / self.theta_db_step + 1e-9)) + 1
        return self.theta_db_start + self.theta_db_step * np.arange(n)

    def geometry(self, height: float) -> NetworkGeometry:
        return NetworkGeometry(pitch=self.pitch, height=height, trunc=self.trunc)

    def as_sections(self) -> dict:
        """Nested dict mirroring the INI sections; feeds the manifest."""
        return {
            "optical": dataclasses.asdict(self.optical),
            "geometry": {
                "pitch": self.pitch,
                "heights": list(self.heights),
                "trunc": self.trunc,
            },
            "thinning": {
                "p_list": list(self.p_list),
                "seed": self.seed,
                "trials": self.trials,
                "mc_trunc": self.mc_trunc,
            },
            "sweep": {
                "theta_db_start": self.theta_db_start,
                "theta_db_stop": self.theta_db_stop,
                "theta_db_step": self.theta_db_step,
                "methods": list(self.methods),
                "quad_order": self.quad_order,
                "mc_quad_order": self.mc_quad_order,
                "jobs": self.jobs,
            },
            "output": {"out_dir": self.out_dir},
        }


def _parse_float(section: str, key: str, raw) -> float:
    try:
        return float(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"{section}.{key}: expected a number, got {raw!r}") from None


def _parse_int(section: str, key: str, raw) -> int:
    try:
        if isinstance(raw, str):
            return int(raw, 0)
        if float(raw) != int(raw):
            raise ValueError
        return int(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"{section}.{key}: expected an integer, got {raw!r}") from None


def _parse_list(raw) -> list:
    if isinstance(raw, (list, tuple)):
        return list(raw)
    return [tok.strip() for tok in str(raw).split(",") if tok.strip()]


def _sections_from_ini(path: Path) -> dict:
    parser = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config file {path}: {exc}") from None
    return {s: dict(parser.items(s)) for s in parser.sections()}


def _sections_from_json(path: Path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"cannot parse config file {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path}: top level must be an object")
    # a manifest embeds the configuration under "config"
    if "config" in data and isinstance(data["config"], dict):
        data = data["config"]
    return data


_KNOWN_KEYS = {
    "optical": {"power", "pd_area", "responsivity", "half_angle", "noise_psd", "bandwidth"},
    "geometry": {"pitch", "heights", "trunc"},
    "thinning": {"p_list", "seed", "trials", "mc_trunc"},
    "sweep": {"theta_db_start", "theta_db_stop", "theta_db_step", "methods", "quad_order", "mc_quad_order", "jobs"},
    "output": {"out_dir"},
}


def load_config(path: str | None) -> RunConfig:
    """Build a RunConfig from an INI or JSON/manifest file (or defaults)."""
    cfg = RunConfig()
    if path is None:
        return cfg
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    head = p.read_text(encoding="utf-8", errors="replace").lstrip()
    sections = _sections_from_json(p) if head.startswith("{") else _sections_from_ini(p)

    for section, keys in sections.items():
        if section not in _KNOWN_KEYS:
            raise ConfigError(f"unknown config section [{section}]")
        if not isinstance(keys, dict):
            raise ConfigError(f"config section [{section}] must hold key = value pairs")
        unknown = set(keys) - _KNOWN_KEYS[section]
        if unknown:
            raise ConfigError(f"unknown key {sorted(unknown)[0]!r} in section [{section}]")

    opt = sections.get("optical", {})
    optical_kwargs = {}
    for key in _KNOWN_KEYS["optical"]:
        if key in opt:
            optical_kwargs[key] = _parse_float("optical", key, opt[key])
    if optical_kwargs:
        base = dataclasses.asdict(cfg.optical)
        base.update(optical_kwargs)
        try:
            cfg.optical = OpticalConfig(**base)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    geo = sections.get("geometry", {})
    if "pitch" in geo:
        cfg.pitch = _parse_float("geometry", "pitch", geo["pitch"])
    if "heights" in geo:
        cfg.heights = tuple(
            _parse_float("geometry", "heights", tok) for tok in _parse_list(geo["heights"])
        )
    if "trunc" in geo:
        cfg.trunc = _parse_int("geometry", "trunc", geo["trunc"])

    thin = sections.get("thinning", {})
    if "p_list" in thin:
        cfg.p_list = tuple(
            _parse_float("thinning", "p_list", tok) for tok in _parse_list(thin["p_list"])
        )
    if "seed" in thin:
        cfg.seed = _parse_int("thinning", "seed", thin["seed"])
    if "trials" in thin:
        cfg.trials = _parse_int("thinning", "trials", thin["trials"])
    if "mc_trunc" in thin:
        cfg.mc_trunc = _parse_int("thinning", "mc_trunc", thin["mc_trunc"])

    sweep = sections.get("sweep", {})
    for key in ("theta_db_start", "theta_db_stop", "theta_db_step"):
        if key in sweep:
            setattr(cfg, key, _parse_float("sweep", key, sweep[key]))
    if "methods" in sweep:
        cfg.methods = tuple(str(tok) for tok in _parse_list(sweep["methods"]))
    if "quad_order" in sweep:
        cfg.quad_order = _parse_int("sweep", "quad_order", sweep["quad_order"])
    if "mc_quad_order" in sweep:
        cfg.mc_quad_order = _parse_int("sweep", "mc_quad_order", sweep["mc_quad_order"])
    if "jobs" in sweep:
        cfg.jobs = _parse_int("sweep", "jobs", sweep["jobs"])

    out = sections.get("output", {})
    if "out_dir" in out:
        cfg.out_dir = str(out["out_dir"])
    return cfg


def _apply_overrides(cfg: RunConfig, args: argparse.Namespace) -> None:
    if getattr(args, "out", None) is not None:
        cfg.out_dir = args.out
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "trials", None) is not None:
        cfg.trials = args.trials
    if getattr(args, "quad_order", None) is not None:
        cfg.quad_order = args.quad_order
    if getattr(args, "mc_quad_order", None) is not None:
        cfg.mc_quad_order = args.mc_quad_order
    if getattr(args, "trunc", None) is not None:
        cfg.trunc = args.trunc
    if getattr(args, "mc_trunc", None) is not None:
        cfg.mc_trunc = args.mc_trunc
    if getattr(args, "jobs", None) is not None:
        cfg.jobs = args.jobs
    if getattr(args, "methods", None) is not None:
        cfg.methods = tuple(tok.strip() for tok in args.methods.split(",") if tok.strip())
    if getattr(args, "heights", None) is not None:
        try:
            cfg.heights = tuple(float(tok) for tok in args.heights.split(",") if tok.strip())
        except ValueError:
            raise ConfigError(f"--heights: expected comma-separated numbers, got {args.heights!r}")
    if getattr(args, "p", None) is not None:
        try:
            cfg.p_list = tuple(float(tok) for tok in args.p.split(",") if tok.strip())
        except ValueError:
            raise ConfigError(f"--p: expected comma-separated numbers, got {args.p!r}")


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _curve_filename(p: float, height: float, method: str) -> str:
    return f"coverage_p{p:g}_h{height:g}_{method}.csv"


def _write_curve_csv(path: Path, curve: CoverageCurve) -> None:
    lines = ["theta_db,theta_linear,p_c,stderr"]
    stderr = curve.stderr
    for i in range(curve.theta_db.size):
        err = _fmt(float(stderr[i])) if stderr is not None else ""
        lines.append(
            f"{_fmt(float(curve.theta_db[i]))},{_fmt(float(curve.theta_linear[i]))},"
            f"{_fmt(float(curve.values[i]))},{err}"
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def _analytic_curves(cfg: RunConfig, height: float, sums: str) -> dict[float, CoverageCurve]:
    geometry = cfg.geometry(height)
    grid = cfg.theta_db_grid()
    return {
        p: coverage_curve(
            cfg.optical, geometry, p, grid, quad_order=cfg.quad_order, sums=sums
        )
        for p in cfg.p_list
    }


def _montecarlo_curves(cfg: RunConfig, height: float) -> dict[float, CoverageCurve]:
    geometry = cfg.geometry(height)
    grid = cfg.theta_db_grid()
    means, stderrs, tail = empirical_coverage_curves(
        cfg.optical,
        geometry,
        cfg.p_list,
        theta_db=grid,
        seed=cfg.seed,
        trials_per_node=cfg.trials,
        quad_order=cfg.mc_quad_order,
        trunc=cfg.mc_trunc,
        n_jobs=cfg.jobs,
    )
    out = {}
    for k, p in enumerate(cfg.p_list):
        out[p] = CoverageCurve(
            theta_db=grid,
            theta_linear=db_to_linear(grid),
            values=means[k],
            method="montecarlo",
            config={"seed": cfg.seed, "trials": cfg.trials, "mc_trunc": cfg.mc_trunc, "tail_bound": tail},
            stderr=stderrs[k],
        )
    return out


def run_sweep(cfg: RunConfig) -> int:
    cfg.validate()
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = []
    diffs = {}
    for height in cfg.heights:
        by_method: dict[str, dict[float, CoverageCurve]] = {}
        for method in cfg.methods:
            if method == "analytic":
                by_method[method] = _analytic_curves(cfg, height, "series")
            elif method == "brute":
                by_method[method] = _analytic_curves(cfg, height, "brute")
            else:
                by_method[method] = _montecarlo_curves(cfg, height)
            for p, curve in by_method[method].items():
                name = _curve_filename(p, height, method)
                _write_curve_csv(out_dir / name, curve)
                outputs.append(name)
                print(f"wrote {name}", file=sys.stderr)
        if "analytic" in by_method and "montecarlo" in by_method:
            for p in cfg.p_list:
                delta = np.max(
                    np.abs(by_method["analytic"][p].values - by_method["montecarlo"][p].values)
                )
                diffs[f"p{p:g}_h{height:g}"] = float(delta)
    manifest = {
        "version": __version__,
        "config": cfg.as_sections(),
        "outputs": outputs,
    }
    if diffs:
        manifest["max_abs_diff_analytic_vs_montecarlo"] = diffs
        manifest["max_abs_diff_overall"] = max(diffs.values())
    with open(out_dir / "manifest.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote manifest.json ({len(outputs)} curve files) to {out_dir}", file=sys.stderr)
    return EXIT_OK


def run_sums(cfg: RunConfig, pos: tuple[float, float], jl: tuple[int, int], height: float | None) -> int:
    cfg.validate()
    h = cfg.heights[0] if height is None else height
    geometry = cfg.geometry(h)
    consts = DerivedConstants.from_configs(cfg.optical, geometry)
    half = geometry.pitch / 2
    if abs(pos[0]) > half or abs(pos[1]) > half:
        print(
            f"warning: position {pos} lies outside the attocell "
            f"[-{half:g}, {half:g}]^2; proceeding anyway",
            file=sys.stderr,
        )
    print(f"pitch a = {geometry.pitch:g} m, height h = {geometry.height:g} m "
          f"(h/a = {geometry.height / geometry.pitch:g}), beta = {consts.beta:g}")
    print(f"position z = ({pos[0]:g}, {pos[1]:g}) m, modes j,l = {jl[0]},{jl[1]}, "
          f"brute trunc = {geometry.trunc}")
    print()
    print(f"{'sum':<4} {'brute force':>24} {'series':>24} {'rel err':>10} {'tail bound':>12}")
    for label, brute_fn, series_fn in (("S_m", sm_brute, sm_series), ("S_v", sv_brute, sv_series)):
        b = brute_fn(geometry, consts.beta, pos)
        s = series_fn(geometry, consts.beta, pos, jl=jl)
        rel = abs(s.value - b.value) / b.value
        print(f"{label:<4} {_fmt(b.value):>24} {_fmt(s.value):>24} {rel:>10.2e} {b.tail_bound:>12.2e}")
    for label, exponent in (("g_m", consts.beta), ("g_v", 2 * consts.beta)):
        print()
        print(f"{label} breakdown (weight 1/2 on axis modes; uniform value shown for reference):")
        for row in series_mode_terms(geometry, exponent, pos, jl=jl):
            extra = (
                f"  uniform={row['uniform_value']:+.6e}" if "uniform_value" in row else ""
            )
            print(f"  {row['term']:<12} weight={row['weight']:<4g} "
                  f"contribution={row['contribution']:+.6e}{extra}")
    return EXIT_OK


def run_validate(cfg: RunConfig, budget: float) -> int:
    cfg.validate()
    grid = cfg.theta_db_grid()
    worst = 0.0
    print(f"{'h':>6} {'p':>6} {'max |MC - analytic|':>22} {'mean stderr':>12}")
    for height in cfg.heights:
        geometry = cfg.geometry(height)
        means, stderrs, tail = empirical_coverage_curves(
            cfg.optical,
            geometry,
            cfg.p_list,
            theta_db=grid,
            seed=cfg.seed,
            trials_per_node=cfg.trials,
            quad_order=cfg.mc_quad_order,
            trunc=cfg.mc_trunc,
            n_jobs=cfg.jobs,
        )
        for k, p in enumerate(cfg.p_list):
            analytic = coverage_curve(
                cfg.optical,
                geometry,
                p,
                grid,
                quad_order=cfg.mc_quad_order,
                sums="series",
                use_symmetry=False,
            )
            delta = float(np.max(np.abs(means[k] - analytic.values)))
            worst = max(worst, delta)
            print(f"{height:>6g} {p:>6g} {delta:>22.5f} {float(np.mean(stderrs[k])):>12.5f}")
        print(f"  sampling truncation tail bound: {tail:.3e}", file=sys.stderr)
    print()
    print("CLT diagnostics at the attocell centre (standardized interference):")
    geometry = cfg.geometry(cfg.heights[0])
    for p in cfg.p_list:
        if not 0.0 < p < 1.0:
            continue
        model = ThinningModel(p=p, seed=cfg.seed, trunc=cfg.mc_trunc)
        consts = DerivedConstants.from_configs(cfg.optical, geometry)
        diag = clt_diagnostics(model, geometry, consts.beta, (0.0, 0.0), cfg.trials)
        print(f"  p={p:g}: mean={diag.sample_mean:.6e} var={diag.sample_var:.6e} "
              f"ks={diag.ks_stat:.4f} trials={diag.trials}")
    print()
    if worst > budget:
        print(f"FAIL: worst deviation {worst:.5f} exceeds budget {budget:g}")
        return EXIT_VALIDATION
    print(f"OK: worst deviation {worst:.5f} within budget {budget:g}")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="attocell",
        description="Coverage curves for a Bernoulli-thinned LiFi attocell grid.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(sp):
        sp.add_argument("--config", help="INI config or manifest.json from a previous run")
        sp.add_argument("--seed", type=int, help="RNG seed for Monte Carlo methods")
        sp.add_argument("--trials", type=int, help="Monte Carlo trials per spatial node")
        sp.add_argument("--quad-order", dest="quad_order", type=int, help="tensor quadrature order per axis (analytic)")
        sp.add_argument("--mc-quad-order", dest="mc_quad_order", type=int, help="tensor quadrature order per axis for Monte Carlo comparisons")
        sp.add_argument("--trunc", type=int, help="lattice truncation (rings) for brute-force sums")
        sp.add_argument("--mc-trunc", dest="mc_trunc", type=int, help="lattice truncation for Monte Carlo sampling")
        sp.add_argument("--jobs", type=int, help="worker processes for Monte Carlo nodes")
        sp.add_argument("--heights", help="comma-separated LED heights (m)")
        sp.add_argument("--p", help="comma-separated thinning probabilities")

    sp = sub.add_parser("sweep", help="write coverage-curve CSVs and a manifest")
    add_common(sp)
    sp.add_argument("--out", help="output directory")
    sp.add_argument("--methods", help="comma-separated subset of analytic,montecarlo,brute")

    sp = sub.add_parser("sums", help="report moment sums at one position")
    add_common(sp)
    sp.add_argument("--pos", default="0,0", help="receiver position 'x,y' in metres")
    sp.add_argument("--jl", default="1,1", help="series mode truncation 'j,l'")
    sp.add_argument("--height", type=float, help="LED height to use (default: first configured)")

    sp = sub.add_parser("validate", help="Monte Carlo vs analytic agreement check")
    add_common(sp)
    sp.add_argument("--budget", type=float, default=0.02, help="absolute agreement budget (default 0.02)")
    return parser


def _parse_pair(raw: str, what: str, cast):
    parts = [tok.strip() for tok in raw.split(",")]
    if len(parts) != 2:
        raise ConfigError(f"{what}: expected 'A,B', got {raw!r}")
    try:
        return cast(parts[0]), cast(parts[1])
    except ValueError:
        raise ConfigError(f"{what}: expected numbers, got {raw!r}") from None


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        _apply_overrides(cfg, args)
        if args.command == "sweep":
            return run_sweep(cfg)
        if args.command == "sums":
            pos = _parse_pair(args.pos, "--pos", float)
            jl = _parse_pair(args.jl, "--jl", int)
            if jl[0] < 0 or jl[1] < 0:
                raise ConfigError(f"--jl: modes must be >= 0, got {args.jl!r}")
            return run_sums(cfg, pos, jl, args.height)
        if args.command == "validate":
            return run_validate(cfg, args.budget)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
