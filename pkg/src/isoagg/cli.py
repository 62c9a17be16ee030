"""Command-line front end.

    isoagg spectral --config cfg.yaml
    isoagg simulate --config cfg.yaml --mode limit --seed 3 --out runs/a
    isoagg analyze  --config cfg.yaml runs/a/*.f64
    isoagg verify   --config cfg.yaml

Exit codes: 0 success, 1 verification/analysis failure, 2 usage or
validation error.
"""

from __future__ import annotations

import argparse
import copy
import glob
import json
import math
import sys
from pathlib import Path
from typing import Any, Sequence

import yaml

from . import __version__
from .io import FormatError, read_grid, write_csv, write_grid, write_json
from .memory import (
    InsufficientDataError,
    estimate_memory,
    mean_periodogram,
    radial_average,
)
from .rng import derive_seed
from .simulate import (
    LatticeSpec,
    NonExistenceError,
    NonStationaryError,
    aggregate_field,
    simulate_ar_field,
    simulate_limit_field,
)
from .spectral import (
    QuadratureConfig,
    SpectralModel,
    asymptote,
    f_grid,
    fourier_frequencies,
    spectral_density,
)
from .theta_law import InvalidExponentError, InvalidShapeError, law_from_dict
from .verify import run_battery

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class ConfigError(ValueError):
    pass


DEFAULTS: dict[str, Any] = {
    "law": {"alpha": 0.5, "phi": {"kind": "constant"}, "support": "positive"},
    "sigma2_eps": 1.0,
    "lattice": {"n1": 256, "n2": 256},
    "seed": 0,
    "workers": 1,
    "output": "out",
    "quadrature": {"rel_tol": 1e-11, "abs_tol": 1e-200, "max_subdivisions": 200,
                   "a_lambda_switch": 10.0},
    "spectral": {"grid": "fourier", "format": "csv", "asymptote": True,
                 "line_t": [1e-1, 1e-2, 1e-3, 1e-4]},
    "simulate": {"mode": "limit", "theta": None, "N": 100, "replicates": 1, "format": "raw"},
    "analyze": {"inputs": [], "n_bins": 24, "fit_range": None, "center": "origin"},
    "verify": {"alphas": [0.25, 0.5, 0.75, 1.0, 2.0]},
}

_CHOICES = {
    ("spectral", "grid"): ("fourier", "line"),
    ("spectral", "format"): ("csv", "raw"),
    ("simulate", "mode"): ("single", "aggregate", "limit"),
    ("simulate", "format"): ("raw", "csv"),
    ("analyze", "center"): ("origin", "corner"),
}


def _merge(base: dict, over: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, val in over.items():
        where = f"{path}{key}"
        if key not in base:
            raise ConfigError(f"unknown config key '{where}'")
        if isinstance(base[key], dict) and key != "law":
            if not isinstance(val, dict):
                raise ConfigError(f"'{where}' must be a mapping")
            out[key] = _merge(base[key], val, where + ".")
        else:
            out[key] = val
    return out


def load_config(path: str | None) -> dict:
    if path is None:
        raw: dict = {}
    else:
        try:
            text = Path(path).read_text(encoding="utf-8")
            raw = yaml.safe_load(text) or {}
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: not valid YAML/JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: top level must be a mapping")
        # a sidecar embeds the resolved config that produced it
        if "config" in raw and "n1" in raw:
            raw = raw["config"]
    return _merge(DEFAULTS, raw)


def resolve(cfg: dict) -> tuple[dict, Any, QuadratureConfig, LatticeSpec]:
    """Validate everything up front; returns ``(cfg, law, quad, lattice)``."""
    for (sec, key), allowed in _CHOICES.items():
        if cfg[sec][key] not in allowed:
            raise ConfigError(f"{sec}.{key} must be one of {allowed}, got {cfg[sec][key]!r}")
    law_cfg = cfg["law"]
    if not isinstance(law_cfg, dict):
        raise ConfigError("'law' must be a mapping")
    try:
        alpha = law_cfg.get("alpha")
        if not isinstance(alpha, (int, float)) or isinstance(alpha, bool):
            raise InvalidExponentError(f"law.alpha must be a number, got {alpha!r}")
        if not alpha > -1:
            raise InvalidExponentError(f"law.alpha must satisfy alpha > -1, got {alpha}")
        law = law_from_dict(law_cfg)
    except (InvalidExponentError, InvalidShapeError) as exc:
        raise ConfigError(f"law: {exc}") from exc
    try:
        q = QuadratureConfig(**{k: (int(v) if k == "max_subdivisions" else float(v))
                                for k, v in cfg["quadrature"].items()})
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"quadrature: {exc}") from exc
    try:
        lat = LatticeSpec(int(cfg["lattice"]["n1"]), int(cfg["lattice"]["n2"]))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"lattice: {exc}") from exc
    if not float(cfg["sigma2_eps"]) > 0:
        raise ConfigError(f"sigma2_eps must be > 0, got {cfg['sigma2_eps']}")
    if int(cfg["workers"]) < 1:
        raise ConfigError("workers must be >= 1")
    return cfg, law, q, lat


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_spectral(cfg: dict) -> int:
    cfg, law, quad, lat = resolve(cfg)
    model = SpectralModel(law, float(cfg["sigma2_eps"]))
    out = Path(cfg["output"])
    spec = cfg["spectral"]
    with_asym = bool(spec["asymptote"]) and 0 < law.alpha <= 1
    center = (math.pi, math.pi) if law.mirrored else (0.0, 0.0)

    def asym(l1: float, l2: float) -> float:
        d1 = math.remainder(l1 - center[0], 2 * math.pi)
        d2 = math.remainder(l2 - center[1], 2 * math.pi)
        if d1 == 0 and d2 == 0:
            return math.nan
        return asymptote(model, (d1, d2), quad)

    if spec["grid"] == "line":
        header = ["t", "lambda1", "lambda2", "f"] + (["asymptote", "ratio"] if with_asym else [])
        rows = []
        for t in spec["line_t"]:
            t = float(t)
            lam = (center[0] - t, center[1] - t) if law.mirrored else (t, t)
            f = spectral_density(model, lam, quad)
            row = [t, lam[0], lam[1], f]
            if with_asym:
                a = asym(*lam)
                row += [a, f / a]
            rows.append(row)
        path = write_csv(out / "spectral_line.csv", header, rows)
        print(f"wrote {path}")
        return EXIT_OK

    grid = f_grid(model, lat.n1, lat.n2, quad)
    dc_policy = "singular bins stored as 0" if law.alpha <= 1 else "true value"
    if spec["format"] == "raw":
        meta = {"alpha": law.alpha, "phi": law.phi.to_dict(), "support": law.support_sign,
                "sigma2": model.sigma2_eps, "dc_policy": dc_policy, "config": cfg}
        raw, side = write_grid(out / "spectral", grid, meta)
        print(f"wrote {raw} and {side}")
        return EXIT_OK
    l1, l2 = fourier_frequencies(lat.n1, lat.n2)
    header = ["k1", "k2", "lambda1", "lambda2", "f"] + (["asymptote", "ratio"] if with_asym else [])
    rows = []
    for k1 in range(lat.n1):
        for k2 in range(lat.n2):
            a, b, f = float(l1[k1, k2]), float(l2[k1, k2]), float(grid[k1, k2])
            row: list[Any] = [k1, k2, a, b, f]
            if with_asym:
                asy = asym(a, b)
                row += [asy, f / asy if math.isfinite(asy) else math.nan]
            rows.append(row)
    path = write_csv(out / "spectral.csv", header, rows)
    print(f"wrote {path}")
    return EXIT_OK


def cmd_simulate(cfg: dict, mode: str | None = None) -> int:
    if mode is not None:
        cfg = _merge(cfg, {"simulate": {"mode": mode}})
    cfg, law, quad, lat = resolve(cfg)
    sim = cfg["simulate"]
    sigma2 = float(cfg["sigma2_eps"])
    reps = int(sim["replicates"])
    if reps < 1:
        raise ConfigError("simulate.replicates must be >= 1")
    if sim["mode"] == "single":
        if sim["theta"] is None:
            raise ConfigError("simulate.theta is required for mode 'single'")
        theta = float(sim["theta"])
        if not abs(theta) < 0.25:
            raise ConfigError(
                f"simulate.theta: |theta| must be < 1/4 for a stationary solution, got {theta}"
            )
    if sim["mode"] == "aggregate" and int(sim["N"]) < 1:
        raise ConfigError("simulate.N must be >= 1")
    if sim["mode"] == "limit" and law.alpha <= 0:
        raise ConfigError(f"law.alpha must be > 0 for the limit field, got {law.alpha}")

    out = Path(cfg["output"])
    base = int(cfg["seed"])
    for i in range(reps):
        seed = derive_seed(base, "replicate", i)
        if sim["mode"] == "single":
            field = simulate_ar_field(float(sim["theta"]), lat, sigma2, seed)
        elif sim["mode"] == "aggregate":
            field = aggregate_field(law, int(sim["N"]), lat, sigma2, seed, int(cfg["workers"]))
        else:
            field = simulate_limit_field(law, lat, sigma2, seed, quad)
        stem = out / f"field_{i:04d}"
        if sim["format"] == "csv":
            rows = ((a, b, float(field.values[a, b])) for a in range(lat.n1) for b in range(lat.n2))
            write_csv(stem.with_suffix(".csv"), ["i", "j", "value"], rows)
        meta = {"provenance": field.provenance, "seed": seed, "sigma2": sigma2,
                "replicate": i, "config": cfg}
        if sim["format"] == "raw":
            write_grid(stem, field.values, meta)
        else:
            write_json(stem.with_suffix(".json"), {**meta, "n1": lat.n1, "n2": lat.n2})
    print(f"wrote {reps} field(s) to {out}")
    return EXIT_OK


def _expand_inputs(patterns: Sequence[str]) -> list[str]:
    files: list[str] = []
    for p in patterns:
        hits = sorted(glob.glob(p))
        files.extend(hits if hits else [p])
    seen = {}
    for f in files:
        seen.setdefault(str(Path(f).with_suffix("")), f)
    return list(seen.values())


def cmd_analyze(cfg: dict, inputs: Sequence[str] = ()) -> int:
    cfg, _, _, _ = resolve(cfg)
    an = cfg["analyze"]
    files = _expand_inputs(list(inputs) or list(an["inputs"]))
    if not files:
        raise ConfigError("analyze: no input field files (insufficient data)")
    grids = []
    shape = None
    for f in files:
        values, _ = read_grid(f)
        if shape is not None and values.shape != shape:
            raise FormatError(f"{f}: lattice {values.shape} differs from {shape}")
        shape = values.shape
        grids.append(values)
    pgram = mean_periodogram(grids)
    center = (math.pi, math.pi) if an["center"] == "corner" else (0.0, 0.0)
    rad = radial_average(pgram, int(an["n_bins"]), center)
    fit = tuple(an["fit_range"]) if an["fit_range"] else None
    try:
        report = estimate_memory(rad, fit)
    except InsufficientDataError as exc:
        raise ConfigError(f"analyze: {exc}") from exc
    out = Path(cfg["output"])
    write_grid(out / "periodogram", pgram.ordinates,
               {"replicates": pgram.replicates, "normalization": "|DFT|^2/(4 pi^2 n1 n2)",
                "config": cfg})
    write_csv(out / "radial.csv", ["r_lo", "r_hi", "radius", "mean_ordinate", "count"],
              ([r["r_lo"], r["r_hi"], r["radius"], r["mean_ordinate"], r["count"]]
               for r in rad.rows()))
    write_json(out / "memory.json", {**report.to_dict(), "n_files": len(files), "config": cfg})
    print(json.dumps(report.to_dict(), sort_keys=True))
    return EXIT_OK


def cmd_verify(cfg: dict, c_alpha_fn=None) -> int:
    cfg, _, quad, _ = resolve(cfg)
    alphas = [float(a) for a in cfg["verify"]["alphas"]]
    results = run_battery(alphas, quad, c_alpha_fn)
    for r in results:
        print(r.line())
    ok = all(r.passed for r in results)
    print(f"{sum(r.passed for r in results)}/{len(results)} checks passed")
    return EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="isoagg", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("spectral", "simulate", "analyze", "verify"):
        s = sub.add_parser(name)
        s.add_argument("--config", help="YAML or JSON config file (or a sidecar)")
        s.add_argument("--seed", type=int)
        s.add_argument("--out", help="output directory")
        s.add_argument("--workers", type=int)
        if name == "simulate":
            s.add_argument("--mode", choices=("single", "aggregate", "limit"))
        if name == "analyze":
            s.add_argument("inputs", nargs="*", help="field files (.f64 or .json)")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        overrides: dict[str, Any] = {}
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.out is not None:
            overrides["output"] = args.out
        if args.workers is not None:
            overrides["workers"] = args.workers
        cfg = _merge(cfg, overrides)
        if args.command == "spectral":
            return cmd_spectral(cfg)
        if args.command == "simulate":
            return cmd_simulate(cfg, args.mode)
        if args.command == "analyze":
            return cmd_analyze(cfg, args.inputs)
        return cmd_verify(cfg)
    except (ConfigError, FormatError, NonStationaryError, NonExistenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
