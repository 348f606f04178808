"""Command-line drivers for purity maps, minimal-mixedness scans and harvesting.

Every subcommand reads a JSON config (``"schema": 1``), writes its data files
and a ``manifest.json`` into ``--out`` and exits with 0 on success, 2 on a
config error and 3 on a numerical failure.

Example:
    localpurity purity-map --config map.json --out out/map --workers 4
"""
from __future__ import annotations

import argparse
import math
import os
import sys
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .config import Config, ConfigError, load_config
from .errors import LocalPurityError, ValidationError
from .fock_oracle import OracleSetup, run_oracle
from .harvesting import (
    DetectorSpec,
    assemble_state,
    compute_elements,
    negativity,
    pt_negativity_oracle,
    threshold,
)
from .profiles import FAMILIES
from .serialization import dumps, grid_to_csv, grid_to_json, sha256
from .thermal import (
    FieldSpec,
    QuadratureConfig,
    log_axis,
    purity_curve,
    purity_grid,
    u_objective,
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3


class NumericalFailure(Exception):
    """Raised after partial output has been written."""


# ---------------------------------------------------------------------------
# config sections


def _quadrature(cfg: Config, tol: float | None) -> QuadratureConfig:
    q = cfg.section("quadrature", required=False)
    kw = {
        "rel_tol": cfg.number(q, "rel_tol", 1e-8, positive=True),
        "k_max": cfg.number(q, "k_max", positive=True),
        "uv_cutoff": cfg.number(q, "uv_cutoff", positive=True),
        "cavity_jmax": cfg.integer(q, "cavity_jmax", minimum=1),
    }
    if tol is not None:
        kw["rel_tol"] = tol
    try:
        return QuadratureConfig(**kw)
    except ValidationError as exc:
        raise cfg.error("quadrature", str(exc)) from None


def _profile_spec(cfg: Config, with_ell: bool = False) -> dict:
    p = cfg.section("profile")
    spec = {
        "family": cfg.choice(p, "family", FAMILIES),
        "m": cfg.integer(p, "m", minimum=1),
    }
    if spec["m"] is None:
        raise cfg.error("profile", "profile needs an integer 'm'")
    kappa_ell = cfg.number(p, "kappa_ell", positive=True)
    if spec["family"] == "zkappa":
        if kappa_ell is None:
            raise cfg.error("profile", "zkappa profiles need 'kappa_ell'")
        spec["kappa_ell"] = kappa_ell
    if with_ell:
        spec["ell"] = cfg.number(p, "ell", 1.0, positive=True)
    return spec


def _field(cfg: Config, *, grid: bool) -> FieldSpec:
    f = cfg.section("field")
    dim = cfg.integer(f, "dim", 1, minimum=1)
    regulator = cfg.choice(f, "regulator", ("none", "mass", "cavity"), "none")
    beta = cfg.number(f, "beta", math.inf, positive=True, allow_inf=True)
    if grid:
        # grids fix the regulator scale to one
        mass = 1.0 if regulator == "mass" else 0.0
        length = 1.0 if regulator == "cavity" else None
    else:
        mass = cfg.number(f, "mass", 0.0)
        length = cfg.number(f, "cavity_length", positive=True) if regulator == "cavity" else None
    try:
        return FieldSpec(dim=dim, mass=mass, beta=beta, regulator=regulator, cavity_length=length)
    except ValidationError as exc:
        raise cfg.error("field", str(exc)) from None


def _axis(cfg: Config, section: dict, key: str) -> np.ndarray:
    spec = section.get(key)
    if isinstance(spec, list):
        return np.array(cfg.number_list(section, key, positive=True))
    if not isinstance(spec, dict):
        raise cfg.error(key, f"axis {key!r} must be a list or an object with min, max, n")
    lo = cfg.number(spec, "min", positive=True)
    hi = cfg.number(spec, "max", positive=True)
    n = cfg.integer(spec, "n", minimum=1)
    if lo is None or hi is None or n is None:
        raise cfg.error(key, f"axis {key!r} needs 'min', 'max' and 'n'")
    scale = cfg.choice(spec, "scale", ("log", "linear"), "log")
    return log_axis(lo, hi, n) if scale == "log" else np.linspace(lo, hi, n)


def _detector(cfg: Config, d: dict, name: str, dim: int) -> DetectorSpec:
    if not isinstance(d, dict):
        raise cfg.error(name, f"detector {name!r} must be an object")
    center = d.get("center", [0.0] * dim)
    if not isinstance(center, list) or len(center) != dim:
        raise cfg.error(name, f"detector {name!r} needs a {dim}-component 'center'")
    try:
        return DetectorSpec(
            kind=cfg.choice(d, "kind", ("qubit", "oscillator"), "qubit"),
            gap=cfg.number(d, "gap", 1.0, positive=True),
            coupling=cfg.number(d, "coupling", 1.0),
            z=cfg.number(d, "z", 0.0),
            center=tuple(center),
            spatial_width=cfg.number(d, "spatial_width", 1.0, positive=True),
            switch_center=cfg.number(d, "switch_center", 0.0),
            switch_width=cfg.number(d, "switch_width", 1.0, positive=True),
        )
    except ValidationError as exc:
        raise cfg.error(name, str(exc)) from None


def _detectors(cfg: Config, fld: FieldSpec) -> tuple[DetectorSpec, DetectorSpec]:
    d = cfg.section("detectors")
    dim = 3 if fld.dim == 3 else 1
    a = _detector(cfg, d.get("A"), "A", dim)
    b = _detector(cfg, d.get("B"), "B", dim)
    if a.kind != b.kind:
        raise cfg.error("detectors", "both detectors must be of the same kind")
    return a, b


# ---------------------------------------------------------------------------
# outputs


def _write_outputs(out: Path, command: str, cfg: Config, files: dict, started: float, workers: int) -> None:
    out.mkdir(parents=True, exist_ok=True)
    digests = {}
    for name, text in files.items():
        (out / name).write_text(text, encoding="utf-8")
        digests[name] = sha256(text)
    manifest = {
        "schema": 1,
        "command": command,
        "config": cfg.data,
        "version": __version__,
        "workers": workers,
        "wall_time_s": round(time.perf_counter() - started, 3),
        "outputs": digests,
    }
    (out / "manifest.json").write_text(dumps(manifest), encoding="utf-8")


# ---------------------------------------------------------------------------
# subcommands


def cmd_purity_map(cfg: Config, args) -> None:
    spec = _profile_spec(cfg)
    fld = _field(cfg, grid=True)
    if fld.regulator == "none":
        raise cfg.error("regulator", "purity-map needs a mass or cavity regulator; use purity-curve otherwise")
    g = cfg.section("grid")
    x = _axis(cfg, g, "x")
    y = _axis(cfg, g, "y")
    grid = purity_grid(spec, fld, x, y, _quadrature(cfg, args.tol), workers=args.workers)
    files = {"purity_map.csv": grid_to_csv(grid), "purity_map.json": grid_to_json(grid)}
    _write_outputs(Path(args.out), "purity-map", cfg, files, args.started, args.workers)
    if grid.errors:
        raise NumericalFailure(f"{len(grid.errors)} grid cell(s) failed; see purity_map.json")


def cmd_purity_curve(cfg: Config, args) -> None:
    spec = _profile_spec(cfg, with_ell=True)
    fld = _field(cfg, grid=False)
    temps = _axis(cfg, cfg.data, "temperatures")
    grid = purity_curve(spec, fld, temps, _quadrature(cfg, args.tol), workers=args.workers)
    files = {"purity_curve.csv": grid_to_csv(grid), "purity_curve.json": grid_to_json(grid)}
    _write_outputs(Path(args.out), "purity-curve", cfg, files, args.started, args.workers)
    if grid.errors:
        raise NumericalFailure(f"{len(grid.errors)} point(s) failed; see purity_curve.json")


def _ladder(cfg: Config) -> list[tuple[int, float]]:
    data = cfg.data
    if "ladder" in data:
        pairs = data["ladder"]
        if not isinstance(pairs, list) or not pairs:
            raise cfg.error("ladder", "'ladder' must be a non-empty list of [m, kappa_ell_over_pi] pairs")
        out = []
        for p in pairs:
            if (not isinstance(p, list) or len(p) != 2 or isinstance(p[0], bool)
                    or not isinstance(p[0], int) or not isinstance(p[1], (int, float)) or not p[1] > 0):
                raise cfg.error("ladder", f"bad ladder entry {p!r}; expected [m, kappa_ell_over_pi]")
            out.append((p[0], float(p[1])))
        return out
    scan = cfg.section("scan")
    ms = cfg.number_list(scan, "m_values")
    ks = cfg.number_list(scan, "kappa_ell_over_pi", positive=True)
    for m in ms:
        if m != int(m):
            raise cfg.error("m_values", f"m must be an integer, got {m}")
    return [(int(m), k) for m in ms for k in ks]


def cmd_min_mix(cfg: Config, args) -> None:
    pairs = _ladder(cfg)
    ell = cfg.number(cfg.data, "ell", 1.0, positive=True)
    beta = cfg.number(cfg.data, "beta", math.inf, positive=True, allow_inf=True)
    for m, _ in pairs:
        if m < 3:
            raise cfg.error("ladder" if "ladder" in cfg.data else "m_values", f"m must be >= 3, got {m}")
    qc = _quadrature(cfg, args.tol)
    rows = []
    failure = None
    for m, k in pairs:
        try:
            u = u_objective(m, k * math.pi / ell, ell, beta, qc)
            rows.append({"m": m, "kappa_ell_over_pi": k, "u": u})
        except LocalPurityError as exc:
            rows.append({"m": m, "kappa_ell_over_pi": k, "u": None, "error": f"{type(exc).__name__}: {exc}"})
            failure = failure or str(exc)
    good = [r for r in rows if r["u"] is not None]
    us = [r["u"] for r in rows]
    report = {
        "schema": 1,
        "ell": ell,
        "beta": beta,
        "table": rows,
        "best": min(good, key=lambda r: (r["u"], r["m"], r["kappa_ell_over_pi"])) if good else None,
        "strictly_decreasing": failure is None and all(b < a for a, b in zip(us, us[1:])),
    }
    _write_outputs(Path(args.out), "min-mix", cfg, {"min_mix.json": dumps(report)}, args.started, 1)
    if failure:
        raise NumericalFailure(failure)


def _harvest_report(cfg: Config, args) -> dict:
    fld = _field(cfg, grid=False)
    det_a, det_b = _detectors(cfg, fld)
    elements = compute_elements(det_a, det_b, fld, _quadrature(cfg, args.tol))
    thr = threshold(elements, det_a.coupling if det_a.coupling > 0 else 1.0)
    state = assemble_state(elements, det_a.z, det_b.z, det_a.kind)
    closed = negativity(elements, det_a.z, det_b.z)
    oracle = pt_negativity_oracle(state)
    report = {
        "schema": 1,
        "field": asdict(fld),
        "detectors": {"A": asdict(det_a), "B": asdict(det_b)},
        "elements": elements.to_mapping(),
        "negativity": {"closed_form": closed, "pt_oracle": oracle, "difference": oracle - closed},
        "N0": thr.z_c,
        "z_c": thr.z_c,
        "harvests": thr.harvests,
        "lambda_c": thr.describe(),
    }
    return report, elements, thr


def cmd_harvest(cfg: Config, args) -> None:
    report, elements, thr = _harvest_report(cfg, args)
    z_c = thr.z_c
    sweep = cfg.number_list(cfg.data, "z_sweep", required=False)
    if sweep is None:
        sweep = [0.0, 0.5 * z_c, z_c, 2.0 * z_c] if thr.harvests else [0.0]
    for z in sweep:
        if not 0 <= z < 1:
            raise cfg.error("z_sweep", f"z values must lie in [0, 1), got {z}")
    report["z_sweep"] = [{"z": z, "negativity": negativity(elements, z, z)} for z in sweep]
    ladder = cfg.number_list(cfg.data, "lambda_ladder", required=False, positive=True)
    if ladder is not None:
        lam0 = thr.lambda_ref
        report["lambda_ladder"] = [
            {"lambda": lam, "z_c": threshold(elements.scaled(lam / lam0, lam / lam0), lam).z_c}
            for lam in ladder
        ]
    if thr.harvests:
        zs = [z for z in (1e-6, 1e-4, 1e-3, 1e-2) if z < 1]
        report["lambda_c_samples"] = [{"z": z, "lambda_c": thr.lambda_c(z)} for z in zs]
    _write_outputs(Path(args.out), "harvest", cfg, {"harvest.json": dumps(report)}, args.started, args.workers)


def cmd_threshold(cfg: Config, args) -> None:
    report, _, thr = _harvest_report(cfg, args)
    zs = cfg.number_list(cfg.data, "z_values", required=False) or [1e-6, 1e-4, 1e-3, 1e-2]
    for z in zs:
        if not 0 <= z < 1:
            raise cfg.error("z_values", f"z values must lie in [0, 1), got {z}")
    out = {
        "schema": 1,
        "z_c": thr.z_c,
        "lambda_ref": thr.lambda_ref,
        "harvests": thr.harvests,
        "lambda_c": thr.describe(),
        "samples": [{"z": z, "lambda_c": thr.lambda_c(z)} for z in zs] if thr.harvests else [],
        "elements": report["elements"],
    }
    _write_outputs(Path(args.out), "threshold", cfg, {"threshold.json": dumps(out)}, args.started, 1)


def cmd_oracle(cfg: Config | None, args) -> None:
    kw = {}
    if cfg is not None:
        s = cfg.section("setup", required=False)
        for key in ("cavity_length", "separation", "sigma", "gap", "switch_width", "coupling", "time_span"):
            val = cfg.number(s, key, positive=True)
            if val is not None:
                kw[key] = val
        for key in ("n_modes", "steps"):
            val = cfg.integer(s, key, minimum=1)
            if val is not None:
                kw[key] = val
    try:
        setup = OracleSetup(**kw)
    except ValidationError as exc:
        raise ConfigError(str(exc), None, getattr(cfg, "source", "<defaults>")) from None
    data = run_oracle(setup)
    empty = Config({}, "", "<defaults>")
    _write_outputs(Path(args.out), "oracle", cfg or empty, {"fock_cavity_golden.json": dumps(data)},
                   args.started, 1)


COMMANDS = {
    "purity-map": cmd_purity_map,
    "purity-curve": cmd_purity_curve,
    "min-mix": cmd_min_mix,
    "harvest": cmd_harvest,
    "threshold": cmd_threshold,
    "oracle": cmd_oracle,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="localpurity", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=name != "oracle", help="JSON config path")
        p.add_argument("--out", default=f"out_{name.replace('-', '_')}", help="output directory")
        p.add_argument("--workers", type=int, default=os.cpu_count() or 1, help="worker processes")
        p.add_argument("--tol", type=float, default=None, help="override quadrature rel_tol")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    args.started = time.perf_counter()
    if args.workers < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config) if args.config else None
        COMMANDS[args.command](cfg, args)
    except ValidationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailure as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except LocalPurityError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
