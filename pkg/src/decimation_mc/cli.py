"""Command-line entry point.

Every subcommand reads a JSON run configuration, validates it against the
bundled schema (``run_config.schema.json``), writes its data files plus a
``manifest.json`` into the output directory and exits with 0 (ok), 2 (bad
configuration) or 3 (runtime failure).

Environment overrides (flags win over the environment, the environment wins
over the config file):

``DECIMATION_MC_SEED``     chain seed
``DECIMATION_MC_WORKERS``  worker threads
``DECIMATION_MC_OUT``      output directory
``DECIMATION_MC_BACKEND``  ``numba`` or ``numpy`` sweep kernels
"""
from __future__ import annotations

import argparse
import copy
import csv
import hashlib
import io
import json
import math
import os
import sys
import warnings
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path

import jsonschema

from . import __version__
from .config import MINUS, PLUS, SCALAR, SpinConfiguration, homogeneous
from .couplings import CouplingModel, build_kernel, tail_mass
from .decimation import CSV_HEADER, bad_vs_good_scan, choose_N, decimate, default_kernel, discontinuity_probe
from .estimates import pool
from .hamiltonian import BoundarySpec, annulus_size, bc_energy_difference
from .lattice import ORIGIN, Box
from .sampler import ChainSpec, block_observable, magnetization, run_chain, run_many, site_observable

ENV_PREFIX = "DECIMATION_MC_"
SCHEMA_VERSION = 1
COMMANDS = ("magnetize", "probe", "scan", "annulus", "energy-bound", "oracle", "decimate")
ANNULUS_HEADER = "family,alpha1,alpha2,L,target_C,N,bound_C,asymptotic_exponent"

# fields each command needs beyond the schema's structural checks
REQUIRED = {
    "magnetize": {"model": ["beta"], "geometry": ["L"]},
    "probe": {"model": ["beta"], "geometry": ["L"]},
    "scan": {"model": ["beta"], "geometry": ["L_list"]},
    "annulus": {"geometry": []},
    "energy-bound": {"geometry": ["L", "N"]},
    "oracle": {"model": ["beta"]},
    "decimate": {},
}


class ConfigError(Exception):
    pass


def load_schema() -> dict:
    text = resources.files(__package__).joinpath("run_config.schema.json").read_text()
    return json.loads(text)


def command_schema(command: str) -> dict:
    """The base schema with the command's options block and required fields."""
    base = load_schema()
    schema = copy.deepcopy(base)
    defs = schema["$defs"]
    schema["properties"]["options"] = defs["options"][command]
    needs = REQUIRED[command]
    schema["required"] = sorted(["model"] + list(needs) if command != "decimate" else list(needs))
    for block, fields in needs.items():
        defs[block] = dict(defs[block])
        defs[block]["required"] = sorted(set(defs[block].get("required", [])) | set(fields))
    if command == "decimate":
        schema["required"] = ["options"]
    if command == "annulus":
        schema["required"] = ["geometry", "model"]
        defs["geometry"]["anyOf"] = [{"required": ["L"]}, {"required": ["L_list"]}]
    return schema


def validate(command: str, cfg: dict) -> None:
    validator = jsonschema.Draft202012Validator(command_schema(command))
    errors = sorted(validator.iter_errors(cfg), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise ConfigError(f"config error at {where}: {e.message}")


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=True) + "\n"


def config_hash(cfg: dict) -> str:
    """SHA-256 of the resolved config without its ``output`` block."""
    body = {k: v for k, v in cfg.items() if k != "output"}
    return hashlib.sha256(json.dumps(body, sort_keys=True, separators=(",", ":")).encode()).hexdigest()


# -- config resolution --------------------------------------------------------


def resolve(args) -> dict:
    if args.config is None:
        cfg = {}
    else:
        try:
            cfg = json.loads(Path(args.config).read_text())
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {args.config}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}")
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
    validate(args.command, cfg)

    seed = args.seed if args.seed is not None else _env_int("SEED")
    if seed is not None:
        if not 0 <= seed < 2 ** 64:
            raise ConfigError("config error at chain/seed: must be an unsigned 64-bit integer")
        cfg.setdefault("chain", {})["seed"] = seed
    out = args.out or os.environ.get(ENV_PREFIX + "OUT")
    if out:
        cfg.setdefault("output", {})["directory"] = out
    return cfg


def _env_int(name: str):
    raw = os.environ.get(ENV_PREFIX + name)
    if raw is None or raw == "":
        return None
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"environment variable {ENV_PREFIX + name} must be an integer")


def workers_from(args) -> int:
    w = args.workers if args.workers is not None else _env_int("WORKERS")
    if w is None:
        w = os.cpu_count() or 1
    if w < 1:
        raise ConfigError("workers must be positive")
    return w


def model_from(cfg: dict) -> CouplingModel:
    m = cfg["model"]
    try:
        return CouplingModel.from_dict(m)
    except ValueError as exc:
        raise ConfigError(f"config error at model: {exc}")


def kernel_from(cfg: dict, model: CouplingModel):
    m = cfg["model"]
    R = m.get("truncation_radius")
    if R is None:
        return default_kernel(model)
    return build_kernel(model, R, m.get("kernel_shape", "euclidean"))


def chain_from(cfg: dict) -> tuple[ChainSpec, int]:
    c = dict(cfg.get("chain", {}))
    replicas = int(c.pop("replicas", 8))
    try:
        return ChainSpec.from_dict(c), replicas
    except ValueError as exc:
        raise ConfigError(f"config error at chain: {exc}")


# -- commands -------------------------------------------------------------------


def cmd_magnetize(cfg, workers, dry_run):
    model = model_from(cfg)
    kernel = kernel_from(cfg, model)
    spec, replicas = chain_from(cfg)
    L = cfg["geometry"]["L"]
    opts = cfg.get("options", {})
    kind = opts.get("observable", "block")
    box = Box(L)
    plan = _plan(model, kernel, box.side ** 2, 2 * replicas, spec)
    if dry_run:
        return plan, {}, []
    if kind == "block":
        obs = block_observable(opts.get("block_half_width", max(L // 2, 0)))
    elif kind == "origin":
        obs = site_observable(ORIGIN)
    else:
        obs = magnetization
    jobs, seeds = [], []
    for s, side in enumerate((PLUS, MINUS)):
        init = homogeneous(box, model.kind, side)
        for r in range(replicas):
            seed = (spec.seed + s * replicas + r) % 2 ** 64
            seeds.append(seed)
            jobs.append(_chain_job(init, BoundarySpec(side), model, kernel, spec.with_seed(seed), obs))
    res = run_many(jobs, workers)
    plus, minus = pool(res[:replicas]), pool(res[replicas:])
    payload = {
        "model": model.to_dict(),
        "L": L,
        "observable": kind,
        "plus": plus.to_dict(),
        "minus": minus.to_dict(),
        "difference": plus.mean - minus.mean,
        "difference_std_error": math.hypot(plus.std_error, minus.std_error),
        "tail_mass": tail_mass(model, kernel.radius, kernel.shape),
    }
    return plan, {"magnetize.json": canonical_json(payload)}, seeds


def _chain_job(init, bc, model, kernel, spec, obs):
    return lambda: run_chain(None, init, bc, model, kernel, model.beta, spec, {"m": obs})["m"]


def _plan(model, kernel, n_sites, n_jobs, spec) -> dict:
    return {
        "family": model.family,
        "kernel_entries": len(kernel),
        "truncation_radius": kernel.radius,
        "sites": n_sites,
        "jobs": n_jobs,
        "sweeps_per_job": spec.burn_in + spec.sweeps,
        "memory_bytes_estimate": int(n_jobs * (n_sites * 8 * 4 + spec.sweeps * 8) + len(kernel) * 24),
    }


def _probe_N(cfg, model, L) -> int:
    g = cfg["geometry"]
    if "N" in g:
        return g["N"]
    if "target_C" in g:
        if not model.is_long_range:
            return L + 1
        # the probe's pre-image box is twice the image box
        N_orig = annulus_size(model, 2 * L, g["target_C"]).N
        return max(L + 1, -(-N_orig // 2))
    return choose_N(model, L, g.get("N_rule", "paper_schedule"), g.get("ratio", 1.5))


def cmd_probe(cfg, workers, dry_run):
    model = model_from(cfg)
    kernel = kernel_from(cfg, model)
    spec, replicas = chain_from(cfg)
    g = cfg["geometry"]
    L = g["L"]
    N = _probe_N(cfg, model, L)
    if N <= L:
        raise ConfigError(f"config error at geometry/N: need N > L, got N={N}, L={L}")
    opts = cfg.get("options", {})
    plan = _plan(model, kernel, (4 * N + 1) ** 2, 2 * replicas, spec)
    plan["N"] = N
    if dry_run:
        return plan, {}, []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        rep = discontinuity_probe(
            model, model.beta, L, N, g.get("eps", 0.1), spec, replicas, kernel,
            image=opts.get("image", "alternating"), variant=opts.get("variant", "horizontal"),
            target_C=g.get("target_C", 1.0), workers=workers,
        )
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    seeds = [(spec.seed + k) % 2 ** 64 for k in range(2 * replicas)]
    files = {
        "probe.csv": CSV_HEADER + "\n" + rep.csv_row() + "\n",
        "probe.json": canonical_json(rep.to_dict()),
    }
    return plan, files, seeds


def cmd_scan(cfg, workers, dry_run):
    model = model_from(cfg)
    kernel = kernel_from(cfg, model)
    spec, replicas = chain_from(cfg)
    g = cfg["geometry"]
    rule = g.get("N_rule", "paper_schedule")
    Ns = [choose_N(model, L, rule, g.get("ratio", 1.5)) for L in g["L_list"]]
    plan = _plan(model, kernel, (4 * max(Ns) + 1) ** 2, 4 * replicas * len(Ns), spec)
    plan["N"] = Ns
    if dry_run:
        return plan, {}, []
    rows = bad_vs_good_scan(
        model, model.beta, g["L_list"], rule, spec, replicas, g.get("ratio", 1.5), kernel,
        g.get("eps", 0.1), cfg.get("options", {}).get("variant", "horizontal"), workers,
    )
    lines = [CSV_HEADER] + [r["report"].csv_row() for r in rows]
    summary = [
        {"L": r["L"], "N": r["N"], "image": r["image"], "gap_halved": r["gap_halved"], **r["report"].to_dict()}
        for r in rows
    ]
    seeds = [(spec.seed + k) % 2 ** 64 for k in range(2 * replicas)]
    return plan, {"scan.csv": "\n".join(lines) + "\n", "scan.json": canonical_json(summary)}, seeds


def cmd_annulus(cfg, workers, dry_run):
    model = model_from(cfg)
    g = cfg["geometry"]
    target = g.get("target_C", 1.0)
    Ls = g["L_list"] if "L_list" in g else [g["L"]]
    if dry_run:
        return {"family": model.family, "L": Ls, "target_C": target}, {}, []
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ANNULUS_HEADER.split(","))
    for L in Ls:
        s = annulus_size(model, L, target)
        w.writerow([
            model.family, _cell(model.alpha1), _cell(model.alpha2), L, repr(float(target)),
            s.N, repr(float(s.bound_C)), _cell(s.asymptotic_exponent),
        ])
    return {}, {"annulus.csv": buf.getvalue()}, []


def _cell(v):
    return "" if v is None else repr(float(v))


def cmd_energy_bound(cfg, workers, dry_run):
    model = model_from(cfg)
    g = cfg["geometry"]
    L, N = g["L"], g["N"]
    if N <= L:
        raise ConfigError(f"config error at geometry/N: need N > L, got N={N}, L={L}")
    if dry_run:
        return {"family": model.family, "L": L, "N": N}, {}, []
    payload = {"model": model.to_dict(), "L": L, "N": N, "bound": bc_energy_difference(L, N, model)}
    R = cfg["model"].get("truncation_radius")
    if R is not None:
        payload["tail_mass"] = tail_mass(model, R, cfg["model"].get("kernel_shape", "euclidean"))
    return {}, {"energy_bound.json": canonical_json(payload)}, []


def cmd_oracle(cfg, workers, dry_run):
    from .oracle import clock_quadrature_rotator, enumerate_ising, rectangle_system

    model = model_from(cfg)
    kernel = kernel_from(cfg, model)
    g = cfg.get("geometry", {})
    opts = cfg.get("options", {})
    rect = g.get("rect")
    if rect is None:
        L = g.get("L", 1)
        rect = [2 * L + 1, 2 * L + 1]
    system = rectangle_system(model, kernel, rect[0], rect[1], opts.get("exterior", "free"))
    if dry_run:
        return {"family": model.family, "free_sites": system.n_free}, {}, []
    try:
        if model.kind == SCALAR:
            res = enumerate_ising(system, beta=model.beta)
        else:
            res = clock_quadrature_rotator(system, beta=model.beta, q=opts.get("q", 64))
    except ValueError as exc:
        raise ConfigError(f"config error at geometry: {exc}")
    text = canonical_json(res.to_dict())
    print(text, end="")
    return {}, {"oracle.json": text}, []


def cmd_decimate(cfg, workers, dry_run):
    path = Path(cfg["options"]["input"])
    try:
        src = SpinConfiguration.from_json(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config error at options/input: file not found: {path}")
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"config error at options/input: {exc}")
    if dry_run:
        return {"input_L": src.L, "output_L": src.L // 2}, {}, []
    return {}, {"decimated.json": decimate(src).to_json() + "\n"}, []


HANDLERS = {
    "magnetize": cmd_magnetize,
    "probe": cmd_probe,
    "scan": cmd_scan,
    "annulus": cmd_annulus,
    "energy-bound": cmd_energy_bound,
    "oracle": cmd_oracle,
    "decimate": cmd_decimate,
}


# -- driver ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="decimation-mc", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", metavar="PATH")
        s.add_argument("--out", metavar="DIR")
        s.add_argument("--seed", type=int, metavar="U64")
        s.add_argument("--workers", type=int, metavar="N")
        s.add_argument("--dry-run", action="store_true")
    return p


def write_outputs(out_dir: Path, cfg: dict, command: str, files: dict, seeds, started: str) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        (out_dir / name).write_text(text)
    manifest = {
        "command": command,
        "config_hash": config_hash(cfg),
        "version": __version__,
        "schema_version": SCHEMA_VERSION,
        "seeds": list(seeds),
        "started": started,
        "finished": _now(),
        "files": sorted(files),
    }
    path = out_dir / "manifest.json"
    path.write_text(canonical_json(manifest))
    return path


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    started = _now()
    try:
        cfg = resolve(args)
        workers = workers_from(args)
        plan, files, seeds = HANDLERS[args.command](cfg, workers, args.dry_run)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - any failure past validation is a runtime error
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    if args.dry_run:
        print(canonical_json({"command": args.command, "plan": plan}), end="")
        return 0
    out_dir = Path(cfg.get("output", {}).get("directory", "."))
    out_cfg = cfg.get("output", {})
    files = {
        k: v for k, v in files.items()
        if not (k.endswith(".csv") and out_cfg.get("csv") is False)
        and not (k.endswith(".json") and out_cfg.get("json") is False)
    }
    try:
        write_outputs(out_dir, cfg, args.command, files, seeds, started)
    except OSError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
