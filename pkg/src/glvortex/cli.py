"""Command line front end: synth, analyze, lower-bound, dynamics, verify.

Exit codes: 0 on success, 2 on configuration errors, 3 on pipeline errors (the
failing stage is printed).
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .current import PolyhedralCurrent, boundary_residual, build_vortex_current, detect_all, sample_faces
from .errors import ConfigError, DomainNotSupported, GLVortexError, VerificationFailed
from .field import (Domain, LatticeField3, energy, filaments_to_json, quantize_like_glf3, read_glf3, synth_field,
                    write_glf3, SYNTH_KINDS)
from .grid import GridSpec, choose_grid
from .lower_bound import (DEFAULT_CONFIG, FORMATS, boundary_certificate, coarea_certificate,
                          default_params, theorem1_report)

log = logging.getLogger("glvortex")

SPACETIME_KINDS = ("translating_vortex", "static_vortex")
VERSION = "v" + __version__


# ---------------------------------------------------------------------------
# Canonical JSON
# ---------------------------------------------------------------------------


def _canon(obj, out: list):
    if isinstance(obj, dict):
        out.append("{")
        for n, key in enumerate(sorted(obj, key=str)):
            if n:
                out.append(",")
            out.append(json.dumps(str(key)))
            out.append(":")
            _canon(obj[key], out)
        out.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        out.append("[")
        for n, v in enumerate(obj.tolist() if isinstance(obj, np.ndarray) else obj):
            if n:
                out.append(",")
            _canon(v, out)
        out.append("]")
    elif isinstance(obj, (bool, np.bool_)):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isfinite(x):
            s = format(x, ".17g")
            out.append(s if any(c in s for c in ".en") else s + ".0")
        else:
            out.append(json.dumps(str(x)))
    elif obj is None:
        out.append("null")
    else:
        out.append(json.dumps(str(obj)))


def canonical_json(obj) -> str:
    """Sorted keys, no whitespace, floats with 17 significant digits, non-finite floats as strings."""
    out: list = []
    _canon(obj, out)
    return "".join(out) + "\n"


def write_report(path: Path, report: dict) -> None:
    """Write the canonical report and its timings sidecar (``<stem>.timings.json``)."""
    report = dict(report)
    timings = report.pop("timings", None)
    path.write_text(canonical_json(report))
    if timings is not None:
        path.with_suffix(".timings.json").write_text(json.dumps(timings, indent=1, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


def parse_config_file(path: str) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    cfg = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected key = value")
        k, v = (s.strip() for s in line.split("=", 1))
        cfg[k.replace("-", "_")] = v
    return cfg


def _positive(name: str, value) -> Optional[float]:
    if value is None:
        return None
    try:
        x = float(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name} must be a number, got {value!r}") from exc
    if not (x > 0 and math.isfinite(x)):
        raise ConfigError(f"{name} must be positive and finite, got {value!r}")
    return x


def _merge(args: argparse.Namespace) -> dict:
    """Config file values overridden by explicit command line flags."""
    cfg = parse_config_file(args.config) if getattr(args, "config", None) else {}
    for k, v in vars(args).items():
        if v is not None and k not in ("config", "func", "command"):
            cfg[k] = v
    for name in ("eps", "delta", "q", "tau", "Lambda", "lam", "kappa", "rho", "gamma", "C1", "C_grid", "b"):
        if name in cfg:
            cfg[name] = _positive(name, cfg[name])
    if "seed" in cfg:
        try:
            cfg["seed"] = int(cfg["seed"])
        except ValueError as exc:
            raise ConfigError("seed must be an integer") from exc
    if "threads" in cfg:
        cfg["threads"] = int(cfg["threads"])
        if cfg["threads"] < 1:
            raise ConfigError("threads must be >= 1")
    return cfg


def _domain(cfg: dict, fld: Optional[LatticeField3] = None) -> Optional[Domain]:
    text = cfg.get("domain")
    if not text:
        return None
    try:
        return Domain.parse(text, None if fld is None else fld.lo, None if fld is None else fld.hi)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _load_field(path: str, cfg: dict) -> LatticeField3:
    if not Path(path).exists():
        raise ConfigError(f"no such file: {path}")
    fld = read_glf3(path)
    dom = _domain(cfg, fld)
    return fld if dom is None else fld.with_(domain=dom)


def _executor(cfg: dict):
    n = cfg.get("threads") or os.cpu_count() or 1
    return ThreadPoolExecutor(max_workers=n) if n > 1 else None


def _require(cfg: dict, *names):
    for n in names:
        if cfg.get(n) is None:
            raise ConfigError(f"missing required parameter --{n}")


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _parse_params(items) -> dict:
    params = {}
    for item in items or []:
        if "=" not in item:
            raise ConfigError(f"--param expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        vals = [float(s) for s in v.split(",")]
        params[k] = vals[0] if len(vals) == 1 else vals
    return params


def cmd_synth(cfg: dict) -> int:
    _require(cfg, "kind", "out")
    kind = cfg["kind"]
    eps = cfg.get("eps", 0.02)
    dims = int(cfg.get("dims", 64))
    out = Path(cfg["out"])
    params = _parse_params(cfg.get("param"))
    if kind in SPACETIME_KINDS:
        from .dynamics import static_vortex, translating_vortex
        stf = (translating_vortex if kind == "translating_vortex" else static_vortex)(n=dims, eps=eps, **params)
        fld, filaments = stf.fld, []
    elif kind in SYNTH_KINDS:
        fld, filaments = synth_field(kind, params, dims=dims, eps=eps, domain=_domain(cfg))
    else:
        raise ConfigError(f"unknown kind {kind!r}")
    write_glf3(out, fld)
    truth = Path(cfg.get("truth") or out.with_suffix(".truth.json"))
    truth.write_text(canonical_json(filaments_to_json(filaments)))
    print(f"wrote {out} and {truth}")
    return 0


def _report_config(cfg: dict) -> dict:
    keys = set(DEFAULT_CONFIG)
    return {k: cfg[k] for k in keys if cfg.get(k) is not None}


def cmd_analyze(cfg: dict) -> int:
    _require(cfg, "input", "eps")
    fld = _load_field(cfg["input"], cfg)
    ex = _executor(cfg)
    try:
        report = theorem1_report(fld, cfg["eps"], _report_config(cfg), executor=ex)
    finally:
        if ex is not None:
            ex.shutdown()
    report["config"]["domain"] = fld.domain.describe()
    out = Path(cfg.get("out") or "report.json")
    write_report(out, report)
    failed = [k for k, v in report["items"].items() if not v["pass"]]
    print(f"wrote {out}; items failing: {failed or 'none'}")
    return 0


def cmd_lower_bound(cfg: dict) -> int:
    _require(cfg, "input", "eps")
    fld = _load_field(cfg["input"], cfg)
    eps = cfg["eps"]
    delta = cfg.get("delta") or 8.0 * fld.h
    seed = int(cfg.get("seed", 0))
    t0 = time.perf_counter()
    grid = choose_grid(fld, eps, delta, rng_seed=seed, C_grid=cfg.get("C_grid", 100.0), executor=_executor(cfg))
    fs = detect_all(sample_faces(fld, grid))
    nu = build_vortex_current(fld, grid, eps, face_sets=fs)
    F = energy(fld, eps).F_eps
    params = default_params(eps, delta, F, "cubes", b=cfg.get("b", 1.0), C1=cfg.get("C1", 1.0))
    if cfg.get("lam"):
        params.lam = cfg["lam"]
        params.kappa = cfg.get("kappa") or params.lam ** (2 * params.rho) / 6.0
    certs = [coarea_certificate(fld, grid, nu.support_cubes, eps, params, fs, seed=seed)]
    if nu.theta_used:
        try:
            certs.append(boundary_certificate(fld, grid, eps, face_sets=fs, seed=seed, tau=cfg.get("tau")))
        except DomainNotSupported as exc:
            log.info("boundary certificate skipped: %s", exc)
    report = {"version": VERSION, "formats": dict(FORMATS), "seed": seed,
              "config": {"eps": eps, "delta": delta, "domain": fld.domain.describe()},
              "certificates": [c.to_json() for c in certs], "timings": {"total": time.perf_counter() - t0}}
    out = Path(cfg.get("out") or "certificates.json")
    write_report(out, report)
    print(f"wrote {out}; sound: {all(c.sound for c in certs)}")
    return 0


def cmd_dynamics(cfg: dict) -> int:
    from .dynamics import (SpaceTimeField, continuity_residual, product_estimate_check, slice_integrals,
                           smooth_cutoff)
    _require(cfg, "input", "eps")
    fld = _load_field(cfg["input"], cfg)
    stf = SpaceTimeField(fld)
    eps = cfg["eps"]
    seed = int(cfg.get("seed", 0))
    delta = cfg.get("delta") or 16.0 * fld.h
    t0 = time.perf_counter()
    res = continuity_residual(stf)
    grid = choose_grid(fld, eps, delta, rng_seed=seed, executor=_executor(cfg))
    nu = build_vortex_current(fld, grid, eps)
    mid = 0.5 * (fld.lo + fld.hi)
    ext = 0.5 * (fld.hi - fld.lo)
    f = smooth_cutoff(mid, 0.8 * ext * np.array([1.0, 0.6, 0.6]))
    g = smooth_cutoff(mid, 0.9 * ext)
    X = lambda p: np.stack([g(p), np.zeros(p.shape[:-1])], axis=-1)  # noqa: E731
    pe = product_estimate_check(stf, f, X, cfg.get("Lambda"), eps, nu)
    report = {
        "version": VERSION, "formats": dict(FORMATS), "seed": seed,
        "config": {"eps": eps, "delta": delta},
        "J_slice_integrals": slice_integrals(stf),
        "continuity": {k: v for k, v in res.items() if k != "residual"},
        "product_estimate": pe, "current": nu.to_json(),
        "timings": {"total": time.perf_counter() - t0},
    }
    out = Path(cfg.get("out") or "dynamics.json")
    write_report(out, report)
    print(f"wrote {out}; product estimate slack {pe['slack']:.6g} (pass={pe['pass']})")
    return 0


def verify_report(report: dict, fld: LatticeField3) -> list:
    """Replay a report against its field; returns the list of failed checks."""
    failures = []
    cfg = report.get("config", {})
    if report.get("formats") != FORMATS:
        failures.append("formats")
    nu = PolyhedralCurrent.from_json(report["current"])
    if np.any(nu.mult != np.rint(nu.mult)):
        failures.append("quantization")
    if boundary_residual(nu, fld.domain):
        failures.append("relative_boundary")
    for c in report.get("certificates", []):
        if c["bound"] > c["measured_energy"] + c["tolerance"]:
            failures.append(f"certificate:{c['region']}")
    replay_cfg = {k: cfg[k] for k in DEFAULT_CONFIG if k in cfg}
    fresh = theorem1_report(fld, cfg["eps"], replay_cfg)
    fresh["config"]["domain"] = fld.domain.describe()
    fresh.pop("timings", None)
    stored = {k: v for k, v in report.items() if k != "timings"}
    for key in sorted(set(fresh) | set(stored)):
        if canonical_json(fresh.get(key)) != canonical_json(stored.get(key)):
            failures.append(f"replay:{key}")
    return failures


def cmd_verify(cfg: dict) -> int:
    _require(cfg, "report", "input")
    try:
        report = json.loads(Path(cfg["report"]).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read report: {exc}") from exc
    if "domain" not in cfg and "domain" in report.get("config", {}):
        d = report["config"]["domain"]
        cfg["domain"] = ("box:" + ",".join(map(str, d["lo"] + d["hi"])) if d["kind"] == "box"
                         else "ball:" + ",".join(map(str, d["center"] + [d["radius"]])))
    fld = _load_field(cfg["input"], cfg)
    failures = verify_report(report, fld)
    if failures:
        raise VerificationFailed("report does not match its field: " + ", ".join(failures), failures=failures)
    print("verified")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="glvortex", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=VERSION)
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, field_arg=True):
        sp.add_argument("--config", help="key = value file; flags override it")
        sp.add_argument("--eps", type=float)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out")
        sp.add_argument("--domain", help="box, box:x0,y0,z0,x1,y1,z1 or ball:cx,cy,cz,r")
        sp.add_argument("--threads", type=int, help="worker threads (default: logical cores)")
        if field_arg:
            sp.add_argument("input", nargs="?", help="GLF3 field")

    sp = sub.add_parser("synth", help="write a synthetic field and its ground truth")
    common(sp, field_arg=False)
    sp.add_argument("--kind", choices=SYNTH_KINDS + SPACETIME_KINDS)
    sp.add_argument("--dims", type=int)
    sp.add_argument("--truth", help="ground-truth JSON path (default <out>.truth.json)")
    sp.add_argument("--param", action="append", help="geometry parameter key=v1[,v2,...]")
    sp.set_defaults(func=cmd_synth)

    for name, fn, help_ in (("analyze", cmd_analyze, "full pipeline report"),
                            ("lower-bound", cmd_lower_bound, "energy certificates only")):
        sp = sub.add_parser(name, help=help_)
        common(sp)
        sp.add_argument("--delta", type=float)
        sp.add_argument("--q", type=float, help="delta = |log eps|^-q")
        sp.add_argument("--tau", type=float)
        sp.add_argument("--lam", type=float)
        sp.add_argument("--kappa", type=float)
        sp.add_argument("--b", type=float)
        sp.add_argument("--C1", type=float)
        sp.add_argument("--C-grid", dest="C_grid", type=float)
        sp.add_argument("--trials", type=int)
        sp.set_defaults(func=fn)

    sp = sub.add_parser("dynamics", help="space-time vorticity, velocity and product estimate")
    common(sp)
    sp.add_argument("--delta", type=float)
    sp.add_argument("--Lambda", type=float)
    sp.set_defaults(func=cmd_dynamics)

    sp = sub.add_parser("verify", help="replay a report against its field")
    sp.add_argument("report")
    sp.add_argument("input")
    sp.add_argument("--domain")
    sp.add_argument("--config")
    sp.set_defaults(func=cmd_verify)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(message)s")
    try:
        cfg = _merge(args)
        return args.func(cfg)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except GLVortexError as exc:
        print(f"pipeline error [{exc.stage}]: {exc}", file=sys.stderr)
        return 3


def main() -> None:
    sys.exit(run())
