"""Command-line interface: ``pacsafe {plan,certify,validate,grid,presets}``.

Exit codes: 0 accepted / success, 1 validation failed or sampling error,
2 configuration error, 3 certificate rejected, 4 plugin failure,
5 solver failure.  ``PAC_CERT_LOG`` sets the log level (default WARNING).
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

from .certify import Certificate, certify
from .config import load_config, param_value
from .errors import ConfigError, PacSafeError
from .planner import plan
from .presets import preset_names
from .systems.benchmarks import builtin
from .systems.plugin import DEFAULT_TIMEOUT, PluginSystem
from .validate import contour_grid, parse_slice, validate_certificate

log = logging.getLogger("pacsafe")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_REJECT, EXIT_PLUGIN, EXIT_SOLVER = 0, 1, 2, 3, 4, 5


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # usage errors are configuration errors (exit code 2, like argparse)
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _add_run_options(p):
    p.add_argument("--config", metavar="PATH", help="INI run configuration")
    p.add_argument("--preset", metavar="NAME", help="published settings, e.g. table1/ex6-sbc3")
    p.add_argument("--system", help="built-in benchmark name")
    p.add_argument("--method", help="rbc1 | rbc1_vc | rbc2 | sbc3")
    p.add_argument("--plugin", metavar="CMDLINE", help="external simulator command line")
    p.add_argument("--seed", metavar="U64", help="run seed (default 0)")
    p.add_argument("--workers", type=int, metavar="INT", help="sampling worker threads")
    p.add_argument("--out", metavar="DIR", help="output directory")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override one parameter (repeatable)")


def _overrides(pairs):
    out = {}
    for item in pairs:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = param_value(k.strip(), v.strip())
    return out


def _run_config(args):
    return load_config(args.config, preset=args.preset, method=args.method, system=args.system,
                       plugin=args.plugin, seed=args.seed, workers=args.workers,
                       out_dir=args.out, overrides=_overrides(args.set))


def _system_dim(cfg):
    if cfg.plugin:
        with cfg.open_system() as s:
            return s.n, s.name
    return builtin(cfg.system).n, cfg.system


def cmd_plan(args) -> int:
    cfg = _run_config(args)
    if not cfg.system and not cfg.plugin:
        raise ConfigError("plan needs a system (--system, --preset, --plugin or [system] name)")
    n, name = _system_dim(cfg)
    pl = plan(cfg.params, n)
    size = f"N={pl.N}" if pl.method.value.startswith("RBC1") else f"(N, M)=({pl.N}, {pl.M})"
    print(f"{pl.method.value} on {name} (n={n}, m={pl.m}): {size}, decision_dim={pl.decision_dim}")
    print(pl.guarantee.text)
    doc = {"system": name, "seed": cfg.seed, "params": cfg.params.to_dict(), "plan": pl.to_dict()}
    print(json.dumps(doc, indent=2))
    return EXIT_OK


def cmd_certify(args) -> int:
    cfg = _run_config(args)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    system = cfg.open_system()
    try:
        t0 = time.perf_counter()
        cert = certify(system, cfg.params, cfg.seed, cfg.workers)
        wall = time.perf_counter() - t0
    finally:
        if isinstance(system, PluginSystem):
            system.close()
    path = out / f"{cert.system['name']}-{cert.method.value}-seed{cert.seed}.json"
    cert.save(path)
    p = cert.plan
    size = f"N={p['N']}" if p["M"] == 1 and cert.method.value.startswith("RBC1") else f"(N,M)=({p['N']},{p['M']})"
    mark = "✓" if cert.accepted else "✗"
    if cert.method.is_rbc:
        opt = f"xi*={cert.xi_star:.4g}"
    else:
        opt = f"J*={cert.J_star:.4f} lambda*={cert.lambda_star:.4f}" + (" vacuous" if cert.vacuous else "")
    print(f"{cert.method.value} {cert.system['name']} {size} {opt} {mark} {wall:.2f}s seed={cert.seed} -> {path}")
    return EXIT_OK if cert.accepted else EXIT_REJECT


def _system_for(cert: Certificate, plugin_override, timeout):
    sysd = cert.system
    cmd = plugin_override or (sysd.get("plugin") if sysd.get("source") == "plugin" else None)
    if cmd:
        return PluginSystem(cmd, timeout=timeout, name=sysd.get("name"))
    return builtin(sysd["name"])


def cmd_validate(args) -> int:
    cert = Certificate.load(args.certificate, verify=False)
    system = _system_for(cert, args.plugin, args.timeout)
    try:
        report = validate_certificate(cert, system, seed=None if args.seed is None else int(args.seed, 0),
                                      n_states=args.n_states, n_mc=args.n_mc)
    finally:
        if isinstance(system, PluginSystem):
            system.close()
    report["certificate"] = str(args.certificate)
    text = json.dumps(report, indent=2)
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        (Path(args.out) / (Path(args.certificate).stem + "-report.json")).write_text(text + "\n")
    print(text)
    return EXIT_OK if report["passed"] else EXIT_FAIL


def cmd_grid(args) -> int:
    cert = Certificate.load(args.certificate)
    grid = contour_grid(cert, args.resolution, parse_slice(args.slice))
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    path = grid.write_csv(out / (Path(args.certificate).stem + f"-grid{args.resolution}.csv"))
    inside = grid.bound[grid.in_safe_set]
    rng = f"bound in [{inside.min():.4f}, {inside.max():.4f}]" if inside.size else "no grid point in X"
    print(f"{len(grid.bound)} rows, {int(grid.in_safe_set.sum())} in X, {rng} -> {path}")
    return EXIT_OK


def cmd_presets(args) -> int:
    print("\n".join(preset_names()))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="pacsafe", description="PAC one-step safety certification from samples.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("plan", help="print sample sizes and the guarantee")
    _add_run_options(p)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("certify", help="sample, solve and write a certificate")
    _add_run_options(p)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("validate", help="Monte Carlo check of a certificate")
    p.add_argument("certificate")
    p.add_argument("--plugin", metavar="CMDLINE", help="override the simulator command")
    p.add_argument("--timeout", type=float, default=DEFAULT_TIMEOUT)
    p.add_argument("--seed", metavar="U64", help="validation seed (default: certificate seed)")
    p.add_argument("--n-states", type=int, help="states to test (10000 robust, 1000 stochastic)")
    p.add_argument("--n-mc", type=int, default=1000, help="successors per state")
    p.add_argument("--out", metavar="DIR")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("grid", help="CSV grid of the SBC3 probability bound")
    p.add_argument("certificate")
    p.add_argument("--resolution", type=int, default=200)
    p.add_argument("--slice", metavar="j=v,...", help="fix coordinates (1-based) beyond two")
    p.add_argument("--out", metavar="DIR")
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("presets", help="list preset names")
    p.set_defaults(func=cmd_presets)
    return ap


def main(argv=None) -> int:
    level = os.environ.get("PAC_CERT_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except PacSafeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
