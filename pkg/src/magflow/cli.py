"""Command-line runner: assemble a system from a config file, execute
verification batteries and spectrum/deformation experiments, and emit
deterministic JSON/CSV reports.

Exit codes: 0 all selected assertions pass, 1 an assertion failed
(reports are still written), 2 usage/config/precondition error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import __version__, config as cfgmod, deform, identities, orbits
from .batteries import BATTERIES, run_battery
from .reports import ReportTable, fmt_float

__all__ = ["main"]


def _load_config(args, overrides=None):
    over = dict(overrides or {})
    if getattr(args, "backend", None):
        over["backend"] = args.backend
    if getattr(args, "kappa", None) is not None:
        over["kappa"] = args.kappa
    if getattr(args, "sigma", None) is not None:
        over["sigma"] = args.sigma
    if getattr(args, "seed", None) is not None:
        over["seed"] = args.seed
    if getattr(args, "output", None):
        over["output"] = args.output
    return cfgmod.load(getattr(args, "config", None), over)


def _emit(cfg, table: ReportTable, stem: str):
    table.meta.setdefault("config_hash", cfgmod.config_hash(cfg))
    table.meta.setdefault("version", __version__)
    table.print_lines()
    out = cfg.get("output")
    if out:
        os.makedirs(out, exist_ok=True)
        table.write_json(os.path.join(out, f"{stem}.json"))
        table.write_csv(os.path.join(out, f"{stem}.csv"))
        manifest = {"config": {k: v for k, v in cfg.items() if k != "output"},
                    "config_hash": cfgmod.config_hash(cfg),
                    "version": __version__}
        with open(os.path.join(out, "manifest.json"), "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True, default=str)
            fh.write("\n")
    return 0 if table.passed else 1


def _cmd_verify(args):
    over = {}
    if args.battery:
        over["batteries"] = list(args.battery)
    cfg = _load_config(args, over)
    system = cfgmod.build_system(cfg)
    rng = np.random.default_rng(cfg["seed"])
    table = ReportTable(meta={"command": "verify",
                              "batteries": list(cfg["batteries"]),
                              "backend": cfg["backend"],
                              "seed": cfg["seed"]})
    for name in cfg["batteries"]:
        table.extend(run_battery(name, system, cfg, rng))
    return _emit(cfg, table, "verify")


def _cmd_spectrum(args):
    over = {}
    if args.classes:
        over["classes"] = list(args.classes)
    cfg = _load_config(args, over)
    if not cfg["classes"]:
        raise cfgmod.ConfigError("spectrum needs at least one class "
                                 "(--classes or config 'classes')")
    system = cfgmod.build_system(cfg)
    labels = cfgmod.parse_classes(cfg["backend"], cfg["classes"])
    spectrum = orbits.marked_length_spectrum(system, labels)
    rows = [("class", "length")]
    failed = False
    for key, val in spectrum.items():
        if isinstance(val, str):
            rows.append((str(key), val))
            failed = True
        else:
            rows.append((str(key), fmt_float(val)))
    for r in rows:
        print(f"{r[0]}\t{r[1]}")
    out = cfg.get("output")
    if out:
        os.makedirs(out, exist_ok=True)
        with open(os.path.join(out, "spectrum.csv"), "w", newline="") as fh:
            csv.writer(fh).writerows(rows)
        manifest = {"config": {k: v for k, v in cfg.items() if k != "output"}, "config_hash": cfgmod.config_hash(cfg),
                    "version": __version__}
        with open(os.path.join(out, "manifest.json"), "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True, default=str)
            fh.write("\n")
    return 1 if failed else 0


def _build_family(cfg, system):
    fam = cfg["family"]
    kind = fam["kind"]
    if kind == "constant":
        return deform.constant_family(system, eps=fam["eps"])
    if kind == "kappa":
        return deform.kappa_family(system, float(fam["delta"]), eps=fam["eps"])
    if kind == "translation":
        if system.backend != "torus":
            raise cfgmod.ConfigError("translation families live on the torus")
        return deform.translation_family(system, fam["velocity"],
                                         eps=fam["eps"])
    if system.backend != "torus":
        raise cfgmod.ConfigError("conformal families live on the torus")
    phi = cfgmod._trig(fam.get("phi_cos"), None)
    return deform.conformal_torus_family(system.metric, phi,
                                         kappa=system.kappa, eps=fam["eps"])


def _cmd_deform(args):
    cfg = _load_config(args)
    system = cfgmod.build_system(cfg)
    family = _build_family(cfg, system)
    labels = cfgmod.parse_classes(cfg["backend"], cfg["classes"] or
                                  (["1"] if cfg["backend"] == "bolza"
                                   else ["1,0"]))
    table = ReportTable(meta={"command": "deform",
                              "family": cfg["family"]["kind"],
                              "backend": cfg["backend"]})
    table.meta["beta_modes"] = deform.beta(family).mode_numbers()
    for label in labels:
        orbit = orbits.find_periodic_orbit(system, label)
        table.add(deform.livsic_integral_check(family, orbit))
        if family.fixed_metric:
            vf = deform.variational_field(family, orbit, h_s=cfg["h_s"],
                                          n_samples=64)
            table.add(deform.jacobi_residual(system, orbit, vf))
    return _emit(cfg, table, "deform")


def _cmd_carleman_sweep(args):
    over = {}
    if args.sigma_grid:
        over["sigma_grid"] = [float(s) for s in args.sigma_grid]
    cfg = _load_config(args, over)
    system = cfgmod.build_system(cfg)
    rng = np.random.default_rng(cfg["seed"])
    from . import operators
    u = operators.random_function(system, rng, degree=cfg["degree"],
                                  n=cfg["n_grid"])
    table = ReportTable(meta={"command": "carleman-sweep",
                              "backend": cfg["backend"],
                              "seed": cfg["seed"]})
    for sigma in cfg["sigma_grid"]:
        rep = identities.carleman_estimate(system, u, float(sigma),
                                           N=cfg["tail_start"],
                                           quad=tuple(cfg["quad"]))
        rep.detail["sigma"] = float(sigma)
        table.add(rep)
    return _emit(cfg, table, "carleman_sweep")


def _cmd_list_batteries(args):
    width = max(len(n) for n in BATTERIES)
    for name in sorted(BATTERIES):
        desc = BATTERIES[name][0]
        print(f"{name:<{width}}  {desc}")
    return 0


def _cmd_print_config(args):
    cfg = _load_config(args)
    sys.stdout.write(cfgmod.dump(cfg))
    return 0


def _parser():
    p = argparse.ArgumentParser(
        prog="magflow",
        description="numerical laboratory for magnetic flows on surfaces")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="YAML config file")
        sp.add_argument("--backend", choices=("flat-torus", "torus", "bolza"))
        sp.add_argument("--kappa", type=float)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--output", help="report directory")

    sp = sub.add_parser("verify", help="run verification batteries")
    common(sp)
    sp.add_argument("--battery", action="append",
                    help="battery name (repeatable)")
    sp.add_argument("--sigma", type=float)
    sp.set_defaults(func=_cmd_verify)

    sp = sub.add_parser("spectrum", help="marked length spectrum table")
    common(sp)
    sp.add_argument("--classes", nargs="+",
                    help="class specs, e.g. 1,0 2,1 or g1..g8")
    sp.set_defaults(func=_cmd_spectrum)

    sp = sub.add_parser("deform", help="deformation-family checks")
    common(sp)
    sp.set_defaults(func=_cmd_deform)

    sp = sub.add_parser("carleman-sweep",
                        help="tail estimate across a sigma grid")
    common(sp)
    sp.add_argument("--sigma-grid", nargs="+")
    sp.set_defaults(func=_cmd_carleman_sweep)

    sp = sub.add_parser("list-batteries", help="enumerate known batteries")
    sp.set_defaults(func=_cmd_list_batteries)

    sp = sub.add_parser("print-config",
                        help="show the effective configuration")
    sp.add_argument("--config", help="YAML config file")
    sp.add_argument("--backend", choices=("flat-torus", "torus", "bolza"))
    sp.add_argument("--kappa", type=float)
    sp.add_argument("--seed", type=int)
    sp.set_defaults(func=_cmd_print_config)

    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return args.func(args)
    except (cfgmod.ConfigError, identities.PreconditionError,
            ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except orbits.OrbitError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
