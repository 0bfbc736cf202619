"""Experiment configuration: YAML schema, defaults, validation, and
system assembly for the command-line runner.

A config is a plain dict.  ``load`` merges user values over the explicit
defaults and validates ranges; ``build_system`` turns the backend/kappa
spec into a MagneticSystem; ``config_hash`` fingerprints the effective
config for the run manifest.
"""

from __future__ import annotations

import copy
import hashlib
import json

import yaml

from .surfaces import (
    BumpField,
    ConformalTorusMetric,
    HyperbolicOctagonSurface,
    MagneticSystem,
    TrigField,
)

__all__ = ["ConfigError", "DEFAULTS", "load", "merge", "validate",
           "build_system", "config_hash", "dump", "parse_classes"]


class ConfigError(ValueError):
    """Schema or range violation; the CLI maps this to exit code 2."""


DEFAULTS = {
    "backend": "flat-torus",      # flat-torus | torus | bolza
    "lambda_cos": {},             # {"m,n": amplitude} conformal factor
    "lambda_sin": {},
    "kappa": 0.0,                 # constant part of the intensity
    "kappa_cos": {},              # torus: trig terms added to the constant
    "kappa_sin": {},
    "kappa_atoms": [],            # bolza: [[re, im, rho, weight], ...]
    "batteries": ["structural"],
    "n_grid": 32,                 # torus fiber/grid resolution
    "quad": [20, 20],             # hyperbolic quadrature (n_theta per cell)
    "n_functions": 10,
    "degree": 3,
    "seed": 0,
    "sigma": 1.0,
    "sigma_grid": [0.1, 1.0, 3.0],
    "tail_start": 2,
    "k_max": 64,
    "classes": [],
    "h_s": 1.0e-3,
    "family": {"kind": "kappa", "delta": 1.0, "velocity": [0.7, 0.4],
               "phi_cos": {}, "eps": 0.5},
    "output": None,
}

_BACKENDS = ("flat-torus", "torus", "bolza")
_FAMILY_KINDS = ("constant", "kappa", "conformal", "translation")


def merge(base, override):
    out = copy.deepcopy(base)
    for k, v in (override or {}).items():
        if k not in out:
            raise ConfigError(f"unknown config key {k!r}")
        if isinstance(out[k], dict) and isinstance(v, dict) and k == "family":
            out[k].update(v)
        else:
            out[k] = v
    return out


def load(path=None, overrides=None):
    cfg = copy.deepcopy(DEFAULTS)
    if path is not None:
        with open(path) as fh:
            user = yaml.safe_load(fh) or {}
        if not isinstance(user, dict):
            raise ConfigError(f"config root in {path} must be a mapping")
        cfg = merge(cfg, user)
    cfg = merge(cfg, overrides)
    validate(cfg)
    return cfg


def validate(cfg):
    if cfg["backend"] not in _BACKENDS:
        raise ConfigError(f"backend must be one of {_BACKENDS}, "
                          f"got {cfg['backend']!r}")
    if not isinstance(cfg["seed"], int):
        raise ConfigError("seed must be an integer (mandatory for "
                          "randomized batteries)")
    for key in ("n_grid", "n_functions", "degree", "k_max"):
        if not (isinstance(cfg[key], int) and cfg[key] > 0):
            raise ConfigError(f"{key} must be a positive integer")
    if cfg["tail_start"] < 2:
        raise ConfigError("tail_start must be >= 2")
    if not (isinstance(cfg["quad"], (list, tuple)) and len(cfg["quad"]) == 2
            and all(isinstance(q, int) and q >= 4 for q in cfg["quad"])):
        raise ConfigError("quad must be two integers >= 4")
    if float(cfg["sigma"]) <= 0.0:
        raise ConfigError("sigma must be strictly positive: the weight "
                          "recurrences need e^sigma > 1")
    for s in cfg["sigma_grid"]:
        if float(s) <= 0.0:
            raise ConfigError("sigma_grid entries must be strictly positive")
    if not (0.0 < float(cfg["h_s"]) < 0.1):
        raise ConfigError("h_s must lie in (0, 0.1)")
    fam = cfg["family"]
    if fam["kind"] not in _FAMILY_KINDS:
        raise ConfigError(f"family.kind must be one of {_FAMILY_KINDS}")
    for name in cfg["batteries"]:
        from .batteries import BATTERIES
        if name not in BATTERIES:
            raise ConfigError(f"unknown battery {name!r}; known: "
                              f"{', '.join(sorted(BATTERIES))}")


def _trig(cos_terms, sin_terms, constant=0.0):
    def keyed(d):
        out = {}
        for k, v in (d or {}).items():
            m, n = (int(t) for t in str(k).split(","))
            out[(m, n)] = float(v)
        return out

    f = TrigField.constant(float(constant))
    if cos_terms:
        f = f + TrigField.from_cos(keyed(cos_terms))
    if sin_terms:
        f = f + TrigField.from_sin(keyed(sin_terms))
    return f


def build_system(cfg) -> MagneticSystem:
    if cfg["backend"] == "bolza":
        surface = HyperbolicOctagonSurface()
        atoms = [(complex(float(a[0]), float(a[1])), float(a[2]), float(a[3]))
                 for a in cfg["kappa_atoms"]]
        return MagneticSystem(surface,
                              BumpField(surface, float(cfg["kappa"]), atoms))
    lam = (TrigField.zero() if cfg["backend"] == "flat-torus"
           else _trig(cfg["lambda_cos"], cfg["lambda_sin"]))
    kap = _trig(cfg["kappa_cos"], cfg["kappa_sin"], cfg["kappa"])
    return MagneticSystem(ConformalTorusMetric(lam), kap)


def parse_classes(backend, tokens):
    """Class specs: torus 'm,n' pairs; octagon words as signed generator
    strings like '1,-2,3', plus the shorthand 'g1..g8' for the eight
    single-generator classes."""
    out = []
    for tok in tokens:
        tok = str(tok).strip()
        if tok == "g1..g8":
            if backend != "bolza":
                raise ConfigError("'g1..g8' is an octagon class shorthand")
            out.extend([(g,) for g in (1, 2, 3, 4)]
                       + [(-g,) for g in (1, 2, 3, 4)])
            continue
        try:
            parts = tuple(int(p) for p in tok.replace(":", ",").split(","))
        except ValueError:
            raise ConfigError(f"cannot parse class spec {tok!r}")
        if backend != "bolza" and len(parts) != 2:
            raise ConfigError(f"torus classes are integer pairs, got {tok!r}")
        out.append(parts)
    return out


def dump(cfg) -> str:
    return yaml.safe_dump(cfg, sort_keys=True, default_flow_style=False)


def config_hash(cfg) -> str:
    # the output location is not part of the experiment identity
    canon = json.dumps({k: v for k, v in cfg.items() if k != "output"},
                       sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canon.encode()).hexdigest()
