"""Scenario configuration: JSON in, validated objects out.

Complex numbers may be written as ``{"re": x, "im": y}``, as ``[x, y]``,
as a plain real number, or as sibling keys ``<name>_re`` / ``<name>_im``.
Every failure raises :class:`ConfigError` carrying the dotted field path.
"""
import json
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from . import broadening
from .closedforms import DressedPeriodicParams, TwoSolitonParams
from .darboux import DressingChain, DressingStep
from .errors import ConfigError, MBDError
from .model import DetuningModel, Grid2D
from .perturbation import ContourSpec
from .seeds import PeriodicPumpSeed, PopulationsSeed, ZeroSeed

CHECKS = ("mb", "pure", "zcr", "conservation", "linearized")
DEFAULT_TOL = {"mb": 1e-5, "pure": 1e-5, "zcr": 1e-5, "conservation": 1e-9,
               "linearized": 5e-6}


def _real(v, path):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(path, f"expected a real number, got {v!r}")
    if not math.isfinite(v):
        raise ConfigError(path, "must be finite")
    return float(v)


def _int(v, path):
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(path, f"expected an integer, got {v!r}")
    return v


def parse_complex(v, path):
    if isinstance(v, dict):
        extra = set(v) - {"re", "im"}
        if extra:
            raise ConfigError(path, f"unexpected keys {sorted(extra)}")
        return complex(_real(v.get("re", 0.0), path + ".re"), _real(v.get("im", 0.0), path + ".im"))
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ConfigError(path, "complex pair must have two entries")
        return complex(_real(v[0], path + "[0]"), _real(v[1], path + "[1]"))
    return complex(_real(v, path))


def complex_field(obj, key, path, default=None):
    """Read ``obj[key]`` as complex, also accepting ``key_re`` / ``key_im``."""
    if key in obj:
        return parse_complex(obj[key], f"{path}.{key}")
    if f"{key}_re" in obj or f"{key}_im" in obj:
        return complex(_real(obj.get(f"{key}_re", 0.0), f"{path}.{key}_re"),
                       _real(obj.get(f"{key}_im", 0.0), f"{path}.{key}_im"))
    if default is None:
        raise ConfigError(f"{path}.{key}", "missing")
    return default


def _triple(v, path):
    if not isinstance(v, list) or len(v) != 3:
        raise ConfigError(path, "expected a list of three complex constants")
    return tuple(parse_complex(c, f"{path}[{i}]") for i, c in enumerate(v))


def _section(cfg, key, path="", required=True):
    v = cfg.get(key)
    if v is None:
        if required:
            raise ConfigError(f"{path}{key}", "missing")
        return None
    if not isinstance(v, dict):
        raise ConfigError(f"{path}{key}", "expected an object")
    return v


@dataclass
class Scenario:
    detuning: DetuningModel
    chain: DressingChain
    grid: Grid2D
    h: float = 1e-3
    order: int = 2
    checks: List[str] = field(default_factory=list)
    tolerances: Dict[str, float] = field(default_factory=dict)
    per_node: bool = True
    corrupt: Optional[Dict[str, float]] = None
    closed_form: Optional[Dict[str, Any]] = None
    perturbation: Optional[Dict[str, Any]] = None


def parse_detuning(cfg):
    sec = _section(cfg, "detuning", required=False) or {}
    shift = _real(sec.get("resonance_shift", 0.0), "detuning.resonance_shift")
    bcfg = sec.get("broadening", {"kind": "sharp"})
    if not isinstance(bcfg, dict):
        raise ConfigError("detuning.broadening", "expected an object")
    try:
        model = broadening.from_config(bcfg)
        model.materialize()
    except (KeyError, TypeError) as exc:
        raise ConfigError("detuning.broadening", f"missing or invalid parameter {exc}") from None
    except (ValueError, MBDError) as exc:
        raise ConfigError("detuning.broadening", str(exc)) from None
    return DetuningModel(shift, model)


def parse_seed(cfg, det):
    sec = _section(cfg, "seed")
    kind = sec.get("kind")
    try:
        if kind == "zero":
            return ZeroSeed(detuning=det)
        if kind == "populations":
            return PopulationsSeed(n_am=_real(sec.get("n_am"), "seed.n_am"),
                                   n_ap=_real(sec.get("n_ap"), "seed.n_ap"),
                                   n_b=_real(sec.get("n_b"), "seed.n_b"), detuning=det)
        if kind == "periodic":
            return PeriodicPumpSeed(E=complex_field(sec, "E", "seed"),
                                    branch=_int(sec.get("branch", 1), "seed.branch"),
                                    detuning=det)
    except ConfigError:
        raise
    except (ValueError, MBDError) as exc:
        raise ConfigError("seed", str(exc)) from None
    raise ConfigError("seed.kind", f"expected zero|populations|periodic, got {kind!r}")


def parse_chain(cfg):
    key = "steps" if "steps" in cfg and "chain" not in cfg else "chain"
    raw = cfg.get(key, [])
    if not isinstance(raw, list):
        raise ConfigError(key, "expected a list of steps")
    steps = []
    for i, st in enumerate(raw):
        p = f"{key}[{i}]"
        if not isinstance(st, dict):
            raise ConfigError(p, "expected an object")
        mu = complex_field(st, "mu", p)
        ckey = "C" if "C" in st and "constants" not in st else "constants"
        C = _triple(st.get(ckey), f"{p}.{ckey}")
        has_nu = any(k in st for k in ("nu", "nu_re", "nu_im"))
        nu = complex_field(st, "nu", p) if has_nu else None
        left = _triple(st["left_constants"], p + ".left_constants") if "left_constants" in st else None
        try:
            steps.append(DressingStep(mu, C, nu, left))
        except (ValueError, MBDError) as exc:
            raise ConfigError(p, str(exc)) from None
    return steps


def parse_grid(cfg):
    sec = _section(cfg, "grid")
    try:
        return Grid2D(_real(sec.get("tau_min"), "grid.tau_min"), _real(sec.get("tau_max"), "grid.tau_max"),
                      _int(sec.get("n_tau"), "grid.n_tau"),
                      _real(sec.get("zeta_min"), "grid.zeta_min"), _real(sec.get("zeta_max"), "grid.zeta_max"),
                      _int(sec.get("n_zeta"), "grid.n_zeta"))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("grid", str(exc)) from None


def parse_closed_form(sec, det):
    family = sec.get("family")
    mode = sec.get("mode", "corrected")
    if mode not in ("corrected", "literal"):
        raise ConfigError("closed_form.mode", "expected corrected|literal")
    p = _section(sec, "params", "closed_form.")
    path = "closed_form.params"
    try:
        if family == "two_soliton":
            vals = {k: complex_field(p, k, path) for k in ("mu", "a1", "a2", "b1", "b2", "c1", "c2")}
            params = TwoSolitonParams(**vals)
        elif family == "dressed_periodic":
            params = DressedPeriodicParams(
                complex_field(p, "E", path), complex_field(p, "gamma", path),
                complex_field(p, "C1", path), complex_field(p, "C_plus", path),
                complex_field(p, "C_minus", path), _int(p.get("branch", 1), path + ".branch"))
        else:
            raise ConfigError("closed_form.family", f"expected two_soliton|dressed_periodic, got {family!r}")
    except ConfigError:
        raise
    except (ValueError, MBDError) as exc:
        raise ConfigError(path, str(exc)) from None
    return {"family": family, "mode": mode, "params": params}


def parse_perturbation(sec):
    path = "perturbation"
    raw = sec.get("terms", [])
    if not isinstance(raw, list):
        raise ConfigError(path + ".terms", "expected a list")
    terms = []
    for i, t in enumerate(raw):
        p = f"{path}.terms[{i}]"
        if not isinstance(t, dict):
            raise ConfigError(p, "expected an object")
        terms.append((complex_field(t, "mu", p), complex_field(t, "beta", p, default=1 + 0j),
                      _triple(t.get("right"), p + ".right"), _triple(t.get("left"), p + ".left")))
    out = {"contour": None, "convergence": None}
    if terms:
        try:
            out["contour"] = ContourSpec(tuple(terms), bool(sec.get("hermitian_pairing", False)))
        except ValueError as exc:
            raise ConfigError(path, str(exc)) from None
    conv = sec.get("convergence")
    if conv is not None:
        p = path + ".convergence"
        deltas = conv.get("deltas")
        if not isinstance(deltas, list) or not deltas:
            raise ConfigError(p + ".deltas", "expected a nonempty list")
        ds = [_real(d, f"{p}.deltas[{i}]") for i, d in enumerate(deltas)]
        if any(d <= 0 for d in ds):
            raise ConfigError(p + ".deltas", "deltas must be positive")
        out["convergence"] = {
            "mu": complex_field(conv, "mu", p),
            "right": _triple(conv.get("right"), p + ".right"),
            "left": _triple(conv.get("left"), p + ".left"),
            "deltas": ds,
            "direction": complex_field(conv, "direction", p, default=1 + 0j),
            "grid": parse_grid(conv) if "grid" in conv else None,
        }
    if out["contour"] is None and out["convergence"] is None:
        raise ConfigError(path, "needs terms and/or convergence")
    return out


def parse_scenario(cfg):
    if not isinstance(cfg, dict):
        raise ConfigError("$", "config must be a JSON object")
    det = parse_detuning(cfg)
    seed = parse_seed(cfg, det)
    steps = parse_chain(cfg)
    try:
        chain = DressingChain(seed, tuple(steps))
    except (ValueError, MBDError) as exc:
        raise ConfigError("chain", str(exc)) from None
    grid = parse_grid(cfg)
    ver = _section(cfg, "verify", required=False) or {}
    h = _real(ver.get("h", 1e-3), "verify.h")
    if h <= 0:
        raise ConfigError("verify.h", "must be positive")
    order = _int(ver.get("order", 2), "verify.order")
    if order not in (2, 4):
        raise ConfigError("verify.order", "must be 2 or 4")
    checks = ver.get("checks", ["mb", "conservation"])
    if not isinstance(checks, list) or any(c not in CHECKS for c in checks):
        raise ConfigError("verify.checks", f"entries must be among {list(CHECKS)}")
    tol = dict(DEFAULT_TOL)
    for k, v in (ver.get("tolerances") or {}).items():
        if k not in DEFAULT_TOL:
            raise ConfigError(f"verify.tolerances.{k}", "unknown check")
        tol[k] = _real(v, f"verify.tolerances.{k}")
    out = _section(cfg, "output", required=False) or {}
    corrupt = _section(cfg, "corrupt", required=False)
    if corrupt is not None:
        corrupt = {k: _real(corrupt.get(k, 1.0), f"corrupt.{k}")
                   for k in ("e_minus_scale", "e_plus_scale")}
    cf = _section(cfg, "closed_form", required=False)
    pert = _section(cfg, "perturbation", required=False)
    if "linearized" in checks and pert is None:
        raise ConfigError("verify.checks", "'linearized' needs a perturbation section")
    return Scenario(
        detuning=det, chain=chain, grid=grid, h=h, order=order, checks=list(checks),
        tolerances=tol, per_node=bool(out.get("per_node", True)), corrupt=corrupt,
        closed_form=parse_closed_form(cf, det) if cf is not None else None,
        perturbation=parse_perturbation(pert) if pert is not None else None)


def load(path):
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError("$", f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("$", f"invalid JSON: {exc}") from None
    return parse_scenario(cfg)
