"""Flat INI-style run configuration.

Sections and keys:

    [function]   m, t, g (complex coefficient list, ascending), genus,
                 modulus_floor, zeros (modulus rule), zeros_phase,
                 zeros_explicit (complex list)
    [verify]     truncation, quadrature, radius
    [certify]    theorem, k, p, strategy, series_tol, g_bounds,
                 prefix_count, floor_shift, clearance
    [output]     path

Sequence rules are strings: "linear", "const:c", "power:c,s", "exp:c,b",
"prefix:[v1,v2,...];tail".  Numbers may be integers, floats, or exact
fractions "a/b"; complex values use "re", "re+imi" or "imi" forms.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field
from fractions import Fraction

from .model import (
    Constant,
    Exponential,
    ExplicitPrefix,
    ExplicitZeros,
    FunctionFamily,
    Linear,
    Power,
    RuleZeros,
    SequenceRule,
    ZeroSpec,
)

__all__ = [
    "ConfigError",
    "RunConfig",
    "parse_rule_text",
    "rule_to_text",
    "zeros_to_text",
    "parse_config",
    "render_config",
    "load_config",
]

_CHECKS = ("deriv1", "deriv1-scaled", "min-scale", "deriv2", "deriv-k")


class ConfigError(ValueError):
    """Parse failure with the offending section/key in the message."""

    def __init__(self, where: str, message: str):
        super().__init__(f"[{where}] {message}")
        self.where = where


def _number(tok: str) -> float:
    tok = tok.strip()
    if "/" in tok:
        return float(Fraction(tok))
    return float(tok)


def _int(tok: str) -> int:
    return int(tok.strip())


def _num_auto(tok: str):
    """Integer when it looks like one, else float (keeps rule params exact)."""
    tok = tok.strip()
    try:
        return int(tok)
    except ValueError:
        return _number(tok)


def _complex(tok: str) -> complex:
    tok = tok.strip().replace(" ", "")
    if tok.endswith("i"):
        return complex(tok[:-1] + "j")
    if "/" in tok:
        return complex(float(Fraction(tok)))
    return complex(float(tok))


def _complex_list(text: str) -> tuple:
    text = text.strip()
    if not text:
        return ()
    return tuple(_complex(tok) for tok in text.split(","))


def _fmt_number(x) -> str:
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float) and x.is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def _fmt_complex(c: complex) -> str:
    if c.imag == 0:
        return _fmt_number(c.real)
    sign = "+" if c.imag >= 0 else "-"
    return f"{_fmt_number(c.real)}{sign}{_fmt_number(abs(c.imag))}i"


# ---------------------------------------------------------------------------
# Sequence rule grammar
# ---------------------------------------------------------------------------

def parse_rule_text(text: str) -> SequenceRule:
    text = text.strip()
    if text == "linear":
        return Linear()
    if text.startswith("const:"):
        return Constant(_num_auto(text[len("const:"):]))
    if text.startswith("power:"):
        parts = text[len("power:"):].split(",")
        if len(parts) != 2:
            raise ValueError(f"power rule needs two parameters, got {text!r}")
        return Power(_num_auto(parts[0]), _num_auto(parts[1]))
    if text.startswith("exp:"):
        parts = text[len("exp:"):].split(",")
        if len(parts) != 2:
            raise ValueError(f"exp rule needs two parameters, got {text!r}")
        return Exponential(_num_auto(parts[0]), _num_auto(parts[1]))
    if text.startswith("prefix:"):
        body = text[len("prefix:"):]
        if not body.startswith("["):
            raise ValueError(f"prefix rule needs [values];tail, got {text!r}")
        close = body.index("]")
        values = tuple(_num_auto(v) for v in body[1:close].split(",") if v.strip())
        rest = body[close + 1:]
        if not rest.startswith(";"):
            raise ValueError(f"prefix rule needs ';tail' after the list, got {text!r}")
        return ExplicitPrefix(values, parse_rule_text(rest[1:]))
    raise ValueError(f"unknown sequence rule {text!r}")


def rule_to_text(rule: SequenceRule) -> str:
    if isinstance(rule, Linear):
        return "linear"
    if isinstance(rule, Constant):
        return f"const:{_fmt_number(rule.c)}"
    if isinstance(rule, Power):
        return f"power:{_fmt_number(rule.c)},{_fmt_number(rule.s)}"
    if isinstance(rule, Exponential):
        return f"exp:{_fmt_number(rule.c)},{_fmt_number(rule.b)}"
    if isinstance(rule, ExplicitPrefix):
        vals = ",".join(_fmt_number(v) for v in rule.values)
        return f"prefix:[{vals}];{rule_to_text(rule.tail)}"
    raise TypeError(f"cannot render rule {type(rule).__name__}")


def zeros_to_text(spec: ZeroSpec) -> str:
    if isinstance(spec, ExplicitZeros):
        return "explicit:[" + ",".join(_fmt_complex(v) for v in spec.values) + "]"
    if isinstance(spec, RuleZeros):
        return f"rule:{rule_to_text(spec.modulus)};phase:{rule_to_text(spec.phase)}"
    raise TypeError(f"cannot render zero spec {type(spec).__name__}")


# ---------------------------------------------------------------------------
# RunConfig
# ---------------------------------------------------------------------------

@dataclass
class RunConfig:
    family: FunctionFamily
    t: float
    truncation: int = 200
    quadrature: int = 4096
    radius: float | None = None
    theorem: str = "deriv1"
    k: int = 1
    p: int = 2
    strategy: str = "product"
    series_tol: float = 1e-8
    g_bounds: tuple = ()
    prefix_count: int | None = None
    floor_shift: float | None = None
    clearance: float | None = None
    output: str | None = None
    seed: int = 0

    def verify_radius(self) -> float:
        return self.t if self.radius is None else self.radius


def _get(section, key, where, conv, default=None, required=False):
    if key not in section:
        if required:
            raise ConfigError(f"{where}.{key}", "required key missing")
        return default
    raw = section[key]
    try:
        return conv(raw)
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"{where}.{key}", f"cannot parse {raw!r}: {exc}") from exc


def parse_config(text: str) -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError("config", str(exc)) from exc
    if "function" not in parser:
        raise ConfigError("function", "section missing")
    fn = parser["function"]

    m = _get(fn, "m", "function", _int, required=True)
    t = _get(fn, "t", "function", _number, required=True)
    g = _get(fn, "g", "function", _complex_list, default=())
    genus = _get(fn, "genus", "function", parse_rule_text, required=True)
    floor = _get(fn, "modulus_floor", "function", parse_rule_text, required=True)

    zeros: ZeroSpec | None = None
    if "zeros_explicit" in fn:
        zeros = ExplicitZeros(_complex_list(fn["zeros_explicit"]))
    elif "zeros" in fn:
        mod = _get(fn, "zeros", "function", parse_rule_text)
        phase = _get(fn, "zeros_phase", "function", parse_rule_text, default=Constant(0))
        zeros = RuleZeros(mod, phase)

    try:
        family = FunctionFamily(m=m, g_coeffs=g, genus=genus, modulus_floor=floor, zeros=zeros)
    except ValueError as exc:
        raise ConfigError("function", str(exc)) from exc

    cfg = RunConfig(family=family, t=t)

    if "verify" in parser:
        vf = parser["verify"]
        cfg.truncation = _get(vf, "truncation", "verify", _int, default=cfg.truncation)
        cfg.quadrature = _get(vf, "quadrature", "verify", _int, default=cfg.quadrature)
        cfg.radius = _get(vf, "radius", "verify", _number, default=None)
    if "certify" in parser:
        cf = parser["certify"]
        cfg.theorem = _get(cf, "theorem", "certify", str.strip, default=cfg.theorem)
        if cfg.theorem not in _CHECKS:
            raise ConfigError("certify.theorem", f"unknown checker {cfg.theorem!r}; pick one of {_CHECKS}")
        cfg.k = _get(cf, "k", "certify", _int, default=cfg.k)
        cfg.p = _get(cf, "p", "certify", _int, default=cfg.p)
        cfg.strategy = _get(cf, "strategy", "certify", str.strip, default=cfg.strategy)
        cfg.series_tol = _get(cf, "series_tol", "certify", _number, default=cfg.series_tol)
        raw_bounds = _get(cf, "g_bounds", "certify", _complex_list, default=())
        cfg.g_bounds = tuple(b.real for b in raw_bounds)
        cfg.prefix_count = _get(cf, "prefix_count", "certify", _int, default=None)
        cfg.floor_shift = _get(cf, "floor_shift", "certify", _number, default=None)
        cfg.clearance = _get(cf, "clearance", "certify", _number, default=None)
    if "output" in parser:
        cfg.output = _get(parser["output"], "path", "output", str.strip, default=None)
    return cfg


def render_config(cfg: RunConfig) -> str:
    parser = configparser.ConfigParser(interpolation=None)
    fam = cfg.family
    fn = {
        "m": str(fam.m),
        "t": repr(cfg.t),
        "g": ", ".join(_fmt_complex(c) for c in fam.g_coeffs),
        "genus": rule_to_text(fam.genus),
        "modulus_floor": rule_to_text(fam.modulus_floor),
    }
    if isinstance(fam.zeros, ExplicitZeros):
        fn["zeros_explicit"] = ", ".join(_fmt_complex(v) for v in fam.zeros.values)
    elif isinstance(fam.zeros, RuleZeros):
        fn["zeros"] = rule_to_text(fam.zeros.modulus)
        fn["zeros_phase"] = rule_to_text(fam.zeros.phase)
    parser["function"] = fn

    verify = {"truncation": str(cfg.truncation), "quadrature": str(cfg.quadrature)}
    if cfg.radius is not None:
        verify["radius"] = repr(cfg.radius)
    parser["verify"] = verify

    certify = {
        "theorem": cfg.theorem,
        "k": str(cfg.k),
        "p": str(cfg.p),
        "strategy": cfg.strategy,
        "series_tol": repr(cfg.series_tol),
    }
    if cfg.g_bounds:
        certify["g_bounds"] = ", ".join(repr(b) for b in cfg.g_bounds)
    if cfg.prefix_count is not None:
        certify["prefix_count"] = str(cfg.prefix_count)
    if cfg.floor_shift is not None:
        certify["floor_shift"] = repr(cfg.floor_shift)
    if cfg.clearance is not None:
        certify["clearance"] = repr(cfg.clearance)
    parser["certify"] = certify

    if cfg.output is not None:
        parser["output"] = {"path": cfg.output}

    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()


def load_config(path: str) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())
