"""Instance configuration files.

Flat INI-style text with sections ``[domain]``, ``[submanifold]``,
``[weight]``, ``[data]``, ``[solve]`` and ``[tolerances]``.  Complex numbers
are written as ``re,im`` pairs (a bare real is allowed); lists of complex
numbers are separated by ``;``.  Example::

    [domain]
    kind = polydisc
    n = 2

    [submanifold]
    kind = subspace
    codim = 1

    [data]
    f = 1,0; 1,0

    [solve]
    p = 1.5
    degree = 6
    order = 6
"""

from __future__ import annotations

import configparser
import hashlib
import json
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import ConfigurationError
from .function_space import (BasisSplit, FeasibleSet, HoloFunction, build_basis,
                             feasible_set, graded_lex, restrict)
from .geometry import (DomainSpec, QuadratureRule, SubmanifoldKind, SubmanifoldSpec,
                       WeightSpec, build_domain_quadrature, build_submanifold_quadrature,
                       eval_weight)
from .lp_solver import LpProblem
from .verifier import DEFAULT_TOLERANCES

__all__ = ["ConfigError", "InstanceConfig", "Instance", "parse_config", "load_config",
           "build_instance"]


class ConfigError(ConfigurationError):
    """Parse/validation failure; ``location`` names the line or field."""

    def __init__(self, message, location=None):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


@dataclass(frozen=True)
class InstanceConfig:
    domain: DomainSpec
    submanifold: SubmanifoldSpec
    weight: WeightSpec
    data: tuple
    p: float
    degree: int
    order: int
    extension: tuple | None = None
    eps: float = 1e-8
    seed: int = 0
    starts: int = 4
    max_iter: int = 10_000
    irls_eps0: float = 1e-2
    irls_factor: float = 4.0
    irls_max_iter: int = 200
    tolerances: dict = field(default_factory=dict)
    name: str = "instance"

    def to_dict(self):
        d = {
            "name": self.name,
            "domain": {"kind": self.domain.kind.value, "n": self.domain.n,
                       "radius": self.domain.radius},
            "submanifold": {"kind": self.submanifold.kind.value,
                            "codim": self.submanifold.codim},
            "weight": {"alpha": self.weight.alpha, "beta": list(self.weight.beta),
                       "c": self.weight.c},
            "data": [[z.real, z.imag] for z in self.data],
            "extension": (None if self.extension is None
                          else [[z.real, z.imag] for z in self.extension]),
            "p": self.p, "degree": self.degree, "order": self.order, "eps": self.eps,
            "seed": self.seed, "starts": self.starts, "max_iter": self.max_iter,
            "irls_eps0": self.irls_eps0, "irls_factor": self.irls_factor,
            "irls_max_iter": self.irls_max_iter,
            "tolerances": dict(sorted(self.tolerances.items())),
        }
        if self.submanifold.kind is SubmanifoldKind.POINT_SET:
            d["submanifold"]["points"] = [[[z.real, z.imag] for z in pt]
                                          for pt in self.submanifold.points]
        return d

    @classmethod
    def from_dict(cls, d):
        cx = lambda pairs: tuple(complex(a, b) for a, b in pairs)
        sub = d["submanifold"]
        if sub["kind"] == SubmanifoldKind.POINT_SET.value:
            pts = np.array([[complex(a, b) for a, b in pt] for pt in sub["points"]])
            submanifold = SubmanifoldSpec.point_set(pts)
        else:
            submanifold = SubmanifoldSpec.subspace(sub["codim"])
        return cls(
            domain=DomainSpec(d["domain"]["kind"], d["domain"]["n"], d["domain"]["radius"]),
            submanifold=submanifold,
            weight=WeightSpec(d["weight"]["alpha"], tuple(d["weight"]["beta"]), d["weight"]["c"]),
            data=cx(d["data"]),
            extension=None if d["extension"] is None else cx(d["extension"]),
            p=d["p"], degree=d["degree"], order=d["order"], eps=d["eps"], seed=d["seed"],
            starts=d["starts"], max_iter=d["max_iter"], irls_eps0=d["irls_eps0"],
            irls_factor=d["irls_factor"], irls_max_iter=d["irls_max_iter"],
            tolerances=dict(d["tolerances"]), name=d["name"])

    def fingerprint(self):
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def with_overrides(self, **kw):
        cfg = replace(self, **kw)
        _validate(cfg, {})
        return cfg


def _complex(text):
    parts = [t.strip() for t in text.split(",")]
    if len(parts) == 1:
        return complex(float(parts[0]), 0.0)
    if len(parts) == 2:
        return complex(float(parts[0]), float(parts[1]))
    raise ValueError(f"expected 're,im', got {text!r}")


def _complex_list(text):
    text = text.strip()
    if not text:
        return ()
    return tuple(_complex(t) for t in text.split(";"))


def _key_lines(text):
    """Map (section, key) -> line number, for field-level error messages."""
    where, section = {}, None
    for lineno, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        m = re.match(r"\[([^\]]+)\]", s)
        if m:
            section = m.group(1).strip().lower()
        elif section and "=" in s and not s.startswith(("#", ";")):
            where.setdefault((section, s.split("=", 1)[0].strip().lower()), lineno)
    return where


class _Reader:
    def __init__(self, cp, lines, source):
        self.cp, self.lines, self.source = cp, lines, source

    def loc(self, section, key):
        line = self.lines.get((section, key))
        at = f"{self.source}:{line}" if line else self.source
        return f"{at} [{section}] {key}"

    def get(self, section, key, conv, default=...):
        if not self.cp.has_option(section, key):
            if default is ...:
                raise ConfigError("required field is missing", f"{self.source} [{section}] {key}")
            return default
        raw = self.cp.get(section, key)
        try:
            return conv(raw)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"cannot parse {raw!r} ({exc})", self.loc(section, key)) from None


def _int(text):
    v = float(text)
    if v != int(v):
        raise ValueError("not an integer")
    return int(v)


def parse_config(text: str, source="<config>") -> InstanceConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    cp.optionxform = str.lower
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        raise ConfigError(str(exc).splitlines()[0],
                          f"{source}:{line}" if line else source) from None
    r = _Reader(cp, _key_lines(text), source)
    for section in ("domain", "submanifold", "solve"):
        if not cp.has_section(section):
            raise ConfigError("missing section", f"{source} [{section}]")

    def build(section, key, fn):
        try:
            return fn()
        except ConfigurationError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc), r.loc(section, key)) from None

    domain = build("domain", "kind", lambda: DomainSpec(
        r.get("domain", "kind", str.strip).lower(),
        r.get("domain", "n", _int, 1),
        r.get("domain", "radius", float, 1.0)))

    kind = r.get("submanifold", "kind", str.strip).lower()
    values = None
    if kind == SubmanifoldKind.POINT_SET.value:
        pts, values, i = [], [], 1
        while cp.has_option("submanifold", f"point{i}"):
            pts.append(r.get("submanifold", f"point{i}", _complex_list))
            values.append(r.get("submanifold", f"value{i}", _complex))
            i += 1
        if not pts:
            raise ConfigError("a point set needs point1/value1, point2/value2, ...",
                              f"{source} [submanifold]")
        if len({len(p) for p in pts}) != 1:
            raise ConfigError("points have different numbers of coordinates",
                              f"{source} [submanifold]")
        sub = build("submanifold", "point1", lambda: SubmanifoldSpec.point_set(np.array(pts)))
    elif kind == SubmanifoldKind.COORDINATE_SUBSPACE.value:
        sub = build("submanifold", "codim",
                    lambda: SubmanifoldSpec.subspace(r.get("submanifold", "codim", _int)))
    else:
        raise ConfigError(f"unknown submanifold kind {kind!r} (use 'subspace' or 'points')",
                          r.loc("submanifold", "kind"))
    build("submanifold", "kind", lambda: sub.validate(domain))

    beta = r.get("weight", "beta", lambda t: tuple(float(x) for x in t.replace(",", " ").split()),
                 ()) if cp.has_section("weight") else ()
    weight = build("weight", "alpha", lambda: WeightSpec(
        r.get("weight", "alpha", float, 0.0) if cp.has_section("weight") else 0.0,
        beta,
        r.get("weight", "c", float, 0.0) if cp.has_section("weight") else 0.0))
    if beta and len(beta) != domain.n:
        raise ConfigError(f"beta needs {domain.n} entries", r.loc("weight", "beta"))

    if values is None and not cp.has_section("data"):
        raise ConfigError("missing section", f"{source} [data]")
    extension = r.get("data", "extension", _complex_list, None)
    if values is not None:
        data = tuple(values)
    else:
        data = r.get("data", "f", _complex_list, None)

    tolerances = {}
    if cp.has_section("tolerances"):
        for key in cp.options("tolerances"):
            tolerances[key] = r.get("tolerances", key, float)

    g = lambda key, conv, default=...: r.get("solve", key, conv, default)
    cfg = InstanceConfig(
        domain=domain, submanifold=sub, weight=weight, data=data if data is not None else (),
        extension=extension, p=g("p", float), degree=g("degree", _int), order=g("order", _int),
        eps=g("eps", float, 1e-8), seed=g("seed", _int, 0), starts=g("starts", _int, 4),
        max_iter=g("max_iter", _int, 10_000), irls_eps0=g("irls_eps0", float, 1e-2),
        irls_factor=g("irls_factor", float, 4.0), irls_max_iter=g("irls_max_iter", _int, 200),
        tolerances=tolerances,
        name=cp.get("instance", "name", fallback=Path(source).stem if source else "instance"))
    if data is None and extension is None:
        raise ConfigError("give the data on S ('f') or a naive extension ('extension')",
                          f"{source} [data]")
    _validate(cfg, r)
    return cfg


def _validate(cfg: InstanceConfig, r):
    def loc(section, key):
        return r.loc(section, key) if isinstance(r, _Reader) else f"[{section}] {key}"

    if not (0 < cfg.p <= 2):
        raise ConfigError(f"p must lie in (0, 2], got {cfg.p}", loc("solve", "p"))
    if cfg.degree < 0:
        raise ConfigError("degree must be >= 0", loc("solve", "degree"))
    if cfg.order < 1:
        raise ConfigError("order must be >= 1", loc("solve", "order"))
    if not cfg.eps > 0:
        raise ConfigError("eps must be positive", loc("solve", "eps"))
    if cfg.starts < 1:
        raise ConfigError("starts must be >= 1", loc("solve", "starts"))
    for key, v in cfg.tolerances.items():
        if key != "default" and key not in DEFAULT_TOLERANCES:
            raise ConfigError(f"unknown check {key!r}", loc("tolerances", key))
        if v < 0:
            raise ConfigError("tolerances must be >= 0", loc("tolerances", key))


def load_config(path) -> InstanceConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config ({exc.strerror})", str(path)) from None
    return parse_config(text, source=str(path))


@dataclass(frozen=True, eq=False)
class Instance:
    """A configuration turned into solver-ready objects."""

    config: InstanceConfig
    basis: tuple
    split: BasisSplit
    feasible: FeasibleSet
    quad: QuadratureRule
    sub_quad: QuadratureRule
    problem: LpProblem
    naive: HoloFunction

    @property
    def domain(self):
        return self.config.domain

    @property
    def submanifold(self):
        return self.config.submanifold

    def data_on_s(self):
        """Values of the data f at the nodes of the S rule."""
        sub = self.config.submanifold
        if sub.kind is SubmanifoldKind.POINT_SET:
            return np.asarray(self.feasible.data)
        f = self.feasible.data
        return f(self.sub_quad.nodes[:, : f.n]) if f.n else np.full(
            self.sub_quad.size, f.coeffs[0])


def build_instance(cfg: InstanceConfig, p=None, degree=None) -> Instance:
    """Assemble basis, feasible set, quadratures and the p-energy problem."""
    if p is not None or degree is not None:
        cfg = cfg.with_overrides(p=cfg.p if p is None else p,
                                 degree=cfg.degree if degree is None else degree)
    dom, sub, D = cfg.domain, cfg.submanifold, cfg.degree
    basis, split = build_basis(dom.n, D, sub)
    naive = None
    if cfg.extension is not None:
        if len(cfg.extension) > len(basis):
            raise ConfigError(f"extension has {len(cfg.extension)} coefficients, "
                              f"basis of degree {D} has {len(basis)}", "[data] extension")
        c = np.zeros(len(basis), dtype=complex)
        c[: len(cfg.extension)] = cfg.extension
        naive = HoloFunction(basis, c)

    if sub.kind is SubmanifoldKind.POINT_SET:
        data = np.asarray(cfg.data if cfg.data else restrict(naive, sub))
        if len(data) != len(sub.points):
            raise ConfigError(f"{len(data)} values for {len(sub.points)} points", "[data]")
    else:
        sbasis = graded_lex(dom.n - sub.codim, D)
        if cfg.data:
            if len(cfg.data) > len(sbasis):
                raise ConfigError(f"f has {len(cfg.data)} coefficients, the S basis of "
                                  f"degree {D} has {len(sbasis)}", "[data] f")
            c = np.zeros(len(sbasis), dtype=complex)
            c[: len(cfg.data)] = cfg.data
            data = HoloFunction(sbasis, c)
        else:
            data = restrict(naive, sub)
        if naive is not None:
            r = restrict(naive, sub)
            if not np.allclose(r.coeffs, data.coeffs, rtol=0, atol=1e-12):
                raise ConfigError("extension does not restrict to f", "[data] extension")

    fs = feasible_set(basis, split, sub, data)
    if naive is None:
        naive = HoloFunction(basis, fs.particular)
    quad = build_domain_quadrature(dom, cfg.order)
    sub_quad = build_submanifold_quadrature(dom, sub, cfg.order)
    prob = LpProblem(cfg.p, fs, quad, eval_weight(cfg.weight, quad.nodes), cfg.eps)
    return Instance(cfg, basis, split, fs, quad, sub_quad, prob, naive)
