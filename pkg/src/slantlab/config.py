"""Run configuration: TOML files describing charts and the checks to run.

Example::

    seed = 7
    format = "json"

    [checks]
    names = ["classification", "tensor_identities"]
    tolerances = { tensor_identities = 1e-8 }

    [[chart]]
    catalog = "slant_plane"
    args = { alpha = "pi/3" }
    resolution = 4

    [[chart]]
    name = "my_plane"
    params = ["x1", "x2"]
    components = ["x1", "x2", "0", "0"]
    domain = [[0, 1], [0, 1]]

    [ambient]
    dim = 4
    basis = "standard"      # or "rotated" with rotation = "<expression in y1..>"
"""
from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from . import catalog
from .ambient import ambient_variables, rotated_basis, standard_basis
from .errors import ConfigError, SlantLabError
from .exprmap import evaluate, parse
from .geometry import ImmersionChart

# arguments of catalog builders that are expressions rather than numbers
EXPRESSION_ARGS = {"f"}


@dataclass
class ChartSpec:
    name: str
    catalog: Optional[str] = None
    args: Dict = field(default_factory=dict)
    params: List[str] = field(default_factory=list)
    components: List[str] = field(default_factory=list)
    domain: List = field(default_factory=list)
    resolution: Optional[int] = None

    def build(self, ambient_dim=None, basis_spec=None):
        """The chart object (an ImmersionChart or a WarpedChart)."""
        if self.catalog:
            return catalog.build(self.catalog, **self.args)
        dim = ambient_dim if ambient_dim is not None else len(self.components)
        if dim % 4:
            raise ConfigError(f"chart {self.name!r}: ambient dimension {dim} is not a multiple of 4")
        basis = standard_basis(dim // 4)
        kind = (basis_spec or {}).get("basis", "standard")
        if kind == "rotated":
            rot = (basis_spec or {}).get("rotation")
            if rot is None:
                raise ConfigError("ambient.rotation is required for a rotated basis")
            basis = rotated_basis(basis, parse(str(rot), ambient_variables(dim)))
        elif kind != "standard":
            raise ConfigError(f"unknown basis kind {kind!r}")
        return ImmersionChart.from_strings(self.params, self.components, self.domain, basis, self.name)

    def tags(self):
        if self.catalog:
            return catalog.CATALOG[self.catalog].tags
        return ()


@dataclass
class RunConfig:
    charts: List[ChartSpec]
    checks: List[str]
    tolerances: Dict[str, float] = field(default_factory=dict)
    seed: int = 0
    ambient_dim: Optional[int] = None
    basis_spec: Dict = field(default_factory=dict)
    output: Optional[str] = None
    format: str = "json"
    source: str = ""


def _arg_value(key, value, where):
    if key in EXPRESSION_ARGS:
        return str(value)
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if isinstance(value, str):
        try:
            e = parse(value, [])
            return evaluate(e, [])
        except SlantLabError as exc:
            raise ConfigError(f"{where}: argument {key!r}: {exc}") from exc
    raise ConfigError(f"{where}: argument {key!r} must be a number or constant expression")


def parse_config(text, known_checks=None):
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config syntax error: {exc}") from exc
    known_checks = known_checks or ()
    amb = data.get("ambient", {})
    ambient_dim = amb.get("dim")
    if ambient_dim is not None and (not isinstance(ambient_dim, int) or ambient_dim <= 0 or ambient_dim % 4):
        raise ConfigError(f"ambient.dim must be a positive multiple of 4, got {ambient_dim!r}")
    raw = data.get("chart", [])
    if not isinstance(raw, list) or not raw:
        raise ConfigError("config must define at least one [[chart]] table")
    charts = []
    seen = set()
    for i, c in enumerate(raw):
        where = f"chart[{i}]"
        res = c.get("resolution")
        if res is not None and (not isinstance(res, int) or res < 2):
            raise ConfigError(f"{where}: grid resolution must be an integer >= 2, got {res!r}")
        if "catalog" in c:
            key = c["catalog"]
            if key not in catalog.CATALOG:
                raise ConfigError(f"{where}: unknown catalog chart {key!r}")
            args = {k: _arg_value(k, v, where) for k, v in c.get("args", {}).items()}
            spec = ChartSpec(c.get("name", key), key, args, resolution=res)
        else:
            for req in ("name", "params", "components", "domain"):
                if req not in c:
                    raise ConfigError(f"{where}: missing key {req!r}")
            spec = ChartSpec(c["name"], None, {}, list(c["params"]), [str(s) for s in c["components"]],
                             [tuple(d) for d in c["domain"]], res)
        if spec.name in seen:
            raise ConfigError(f"{where}: duplicate chart name {spec.name!r}")
        seen.add(spec.name)
        try:
            spec.build(ambient_dim, amb)
        except (SlantLabError, TypeError, ValueError) as exc:
            raise ConfigError(f"{where} ({spec.name}): {exc}") from exc
        charts.append(spec)
    chk = data.get("checks", {})
    names = list(chk.get("names", []))
    if not names:
        raise ConfigError("checks.names must list at least one check")
    for n in names:
        if known_checks and n not in known_checks:
            raise ConfigError(f"unknown check {n!r}")
    tols = {}
    for k, v in chk.get("tolerances", {}).items():
        if k not in names:
            raise ConfigError(f"tolerance given for unselected check {k!r}")
        tols[k] = float(v)
    seed = data.get("seed", 0)
    if not isinstance(seed, int) or seed < 0:
        raise ConfigError(f"seed must be a non-negative integer, got {seed!r}")
    fmt = data.get("format", "json")
    if fmt not in ("json", "text"):
        raise ConfigError(f"format must be json or text, got {fmt!r}")
    return RunConfig(charts, names, tols, seed, ambient_dim, dict(amb), data.get("output"), fmt, text)


def load_config(path, known_checks=None):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, known_checks)
