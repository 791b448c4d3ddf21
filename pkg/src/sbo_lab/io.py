"""Run configuration, CSV/JSON emission and the binary snapshot format.

Configs are YAML documents with the sections ``grid``, ``params``, ``init``,
``horizon``, ``controls``, ``diagnostics``, ``diff``, ``estimates``,
``rescale`` and a top-level ``seed``. Every section and key is optional and
unknown keys are errors. Validation collects all problems before failing.

Snapshot layout (little-endian): the 4 bytes ``SBO1``, u64 N, f64 L, f64 t,
N interleaved (Re u, Im u) f64 pairs, then N f64 values of v.
"""
from __future__ import annotations

import json
import math
import struct
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence

import numpy as np
import yaml

from .grid import make_grid
from .integrator import StepControls
from .model import FAMILIES, InitDataSpec, SboParams, SboState

MAGIC = b"SBO1"
_HEADER = struct.Struct("<4sQdd")


class ConfigError(ValueError):
    """Invalid configuration; ``errors`` lists ``(path, message)`` pairs."""

    def __init__(self, errors: Sequence[tuple[str, str]]):
        self.errors = list(errors)
        super().__init__("; ".join(f"{p}: {m}" for p, m in self.errors))


@dataclass(frozen=True)
class GridConfig:
    L: float = 100.0
    N: int = 512


@dataclass(frozen=True)
class HorizonConfig:
    T: float = 1.0
    auto: bool = False
    A_s: float = 64.0


@dataclass(frozen=True)
class DiagnosticsConfig:
    s: float = 1.0
    delta: float = 1.0
    eps: float = 0.01
    oversample: int = 4
    kappa: float = 1.0
    lipschitz_c: float = 1.0
    e1_abs_tol: float = 1e-10
    e2_rel_tol: float = 1e-8
    e34_rel_tol: float = 1e-6


@dataclass(frozen=True)
class DiffConfig:
    epsilon: float = 1e-6
    u0: InitDataSpec = field(default_factory=lambda: InitDataSpec("gaussian", amplitude=1.0, width=2.0))
    v0: InitDataSpec = field(default_factory=lambda: InitDataSpec("gaussian", amplitude=1.0, width=3.0))


@dataclass(frozen=True)
class EstimatesConfig:
    samples: int = 100


@dataclass(frozen=True)
class RescaleConfig:
    lambdas: tuple[float, ...] = tuple(2.0**-j for j in range(11))
    delta: float = 0.1


def _default_u0() -> InitDataSpec:
    return InitDataSpec("gaussian", amplitude=0.02, width=2.0, wavenumber=1.0)


def _default_v0() -> InitDataSpec:
    return InitDataSpec("gaussian", amplitude=0.02, width=3.0)


@dataclass(frozen=True)
class RunConfig:
    grid: GridConfig = field(default_factory=GridConfig)
    params: SboParams = field(default_factory=SboParams)
    u0: InitDataSpec = field(default_factory=_default_u0)
    v0: InitDataSpec = field(default_factory=_default_v0)
    horizon: HorizonConfig = field(default_factory=HorizonConfig)
    controls: StepControls = field(default_factory=lambda: StepControls(rel_tol=1e-8))
    diagnostics: DiagnosticsConfig = field(default_factory=DiagnosticsConfig)
    diff: DiffConfig = field(default_factory=DiffConfig)
    estimates: EstimatesConfig = field(default_factory=EstimatesConfig)
    rescale: RescaleConfig = field(default_factory=RescaleConfig)
    seed: int = 0

    def make_grid(self):
        return make_grid(self.grid.L, self.grid.N)


# ---------------------------------------------------------------------------
# Validation helpers


def _is_real(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


class _Collector:
    def __init__(self):
        self.errors: list[tuple[str, str]] = []

    def add(self, path: str, msg: str) -> None:
        self.errors.append((path, msg))

    def section(self, raw: Any, path: str) -> dict:
        if raw is None:
            return {}
        if not isinstance(raw, dict):
            self.add(path, "expected a mapping")
            return {}
        return raw

    def unknown(self, raw: dict, allowed: Iterable[str], path: str) -> None:
        allowed = set(allowed)
        for k in raw:
            if k not in allowed:
                self.add(f"{path}.{k}" if path else str(k), "unknown key")

    def real(self, raw: dict, key: str, default: float, path: str,
             check: Callable[[float], bool] | None = None, msg: str = "") -> float:
        if key not in raw:
            return default
        v = raw[key]
        p = f"{path}.{key}" if path else key
        if not _is_real(v):
            self.add(p, f"expected a number, got {type(v).__name__}")
            return default
        v = float(v)
        if not math.isfinite(v):
            self.add(p, "must be finite")
            return default
        if check is not None and not check(v):
            self.add(p, msg)
            return default
        return v

    def integer(self, raw: dict, key: str, default: int, path: str,
                check: Callable[[int], bool] | None = None, msg: str = "") -> int:
        if key not in raw:
            return default
        v = raw[key]
        p = f"{path}.{key}" if path else key
        if not _is_int(v):
            self.add(p, f"expected an integer, got {type(v).__name__}")
            return default
        if check is not None and not check(v):
            self.add(p, msg)
            return default
        return int(v)

    def boolean(self, raw: dict, key: str, default: bool, path: str) -> bool:
        if key not in raw:
            return default
        v = raw[key]
        if not isinstance(v, bool):
            self.add(f"{path}.{key}", f"expected true/false, got {type(v).__name__}")
            return default
        return v

    def string(self, raw: dict, key: str, default, path: str, choices=None):
        if key not in raw:
            return default
        v = raw[key]
        p = f"{path}.{key}"
        if not isinstance(v, str):
            self.add(p, f"expected a string, got {type(v).__name__}")
            return default
        if choices is not None and v not in choices:
            self.add(p, f"must be one of {', '.join(choices)}")
            return default
        return v


def _pos(x) -> bool:
    return x > 0


_INIT_REAL = ("amplitude", "width", "wavenumber", "center", "phase", "kmax", "power", "scale")


def _parse_init(c: _Collector, raw: Any, path: str, default: InitDataSpec) -> InitDataSpec:
    raw = c.section(raw, path)
    allowed = {f.name for f in fields(InitDataSpec)}
    c.unknown(raw, allowed, path)
    if not raw:
        return default
    base = InitDataSpec()
    kw: dict[str, Any] = {}
    kw["family"] = c.string(raw, "family", default.family, path, FAMILIES)
    for k in _INIT_REAL:
        kw[k] = c.real(raw, k, getattr(base, k), path)
    if kw["width"] <= 0:
        c.add(f"{path}.width", "must be positive")
        kw["width"] = base.width
    if kw["kmax"] <= 0:
        c.add(f"{path}.kmax", "must be positive")
        kw["kmax"] = base.kmax
    kw["seed"] = c.integer(raw, "seed", base.seed, path, lambda v: v >= 0, "must be non-negative")
    if "base_length" in raw and raw["base_length"] is not None:
        kw["base_length"] = c.real(raw, "base_length", None, path, _pos, "must be positive")
    kw["path"] = c.string(raw, "path", None, path)
    kw["component"] = c.string(raw, "component", "u", path, ("u", "v"))
    if kw["family"] == "file" and not kw["path"]:
        c.add(f"{path}.path", "required for the file family")
        kw["family"] = "gaussian"
    return InitDataSpec(**kw)


def parse_config(text: str) -> RunConfig:
    """Parse and validate YAML config text; raises :class:`ConfigError` listing every problem."""
    c = _Collector()
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError([("", f"not valid YAML: {exc}")]) from None
    raw = c.section(raw, "<root>")
    sections = ("grid", "params", "init", "horizon", "controls", "diagnostics", "diff",
                "estimates", "rescale", "seed")
    c.unknown(raw, sections, "")
    d = RunConfig()

    g = c.section(raw.get("grid"), "grid")
    c.unknown(g, ("L", "N"), "grid")
    L = c.real(g, "L", d.grid.L, "grid", _pos, "must be positive")
    N = c.integer(g, "N", d.grid.N, "grid", lambda n: n >= 8 and (n & (n - 1)) == 0,
                  "N must be even power of two >= 8")

    p = c.section(raw.get("params"), "params")
    c.unknown(p, ("beta", "rho", "lambda"), "params")
    beta = c.real(p, "beta", d.params.beta, "params")
    rho = c.real(p, "rho", d.params.rho, "params")
    lam = c.real(p, "lambda", d.params.lam, "params", lambda x: 0 < x <= 1, "lambda must be in (0,1]")

    ini = c.section(raw.get("init"), "init")
    c.unknown(ini, ("u0", "v0"), "init")
    u0 = _parse_init(c, ini.get("u0"), "init.u0", d.u0)
    v0 = _parse_init(c, ini.get("v0"), "init.v0", d.v0)

    h = c.section(raw.get("horizon"), "horizon")
    c.unknown(h, ("T", "auto", "A_s"), "horizon")
    horizon = HorizonConfig(
        T=c.real(h, "T", d.horizon.T, "horizon", _pos, "must be positive"),
        auto=c.boolean(h, "auto", d.horizon.auto, "horizon"),
        A_s=c.real(h, "A_s", d.horizon.A_s, "horizon", _pos, "must be positive"))

    ct = c.section(raw.get("controls"), "controls")
    dc = d.controls
    c.unknown(ct, [f.name for f in fields(StepControls)], "controls")
    ckw = {}
    for f in fields(StepControls):
        default = getattr(dc, f.name)
        if isinstance(default, bool):
            ckw[f.name] = c.boolean(ct, f.name, default, "controls")
        elif isinstance(default, int):
            ckw[f.name] = c.integer(ct, f.name, default, "controls", _pos, "must be positive")
        else:
            ckw[f.name] = c.real(ct, f.name, default, "controls", _pos, "must be positive")
    try:
        controls = StepControls(**ckw)
    except ValueError as exc:
        c.add("controls", str(exc))
        controls = dc

    dg = c.section(raw.get("diagnostics"), "diagnostics")
    dd = d.diagnostics
    c.unknown(dg, [f.name for f in fields(DiagnosticsConfig)], "diagnostics")
    diag = DiagnosticsConfig(
        s=c.real(dg, "s", dd.s, "diagnostics", lambda x: x > 0.5, "s must exceed 1/2"),
        delta=c.real(dg, "delta", dd.delta, "diagnostics", lambda x: 0 <= x <= 1, "delta must be in [0,1]"),
        eps=c.real(dg, "eps", dd.eps, "diagnostics", _pos, "must be positive"),
        oversample=c.integer(dg, "oversample", dd.oversample, "diagnostics",
                             lambda n: n >= 1 and (n & (n - 1)) == 0, "must be a power of two"),
        kappa=c.real(dg, "kappa", dd.kappa, "diagnostics", _pos, "must be positive"),
        lipschitz_c=c.real(dg, "lipschitz_c", dd.lipschitz_c, "diagnostics", _pos, "must be positive"),
        e1_abs_tol=c.real(dg, "e1_abs_tol", dd.e1_abs_tol, "diagnostics", _pos, "must be positive"),
        e2_rel_tol=c.real(dg, "e2_rel_tol", dd.e2_rel_tol, "diagnostics", _pos, "must be positive"),
        e34_rel_tol=c.real(dg, "e34_rel_tol", dd.e34_rel_tol, "diagnostics", _pos, "must be positive"))

    df = c.section(raw.get("diff"), "diff")
    c.unknown(df, ("epsilon", "u0", "v0"), "diff")
    diff = DiffConfig(
        epsilon=c.real(df, "epsilon", d.diff.epsilon, "diff"),
        u0=_parse_init(c, df.get("u0"), "diff.u0", d.diff.u0),
        v0=_parse_init(c, df.get("v0"), "diff.v0", d.diff.v0))

    es = c.section(raw.get("estimates"), "estimates")
    c.unknown(es, ("samples",), "estimates")
    est = EstimatesConfig(c.integer(es, "samples", d.estimates.samples, "estimates",
                                    lambda n: n >= 1, "must be positive"))

    rs = c.section(raw.get("rescale"), "rescale")
    c.unknown(rs, ("lambdas", "delta"), "rescale")
    lambdas = d.rescale.lambdas
    if "lambdas" in rs:
        vals = rs["lambdas"]
        if not isinstance(vals, list) or not vals or not all(_is_real(x) for x in vals):
            c.add("rescale.lambdas", "expected a non-empty list of numbers")
        elif not all(0 < x <= 1 for x in vals):
            c.add("rescale.lambdas", "lambda must be in (0,1]")
        else:
            lambdas = tuple(float(x) for x in vals)
    rescale = RescaleConfig(lambdas, c.real(rs, "delta", d.rescale.delta, "rescale", _pos, "must be positive"))

    seed = c.integer(raw, "seed", d.seed, "", lambda v: 0 <= v < 2**64, "must be a u64")

    if c.errors:
        raise ConfigError(c.errors)
    return RunConfig(GridConfig(L, N), SboParams(beta, rho, lam), u0, v0, horizon, controls,
                     diag, diff, est, rescale, seed)


def _spec_dict(spec: InitDataSpec) -> dict:
    return {k: v for k, v in asdict(spec).items() if v is not None}


def config_to_dict(cfg: RunConfig) -> dict:
    """Plain-data form of a config; ``parse_config(dump_config(cfg)) == cfg``."""
    return {
        "grid": asdict(cfg.grid),
        "params": {"beta": cfg.params.beta, "rho": cfg.params.rho, "lambda": cfg.params.lam},
        "init": {"u0": _spec_dict(cfg.u0), "v0": _spec_dict(cfg.v0)},
        "horizon": asdict(cfg.horizon),
        "controls": asdict(cfg.controls),
        "diagnostics": asdict(cfg.diagnostics),
        "diff": {"epsilon": cfg.diff.epsilon, "u0": _spec_dict(cfg.diff.u0), "v0": _spec_dict(cfg.diff.v0)},
        "estimates": asdict(cfg.estimates),
        "rescale": {"lambdas": list(cfg.rescale.lambdas), "delta": cfg.rescale.delta},
        "seed": cfg.seed,
    }


def dump_config(cfg: RunConfig) -> str:
    return yaml.safe_dump(config_to_dict(cfg), sort_keys=True)


def load_config(path: str | Path | None) -> RunConfig:
    if path is None:
        return RunConfig()
    return parse_config(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# Emission


def _fmt(x: float) -> str:
    return "%.17g" % x


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[float]]) -> None:
    lines = [",".join(header)]
    lines += [",".join(_fmt(float(v)) for v in row) for row in rows]
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def read_csv(path: str | Path) -> tuple[list[str], np.ndarray]:
    text = Path(path).read_text(encoding="ascii").splitlines()
    header = text[0].split(",")
    data = np.array([[float(v) for v in line.split(",")] for line in text[1:]], dtype=float)
    return header, data.reshape(-1, len(header))


def to_jsonable(obj: Any) -> Any:
    """Convert numpy scalars/arrays, tuples and non-finite floats to plain JSON data."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if hasattr(obj, "__dataclass_fields__"):
        return to_jsonable(asdict(obj))
    return obj


def dumps_json(obj: Any) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2) + "\n"


def write_json(path: str | Path, obj: Any) -> None:
    Path(path).write_text(dumps_json(obj), encoding="utf-8")


def write_snapshot(path: str | Path, state: SboState) -> None:
    g = state.grid
    uv = np.empty(2 * g.N, dtype="<f8")
    uv[0::2] = state.u.real
    uv[1::2] = state.u.imag
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, g.N, g.L, state.t))
        fh.write(uv.tobytes())
        fh.write(np.asarray(state.v, dtype="<f8").tobytes())


def read_snapshot(path: str | Path) -> SboState:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise ValueError("truncated snapshot header")
    magic, N, L, t = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ValueError(f"bad snapshot magic {magic!r}")
    expect = _HEADER.size + 24 * N
    if len(data) != expect:
        raise ValueError(f"snapshot has {len(data)} bytes, expected {expect}")
    body = np.frombuffer(data, dtype="<f8", offset=_HEADER.size)
    u = body[0:2 * N:2] + 1j * body[1:2 * N:2]
    v = body[2 * N:]
    return SboState(make_grid(L, int(N)), u, v.astype(float), t)
