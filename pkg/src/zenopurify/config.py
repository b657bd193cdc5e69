"""Run configuration: TOML file plus ``--set section.key=value`` overrides."""

from __future__ import annotations

import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import hilbert
from .errors import ConfigInvalid, ZenoError
from .model import (
    CoherentState,
    Custom,
    ModelParams,
    NumberState,
    ProjectionSpec,
    coherent_state,
    number_state,
    thermal_state,
)
from .tuning import resonant_tau

SECTIONS = ("model", "projection", "initial_state", "run", "output")


@dataclass(frozen=True)
class InitialState:
    kind: str
    temperature: float | None = None
    n: int | None = None
    alpha: complex | None = None
    path: Path | None = None

    def realize(self, p: ModelParams) -> np.ndarray:
        if self.kind == "thermal":
            return thermal_state(p.omega, self.temperature, p.dimB)
        if self.kind == "number":
            return hilbert.projector(number_state(self.n, p.dimB))
        if self.kind == "coherent":
            return hilbert.projector(coherent_state(self.alpha, p.dimB))
        rho = load_matrix(self.path)
        if rho.shape != (p.dimB, p.dimB):
            raise ConfigInvalid(f"initial state in {self.path} has shape {rho.shape}, expected {(p.dimB, p.dimB)}")
        return hilbert.check_density_matrix(rho)

    def describe(self) -> dict:
        out: dict[str, Any] = {"kind": self.kind}
        if self.temperature is not None:
            out["temperature"] = self.temperature
        if self.n is not None:
            out["n"] = self.n
        if self.alpha is not None:
            out["alpha"] = [self.alpha.real, self.alpha.imag]
        if self.path is not None:
            out["path"] = str(self.path)
        return out


@dataclass(frozen=True)
class RunConfig:
    model: ModelParams
    projection: ProjectionSpec
    initial_state: InitialState
    n_max: int = 20
    tol_deg: float = 1e-6
    csv: Path | None = None
    json: Path | None = None
    svg: Path | None = None
    source: dict = field(default_factory=dict, compare=False)

    def describe(self) -> dict:
        """JSON-ready echo of the resolved configuration."""
        p = self.model
        proj = self.projection
        if isinstance(proj, NumberState):
            pj: dict[str, Any] = {"kind": "number", "n_a": proj.n_a}
        elif isinstance(proj, CoherentState):
            pj = {"kind": "coherent", "alpha": [proj.alpha.real, proj.alpha.imag]}
        else:
            pj = {"kind": "custom", "amplitudes": [[z.real, z.imag] for z in proj.phi]}
        return {
            "model": {
                "Omega": p.Omega,
                "omega": p.omega,
                "g": p.g,
                "tau": p.tau,
                "temperature": p.temperature,
                "dimA": p.dimA,
                "dimB": p.dimB,
            },
            "projection": pj,
            "initial_state": self.initial_state.describe(),
            "run": {"n_max": self.n_max, "tol_deg": self.tol_deg},
        }


def load_matrix(path: Path) -> np.ndarray:
    """Read a complex matrix from ``.npy`` or from JSON ``{"re": [...], "im": [...]}``."""
    path = Path(path)
    try:
        if path.suffix == ".npy":
            return np.asarray(np.load(path, allow_pickle=False), dtype=complex)
        data = json.loads(path.read_text())
        re = np.asarray(data["re"], dtype=float)
        im = np.asarray(data.get("im", np.zeros_like(re)), dtype=float)
        return re + 1j * im
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise ConfigInvalid(f"cannot read matrix from {path}: {exc}") from exc


def _complex(value: Any, where: str) -> complex:
    if isinstance(value, bool):
        raise ConfigInvalid(f"{where}: expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2 and all(
        isinstance(x, (int, float)) and not isinstance(x, bool) for x in value
    ):
        return complex(value[0], value[1])
    if isinstance(value, dict) and set(value) <= {"re", "im"}:
        return complex(value.get("re", 0.0), value.get("im", 0.0))
    raise ConfigInvalid(f"{where}: expected a number, [re, im] or {{re, im}}, got {value!r}")


def _number(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigInvalid(f"{where}: expected a real number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigInvalid(f"{where}: must be finite")
    return float(value)


def _integer(value: Any, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigInvalid(f"{where}: expected an integer, got {value!r}")
    return value


def _path(value: Any, base: Path, where: str, must_exist: bool) -> Path:
    if not isinstance(value, str) or not value:
        raise ConfigInvalid(f"{where}: expected a path string, got {value!r}")
    p = Path(value)
    if not p.is_absolute():
        p = base / p
    if must_exist and not p.exists():
        raise ConfigInvalid(f"{where}: file {p} does not exist")
    return p


def _parse_override(item: str) -> tuple[str, str, Any]:
    if "=" not in item:
        raise ConfigInvalid(f"override {item!r} is not of the form section.key=value")
    lhs, rhs = item.split("=", 1)
    if "." not in lhs:
        raise ConfigInvalid(f"override key {lhs!r} must be section.key")
    section, key = lhs.strip().split(".", 1)
    try:
        value = tomllib.loads(f"v = {rhs.strip()}")["v"]
    except tomllib.TOMLDecodeError:
        value = rhs.strip()
    return section, key, value


def merge_overrides(raw: dict, overrides: list[str]) -> dict:
    merged = {k: dict(v) if isinstance(v, dict) else v for k, v in raw.items()}
    for item in overrides:
        section, key, value = _parse_override(item)
        merged.setdefault(section, {})
        if not isinstance(merged[section], dict):
            raise ConfigInvalid(f"[{section}] is not a table")
        merged[section][key] = value
    return merged


def _model(sec: dict) -> ModelParams:
    known = {"Omega", "omega", "g", "tau", "temperature", "dimA", "dimB"}
    extra = set(sec) - known
    if extra:
        raise ConfigInvalid(f"[model]: unknown keys {sorted(extra)}")
    for key in ("Omega", "omega", "g", "tau"):
        if key not in sec:
            raise ConfigInvalid(f"[model]: missing {key}")
    tau_raw = sec["tau"]
    kwargs = dict(
        Omega=_number(sec["Omega"], "model.Omega"),
        omega=_number(sec["omega"], "model.omega"),
        g=_number(sec["g"], "model.g"),
        tau=0.0,
        temperature=_number(sec.get("temperature", 0.0), "model.temperature"),
        dimA=_integer(sec.get("dimA", 32), "model.dimA"),
        dimB=_integer(sec.get("dimB", 32), "model.dimB"),
    )
    try:
        if tau_raw == "resonant":
            kwargs["tau"] = resonant_tau(ModelParams(**kwargs))
        else:
            kwargs["tau"] = _number(tau_raw, "model.tau")
        return ModelParams(**kwargs)
    except ConfigInvalid:
        raise
    except ZenoError as exc:
        raise ConfigInvalid(f"[model]: {exc}") from exc


def _projection(sec: dict, base: Path) -> ProjectionSpec:
    kind = sec.get("kind")
    try:
        if kind == "number":
            return NumberState(_integer(sec.get("n_a"), "projection.n_a"))
        if kind == "coherent":
            return CoherentState(_complex(sec.get("alpha"), "projection.alpha"))
        if kind == "custom":
            if "file" in sec:
                amps = load_matrix(_path(sec["file"], base, "projection.file", True)).ravel()
            elif "amplitudes" in sec:
                amps = np.array(
                    [_complex(z, "projection.amplitudes") for z in sec["amplitudes"]], dtype=complex
                )
            else:
                raise ConfigInvalid("[projection]: custom needs 'amplitudes' or 'file'")
            if sec.get("normalize", False):
                amps = hilbert.normalize(amps)
            return Custom(amps)
    except ConfigInvalid:
        raise
    except ZenoError as exc:
        raise ConfigInvalid(f"[projection]: {exc}") from exc
    raise ConfigInvalid(f"[projection]: kind must be number, coherent or custom, got {kind!r}")


def _initial(sec: dict, model: ModelParams, base: Path) -> InitialState:
    kind = sec.get("kind", "thermal")
    if kind == "thermal":
        temp = _number(sec.get("temperature", model.temperature), "initial_state.temperature")
        if temp < 0:
            raise ConfigInvalid("initial_state.temperature must be >= 0")
        return InitialState("thermal", temperature=temp)
    if kind == "number":
        n = _integer(sec.get("n"), "initial_state.n")
        if not 0 <= n < model.dimB:
            raise ConfigInvalid(f"initial_state.n={n} outside [0, {model.dimB})")
        return InitialState("number", n=n)
    if kind == "coherent":
        return InitialState("coherent", alpha=_complex(sec.get("alpha"), "initial_state.alpha"))
    if kind == "file":
        return InitialState("file", path=_path(sec.get("path"), base, "initial_state.path", True))
    raise ConfigInvalid(f"[initial_state]: kind must be thermal, number, coherent or file, got {kind!r}")


def build_config(raw: dict, base: Path | None = None) -> RunConfig:
    """Validate a raw nested mapping into a :class:`RunConfig`.

    Relative paths are resolved against ``base`` (the config file's directory).
    """
    base = Path(".") if base is None else base
    unknown = set(raw) - set(SECTIONS)
    if unknown:
        raise ConfigInvalid(f"unknown sections {sorted(unknown)}")
    for sec in SECTIONS:
        if sec in raw and not isinstance(raw[sec], dict):
            raise ConfigInvalid(f"[{sec}] must be a table")
    if "model" not in raw:
        raise ConfigInvalid("missing [model] section")
    if "projection" not in raw:
        raise ConfigInvalid("missing [projection] section")
    model = _model(raw["model"])
    projection = _projection(raw["projection"], base)
    initial = _initial(raw.get("initial_state", {}), model, base)
    run = raw.get("run", {})
    n_max = _integer(run.get("n_max", 20), "run.n_max")
    if n_max < 1:
        raise ConfigInvalid(f"run.n_max must be >= 1, got {n_max}")
    tol_deg = _number(run.get("tol_deg", 1e-6), "run.tol_deg")
    out = raw.get("output", {})
    paths = {
        key: _path(out[key], base, f"output.{key}", False) if key in out else None
        for key in ("csv", "json", "svg")
    }
    return RunConfig(model, projection, initial, n_max, tol_deg, source=raw, **paths)


def load_config(path: Path, overrides: list[str] | None = None) -> RunConfig:
    path = Path(path)
    try:
        raw = tomllib.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigInvalid(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigInvalid(f"malformed config {path}: {exc}") from exc
    return build_config(merge_overrides(raw, overrides or []), path.parent)
