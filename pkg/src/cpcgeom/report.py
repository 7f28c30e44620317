"""Run configuration and deterministic reports for the command line."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import __version__
from .errors import UsageError

DEFAULT_TOLERANCES = {
    "unit": 1e-10,
    "invariant": 1e-9,
    "structure": 1e-6,
    "curvature": 1e-7,
    "nu": 1e-8,
    "spectrum": 1e-5,
    "metric": 1e-8,
    "tnorm": 1e-8,
    "frame": 1e-8,
    "orthonormal": 1e-10,
    "ode": 1e-9,
}


@dataclass
class GridSpec:
    """Per-axis ``(start, stop, count)``; None means "chart domain"."""

    axes: list[tuple[float, float, int]] | None = None
    count: int = 3

    @classmethod
    def parse(cls, text: str | None) -> "GridSpec":
        if text is None or text == "":
            return cls()
        text = str(text).strip()
        if ":" not in text:
            return cls(None, _count(text))
        axes = []
        for part in text.split(","):
            pieces = part.split(":")
            if len(pieces) != 3:
                raise UsageError(f"grid axis must be start:stop:count, got {part!r}")
            a, b, k = float(pieces[0]), float(pieces[1]), _count(pieces[2])
            if not a < b:
                raise UsageError(f"grid axis {part!r} is empty")
            axes.append((a, b, k))
        return cls(axes)

    def points(self, chart, margin: float = 0.05) -> np.ndarray:
        if self.axes is None:
            lines = [np.linspace(a + margin, b - margin, self.count) for a, b in chart.domain]
        else:
            if len(self.axes) != chart.n:
                raise UsageError(f"grid has {len(self.axes)} axes, chart needs {chart.n}")
            lines = [np.linspace(a, b, k) for a, b, k in self.axes]
        mesh = np.meshgrid(*lines, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def axis_arrays(self, chart, margin: float = 0.05) -> list[np.ndarray]:
        if self.axes is None:
            return [np.linspace(a + margin, b - margin, self.count) for a, b in chart.domain]
        return [np.linspace(a, b, k) for a, b, k in self.axes]

    def echo(self):
        return self.count if self.axes is None else [list(a) for a in self.axes]


def _count(text) -> int:
    try:
        k = int(text)
    except (TypeError, ValueError):
        raise UsageError(f"grid count must be an integer, got {text!r}") from None
    if k < 2:
        raise UsageError(f"grid counts must be >= 2, got {k}")
    return k


def parse_t_range(text: str | None) -> tuple[float, float, int] | None:
    if text is None:
        return None
    pieces = str(text).split(":")
    if len(pieces) != 3:
        raise UsageError(f"t range must be A:B:N, got {text!r}")
    try:
        a, b, k = float(pieces[0]), float(pieces[1]), int(pieces[2])
    except ValueError:
        raise UsageError(f"t range must be A:B:N, got {text!r}") from None
    if a > b or k < 1:
        raise UsageError(f"bad t range {text!r}")
    return a, b, k


def parse_tolerances(items) -> dict[str, float]:
    tol = dict(DEFAULT_TOLERANCES)
    for item in items or ():
        if isinstance(item, (list, tuple)):
            name, value = item
        else:
            if "=" not in item:
                raise UsageError(f"tolerance must be NAME=VALUE, got {item!r}")
            name, value = item.split("=", 1)
        name = name.strip()
        if name not in tol:
            raise UsageError(f"unknown tolerance {name!r}; known: {', '.join(sorted(tol))}")
        try:
            val = float(value)
        except ValueError:
            raise UsageError(f"tolerance {name} must be a number, got {value!r}") from None
        if not val > 0:
            raise UsageError(f"tolerance {name} must be positive")
        tol[name] = val
    return tol


@dataclass
class RunConfig:
    command: str
    entry: str | None = None
    chart: dict | None = None
    grid: GridSpec = field(default_factory=GridSpec)
    t_range: tuple[float, float, int] | None = None
    tolerances: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    out: str | None = None
    csv: str | None = None
    fmt: str = "text"
    clip: bool = True
    criteria: list[int] | None = None

    def echo(self) -> dict:
        return {
            "command": self.command,
            "entry": self.entry,
            "chart": self.chart,
            "grid": self.grid.echo(),
            "t_range": list(self.t_range) if self.t_range else None,
            "tolerances": self.tolerances,
            "clip": self.clip,
            "criteria": self.criteria,
        }


def _clean(value: Any) -> Any:
    """JSON-ready copy with floats rounded to 12 significant digits."""
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if not math.isfinite(v):
            return str(v)
        return float(f"{v:.12g}")
    if isinstance(value, np.ndarray):
        return _clean(value.tolist())
    return value


@dataclass
class Report:
    command: str
    config: dict
    checks: dict[str, dict] = field(default_factory=dict)
    data: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    error: str | None = None

    def add(self, name: str, measured: float, tolerance: float, passed: bool | None = None, **extra):
        if passed is None:
            passed = bool(measured <= tolerance)
        self.checks[name] = {"status": "pass" if passed else "fail", "measured": measured, "tolerance": tolerance, **extra}

    def add_error(self, name: str, message: str):
        self.checks[name] = {"status": "error", "measured": None, "tolerance": None, "message": message}

    @property
    def passed(self) -> bool:
        return all(c["status"] == "pass" for c in self.checks.values())

    @property
    def summary(self) -> str:
        return "pass" if self.passed else "fail"

    def to_dict(self) -> dict:
        return _clean(
            {
                "tool": "cpcgeom",
                "version": __version__,
                "command": self.command,
                "config": self.config,
                "checks": self.checks,
                "data": self.data,
                "notes": self.notes,
                "summary": self.summary,
            }
        )

    def render(self, fmt: str = "text") -> str:
        if fmt == "structured":
            return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"
        lines = [f"cpcgeom {__version__} {self.command}"]
        for name in sorted(self.checks):
            chk = _clean(self.checks[name])
            if chk["status"] == "error":
                lines.append(f"  ERROR {name}: {chk['message']}")
            else:
                lines.append(f"  {chk['status'].upper():5s} {name}: measured={chk['measured']} tolerance={chk['tolerance']}")
        for key, value in sorted(_clean(self.data).items()):
            lines.append(f"  {key}: {json.dumps(value, sort_keys=True)}")
        lines.extend(f"  note: {n}" for n in self.notes)
        lines.append(f"summary: {self.summary}")
        return "\n".join(lines) + "\n"


def load_config_file(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError("config must be a JSON object")
    return data
