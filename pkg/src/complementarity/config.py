"""Scenario configuration shared by the CLI and the experiment scripts."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Optional

from .classical import CoherenceSpec, MarkingConfig
from .distributions import DEFAULT_GRID_N, PhiGrid
from .errors import ValidationError
from .quantum import BlochVector

COMMANDS = ("classical", "quantum", "sweep", "sample", "invert")
SWEEP_PARAMS = ("mu", "sz")


@dataclass
class ScenarioConfig:
    command: str = "classical"
    mode: Optional[str] = None
    i1: Optional[float] = None
    mu: Optional[float] = None
    delta: float = 0.0
    sx: Optional[float] = None
    sy: Optional[float] = None
    sz: Optional[float] = None
    vartheta: float = math.pi / 3
    theta: Optional[float] = None
    grid: int = DEFAULT_GRID_N
    seed: int = 0
    samples: int = 100_000
    out: Optional[str] = None
    report: Optional[str] = None
    observed: Optional[str] = None
    input: Optional[str] = None
    compare_classical: bool = False
    sweep_param: Optional[str] = None
    sweep_start: Optional[float] = None
    sweep_stop: Optional[float] = None
    sweep_steps: int = 101

    @property
    def has_classical_state(self) -> bool:
        return self.i1 is not None

    @property
    def has_bloch_state(self) -> bool:
        return any(v is not None for v in (self.sx, self.sy, self.sz))

    def resolve(self) -> "ScenarioConfig":
        """Fill in the mode and validate every referenced invariant."""
        if self.command not in COMMANDS:
            raise ValidationError(f"unknown command {self.command!r}")
        if self.command in ("classical", "quantum"):
            self.mode = self.command
        elif self.command == "sweep":
            if self.sweep_param is None:
                self.sweep_param = "sz" if self.has_bloch_state else "mu"
            if self.sweep_param not in SWEEP_PARAMS:
                raise ValidationError(f"sweep parameter must be one of {SWEEP_PARAMS}")
            self.mode = "classical" if self.sweep_param == "mu" else "quantum"
        elif self.command == "sample" and self.input is None:
            if self.has_classical_state == self.has_bloch_state:
                raise ValidationError("sample needs exactly one of --i1 (classical) or --sx/--sy/--sz (quantum)")
            self.mode = "classical" if self.has_classical_state else "quantum"
        self._validate()
        return self

    def _validate(self) -> None:
        PhiGrid(self.grid)
        if self.samples < 1:
            raise ValidationError("--samples must be at least 1")
        if self.command == "invert" or self.input is not None:
            if self.input is None:
                raise ValidationError("invert needs --input PATH")
            self.marking()
            return
        if self.mode == "classical":
            if self.has_bloch_state:
                raise ValidationError("classical mode takes --i1/--mu/--delta, not Bloch components")
            if self.command != "sweep":
                self.coherence_spec()
        elif self.mode == "quantum":
            if self.has_classical_state:
                raise ValidationError("quantum mode takes Bloch components, not --i1")
            if self.command != "sweep":
                self.bloch()
        if self.command == "sweep":
            self._validate_sweep()
        self.marking()

    def _validate_sweep(self) -> None:
        if self.sweep_param == "mu":
            if self.i1 is None:
                raise ValidationError("a coherence sweep needs --i1")
            CoherenceSpec.from_i1(self.i1, 0.0, self.delta)
            lo, hi = 0.0, 1.0
        else:
            if self.mu is not None and not 0 <= self.mu <= 1:
                raise ValidationError("--mu must lie in [0, 1]")
            lo, hi = 0.0, 0.999
        self.sweep_start = lo if self.sweep_start is None else self.sweep_start
        self.sweep_stop = hi if self.sweep_stop is None else self.sweep_stop
        if self.sweep_steps < 2 or not self.sweep_stop > self.sweep_start:
            raise ValidationError("sweep range is empty (need stop > start and at least 2 steps)")
        if self.sweep_param == "mu" and (self.sweep_start < 0 or self.sweep_stop > 1):
            raise ValidationError("coherence sweep must stay inside [0, 1]")
        if self.sweep_param == "sz" and (self.sweep_start < -1 or self.sweep_stop > 1):
            raise ValidationError("s_z sweep must stay inside [-1, 1]")

    def coherence_spec(self) -> CoherenceSpec:
        if self.i1 is None or self.mu is None:
            raise ValidationError("classical mode needs --i1 and --mu")
        return CoherenceSpec.from_i1(self.i1, self.mu, self.delta)

    def bloch(self) -> BlochVector:
        return BlochVector(self.sx or 0.0, self.sy or 0.0, self.sz or 0.0)

    def marking(self) -> MarkingConfig:
        return MarkingConfig(self.vartheta, self.theta, enforce_optimal=self.theta is None)

    def phi_grid(self) -> PhiGrid:
        return PhiGrid(self.grid)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def dump(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "ScenarioConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
