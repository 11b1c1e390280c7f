"""Run configuration shared by the CLI and the scripts."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .errors import InputError, PreconditionError, ValidationError
from .fas import PRESETS, FasSequence, build_fas
from .metric import TOL_TIE, FiniteMetricSpace

DEFAULT_AUTO_SHRINK = 0.9


@dataclass
class FasConfig:
    """How to turn a metric space into a FAS.

    ``schedule`` is ``"preset"``, ``"auto"``, ``"auto:<c>"`` or
    ``"explicit:<e1,e2,...>"``; ``None`` picks ``preset`` for the warsaw and
    triadic generators and ``auto`` otherwise.  ``strategy`` of ``None`` picks
    disjoint balls for ultrametric inputs and greedy nets otherwise.
    """

    schedule: str | None = None
    strategy: str | None = None
    max_levels: int = 20
    gamma_override: dict[int, float] = field(default_factory=dict)
    continuum_gamma: bool = False
    seed: int = 0
    tol_tie: float = TOL_TIE

    @staticmethod
    def parse_overrides(text: str | None) -> dict[int, float]:
        out = {}
        for item in (text or "").split(","):
            if not item.strip():
                continue
            try:
                k, v = item.split("=")
                out[int(k)] = float(v)
            except ValueError:
                raise PreconditionError(f"gamma override must look like level=value, got {item!r}") from None
        return out

    def build(self, space: FiniteMetricSpace, generator: tuple[str, int] | None = None) -> FasSequence:
        schedule = self.schedule
        overrides = self.gamma_override or None
        if schedule is None:
            schedule = "preset" if generator and generator[0] in PRESETS else "auto"
        if schedule == "preset":
            if not generator or generator[0] not in PRESETS:
                raise ValidationError("the preset schedule exists only for the warsaw and triadic generators")
            if self.strategy not in (None, "given"):
                raise ValidationError("the preset schedule fixes its own approximations; drop --strategy")
            name, level = generator
            return PRESETS[name](level, continuum_gamma=self.continuum_gamma, tol_tie=self.tol_tie,
                                 gamma_override=overrides)
        strategy = self.strategy or ("ultrametric" if space.ultrametric else "greedy")
        subsets = None
        if strategy.startswith("file:"):
            subsets = read_subset_file(strategy[5:], space)
            strategy = "given"
        kw = dict(strategy=strategy, subsets=subsets, max_levels=self.max_levels,
                  gamma_override=overrides, seed=self.seed, tol_tie=self.tol_tie)
        if schedule == "auto" or schedule.startswith("auto:"):
            shrink = DEFAULT_AUTO_SHRINK
            if ":" in schedule:
                try:
                    shrink = float(schedule.split(":", 1)[1])
                except ValueError:
                    raise ValidationError(f"bad auto factor in {schedule!r}") from None
            return build_fas(space, shrink=shrink, **kw)
        if schedule.startswith("explicit:"):
            try:
                eps = [float(v) for v in schedule[9:].split(",") if v.strip()]
            except ValueError:
                raise ValidationError(f"bad explicit schedule {schedule!r}") from None
            return build_fas(space, eps, **kw)
        raise ValidationError(f"unknown schedule {schedule!r}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["gamma_override"] = {str(k): v for k, v in sorted(self.gamma_override.items())}
        return d


@dataclass
class HomologyConfig:
    dims: tuple[int, ...] = (0, 1)
    field_char: int = 2
    level_range: tuple[int, int] | None = None
    size_cap: int | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def read_subset_file(path, space: FiniteMetricSpace) -> list:
    """JSON list with one list of point ids per level."""
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read subset file {path}: {exc}") from None
    if not isinstance(data, list) or not all(isinstance(s, list) and s for s in data):
        raise InputError(f"{path}: expected a list of non-empty id lists, one per level")
    lookup = {str(k): v for k, v in space.index.items()}
    try:
        return [space.subset([lookup[str(i)] for i in s]) for s in data]
    except KeyError as exc:
        raise InputError(f"{path}: unknown point id {exc.args[0]}") from None
