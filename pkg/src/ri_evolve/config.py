"""Run configuration with flat dotted keys (``vv.eps: 1e-3``) in YAML."""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Any, Optional

import yaml


class ConfigError(ValueError):
    """Invalid or incomplete configuration; ``field`` names the offending key."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass
class RunConfig:
    command: str = "ode"
    energy: Any = None
    loading: Any = "paper_f"
    dissipation: str = "sign_subdifferential"
    scheme: str = "mm"
    vv_eps: float = 1e-3
    vv_h: Optional[float] = None
    vv_root_tol: float = 1e-12
    vv_eps_sequence: list = field(default_factory=lambda: [1e-1, 1e-2, 1e-3])
    mm_steps: int = 16000
    mm_scan_points: int = 20001
    mm_tie_tol: float = 1e-9
    mm_selection: str = "global"
    pde_scenario: str = "levelset_mcf"
    pde_nx: int = 128
    pde_dt: Any = "auto"
    pde_T: float = 1e-3
    pde_snapshots: int = 10
    pde_reg_eps: float = 1e-3
    pde_sigma: Optional[float] = None
    pde_forcing: str = "zero"
    pde_r0: float = 2.0
    pde_n: int = 2
    out: Optional[str] = None
    report: Optional[str] = None
    run: Optional[str] = None
    suite: str = "mm_lemmas"
    check: bool = False
    figure1: bool = False
    svg: bool = True
    sweep_axis: Optional[str] = None
    sweep_values: list = field(default_factory=list)
    seed: int = 0

    def validate(self) -> "RunConfig":
        if self.command not in ("ode", "pde", "hysteresis", "verify", "sweep"):
            raise ConfigError("command", f"unknown command {self.command!r}")
        if self.command in ("ode", "sweep") and self.energy is None:
            raise ConfigError("energy", f"an energy spec is required for '{self.command}'")
        if self.scheme not in ("mm", "vv", "vv_limit"):
            raise ConfigError("scheme", f"must be mm, vv or vv_limit, got {self.scheme!r}")
        if not self.vv_eps > 0:
            raise ConfigError("vv.eps", "must be positive")
        if self.vv_h is not None and not self.vv_h > 0:
            raise ConfigError("vv.h", "must be positive")
        if int(self.mm_steps) < 1:
            raise ConfigError("mm.steps", "must be >= 1")
        if int(self.mm_scan_points) < 3:
            raise ConfigError("mm.scan_points", "must be >= 3")
        if self.mm_selection not in ("global", "extremal"):
            raise ConfigError("mm.selection", "must be global or extremal")
        if self.pde_scenario not in ("sticktion_heat", "nonconvex_cubed", "levelset_mcf", "mcf_radial"):
            raise ConfigError("pde.scenario", f"unknown scenario {self.pde_scenario!r}")
        if int(self.pde_nx) < 3:
            raise ConfigError("pde.nx", "must be >= 3")
        if self.pde_dt != "auto":
            try:
                if not float(self.pde_dt) > 0:
                    raise ValueError
            except (TypeError, ValueError):
                raise ConfigError("pde.dt", "must be 'auto' or a positive number") from None
        if not self.pde_T > 0:
            raise ConfigError("pde.T", "must be positive")
        if not self.pde_reg_eps > 0:
            raise ConfigError("pde.reg_eps", "must be positive")
        if self.command == "verify" and not self.run:
            raise ConfigError("run", "a trajectory CSV is required for 'verify'")
        if self.command == "sweep":
            if self.sweep_axis not in ("eps", "h", "N"):
                raise ConfigError("sweep.axis", "must be eps, h or N")
            if not self.sweep_values:
                raise ConfigError("sweep.values", "at least one value is required")
        return self

    # dotted keys <-> attribute names: the first underscore-separated group is the section
    @staticmethod
    def _key(name: str) -> str:
        for prefix in ("vv_", "mm_", "pde_", "sweep_"):
            if name.startswith(prefix):
                return prefix[:-1] + "." + name[len(prefix):]
        return name

    @classmethod
    def _attr(cls, key: str) -> str:
        name = key.replace(".", "_")
        if name not in {f.name for f in fields(cls)}:
            raise ConfigError(key, "unknown configuration key")
        return name

    def to_flat(self) -> dict:
        return {self._key(f.name): getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_flat(cls, data: dict) -> "RunConfig":
        cfg = cls()
        for k, v in (data or {}).items():
            setattr(cfg, cls._attr(k), v)
        return cfg

    def dump(self) -> str:
        return yaml.safe_dump(self.to_flat(), sort_keys=True)

    @classmethod
    def load(cls, path) -> "RunConfig":
        with open(path) as fh:
            data = yaml.safe_load(fh)
        if data is not None and not isinstance(data, dict):
            raise ConfigError("config", f"{path} must hold a mapping of flat keys")
        return cls.from_flat(data)

    def merged(self, overrides: dict) -> "RunConfig":
        data = self.to_flat()
        for k, v in overrides.items():
            if v is not None:
                data[self._key(self._attr(k))] = v
        return RunConfig.from_flat(data)
