"""Run configuration shared by command-line flags and key=value config files"""
import math
from enum import Enum
from typing import Any, Dict, List, Optional
from pydantic import BaseModel, ConfigDict, Field, field_validator
from app.core.exceptions import UsageError
from app.models.params import ModelParams


class Command(str, Enum):
    CONSTANTS = "constants"
    REDUCED = "reduced"
    CERTIFY = "certify"
    PATH = "path"
    SADDLE = "saddle"
    GAMMA = "gamma"


DEFAULT_PHIS = [0.2, 0.1, 0.05, 0.025]


class RunConfig(BaseModel):
    """One batch run; unset options fall back to service defaults"""

    model_config = ConfigDict(extra="forbid", use_enum_values=False)

    command: Optional[Command] = None
    dim: int = Field(2, ge=2)
    phi: Optional[float] = Field(None, gt=0, lt=1)
    length: Optional[float] = Field(None, gt=0)
    xi: Optional[float] = Field(None, gt=0)
    grid: Optional[int] = Field(None, ge=2)
    images: int = Field(32, ge=3)
    R: Optional[float] = Field(None, ge=1)
    kappa: Optional[float] = Field(None, gt=0, lt=0.5)
    samples: int = Field(1000, ge=2)
    threads: Optional[int] = Field(None, ge=1)
    out: Optional[str] = None
    radius: float = Field(1.0, gt=0)
    phis: List[float] = Field(default_factory=lambda: list(DEFAULT_PHIS))
    field: Optional[str] = None
    snapshots: bool = False
    max_iter: Optional[int] = Field(None, ge=0)
    step: Optional[float] = Field(None, gt=0)
    tol: Optional[float] = Field(None, gt=0)

    @field_validator("xi", mode="before")
    @classmethod
    def parse_xi(cls, v: Any) -> Any:
        """Accept 'inf' for the off-critical limit"""
        if isinstance(v, str) and v.strip().lower() in ("inf", "+inf", "infinity"):
            return math.inf
        return v

    @field_validator("phis", mode="before")
    @classmethod
    def split_phis(cls, v: Any) -> Any:
        if isinstance(v, str):
            return [item for item in (part.strip() for part in v.split(",")) if item]
        return v

    def model_params(self) -> ModelParams:
        """
        ModelParams from phi and either length or a finite xi

        Raises:
            UsageError: phi missing, or neither length nor finite xi given
        """
        if self.phi is None:
            raise UsageError("--phi is required for this command")
        if self.length is not None:
            return ModelParams(d=self.dim, L=self.length, phi=self.phi)
        if self.xi is not None and math.isfinite(self.xi):
            return ModelParams.from_xi(self.dim, self.phi, self.xi)
        raise UsageError("give --length or a finite --xi together with --phi")

    def provenance_params(self) -> Dict[str, Any]:
        """Explicitly set parameters in field order, for CSV provenance lines"""
        values = self.model_dump(exclude_none=True)
        if self.command is not None:
            values["command"] = self.command.value
        if values.get("phis") is not None:
            values["phis"] = ",".join(repr(float(p)) for p in self.phis)
        return values

    def to_text(self) -> str:
        """key=value lines that parse back to an equal RunConfig"""
        lines = []
        for name in type(self).model_fields:
            value = getattr(self, name)
            if value is None:
                continue
            if isinstance(value, Command):
                text = value.value
            elif isinstance(value, bool):
                text = "true" if value else "false"
            elif isinstance(value, float):
                text = repr(value)
            elif isinstance(value, list):
                text = ",".join(repr(float(p)) for p in value)
            else:
                text = str(value)
            lines.append(f"{name}={text}")
        return "\n".join(lines) + "\n"
