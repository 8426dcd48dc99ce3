"""Model parameters: dimension, torus size, mean offset and the derived xi"""
import math
from enum import Enum
from typing import Union
from pydantic import BaseModel, ConfigDict, Field, computed_field, field_validator


class XiTag(str, Enum):
    """Tag for xi = +infinity (the off-critical reduced energy f_infinity)"""
    INFINITE = "inf"


Xi = Union[float, XiTag]

# Diagnostic threshold between the critical-like and off-critical-like regimes
CRITICAL_LIKE_XI = 10.0


def normalize_xi(xi: Xi) -> Xi:
    """Map float('inf') and the string 'inf' onto XiTag.INFINITE"""
    if isinstance(xi, XiTag):
        return xi
    if isinstance(xi, str):
        if xi.strip().lower() in ("inf", "+inf", "infinity"):
            return XiTag.INFINITE
        xi = float(xi)
    if math.isinf(xi) and xi > 0:
        return XiTag.INFINITE
    if not xi > 0:
        raise ValueError(f"xi must be positive, got {xi}")
    return float(xi)


def check_dimension(d: int) -> int:
    if int(d) != d or d < 2:
        raise ValueError(f"dimension must be an integer >= 2, got {d}")
    return int(d)


class ModelParams(BaseModel):
    """Torus side L, dimension d and mean -1+phi of the order parameter"""

    model_config = ConfigDict(frozen=True)

    d: int = Field(2, ge=2)
    L: float = Field(..., gt=0)
    phi: float = Field(..., gt=0, lt=1)

    @classmethod
    def from_xi(cls, d: int, phi: float, xi: float) -> "ModelParams":
        """Critical scaling phi = xi L^(-d/(d+1)) solved for L"""
        return cls(d=d, L=(xi / phi) ** ((d + 1) / d), phi=phi)

    @computed_field
    @property
    def xi(self) -> float:
        return self.phi * self.L ** (self.d / (self.d + 1))

    @property
    def regime(self) -> str:
        return "critical-like" if self.xi <= CRITICAL_LIKE_XI else "off-critical-like"

    @property
    def u_bar(self) -> float:
        """Uniform state -1+phi"""
        return -1.0 + self.phi

    @property
    def volume(self) -> float:
        return self.L ** self.d


class RescaledParams(BaseModel):
    """Parameters of the rescaled box [-phi L/2, phi L/2]^d with L derived from (phi, xi)"""

    model_config = ConfigDict(frozen=True)

    d: int = Field(2, ge=2)
    phi: float = Field(..., gt=0, lt=1)
    xi: float = Field(..., gt=0)

    @field_validator("xi")
    @classmethod
    def finite_xi(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("rescaled parameters need a finite xi")
        return v

    @property
    def L(self) -> float:
        return (self.xi / self.phi) ** ((self.d + 1) / self.d)

    @property
    def domain_side(self) -> float:
        return self.phi * self.L

    @property
    def domain_volume(self) -> float:
        return self.domain_side ** self.d

    @property
    def u_bar(self) -> float:
        return -1.0 + self.phi

    def model_params(self) -> ModelParams:
        """The unrescaled torus these parameters were shrunk from"""
        return ModelParams(d=self.d, L=self.L, phi=self.phi)
