"""Result types produced by the services and serialized by the CLI"""
import math
from typing import Any, Dict, List, Literal, Optional, Tuple
from pydantic import BaseModel, ConfigDict, Field, model_validator
from app.models.field import TorusField
from app.models.params import XiTag


class ReducedCurve(BaseModel):
    """Sampled graph nu -> f(nu) of a reduced energy plus its located features"""

    xi: float | XiTag
    d: int = Field(..., ge=2)
    nu: List[float]
    f: List[float]
    nu_zero: Optional[float] = None
    nu_max: float
    f_max: float

    @model_validator(mode="after")
    def check_samples(self) -> "ReducedCurve":
        if len(self.nu) != len(self.f) or not self.nu:
            raise ValueError("nu and f must be non-empty and of equal length")
        if any(b <= a for a, b in zip(self.nu, self.nu[1:])):
            raise ValueError("samples must be strictly increasing in nu")
        if self.nu[0] == 0.0 and self.f[0] != 0.0:
            raise ValueError("f(0) must be exactly 0")
        return self

    @property
    def samples(self) -> List[Tuple[float, float]]:
        return list(zip(self.nu, self.f))

    def summary(self) -> Dict[str, Any]:
        xi = "inf" if self.xi is XiTag.INFINITE else self.xi
        return {
            "xi": xi,
            "d": self.d,
            "nu_zero": self.nu_zero,
            "nu_max": self.nu_max,
            "f_max": self.f_max,
        }


class Certificate(BaseModel):
    """Evaluated right-hand side of the energy-gap lower bound"""

    kappa: float
    V: float = Field(..., ge=0)
    C1: float
    C2: float
    C3: float
    bound_offcritical: float
    bound_critical: Optional[float] = None
    hypotheses_ok: bool
    critical_conditions_ok: bool
    reason: str

    @model_validator(mode="after")
    def check_ordering(self) -> "Certificate":
        if self.bound_critical is not None and self.V > 0:
            if self.bound_critical < self.bound_offcritical:
                raise ValueError("critical bound below off-critical bound")
        return self


class DropletSpec(BaseModel):
    """Fractional droplet: fraction eta of the excess mass inside a ball of radius r_eta"""

    eta: float = Field(..., ge=0, le=1)
    R: float = Field(..., gt=0)
    r_eta: float = Field(..., ge=0)
    alpha_exact: float
    alpha_asymptotic: Optional[float] = None


class PathProfile(BaseModel):
    """Ordered images from the uniform state with their energy gaps and V-values"""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    images: List[TorusField]
    t: List[float]
    gap: List[float]
    V: List[float]
    stage: List[str] = []
    max_gap: float
    max_index: int
    end_gap: float

    @classmethod
    def assemble(
        cls,
        images: List[TorusField],
        t: List[float],
        gap: List[float],
        V: List[float],
        stage: Optional[List[str]] = None,
    ) -> "PathProfile":
        max_index = max(range(len(gap)), key=lambda i: gap[i])
        return cls(
            images=images,
            t=t,
            gap=gap,
            V=V,
            stage=stage or [],
            max_gap=gap[max_index],
            max_index=max_index,
            end_gap=gap[-1],
        )

    @property
    def is_barrier_path(self) -> bool:
        """Ends below the uniform energy (admissible path)"""
        return self.end_gap < 0

    def table(self) -> Dict[str, List[float]]:
        return {"t": self.t, "gap": self.gap, "V": self.V}

    def summary(self) -> Dict[str, Any]:
        return {
            "images": len(self.images),
            "max_gap": self.max_gap,
            "max_index": self.max_index,
            "max_t": self.t[self.max_index],
            "end_gap": self.end_gap,
        }


class SaddleResult(BaseModel):
    """Critical point found by the climbing-image refinement"""

    model_config = ConfigDict(arbitrary_types_allowed=True, populate_by_name=True)

    field: TorusField
    gap: float
    lagrange_multiplier: float = Field(..., alias="lambda")
    residual: float
    iterations: int
    converged: bool
    path_max_gap: Optional[float] = None
    # sum of interior image gaps per string iteration
    energy_history: List[float] = Field(default_factory=list)

    def summary(self) -> Dict[str, Any]:
        return {
            "gap": self.gap,
            "lambda": self.lagrange_multiplier,
            "residual": self.residual,
            "iterations": self.iterations,
            "converged": self.converged,
        }


class LimitSet(BaseModel):
    """Ball {|x| < radius} centered at the origin"""

    kind: Literal["ball"] = "ball"
    radius: float = Field(..., gt=0)

    def volume(self, d: int, sigma_d: float) -> float:
        return sigma_d / d * self.radius ** d

    def perimeter(self, d: int, sigma_d: float) -> float:
        return sigma_d * self.radius ** (d - 1)


class SweepRow(BaseModel):
    phi: float
    rescaled_gap: float
    limit: float
    abs_error: float
    rel_error: float
    alpha: float
    alpha_predicted: float
    n: int


class SweepSummary(BaseModel):
    rows: List[SweepRow]
    fitted_exponent: float
    monotone: bool

    def table(self) -> Dict[str, List[float]]:
        return {
            "phi": [r.phi for r in self.rows],
            "rescaled_gap": [r.rescaled_gap for r in self.rows],
            "limit": [r.limit for r in self.rows],
            "abs_error": [r.abs_error for r in self.rows],
            "rel_error": [r.rel_error for r in self.rows],
        }

    def summary(self) -> Dict[str, Any]:
        exponent = self.fitted_exponent if math.isfinite(self.fitted_exponent) else None
        return {"fitted_exponent": exponent, "monotone": self.monotone}
