"""Scalar order parameter sampled on a uniform periodic grid"""
from typing import Tuple
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


class TorusField(BaseModel):
    """
    Order parameter on the torus [-L/2, L/2]^d with n cells per axis

    `values` is a row-major array of shape (n,)*d; indices wrap periodically.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    d: int = Field(..., ge=2)
    n: int = Field(..., ge=2)
    L: float = Field(..., gt=0)
    values: np.ndarray

    @model_validator(mode="after")
    def check_values(self) -> "TorusField":
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        expected = (self.n,) * self.d
        if values.shape != expected:
            raise ValueError(f"values shape {values.shape} does not match {expected}")
        if not np.all(np.isfinite(values)):
            raise ValueError("field values must be finite")
        self.values = values
        return self

    @classmethod
    def constant(cls, d: int, n: int, L: float, value: float) -> "TorusField":
        return cls(d=d, n=n, L=L, values=np.full((n,) * d, float(value)))

    @property
    def h(self) -> float:
        return self.L / self.n

    @property
    def cell_volume(self) -> float:
        return self.h ** self.d

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.values.shape

    def mean(self) -> float:
        return float(np.mean(self.values))

    def with_values(self, values: np.ndarray) -> "TorusField":
        """New field on the same grid"""
        return TorusField(d=self.d, n=self.n, L=self.L, values=values)

    def copy(self) -> "TorusField":
        return self.with_values(self.values.copy())
