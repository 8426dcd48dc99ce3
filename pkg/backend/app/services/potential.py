"""Double-well potential G(u) = (1 - u^2)^2 / 4 and its derivatives, vectorized over numpy arrays"""
from typing import Union
import numpy as np

ArrayLike = Union[float, np.ndarray]


def double_well(u: ArrayLike) -> ArrayLike:
    return 0.25 * (1.0 - u * u) ** 2


def double_well_prime(u: ArrayLike) -> ArrayLike:
    """G'(u) = -u (1 - u^2)"""
    return -u * (1.0 - u * u)


def double_well_second(u: ArrayLike) -> ArrayLike:
    """G''(u) = 3u^2 - 1"""
    return 3.0 * u * u - 1.0
