"""One-dimensional search: golden-section extrema, bracketed bisection, bracket expansion"""
import math
from typing import Callable, Optional, Tuple
import numpy as np
from scipy.optimize import bisect
from app.core.config import settings
from app.core.exceptions import ConsistencyError, NoPositiveZeroError

INV_PHI = (math.sqrt(5) - 1) / 2  # 1 / golden ratio
INV_PHI_SQUARE = (3 - math.sqrt(5)) / 2  # 1 / golden ratio^2
_EPS = np.finfo(float).eps


class OptimizeService:
    """Derivative-free scalar searches shared by the reduced model and the constructions"""

    def __init__(self):
        self.golden_tol = settings.GOLDEN_TOL
        self.root_rel_tol = settings.ROOT_REL_TOL
        self.root_max_iter = settings.ROOT_MAX_ITER
        self.bracket_growth = settings.BRACKET_GROWTH

    def golden_min(
        self,
        f: Callable[[float], float],
        a: float,
        b: float,
        tol: Optional[float] = None
    ) -> Tuple[float, float]:
        """
        Golden-section search for the minimum of a unimodal function on [a, b]

        Args:
            f: Function with a single local minimum in [a, b]
            a: Left end
            b: Right end
            tol: Interval width at which to stop

        Returns:
            (argmin, min value); the end points are compared as well
        """
        a, b = min(a, b), max(a, b)
        # absolute tolerances below round-off stall on wide brackets
        tol = max(tol or self.golden_tol, 4 * _EPS * max(abs(a), abs(b)))
        h = b - a
        if h > tol:
            steps = int(math.ceil(math.log(tol / h) / math.log(INV_PHI)))
            c = a + INV_PHI_SQUARE * h
            d = a + INV_PHI * h
            yc = f(c)
            yd = f(d)
            for _ in range(steps - 1):
                if yc < yd:
                    b = d
                    d = c
                    yd = yc
                    h = INV_PHI * h
                    c = a + INV_PHI_SQUARE * h
                    yc = f(c)
                else:
                    a = c
                    c = d
                    yc = yd
                    h = INV_PHI * h
                    d = a + INV_PHI * h
                    yd = f(d)
            if yc < yd:
                b = d
            else:
                a = c

        x = 0.5 * (a + b)
        candidates = [(f(x), x), (f(a), a), (f(b), b)]
        fx, x = min(candidates)
        return x, fx

    def golden_max(
        self,
        f: Callable[[float], float],
        a: float,
        b: float,
        tol: Optional[float] = None
    ) -> Tuple[float, float]:
        """Golden-section search for the maximum; returns (argmax, max value)"""
        x, fx = self.golden_min(lambda s: -f(s), a, b, tol)
        return x, -fx

    def find_root(self, f: Callable[[float], float], a: float, b: float) -> float:
        """
        Bisection on a sign-changing bracket to relative tolerance ROOT_REL_TOL

        Raises:
            NoPositiveZeroError: f(a) and f(b) share a sign
            ConsistencyError: iteration cap reached
        """
        fa, fb = f(a), f(b)
        if fa == 0.0:
            return a
        if fb == 0.0:
            return b
        if np.sign(fa) == np.sign(fb):
            raise NoPositiveZeroError(
                f"no sign change on [{a:.6g}, {b:.6g}] (f={fa:.3g}, {fb:.3g})"
            )
        root, info = bisect(
            f,
            a,
            b,
            xtol=np.finfo(float).tiny,
            rtol=max(self.root_rel_tol, 4 * _EPS),
            maxiter=self.root_max_iter,
            full_output=True,
            disp=False,
        )
        if not info.converged:
            raise ConsistencyError(
                f"bisection did not converge in {self.root_max_iter} iterations"
            )
        return float(root)

    def expand_bracket(
        self,
        f: Callable[[float], float],
        start: float,
        cap: float = math.inf,
        growth: Optional[float] = None
    ) -> Tuple[float, float]:
        """
        Grow [start, start*growth, ...] geometrically until f changes sign

        Expects f(start) > 0. The upper end never passes `cap`.

        Returns:
            (lo, hi) with f(lo) > 0 >= f(hi)
        """
        growth = growth or self.bracket_growth
        lo = start
        hi = min(start * growth, cap)
        for _ in range(self.root_max_iter):
            if f(hi) <= 0:
                return lo, hi
            if hi >= cap:
                break
            lo, hi = hi, min(hi * growth, cap)
        raise NoPositiveZeroError(
            f"no sign change found expanding from {start:.6g} (cap {cap:.6g})"
        )


# Global optimize service instance
optimize_service = OptimizeService()
