"""Sharp-interface limit numerics on the rescaled box: rescaled gap, limit functional, recovery fields, sweeps"""
import math
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence, Tuple
import numpy as np
from loguru import logger
from app.core.config import settings
from app.core.exceptions import DomainError, DropletTooLargeError, MeanConstraintError
from app.models.field import TorusField
from app.models.params import RescaledParams, Xi, XiTag, normalize_xi
from app.models.results import LimitSet, SweepRow, SweepSummary
from app.services.construction import clamped_kink
from app.services.field import radial_distance
from app.services.potential import double_well
from app.services.reduced_model import reduced_model_service


class GammaService:
    """Recovery-sequence side of the sharp-interface limit for ball-shaped limit sets"""

    def __init__(self):
        self.spacing_factor = settings.RESCALED_SPACING_FACTOR
        self.mean_tol = settings.MEAN_TOL
        self.reduced = reduced_model_service

    def grid_cells(self, rp: RescaledParams) -> int:
        """Smallest even n with box spacing <= RESCALED_SPACING_FACTOR * phi"""
        n = int(math.ceil(rp.domain_side / (self.spacing_factor * rp.phi)))
        return n + (n % 2)

    def rescaled_gap(self, u: TorusField, rp: RescaledParams) -> float:
        """
        Integral over the box of phi/2 |grad u|^2 + (G(u) - G(-1+phi)) / phi

        Raises:
            MeanConstraintError: mean(u) differs from -1+phi beyond MEAN_TOL
        """
        if not math.isclose(u.L, rp.domain_side, rel_tol=1e-12) or u.d != rp.d:
            raise DomainError(
                f"field lives on side {u.L:.6g} in d={u.d}, expected side {rp.domain_side:.6g} in d={rp.d}"
            )
        measured = u.mean()
        if abs(measured - rp.u_bar) > self.mean_tol:
            raise MeanConstraintError(measured, rp.u_bar, self.mean_tol)

        phi = rp.phi
        bonds = 0.0
        for axis in range(u.d):
            diff = np.roll(u.values, -1, axis=axis) - u.values
            bonds += float(np.sum(diff * diff))
        gradient = 0.5 * phi * bonds * u.h ** (u.d - 2)
        bulk = u.cell_volume * float(np.sum(double_well(u.values) - double_well(rp.u_bar))) / phi
        return gradient + bulk

    def unrescaled(self, u: TorusField, rp: RescaledParams) -> TorusField:
        """Same cell values on the torus of side L = domain_side / phi"""
        return TorusField(d=u.d, n=u.n, L=rp.L, values=u.values)

    def limit_functional(self, C: LimitSet, xi: Xi, d: int) -> float:
        """c0 Per(C) - 4|C| + 4 xi^(-(d+1)) |C|^2; the last term vanishes for xi = inf"""
        sigma = self.reduced.sphere_area(d)
        volume = C.volume(d, sigma)
        value = self.reduced.interface_cost() * C.perimeter(d, sigma) - 4.0 * volume
        xi = normalize_xi(xi)
        if xi is not XiTag.INFINITE:
            value += 4.0 * volume ** 2 / xi ** (d + 1)
        return value

    def mass_consistent_ball(self, xi: float, d: int) -> LimitSet:
        """Ball with |C| = xi^(d+1) / 2"""
        sigma = self.reduced.sphere_area(d)
        return LimitSet(radius=(d * xi ** (d + 1) / (2.0 * sigma)) ** (1.0 / d))

    def recovery_alpha_prediction(self, C: LimitSet, rp: RescaledParams) -> float:
        """phi (1 - 2|C| / xi^(d+1))"""
        volume = C.volume(rp.d, self.reduced.sphere_area(rp.d))
        return rp.phi * (1.0 - 2.0 * volume / rp.xi ** (rp.d + 1))

    def recovery_state(
        self,
        C: LimitSet,
        rp: RescaledParams,
        n: Optional[int] = None
    ) -> Tuple[TorusField, float]:
        """
        Recovery field clamped_kink(dist(x)/phi, R=phi^(-1/2)) + alpha on the box

        dist is the signed distance to the sphere of radius r (negative
        inside); periodic wrap is ignored since the ball keeps a margin.

        Returns:
            (field, alpha)

        Raises:
            DropletTooLargeError: 2r + 4 phi^(1/2) >= domain side
        """
        phi, d, side = rp.phi, rp.d, rp.domain_side
        if 2.0 * C.radius + 4.0 * math.sqrt(phi) >= side:
            raise DropletTooLargeError(
                f"ball too large for rescaled domain: 2r + 4 phi^(1/2) = "
                f"{2.0 * C.radius + 4.0 * math.sqrt(phi):.6g} >= side {side:.6g}"
            )
        n = n or self.grid_cells(rp)
        if side / n > self.spacing_factor * phi:
            logger.warning(f"Rescaled spacing {side / n:.3g} exceeds {self.spacing_factor:g} phi; interface under-resolved")
        signed = radial_distance(d, n, side) - C.radius
        profile = clamped_kink(signed / phi, phi ** -0.5)
        alpha = rp.u_bar - float(np.mean(profile))
        return TorusField(d=d, n=n, L=side, values=profile + alpha), alpha

    def recovery_field(self, C: LimitSet, rp: RescaledParams, n: Optional[int] = None) -> TorusField:
        field, _ = self.recovery_state(C, rp, n)
        return field

    def _sweep_row(self, C: LimitSet, rp: RescaledParams) -> SweepRow:
        field, alpha = self.recovery_state(C, rp)
        gap = self.rescaled_gap(field, rp)
        limit = self.limit_functional(C, rp.xi, rp.d)
        error = abs(gap - limit)
        row = SweepRow(
            phi=rp.phi,
            rescaled_gap=gap,
            limit=limit,
            abs_error=error,
            rel_error=error / abs(limit) if limit != 0 else math.inf,
            alpha=alpha,
            alpha_predicted=self.recovery_alpha_prediction(C, rp),
            n=field.n,
        )
        logger.info(f"Sweep phi={rp.phi:g} n={field.n}: gap={gap:.8g} limit={limit:.8g} rel_error={row.rel_error:.4g}")
        return row

    def convergence_sweep(
        self,
        C: LimitSet,
        xi: float,
        d: int,
        phis: Sequence[float],
        threads: Optional[int] = None
    ) -> SweepSummary:
        """
        Rescaled gap of the recovery field against the limit functional along decreasing phi

        A non-monotone error sequence is flagged (grid resolution suspect)
        and reported in the summary, not raised.

        Raises:
            DomainError: phis not strictly decreasing
        """
        phis = [float(p) for p in phis]
        if not phis or any(b >= a for a, b in zip(phis, phis[1:])):
            raise DomainError(f"phis must be non-empty and strictly decreasing, got {phis}")
        params = [RescaledParams(d=d, phi=phi, xi=xi) for phi in phis]
        with ThreadPoolExecutor(max_workers=threads or settings.WORKER_COUNT) as pool:
            rows: List[SweepRow] = list(pool.map(lambda rp: self._sweep_row(C, rp), params))

        errors = np.array([row.abs_error for row in rows])
        monotone = bool(np.all(np.diff(errors) < 0))
        if not monotone:
            logger.warning(f"Non-monotone sweep errors {errors.tolist()}: grid resolution suspect")
        if len(rows) >= 2 and np.all(errors > 0):
            exponent = float(np.polyfit(np.log(phis), np.log(errors), 1)[0])
        else:
            exponent = math.nan
        return SweepSummary(rows=rows, fitted_exponent=exponent, monotone=monotone)


# Global gamma service instance
gamma_service = GammaService()
