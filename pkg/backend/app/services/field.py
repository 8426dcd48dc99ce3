"""Discretized order parameter on the d-torus: energy, energy gap, partition weights, certificates"""
from typing import Optional, Tuple
import numpy as np
from loguru import logger
from app.core.config import settings
from app.core.exceptions import (
    DomainError,
    MeanConstraintError,
    NoPositiveZeroError,
    RebalanceError,
)
from app.models.field import TorusField
from app.models.params import ModelParams
from app.models.results import Certificate
from app.services.potential import double_well, double_well_prime, double_well_second
from app.services.reduced_model import reduced_model_service


def smoothstep(t: np.ndarray) -> np.ndarray:
    """3t^2 - 2t^3 on [0, 1], clamped to 0 below and 1 above"""
    t = np.clip(t, 0.0, 1.0)
    return t * t * (3.0 - 2.0 * t)


def radial_distance(d: int, n: int, L: float) -> np.ndarray:
    """
    Torus-minimal distance of every cell to the center cell n//2

    Offsets along each axis are wrapped into [-n/2, n/2).
    """
    h = L / n
    center = n // 2
    offsets = (np.arange(n) - center + n // 2) % n - n // 2
    squared = np.zeros((n,) * d)
    for axis in range(d):
        shape = [1] * d
        shape[axis] = n
        squared = squared + (offsets.reshape(shape) * h) ** 2
    return np.sqrt(squared)


class FieldService:
    """Energy functionals of torus fields and the lower-bound machinery built on them"""

    def __init__(self):
        self.mean_tol = settings.MEAN_TOL
        self.epsilon_0 = settings.EPSILON_0
        self.kappa_phi_ratio = settings.KAPPA_PHI_RATIO
        self.energy_ratio_bound = settings.ENERGY_RATIO_BOUND
        self.volume_regularity_factor = settings.VOLUME_REGULARITY_FACTOR
        self.reduced = reduced_model_service

    def potential(self, u: float) -> Tuple[float, float, float]:
        """(G(u), G'(u), G''(u)) of the double well"""
        return float(double_well(u)), float(double_well_prime(u)), float(double_well_second(u))

    def uniform_state(self, params: ModelParams, n: int) -> TorusField:
        if n < 2:
            raise DomainError(f"need at least 2 cells per axis, got {n}")
        return TorusField.constant(params.d, n, params.L, params.u_bar)

    def uniform_energy(self, params: ModelParams) -> Tuple[float, float]:
        """
        Energy of the uniform state

        Returns:
            (L^d G(-1+phi), its expansion phi^2 L^d - phi^3 L^d + phi^4 L^d / 4)
        """
        phi, volume = params.phi, params.volume
        exact = volume * double_well(params.u_bar)
        expansion = volume * (phi ** 2 - phi ** 3 + 0.25 * phi ** 4)
        return exact, expansion

    # ------------------------------------------------------------------
    # discrete operators
    # ------------------------------------------------------------------

    def laplacian(self, u: TorusField) -> np.ndarray:
        """Periodic (2d+1)-point Laplacian"""
        values = u.values
        result = -2.0 * u.d * values
        for axis in range(u.d):
            result = result + np.roll(values, 1, axis=axis) + np.roll(values, -1, axis=axis)
        return result / (u.h * u.h)

    def gradient_energy(self, u: TorusField) -> float:
        """h^d sum over bonds of (1/2)((u_{i+e} - u_i) / h)^2, each bond once"""
        values = u.values
        total = 0.0
        for axis in range(u.d):
            diff = np.roll(values, -1, axis=axis) - values
            total += float(np.sum(diff * diff))
        return 0.5 * total * u.h ** (u.d - 2)

    def energy(self, u: TorusField) -> float:
        """Discrete Cahn-Hilliard energy with forward differences"""
        return self.gradient_energy(u) + u.cell_volume * float(np.sum(double_well(u.values)))

    def energy_gradient(self, u: TorusField) -> np.ndarray:
        """Derivative of the discrete energy with respect to every cell value"""
        return u.cell_volume * (-self.laplacian(u) + double_well_prime(u.values))

    def project_mean(self, u: TorusField, target: float) -> TorusField:
        """Shift all values by the discrete mean defect"""
        return u.with_values(u.values - (u.mean() - target))

    def check_mean(self, u: TorusField, params: ModelParams, tol: Optional[float] = None) -> None:
        """
        Raises:
            MeanConstraintError: |mean(u) - (-1+phi)| > tol
        """
        tol = self.mean_tol if tol is None else tol
        measured = u.mean()
        if abs(measured - params.u_bar) > tol:
            raise MeanConstraintError(measured, params.u_bar, tol)

    def energy_gap(self, u: TorusField, params: ModelParams) -> float:
        """
        E(u) - E(u_bar) written as the integral of the nonnegative-near-u_bar density

            e(u) = |grad u|^2 / 2 + G(u) - G(u_bar) - G'(u_bar)(u - u_bar)

        Raises:
            MeanConstraintError: mean(u) differs from -1+phi beyond MEAN_TOL
        """
        self.check_mean(u, params)
        u_bar = params.u_bar
        bulk = (
            double_well(u.values)
            - double_well(u_bar)
            - double_well_prime(u_bar) * (u.values - u_bar)
        )
        return self.gradient_energy(u) + u.cell_volume * float(np.sum(bulk))

    # ------------------------------------------------------------------
    # partition of unity and V
    # ------------------------------------------------------------------

    def partition_weights(self, u, kappa: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Smooth partition of unity (w1, w2, w3) of the real line

        w1 = 1 below -1+kappa and 0 above -1+2kappa; w3 = 0 below 1-2kappa
        and 1 above 1-kappa; w2 fills the rest.
        """
        if not 0.0 < kappa < 0.5:
            raise DomainError(f"kappa must lie in (0, 1/2), got {kappa}")
        u = np.asarray(u, dtype=np.float64)
        w1 = 1.0 - smoothstep((u - (-1.0 + kappa)) / kappa)
        w3 = smoothstep((u - (1.0 - 2.0 * kappa)) / kappa)
        w2 = 1.0 - w1 - w3
        return w1, w2, w3

    def plus_phase_volume(self, u: TorusField, kappa: float) -> float:
        """V(u) = integral of w3(u), a smooth volume of the +1 phase"""
        _, _, w3 = self.partition_weights(u.values, kappa)
        return u.cell_volume * float(np.sum(w3))

    # ------------------------------------------------------------------
    # truncation and certificates
    # ------------------------------------------------------------------

    def truncate_excess(self, u: TorusField, params: ModelParams, kappa: float) -> TorusField:
        """
        Clamp values above 1+kappa and restore the mass on the low phase

        On {u > u_bar} values are capped at 1+kappa; on {u <= u_bar} every
        value moves to u + lam (u_bar - u) with the single lam in [0, 1]
        that restores the mean. V, the values in [u_bar, 1+kappa] and the
        gradient bonds are not increased.

        Raises:
            DomainError: phi > kappa / KAPPA_PHI_RATIO
            RebalanceError: no mass on {u <= u_bar} to rebalance with
        """
        if params.phi > kappa / self.kappa_phi_ratio:
            raise DomainError(
                f"truncation needs phi <= kappa / {self.kappa_phi_ratio:g}: "
                f"phi = {params.phi:g}, kappa = {kappa:g}"
            )
        self.check_mean(u, params)
        u_bar = params.u_bar
        cap = 1.0 + kappa
        values = u.values
        high = values > u_bar
        clamped = np.where(high, np.minimum(values, cap), values)
        removed = float(np.sum(values - clamped))
        if removed == 0.0:
            return u.copy()

        low = ~high
        capacity = float(np.sum(u_bar - values[low]))
        if capacity <= 0.0:
            raise RebalanceError(
                f"cannot rebalance: removed mass {removed * u.cell_volume:.6g} "
                "but {u <= u_bar} carries no deficit"
            )
        # mean is linear in lam
        lam = min(removed / capacity, 1.0)
        clamped[low] = values[low] + lam * (u_bar - values[low])
        logger.debug(f"Truncated {int(np.sum(values > cap))} cells, rebalance lam={lam:.6g}")
        return u.with_values(clamped)

    def lower_bound_certificate(
        self,
        u: TorusField,
        params: ModelParams,
        kappa: Optional[float] = None
    ) -> Certificate:
        """
        Evaluate the energy-gap lower bound at u after truncation

        Args:
            u: Field with mean -1+phi
            params: Model parameters
            kappa: Transition width, phi^(1/3) unless overridden

        Returns:
            Certificate with both bounds; the critical bound is only reported
            when its side conditions hold

        Raises:
            CertificateUnavailableError: 8 phi^(1/3) >= 1
        """
        d, phi = params.d, params.phi
        c1, c2, c3 = self.reduced.certificate_coefficients(phi, d)
        kappa = phi ** (1.0 / 3.0) if kappa is None else kappa
        truncated = self.truncate_excess(u, params, kappa)
        V = self.plus_phase_volume(truncated, kappa)

        bound_off = c1 * V ** ((d - 1) / d) - phi * c2 * V
        hypotheses_ok = V <= self.epsilon_0 * params.volume

        uniform, _ = self.uniform_energy(params)
        energy_ok = self.energy(truncated) <= self.energy_ratio_bound * uniform
        volume_ok = V >= self.volume_regularity_factor * phi ** (1 - d)
        critical_ok = hypotheses_ok and energy_ok and volume_ok

        reasons = []
        if not hypotheses_ok:
            reasons.append(f"V = {V:.6g} exceeds eps0 L^d = {self.epsilon_0 * params.volume:.6g}")
        if not energy_ok:
            reasons.append(f"E(u) > {self.energy_ratio_bound:g} E(u_bar)")
        if not volume_ok:
            reasons.append(
                f"V = {V:.6g} below {self.volume_regularity_factor:g} phi^(1-d) "
                f"= {self.volume_regularity_factor * phi ** (1 - d):.6g}"
            )
        if critical_ok:
            bound_critical: Optional[float] = bound_off + c3 * V * V / params.volume
        else:
            bound_critical = None
            if hypotheses_ok:
                logger.warning(f"Critical certificate withheld: {'; '.join(reasons)}")

        return Certificate(
            kappa=kappa,
            V=V,
            C1=c1,
            C2=c2,
            C3=c3,
            bound_offcritical=bound_off,
            bound_critical=bound_critical,
            hypotheses_ok=hypotheses_ok,
            critical_conditions_ok=critical_ok,
            reason="; ".join(reasons) if reasons else "all hypotheses hold",
        )

    def certified_barrier_lower_bound(self, params: ModelParams, critical: bool = False) -> float:
        """
        Lower bound on the barrier implied by the certificates

        Off-critical: sup over v of C1 v^((d-1)/d) - phi C2 v, attained at
        v* = ((d-1) C1 / (d phi C2))^d with value C1 v*^((d-1)/d) / d.
        Critical: phi^(1-d) times the maximum of
        C1 nu^((d-1)/d) - C2 nu + C3 xi^(-(d+1)) nu^2 up to its first zero.

        Raises:
            CertificateUnavailableError: 8 phi^(1/3) >= 1
            NoPositiveZeroError: critical profile never becomes negative
        """
        d, phi = params.d, params.phi
        c1, c2, c3 = self.reduced.certificate_coefficients(phi, d)
        if not critical:
            v_star = ((d - 1) * c1 / (d * phi * c2)) ** d
            return c1 * v_star ** ((d - 1) / d) / d

        quadratic = c3 / params.xi ** (d + 1)
        try:
            first, _ = self.reduced.profile_zeros(d, c1, c2, quadratic)
        except NoPositiveZeroError as exc:
            raise NoPositiveZeroError(
                f"critical certificate profile has no lower state at xi = {params.xi:.6g}"
            ) from exc
        _, peak = self.reduced.optimizer.golden_max(
            lambda nu: self.reduced.reduced_energy_general(nu, d, c1, c2, quadratic),
            0.0,
            first,
        )
        return phi ** (1 - d) * peak

    def isoperimetric_profile(self, v: float, params: ModelParams) -> float:
        """
        Minimal perimeter sigma_d^(1/d) d^((d-1)/d) v^((d-1)/d) of a volume v on the torus

        Raises:
            DomainError: v outside [0, eps0 L^d], where balls stop being optimal
        """
        d = params.d
        limit = self.epsilon_0 * params.volume
        if v < 0 or v > limit:
            raise DomainError(
                f"isoperimetric profile valid for 0 <= v <= eps0 L^d = {limit:.6g}, got v = {v:.6g}"
            )
        return self.reduced.sphere_area(d) ** (1.0 / d) * d ** ((d - 1) / d) * v ** ((d - 1) / d)


# Global field service instance
field_service = FieldService()
