"""Reduced sharp-interface model: closed-form constants and the one-dimensional energies f_xi"""
import math
from typing import Optional, Tuple
import numpy as np
from loguru import logger
from scipy.integrate import quad
from scipy.special import gammaln
from app.core.exceptions import (
    CertificateUnavailableError,
    ConsistencyError,
    DomainError,
    NoPositiveZeroError,
)
from app.models.params import ModelParams, Xi, XiTag, check_dimension, normalize_xi
from app.models.results import ReducedCurve
from app.services.optimize import optimize_service
from app.services.potential import double_well, double_well_prime, double_well_second


class ReducedModelService:
    """
    Constants of the sharp-interface picture and the reduced energy

        f_xi(nu) = cbar1 nu^((d-1)/d) - 4 nu + 4 xi^(-(d+1)) nu^2

    with xi = inf dropping the quadratic term. All methods are pure.
    """

    def __init__(self):
        self.optimizer = optimize_service

    # ------------------------------------------------------------------
    # constants
    # ------------------------------------------------------------------

    def interface_cost(self) -> float:
        """Energy c0 = 2 sqrt(2) / 3 of a one-dimensional transition layer"""
        return 2.0 * math.sqrt(2.0) / 3.0

    def interface_cost_quadrature(self) -> float:
        """c0 recomputed as the integral of sqrt(2 G(s)) over [-1, 1]"""
        value, _ = quad(lambda s: math.sqrt(2.0 * double_well(s)), -1.0, 1.0, epsabs=1e-13, epsrel=1e-13)
        return value

    def sphere_area(self, d: int) -> float:
        """Surface area 2 pi^(d/2) / Gamma(d/2) of the unit (d-1)-sphere, via log-gamma"""
        d = check_dimension(d)
        return 2.0 * math.exp(0.5 * d * math.log(math.pi) - gammaln(0.5 * d))

    def cbar1(self, d: int) -> float:
        d = check_dimension(d)
        return self.interface_cost() * self.sphere_area(d) ** (1.0 / d) * d ** ((d - 1) / d)

    def critical_xi(self, d: int) -> float:
        """Crossover xi_d between uniform global minimizer and droplet states"""
        d = check_dimension(d)
        c0 = self.interface_cost()
        sigma = self.sphere_area(d)
        return (
            c0 ** (d / (d + 1))
            * sigma ** (1.0 / (d + 1))
            * (d + 1)
            / (4.0 ** (d / (d + 1)) * d ** (1.0 / (d + 1)))
        )

    def certificate_coefficients(self, phi: float, d: int) -> Tuple[float, float, float]:
        """
        Coefficients C1(phi), C2(phi), C3(phi) of the energy-gap lower bound

        Args:
            phi: Mean offset in (0, 1)
            d: Dimension

        Returns:
            (C1, C2, C3)

        Raises:
            CertificateUnavailableError: 8 phi^(1/3) >= 1, C1 is not real
        """
        d = check_dimension(d)
        if not 0.0 < phi < 1.0:
            raise DomainError(f"phi must lie in (0, 1), got {phi}")
        cube_root = phi ** (1.0 / 3.0)
        if 8.0 * cube_root >= 1.0:
            raise CertificateUnavailableError(
                f"phi too large for certificate: 8 phi^(1/3) = {8.0 * cube_root:.6g} >= 1"
            )
        sigma = self.sphere_area(d)
        c1 = (
            math.sqrt(1.0 - 8.0 * cube_root)
            * (self.interface_cost() - 8.0 * math.sqrt(2.0) * phi ** (2.0 / 3.0))
            * sigma ** (1.0 / d)
            * d ** ((d - 1) / d)
        )
        c2 = (2.0 + cube_root) * double_well_prime(-1.0 + phi) / phi
        c3 = (
            0.5
            * double_well_second(-1.0 + 2.0 * cube_root)
            * (2.0 - 2.0 * cube_root - phi) ** 2
            * (1.0 - 2.0 * cube_root)
        )
        return c1, c2, c3

    def barrier_constant_offcritical(self, d: int) -> Tuple[float, float]:
        """
        Maximizer nu_m and maximum C* of f_inf

        Returns:
            (nu_m, c_star)

        Raises:
            ConsistencyError: closed forms disagree with f_inf(nu_m)
        """
        d = check_dimension(d)
        c0 = self.interface_cost()
        nu_m = (self.cbar1(d) * (d - 1) / (4.0 * d)) ** d
        c_star = self.sphere_area(d) * c0 ** d / d * ((d - 1) / 4.0) ** (d - 1)
        direct = self.reduced_energy(nu_m, XiTag.INFINITE, d)
        if abs(direct - c_star) > 1e-12 * abs(c_star):
            raise ConsistencyError(
                f"C* closed form {c_star:.17g} differs from f_inf(nu_m) = {direct:.17g}"
            )
        return nu_m, c_star

    # ------------------------------------------------------------------
    # reduced energies
    # ------------------------------------------------------------------

    def reduced_energy_general(
        self,
        nu: float,
        d: int,
        c1: float,
        c2: float,
        quadratic: float = 0.0
    ) -> float:
        """c1 nu^((d-1)/d) - c2 nu + quadratic nu^2, the family containing f_xi, f_inf and the certificate profile"""
        if nu < 0:
            raise DomainError(f"nu must be nonnegative, got {nu}")
        if nu == 0:
            return 0.0
        return c1 * nu ** ((d - 1) / d) - c2 * nu + quadratic * nu * nu

    def quadratic_coefficient(self, xi: Xi, d: int) -> float:
        """4 xi^(-(d+1)), exactly 0 for the infinite tag"""
        xi = normalize_xi(xi)
        if xi is XiTag.INFINITE:
            return 0.0
        return 4.0 / xi ** (d + 1)

    def reduced_energy(self, nu: float, xi: Xi, d: int) -> float:
        """
        Reduced energy f_xi(nu)

        Raises:
            DomainError: nu < 0
        """
        d = check_dimension(d)
        return self.reduced_energy_general(
            nu, d, self.cbar1(d), 4.0, self.quadratic_coefficient(xi, d)
        )

    def reduced_energy_phiL(self, nu: float, params: ModelParams) -> float:
        """Reduced energy written with phi and L: the quadratic term is 4 nu^2 / (phi^(d+1) L^d)"""
        d = params.d
        quadratic = 4.0 / (params.phi ** (d + 1) * params.L ** d)
        return self.reduced_energy_general(nu, d, self.cbar1(d), 4.0, quadratic)

    def _energy_array(self, nu: np.ndarray, xi: Xi, d: int) -> np.ndarray:
        quadratic = self.quadratic_coefficient(xi, d)
        return self.cbar1(d) * nu ** ((d - 1) / d) - 4.0 * nu + quadratic * nu * nu

    # ------------------------------------------------------------------
    # zeros and extrema
    # ------------------------------------------------------------------

    def profile_minimum(
        self,
        d: int,
        c1: float,
        c2: float,
        quadratic: float
    ) -> Tuple[float, float]:
        """
        Positive local minimizer of c1 nu^a - c2 nu + quadratic nu^2, a = (d-1)/d

        The profile is concave up to its inflection point and convex beyond
        it, and its derivative is positive at c2 / (2 quadratic), so the
        minimizer lies between the two.

        Returns:
            (nu_min, value)
        """
        if quadratic <= 0:
            raise DomainError("a profile without quadratic term has no positive local minimum")
        a = (d - 1) / d
        inflection = (a * (1 - a) * c1 / (2.0 * quadratic)) ** (1.0 / (2.0 - a))
        upper = c2 / (2.0 * quadratic)
        f = lambda nu: self.reduced_energy_general(nu, d, c1, c2, quadratic)
        if inflection >= upper:
            return upper, f(upper)
        return self.optimizer.golden_min(f, inflection, upper)

    def profile_zeros(
        self,
        d: int,
        c1: float,
        c2: float,
        quadratic: float = 0.0
    ) -> Tuple[float, Optional[float]]:
        """
        Positive zeros of c1 nu^a - c2 nu + quadratic nu^2

        The first zero is bracketed by geometric expansion from the maximizer
        of the profile without quadratic term, capped at the local minimizer.

        Returns:
            (first zero, second zero); the second is None when quadratic == 0

        Raises:
            NoPositiveZeroError: the profile stays nonnegative
        """
        f = lambda nu: self.reduced_energy_general(nu, d, c1, c2, quadratic)
        start = ((d - 1) * c1 / (d * c2)) ** d
        if quadratic == 0.0:
            lo, hi = self.optimizer.expand_bracket(f, start)
            return self.optimizer.find_root(f, lo, hi), None

        nu_min, f_min = self.profile_minimum(d, c1, c2, quadratic)
        if f_min >= 0:
            raise NoPositiveZeroError(
                f"no positive zero: local minimum {f_min:.3g} >= 0 at nu = {nu_min:.6g}"
            )
        lo, hi = self.optimizer.expand_bracket(f, start, cap=nu_min)
        first = self.optimizer.find_root(f, lo, hi)
        second = self.optimizer.find_root(f, nu_min, c2 / quadratic)
        return first, second

    def reduced_minimum(self, xi: Xi, d: int) -> Tuple[float, float]:
        """Positive local minimizer (nu_min, f_min) of f_xi, finite xi only"""
        d = check_dimension(d)
        xi = normalize_xi(xi)
        if xi is XiTag.INFINITE:
            raise DomainError("f_inf has no positive local minimum")
        return self.profile_minimum(d, self.cbar1(d), 4.0, self.quadratic_coefficient(xi, d))

    def positive_zeros(self, xi: Xi, d: int) -> Tuple[float, Optional[float]]:
        """
        Positive zeros of f_xi

        Returns:
            (first zero, second zero); the second is None for xi = inf

        Raises:
            NoPositiveZeroError: xi <= xi_d
        """
        d = check_dimension(d)
        xi = normalize_xi(xi)
        if xi is not XiTag.INFINITE and xi <= self.critical_xi(d):
            raise NoPositiveZeroError(
                f"no positive zero: xi = {xi:.6g} <= xi_d = {self.critical_xi(d):.6g}"
            )
        return self.profile_zeros(d, self.cbar1(d), 4.0, self.quadratic_coefficient(xi, d))

    def barrier_constant_critical(self, xi: Xi, d: int) -> Tuple[float, float]:
        """
        First positive zero nu_xi of f_xi and C_xi = max of f_xi on [0, nu_xi]

        Raises:
            NoPositiveZeroError: xi <= xi_d
        """
        d = check_dimension(d)
        xi = normalize_xi(xi)
        nu_xi, _ = self.positive_zeros(xi, d)
        _, c_xi = self.optimizer.golden_max(
            lambda nu: self.reduced_energy(nu, xi, d), 0.0, nu_xi
        )
        return nu_xi, max(c_xi, 0.0)

    def reduced_curve(self, xi: Xi, d: int, samples: int = 1000) -> ReducedCurve:
        """
        Sample f_xi on [0, nu_hi] and locate its first zero and maximum

        The range covers both zeros when they exist and xi^(d+1) otherwise.
        """
        d = check_dimension(d)
        xi = normalize_xi(xi)
        if samples < 2:
            raise DomainError(f"need at least 2 samples, got {samples}")

        nu_zero: Optional[float] = None
        try:
            nu_zero, second = self.positive_zeros(xi, d)
            upper = 1.25 * second if second is not None else 1.5 * nu_zero
        except NoPositiveZeroError:
            upper = xi ** (d + 1)

        nu = np.linspace(0.0, upper, samples)
        f = self._energy_array(nu, xi, d)
        f[0] = 0.0

        if nu_zero is not None:
            nu_max, f_max = self.optimizer.golden_max(
                lambda s: self.reduced_energy(s, xi, d), 0.0, nu_zero
            )
        else:
            index = int(np.argmax(f))
            nu_max, f_max = float(nu[index]), float(f[index])

        logger.debug(f"Reduced curve xi={xi} d={d}: nu_zero={nu_zero}, f_max={f_max:.6g}")
        return ReducedCurve(
            xi=xi,
            d=d,
            nu=nu.tolist(),
            f=f.tolist(),
            nu_zero=nu_zero,
            nu_max=nu_max,
            f_max=f_max,
        )


# Global reduced model service instance
reduced_model_service = ReducedModelService()
