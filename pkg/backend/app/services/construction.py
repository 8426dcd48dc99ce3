"""Upper-bound constructions: kink profiles, fractional droplets, seed segment and the barrier path"""
import math
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Tuple
import numpy as np
from loguru import logger
from scipy.integrate import quad
from app.core.config import settings
from app.core.exceptions import DomainError, DropletTooLargeError, NoLowerStateError, NoPositiveZeroError
from app.models.field import TorusField
from app.models.params import ModelParams
from app.models.results import DropletSpec, PathProfile
from app.services.field import field_service, radial_distance
from app.services.potential import double_well
from app.services.reduced_model import reduced_model_service

SQRT2 = math.sqrt(2.0)


def kink(x):
    """Optimal one-dimensional transition -tanh(x / sqrt 2), +1 on the left"""
    return -np.tanh(np.asarray(x, dtype=np.float64) / SQRT2)


def _cutoff(t: np.ndarray) -> np.ndarray:
    """Quintic 1 - 10t^3 + 15t^4 - 6t^5 on [0, 1]; 1 below, 0 above"""
    t = np.clip(t, 0.0, 1.0)
    return 1.0 - t ** 3 * (10.0 - 15.0 * t + 6.0 * t * t)


def clamped_kink(x, R: float):
    """
    Kink that reaches -sgn(x) exactly for |x| >= 2R

    On R <= |x| <= 2R the tail deficit 1 - |kink| is faded out by the
    quintic cutoff, so the profile is odd, monotone and C^2 at |x| = R.
    """
    if R < 1:
        raise DomainError(f"clamping half-width R must be >= 1, got {R}")
    x = np.asarray(x, dtype=np.float64)
    deficit = 1.0 - np.abs(kink(x))
    return -np.sign(x) * (1.0 - deficit * _cutoff((np.abs(x) - R) / R))


class ConstructionService:
    """Explicit trial fields and the concatenated seed/droplet path out of the uniform state"""

    def __init__(self):
        self.max_grid_spacing = settings.MAX_GRID_SPACING
        self.eta_growth = settings.ETA_GROWTH
        self.min_images = settings.MIN_IMAGES
        self.seed_fraction = settings.SEED_IMAGE_FRACTION
        self.kappa_cap = settings.PATH_KAPPA_CAP
        self.min_radius = settings.MIN_CLAMP_RADIUS
        self.fields = field_service
        self.reduced = reduced_model_service
        self._alpha_constants = {}

    # ------------------------------------------------------------------
    # profiles and constants
    # ------------------------------------------------------------------

    def kink_line_energy(self, half_width: float = 30.0) -> float:
        """Energy of the kink on [-half_width, half_width]; tends to c0"""
        density = lambda x: 0.5 * (1.0 / (SQRT2 * math.cosh(x / SQRT2) ** 2)) ** 2 + double_well(
            math.tanh(x / SQRT2)
        )
        value, _ = quad(density, -half_width, half_width, epsabs=1e-13, epsrel=1e-13, limit=200)
        return value

    def alpha_correction_constant(self, d: int) -> float:
        """
        C1' = (d-1) sigma_d * integral of (sgn x + kink(x)) x over the line

        The integrand is even, so twice the half-line integral is used.
        """
        if d not in self._alpha_constants:
            half, _ = quad(lambda x: (1.0 - math.tanh(x / SQRT2)) * x, 0.0, math.inf, epsabs=1e-13)
            self._alpha_constants[d] = (d - 1) * self.reduced.sphere_area(d) * 2.0 * half
        return self._alpha_constants[d]

    def default_radius(self, params: ModelParams) -> float:
        """R = max(MIN_CLAMP_RADIUS, min(0.2 phi^(-1+1/d), 3 phi^(-1/2)))"""
        d, phi = params.d, params.phi
        return max(self.min_radius, min(0.2 * phi ** (-1.0 + 1.0 / d), 3.0 * phi ** -0.5))

    def path_kappa(self, params: ModelParams) -> float:
        return min(params.phi ** (1.0 / 3.0), self.kappa_cap)

    def droplet_radius(self, eta: float, params: ModelParams) -> float:
        """r_eta: a ball of this radius holds the fraction eta of the excess mass phi L^d / 2"""
        d = params.d
        sigma = self.reduced.sphere_area(d)
        return eta ** (1.0 / d) * (params.phi * d / (2.0 * sigma)) ** (1.0 / d) * params.L

    def eta_for_radius(self, r: float, params: ModelParams) -> float:
        d = params.d
        sigma = self.reduced.sphere_area(d)
        return (r / params.L) ** d * 2.0 * sigma / (params.phi * d)

    # ------------------------------------------------------------------
    # trial fields
    # ------------------------------------------------------------------

    def _check_grid(self, params: ModelParams, n: int) -> None:
        h = params.L / n
        if h > self.max_grid_spacing:
            logger.warning(
                f"Grid spacing h = {h:.3g} exceeds {self.max_grid_spacing:g}; "
                "interfaces are under-resolved and gaps biased upward"
            )

    def droplet_state(
        self,
        eta: float,
        R: float,
        params: ModelParams,
        n: int
    ) -> Tuple[TorusField, DropletSpec]:
        """
        Fractional droplet clamped_kink(|x| - r_eta) + alpha

        Args:
            eta: Fraction of the excess mass inside the droplet
            R: Clamping half-width
            params: Model parameters
            n: Cells per axis

        Returns:
            (field, spec) with alpha solved from the mean constraint

        Raises:
            DropletTooLargeError: r_eta > L/4
            DomainError: 0 < r_eta < R
        """
        if not 0.0 <= eta <= 1.0:
            raise DomainError(f"eta must lie in [0, 1], got {eta}")
        d, L = params.d, params.L
        r_eta = self.droplet_radius(eta, params)
        # eta_for_radius(L/4) can come back an ulp above L/4
        if r_eta > L / 4.0 * (1.0 + 1e-12):
            raise DropletTooLargeError(
                f"droplet does not fit: r_eta = {r_eta:.6g} > L/4 = {L / 4.0:.6g}"
            )
        if eta > 0 and r_eta < R * (1.0 - 1e-12):
            raise DomainError(f"droplet radius r_eta = {r_eta:.6g} below clamping width R = {R:.6g}")
        self._check_grid(params, n)

        if eta == 0:
            profile = np.full((n,) * d, -1.0)
        else:
            profile = clamped_kink(radial_distance(d, n, L) - r_eta, R)
        alpha = params.u_bar - float(np.mean(profile))

        asymptotic = None
        if 1.0 - eta >= 100.0 * params.phi ** 2:
            asymptotic = self.alpha_asymptotic(eta, R, params)

        field = TorusField(d=d, n=n, L=L, values=profile + alpha)
        spec = DropletSpec(eta=eta, R=R, r_eta=r_eta, alpha_exact=alpha, alpha_asymptotic=asymptotic)
        return field, spec

    def alpha_asymptotic(self, eta: float, R: float, params: ModelParams) -> float:
        """
        Leading terms phi (1 - eta) - C1' r_eta^(d-2) / L^d of the bulk shift

        Exponentially small terms in R and O(r_eta^(d-4)) terms are dropped,
        so R does not enter the value.

        Raises:
            DomainError: 1 - eta < 100 phi^2, where the expansion breaks down
        """
        phi = params.phi
        if 1.0 - eta < 100.0 * phi ** 2:
            raise DomainError(
                f"alpha expansion needs 1 - eta >> phi^2: 1 - eta = {1.0 - eta:.3g}, "
                f"100 phi^2 = {100.0 * phi ** 2:.3g}"
            )
        d = params.d
        r_eta = self.droplet_radius(eta, params)
        return phi * (1.0 - eta) - self.alpha_correction_constant(d) * r_eta ** (d - 2) / params.volume

    def droplet_gap_asymptotic(self, eta: float, params: ModelParams, off_critical: bool = False) -> float:
        """
        Leading-order gap cbar1 V^((d-1)/d) - 4 phi V (+ 4 phi^(d+1) V^2 / xi^(d+1)), V = eta phi L^d / 2
        """
        d, phi = params.d, params.phi
        volume = eta * phi * params.volume / 2.0
        gap = self.reduced.cbar1(d) * volume ** ((d - 1) / d) - 4.0 * phi * volume
        if not off_critical:
            gap += 4.0 * phi ** (d + 1) * volume ** 2 / params.xi ** (d + 1)
        return gap

    def seed_segment(self, lam: float, R: float, params: ModelParams, n: int) -> TorusField:
        """(1 - lam) u_bar + lam w_R with w_R = clamped_kink(|x| - R) + alpha"""
        if not 0.0 <= lam <= 1.0:
            raise DomainError(f"lambda must lie in [0, 1], got {lam}")
        d, L = params.d, params.L
        profile = clamped_kink(radial_distance(d, n, L) - R, R)
        w_R = profile + (params.u_bar - float(np.mean(profile)))
        return TorusField(d=d, n=n, L=L, values=(1.0 - lam) * params.u_bar + lam * w_R)

    # ------------------------------------------------------------------
    # barrier path
    # ------------------------------------------------------------------

    def _search_eta_end(self, eta_seed: float, R: float, params: ModelParams, n: int) -> float:
        """Smallest eta on a 1.2-geometric ladder whose droplet lies below the uniform energy"""
        d = params.d
        try:
            nu_start, _ = self.reduced.positive_zeros(params.xi, d)
        except NoPositiveZeroError:
            nu_start = (self.reduced.cbar1(d) / 4.0) ** d
        eta_cap = min(1.0, self.eta_for_radius(params.L / 4.0, params))
        eta = min(max(2.0 * nu_start / params.xi ** (d + 1), eta_seed), eta_cap)

        while True:
            field, _ = self.droplet_state(eta, R, params, n)
            gap = self.fields.energy_gap(field, params)
            logger.debug(f"eta search: eta={eta:.6g} gap={gap:.6g}")
            if gap < 0:
                return eta
            if eta >= eta_cap:
                break
            eta = min(eta * self.eta_growth, eta_cap)

        raise NoLowerStateError(
            f"no lower state found along the droplet family up to eta = {eta_cap:.3g}; "
            f"parameters likely subcritical (xi = {params.xi:.4g} <= xi_d = "
            f"{self.reduced.critical_xi(d):.4g})"
        )

    def barrier_path(
        self,
        params: ModelParams,
        n: int,
        R: Optional[float] = None,
        n_images: Optional[int] = None,
        kappa: Optional[float] = None,
        threads: Optional[int] = None
    ) -> PathProfile:
        """
        Seed segment followed by growing droplets, ending below the uniform energy

        Args:
            params: Model parameters
            n: Cells per axis
            R: Clamping half-width, default_radius when omitted
            n_images: Total images (>= MIN_IMAGES)
            kappa: Transition width used for V, min(phi^(1/3), PATH_KAPPA_CAP) by default
            threads: Worker threads for image evaluation

        Returns:
            PathProfile starting at u_bar with uniform parameter spacing

        Raises:
            NoLowerStateError: no droplet up to eta = 1 has a negative gap
        """
        d, phi = params.d, params.phi
        n_images = n_images or self.min_images
        if n_images < self.min_images:
            raise DomainError(f"need at least {self.min_images} images, got {n_images}")
        R = R or self.default_radius(params)
        if R < 1:
            raise DomainError(f"clamping half-width R must be >= 1, got {R}")
        separation = 0.2 * phi ** (-1.0 + 1.0 / d)
        if R > separation:
            logger.warning(
                f"R = {R:.3g} exceeds 0.2 phi^(-1+1/d) = {separation:.3g}; "
                "the seed stage may carry the path maximum"
            )
        kappa = kappa or self.path_kappa(params)

        eta_seed = self.eta_for_radius(R, params)
        eta_end = self._search_eta_end(eta_seed, R, params, n)

        n_seed = max(2, int(round(self.seed_fraction * n_images)))
        lams = np.linspace(0.0, 1.0, n_seed)
        etas = np.linspace(eta_seed, eta_end, n_images - n_seed + 1)[1:]

        def build(job: Tuple[str, float]) -> Tuple[TorusField, float, float]:
            stage, value = job
            if stage == "seed":
                image = self.seed_segment(float(value), R, params, n)
            else:
                image, _ = self.droplet_state(float(value), R, params, n)
            return image, self.fields.energy_gap(image, params), self.fields.plus_phase_volume(image, kappa)

        jobs = [("seed", lam) for lam in lams] + [("droplet", eta) for eta in etas]
        with ThreadPoolExecutor(max_workers=threads or settings.WORKER_COUNT) as pool:
            results = list(pool.map(build, jobs))

        images: List[TorusField] = [r[0] for r in results]
        profile = PathProfile.assemble(
            images=images,
            t=np.linspace(0.0, 1.0, len(images)).tolist(),
            gap=[r[1] for r in results],
            V=[r[2] for r in results],
            stage=[job[0] for job in jobs],
        )
        logger.info(
            f"Barrier path: {len(images)} images, eta in [{eta_seed:.4g}, {eta_end:.4g}], "
            f"max_gap={profile.max_gap:.6g} at image {profile.max_index}, end_gap={profile.end_gap:.6g}"
        )
        return profile


# Global construction service instance
construction_service = ConstructionService()
