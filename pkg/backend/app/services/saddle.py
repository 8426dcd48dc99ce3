"""Mass-constrained string method and climbing-image refinement toward the mountain-pass saddle"""
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Tuple
import numpy as np
from loguru import logger
from tenacity import Retrying, retry_if_exception_type, stop_after_attempt
from app.core.config import settings
from app.core.exceptions import DomainError, UnstableStepError
from app.models.field import TorusField
from app.models.params import ModelParams
from app.models.results import PathProfile, SaddleResult
from app.services.construction import construction_service
from app.services.field import field_service
from app.services.potential import double_well_prime

# Order parameters stay near [-1, 1]; beyond this the explicit scheme has diverged
DIVERGENCE_BOUND = 1e3


class SaddleService:
    """
    Relaxes a path out of the uniform state toward the minimax path

    The dynamics is the constrained Allen-Cahn flow (L^2 geometry), whose
    saddle points coincide with those of the Cahn-Hilliard flow.
    """

    def __init__(self):
        self.max_iter = settings.STRING_MAX_ITER
        self.tol = settings.STRING_TOL
        self.step_fraction = settings.STEP_FRACTION
        self.patience = settings.UNSTABLE_PATIENCE
        self.rise_tolerance = settings.UNSTABLE_RISE
        self.step_halvings = settings.STEP_HALVINGS
        self.climb_max_iter = settings.CLIMB_MAX_ITER
        self.fields = field_service
        self.constructions = construction_service

    # ------------------------------------------------------------------
    # forces and diagnostics
    # ------------------------------------------------------------------

    def constrained_force(self, u: TorusField) -> TorusField:
        """Laplacian(u) - G'(u) + mean(G'(u)): minus the mean-projected energy gradient per cell volume"""
        g1 = double_well_prime(u.values)
        return u.with_values(self.fields.laplacian(u) - g1 + float(np.mean(g1)))

    def euler_lagrange_residual(self, u: TorusField) -> Tuple[float, float]:
        """
        Returns:
            (lambda, residual) with lambda = mean G'(u) and residual the grid
            L^2 norm of -Laplacian(u) + G'(u) - lambda
        """
        lam = float(np.mean(double_well_prime(u.values)))
        force = self.constrained_force(u)
        return lam, self._norm(force.values, u)

    def default_step(self, u: TorusField) -> float:
        """Explicit step STEP_FRACTION h^2 / d, below the stability limit h^2 / (2d)"""
        return self.step_fraction * u.h * u.h / u.d

    @staticmethod
    def _inner(a: np.ndarray, b: np.ndarray, u: TorusField) -> float:
        return u.cell_volume * float(np.sum(a * b))

    def _norm(self, a: np.ndarray, u: TorusField) -> float:
        return float(np.sqrt(self._inner(a, a, u)))

    @staticmethod
    def _bounded(values: np.ndarray) -> bool:
        return bool(np.all(np.isfinite(values))) and float(np.max(np.abs(values))) <= DIVERGENCE_BOUND

    # ------------------------------------------------------------------
    # string method
    # ------------------------------------------------------------------

    def _reparameterize(self, images: List[np.ndarray], grid: TorusField) -> Tuple[List[np.ndarray], np.ndarray]:
        """Redistribute images to equal L^2 arc length by piecewise-linear interpolation"""
        lengths = [self._norm(b - a, grid) for a, b in zip(images, images[1:])]
        s = np.concatenate([[0.0], np.cumsum(lengths)])
        if s[-1] == 0.0:
            return images, np.linspace(0.0, 1.0, len(images))
        s = s / s[-1]
        targets = np.linspace(0.0, 1.0, len(images))
        result = [images[0]]
        for target in targets[1:-1]:
            k = min(int(np.searchsorted(s, target, side="right")) - 1, len(images) - 2)
            width = s[k + 1] - s[k]
            w = (target - s[k]) / width if width > 0 else 0.0
            result.append((1.0 - w) * images[k] + w * images[k + 1])
        result.append(images[-1])
        return result, targets

    def _tangent(self, before: np.ndarray, after: np.ndarray, grid: TorusField) -> np.ndarray:
        tau = after - before
        norm = self._norm(tau, grid)
        return tau / norm if norm > 0 else tau

    def _relax(
        self,
        initial: PathProfile,
        params: ModelParams,
        step: float,
        max_iter: int,
        tol: float,
        pool: ThreadPoolExecutor
    ) -> Tuple[List[np.ndarray], np.ndarray, int, bool, List[float]]:
        grid = initial.images[0]
        u_bar = params.u_bar
        images = [image.values.copy() for image in initial.images]
        t = np.asarray(initial.t)

        def evaluate(values: np.ndarray) -> Tuple[np.ndarray, float]:
            if not self._bounded(values):
                raise UnstableStepError(f"diverging image values with step {step:.3g}; use a smaller step")
            u = grid.with_values(values)
            return self.constrained_force(u).values, self.fields.energy_gap(u, params)

        lowest_max = np.inf
        rise_margin = self.rise_tolerance * abs(initial.max_gap)
        rising = 0
        history: List[float] = []
        iteration = 0
        converged = False
        while iteration < max_iter:
            results = list(pool.map(evaluate, images[1:-1]))
            forces = [r[0] for r in results]
            max_gap = max(r[1] for r in results)
            history.append(float(sum(r[1] for r in results)))

            perpendicular = 0.0
            for k, force in enumerate(forces, start=1):
                tau = self._tangent(images[k - 1], images[k + 1], grid)
                normal = force - self._inner(force, tau, grid) * tau
                perpendicular = max(perpendicular, self._norm(normal, grid))
            if perpendicular <= tol:
                converged = True
                break

            # small rises above the lowest maximum so far are images settling at the saddle
            lowest_max = min(lowest_max, max_gap)
            if max_gap > lowest_max + rise_margin:
                rising += 1
                if rising >= self.patience:
                    raise UnstableStepError(
                        f"path maximum stayed above its running minimum {lowest_max:.6g} "
                        f"for {rising} consecutive iterations with step {step:.3g}; use a smaller step"
                    )
            else:
                rising = 0

            for k, force in enumerate(forces, start=1):
                images[k] = images[k] + step * force
            images, t = self._reparameterize(images, grid)
            for k in range(1, len(images) - 1):
                images[k] = self.fields.project_mean(grid.with_values(images[k]), u_bar).values

            iteration += 1
            if iteration % 500 == 0:
                logger.debug(
                    f"string iteration {iteration}: max_gap={max_gap:.8g} perp_force={perpendicular:.3g}"
                )
        return images, t, iteration, converged, history

    def _climb(
        self,
        images: List[np.ndarray],
        index: int,
        grid: TorusField,
        params: ModelParams,
        step: float,
        tol: float
    ) -> Tuple[TorusField, int]:
        """Climbing image: force with its tangential component reversed, neighbours fixed"""
        if index == 0 or index == len(images) - 1:
            return grid.with_values(images[index]), 0
        tau = self._tangent(images[index - 1], images[index + 1], grid)
        values = images[index].copy()
        for iteration in range(self.climb_max_iter):
            u = grid.with_values(values)
            force = self.constrained_force(u).values
            if self._norm(force, grid) <= tol:
                return u, iteration
            climbing = force - 2.0 * self._inner(force, tau, grid) * tau
            values = values + step * climbing
            if not self._bounded(values):
                raise UnstableStepError(f"climbing image diverged with step {step:.3g}")
            values = self.fields.project_mean(u.with_values(values), params.u_bar).values
        return grid.with_values(values), self.climb_max_iter

    def string_relax(
        self,
        initial: PathProfile,
        params: ModelParams,
        max_iter: Optional[int] = None,
        step: Optional[float] = None,
        tol: Optional[float] = None,
        threads: Optional[int] = None
    ) -> Tuple[PathProfile, SaddleResult]:
        """
        Relax a path with fixed end points and refine its highest image to a saddle

        Args:
            initial: Path with gap[0] = 0 and end_gap < 0
            params: Model parameters
            max_iter: Iteration cap, STRING_MAX_ITER by default
            step: Explicit step, STEP_FRACTION h^2 / d by default; halved on instability
            tol: Force tolerance for both the string and the climbing image
            threads: Worker threads for per-image forces

        Returns:
            (relaxed path, saddle result)

        Raises:
            UnstableStepError: instability persists after STEP_HALVINGS halvings
        """
        if abs(initial.gap[0]) > 1e-10:
            raise DomainError(f"path must start at the uniform state, gap[0] = {initial.gap[0]:.3g}")
        if not initial.end_gap < 0:
            raise DomainError(f"path must end below the uniform energy, end_gap = {initial.end_gap:.3g}")
        if len(initial.images) < 3:
            raise DomainError("string method needs at least 3 images")

        max_iter = self.max_iter if max_iter is None else max_iter
        tol = tol or self.tol
        base_step = step or self.default_step(initial.images[0])
        current_step = base_step

        with ThreadPoolExecutor(max_workers=threads or settings.WORKER_COUNT) as pool:
            retrying = Retrying(
                stop=stop_after_attempt(self.step_halvings + 1),
                retry=retry_if_exception_type(UnstableStepError),
                reraise=True,
            )
            for attempt in retrying:
                with attempt:
                    current_step = base_step / 2 ** (attempt.retry_state.attempt_number - 1)
                    if attempt.retry_state.attempt_number > 1:
                        logger.warning(f"Unstable string step, retrying with step {current_step:.3g}")
                    images, t, iterations, string_converged, history = self._relax(
                        initial, params, current_step, max_iter, tol, pool
                    )

            grid = initial.images[0]
            fields = [grid.with_values(values) for values in images]
            kappa = self.constructions.path_kappa(params)
            gaps = list(pool.map(lambda u: self.fields.energy_gap(u, params), fields))
            volumes = list(pool.map(lambda u: self.fields.plus_phase_volume(u, kappa), fields))

        relaxed = PathProfile.assemble(
            images=fields,
            t=t.tolist(),
            gap=gaps,
            V=volumes,
            stage=["relaxed"] * len(fields),
        )
        if not string_converged:
            logger.warning(f"String method stopped at max_iter={max_iter} before reaching tol={tol:g}")
        logger.info(
            f"String relaxed in {iterations} iterations: max_gap {initial.max_gap:.8g} -> {relaxed.max_gap:.8g}"
        )

        saddle_field, climb_iterations = self._climb(images, relaxed.max_index, grid, params, current_step, tol)
        lam, residual = self.euler_lagrange_residual(saddle_field)
        result = SaddleResult(
            field=saddle_field,
            gap=self.fields.energy_gap(saddle_field, params),
            lagrange_multiplier=lam,
            residual=residual,
            iterations=iterations + climb_iterations,
            converged=residual <= tol,
            path_max_gap=relaxed.max_gap,
            energy_history=history,
        )
        logger.info(
            f"Saddle: gap={result.gap:.8g} lambda={lam:.6g} residual={residual:.3g} converged={result.converged}"
        )
        return relaxed, result


# Global saddle service instance
saddle_service = SaddleService()
