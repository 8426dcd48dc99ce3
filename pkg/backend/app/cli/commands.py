"""Command handlers: each runs one computation, writes its artefacts and returns the summary"""
import math
from pathlib import Path
from typing import Any, Callable, Dict, Optional
from loguru import logger
from app.cli.schemas import Command, RunConfig
from app.core.config import settings
from app.core.exceptions import NoPositiveZeroError, UsageError
from app.models.params import ModelParams, XiTag
from app.models.results import LimitSet, PathProfile
from app.services.construction import construction_service
from app.services.field import field_service
from app.services.gamma import gamma_service
from app.services.reduced_model import reduced_model_service
from app.services.saddle import saddle_service
from app.services.storage import storage_service

Summary = Dict[str, Any]


def _grid(config: RunConfig, params: ModelParams) -> int:
    if config.grid is not None:
        return config.grid
    n = int(math.ceil(params.L / settings.MAX_GRID_SPACING))
    return n + (n % 2)


def _out_dir(config: RunConfig) -> Optional[Path]:
    if config.out is None:
        return None
    directory = Path(config.out)
    directory.mkdir(parents=True, exist_ok=True)
    return directory


def _params_summary(params: ModelParams) -> Summary:
    return {"d": params.d, "L": params.L, "phi": params.phi, "xi": params.xi, "regime": params.regime}


def run_constants(config: RunConfig) -> Summary:
    d = config.dim
    nu_m, c_star = reduced_model_service.barrier_constant_offcritical(d)
    return {
        "c0": reduced_model_service.interface_cost(),
        "cbar1": reduced_model_service.cbar1(d),
        "xi_d": reduced_model_service.critical_xi(d),
        "c_star": c_star,
        "nu_m": nu_m,
    }


def run_reduced(config: RunConfig) -> Summary:
    if config.xi is not None:
        xi = config.xi
    elif config.phi is not None and config.length is not None:
        xi = config.model_params().xi
    else:
        xi = XiTag.INFINITE
    curve = reduced_model_service.reduced_curve(xi, config.dim, config.samples)
    if config.out is not None:
        storage_service.write_csv(
            config.out, {"nu": curve.nu, "f": curve.f}, config.provenance_params()
        )
    return curve.summary()


def run_certify(config: RunConfig) -> Summary:
    if config.field is not None:
        field, phi = storage_service.read_snapshot(config.field)
        params = ModelParams(d=field.d, L=field.L, phi=config.phi or phi)
    else:
        field = None
        params = config.model_params()

    summary: Summary = _params_summary(params)
    c1, c2, c3 = reduced_model_service.certificate_coefficients(params.phi, params.d)
    summary.update({"C1": c1, "C2": c2, "C3": c3})
    summary["lower_bound_offcritical"] = field_service.certified_barrier_lower_bound(params)
    try:
        summary["lower_bound_critical"] = field_service.certified_barrier_lower_bound(params, critical=True)
    except NoPositiveZeroError as exc:
        logger.warning(exc.detail)
        summary["lower_bound_critical"] = None

    if field is not None:
        certificate = field_service.lower_bound_certificate(field, params, config.kappa)
        summary["energy_gap"] = field_service.energy_gap(field, params)
        summary["certificate"] = certificate.model_dump()
    directory = _out_dir(config)
    if directory is not None:
        storage_service.write_json(directory / "certify.json", summary)
    return summary


def _build_path(config: RunConfig, params: ModelParams) -> PathProfile:
    return construction_service.barrier_path(
        params,
        _grid(config, params),
        R=config.R,
        n_images=config.images,
        kappa=config.kappa,
        threads=config.threads,
    )


def run_path(config: RunConfig) -> Summary:
    params = config.model_params()
    path = _build_path(config, params)
    summary: Summary = path.summary()
    summary["max_gap_scaled"] = path.max_gap * params.phi ** (params.d - 1)
    summary["c_star"] = reduced_model_service.barrier_constant_offcritical(params.d)[1]

    directory = _out_dir(config)
    if directory is not None:
        storage_service.write_csv(directory / "path.csv", path.table(), config.provenance_params())
        storage_service.write_json(directory / "summary.json", summary)
        if config.snapshots:
            storage_service.write_snapshots(directory / "snapshots", path.images, params.phi)
    return summary


def run_saddle(config: RunConfig) -> Summary:
    params = config.model_params()
    initial = _build_path(config, params)
    relaxed, result = saddle_service.string_relax(
        initial,
        params,
        max_iter=config.max_iter,
        step=config.step,
        tol=config.tol,
        threads=config.threads,
    )
    summary: Summary = result.summary()
    summary["path_max_gap"] = relaxed.max_gap
    summary["initial_max_gap"] = initial.max_gap

    directory = _out_dir(config)
    if directory is not None:
        storage_service.write_json(directory / "saddle.json", result.summary())
        storage_service.write_snapshot(directory / "saddle.chf", result.field, params.phi)
        storage_service.write_csv(directory / "relaxed_path.csv", relaxed.table(), config.provenance_params())
    return summary


def run_gamma(config: RunConfig) -> Summary:
    if config.xi is None or not math.isfinite(config.xi):
        raise UsageError("gamma needs a finite --xi")
    sweep = gamma_service.convergence_sweep(
        LimitSet(radius=config.radius), config.xi, config.dim, config.phis, threads=config.threads
    )
    summary: Summary = sweep.summary()
    summary["final_rel_error"] = sweep.rows[-1].rel_error

    directory = _out_dir(config)
    if directory is not None:
        storage_service.write_csv(directory / "sweep.csv", sweep.table(), config.provenance_params())
        storage_service.write_json(directory / "sweep.json", sweep.summary())
    return summary


# Command registry
COMMANDS: Dict[Command, Callable[[RunConfig], Summary]] = {
    Command.CONSTANTS: run_constants,
    Command.REDUCED: run_reduced,
    Command.CERTIFY: run_certify,
    Command.PATH: run_path,
    Command.SADDLE: run_saddle,
    Command.GAMMA: run_gamma,
}
