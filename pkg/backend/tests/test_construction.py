import math
import numpy as np
import pytest
from app.core.exceptions import DomainError, DropletTooLargeError, NoLowerStateError
from app.models.params import ModelParams
from app.services.construction import clamped_kink, construction_service as service, kink
from app.services.field import field_service
from app.services.reduced_model import reduced_model_service


def _even_grid(L, spacing=0.5):
    n = int(math.ceil(L / spacing))
    return n + n % 2


def test_kink_limits():
    assert kink(0.0) == 0.0
    assert kink(50.0) == pytest.approx(-1.0, abs=1e-15)
    assert kink(-50.0) == pytest.approx(1.0, abs=1e-15)


def test_kink_line_energy():
    assert service.kink_line_energy() == pytest.approx(reduced_model_service.interface_cost(), abs=1e-6)


@pytest.mark.parametrize("R", [1.0, 5.0, 20.0])
def test_clamped_kink_shape(R):
    x = np.linspace(-3 * R, 3 * R, 10001)
    values = clamped_kink(x, R)
    assert np.all(np.diff(values) <= 1e-12)
    assert np.allclose(clamped_kink(-x, R), -values, atol=1e-15)
    assert clamped_kink(0.0, R) == 0.0
    assert np.all(values[x >= 2 * R] == -1.0)
    assert np.all(values[x <= -2 * R] == 1.0)
    inner = np.abs(x) < R
    assert np.allclose(values[inner], kink(x[inner]), atol=1e-15)


def test_clamped_kink_needs_wide_clamp():
    with pytest.raises(DomainError):
        clamped_kink(0.0, 0.5)


def test_alpha_correction_constant():
    assert service.alpha_correction_constant(2) == pytest.approx(math.pi ** 3 / 3, rel=1e-8)


def test_droplet_radius():
    params = ModelParams(d=2, L=100.0, phi=0.1)
    r = service.droplet_radius(1.0, params)
    assert r == pytest.approx(12.6157, abs=1e-4)
    assert math.pi * r ** 2 == pytest.approx(500.0, rel=1e-12)
    assert service.eta_for_radius(r, params) == pytest.approx(1.0, rel=1e-12)


def test_default_radius():
    assert service.default_radius(ModelParams(d=2, L=400.0, phi=0.1)) == 2.0
    assert service.default_radius(ModelParams(d=2, L=400.0, phi=1e-3)) == pytest.approx(0.2 * 1e-3 ** -0.5)


def test_empty_droplet_is_uniform():
    params = ModelParams(d=2, L=100.0, phi=0.1)
    u, spec = service.droplet_state(0.0, 3.0, params, 64)
    assert np.allclose(u.values, params.u_bar, atol=1e-15)
    assert spec.alpha_exact == pytest.approx(params.phi, abs=1e-15)


@pytest.mark.parametrize("eta", [0.25, 0.5, 1.0])
def test_droplet_mean_and_shift(eta):
    params = ModelParams(d=2, L=100.0, phi=0.1)
    u, spec = service.droplet_state(eta, 3.0, params, 200)
    assert u.mean() == pytest.approx(params.u_bar, abs=1e-12)
    if eta < 1.0:
        assert 0.0 < spec.alpha_exact < params.phi


def test_droplet_alpha_matches_expansion():
    params = ModelParams(d=2, L=400.0, phi=0.05)
    _, spec = service.droplet_state(0.5, 10.0, params, 800)
    assert spec.alpha_asymptotic is not None
    assert abs(spec.alpha_exact - spec.alpha_asymptotic) / (params.phi * 0.5) <= 0.05


def test_alpha_expansion_needs_room():
    with pytest.raises(DomainError):
        service.alpha_asymptotic(0.995, 3.0, ModelParams(d=2, L=100.0, phi=0.1))


def test_droplet_too_large():
    with pytest.raises(DropletTooLargeError):
        service.droplet_state(1.0, 1.0, ModelParams(d=2, L=40.0, phi=0.9), 80)


def test_droplet_at_quarter_side_fits():
    params = ModelParams(d=2, L=40.0, phi=0.5)
    eta = service.eta_for_radius(params.L / 4.0, params) * (1.0 + 1e-14)
    u, spec = service.droplet_state(eta, 2.0, params, 80)
    assert spec.r_eta == pytest.approx(10.0, rel=1e-12)
    assert u.mean() == pytest.approx(params.u_bar, abs=1e-12)


def test_droplet_smaller_than_clamp():
    with pytest.raises(DomainError):
        service.droplet_state(0.01, 5.0, ModelParams(d=2, L=100.0, phi=0.1), 200)


def test_droplet_gap_asymptotic_matches_reduced_energy():
    params = ModelParams(d=2, L=100.0, phi=0.1)
    assert service.droplet_gap_asymptotic(0.0, params) == 0.0
    eta = 0.5
    nu = params.phi ** 2 * eta * params.phi * params.volume / 2
    expected = reduced_model_service.reduced_energy(nu, params.xi, 2) / params.phi
    assert service.droplet_gap_asymptotic(eta, params) == pytest.approx(expected, rel=1e-10)


def test_seed_segment_end_points():
    params = ModelParams(d=2, L=100.0, phi=0.1)
    R, n = 3.0, 200
    start = service.seed_segment(0.0, R, params, n)
    assert np.all(start.values == params.u_bar)
    for lam in np.linspace(0.0, 1.0, 5):
        assert service.seed_segment(float(lam), R, params, n).mean() == pytest.approx(params.u_bar, abs=1e-12)
    end = service.seed_segment(1.0, R, params, n)
    droplet, _ = service.droplet_state(service.eta_for_radius(R, params), R, params, n)
    assert np.allclose(end.values, droplet.values, atol=1e-12)


def test_seed_segment_gap_scales_with_volume():
    params = ModelParams(d=2, L=64.0, phi=0.05)
    scaled = []
    for R in (2.0, 4.0, 8.0):
        gaps = [
            field_service.energy_gap(service.seed_segment(float(lam), R, params, 128), params)
            for lam in np.linspace(0.0, 1.0, 17)
        ]
        scaled.append(max(gaps) / R ** 2)
    assert all(value <= 2.0 * scaled[0] for value in scaled)


def test_seed_gap_constant_stable_under_refinement():
    params = ModelParams(d=2, L=64.0, phi=0.05)
    R = 4.0
    constants = []
    for n in (128, 256):
        gaps = [
            field_service.energy_gap(service.seed_segment(float(lam), R, params, n), params)
            for lam in np.linspace(0.0, 1.0, 32)
        ]
        constants.append(max(gaps) / R ** 2)
    assert constants[0] > 0
    assert constants[1] == pytest.approx(constants[0], rel=0.05)


@pytest.mark.slow
def test_alpha_expansion_error_shrinks_with_phi():
    errors = []
    for phi in (0.06, 0.03, 0.015):
        params = ModelParams.from_xi(2, phi, 1.0)
        _, spec = service.droplet_state(0.5, 2.0, params, _even_grid(params.L, 0.25))
        errors.append(abs(spec.alpha_exact - spec.alpha_asymptotic) / (phi * 0.5))
    assert errors[0] > errors[1] > errors[2]


@pytest.mark.slow
def test_droplet_gap_approaches_reduced_energy():
    xi = 3.0
    nu_m, _ = reduced_model_service.barrier_constant_offcritical(2)
    target = reduced_model_service.reduced_energy(nu_m, xi, 2)
    margins = []
    for phi in (0.2, 0.1, 0.05):
        params = ModelParams.from_xi(2, phi, xi)
        eta = 2.0 * nu_m / xi ** 3
        R = min(service.default_radius(params), service.droplet_radius(eta, params))
        u, _ = service.droplet_state(eta, R, params, _even_grid(params.L, 0.25))
        gap = field_service.energy_gap(u, params)
        assert service.droplet_gap_asymptotic(eta, params) * phi == pytest.approx(target, rel=1e-10)
        margins.append(abs(gap * phi / target - 1.0))
    assert margins[1] < margins[0]
    assert margins[2] < margins[0]
    assert margins[2] <= 0.05


def test_barrier_path_small_torus(path_params):
    path = service.barrier_path(path_params, 128, n_images=32, threads=2)
    assert len(path.images) == 32
    assert path.t[0] == 0.0 and path.t[-1] == 1.0
    assert abs(path.gap[0]) <= 1e-10
    assert path.end_gap < 0
    assert path.is_barrier_path
    assert path.max_gap > 0
    assert path.stage.count("seed") == 8
    for image in path.images:
        assert image.mean() == pytest.approx(path_params.u_bar, abs=1e-12)
    droplet_volumes = [v for v, stage in zip(path.V, path.stage) if stage == "droplet"]
    assert np.all(np.diff(droplet_volumes) >= -1e-9)


def test_barrier_path_rejects_few_images(path_params):
    with pytest.raises(DomainError):
        service.barrier_path(path_params, 128, n_images=8)


def test_barrier_path_subcritical():
    params = ModelParams.from_xi(2, 0.1, 1.2)
    with pytest.raises(NoLowerStateError):
        service.barrier_path(params, _even_grid(params.L), threads=2)


def _scaled_deviation(phi, xi):
    params = ModelParams.from_xi(2, phi, xi)
    path = service.barrier_path(params, _even_grid(params.L, 400.0 / 1024))
    _, c_star = reduced_model_service.barrier_constant_offcritical(2)
    return path.max_gap * phi, c_star


@pytest.mark.slow
def test_barrier_path_approaches_offcritical_constant():
    xi = ModelParams(d=2, L=400.0, phi=0.1).xi
    scaled_fine, c_star = _scaled_deviation(0.1, xi)
    scaled_coarse, _ = _scaled_deviation(0.2, xi)
    assert abs(scaled_fine - c_star) <= 0.2 * c_star
    assert abs(scaled_coarse - c_star) > abs(scaled_fine - c_star)
