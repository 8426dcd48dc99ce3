import math
import numpy as np
import pytest
from app.core.exceptions import DomainError, MeanConstraintError
from app.models.field import TorusField
from app.models.params import ModelParams
from app.services.construction import construction_service
from app.services.field import field_service as service
from app.services.reduced_model import reduced_model_service


def _noisy_uniform(params, n, amplitude, rng):
    noise = rng.uniform(-amplitude, amplitude, (n,) * params.d)
    return TorusField(d=params.d, n=n, L=params.L, values=params.u_bar + noise - noise.mean())


def test_potential_values():
    g, g1, g2 = service.potential(-0.9)
    assert g == pytest.approx(0.009025, abs=1e-15)
    assert g1 == pytest.approx(0.171, abs=1e-15)
    assert g2 == pytest.approx(1.43, abs=1e-15)


def test_uniform_state_and_energy(small_params):
    u = service.uniform_state(small_params, 16)
    assert np.all(u.values == -0.9)
    exact, expansion = service.uniform_energy(small_params)
    assert exact == pytest.approx(0.9025, rel=1e-12)
    assert expansion == pytest.approx(exact, rel=1e-12)
    assert service.energy(u) == pytest.approx(exact, rel=1e-12)


def test_uniform_gap_is_zero(small_params):
    assert service.energy_gap(service.uniform_state(small_params, 16), small_params) == pytest.approx(0.0, abs=1e-12)


def test_constant_field_energy():
    u = TorusField.constant(3, 8, 4.0, 0.3)
    assert service.energy(u) == pytest.approx(64.0 * (1 - 0.09) ** 2 / 4, rel=1e-12)


def test_gradient_energy_of_cosine():
    L, n, amplitude = 10.0, 256, 0.1
    x = np.arange(n) * L / n
    k = 2 * math.pi / L
    values = np.tile((amplitude * np.cos(k * x))[:, None], (1, n))
    u = TorusField(d=2, n=n, L=L, values=values)
    assert service.gradient_energy(u) == pytest.approx(amplitude ** 2 * k ** 2 * L ** 2 / 4, rel=1e-3)


def test_laplacian_of_constant_vanishes():
    u = TorusField.constant(2, 8, 4.0, -0.7)
    assert np.allclose(service.laplacian(u), 0.0, atol=1e-14)


def test_gap_identity_on_droplet():
    params = ModelParams(d=2, L=100.0, phi=0.1)
    u, _ = construction_service.droplet_state(0.5, 3.0, params, 200)
    uniform, _ = service.uniform_energy(params)
    direct = service.energy_gap(u, params)
    difference = service.energy(u) - uniform
    assert abs(direct - difference) <= 1e-9 * max(1.0, abs(difference))


def test_gap_nonnegative_near_uniform(small_params, rng):
    for _ in range(10):
        u = _noisy_uniform(small_params, 20, 1e-3, rng)
        assert service.energy_gap(u, small_params) >= 0


def test_gap_nonnegative_in_convex_region(small_params, rng):
    # all values stay below -1+2kappa with kappa = 0.1, where G is convex
    for _ in range(10):
        u = _noisy_uniform(small_params, 20, 0.05, rng)
        assert np.max(u.values) <= -0.8
        assert service.energy_gap(u, small_params) >= 0


def test_energy_translation_invariant():
    params = ModelParams(d=2, L=100.0, phi=0.1)
    u, _ = construction_service.droplet_state(0.5, 3.0, params, 200)
    shifted = u.with_values(np.roll(u.values, (3, 5), axis=(0, 1)))
    assert service.energy(shifted) == pytest.approx(service.energy(u), rel=1e-12)


def test_energy_refinement_is_second_order():
    params = ModelParams(d=2, L=40.0, phi=0.3)
    energies = [
        service.energy(construction_service.droplet_state(0.5, 2.0, params, n)[0])
        for n in (128, 256, 512)
    ]
    coarse = abs(energies[1] - energies[0])
    fine = abs(energies[2] - energies[1])
    assert fine <= coarse / 3


def test_mean_violation_reported(small_params):
    u = TorusField.constant(2, 16, small_params.L, small_params.u_bar + 1e-6)
    with pytest.raises(MeanConstraintError) as info:
        service.energy_gap(u, small_params)
    assert info.value.measured == pytest.approx(-0.899999, abs=1e-12)
    assert "measured mean" in info.value.detail


def test_project_mean(small_params, rng):
    u = TorusField(d=2, n=16, L=small_params.L, values=rng.normal(size=(16, 16)))
    projected = service.project_mean(u, small_params.u_bar)
    assert projected.mean() == pytest.approx(small_params.u_bar, abs=1e-14)


def test_partition_weights_fixed_points():
    kappa = 0.1
    w1, w2, w3 = service.partition_weights(np.array([-1.0, 0.0, 1.0 - 1.5 * kappa, 1.0]), kappa)
    assert (w1[0], w2[0], w3[0]) == (1.0, 0.0, 0.0)
    assert (w1[1], w2[1], w3[1]) == (0.0, 1.0, 0.0)
    assert w1[2] == 0.0 and 0.0 < w3[2] < 1.0
    assert w3[3] == 1.0


def test_partition_weights_sum_to_one(rng):
    u = rng.uniform(-1.5, 1.5, 10 ** 6)
    w1, w2, w3 = service.partition_weights(u, 0.2)
    assert np.max(np.abs(w1 + w2 + w3 - 1.0)) <= 1e-15
    for w in (w1, w2, w3):
        assert np.all((w >= 0.0) & (w <= 1.0))


def test_partition_weights_reject_wide_kappa():
    with pytest.raises(DomainError):
        service.partition_weights(0.0, 0.5)


def test_plus_phase_volume_extremes(small_params):
    uniform = service.uniform_state(small_params, 20)
    assert service.plus_phase_volume(uniform, 0.2) == 0.0
    ones = TorusField.constant(2, 20, small_params.L, 1.0)
    assert service.plus_phase_volume(ones, 0.2) == pytest.approx(small_params.volume, rel=1e-12)


def test_plus_phase_volume_of_droplet():
    params = ModelParams(d=2, L=200.0, phi=0.1)
    u, _ = construction_service.droplet_state(1.0, 3.0, params, 400)
    target = params.phi * params.volume / 2
    assert abs(service.plus_phase_volume(u, 0.4) - target) / target < 0.1


def _field_with_bumps(params, n, kappa, rng, bumps=3):
    values = params.u_bar + rng.normal(0.0, 0.02, (n,) * params.d)
    cells = rng.choice(n ** params.d, size=bumps, replace=False)
    values.flat[cells] = rng.uniform(1.2 + kappa, 3.0, bumps)
    values -= values.mean() - params.u_bar
    return TorusField(d=params.d, n=n, L=params.L, values=values)


def test_truncation_without_excess_is_identity(certificate_params):
    u = service.uniform_state(certificate_params, 32)
    assert np.array_equal(service.truncate_excess(u, certificate_params, 0.1).values, u.values)


def test_truncation_properties(rng):
    params = ModelParams(d=2, L=16.0, phi=0.005)
    kappa, u_bar = 0.1, params.u_bar
    for _ in range(100):
        u = _field_with_bumps(params, 32, kappa, rng)
        truncated = service.truncate_excess(u, params, kappa)
        assert np.max(truncated.values) <= 1.0 + kappa + 1e-15
        assert truncated.mean() == pytest.approx(u_bar, abs=1e-12)
        assert service.energy(truncated) <= service.energy(u)
        assert service.plus_phase_volume(truncated, kappa) == service.plus_phase_volume(u, kappa)
        middle = (u.values > u_bar) & (u.values <= 1.0 + kappa)
        assert np.array_equal(truncated.values[middle], u.values[middle])


def test_truncation_needs_small_phi(small_params):
    with pytest.raises(DomainError):
        service.truncate_excess(service.uniform_state(small_params, 8), small_params, 0.1)


def test_certificate_of_uniform_state(certificate_params):
    certificate = service.lower_bound_certificate(service.uniform_state(certificate_params, 32), certificate_params)
    assert certificate.V == 0.0
    assert certificate.bound_offcritical == 0.0
    assert certificate.bound_critical is None
    assert certificate.hypotheses_ok
    assert not certificate.critical_conditions_ok


def test_certificate_bound_formula():
    c1, c2, _ = reduced_model_service.certificate_coefficients(1e-3, 2)
    assert c1 * 100 ** 0.5 - 1e-3 * c2 * 100 == pytest.approx(12.734, abs=1e-3)


@pytest.mark.parametrize("R", [2.0, 3.0])
def test_certificate_sound_on_seed_segment(certificate_params, R):
    for lam in np.linspace(0.0, 1.0, 6):
        u = construction_service.seed_segment(float(lam), R, certificate_params, 200)
        certificate = service.lower_bound_certificate(u, certificate_params)
        gap = service.energy_gap(u, certificate_params)
        assert gap >= certificate.bound_offcritical - 1e-9


@pytest.mark.slow
def test_certificate_sound_on_droplets():
    params = ModelParams(d=2, L=800.0, phi=1e-3)
    for eta in (0.1, 0.25, 0.5, 0.75, 1.0):
        u, _ = construction_service.droplet_state(eta, 3.0, params, 1600)
        certificate = service.lower_bound_certificate(u, params)
        gap = service.energy_gap(u, params)
        assert certificate.hypotheses_ok
        assert gap >= certificate.bound_offcritical - 1e-9
        if certificate.bound_critical is not None:
            assert gap >= certificate.bound_critical - 1e-9


def test_certified_barrier_lower_bound_offcritical(certificate_params):
    c1, c2, _ = reduced_model_service.certificate_coefficients(1e-3, 2)
    bound = service.certified_barrier_lower_bound(certificate_params)
    assert bound == pytest.approx(c1 ** 2 / (4 * 1e-3 * c2), rel=1e-12)
    _, c_star = reduced_model_service.barrier_constant_offcritical(2)
    assert bound <= c_star / 1e-3


def test_certified_barrier_lower_bound_critical():
    params = ModelParams(d=2, L=1e6, phi=1e-3)
    off = service.certified_barrier_lower_bound(params)
    critical = service.certified_barrier_lower_bound(params, critical=True)
    assert critical >= off * (1 - 1e-9)


def test_isoperimetric_profile():
    params2 = ModelParams(d=2, L=20.0, phi=0.1)
    params3 = ModelParams(d=3, L=20.0, phi=0.1)
    assert service.isoperimetric_profile(0.0, params2) == 0.0
    assert service.isoperimetric_profile(math.pi, params2) == pytest.approx(2 * math.pi, rel=1e-12)
    assert service.isoperimetric_profile(4 * math.pi / 3, params3) == pytest.approx(4 * math.pi, rel=1e-12)
    with pytest.raises(DomainError):
        service.isoperimetric_profile(0.5 * params2.volume, params2)
