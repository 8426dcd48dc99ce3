import math
import numpy as np
import pytest
from app.core.exceptions import CertificateUnavailableError, DomainError, NoPositiveZeroError
from app.models.params import ModelParams, XiTag
from app.services.optimize import optimize_service
from app.services.reduced_model import reduced_model_service as service


def test_interface_cost():
    c0 = service.interface_cost()
    assert c0 == pytest.approx(2 * math.sqrt(2) / 3, abs=1e-15)
    assert c0 ** 2 == pytest.approx(8 / 9, rel=1e-14)
    assert service.interface_cost_quadrature() == pytest.approx(c0, abs=1e-10)


@pytest.mark.parametrize("d, area", [(2, 2 * math.pi), (3, 4 * math.pi), (4, 2 * math.pi ** 2)])
def test_sphere_area(d, area):
    assert service.sphere_area(d) == pytest.approx(area, rel=1e-12)


def test_cbar1():
    assert service.cbar1(2) == pytest.approx(3.342171, abs=1e-6)
    assert service.cbar1(2) ** 2 == pytest.approx(32 * math.pi / 9, rel=1e-12)
    assert service.cbar1(3) == pytest.approx(4.559, abs=1e-3)


def test_dimension_one_rejected():
    with pytest.raises(ValueError):
        service.cbar1(1)


def test_reduced_energy_at_zero():
    assert service.reduced_energy(0.0, 2.0, 2) == 0.0
    assert service.reduced_energy(0.0, XiTag.INFINITE, 3) == 0.0


def test_reduced_energy_offcritical_values():
    assert service.reduced_energy(math.pi / 18, "inf", 2) == pytest.approx(2 * math.pi / 9, rel=1e-12)
    assert service.reduced_energy(2 * math.pi / 9, math.inf, 2) == pytest.approx(0.0, abs=1e-12)


def test_reduced_energy_negative_volume():
    with pytest.raises(DomainError):
        service.reduced_energy(-1.0, 2.0, 2)


@pytest.mark.parametrize("nu", [0.1, 1.0, 7.5])
def test_quadratic_term(nu):
    xi = 3.0
    difference = service.reduced_energy(nu, xi, 2) - service.reduced_energy(nu, "inf", 2)
    assert difference == pytest.approx(4 * nu ** 2 / xi ** 3, rel=1e-10)


def test_reduced_energy_phi_length():
    params = ModelParams(d=2, L=100.0, phi=0.1)
    assert service.reduced_energy_phiL(1.0, params) == pytest.approx(-0.257829, abs=1e-6)


def test_phi_length_form_matches_xi_form():
    params = ModelParams.from_xi(2, 0.1, 2.0)
    assert service.reduced_energy_phiL(0.1, params) == pytest.approx(
        service.reduced_energy(0.1, 2.0, 2), rel=1e-12
    )


def test_certificate_coefficients():
    c1, c2, c3 = service.certificate_coefficients(0.001, 2)
    assert c1 == pytest.approx(1.3153, abs=1e-4)
    assert c1 == pytest.approx(1.3148, rel=1e-3)
    assert c2 == pytest.approx(4.1937, rel=1e-4)
    assert c3 > 0


def test_certificate_coefficients_tend_to_limits():
    cbar1 = service.cbar1(2)
    errors = []
    for phi in (1e-3, 1e-4, 1e-5):
        c1, c2, c3 = service.certificate_coefficients(phi, 2)
        errors.append((abs(c1 - cbar1), abs(c2 - 4.0), abs(c3 - 4.0)))
    for before, after in zip(errors, errors[1:]):
        assert all(b > a for b, a in zip(before, after))


def test_certificate_unavailable_for_large_phi():
    with pytest.raises(CertificateUnavailableError):
        service.certificate_coefficients(0.01, 2)


def test_critical_xi():
    assert service.critical_xi(2) == pytest.approx(1.6765, abs=1e-4)


@pytest.mark.parametrize("d", [2, 3])
def test_double_root_at_critical_xi(d):
    _, f_min = service.reduced_minimum(service.critical_xi(d), d)
    assert abs(f_min) <= 1e-8


@pytest.mark.parametrize("d", [2, 3])
def test_sign_of_minimum_flips_at_critical_xi(d):
    xi_d = service.critical_xi(d)
    assert service.reduced_minimum(0.99 * xi_d, d)[1] > 0
    assert service.reduced_minimum(1.01 * xi_d, d)[1] < 0


def test_offcritical_barrier_constant():
    nu_m, c_star = service.barrier_constant_offcritical(2)
    assert nu_m == pytest.approx(math.pi / 18, rel=1e-12)
    assert c_star == pytest.approx(2 * math.pi / 9, rel=1e-12)
    _, peak = optimize_service.golden_max(
        lambda nu: service.reduced_energy(nu, "inf", 2), 0.0, 4 * nu_m
    )
    assert peak == pytest.approx(c_star, abs=1e-8)


def test_offcritical_barrier_constant_three_dimensions():
    _, c_star = service.barrier_constant_offcritical(3)
    expected = 4 * math.pi / 3 * (2 * math.sqrt(2) / 3) ** 3 * 0.25
    assert c_star == pytest.approx(expected, rel=1e-12)


def test_critical_barrier_constant_approaches_offcritical():
    _, c_star = service.barrier_constant_offcritical(2)
    values = [service.barrier_constant_critical(xi, 2)[1] for xi in (2.0, 4.0, 8.0, 16.0, 1e6)]
    assert values[-1] == pytest.approx(c_star, abs=1e-4)
    assert all(b < a for a, b in zip(values, values[1:]))
    assert all(value > c_star for value in values[:-1])


def test_critical_barrier_constant_just_above_crossover():
    nu, value = service.barrier_constant_critical(1.01 * service.critical_xi(2), 2)
    assert math.isfinite(nu)
    assert value > 0


def test_critical_barrier_constant_subcritical():
    with pytest.raises(NoPositiveZeroError):
        service.barrier_constant_critical(service.critical_xi(2), 2)
    with pytest.raises(NoPositiveZeroError):
        service.positive_zeros(1.5, 2)


def test_sign_pattern_between_zeros():
    xi = 3.0
    first, second = service.positive_zeros(xi, 2)
    assert 0 < first < second
    f = lambda nu: service.reduced_energy(nu, xi, 2)
    assert f(first / 2) > 0
    assert f((first + second) / 2) < 0
    assert f(1.1 * second) > 0
    assert abs(f(first)) <= 1e-9


def test_offcritical_zero():
    first, second = service.positive_zeros("inf", 2)
    assert first == pytest.approx(2 * math.pi / 9, rel=1e-10)
    assert second is None


def test_subcritical_profile_is_nonnegative():
    xi = 1.5
    nu = np.geomspace(1e-8, 10 * xi ** 3, 2000)
    values = [service.reduced_energy(float(s), xi, 2) for s in nu]
    assert min(values) >= -1e-8


def test_reduced_curve_supercritical():
    curve = service.reduced_curve(2.0, 2, 1000)
    assert len(curve.nu) == 1000
    assert curve.f[0] == 0.0
    assert np.all(np.diff(curve.nu) > 0)
    assert curve.nu_zero is not None
    inside = [f for nu, f in curve.samples if 0 < nu < curve.nu_zero]
    assert all(f > 0 for f in inside)
    assert curve.f_max == pytest.approx(service.barrier_constant_critical(2.0, 2)[1], rel=1e-10)


def test_reduced_curve_offcritical():
    curve = service.reduced_curve("inf", 2, 200)
    assert curve.nu_zero == pytest.approx(2 * math.pi / 9, rel=1e-10)
    assert curve.nu_max == pytest.approx(math.pi / 18, rel=1e-4)
    assert curve.summary()["xi"] == "inf"


def test_reduced_curve_subcritical_has_no_zero():
    curve = service.reduced_curve(1.2, 2, 100)
    assert curve.nu_zero is None
    assert curve.nu[-1] == pytest.approx(1.2 ** 3)
