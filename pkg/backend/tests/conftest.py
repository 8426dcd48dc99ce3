"""Shared fixtures"""
import numpy as np
import pytest
from app.models.params import ModelParams


@pytest.fixture
def rng():
    return np.random.default_rng(20240517)


@pytest.fixture
def small_params():
    """d=2, L=10, phi=0.1: uniform energy 0.9025"""
    return ModelParams(d=2, L=10.0, phi=0.1)


@pytest.fixture
def certificate_params():
    """phi small enough for the certificate coefficients to exist"""
    return ModelParams(d=2, L=100.0, phi=1e-3)


@pytest.fixture
def path_params():
    """Small supercritical torus, xi = 0.3 * 40^(2/3) > xi_2"""
    return ModelParams(d=2, L=40.0, phi=0.3)
