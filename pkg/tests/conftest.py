import pytest

from thermal_modes import SchellModel


@pytest.fixture(scope="session")
def model():
    """Reference source: beta = 0.24, the measured experimental value."""
    return SchellModel(sigma_I=1.0, sigma_mu=0.24, wavelength=632.8e-9)


@pytest.fixture(scope="session")
def lab_model():
    """Source with the physical lab parameters (millimetre waists)."""
    return SchellModel(sigma_I=2.3e-3, sigma_mu=0.57e-3, wavelength=632.8e-9)
