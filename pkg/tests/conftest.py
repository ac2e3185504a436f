import math

import pytest

from floquet_dce.model import ModelParams, reduce_params

G = 1.0 / math.pi


@pytest.fixture(scope="session")
def g_fig():
    return G


def rp_fig4(omega0p: float, f0: float = 0.2, g: float = G):
    """Reduced parameters of the overlapped-band setting (wB' = 0)."""
    return reduce_params(ModelParams(omega0=1.0 + omega0p, Omega=2.0, f0=f0,
                                     omegaB=1.0, B=1.0, g=g))


def rp_fig5(omega0p: float, f0: float = 0.2, g: float = G):
    """Reduced parameters of the shifted-band setting (wB' = -0.75)."""
    return reduce_params(ModelParams(omega0=1.0 + omega0p, Omega=2.0, f0=f0,
                                     omegaB=0.25, B=1.0, g=g))
