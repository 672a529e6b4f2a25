import numpy as np
import pytest

from forcemeter import (
    FrequencyGrid,
    Oscillator,
    ProbeMode,
    build_four_probe,
    build_monochromatic,
    build_toy_dichromatic,
    probe_from_strength,
)


@pytest.fixture
def osc():
    return Oscillator(omega_m=1.0, gamma_m=1e-3)


@pytest.fixture
def abs_grid():
    return FrequencyGrid.symmetric(3.0, 121, band="absolute")


@pytest.fixture
def base_grid():
    return FrequencyGrid.symmetric(0.05, 121, band="baseband")


def make_monochromatic(osc, grid, strength=0.5, angle=np.pi / 2, n_occ=0.0, **kw):
    probe = probe_from_strength(osc, strength, ProbeMode.MONOCHROMATIC)
    return build_monochromatic(osc, probe, grid, angle=angle, n_occ=n_occ, **kw)


def make_toy(osc, grid, strength=4.0e-3, n_occ=0.0):
    probe = probe_from_strength(osc, strength, ProbeMode.TOY_DICHROMATIC)
    return build_toy_dichromatic(osc, probe, grid, n_occ=n_occ)


def make_four_probe(osc, grid, strength=4.0e-3, n_occ=0.0):
    probe = probe_from_strength(osc, strength, ProbeMode.FOUR_PROBE)
    return build_four_probe(osc, probe, grid, n_occ=n_occ)


@pytest.fixture
def mono_scheme(osc, abs_grid):
    return make_monochromatic(osc, abs_grid, n_occ=2.0)


@pytest.fixture
def toy_scheme(osc, base_grid):
    return make_toy(osc, base_grid, n_occ=3.0)


@pytest.fixture
def four_scheme(osc, base_grid):
    return make_four_probe(osc, base_grid, n_occ=3.0)
