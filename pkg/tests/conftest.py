import math
from pathlib import Path

import pytest

from fluorep.model import LinkParams, PhysicalParams, load_config

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"
TWO_PI = 2 * math.pi


@pytest.fixture(scope="session")
def long_haul_path():
    return CONFIGS / "long_haul.conf"


@pytest.fixture(scope="session")
def long_haul(long_haul_path):
    return load_config(long_haul_path.read_text())


@pytest.fixture(scope="session")
def rb_case():
    return load_config((CONFIGS / "rb_case.conf").read_text())


def rb_physical(**kw) -> PhysicalParams:
    base = dict(
        gamma=TWO_PI * 6e6,
        delta=TWO_PI * 6.8e9,
        beta=0.5,
        omega_p=TWO_PI * 0.6e6,
        omega_c=TWO_PI * 3e6,
        length_l=0.01,
        depth_d=100.0,
        eta=0.05,
        n_atoms=2000,
    )
    base.update(kw)
    return PhysicalParams(**base)


def rb_link(**kw) -> LinkParams:
    base = dict(l0_km=10.0, latt_km=20.0, q=0.01, eta_d=0.5, eta_f=0.95, n_photons=20)
    base.update(kw)
    return LinkParams(**base)
