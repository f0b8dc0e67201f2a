import pytest

from lgpairs import correlate, detection, source
from lgpairs.modes import ModeIndex, make_quadrature


PAPER_WAISTS = [1275.0, 1000.0, 812.5, 650.0, 500.0, 400.0, 300.0]


@pytest.fixture(scope="session")
def paper_source():
    return source.SourceParams.from_lab_units(2.0, 413.0, 325.0)


@pytest.fixture(scope="session")
def optics_pixelated():
    return detection.OpticsConfig(magnification=7.5, fiber_waist_slm_um=1275.0, pixel_pitch_um=20.0)


@pytest.fixture(scope="session")
def optics_continuous():
    return detection.OpticsConfig(magnification=7.5, fiber_waist_slm_um=1275.0, pixel_pitch_um=None)


@pytest.fixture(scope="session")
def smooth_rule():
    """Global rule for smooth-field tests (modes up to p=15, |ell|=10, w<=2500)."""
    return make_quadrature(9.0 * 2500.0, 2000)


def paper_r_max(waists):
    working = 7.5 * 325.0
    return 9.0 * max([working, 1275.0, *waists])


def task_rule_for(waists, ells, p_max, pixelated, n_nodes=6000):
    pitch = 20.0 if pixelated else None
    masks = [(ell, p, w) for ell in ells for p in range(p_max + 1) for w in waists]
    return correlate.make_task_rule(paper_r_max(waists), n_nodes, masks, pixel_pitch=pitch)


def template_for(optics, waist, pmax=60):
    return detection.DetectionConfig(
        mode=ModeIndex(ell=0, p=0),
        mode_waist_um=waist,
        expansion_pmax=pmax,
        optics=optics,
    )


def assert_rel(actual, expected, rtol, msg=""):
    scale = max(abs(expected), 1e-300)
    assert abs(actual - expected) <= rtol * scale, (
        f"{msg} expected {expected!r}, got {actual!r} (rel err "
        f"{abs(actual - expected) / scale:.3e} > {rtol})"
    )
