import numpy as np
import pytest

from lgpairs import _backend, _kernels_py

compiled = pytest.importorskip("lgpairs._kernels", reason="compiled kernels not built")


def test_selected_backend_is_wired():
    assert _backend.BACKEND in ("compiled", "python")
    assert _backend.lg_radial_basis is _backend.kernels.lg_radial_basis


@pytest.mark.parametrize("nmax,alpha", [(0, 0.0), (1, 2.5), (25, 0.0), (60, 7.0), (200, 3.0)])
def test_laguerre_batch_parity(nmax, alpha):
    x = np.linspace(0.0, 900.0, 3000)
    a = _kernels_py.laguerre_batch(nmax, alpha, x)
    b = compiled.laguerre_batch(nmax, alpha, x)
    scale = np.abs(a).max(axis=1, keepdims=True)
    assert np.max(np.abs(a - b) / scale) < 1e-9


@pytest.mark.parametrize("pmax,ell,w", [(0, 0, 500.0), (10, 0, 1275.0), (60, -4, 700.0), (200, 10, 300.0)])
def test_lg_radial_basis_parity(pmax, ell, w):
    rng = np.random.default_rng(5)
    r = np.sort(rng.uniform(0.5, 9.0 * max(w, 2437.5), 4000))
    a = _kernels_py.lg_radial_basis(pmax, ell, w, r)
    b = compiled.lg_radial_basis(pmax, ell, w, r)
    scale = np.abs(a).max(axis=1, keepdims=True)
    assert np.max(np.abs(a - b) / scale) < 1e-9


def test_python_backend_forced(monkeypatch):
    # the selector honors LGPAIRS_BACKEND in a fresh interpreter
    import subprocess
    import sys

    out = subprocess.run(
        [sys.executable, "-c", "from lgpairs._backend import BACKEND; print(BACKEND)"],
        env={"LGPAIRS_BACKEND": "python", "PATH": "/usr/bin:/bin"},
        capture_output=True,
        text=True,
        check=True,
    )
    assert out.stdout.strip() == "python"


def test_no_overflow_at_high_order():
    # the fused Gaussian keeps the recurrence finite where the bare
    # polynomial would overflow
    r = np.linspace(1.0, 22000.0, 2000)
    for kern in (_kernels_py, compiled):
        basis = kern.lg_radial_basis(200, 0, 300.0, r)
        assert np.all(np.isfinite(basis))
