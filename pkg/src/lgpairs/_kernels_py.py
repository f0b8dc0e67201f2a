"""Pure-numpy implementations of the hot kernels.

These mirror ``lgpairs._kernels`` (the Cython extension) operation for
operation; the backend is chosen at import time in ``lgpairs._backend``.
"""

import math

import numpy as np

BACKEND = "python"


def laguerre_batch(nmax, alpha, x):
    """All associated Laguerre polynomials L_k^alpha(x) for k = 0..nmax.

    Parameters
    ----------
    nmax : int
        highest polynomial order, >= 0
    alpha : float
        order parameter, > -1
    x : numpy.ndarray
        evaluation points, 1-D float64

    Returns
    -------
    numpy.ndarray
        shape (nmax+1, len(x)); row k holds L_k^alpha(x)

    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    out = np.empty((nmax + 1, x.shape[0]))
    out[0] = 1.0
    if nmax >= 1:
        out[1] = (1.0 + alpha) - x
    for k in range(2, nmax + 1):
        out[k] = ((2.0 * k - 1.0 + alpha - x) * out[k - 1]
                  - (k - 1.0 + alpha) * out[k - 2]) / k
    return out


def lg_radial_basis(pmax, ell, w, r):
    """Normalized LG radial profiles for p = 0..pmax at fixed ell and waist.

    Row p holds ``lg_radial((ell, p), w, r)`` on the given radii. The
    recurrence runs on the Gaussian-damped polynomial G_p = L_p(x) e^{-x/2}
    (x = 2 r^2 / w^2), seeded with the full amplitude prefactor, so no
    intermediate overflows occur even for p of a few hundred.

    Parameters
    ----------
    pmax : int
        highest radial order, >= 0
    ell : int
        azimuthal index; only |ell| enters the radial profile
    w : float
        waist, same length unit as r
    r : numpy.ndarray
        radii > 0, 1-D float64

    Returns
    -------
    numpy.ndarray
        shape (pmax+1, len(r))

    """
    r = np.ascontiguousarray(r, dtype=np.float64)
    a = float(abs(ell))
    rw = r / w
    x = 2.0 * rw * rw
    # amplitude prefactor (sqrt(2) r / w)^|ell| e^{-r^2/w^2}, fused in log
    # space so large |ell| cannot overflow before the Gaussian bites
    amp = np.exp(a * np.log(np.sqrt(2.0) * rw) - rw * rw) if a else np.exp(-rw * rw)
    out = np.empty((pmax + 1, r.shape[0]))
    out[0] = amp
    if pmax >= 1:
        out[1] = ((1.0 + a) - x) * amp
    for k in range(2, pmax + 1):
        out[k] = ((2.0 * k - 1.0 + a - x) * out[k - 1]
                  - (k - 1.0 + a) * out[k - 2]) / k
    for p in range(pmax + 1):
        norm = math.sqrt(2.0 * math.exp(math.lgamma(p + 1.0) - math.lgamma(p + a + 1.0)) / math.pi) / w
        out[p] *= norm
    return out
