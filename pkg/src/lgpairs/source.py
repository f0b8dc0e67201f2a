"""Two-photon source model: pump field, thin-crystal SPDC mode weights, and
the closed-form Schmidt quantities.

The crystal is treated in the thin-crystal limit, so the pair amplitude for
the diagonal mode pair (p, ell), (p, -ell) is the pump-weighted overlap of
the two (radially identical) LG profiles. Phase matching is out of scope.
"""

import math
from dataclasses import dataclass

import numpy as np

from .modes import TWO_PI, ComplexRadialField, lg_basis

# waist ratio at which detection modes coincide with the source's Schmidt
# modes for the finite-length crystal; quoted for reports only (the
# thin-crystal model itself has no finite optimum)
IDEAL_WAIST_RATIO = 8.8


@dataclass(frozen=True)
class SourceParams:
    """Crystal and pump geometry, stored in um."""

    crystal_length_um: float
    pump_wavelength_um: float
    pump_waist_um: float

    def __post_init__(self):
        for name in ("crystal_length_um", "pump_wavelength_um", "pump_waist_um"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")

    @classmethod
    def from_lab_units(cls, crystal_length_mm, pump_wavelength_nm, pump_waist_um):
        return cls(
            crystal_length_um=crystal_length_mm * 1e3,
            pump_wavelength_um=pump_wavelength_nm * 1e-3,
            pump_waist_um=pump_waist_um,
        )


@dataclass(frozen=True)
class SchmidtSpectrum:
    """Relative weights lambda_k of a Schmidt decomposition (sum to 1)."""

    lambdas: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=np.float64)
        if lam.size == 0:
            raise ValueError("spectrum must contain at least one weight")
        if np.any(lam < 0):
            raise ValueError("Schmidt weights must be >= 0")
        if abs(lam.sum() - 1.0) > 1e-12:
            raise ValueError(f"Schmidt weights must sum to 1, got {lam.sum()!r}")
        lam.flags.writeable = False
        object.__setattr__(self, "lambdas", lam)

    @classmethod
    def from_unnormalized(cls, weights):
        w = np.asarray(weights, dtype=np.float64)
        total = w.sum()
        if total <= 0:
            raise ValueError("weights must have a positive sum")
        return cls(lambdas=w / total)


def phase_matching_b(params):
    """Phase-matching length scale b = sqrt(L lambda_p / 8 pi), in um."""
    return math.sqrt(params.crystal_length_um * params.pump_wavelength_um / (8.0 * math.pi))


def schmidt_k(x):
    """Schmidt number K = (x + 1/x)^2 / 4 of a double-Gaussian pair state, x = b sigma."""
    if x <= 0:
        raise ValueError(f"x must be positive, got {x}")
    return 0.25 * (x + 1.0 / x) ** 2


def schmidt_k_azimuthal(k):
    """Azimuthal-only Schmidt number, K_az ~ 2 sqrt(K) for large K."""
    if k < 1:
        raise ValueError(f"K must be >= 1, got {k}")
    return 2.0 * math.sqrt(k)


def schmidt_k_radial(k):
    """Radial-only Schmidt number at fixed ell, K_rad ~ sqrt(K) for large K."""
    if k < 1:
        raise ValueError(f"K must be >= 1, got {k}")
    return math.sqrt(k)


def optimal_waist(b, sigma):
    """Detection waist w* = sqrt(4 b / sigma) at which LG modes are Schmidt modes."""
    if b <= 0 or sigma <= 0:
        raise ValueError("b and sigma must be positive")
    return math.sqrt(4.0 * b / sigma)


def default_sigma(params):
    """Default pump angular-spectrum scale sigma = sqrt(2)/w_p, in 1/um.

    The closed-form Schmidt quantities take sigma explicitly; this is only
    the documented default convention for reports.
    """
    return math.sqrt(2.0) / params.pump_waist_um


def schmidt_number_from_spectrum(spectrum):
    """Participation ratio K = 1 / sum(lambda_k^2)."""
    return float(1.0 / np.sum(spectrum.lambdas**2))


def pump_field(params, working_waist, rule):
    """Pump amplitude exp(-r^2/w^2) sampled on the rule, ell = 0.

    ``working_waist`` is the pump waist in the plane the model runs in
    (the crystal image); the amplitude is left unnormalized because only
    weight ratios enter the normalized matrices.
    """
    if working_waist <= 0:
        raise ValueError(f"working_waist must be positive, got {working_waist}")
    samples = np.exp(-((rule.nodes / working_waist) ** 2)).astype(np.complex128)
    return ComplexRadialField(ell=0, samples=samples)


def spdc_weight(p, ell, pump, mode_waist, rule):
    """Thin-crystal SPDC weight of the diagonal pair (p, ell), (p, -ell).

    |2 pi int dr r pump(r) LG_p^ell(r) LG_p^{-ell}(r)|^2, unnormalized;
    see ``spdc_weight_profile`` + ``spdc_normalization`` for the relative
    weights used in re-weighting.
    """
    return float(spdc_weight_profile(pump, mode_waist, ell, p, rule)[p])


def spdc_weight_profile(pump, mode_waist, ell, pmax, rule):
    """Unnormalized weights for p = 0..pmax at fixed ell (vectorized)."""
    if pump.ell != 0:
        raise ValueError("pump must carry ell = 0 (only fundamental-mode pumps are modeled)")
    if mode_waist <= 0:
        raise ValueError(f"mode_waist must be positive, got {mode_waist}")
    basis = lg_basis(ell, mode_waist, pmax, rule)
    # LG_p^ell and LG_p^{-ell} share the radial profile, and their azimuthal
    # factors cancel on the conserved pair, so the integrand is pump * LG^2
    measure = rule.weights * rule.nodes * np.real(pump.samples)
    amplitudes = TWO_PI * ((basis * basis) @ measure)
    return amplitudes**2


def spdc_normalization(pump, mode_waist, rule, p_cut=60, ell_cut=10):
    """Sum of weights over the truncated index set p <= p_cut, |ell| <= ell_cut.

    Dividing raw weights by this makes the truncated set sum to 1; the
    choice of set only rescales every weight identically.
    """
    total = 0.0
    for ell in range(ell_cut + 1):
        s = float(spdc_weight_profile(pump, mode_waist, ell, p_cut, rule).sum())
        total += s if ell == 0 else 2.0 * s
    return total
