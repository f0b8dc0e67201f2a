"""Advanced-wave detection model for SLM-based mode projectors.

Back-propagated from the single-mode fiber, the detection field in the
crystal-image plane is the fiber's Gaussian amplitude carrying the phase
the modulator displays: u = exp(i arg[LG_p^ell] - r^2/w_SMF^2). The radial
part of arg[LG] is a binary 0/pi mask flipping at the zeros of the Laguerre
polynomial; the e^{i ell phi} twist rides along symbolically. The field is
expanded in LG modes at the detection waist, each coefficient is damped by
the square root of the thin-crystal SPDC weight of its mode pair, and the
damped expansion is resummed into the effective detection field used for
coincidence overlaps.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_genlaguerre

from .errors import ConvergenceError
from .modes import TWO_PI, ComplexRadialField, ModeIndex, lg_basis
from ._backend import lg_radial_basis

# expansion control: the cutoff doubles from the configured start up to the
# hard cap until the estimated beyond-cutoff share of the re-weighted field
# energy falls below the tolerance
TAIL_TOLERANCE = 1e-2
PMAX_CAP = 200


@dataclass(frozen=True)
class OpticsConfig:
    """Imaging and fiber geometry in the modulator plane.

    pixel_pitch_um None means an ideal continuous modulator (no phase
    staircase).
    """

    magnification: float = 7.5
    fiber_waist_slm_um: float = 1275.0
    pixel_pitch_um: float | None = 20.0

    def __post_init__(self):
        if self.magnification <= 0:
            raise ValueError("magnification must be positive")
        if self.fiber_waist_slm_um <= 0:
            raise ValueError("fiber_waist_slm_um must be positive")
        if self.pixel_pitch_um is not None and self.pixel_pitch_um <= 0:
            raise ValueError("pixel_pitch_um must be positive when present")


@dataclass(frozen=True)
class DetectionConfig:
    """One projector setting: mode indices, waist, expansion cutoff, optics."""

    mode: ModeIndex
    mode_waist_um: float
    expansion_pmax: int = 60
    optics: OpticsConfig = OpticsConfig()

    def __post_init__(self):
        if self.mode_waist_um <= 0:
            raise ValueError("mode_waist_um must be positive")
        if self.expansion_pmax < self.mode.p:
            raise ValueError("expansion_pmax must be >= the projected mode's p")


@dataclass(frozen=True)
class DecompositionResult:
    """LG expansion coefficients of a detection field at one ell.

    ``tail_energy`` is the field energy beyond the cutoff (an upper bound
    after re-weighting, since weights decrease with p).
    """

    ell: int
    alphas: np.ndarray
    tail_energy: float

    def __post_init__(self):
        alphas = np.asarray(self.alphas, dtype=np.complex128)
        if alphas.ndim != 1:
            raise ValueError("alphas must be 1-D")
        if self.tail_energy < 0:
            raise ValueError("tail_energy must be >= 0")
        alphas.flags.writeable = False
        object.__setattr__(self, "alphas", alphas)

    @property
    def pmax(self):
        return self.alphas.shape[0] - 1


def mask_phase(mode, w, r):
    """Radial part of the mode-projector phase: 0 or pi in [0, 2 pi).

    pi wherever L_p^{|ell|}(2 r^2 / w^2) < 0, else 0; the azimuthal term
    ell*phi is carried by the field index, not by this profile.
    """
    if w <= 0:
        raise ValueError(f"waist must be positive, got {w}")
    scalar = np.isscalar(r)
    r = np.atleast_1d(np.asarray(r, dtype=np.float64))
    if np.any(r < 0):
        raise ValueError("radius must be >= 0")
    out = np.zeros_like(r)
    if mode.p > 0:
        pos = r > 0
        # sign of the normalized profile equals the polynomial's sign
        vals = lg_radial_basis(mode.p, mode.ell, float(w), r[pos])[mode.p]
        out[pos] = np.where(vals >= 0.0, 0.0, math.pi)
    return float(out[0]) if scalar else out


def mask_phase_profile(mode, w):
    """The radial phase as a callable r -> phase, for staircasing."""
    return lambda r: mask_phase(mode, w, r)


def pixelate(phase_profile, pitch):
    """Staircase a radial phase profile on annuli of width ``pitch``.

    Each annulus [k pitch, (k+1) pitch) takes the continuous phase at its
    midpoint.
    """
    if pitch <= 0:
        raise ValueError(f"pitch must be positive, got {pitch}")

    def staircased(r):
        r = np.asarray(r, dtype=np.float64)
        return phase_profile((np.floor(r / pitch) + 0.5) * pitch)

    return staircased


def detection_field_raw(cfg, rule):
    """Fiber Gaussian carrying the (optionally pixelated) mask phase."""
    profile = mask_phase_profile(cfg.mode, cfg.mode_waist_um)
    if cfg.optics.pixel_pitch_um is not None:
        profile = pixelate(profile, cfg.optics.pixel_pitch_um)
    phase = profile(rule.nodes)
    envelope = np.exp(-((rule.nodes / cfg.optics.fiber_waist_slm_um) ** 2))
    return ComplexRadialField(ell=cfg.mode.ell, samples=np.exp(1j * phase) * envelope)


def decompose(u_xtal, w, pmax, rule):
    """Expand a field in LG modes at waist ``w`` up to order ``pmax``.

    alpha_p = 2 pi sum w_k r_k LG_p(r_k) conj(u_k); the remainder of the
    field's energy is reported as tail_energy.
    """
    if pmax < 0:
        raise ValueError(f"pmax must be >= 0, got {pmax}")
    basis = lg_basis(u_xtal.ell, w, pmax, rule)
    measure = rule.weights * rule.nodes
    alphas = TWO_PI * (basis @ (measure * np.conj(u_xtal.samples)))
    tail = u_xtal.norm_sq(rule) - float(np.sum(np.abs(alphas) ** 2))
    return DecompositionResult(ell=u_xtal.ell, alphas=alphas, tail_energy=max(tail, 0.0))


def reweight(d, weights):
    """Damp each coefficient by the square root of its SPDC weight.

    ``weights`` are the pair weights per expansion order; the stored tail
    is scaled by the cutoff weight, an upper bound on the re-weighted tail
    for weights decreasing in p.
    """
    weights = np.asarray(weights, dtype=np.float64)
    if weights.shape != d.alphas.shape:
        raise ValueError(
            f"got {weights.shape[0]} weights for {d.alphas.shape[0]} coefficients"
        )
    if np.any(weights < 0):
        raise ValueError("weights must be >= 0")
    return DecompositionResult(
        ell=d.ell,
        alphas=np.sqrt(weights) * d.alphas,
        tail_energy=d.tail_energy * float(weights[-1]),
    )


def effective_detection_field(d, w, rule):
    """Resum a (re-weighted) expansion into field samples on the rule."""
    basis = lg_basis(d.ell, w, d.pmax, rule)
    return ComplexRadialField(ell=d.ell, samples=d.alphas @ basis)


def build_detection_field(cfg, weights_for, rule, tail_tol=TAIL_TOLERANCE, pmax_cap=PMAX_CAP):
    """Full detection chain with automatic expansion-cutoff control.

    ``weights_for(pmax)`` must return the normalized SPDC weights for
    orders 0..pmax at this config's ell and waist. The cutoff starts at the
    configured expansion_pmax and doubles (capped) until the estimated
    share of the re-weighted field's energy beyond the cutoff falls below
    ``tail_tol``. That share is scale-free, so the weight normalization
    cancels out of the criterion.

    Returns
    -------
    (ComplexRadialField, dict)
        the effective detection field and convergence diagnostics

    """
    u = detection_field_raw(cfg, rule)
    norm2 = u.norm_sq(rule)
    pmax = max(cfg.expansion_pmax, cfg.mode.p)
    while True:
        d = reweight(decompose(u, cfg.mode_waist_um, pmax, rule), weights_for(pmax))
        captured = float(np.sum(np.abs(d.alphas) ** 2))
        rel_tail = d.tail_energy / (captured + d.tail_energy) if d.tail_energy > 0 else 0.0
        if rel_tail < tail_tol:
            break
        nxt = min(2 * pmax, pmax_cap)
        if nxt == pmax:
            raise ConvergenceError(
                f"expansion for mode (ell={cfg.mode.ell}, p={cfg.mode.p}) at waist "
                f"{cfg.mode_waist_um} um still has relative tail {rel_tail:.3e} at "
                f"the cutoff cap {pmax_cap}",
                ell=cfg.mode.ell,
                p=cfg.mode.p,
            )
        pmax = nxt
    field = effective_detection_field(d, cfg.mode_waist_um, rule)
    diagnostics = {
        "pmax": pmax,
        "tail_energy": d.tail_energy,
        "relative_tail": rel_tail,
        "field_norm_sq": norm2,
    }
    return field, diagnostics


def to_working_plane(waist_at_crystal, optics):
    """Map a crystal-plane waist into the modulator plane (times M)."""
    if waist_at_crystal <= 0:
        raise ValueError("waist must be positive")
    return waist_at_crystal * optics.magnification


def mask_flip_radii(mode, w, r_max=None):
    """Radii where the continuous mask phase flips (Laguerre zeros).

    Used to align quadrature panels with the mask discontinuities; the
    zeros come from the Gauss-Laguerre companion roots, independent of the
    recurrence evaluation path.
    """
    if mode.p == 0:
        return np.empty(0)
    x = roots_genlaguerre(mode.p, abs(mode.ell))[0]
    radii = w * np.sqrt(x / 2.0)
    if r_max is not None:
        radii = radii[radii < r_max]
    return radii


def mask_image(mode, w, n_pixels, pitch):
    """8-bit 2-D rendering of the full mask phase (radial flips + ell*phi).

    Pixel (i, j) covers a pitch-sized cell centered on
    ((j + 0.5 - n/2) pitch, (i + 0.5 - n/2) pitch); phase in [0, 2 pi) maps
    linearly onto 0..255.
    """
    if n_pixels < 1:
        raise ValueError("n_pixels must be >= 1")
    if pitch <= 0:
        raise ValueError("pitch must be positive")
    c = (np.arange(n_pixels) + 0.5 - n_pixels / 2.0) * pitch
    xx, yy = np.meshgrid(c, c)
    rr = np.hypot(xx, yy)
    phase = mask_phase(mode, w, rr.ravel()).reshape(rr.shape)
    phase = np.mod(phase + mode.ell * np.arctan2(yy, xx), 2.0 * math.pi)
    return np.round(phase * (255.0 / (2.0 * math.pi))).astype(np.uint8)


def write_pgm(path, image):
    """Write an 8-bit grayscale image as binary PGM (P5)."""
    image = np.asarray(image, dtype=np.uint8)
    if image.ndim != 2:
        raise ValueError("image must be 2-D")
    header = f"P5\n{image.shape[1]} {image.shape[0]}\n255\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(image.tobytes())
