"""Coincidence amplitudes, correlation matrices, and their summary metrics.

A matrix cell is the unconjugated overlap of the signal and idler effective
detection fields; its squared magnitude is the observable coincidence rate.
Orbital angular momentum conservation is exact here: the azimuthal delta in
the overlap zeroes every cell with ell_s + ell_i != 0.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import detection, source
from .modes import ModeIndex, make_segmented_quadrature, overlap_plain


@dataclass(frozen=True, eq=False)
class CoincidenceMatrix:
    """Grid of coincidence amplitudes and rates over mode-index pairs."""

    signal_modes: tuple
    idler_modes: tuple
    amplitudes: np.ndarray
    rates: np.ndarray

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=np.complex128)
        rates = np.asarray(self.rates, dtype=np.float64)
        if amp.shape != (len(self.signal_modes), len(self.idler_modes)):
            raise ValueError("amplitude grid shape does not match the mode lists")
        if rates.shape != amp.shape:
            raise ValueError("rates grid shape does not match the amplitude grid")
        if np.any(rates < 0):
            raise ValueError("rates must be >= 0")
        amp.flags.writeable = False
        rates.flags.writeable = False
        object.__setattr__(self, "amplitudes", amp)
        object.__setattr__(self, "rates", rates)

    @classmethod
    def from_amplitudes(cls, signal_modes, idler_modes, amplitudes):
        amplitudes = np.asarray(amplitudes, dtype=np.complex128)
        return cls(
            signal_modes=tuple(signal_modes),
            idler_modes=tuple(idler_modes),
            amplitudes=amplitudes,
            rates=np.abs(amplitudes) ** 2,
        )

    def normalized(self):
        """Rates divided by their maximum (all entries in [0, 1])."""
        peak = self.rates.max()
        if peak <= 0:
            raise ValueError("cannot normalize an all-zero rate matrix")
        return self.rates / peak

    @property
    def is_square(self):
        return self.rates.shape[0] == self.rates.shape[1]


@dataclass(frozen=True)
class CorrelationStats:
    """Summary metrics of one coincidence matrix."""

    w_diag: float
    schmidt_estimate: float
    diagonal_participation: float


def coincidence_amplitude(u_s, u_i, rule):
    """Unconjugated overlap of the two effective detection fields."""
    return overlap_plain(u_s, u_i, rule)


def w_metric(m):
    """Diagonal fraction of the total rate; unity for perfectly correlated bases."""
    if not m.is_square:
        raise ValueError("W is defined for square matrices only")
    total = m.rates.sum()
    if total <= 0:
        raise ValueError("W is undefined for an all-zero matrix")
    return float(np.trace(m.rates) / total)


def schmidt_estimate(m):
    """Participation ratio of the singular-value spectrum of the amplitudes.

    lambda_k = s_k^2 / sum_j s_j^2, K = 1 / sum lambda_k^2.
    """
    s = np.linalg.svd(m.amplitudes, compute_uv=False)
    total = np.sum(s**2)
    if total <= 0:
        raise ValueError("Schmidt estimate is undefined for an all-zero matrix")
    lam = s**2 / total
    return float(1.0 / np.sum(lam**2))


def diagonal_participation(m):
    """Participation ratio (sum d)^2 / sum d^2 of the diagonal rates."""
    if not m.is_square:
        raise ValueError("diagonal participation needs a square matrix")
    d = np.diag(m.rates)
    if d.sum() <= 0:
        raise ValueError("diagonal participation is undefined for a zero diagonal")
    return float(d.sum() ** 2 / np.sum(d**2))


def stats_for(m, estimator="svd"):
    return CorrelationStats(
        w_diag=w_metric(m),
        schmidt_estimate=schmidt_estimate(m) if estimator == "svd" else diagonal_participation(m),
        diagonal_participation=diagonal_participation(m),
    )


def gamma_for(src, optics, mode_waist_um):
    """Pump-to-detection waist ratio in the working plane."""
    return detection.to_working_plane(src.pump_waist_um, optics) / mode_waist_um


def thread_count(threads=None):
    """Worker count: explicit argument, else LGPAIRS_THREADS, else 1."""
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get("LGPAIRS_THREADS", "").strip()
    return max(1, int(env)) if env else 1


_weights_cache = {}


def _weights_provider(src, optics, mode_waist, ell, rule):
    """Normalized SPDC weights w(p') for 0..pmax, cached per configuration.

    The raw profile is evaluated once to the cutoff cap and sliced, so the
    auto-doubling cutoff search never recomputes it.
    """
    working = detection.to_working_plane(src.pump_waist_um, optics)
    key = (rule.token, float(working), float(mode_waist), abs(int(ell)))
    entry = _weights_cache.get(key)
    if entry is None:
        pump = source.pump_field(src, working, rule)
        profile = source.spdc_weight_profile(pump, mode_waist, ell, detection.PMAX_CAP, rule)
        z = source.spdc_normalization(pump, mode_waist, rule)
        entry = profile / z
        _weights_cache[key] = entry

    def weights_for(pmax):
        if pmax > detection.PMAX_CAP:
            raise ValueError(f"pmax {pmax} exceeds the cutoff cap {detection.PMAX_CAP}")
        return entry[: pmax + 1]

    return weights_for


def _detection_field(cfg, src, rule, diagnostics):
    weights_for = _weights_provider(src, cfg.optics, cfg.mode_waist_um, cfg.mode.ell, rule)
    field, diag = detection.build_detection_field(cfg, weights_for, rule)
    diagnostics.append({"ell": cfg.mode.ell, "p": cfg.mode.p, **diag})
    return field


def _fill_amplitudes(us, ui, rule, threads):
    amp = np.zeros((len(us), len(ui)), dtype=np.complex128)

    def fill_row(i):
        for j, g in enumerate(ui):
            amp[i, j] = coincidence_amplitude(us[i], g, rule)

    workers = thread_count(threads)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fill_row, range(len(us))))
    else:
        for i in range(len(us)):
            fill_row(i)
    return amp


def radial_matrix(ell, p_max, src, det_template, rule, threads=None, diagnostics=None):
    """Coincidence matrix over radial indices at signal ell / idler -ell.

    ``det_template`` fixes waist, cutoff, and optics; its mode field is
    replaced cell by cell. Fields are built once per (ell, p) before the
    fill, so the fill order cannot affect the result.
    """
    if p_max < 0:
        raise ValueError(f"p_max must be >= 0, got {p_max}")
    diagnostics = diagnostics if diagnostics is not None else []
    us, ui = [], []
    for p in range(p_max + 1):
        cfg_s = replace(det_template, mode=ModeIndex(ell=ell, p=p))
        f_s = _detection_field(cfg_s, src, rule, diagnostics)
        us.append(f_s)
        if ell == 0:
            ui.append(f_s)
        else:
            # the radial chain depends on |ell| only; reuse the samples
            ui.append(type(f_s)(ell=-ell, samples=f_s.samples))
    amp = _fill_amplitudes(us, ui, rule, threads)
    modes_s = tuple(ModeIndex(ell=ell, p=p) for p in range(p_max + 1))
    modes_i = tuple(ModeIndex(ell=-ell, p=p) for p in range(p_max + 1))
    return CoincidenceMatrix.from_amplitudes(modes_s, modes_i, amp)


def azimuthal_matrix(p, ell_max, src, det_template, rule, threads=None, diagnostics=None):
    """Coincidence matrix over (ell_s, ell_i) in [-L, L] at fixed radial index.

    Only ell_s = -ell_i cells can be nonzero; the rest are exact zeros from
    the azimuthal integral.
    """
    if ell_max < 0:
        raise ValueError(f"ell_max must be >= 0, got {ell_max}")
    diagnostics = diagnostics if diagnostics is not None else []
    ells = list(range(-ell_max, ell_max + 1))
    fields = {}
    for ell in range(ell_max + 1):
        cfg = replace(det_template, mode=ModeIndex(ell=ell, p=p))
        f = _detection_field(cfg, src, rule, diagnostics)
        fields[ell] = f
        fields[-ell] = f if ell == 0 else type(f)(ell=-ell, samples=f.samples)
    us = [fields[ell] for ell in ells]
    amp = _fill_amplitudes(us, us, rule, threads)
    modes = tuple(ModeIndex(ell=ell, p=p) for ell in ells)
    return CoincidenceMatrix.from_amplitudes(modes, modes, amp)


@dataclass(frozen=True)
class SweepRow:
    """One waist of a sweep: geometry ratio plus the two summary metrics."""

    waist_um: float
    gamma: float
    w_diag: float
    schmidt_estimate: float


def waist_sweep(waists, ell, p_max, src, det_template, rule, threads=None,
                estimator="svd", diagnostics=None):
    """Radial matrix metrics per detection waist.

    Each row recomputes the matrix at that waist with the template's optics
    and cutoff; gamma is the working-plane pump waist over the row's waist.
    """
    if len(waists) == 0:
        raise ValueError("waists must be non-empty")
    if any(w <= 0 for w in waists):
        raise ValueError("waists must all be positive")
    rows = []
    for w in waists:
        template = replace(det_template, mode_waist_um=float(w))
        m = radial_matrix(ell, p_max, src, template, rule, threads=threads,
                          diagnostics=diagnostics)
        stats = stats_for(m, estimator=estimator)
        rows.append(
            SweepRow(
                waist_um=float(w),
                gamma=gamma_for(src, det_template.optics, float(w)),
                w_diag=stats.w_diag,
                schmidt_estimate=stats.schmidt_estimate,
            )
        )
    return rows


def make_task_rule(r_max, n_nodes, masks, pixel_pitch=None, nodes_per_panel=6):
    """Quadrature rule with panels aligned to every mask discontinuity.

    With pixelation, all phase jumps sit on pixel edges, so the annulus
    grid is the panel grid. Without it, a uniform grid sized from the node
    budget is merged with the exact flip radii of every mask in the task,
    keeping each integrand smooth per panel.

    Parameters
    ----------
    r_max : float
        truncation radius in um
    n_nodes : int
        approximate node budget; sets the uniform panel count
    masks : iterable of (ell, p, waist_um)
        all projector settings the rule must support
    pixel_pitch : float or None
        staircase pitch in um; None for continuous masks
    nodes_per_panel : int
        Gauss-Legendre order per panel

    """
    if pixel_pitch is not None:
        bounds = np.arange(pixel_pitch, r_max, pixel_pitch)
    else:
        n_panels = max(2, int(n_nodes) // int(nodes_per_panel))
        bounds = set(np.linspace(0.0, r_max, n_panels + 1)[1:-1])
        for ell, p, waist in masks:
            bounds.update(detection.mask_flip_radii(ModeIndex(ell=ell, p=p), waist, r_max))
    return make_segmented_quadrature(r_max, bounds, nodes_per_panel)
