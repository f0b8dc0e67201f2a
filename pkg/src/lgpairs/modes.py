"""Laguerre-Gauss field primitives: associated Laguerre polynomials,
normalized LG radial profiles, radial quadrature rules, and overlap
integrals.

The model is separable: fields are sampled radially on a shared quadrature
rule, and the azimuthal factor e^{i ell phi} is carried symbolically by the
field's ``ell`` index. Azimuthal integrals therefore reduce to Kronecker
deltas inside the overlap operations.

All lengths are micrometres.
"""

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_legendre

from ._backend import lg_radial_basis

TWO_PI = 2.0 * np.pi

_rule_tokens = itertools.count()


@dataclass(frozen=True)
class ModeIndex:
    """Azimuthal index ell and radial index p of an LG mode.

    ell may be any integer (sign = handedness of the e^{i ell phi} twist);
    p counts radial nodes and must be >= 0.
    """

    ell: int
    p: int

    def __post_init__(self):
        if self.p < 0:
            raise ValueError(f"radial index p must be >= 0, got {self.p}")


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Radial quadrature nodes/weights on (0, r_max].

    ``token`` identifies the rule instance for caching; rules are immutable
    after construction.
    """

    nodes: np.ndarray
    weights: np.ndarray
    r_max: float
    token: int = field(default_factory=lambda: next(_rule_tokens))

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=np.float64)
        weights = np.asarray(self.weights, dtype=np.float64)
        if nodes.ndim != 1 or weights.ndim != 1 or nodes.shape != weights.shape:
            raise ValueError("nodes and weights must be 1-D arrays of equal length")
        if not (self.r_max > 0):
            raise ValueError("r_max must be positive")
        if nodes[0] <= 0 or nodes[-1] > self.r_max or np.any(np.diff(nodes) <= 0):
            raise ValueError("nodes must be strictly increasing within (0, r_max]")
        if np.any(weights <= 0):
            raise ValueError("weights must all be positive")
        nodes.flags.writeable = False
        weights.flags.writeable = False
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @property
    def n(self):
        return self.nodes.shape[0]


@dataclass(frozen=True, eq=False)
class ComplexRadialField:
    """Complex radial samples of a field carrying an implicit e^{i ell phi}.

    Samples live on the nodes of one quadrature rule; units are 1/um so
    that the squared norm 2 pi sum w_k r_k |f_k|^2 is dimensionless.
    """

    ell: int
    samples: np.ndarray

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.complex128)
        if samples.ndim != 1:
            raise ValueError("samples must be a 1-D array")
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)

    def norm_sq(self, rule):
        """Squared norm 2 pi sum w_k r_k |f_k|^2 on the given rule."""
        _check_lengths(self.samples, rule)
        return float(TWO_PI * np.dot(rule.weights * rule.nodes, np.abs(self.samples) ** 2))


def _check_lengths(samples, rule):
    if samples.shape[0] != rule.n:
        raise ValueError(
            f"field has {samples.shape[0]} samples but rule has {rule.n} nodes"
        )


def laguerre(n, alpha, x):
    """Associated Laguerre polynomial L_n^alpha(x).

    Evaluated by the stable three-term recurrence
    L_k = ((2k - 1 + alpha - x) L_{k-1} - (k - 1 + alpha) L_{k-2}) / k.

    Parameters
    ----------
    n : int
        polynomial order, >= 0
    alpha : float
        order parameter, > -1
    x : float or numpy.ndarray
        evaluation point(s)

    Returns
    -------
    float or numpy.ndarray
        L_n^alpha(x), scalar for scalar input

    """
    if n < 0:
        raise ValueError(f"polynomial order n must be >= 0, got {n}")
    if alpha <= -1:
        raise ValueError(f"alpha must be > -1, got {alpha}")
    scalar = np.isscalar(x)
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    lm2 = np.ones_like(x)
    if n == 0:
        return float(lm2[0]) if scalar else lm2
    lm1 = (1.0 + alpha) - x
    for k in range(2, n + 1):
        lm2, lm1 = lm1, ((2.0 * k - 1.0 + alpha - x) * lm1 - (k - 1.0 + alpha) * lm2) / k
    return float(lm1[0]) if scalar else lm1


def lg_radial(idx, w, r):
    """Normalized radial profile of the LG mode ``idx`` at waist ``w``.

    sqrt(2 p! / (pi (p+|ell|)!)) (1/w) (sqrt(2) r/w)^|ell|
    L_p^{|ell|}(2 r^2/w^2) exp(-r^2/w^2); together with the implicit
    e^{i ell phi} the mode is unit-normalized under the measure r dr dphi.

    Parameters
    ----------
    idx : ModeIndex
        mode indices (ell, p)
    w : float
        waist in um, > 0
    r : float or numpy.ndarray
        radius in um, >= 0

    Returns
    -------
    float or numpy.ndarray
        profile value(s) in 1/um

    """
    if w <= 0:
        raise ValueError(f"waist must be positive, got {w}")
    scalar = np.isscalar(r)
    r = np.atleast_1d(np.asarray(r, dtype=np.float64))
    if np.any(r < 0):
        raise ValueError("radius must be >= 0")
    out = np.empty_like(r)
    pos = r > 0
    # the log-fused kernel needs r > 0; on axis only ell = 0 survives, where
    # the profile reduces to the normalization times L_p(0) = 1
    out[pos] = lg_radial_basis(idx.p, idx.ell, float(w), r[pos])[idx.p]
    out[~pos] = _radial_norm(idx.p, idx.ell, w) if idx.ell == 0 else 0.0
    return float(out[0]) if scalar else out


def _radial_norm(p, ell, w):
    from math import exp, lgamma, pi, sqrt

    a = abs(ell)
    return sqrt(2.0 * exp(lgamma(p + 1.0) - lgamma(p + a + 1.0)) / pi) / w


def lg_basis(ell, w, pmax, rule):
    """Matrix of lg_radial profiles, rows p = 0..pmax, on the rule nodes."""
    if w <= 0:
        raise ValueError(f"waist must be positive, got {w}")
    if pmax < 0:
        raise ValueError(f"pmax must be >= 0, got {pmax}")
    key = (int(ell), float(w), int(pmax), rule.token)
    cached = _basis_cache.get(key)
    if cached is None:
        cached = lg_radial_basis(int(pmax), int(ell), float(w), rule.nodes)
        cached.flags.writeable = False
        _basis_cache[key] = cached
    return cached


_basis_cache = {}


def make_quadrature(r_max, n_nodes):
    """Gauss-Legendre rule mapped to (0, r_max].

    Parameters
    ----------
    r_max : float
        truncation radius in um, > 0
    n_nodes : int
        number of nodes, >= 2

    Returns
    -------
    QuadratureRule

    """
    if r_max <= 0:
        raise ValueError(f"r_max must be positive, got {r_max}")
    if n_nodes < 2:
        raise ValueError(f"n_nodes must be >= 2, got {n_nodes}")
    x, wts = roots_legendre(int(n_nodes))
    nodes = (x + 1.0) * (0.5 * r_max)
    weights = wts * (0.5 * r_max)
    return QuadratureRule(nodes=nodes, weights=weights, r_max=float(r_max))


def make_segmented_quadrature(r_max, boundaries, nodes_per_panel=6):
    """Composite Gauss-Legendre rule with panels split at ``boundaries``.

    Integrands that are smooth between consecutive boundaries (e.g. phase
    staircases flipping only at pixel edges or at polynomial zeros) are
    integrated with spectral accuracy per panel, which a single global rule
    cannot achieve across jump discontinuities.

    Parameters
    ----------
    r_max : float
        truncation radius in um, > 0
    boundaries : iterable of float
        panel split radii; values outside (0, r_max) are ignored
    nodes_per_panel : int
        Gauss-Legendre nodes per panel, >= 2

    Returns
    -------
    QuadratureRule

    """
    if r_max <= 0:
        raise ValueError(f"r_max must be positive, got {r_max}")
    if nodes_per_panel < 2:
        raise ValueError(f"nodes_per_panel must be >= 2, got {nodes_per_panel}")
    cuts = sorted({float(b) for b in boundaries if 0.0 < b < r_max})
    edges = [0.0] + cuts + [float(r_max)]
    x, wts = roots_legendre(int(nodes_per_panel))
    nodes, weights = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        half = 0.5 * (hi - lo)
        nodes.append((x + 1.0) * half + lo)
        weights.append(wts * half)
    return QuadratureRule(
        nodes=np.concatenate(nodes), weights=np.concatenate(weights), r_max=float(r_max)
    )


def overlap_conj(f, g, rule):
    """Inner product 2 pi delta_{ell_f, ell_g} sum w_k r_k f_k conj(g_k).

    The Kronecker delta is the analytic azimuthal integral of
    e^{i (ell_f - ell_g) phi}.
    """
    _check_lengths(f.samples, rule)
    _check_lengths(g.samples, rule)
    if f.ell != g.ell:
        return 0j
    return complex(TWO_PI * np.dot(rule.weights * rule.nodes, f.samples * np.conj(g.samples)))


def overlap_plain(f, g, rule):
    """Unconjugated product integral 2 pi delta_{ell_f + ell_g, 0} sum w_k r_k f_k g_k.

    The delta is the azimuthal integral of e^{i (ell_f + ell_g) phi}; this
    is the overlap of two fields as written, not an inner product. The
    product is formed from explicit real/imaginary parts so that swapping
    the arguments returns the bit-identical value (numpy's fused complex
    multiply is not exactly commutative).
    """
    _check_lengths(f.samples, rule)
    _check_lengths(g.samples, rule)
    if f.ell + g.ell != 0:
        return 0j
    measure = rule.weights * rule.nodes
    fr, fi = f.samples.real, f.samples.imag
    gr, gi = g.samples.real, g.samples.imag
    re = float(np.sum(measure * (fr * gr - fi * gi)))
    im = float(np.sum(measure * (fr * gi + fi * gr)))
    return complex(TWO_PI * re, TWO_PI * im)


def lg_mode_field(idx, w, rule):
    """ComplexRadialField holding the LG mode ``idx`` sampled on ``rule``."""
    return ComplexRadialField(ell=idx.ell, samples=lg_basis(idx.ell, w, idx.p, rule)[idx.p].astype(np.complex128))
