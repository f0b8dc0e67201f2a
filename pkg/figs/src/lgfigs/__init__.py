"""lgfigs: figure rendering for lgpairs CSV outputs (no physics recomputed)."""

__version__ = "0.1.0"

from .render import render_heatmap, render_sweep  # noqa: F401
