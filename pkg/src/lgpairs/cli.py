"""Command-line interface: config loading, task dispatch, serialization.

Tasks write a normalized-rate CSV, a raw-rate CSV, and a JSON metadata
sidecar carrying the fully resolved configuration and convergence
diagnostics. All numeric output is fixed at 12 significant digits with LF
line endings, so identical configurations produce byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from datetime import datetime

from . import __version__, correlate, detection, source
from ._backend import BACKEND
from .errors import ConfigError, ConvergenceError
from .modes import ModeIndex

_DEFAULT_WAISTS = [1275.0, 1000.0, 812.5, 650.0, 500.0, 400.0, 300.0]

# section -> key -> (default, validator); validators raise ConfigError
_POS = "positive number"
_POS_INT = "positive integer"


def _num(path, value, require_positive=True):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    if require_positive and value <= 0:
        raise ConfigError(f"{path}: must be > 0, got {value!r}")
    return float(value)


def _int(path, value, minimum=0):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path}: expected an integer, got {value!r}")
    if value < minimum:
        raise ConfigError(f"{path}: must be >= {minimum}, got {value!r}")
    return value


def _any_int(path, value):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path}: expected an integer, got {value!r}")
    return value


def _bool(path, value):
    if not isinstance(value, bool):
        raise ConfigError(f"{path}: expected true/false, got {value!r}")
    return value


def _waists(path, value):
    if not isinstance(value, list) or not value:
        raise ConfigError(f"{path}: expected a non-empty list of waists")
    return [_num(f"{path}[{i}]", v) for i, v in enumerate(value)]


@dataclass
class RunConfig:
    """Fully resolved run configuration (lengths in um unless suffixed)."""

    source: source.SourceParams = field(
        default_factory=lambda: source.SourceParams.from_lab_units(2.0, 413.0, 325.0)
    )
    sigma_per_um: float | None = None
    magnification: float = 7.5
    fiber_waist_slm_um: float = 1275.0
    pixel_pitch_um: float = 20.0
    pixelation: bool = True
    mode_waist_um: float = 1000.0
    expansion_pmax: int = 60
    r_max_factor: float = 9.0
    n_nodes: int = 6000
    nodes_per_panel: int = 6
    ell: int = 0
    p_max: int = 10
    ell_max: int = 5
    waists_um: list = field(default_factory=lambda: list(_DEFAULT_WAISTS))
    estimator: str = "svd"
    output_dir: str = "out"

    def sigma(self):
        return self.sigma_per_um if self.sigma_per_um is not None else source.default_sigma(self.source)

    def optics(self):
        """Optics as used by the model: pitch withheld when pixelation is off."""
        return detection.OpticsConfig(
            magnification=self.magnification,
            fiber_waist_slm_um=self.fiber_waist_slm_um,
            pixel_pitch_um=self.pixel_pitch_um if self.pixelation else None,
        )

    def detection_template(self, waist=None):
        return detection.DetectionConfig(
            mode=ModeIndex(ell=0, p=0),
            mode_waist_um=self.mode_waist_um if waist is None else waist,
            expansion_pmax=self.expansion_pmax,
            optics=self.optics(),
        )

    def working_pump_waist(self):
        return detection.to_working_plane(self.source.pump_waist_um, self.optics())

    def rule_for(self, waists, ells, p_max):
        r_max = self.r_max_factor * max(
            [self.working_pump_waist(), self.fiber_waist_slm_um, *waists]
        )
        masks = [(ell, p, w) for ell in ells for p in range(p_max + 1) for w in waists]
        pitch = self.pixel_pitch_um if self.pixelation else None
        return correlate.make_task_rule(
            r_max, self.n_nodes, masks, pixel_pitch=pitch, nodes_per_panel=self.nodes_per_panel
        )

    def as_dict(self):
        return {
            "source": {
                "crystal_length_mm": self.source.crystal_length_um / 1e3,
                "pump_wavelength_nm": self.source.pump_wavelength_um * 1e3,
                "pump_waist_um": self.source.pump_waist_um,
                "sigma_per_um": self.sigma(),
            },
            "optics": {
                "magnification": self.magnification,
                "fiber_waist_slm_um": self.fiber_waist_slm_um,
                "pixel_pitch_um": self.pixel_pitch_um,
            },
            "detection": {
                "mode_waist_um": self.mode_waist_um,
                "expansion_pmax": self.expansion_pmax,
                "pixelation": self.pixelation,
            },
            "grid": {
                "r_max_factor": self.r_max_factor,
                "n_nodes": self.n_nodes,
                "nodes_per_panel": self.nodes_per_panel,
            },
            "task": {
                "ell": self.ell,
                "p_max": self.p_max,
                "ell_max": self.ell_max,
                "waists_um": list(self.waists_um),
                "estimator": self.estimator,
            },
            "output_dir": self.output_dir,
        }


def load_config(path):
    """Parse and validate a JSON config file; unknown keys are rejected."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"config parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    return config_from_dict(raw)


def config_from_dict(raw):
    cfg = RunConfig()
    handlers = {
        ("source", "crystal_length_mm"): lambda p, v: _num(p, v),
        ("source", "pump_wavelength_nm"): lambda p, v: _num(p, v),
        ("source", "pump_waist_um"): lambda p, v: _num(p, v),
        ("source", "sigma_per_um"): lambda p, v: None if v is None else _num(p, v),
        ("optics", "magnification"): lambda p, v: _num(p, v),
        ("optics", "fiber_waist_slm_um"): lambda p, v: _num(p, v),
        ("optics", "pixel_pitch_um"): lambda p, v: _num(p, v),
        ("detection", "mode_waist_um"): lambda p, v: _num(p, v),
        ("detection", "expansion_pmax"): lambda p, v: _int(p, v, minimum=0),
        ("detection", "pixelation"): _bool,
        ("grid", "r_max_factor"): lambda p, v: _num(p, v),
        ("grid", "n_nodes"): lambda p, v: _int(p, v, minimum=12),
        ("grid", "nodes_per_panel"): lambda p, v: _int(p, v, minimum=2),
        ("task", "ell"): _any_int,
        ("task", "p_max"): lambda p, v: _int(p, v, minimum=0),
        ("task", "ell_max"): lambda p, v: _int(p, v, minimum=0),
        ("task", "waists_um"): _waists,
        ("task", "estimator"): lambda p, v: _estimator(p, v),
    }
    src = {"crystal_length_mm": 2.0, "pump_wavelength_nm": 413.0, "pump_waist_um": 325.0}
    for section, content in raw.items():
        if section == "output_dir":
            if not isinstance(content, str):
                raise ConfigError("output_dir: expected a string")
            cfg.output_dir = content
            continue
        if section not in {"source", "optics", "detection", "grid", "task"}:
            raise ConfigError(f"unknown config section {section!r}")
        if not isinstance(content, dict):
            raise ConfigError(f"{section}: expected an object")
        for key, value in content.items():
            handler = handlers.get((section, key))
            if handler is None:
                raise ConfigError(f"unknown config key {section}.{key!r}")
            checked = handler(f"{section}.{key}", value)
            if section == "source" and key in src:
                src[key] = checked
            elif (section, key) == ("source", "sigma_per_um"):
                cfg.sigma_per_um = checked
            else:
                setattr(cfg, key.replace("-", "_"), checked)
    cfg.source = source.SourceParams.from_lab_units(**src)
    return cfg


def _estimator(path, value):
    if value not in ("svd", "diagonal"):
        raise ConfigError(f"{path}: expected 'svd' or 'diagonal', got {value!r}")
    return value


def _fmt(x):
    return format(float(x), ".12g")


def _write_csv(path, header, rows):
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def _write_matrix_csv(path, matrix, grid, axis):
    """Rows are idler labels (vertical axis), columns signal labels."""
    labels_s = [f"{axis}={m.ell if axis == 'l' else m.p}" for m in matrix.signal_modes]
    labels_i = [f"{axis}={m.ell if axis == 'l' else m.p}" for m in matrix.idler_modes]
    header = [""] + labels_s
    rows = []
    for i, lab in enumerate(labels_i):
        rows.append([lab] + [_fmt(grid[j, i]) for j in range(len(labels_s))])
    _write_csv(path, header, rows)


def _write_meta(path, cfg, task, extra, diagnostics, rule):
    meta = {
        "software": {"name": "lgpairs", "version": __version__, "kernel_backend": BACKEND},
        "config": cfg.as_dict(),
        "task": task,
        "derived": {
            "working_pump_waist_um": cfg.working_pump_waist(),
            "phase_matching_b_um": source.phase_matching_b(cfg.source),
            "sigma_per_um": cfg.sigma(),
            "quadrature": {
                "r_max_um": rule.r_max,
                "n_nodes": rule.n,
                "nodes_per_panel": cfg.nodes_per_panel,
            },
            **extra,
        },
        "convergence": diagnostics,
    }
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _out_paths(cfg, args, task_name):
    import os

    os.makedirs(args.outdir or cfg.output_dir, exist_ok=True)
    stamp = args.stamp or datetime.now().strftime("%Y%m%d-%H%M%S")
    base = os.path.join(args.outdir or cfg.output_dir, f"{task_name}_{stamp}")
    return base


def _run_radial(cfg, args):
    rule = cfg.rule_for([cfg.mode_waist_um], [abs(cfg.ell)], cfg.p_max)
    diagnostics = []
    m = correlate.radial_matrix(
        cfg.ell, cfg.p_max, cfg.source, cfg.detection_template(), rule,
        threads=args.threads, diagnostics=diagnostics,
    )
    base = _out_paths(cfg, args, "radial-matrix")
    _write_matrix_csv(base + ".csv", m, m.normalized(), "p")
    _write_matrix_csv(base + ".raw.csv", m, m.rates, "p")
    stats = correlate.stats_for(m, estimator=cfg.estimator)
    task = {"name": "radial-matrix", "ell": cfg.ell, "p_max": cfg.p_max,
            "mode_waist_um": cfg.mode_waist_um}
    extra = {
        "gamma": correlate.gamma_for(cfg.source, cfg.optics(), cfg.mode_waist_um),
        "w_diag": stats.w_diag,
        "schmidt_estimate": stats.schmidt_estimate,
        "diagonal_participation": stats.diagonal_participation,
    }
    _write_meta(base + ".meta.json", cfg, task, extra, diagnostics, rule)
    print(base + ".csv")
    return 0


def _run_azimuthal(cfg, args):
    rule = cfg.rule_for([cfg.mode_waist_um], list(range(cfg.ell_max + 1)), args.p)
    diagnostics = []
    m = correlate.azimuthal_matrix(
        args.p, cfg.ell_max, cfg.source, cfg.detection_template(), rule,
        threads=args.threads, diagnostics=diagnostics,
    )
    base = _out_paths(cfg, args, "azimuthal-matrix")
    _write_matrix_csv(base + ".csv", m, m.normalized(), "l")
    _write_matrix_csv(base + ".raw.csv", m, m.rates, "l")
    task = {"name": "azimuthal-matrix", "p": args.p, "ell_max": cfg.ell_max,
            "mode_waist_um": cfg.mode_waist_um}
    extra = {
        "gamma": correlate.gamma_for(cfg.source, cfg.optics(), cfg.mode_waist_um),
        "w_diag": correlate.w_metric(m),
    }
    _write_meta(base + ".meta.json", cfg, task, extra, diagnostics, rule)
    print(base + ".csv")
    return 0


def _run_sweep(cfg, args):
    rule = cfg.rule_for(cfg.waists_um, [abs(cfg.ell)], cfg.p_max)
    diagnostics = []
    rows = correlate.waist_sweep(
        cfg.waists_um, cfg.ell, cfg.p_max, cfg.source, cfg.detection_template(), rule,
        threads=args.threads, estimator=cfg.estimator, diagnostics=diagnostics,
    )
    base = _out_paths(cfg, args, "waist-sweep")
    _write_csv(
        base + ".csv",
        ["waist_um", "gamma", "w_diag", "schmidt_estimate"],
        [[_fmt(r.waist_um), _fmt(r.gamma), _fmt(r.w_diag), _fmt(r.schmidt_estimate)] for r in rows],
    )
    task = {"name": "waist-sweep", "ell": cfg.ell, "p_max": cfg.p_max,
            "waists_um": list(cfg.waists_um), "estimator": cfg.estimator}
    _write_meta(base + ".meta.json", cfg, task, {}, diagnostics, rule)
    print(base + ".csv")
    return 0


def _run_schmidt(cfg, args):
    b = source.phase_matching_b(cfg.source)
    sigma = cfg.sigma()
    k = source.schmidt_k(b * sigma)
    report = [
        ("crystal_length_mm", cfg.source.crystal_length_um / 1e3),
        ("pump_wavelength_nm", cfg.source.pump_wavelength_um * 1e3),
        ("pump_waist_um", cfg.source.pump_waist_um),
        ("phase_matching_b_um", b),
        ("sigma_per_um", sigma),
        ("b_sigma", b * sigma),
        ("schmidt_k", k),
        ("schmidt_k_azimuthal", source.schmidt_k_azimuthal(k)),
        ("schmidt_k_radial", source.schmidt_k_radial(k)),
        ("optimal_waist_um", source.optimal_waist(b, sigma)),
        ("ideal_waist_ratio", source.IDEAL_WAIST_RATIO),
    ]
    base = _out_paths(cfg, args, "schmidt")
    _write_csv(base + ".csv", ["quantity", "value"], [[k_, _fmt(v)] for k_, v in report])
    meta = {
        "software": {"name": "lgpairs", "version": __version__, "kernel_backend": BACKEND},
        "config": cfg.as_dict(),
        "task": {"name": "schmidt"},
        "derived": dict(report),
        "convergence": [],
    }
    with open(base + ".meta.json", "w", encoding="ascii", newline="\n") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(base + ".csv")
    return 0


def _run_emit_mask(cfg, args):
    mode = ModeIndex(ell=cfg.ell, p=args.p)
    image = detection.mask_image(mode, cfg.mode_waist_um, args.pixels, cfg.pixel_pitch_um)
    base = _out_paths(cfg, args, "mask")
    detection.write_pgm(base + ".pgm", image)
    meta = {
        "software": {"name": "lgpairs", "version": __version__, "kernel_backend": BACKEND},
        "config": cfg.as_dict(),
        "task": {"name": "emit-mask", "ell": cfg.ell, "p": args.p,
                 "mode_waist_um": cfg.mode_waist_um, "pixels": args.pixels,
                 "pixel_pitch_um": cfg.pixel_pitch_um},
        "derived": {},
        "convergence": [],
    }
    with open(base + ".meta.json", "w", encoding="ascii", newline="\n") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(base + ".pgm")
    return 0


def _apply_overrides(cfg, args):
    if getattr(args, "ell", None) is not None:
        cfg.ell = args.ell
    if getattr(args, "pmax", None) is not None:
        cfg.p_max = _int("--pmax", args.pmax, minimum=0)
    if getattr(args, "ell_max", None) is not None:
        cfg.ell_max = _int("--ell-max", args.ell_max, minimum=0)
    if getattr(args, "waist", None) is not None:
        cfg.mode_waist_um = _num("--waist", args.waist)
    if getattr(args, "waists", None) is not None:
        try:
            cfg.waists_um = [float(tok) for tok in args.waists.split(",") if tok]
        except ValueError as exc:
            raise ConfigError(f"--waists: {exc}") from exc
        cfg.waists_um = _waists("--waists", cfg.waists_um)
    if getattr(args, "pixelation", None) is not None:
        cfg.pixelation = args.pixelation == "on"
    if getattr(args, "estimator", None) is not None:
        cfg.estimator = _estimator("--estimator", args.estimator)
    return cfg


def build_parser():
    parser = argparse.ArgumentParser(
        prog="lgpairs",
        description="Coincidence-rate simulator for entangled photon pairs in the LG basis",
    )
    parser.add_argument("--version", action="version", version=f"lgpairs {__version__}")
    sub = parser.add_subparsers(dest="task", required=True)

    def common(p, waist=False, waists=False, pixelation=True):
        p.add_argument("--config", help="JSON config file; omitted keys take defaults")
        p.add_argument("--outdir", help="output directory (overrides config)")
        p.add_argument("--stamp", help="fixed output-name stamp instead of a timestamp")
        p.add_argument("--threads", type=int, help="worker threads (or LGPAIRS_THREADS)")
        if waist:
            p.add_argument("--waist", type=float, help="detection mode waist in um")
        if waists:
            p.add_argument("--waists", help="comma-separated waists in um")
        if pixelation:
            p.add_argument("--pixelation", choices=("on", "off"))

    p = sub.add_parser("radial-matrix", help="rates over radial indices at fixed ell")
    common(p, waist=True)
    p.add_argument("--ell", type=int)
    p.add_argument("--pmax", type=int)
    p.set_defaults(run=_run_radial)

    p = sub.add_parser("azimuthal-matrix", help="rates over (ell_s, ell_i) at fixed p")
    common(p, waist=True)
    p.add_argument("--p", type=int, default=0)
    p.add_argument("--ell-max", dest="ell_max", type=int)
    p.set_defaults(run=_run_azimuthal)

    p = sub.add_parser("waist-sweep", help="W and Schmidt estimate per detection waist")
    common(p, waists=True)
    p.add_argument("--ell", type=int)
    p.add_argument("--pmax", type=int)
    p.add_argument("--estimator", choices=("svd", "diagonal"))
    p.set_defaults(run=_run_sweep)

    p = sub.add_parser("schmidt", help="closed-form Schmidt-number report")
    common(p, pixelation=False)
    p.set_defaults(run=_run_schmidt)

    p = sub.add_parser("emit-mask", help="export a phase mask as binary PGM")
    common(p, waist=True, pixelation=False)
    p.add_argument("--ell", type=int)
    p.add_argument("--p", type=int, default=0)
    p.add_argument("--pixels", type=int, default=600, help="image side length in pixels")
    p.add_argument("--pitch", type=float, help="pixel pitch in um (overrides optics)")
    p.set_defaults(run=_run_emit_mask)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else RunConfig()
        _apply_overrides(cfg, args)
        if getattr(args, "pitch", None) is not None:
            cfg.pixel_pitch_um = _num("--pitch", args.pitch)
        if getattr(args, "p", None) is not None:
            _int("--p", args.p, minimum=0)
        if getattr(args, "pixels", None) is not None:
            _int("--pixels", args.pixels, minimum=1)
        return args.run(cfg, args)
    except ConfigError as exc:
        _emit_error("config", str(exc))
        return 2
    except ConvergenceError as exc:
        _emit_error("convergence", str(exc), ell=exc.ell, p=exc.p)
        return 3
    except OSError as exc:
        _emit_error("io", str(exc))
        return 4


def _emit_error(kind, message, **fields):
    payload = {"error": {"type": kind, "message": message, **fields}}
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
