import math

import numpy as np
import pytest
from scipy.special import roots_genlaguerre

from lgpairs.detection import (
    DecompositionResult,
    DetectionConfig,
    OpticsConfig,
    build_detection_field,
    decompose,
    detection_field_raw,
    effective_detection_field,
    mask_flip_radii,
    mask_image,
    mask_phase,
    mask_phase_profile,
    pixelate,
    reweight,
    to_working_plane,
    write_pgm,
)
from lgpairs.errors import ConvergenceError
from lgpairs.modes import ComplexRadialField, ModeIndex, make_quadrature

from conftest import assert_rel, task_rule_for, template_for


def count_flips(phase_values):
    """Number of 0 <-> pi transitions along a sampled radial phase."""
    signs = np.where(phase_values > 1.0, -1.0, 1.0)
    return int(np.sum(signs[1:] != signs[:-1]))


class TestMaskPhase:
    def test_fundamental_is_flat(self):
        r = np.linspace(0.0, 5000.0, 2000)
        assert np.all(mask_phase(ModeIndex(0, 0), 1000.0, r) == 0.0)

    def test_p1_flips_at_known_radius(self):
        w = 1000.0
        r = np.linspace(1.0, 3.0 * w, 200001)
        phase = mask_phase(ModeIndex(0, 1), w, r)
        flip_at = r[np.argmax(phase > 0)]
        assert abs(flip_at - w / math.sqrt(2.0)) < (r[1] - r[0]) * 2
        assert count_flips(phase) == 1

    @pytest.mark.parametrize("ell,p", [(0, 2), (0, 5), (3, 4), (-2, 7), (5, 10)])
    def test_flip_count_equals_p(self, ell, p):
        w = 700.0
        r = np.linspace(1.0, 8.0 * w, 400001)
        assert count_flips(mask_phase(ModeIndex(ell, p), w, r)) == p

    def test_axis_value(self):
        assert mask_phase(ModeIndex(2, 3), 500.0, 0.0) == 0.0

    def test_errors(self):
        with pytest.raises(ValueError):
            mask_phase(ModeIndex(0, 1), -1.0, 10.0)
        with pytest.raises(ValueError):
            mask_phase(ModeIndex(0, 1), 10.0, -1.0)


class TestPixelate:
    def test_constant_profile_unchanged(self):
        prof = pixelate(lambda r: np.full_like(np.asarray(r, dtype=float), 0.25), 20.0)
        r = np.linspace(0.0, 500.0, 101)
        np.testing.assert_array_equal(prof(r), 0.25)

    def test_small_pitch_recovers_flip_radius(self):
        w = 1000.0
        target = w / math.sqrt(2.0)
        for pitch in (40.0, 10.0, 2.0):
            prof = pixelate(mask_phase_profile(ModeIndex(0, 1), w), pitch)
            r = np.linspace(1.0, 2.0 * w, 400001)
            phase = prof(r)
            flip_at = r[np.argmax(phase > 0)]
            assert abs(flip_at - target) <= pitch / 2.0 + (r[1] - r[0])

    def test_paper_scale_mask_keeps_all_flips(self):
        # p=10 at w=500 um: adjacent polynomial zeros are 170+ um apart in
        # radius, far wider than a 20 um annulus, so no two flips can merge
        radii = 500.0 * np.sqrt(roots_genlaguerre(10, 0)[0] / 2.0)
        assert np.diff(radii).min() > 100.0
        r = np.linspace(1.0, 3000.0, 600001)
        prof = pixelate(mask_phase_profile(ModeIndex(0, 10), 500.0), 20.0)
        assert count_flips(prof(r)) == 10

    def test_tight_mask_merges_flips(self):
        # p=10 at w=40 um: several zero gaps are below the 20 um pitch, so
        # staircasing must drop flips
        radii = 40.0 * np.sqrt(roots_genlaguerre(10, 0)[0] / 2.0)
        gaps = np.diff(radii)
        assert (gaps < 20.0).any()
        r = np.linspace(0.5, 300.0, 600001)
        continuous = count_flips(mask_phase(ModeIndex(0, 10), 40.0, r))
        prof = pixelate(mask_phase_profile(ModeIndex(0, 10), 40.0), 20.0)
        staircased = count_flips(prof(r))
        assert continuous == 10
        assert staircased < 10

    @pytest.mark.parametrize("ell,p,w", [(0, 3, 300.0), (2, 6, 450.0), (0, 10, 500.0)])
    def test_pixelation_never_adds_flips(self, ell, p, w):
        r = np.linspace(0.5, 9.0 * w, 400001)
        continuous = count_flips(mask_phase(ModeIndex(ell, p), w, r))
        prof = pixelate(mask_phase_profile(ModeIndex(ell, p), w), 20.0)
        assert count_flips(prof(r)) <= continuous

    def test_bad_pitch(self):
        with pytest.raises(ValueError):
            pixelate(lambda r: r, 0.0)


class TestDetectionFieldRaw:
    def test_fundamental_is_pure_gaussian(self, optics_continuous):
        rule = make_quadrature(9.0 * 1275.0, 1000)
        cfg = DetectionConfig(ModeIndex(0, 0), 1000.0, optics=optics_continuous)
        f = detection_field_raw(cfg, rule)
        expected = np.exp(-((rule.nodes / 1275.0) ** 2))
        np.testing.assert_allclose(f.samples.real, expected, rtol=1e-14)
        np.testing.assert_array_equal(f.samples.imag, 0.0)

    @pytest.mark.parametrize("ell,p", [(0, 0), (0, 5), (3, 2), (-5, 8)])
    def test_magnitude_is_phase_only(self, ell, p, optics_pixelated):
        rule = make_quadrature(9.0 * 1275.0, 1500)
        cfg = DetectionConfig(ModeIndex(ell, p), 700.0, optics=optics_pixelated)
        f = detection_field_raw(cfg, rule)
        envelope = np.exp(-((rule.nodes / 1275.0) ** 2))
        np.testing.assert_array_equal(np.abs(f.samples), envelope)

    def test_p1_sign_flip_location(self, optics_continuous):
        rule = make_quadrature(3000.0, 4000)
        w = 1000.0
        cfg = DetectionConfig(ModeIndex(0, 1), w, optics=optics_continuous)
        f = detection_field_raw(cfg, rule)
        signs = np.sign(f.samples.real)
        flip_idx = np.argmax(signs < 0)
        assert rule.nodes[flip_idx - 1] < w / math.sqrt(2.0) < rule.nodes[flip_idx + 1]

    def test_invariants(self, optics_continuous):
        with pytest.raises(ValueError):
            DetectionConfig(ModeIndex(0, 0), -5.0, optics=optics_continuous)
        with pytest.raises(ValueError):
            DetectionConfig(ModeIndex(0, 7), 500.0, expansion_pmax=3, optics=optics_continuous)
        with pytest.raises(ValueError):
            OpticsConfig(magnification=0.0)
        with pytest.raises(ValueError):
            OpticsConfig(pixel_pitch_um=-2.0)


@pytest.fixture(scope="module")
def rule():
    return make_quadrature(9.0 * 1275.0, 2500)


class TestDecompose:
    def test_gaussian_self_decomposition(self, rule):
        w = 800.0
        u = ComplexRadialField(ell=0, samples=np.exp(-((rule.nodes / w) ** 2)))
        d = decompose(u, w, 8, rule)
        assert_rel(d.alphas[0].real, w * math.sqrt(math.pi / 2.0), 1e-10)
        assert np.all(np.abs(d.alphas[1:]) < 1e-9)

    def test_parseval(self, rule, optics_continuous):
        cfg = DetectionConfig(ModeIndex(0, 3), 900.0, optics=optics_continuous)
        u = detection_field_raw(cfg, rule)
        d = decompose(u, 900.0, 60, rule)
        total = float(np.sum(np.abs(d.alphas) ** 2)) + d.tail_energy
        assert_rel(total, u.norm_sq(rule), 1e-9)

    def test_tail_monotone_in_cutoff(self, rule, optics_continuous):
        cfg = DetectionConfig(ModeIndex(0, 1), 700.0, optics=optics_continuous)
        u = detection_field_raw(cfg, rule)
        tail20 = decompose(u, 700.0, 20, rule).tail_energy
        tail60 = decompose(u, 700.0, 60, rule).tail_energy
        assert tail60 <= tail20
        # phase jumps keep high orders alive: the tail falls slowly
        assert tail60 > 0.05 * tail20

    def test_bad_pmax(self, rule):
        u = ComplexRadialField(ell=0, samples=np.ones(rule.n))
        with pytest.raises(ValueError):
            decompose(u, 500.0, -1, rule)


class TestReweight:
    def _demo(self):
        rule = make_quadrature(9.0 * 1275.0, 2000)
        cfg = DetectionConfig(ModeIndex(0, 2), 800.0, optics=OpticsConfig(pixel_pitch_um=None))
        u = detection_field_raw(cfg, rule)
        return decompose(u, 800.0, 40, rule)

    def test_unit_weights_identity(self):
        d = self._demo()
        out = reweight(d, np.ones(d.pmax + 1))
        np.testing.assert_array_equal(out.alphas, d.alphas)
        assert out.tail_energy == d.tail_energy

    def test_zero_weights_zero_field(self):
        d = self._demo()
        out = reweight(d, np.zeros(d.pmax + 1))
        assert np.all(out.alphas == 0)

    def test_decaying_weights_concentrate_energy(self):
        d = self._demo()
        wts = 0.8 ** np.arange(d.pmax + 1)
        out = reweight(d, wts)
        e_in = np.abs(d.alphas) ** 2
        e_out = np.abs(out.alphas) ** 2
        for cut in (1, 5, 10, 20, 30):
            share_in = e_in[cut:].sum() / e_in.sum()
            share_out = e_out[cut:].sum() / e_out.sum()
            assert share_out < share_in

    def test_length_mismatch(self):
        d = self._demo()
        with pytest.raises(ValueError):
            reweight(d, np.ones(d.pmax))


class TestEffectiveField:
    def test_single_coefficient_reproduces_mode(self):
        rule = make_quadrature(9000.0, 1500)
        alphas = np.zeros(5, dtype=complex)
        alphas[0] = 1.0
        d = DecompositionResult(ell=2, alphas=alphas, tail_energy=0.0)
        f = effective_detection_field(d, 600.0, rule)
        from lgpairs.modes import lg_basis

        np.testing.assert_array_equal(f.samples.real, lg_basis(2, 600.0, 0, rule)[0])
        assert f.ell == 2

    def test_linearity(self):
        rule = make_quadrature(9000.0, 800)
        rng = np.random.default_rng(11)
        a = rng.normal(size=6) + 1j * rng.normal(size=6)
        b = rng.normal(size=6) + 1j * rng.normal(size=6)
        mk = lambda v: DecompositionResult(ell=0, alphas=v, tail_energy=0.0)
        f_ab = effective_detection_field(mk(a + b), 700.0, rule)
        f_a = effective_detection_field(mk(a), 700.0, rule)
        f_b = effective_detection_field(mk(b), 700.0, rule)
        np.testing.assert_allclose(f_ab.samples, f_a.samples + f_b.samples, rtol=1e-12, atol=1e-18)

    def test_round_trip(self, optics_continuous):
        rule = make_quadrature(9.0 * 1275.0, 2500)
        cfg = DetectionConfig(ModeIndex(0, 2), 900.0, optics=optics_continuous)
        u = detection_field_raw(cfg, rule)
        d = reweight(decompose(u, 900.0, 30, rule), np.ones(31))
        f = effective_detection_field(d, 900.0, rule)
        d2 = decompose(f, 900.0, 30, rule)
        np.testing.assert_allclose(d2.alphas, d.alphas, atol=1e-9)


class TestBuildDetectionField:
    def test_paper_geometry_converges(self, paper_source, optics_pixelated):
        rule = task_rule_for([1000.0], [0], 3, pixelated=True)
        from lgpairs.correlate import _weights_provider

        weights_for = _weights_provider(paper_source, optics_pixelated, 1000.0, 0, rule)
        cfg = template_for(optics_pixelated, 1000.0)
        field, diag = build_detection_field(cfg, weights_for, rule)
        assert diag["pmax"] >= 60
        assert diag["relative_tail"] < 1e-2
        assert field.samples.shape[0] == rule.n

    def test_cap_exhaustion_raises(self, optics_continuous):
        rule = make_quadrature(9.0 * 1275.0, 1200)
        cfg = DetectionConfig(ModeIndex(ell=0, p=4), 500.0, expansion_pmax=4,
                              optics=optics_continuous)
        with pytest.raises(ConvergenceError) as err:
            build_detection_field(cfg, lambda pmax: np.ones(pmax + 1), rule,
                                  tail_tol=1e-12, pmax_cap=8)
        assert err.value.ell == 0
        assert err.value.p == 4


class TestWorkingPlane:
    def test_paper_magnification(self, optics_pixelated):
        working = to_working_plane(325.0, optics_pixelated)
        assert working == 2437.5
        assert round(working / 1000.0, 1) == 2.4
        assert round(working / 812.5, 1) == 3.0
        assert round(working / 500.0, 1) == 4.9

    def test_identity(self):
        optics = OpticsConfig(magnification=1.0)
        assert to_working_plane(130.0, optics) == 130.0

    def test_rejects_nonpositive(self, optics_pixelated):
        with pytest.raises(ValueError):
            to_working_plane(0.0, optics_pixelated)


class TestMaskExport:
    def test_flat_mask_is_zero(self):
        img = mask_image(ModeIndex(0, 0), 1000.0, 32, 20.0)
        assert img.shape == (32, 32)
        assert img.dtype == np.uint8
        assert np.all(img == 0)

    def test_azimuthal_twist_rendered(self):
        img = mask_image(ModeIndex(1, 0), 1000.0, 64, 20.0)
        # a single twist sweeps (almost) the full grayscale over the azimuth;
        # pixel centers sit off the phi = 0 seam, so the exact ends are missed
        assert int(img.max()) - int(img.min()) > 248

    def test_radial_rings_rendered(self):
        img = mask_image(ModeIndex(0, 2), 300.0, 128, 20.0)
        center = img[64, 64:]
        assert set(np.unique(center)).issubset({0, 127, 128})
        assert (center > 0).any()

    def test_pgm_bytes(self, tmp_path):
        img = mask_image(ModeIndex(2, 1), 500.0, 48, 20.0)
        path = tmp_path / "mask.pgm"
        write_pgm(path, img)
        blob = path.read_bytes()
        assert blob.startswith(b"P5\n48 48\n255\n")
        assert len(blob) == len(b"P5\n48 48\n255\n") + 48 * 48
        body = np.frombuffer(blob[len(b"P5\n48 48\n255\n"):], dtype=np.uint8)
        np.testing.assert_array_equal(body.reshape(48, 48), img)

    def test_flip_radii_match_quadrature_oracle(self):
        radii = mask_flip_radii(ModeIndex(0, 4), 600.0)
        oracle = 600.0 * np.sqrt(roots_genlaguerre(4, 0)[0] / 2.0)
        np.testing.assert_allclose(radii, oracle, rtol=1e-12)
        assert mask_flip_radii(ModeIndex(3, 0), 600.0).size == 0
