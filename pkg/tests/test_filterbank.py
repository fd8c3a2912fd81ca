import numpy as np
import pytest
from scipy.fft import fft2, ifft, ifft2

from wavescat import filterbank as fb
from wavescat.errors import ConfigurationError, DomainError


def time_domain(spectrum):
    return ifft(np.asarray(spectrum))


class TestMorlet1D:
    def test_zero_mean_any_scale(self):
        params = fb.default_morlet_params(1)
        for lam in (1.0, 2.0, 5.5):
            psi_f = fb.build_morlet_1d(params, lam, 1024)
            assert abs(time_domain(psi_f).sum()) < 1e-10

    def test_peak_shifts_one_octave(self):
        params = fb.default_morlet_params(1)
        p1 = np.argmax(np.abs(fb.build_morlet_1d(params, 1.0, 1024)))
        p2 = np.argmax(np.abs(fb.build_morlet_1d(params, 2.0, 1024)))
        assert abs(p1 - 2 * p2) <= 2  # factor 2 within one bin at half res

    def test_l1_norm_preserved_across_scale(self):
        params = fb.default_morlet_params(2)
        l1_ref = np.abs(time_domain(fb.build_morlet_1d(params, 1.0, 1024))).sum()
        l1 = np.abs(time_domain(fb.build_morlet_1d(params, 4.0, 1024))).sum()
        assert abs(l1 - l1_ref) / l1_ref < 1e-6

    def test_rejects_bad_inputs(self):
        params = fb.default_morlet_params(1)
        with pytest.raises(ConfigurationError):
            fb.build_morlet_1d(params, 1.0, 1000)
        with pytest.raises(DomainError):
            fb.build_morlet_1d(params, 0.5, 1024)

    def test_params_validation(self):
        with pytest.raises(DomainError):
            fb.MorletParams(0.6, 10.0)
        with pytest.raises(DomainError):
            fb.MorletParams(0.25, -1.0)
        p = fb.MorletParams(0.25, 3.0)
        assert 0.0 < p.admissibility_correction < 1.0


class TestGaussianLowpass:
    def test_unit_dc_gain(self):
        for J in (2, 4, 6):
            phi = fb.build_gaussian_lowpass(J, 4096)
            assert abs(phi[0] - 1.0) < 1e-9

    def test_time_std_scales_with_j(self):
        stds = {}
        for J in (2, 4):
            phi_t = np.real(time_domain(fb.build_gaussian_lowpass(J, 8192)))
            t = np.arange(8192.0)
            t = np.where(t > 4096, t - 8192, t)
            stds[J] = np.sqrt((phi_t * t ** 2).sum() / phi_t.sum())
        assert abs(stds[4] / stds[2] - 4.0) < 0.04 * 4.0

    def test_kernel_nonnegative_symmetric(self):
        phi_t = np.real(time_domain(fb.build_gaussian_lowpass(3, 2048)))
        assert phi_t.min() > -1e-12
        assert np.allclose(phi_t[1:], phi_t[1:][::-1], atol=1e-12)

    def test_constant_signal_preserved(self):
        phi = fb.build_gaussian_lowpass(2, 1024)
        x = np.full(1024, 2.5)
        y = np.real(ifft(np.fft.fft(x) * phi))
        assert np.max(np.abs(y - 2.5)) < 1e-7

    def test_rejects_small_j(self):
        with pytest.raises(DomainError):
            fb.build_gaussian_lowpass(1, 1024)


class TestFilterBank1D:
    def test_counts(self):
        assert len(fb.build_filterbank_1d(2, 10, 8192).wavelets) == 20
        assert len(fb.build_filterbank_1d(2, 1, 1024).wavelets) == 2

    def test_large_grid_counts_and_scale_bound(self):
        bank = fb.build_filterbank_1d(8, 10, 65536)
        assert len(bank.wavelets) == 80
        assert max(bank.scales) == pytest.approx(2 ** 7.9)
        assert max(bank.scales) < 256

    def test_undersized_signal_rejected(self):
        with pytest.raises(ConfigurationError, match="averaging window"):
            fb.build_filterbank_1d(4, 1, 8)

    def test_banks_immutable(self):
        bank = fb.build_filterbank_1d(2, 1, 512)
        with pytest.raises(ValueError):
            bank.wavelets[0][0] = 1.0
        with pytest.raises(ValueError):
            bank.lowpass[0] = 1.0

    def test_admissibility_every_filter(self):
        bank = fb.build_filterbank_1d(3, 4, 4096)
        for w in bank.wavelets:
            assert abs(time_domain(w).sum()) < 1e-10

    def test_debug_summary(self):
        bank = fb.build_filterbank_1d(2, 2, 1024)
        doc = bank.debug_summary()
        assert doc["J"] == 2 and doc["Q"] == 2 and doc["length"] == 1024
        assert len(doc["filters"]) == 4
        l1s = [f["l1_norm"] for f in doc["filters"]]
        assert max(l1s) - min(l1s) < 1e-6 * max(l1s)
        peaks = [f["peak_frequency"] for f in doc["filters"]]
        assert peaks == sorted(peaks, reverse=True)


class TestLittlewoodPaley1D:
    def test_default_banks_bounds(self):
        for (J, Q, n) in [(2, 10, 8192), (2, 1, 1024), (3, 2, 2048)]:
            bank = fb.build_filterbank_1d(J, Q, n)
            A, B = fb.littlewood_paley(bank)
            assert B <= 1.0 + 1e-6
            assert A > 0.0

    def test_q1_lower_bound_positive(self):
        A, _ = fb.littlewood_paley(fb.build_filterbank_1d(2, 1, 2048))
        assert A > 0.5


class TestFilterBank2D:
    def test_counts(self):
        assert len(fb.build_filterbank_2d(2, 10, 64, 64).wavelets) == 20
        assert len(fb.build_filterbank_2d(3, 8, 64, 64).wavelets) == 24

    def test_orientations_increasing_cover_half_circle(self):
        bank = fb.build_filterbank_2d(2, 6, 64, 64)
        thetas = np.array(bank.thetas)
        assert np.all(np.diff(thetas) > 0)
        assert thetas[0] == 0.0 and thetas[-1] < np.pi

    def test_undersized_image_rejected(self):
        with pytest.raises(ConfigurationError):
            fb.build_filterbank_2d(5, 4, 16, 64)

    def test_single_orientation_prefers_horizontal_grating(self):
        bank = fb.build_filterbank_2d(2, 1, 64, 64)
        cols = np.arange(64)[None, :] * np.ones((64, 1))
        rows = np.arange(64)[:, None] * np.ones((1, 64))
        horizontal = np.cos(2 * np.pi * 0.2 * cols)
        vertical = np.cos(2 * np.pi * 0.2 * rows)

        def energy(img):
            spec = fft2(img)
            return sum(np.sum(np.abs(ifft2(spec * w)) ** 2)
                       for w in bank.wavelets.values())

        assert energy(horizontal) > 100.0 * energy(vertical)

    def test_grating_pair_matches_orientation(self):
        bank = fb.build_filterbank_2d(2, 4, 64, 64)
        cols = np.arange(64)[None, :] * np.ones((64, 1))
        rows = np.arange(64)[:, None] * np.ones((1, 64))
        for img, want_theta in [(np.cos(2 * np.pi * 0.2 * cols), 0.0),
                                (np.cos(2 * np.pi * 0.2 * rows), np.pi / 2)]:
            spec = fft2(img)
            energies = {key: np.sum(np.abs(ifft2(spec * w)) ** 2)
                        for key, w in bank.wavelets.items()}
            _, l_best = max(energies, key=energies.get)
            assert bank.thetas[l_best] == pytest.approx(want_theta)

    def test_lp_bound(self):
        bank = fb.build_filterbank_2d(2, 4, 64, 64)
        A, B = fb.littlewood_paley(bank)
        assert B <= 1.0 + 1e-6
