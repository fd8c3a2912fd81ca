import numpy as np
import pytest

from wavescat.errors import DataError, DomainError, SizeError, UnsupportedError
from wavescat.oracles import count_paths_by_enumeration
from wavescat.scattering2d import (ScatteringConfig2D, enumerate_paths_2d,
                                   path_count_2d, scatter_2d)

RNG = np.random.default_rng(77)


class TestPathCount:
    def test_paper_configurations(self):
        assert path_count_2d(2, 10, 2) == 121
        assert path_count_2d(3, 8, 2) == 217
        assert path_count_2d(1, 5, 2) == 6

    def test_first_order_only(self):
        assert path_count_2d(4, 6, 1) == 25

    def test_matches_enumeration_over_grid(self):
        for J in range(1, 9):
            for L in range(1, 13):
                for M in (1, 2):
                    assert path_count_2d(J, L, M) == \
                        count_paths_by_enumeration(J, L, M)

    def test_m3_unsupported_points_to_enumeration(self):
        with pytest.raises(UnsupportedError, match="enumerate_paths_2d"):
            path_count_2d(2, 4, 3)
        cfg = ScatteringConfig2D(J=3, L=2, M=3)
        assert len(enumerate_paths_2d(cfg)) == count_paths_by_enumeration(3, 2, 3)

    def test_validation(self):
        with pytest.raises(DomainError):
            path_count_2d(0, 4, 2)
        with pytest.raises(DomainError):
            ScatteringConfig2D(J=1, L=1, M=5)


class TestEnumeration:
    def test_alignment_and_rule(self):
        cfg = ScatteringConfig2D(J=3, L=2, M=2)
        paths = enumerate_paths_2d(cfg)
        assert len(paths) == path_count_2d(3, 2, 2)
        for p in paths:
            if p.order == 2:
                assert p.scales[1] > p.scales[0]
        keys = [(p.order, p.scales, p.orientations) for p in paths]
        assert keys == sorted(keys)


class TestScatter2D:
    def test_zero_image(self):
        out = scatter_2d(np.zeros((32, 32)), ScatteringConfig2D(J=2, L=2, M=2))
        assert np.all(out.tensor == 0.0)

    def test_feature_map_shape(self):
        out = scatter_2d(RNG.standard_normal((80, 399)),
                         ScatteringConfig2D(J=2, L=10, M=2))
        assert out.tensor.shape == (121, 20, 99)
        assert len(out.paths) == 121

    def test_nonnegative_and_aligned(self):
        cfg = ScatteringConfig2D(J=2, L=3, M=2)
        out = scatter_2d(RNG.standard_normal((40, 56)), cfg)
        assert out.paths == tuple(enumerate_paths_2d(cfg))
        orders = np.array([p.order for p in out.paths])
        assert np.all(out.tensor[orders >= 1] >= 0.0)

    def test_shape_law_various(self):
        for (h, w, J) in [(33, 47, 2), (64, 64, 3), (100, 36, 2)]:
            out = scatter_2d(RNG.standard_normal((h, w)),
                             ScatteringConfig2D(J=J, L=2, M=1))
            assert out.tensor.shape[1:] == (h >> J, w >> J)

    def test_grating_orientation_energy(self):
        cfg = ScatteringConfig2D(J=2, L=4, M=1)
        cols = np.arange(64)[None, :] * np.ones((64, 1))
        rows = np.arange(64)[:, None] * np.ones((1, 64))
        for img, want in [(np.cos(2 * np.pi * 0.2 * cols), 0),
                          (np.cos(2 * np.pi * 0.2 * rows), 2)]:
            out = scatter_2d(img, cfg)
            energies = {}
            for p, channel in zip(out.paths, out.tensor):
                if p.order == 1:
                    key = p.orientations[0]
                    energies[key] = energies.get(key, 0.0) + np.sum(channel ** 2)
            assert max(energies, key=energies.get) == want

    def test_input_validation(self):
        cfg = ScatteringConfig2D(J=3, L=2, M=1)
        with pytest.raises(SizeError):
            scatter_2d(np.zeros((4, 64)), cfg)
        bad = np.zeros((32, 32))
        bad[0, 0] = np.inf
        with pytest.raises(DataError):
            scatter_2d(bad, cfg)
        with pytest.raises(DataError):
            scatter_2d(np.zeros(64), cfg)

    def test_non_expansive_pairs(self):
        cfg = ScatteringConfig2D(J=2, L=3, M=2)
        for _ in range(5):
            x = RNG.standard_normal((32, 32))
            y = RNG.standard_normal((32, 32))
            sx = scatter_2d(x, cfg).tensor
            sy = scatter_2d(y, cfg).tensor
            assert np.linalg.norm(sx - sy) <= \
                np.linalg.norm(x - y) * (1.0 + 1e-6)

    def test_small_translation_tolerance(self):
        # band-limited image: smoothed noise; 1 px <= 2^J/8 at J = 4
        from scipy.ndimage import gaussian_filter
        cfg = ScatteringConfig2D(J=4, L=4, M=2)
        img = gaussian_filter(RNG.standard_normal((64, 64)), 3.0, mode="wrap")
        sx = scatter_2d(img, cfg).tensor
        sy = scatter_2d(np.roll(img, 1, axis=0), cfg).tensor
        rel = np.linalg.norm(sx - sy) / np.linalg.norm(sx)
        assert rel <= 0.05

    def test_deterministic(self):
        cfg = ScatteringConfig2D(J=2, L=2, M=2)
        img = RNG.standard_normal((48, 48))
        assert np.array_equal(scatter_2d(img, cfg).tensor,
                              scatter_2d(img, cfg).tensor)

    def test_save_container(self, tmp_path):
        from wavescat.container import read_tensor
        cfg = ScatteringConfig2D(J=2, L=2, M=2)
        out = scatter_2d(RNG.standard_normal((32, 40)), cfg)
        out.save(tmp_path / "t.wstx", cfg)
        data, meta = read_tensor(tmp_path / "t.wstx")
        assert data.ndim == 3
        assert data.shape == out.tensor.shape
        assert meta["config"]["L"] == 2
