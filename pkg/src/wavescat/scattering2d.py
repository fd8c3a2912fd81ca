"""2D wavelet scattering over (time x feature) maps.

Oriented Morlet convolutions with modulus, cascaded along strictly
increasing scales (orientations unconstrained), finished with a 2D
Gaussian blur and downsampled by 2^J in both axes.
"""

from dataclasses import dataclass

import numpy as np
from scipy.fft import fft2, ifft2

from .container import write_tensor
from .errors import DataError, DomainError, SizeError, UnsupportedError
from .filterbank import cached_filterbank_2d, next_power_of_two


@dataclass(frozen=True)
class ScatteringConfig2D:
    """J dyadic scales, L orientations, scattering order M."""

    J: int
    L: int
    M: int = 2

    def __post_init__(self):
        if self.J < 1:
            raise DomainError(f"J must be >= 1, got {self.J}")
        if self.L < 1:
            raise DomainError(f"L must be >= 1, got {self.L}")
        if self.M not in (1, 2, 3):
            raise DomainError(f"M must be in {{1, 2, 3}}, got {self.M}")


@dataclass(frozen=True, order=True)
class ScatteringPath2D:
    """Ordered (scale, orientation) pairs along one 2D cascade branch."""

    scales: tuple
    orientations: tuple

    @property
    def order(self):
        return len(self.scales)


@dataclass(frozen=True)
class ScatteringOutput2D:
    """Tensor [C_path x floor(H/2^J) x floor(W/2^J)] with aligned paths."""

    tensor: np.ndarray
    paths: tuple

    @property
    def num_paths(self):
        return self.tensor.shape[0]

    def save(self, path, config=None):
        meta = {"paths": [{"scales": list(p.scales),
                           "orientations": list(p.orientations)}
                          for p in self.paths]}
        if config is not None:
            meta["config"] = {"J": config.J, "L": config.L, "M": config.M}
        write_tensor(path, self.tensor, meta)


def path_count_2d(J, L, M):
    """Closed-form channel count for M <= 2.

    M=1: 1 + JL. M=2 adds L^2 * J(J-1)/2 second-order paths (scales
    strictly increasing, orientations free). No closed form is used
    beyond order 2; call enumerate_paths_2d for M = 3.
    """
    if J < 1 or L < 1:
        raise DomainError("J and L must be >= 1")
    if M == 1:
        return 1 + J * L
    if M == 2:
        return 1 + J * L + L * L * (J * (J - 1) // 2)
    raise UnsupportedError(
        "no closed form beyond order 2; use enumerate_paths_2d for M = 3")


def enumerate_paths_2d(config):
    """All paths up to order M, sorted by (order, scales, orientations)."""
    J, L, M = config.J, config.L, config.M
    paths = [ScatteringPath2D((), ())]

    def extend(prefix_scales, prefix_orients, order):
        start = prefix_scales[-1] + 1 if prefix_scales else 0
        for j in range(start, J):
            for l in range(L):
                p = (prefix_scales + (j,), prefix_orients + (l,))
                paths.append(ScatteringPath2D(*p))
                if order < M:
                    extend(p[0], p[1], order + 1)

    extend((), (), 1)
    return sorted(paths, key=lambda p: (p.order, p.scales, p.orientations))


def _pad_2d(image, J):
    h, w = image.shape
    margin = 2 ** (J + 1)
    hp = next_power_of_two(h + margin)
    wp = next_power_of_two(w + margin)
    top = ((hp - h) // 2 // 2 ** J) * 2 ** J
    leftc = ((wp - w) // 2 // 2 ** J) * 2 ** J
    padded = np.pad(image, ((top, hp - h - top), (leftc, wp - w - leftc)),
                    mode="reflect")
    return padded, top, leftc


def _mean_periodize_2d(spec, factor):
    if factor == 1:
        return spec
    h, w = spec.shape
    return spec.reshape(factor, h // factor, factor, w // factor).mean(axis=(0, 2))


def _sum_periodize_2d(spec, factor):
    if factor == 1:
        return spec
    h, w = spec.shape
    return spec.reshape(factor, h // factor, factor, w // factor).sum(axis=(0, 2))


def scatter_2d(image, config):
    """Scattering tensor of a real 2D map.

    Output spatial shape is floor(H/2^J) x floor(W/2^J); channel c holds
    the coefficients of paths[c]. Axis conventions: rows are the first
    image axis (time for feature maps), orientation angle 0 points along
    the column (feature) frequency axis.
    """
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 2:
        raise DataError(f"expected a 2D map, got shape {img.shape}")
    if not np.all(np.isfinite(img)):
        raise DataError("map contains NaN or Inf")
    h, w = img.shape
    if min(h, w) < 2 ** config.J:
        raise SizeError(
            f"map {h}x{w} smaller than averaging window 2^{config.J}")

    J, L = config.J, config.L
    padded, top, leftc = _pad_2d(img, J)
    bank = cached_filterbank_2d(J, L, *padded.shape)
    phi = np.asarray(bank.lowpass)

    h_out = h >> J
    w_out = w >> J
    r0 = top >> J
    c0 = leftc >> J

    def finish(env_f, level):
        phi_k = _sum_periodize_2d(phi, 1 << level)
        s = ifft2(_mean_periodize_2d(env_f * phi_k, 1 << (J - level))).real
        return np.maximum(s[r0:r0 + h_out, c0:c0 + w_out], 0.0)

    X = fft2(padded)
    s0 = ifft2(_mean_periodize_2d(X * phi, 1 << J)).real
    channels = {((), ()): s0[r0:r0 + h_out, c0:c0 + w_out]}

    def descend(spectrum, level, scales, orients, order):
        start = scales[-1] + 1 if scales else 0
        for j in range(start, J):
            for l in range(L):
                psi = _sum_periodize_2d(np.asarray(bank.wavelets[(j, l)]),
                                        1 << level)
                u = ifft2(_mean_periodize_2d(spectrum * psi, 1 << (j - level)))
                env = np.abs(u)
                env_f = fft2(env)
                key = (scales + (j,), orients + (l,))
                channels[key] = finish(env_f, j)
                if order < config.M:
                    descend(env_f, j, key[0], key[1], order + 1)

    descend(X, 0, (), (), 1)

    paths = enumerate_paths_2d(config)
    tensor = np.stack([channels[(p.scales, p.orientations)] for p in paths])
    return ScatteringOutput2D(tensor=tensor, paths=tuple(paths))
