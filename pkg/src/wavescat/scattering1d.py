"""1D wavelet scattering transform.

The cascade iterates |x * psi_lambda| over frequency-decreasing scale
paths and finishes every branch with the Gaussian low-pass, computed by
FFT convolution on a reflect-padded copy of the signal. Intermediate
envelopes are critically subsampled (bounded by the `oversampling`
relief), which is exact decimation and is reproduced verbatim by the
time-domain oracle.
"""

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy.fft import fft, ifft

from .container import write_tensor
from .errors import DataError, DomainError, SizeError
from .filterbank import cached_filterbank_1d, next_power_of_two


@dataclass(frozen=True)
class ScatteringConfig1D:
    """Parameters of the 1D transform.

    J sets the averaging scale 2^J (invariance over T = 2^J / sample_rate
    seconds), Q the wavelets per octave, M the scattering order.
    `oversampling` raises the output rate above the critical hop 2^J.
    """

    J: int
    Q: int
    M: int = 2
    oversampling: int = 0
    sample_rate: float = 16000.0

    def __post_init__(self):
        if self.J < 2:
            raise DomainError(f"J must be >= 2, got {self.J}")
        if self.Q < 1:
            raise DomainError(f"Q must be >= 1, got {self.Q}")
        if self.M not in (1, 2, 3):
            raise DomainError(f"M must be in {{1, 2, 3}}, got {self.M}")
        if self.oversampling < 0:
            raise DomainError("oversampling must be >= 0")

    @property
    def invariance_scale(self):
        """Invariance window in seconds."""
        return 2.0 ** self.J / self.sample_rate


@dataclass(frozen=True, order=True)
class ScatteringPath:
    """One cascade branch: ordered tuple of scale indices, coarsest last.

    Indices are positions on the 2^(j/Q) grid; the frequency-decreasing
    rule requires them strictly increasing along the path. Order 0 is the
    empty tuple (pure low-pass averaging).
    """

    indices: tuple

    @property
    def order(self):
        return len(self.indices)


@dataclass(frozen=True)
class ScatteringOutput1D:
    """Path-indexed coefficient matrix.

    Rows follow ascending (order, indices); `frame_hop` is the output
    stride in input samples.
    """

    coefficients: np.ndarray
    paths: tuple
    frame_hop: int

    @property
    def num_paths(self):
        return self.coefficients.shape[0]

    @property
    def num_frames(self):
        return self.coefficients.shape[1]

    def rows_of_order(self, m):
        idx = [i for i, p in enumerate(self.paths) if p.order == m]
        return self.coefficients[idx]

    def save(self, path, config=None):
        """Write the coefficient matrix as a WSTX tensor with a sidecar
        listing the path of every row."""
        meta = {"paths": [list(p.indices) for p in self.paths],
                "frame_hop": self.frame_hop}
        if config is not None:
            meta["config"] = {"J": config.J, "Q": config.Q, "M": config.M,
                              "oversampling": config.oversampling,
                              "sample_rate": config.sample_rate}
        write_tensor(path, self.coefficients, meta)


def enumerate_paths_1d(config):
    """All admissible paths up to order M, sorted by (order, indices).

    Frequency-decreasing pruning keeps exactly the strictly increasing
    index tuples, so order-m paths are the m-combinations of the grid.
    """
    n = config.J * config.Q
    paths = []
    for m in range(config.M + 1):
        paths.extend(ScatteringPath(c) for c in combinations(range(n), m))
    return sorted(paths, key=lambda p: (p.order, p.indices))


def pad_signal(x, J):
    """Reflect-pad to the next power of two >= 2 * len(x).

    Returns (padded, left_offset); the offset is a multiple of 2^J so
    unpadding commutes with every dyadic decimation stage.
    """
    n = len(x)
    n_pad = next_power_of_two(2 * n)
    left = ((n_pad - n) // 2 // 2 ** J) * 2 ** J
    right = n_pad - n - left
    return np.pad(x, (left, right), mode="reflect"), left


def _mean_periodize(spectrum, factor):
    if factor == 1:
        return spectrum
    return spectrum.reshape(factor, -1).mean(axis=0)


def _sum_periodize(spectrum, factor):
    if factor == 1:
        return spectrum
    return spectrum.reshape(factor, -1).sum(axis=0)


def _unpad(row, left, n, level):
    start = left >> level
    count = -(-n // (1 << level))
    return row[start:start + count]


def scatter_1d(signal, config):
    """Scattering coefficients of a real 1D signal.

    Order-0 is x * phi (kept signed; it is nonnegative whenever the
    signal is), higher orders apply the modulus before averaging and are
    clamped at zero against rounding. The result is deterministic and
    bit-identical across calls.

    Parameters
    ----------
    signal : array_like of float
        Real samples, length >= 2^J, all finite.
    config : ScatteringConfig1D

    Returns
    -------
    ScatteringOutput1D
        Matrix [num_paths x ceil(n / frame_hop)] aligned with
        enumerate_paths_1d(config).
    """
    x = np.asarray(signal, dtype=np.float64)
    if x.ndim != 1:
        raise DataError(f"expected a 1D signal, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise DataError("signal contains NaN or Inf")
    if len(x) < 2 ** config.J:
        raise SizeError(
            f"signal length {len(x)} shorter than averaging window 2^{config.J}")

    n = len(x)
    xp, left = pad_signal(x, config.J)
    bank = cached_filterbank_1d(config.J, config.Q, len(xp))
    hop_level = max(config.J - config.oversampling, 0)
    phi = np.asarray(bank.lowpass)

    psi_cache = {}
    phi_cache = {}

    def psi_at(j, level):
        key = (j, level)
        if key not in psi_cache:
            psi_cache[key] = _sum_periodize(np.asarray(bank.wavelets[j]),
                                            1 << level)
        return psi_cache[key]

    def phi_at(level):
        if level not in phi_cache:
            phi_cache[level] = _sum_periodize(phi, 1 << level)
        return phi_cache[level]

    X = fft(xp)
    rows = {}

    s0 = ifft(_mean_periodize(X * phi, 1 << hop_level)).real
    rows[()] = _unpad(s0, left, n, hop_level)

    def descend(spectrum, level, path_prefix, order):
        """spectrum: FFT of the current envelope at `level`."""
        start = path_prefix[-1] + 1 if path_prefix else 0
        for j in range(start, config.J * config.Q):
            k = min(bank.max_subsampling[j], hop_level)
            assert k >= level
            u = ifft(_mean_periodize(spectrum * psi_at(j, level), 1 << (k - level)))
            env = np.abs(u)
            env_f = fft(env)
            s = ifft(_mean_periodize(env_f * phi_at(k), 1 << (hop_level - k))).real
            path = path_prefix + (j,)
            rows[path] = np.maximum(_unpad(s, left, n, hop_level), 0.0)
            if order < config.M:
                descend(env_f, k, path, order + 1)

    descend(X, 0, (), 1)

    paths = enumerate_paths_1d(config)
    coeffs = np.vstack([rows[p.indices] for p in paths])
    return ScatteringOutput1D(coefficients=coeffs, paths=tuple(paths),
                              frame_hop=1 << hop_level)


def scatter_1d_energy(output):
    """Sum of squared coefficients grouped by scattering order.

    Returns a vector e where e[m] is the energy carried by the order-m
    rows; the total never exceeds the (padded, cropped) signal energy.
    """
    max_order = max(p.order for p in output.paths)
    energy = np.zeros(max_order + 1)
    for p, row in zip(output.paths, output.coefficients):
        energy[p.order] += float(np.dot(row, row))
    return energy
