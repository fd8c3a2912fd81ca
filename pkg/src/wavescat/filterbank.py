"""Morlet filterbank construction for the 1D and 2D scattering transforms.

All filters are built directly in the Fourier domain at the padded signal
length. Band-pass filters are complex Morlets: a Gabor atom minus a scaled
Gaussian so the time-domain mean is exactly zero (admissibility). Every
wavelet is L1-normalized in time and the whole bank is then rescaled by a
single common factor so the Littlewood-Paley sum never exceeds 1, which
makes the scattering cascade non-expansive at the filter level.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.fft import fft, ifft, ifft2

from .errors import ConfigurationError, DomainError

# Default mother-wavelet center frequency: 0.85 * (pi/2 rad/sample) expressed
# in cycles/sample.
XI_MAX = 0.85 * 0.25

# Adjacent filters intersect at -3 dB.
R_OVERLAP = math.sqrt(0.5)

# Frequency-domain sigma of the 1D Gaussian low-pass at J = 0; the low-pass
# at scale J has sigma_f = PHI_SIGMA0 / 2^J.
PHI_SIGMA0 = 0.08

# 2D design constants: center frequency (cycles/pixel), spatial sigma of the
# band-pass envelope at scale 0, spatial sigma of the low-pass at scale 0.
XI_2D = 0.375
PSI_SIGMA_2D = 0.8
PHI_SIGMA_2D = 1.0

_PERIODIZE_EPS = 1e-7


def is_power_of_two(n):
    return n >= 1 and (n & (n - 1)) == 0


def next_power_of_two(n):
    return 1 << max(int(n) - 1, 0).bit_length()


def sigma_freq_for_q(xi, Q, r=R_OVERLAP):
    """Frequency-domain width making adjacent filters (spaced 2^(1/Q)) cross at r.

    Standard calibration: the Gaussian responses of two neighbouring
    filters both equal r at the geometric midpoint of their centers.
    """
    factor = 2.0 ** (-1.0 / Q)
    return xi * (1.0 - factor) / (1.0 + factor) / math.sqrt(2.0 * math.log(1.0 / r))


@dataclass(frozen=True)
class MorletParams:
    """Mother Morlet wavelet parameters.

    center_frequency is in cycles/sample and must sit strictly below the
    Nyquist frequency 0.5. bandwidth_sigma is the time-domain Gaussian
    width in samples. admissibility_correction is the analytic value of
    the Gaussian term subtracted to force a zero mean; the builders
    recompute the exact discrete correction, this field documents the
    magnitude.
    """

    center_frequency: float
    bandwidth_sigma: float
    admissibility_correction: float = field(init=False)

    def __post_init__(self):
        if not 0.0 < self.center_frequency < 0.5:
            raise DomainError(
                "center_frequency must lie in (0, 0.5) cycles/sample, got "
                f"{self.center_frequency}")
        if self.bandwidth_sigma <= 0.0:
            raise DomainError("bandwidth_sigma must be > 0")
        sigma_f = 1.0 / (2.0 * math.pi * self.bandwidth_sigma)
        kappa = math.exp(-self.center_frequency ** 2 / (2.0 * sigma_f ** 2))
        object.__setattr__(self, "admissibility_correction", kappa)

    @property
    def sigma_freq(self):
        """Frequency-domain Gaussian width in cycles/sample."""
        return 1.0 / (2.0 * math.pi * self.bandwidth_sigma)


def default_morlet_params(Q):
    """Mother wavelet for a bank with Q filters per octave."""
    sigma_f = sigma_freq_for_q(XI_MAX, Q)
    return MorletParams(XI_MAX, 1.0 / (2.0 * math.pi * sigma_f))


def _periodized_gaussian_pair(length, xi, sigma_f):
    """Sample a Gabor and a Gaussian low-pass over enough periods that the
    periodized spectra are smooth to machine precision, then fold them back
    to `length` bins."""
    val = math.sqrt(-2.0 * sigma_f ** 2 * math.log(_PERIODIZE_EPS))
    P = min(int(math.ceil(val + 1)), 5)
    freqs = np.arange((1 - P) * length, P * length, dtype=float) / length
    gabor = np.exp(-((freqs - xi) ** 2) / (2.0 * sigma_f ** 2))
    lowpass = np.exp(-(freqs ** 2) / (2.0 * sigma_f ** 2))
    nper = 2 * P - 1
    gabor = gabor.reshape(nper, length).sum(axis=0)
    lowpass = lowpass.reshape(nper, length).sum(axis=0)
    return gabor, lowpass


def build_morlet_1d(params, scale, length):
    """Frequency-domain Morlet wavelet dilated by `scale`.

    The wavelet follows psi_scale(t) = scale^-1 psi(t/scale): center
    frequency and bandwidth both shrink by 1/scale, and the returned
    filter is L1-normalized in time so the norm is identical at every
    scale. Bin 0 of the spectrum is exactly zero (zero time-domain mean).

    Parameters
    ----------
    params : MorletParams
        Mother wavelet.
    scale : float >= 1
        Dilation factor.
    length : int
        Power-of-two transform length.

    Returns
    -------
    np.ndarray of float64, shape (length,)
        Real-valued spectrum sampled at np.fft.fftfreq(length) points.
    """
    if not is_power_of_two(length):
        raise ConfigurationError(f"length must be a power of two, got {length}")
    if scale < 1.0:
        raise DomainError(f"scale must be >= 1, got {scale}")
    xi = params.center_frequency / scale
    sigma_f = params.sigma_freq / scale
    gabor, lowpass = _periodized_gaussian_pair(length, xi, sigma_f)
    kappa = gabor[0] / lowpass[0]
    psi_f = gabor - kappa * lowpass
    l1 = np.abs(ifft(psi_f)).sum()
    return psi_f / l1


def build_gaussian_lowpass(J, length, sigma0=PHI_SIGMA0):
    """Frequency-domain Gaussian low-pass at scale 2^J with unit DC gain.

    The time-domain kernel is a nonnegative symmetric Gaussian of width
    proportional to 2^J; phi_hat(0) == 1 exactly, so constants pass
    through unchanged.
    """
    if J < 2:
        raise DomainError(f"J must be >= 2 for the 1D low-pass, got {J}")
    if not is_power_of_two(length):
        raise ConfigurationError(f"length must be a power of two, got {length}")
    sigma_f = sigma0 / 2.0 ** J
    _, lowpass = _periodized_gaussian_pair(length, 0.0, sigma_f)
    return lowpass / lowpass[0]


def max_dyadic_subsampling(xi, sigma_f, alpha=4.0):
    """Largest k such that a filter with content below xi + alpha*sigma_f can
    be decimated by 2^k without aliasing."""
    upper = min(xi + alpha * sigma_f, 0.5)
    return max(int(math.floor(-math.log2(upper) - 1.0)), 0)


@dataclass(frozen=True)
class FilterBank1D:
    """Immutable 1D Morlet bank: J*Q analytic wavelets plus one low-pass.

    `wavelets[j]` is the spectrum of the wavelet at scale 2^(j/Q); scales
    grow with j, frequencies shrink. All arrays are read-only.
    """

    wavelets: tuple
    lowpass: np.ndarray
    J: int
    Q: int
    signal_length: int
    scales: tuple
    center_frequencies: tuple
    sigma_freqs: tuple
    max_subsampling: tuple
    params: MorletParams

    def debug_summary(self):
        """JSON-ready summary: per-filter peak frequency and L1 norm plus
        the Littlewood-Paley bounds. Banks have no binary format; they are
        always rebuilt from (J, Q, length)."""
        freqs = np.fft.fftfreq(self.signal_length)
        filters = []
        for j, psi_f in enumerate(self.wavelets):
            peak = freqs[int(np.argmax(np.abs(psi_f)))]
            l1 = float(np.abs(ifft(psi_f)).sum())
            filters.append({"scale": self.scales[j],
                            "peak_frequency": float(peak),
                            "l1_norm": l1})
        A, B = littlewood_paley(self)
        return {"J": self.J, "Q": self.Q, "length": self.signal_length,
                "filters": filters, "lp_bounds": {"A": A, "B": B}}


def _freeze(arr):
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


def _rescale_for_energy_bound(wavelet_sum, lowpass_sq):
    """Common factor c so that max(lowpass^2 + c^2 * wavelet_sum) <= 1."""
    mask = wavelet_sum > 1e-12 * wavelet_sum.max()
    headroom = (1.0 - lowpass_sq[mask]) / wavelet_sum[mask]
    return min(1.0, math.sqrt(max(headroom.min(), 0.0)))


def build_filterbank_1d(J, Q, length, params=None):
    """Construct the J*Q-wavelet Morlet bank used by the 1D scattering.

    Scales follow the grid 2^(j/Q) for 0 <= j < J*Q, all finer than the
    averaging scale 2^J. After L1 normalization the wavelets share one
    extra scalar rescale enforcing the Littlewood-Paley bound B <= 1.

    Parameters
    ----------
    J : int >= 2
        Octaves; the low-pass averages over 2^J samples.
    Q : int >= 1
        Wavelets per octave.
    length : int
        Power-of-two padded signal length, at least 2^J.
    params : MorletParams, optional
        Mother wavelet; defaults to the -3 dB design for this Q.
    """
    if J < 2:
        raise DomainError(f"J must be >= 2, got {J}")
    if Q < 1:
        raise DomainError(f"Q must be >= 1, got {Q}")
    if not is_power_of_two(length):
        raise ConfigurationError(f"length must be a power of two, got {length}")
    if length < 2 ** J:
        raise ConfigurationError(
            f"averaging window exceeds signal: length {length} < 2^{J}")
    if params is None:
        params = default_morlet_params(Q)

    scales = tuple(2.0 ** (j / Q) for j in range(J * Q))
    assert all(lam < 2.0 ** J for lam in scales)
    wavelets = [build_morlet_1d(params, lam, length) for lam in scales]
    lowpass = build_gaussian_lowpass(J, length)

    wavelet_sum = np.sum([np.abs(w) ** 2 for w in wavelets], axis=0)
    c = _rescale_for_energy_bound(wavelet_sum, np.abs(lowpass) ** 2)
    wavelets = [w * c for w in wavelets]

    xis = tuple(params.center_frequency / lam for lam in scales)
    sigmas = tuple(params.sigma_freq / lam for lam in scales)
    maxsub = tuple(max_dyadic_subsampling(x, s) for x, s in zip(xis, sigmas))
    return FilterBank1D(
        wavelets=tuple(_freeze(w) for w in wavelets),
        lowpass=_freeze(lowpass),
        J=J, Q=Q, signal_length=length,
        scales=scales, center_frequencies=xis, sigma_freqs=sigmas,
        max_subsampling=maxsub, params=params)


@lru_cache(maxsize=16)
def cached_filterbank_1d(J, Q, length):
    return build_filterbank_1d(J, Q, length)


# ---------------------------------------------------------------------------
# 2D bank
# ---------------------------------------------------------------------------

def _gauss2d_freq(shape, center, sigma_par, sigma_perp, theta):
    """Periodized 2D Gaussian in the Fourier domain.

    The Gaussian is centered at `center` (cycles/pixel, (row, col) order)
    with width sigma_par along direction theta and sigma_perp across it.
    theta is measured from the column (width) axis, so theta = 0 peaks on
    the horizontal-frequency axis.
    """
    h, w = shape
    sig_max = max(sigma_par, sigma_perp)
    val = math.sqrt(-2.0 * sig_max ** 2 * math.log(_PERIODIZE_EPS))
    P = min(int(math.ceil(val + 1)), 3)
    fr = np.arange((1 - P) * h, P * h, dtype=float)[:, None] / h
    fc = np.arange((1 - P) * w, P * w, dtype=float)[None, :] / w
    dr = fr - center[0]
    dc = fc - center[1]
    # parallel direction unit vector in (row, col) coords
    ur, uc = math.sin(theta), math.cos(theta)
    par = dr * ur + dc * uc
    perp = -dr * uc + dc * ur
    g = np.exp(-(par ** 2) / (2.0 * sigma_par ** 2)
               - (perp ** 2) / (2.0 * sigma_perp ** 2))
    nper = 2 * P - 1
    g = g.reshape(nper, h, nper, w).sum(axis=(0, 2))
    return g


def build_morlet_2d(shape, scale_pow, theta, L):
    """Frequency-domain 2D Morlet at dyadic scale 2^scale_pow, orientation theta.

    The envelope is elongated across the oscillation (slant 4/L shrinks
    with the number of orientations so the angular responses tile). The
    spectrum vanishes exactly at DC and the filter is L1-normalized.
    """
    h, w = shape
    s = 2.0 ** scale_pow
    sigma_par = 1.0 / (2.0 * math.pi * PSI_SIGMA_2D * s)
    slant = 4.0 / L
    sigma_perp = sigma_par * slant
    xi = XI_2D / s
    center = (xi * math.sin(theta), xi * math.cos(theta))
    gabor = _gauss2d_freq(shape, center, sigma_par, sigma_perp, theta)
    lowpass = _gauss2d_freq(shape, (0.0, 0.0), sigma_par, sigma_perp, theta)
    kappa = gabor[0, 0] / lowpass[0, 0]
    psi_f = gabor - kappa * lowpass
    l1 = np.abs(ifft2(psi_f)).sum()
    return psi_f / l1


def build_gaussian_lowpass_2d(J, shape, sigma0=PHI_SIGMA_2D):
    if J < 1:
        raise DomainError(f"J must be >= 1, got {J}")
    sigma_f = 1.0 / (2.0 * math.pi * sigma0 * 2.0 ** J)
    g = _gauss2d_freq(shape, (0.0, 0.0), sigma_f, sigma_f, 0.0)
    return g / g[0, 0]


@dataclass(frozen=True)
class FilterBank2D:
    """Immutable 2D Morlet bank: J*L oriented wavelets plus one low-pass.

    Wavelets are indexed by (scale j, orientation l) with angles
    theta_l = pi * l / L covering [0, pi). For real inputs the opposite
    half-plane is redundant after the modulus.
    """

    wavelets: dict
    lowpass: np.ndarray
    J: int
    L: int
    height: int
    width: int
    thetas: tuple

    def debug_summary(self):
        filters = []
        for (j, l), psi_f in sorted(self.wavelets.items()):
            l1 = float(np.abs(ifft2(psi_f)).sum())
            filters.append({"scale": j, "orientation": self.thetas[l],
                            "l1_norm": l1})
        A, B = littlewood_paley(self)
        return {"J": self.J, "L": self.L,
                "lengths": [self.height, self.width],
                "filters": filters, "lp_bounds": {"A": A, "B": B}}


def build_filterbank_2d(J, L, height, width):
    """Construct the J*L oriented Morlet bank for images of the given size.

    `height` and `width` are the (padded) image dimensions, each a power
    of two and at least 2^J. Orientation angles are theta_l = pi*l/L,
    strictly increasing over [0, pi).
    """
    if J < 1:
        raise DomainError(f"J must be >= 1, got {J}")
    if L < 1:
        raise DomainError(f"L must be >= 1, got {L}")
    if min(height, width) < 2 ** J:
        raise ConfigurationError(
            f"image smaller than 2^{J} in one axis: {height}x{width}")
    if not (is_power_of_two(height) and is_power_of_two(width)):
        raise ConfigurationError("padded dimensions must be powers of two")

    thetas = tuple(math.pi * l / L for l in range(L))
    shape = (height, width)
    wavelets = {}
    for j in range(J):
        for l, theta in enumerate(thetas):
            wavelets[(j, l)] = build_morlet_2d(shape, j, theta, L)
    lowpass = build_gaussian_lowpass_2d(J, shape)

    wavelet_sum = np.sum([np.abs(w) ** 2 for w in wavelets.values()], axis=0)
    c = _rescale_for_energy_bound(wavelet_sum, np.abs(lowpass) ** 2)
    wavelets = {k: _freeze(w * c) for k, w in wavelets.items()}
    return FilterBank2D(wavelets=wavelets, lowpass=_freeze(lowpass),
                        J=J, L=L, height=height, width=width, thetas=thetas)


@lru_cache(maxsize=8)
def cached_filterbank_2d(J, L, height, width):
    return build_filterbank_2d(J, L, height, width)


# ---------------------------------------------------------------------------
# Littlewood-Paley bounds
# ---------------------------------------------------------------------------

def littlewood_paley(bank):
    """Frame bounds (A, B) of a constructed bank.

    B is the global maximum over all frequencies of
    sum_lambda |psi_hat|^2 + |phi_hat|^2; keeping B <= 1 makes every
    cascade stage non-expansive. A is the minimum of the same sum over
    the analyzed band -- the frequencies between the coarsest and finest
    wavelet centers -- counting each wavelet at both +omega and -omega,
    since modulus channels respond identically to both signs for real
    inputs. Outside that band (the low-frequency hole above the
    low-pass), coverage intentionally rolls off.
    """
    if isinstance(bank, FilterBank1D):
        energy = np.abs(np.asarray(bank.lowpass)) ** 2
        wsum = np.zeros_like(energy)
        for w in bank.wavelets:
            wsum += np.abs(w) ** 2
        energy_plain = energy + wsum
        B = float(energy_plain.max())

        coverage = energy + wsum + wsum[(-np.arange(bank.signal_length)) %
                                        bank.signal_length]
        freqs = np.abs(np.fft.fftfreq(bank.signal_length))
        lo = min(bank.center_frequencies)
        hi = max(bank.center_frequencies)
        band = (freqs >= lo) & (freqs <= hi)
        A = float(coverage[band].min())
        return A, B

    if isinstance(bank, FilterBank2D):
        energy = np.abs(np.asarray(bank.lowpass)) ** 2
        wsum = np.zeros_like(energy)
        for w in bank.wavelets.values():
            wsum += np.abs(w) ** 2
        B = float((energy + wsum).max())

        h, w_ = bank.height, bank.width
        refl = wsum[(-np.arange(h)) % h][:, (-np.arange(w_)) % w_]
        coverage = energy + wsum + refl
        fr = np.fft.fftfreq(h)[:, None]
        fc = np.fft.fftfreq(w_)[None, :]
        radius = np.hypot(fr, fc)
        band = (radius >= XI_2D / 2.0 ** (bank.J - 1)) & (radius <= XI_2D)
        A = float(coverage[band].min())
        return A, B

    raise TypeError(f"not a filter bank: {type(bank)!r}")
