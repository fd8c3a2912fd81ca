"""Feature front-ends: mel/linear/constant-Q filterbank baselines, the
standalone 1D scattering map, and the two fusion strategies.

All front-ends consume the same 4-second 16 kHz segments. Baselines use
a 25 ms Hanning window and a 10 ms hop with 80 log-compressed bands,
yielding 399 x 80 maps (stored frames-first). The fusion strategies wrap
the scattering transforms around a surrogate feature map -- by default
the log-mel map -- standing in for an external embedding sequence.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.fft import fft, ifft

from .classifier import PROJECTION_WIDTH
from .errors import ContractError, DataError, SizeError
from .filterbank import next_power_of_two
from .scattering1d import ScatteringConfig1D, pad_signal, scatter_1d
from .scattering2d import ScatteringConfig2D, scatter_2d

SAMPLE_RATE = 16000
SEGMENT_SAMPLES = 4 * SAMPLE_RATE
FRAME_LENGTH = 400      # 25 ms
HOP_LENGTH = 160        # 10 ms
N_FFT = 512
N_FILTERS = 80
N_FRAMES = 399
LOG_FLOOR = 1e-10

CQ_BINS_PER_OCTAVE = 9
CQ_FMAX = 7600.0
CQ_FMIN = CQ_FMAX / 2.0 ** ((N_FILTERS - 1) / CQ_BINS_PER_OCTAVE)

FEATURE_KINDS = ("mel", "linear", "cq", "surrogate")


@dataclass(frozen=True)
class FeatureMap:
    """Frame-major feature matrix: values[frame, channel]."""

    values: np.ndarray
    hop: float
    kind: str

    def __post_init__(self):
        if self.kind not in FEATURE_KINDS:
            raise DataError(f"unknown feature kind {self.kind!r}")
        values = np.asarray(self.values, dtype=np.float64)
        if not np.all(np.isfinite(values)):
            raise DataError("feature map contains NaN or Inf")
        object.__setattr__(self, "values", values)

    @property
    def num_frames(self):
        return self.values.shape[0]

    @property
    def num_channels(self):
        return self.values.shape[1]


@dataclass(frozen=True)
class FusedFeatures:
    """Fused sequence: values[t, width] plus the producing configuration."""

    values: np.ndarray
    strategy: str
    provenance: dict

    @property
    def sequence_length(self):
        return self.values.shape[0]

    @property
    def width(self):
        return self.values.shape[1]


def _check_segment(audio, sample_rate):
    x = np.asarray(audio, dtype=np.float64)
    if sample_rate != SAMPLE_RATE:
        raise DataError(f"expected {SAMPLE_RATE} Hz input, got {sample_rate}")
    if x.ndim != 1 or len(x) != SEGMENT_SAMPLES:
        raise DataError(
            f"expected exactly 4 s of audio ({SEGMENT_SAMPLES} samples), "
            f"got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise DataError("audio contains NaN or Inf")
    return x


def _frame(x):
    """Right-pad with 160 reflected samples, then slide the 400/160 window;
    gives exactly 399 frames for 64000 input samples."""
    padded = np.concatenate([x, x[-2:-HOP_LENGTH - 2:-1]])
    n_frames = 1 + (len(padded) - FRAME_LENGTH) // HOP_LENGTH
    idx = (np.arange(n_frames)[:, None] * HOP_LENGTH
           + np.arange(FRAME_LENGTH)[None, :])
    return padded[idx]


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=float) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=float) / 2595.0) - 1.0)


def _triangle_bank(centers_hz):
    """Unit-peak triangular filters over the rfft bin grid; centers_hz has
    n_filters + 2 edge points."""
    fft_freqs = np.arange(N_FFT // 2 + 1) * SAMPLE_RATE / N_FFT
    bank = np.zeros((len(centers_hz) - 2, len(fft_freqs)))
    for k in range(len(centers_hz) - 2):
        lo, mid, hi = centers_hz[k], centers_hz[k + 1], centers_hz[k + 2]
        up = (fft_freqs - lo) / max(mid - lo, 1e-9)
        down = (hi - fft_freqs) / max(hi - mid, 1e-9)
        bank[k] = np.clip(np.minimum(up, down), 0.0, None)
    return bank


def filter_centers(kind, n_filters=N_FILTERS):
    """Center frequencies (Hz) of the triangular bank for `kind`."""
    if kind == "mel":
        edges = mel_to_hz(np.linspace(hz_to_mel(0.0), hz_to_mel(SAMPLE_RATE / 2),
                                      n_filters + 2))
    elif kind == "linear":
        edges = np.linspace(0.0, SAMPLE_RATE / 2, n_filters + 2)
    else:
        raise DataError(f"no triangular bank for kind {kind!r}")
    return edges


def stft_features(audio, kind, sample_rate=SAMPLE_RATE, n_filters=N_FILTERS):
    """Log filterbank features, 399 x 80, mel- or linear-spaced.

    25 ms Hanning frames at a 10 ms hop; power spectra pass through 80
    unit-peak triangles and a log with floor 1e-10.
    """
    if kind not in ("mel", "linear"):
        raise DataError(f"stft_features kind must be mel or linear, got {kind!r}")
    x = _check_segment(audio, sample_rate)
    frames = _frame(x) * np.hanning(FRAME_LENGTH)
    power = np.abs(np.fft.rfft(frames, N_FFT, axis=1)) ** 2
    bank = _triangle_bank(filter_centers(kind, n_filters))
    feat = np.log(np.maximum(power @ bank.T, LOG_FLOOR))
    assert feat.shape == (N_FRAMES, n_filters)
    return FeatureMap(values=feat, hop=HOP_LENGTH / SAMPLE_RATE, kind=kind)


def cq_center_frequencies(n_bins=N_FILTERS):
    return CQ_FMIN * 2.0 ** (np.arange(n_bins) / CQ_BINS_PER_OCTAVE)


def cq_features(audio, sample_rate=SAMPLE_RATE):
    """Constant-Q log features: 80 bins at 9 bins/octave, 10 ms hop.

    Analytic Gaussian kernels applied by FFT convolution on a reflect
    padded copy; magnitudes sampled at the frame centers give the same
    399-frame grid as the STFT front-ends.
    """
    x = _check_segment(audio, sample_rate)
    centers = cq_center_frequencies()
    n_pad = next_power_of_two(2 * len(x))
    left = (n_pad - len(x)) // 2
    xp = np.pad(x, (left, n_pad - len(x) - left), mode="reflect")
    spec = fft(xp)
    freqs = np.fft.fftfreq(n_pad) * sample_rate
    positions = left + HOP_LENGTH * np.arange(N_FRAMES) + FRAME_LENGTH // 2
    feat = np.empty((N_FRAMES, len(centers)))
    q_sigma = (2.0 ** (1.0 / CQ_BINS_PER_OCTAVE) - 1.0) / 2.0
    for k, fc in enumerate(centers):
        sigma = fc * q_sigma
        kernel = np.exp(-((freqs - fc) ** 2) / (2.0 * sigma ** 2))
        response = ifft(spec * kernel)
        feat[:, k] = np.abs(response[positions]) ** 2
    feat = np.log(np.maximum(feat, LOG_FLOOR))
    return FeatureMap(values=feat, hop=HOP_LENGTH / SAMPLE_RATE, kind="cq")


def wst1d_standalone_features(audio, config, sample_rate=SAMPLE_RATE):
    """Path x frame scattering matrix wrapped as a FeatureMap.

    Channels are the scattering paths in row order (grouped by order);
    useful for heatmap export and ablations.
    """
    x = _check_segment(audio, sample_rate)
    out = scatter_1d(x, config)
    return FeatureMap(values=out.coefficients.T,
                      hop=out.frame_hop / sample_rate, kind="surrogate")


def surrogate_map(audio, sample_rate=SAMPLE_RATE):
    """The stand-in embedding sequence for the fusion strategies: log-mel."""
    return stft_features(audio, "mel", sample_rate)


# ---------------------------------------------------------------------------
# Fusion strategies
# ---------------------------------------------------------------------------

WSTX1_BRANCHES = ("scatter", "map")
WSTX2_BRANCHES = ("map2d",)


def init_projections(strategy, branch_dims, seed=0):
    """Seeded initial projections to width 144, used before training fits
    them; extraction treats whatever is passed as fixed parameters.

    Branches no wider than 144 start from an identity embedding (the
    projection is then lossless at initialization); wider branches start
    from a random Gaussian map.
    """
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x99]))
    proj = {}
    for name, dim in branch_dims.items():
        if dim <= PROJECTION_WIDTH:
            w = np.zeros((dim, PROJECTION_WIDTH))
            w[:, :dim] = np.eye(dim)
        else:
            w = rng.standard_normal((dim, PROJECTION_WIDTH)) / math.sqrt(dim)
        proj[name] = (w, np.zeros(PROJECTION_WIDTH))
    return proj


def scatter_gap_vector(audio, wst_config, sample_rate=SAMPLE_RATE):
    """Branch A of the parallel fusion: scattering coefficients pooled
    over frames."""
    x = _check_segment(audio, sample_rate)
    return scatter_1d(x, wst_config).coefficients.mean(axis=1)


def scatter2d_tensor(feature_map, wst_config):
    """2D scattering tensor of a feature map, time axis first."""
    return scatter_2d(feature_map.values, wst_config)


def wstx1_features(audio, wst_config, feature_map, projections,
                   sample_rate=SAMPLE_RATE):
    """Parallel fusion: scattering branch (GAP, projection to 144,
    temporal expansion) concatenated channel-wise with the projected map.

    Output width is exactly 2 x 144 = 288 and the sequence length equals
    the map's frame count.
    """
    gap = scatter_gap_vector(audio, wst_config, sample_rate)
    w_s, b_s = projections["scatter"]
    w_m, b_m = projections["map"]
    if gap.shape[0] != w_s.shape[0]:
        raise ContractError(
            f"scatter branch width {gap.shape[0]} != projection rows {w_s.shape[0]}")
    if feature_map.num_channels != w_m.shape[0]:
        raise ContractError(
            f"map channels {feature_map.num_channels} != projection rows {w_m.shape[0]}")
    branch_a = np.tile(gap @ w_s + b_s, (feature_map.num_frames, 1))
    branch_b = feature_map.values @ w_m + b_m
    fused = np.hstack([branch_a, branch_b])
    return FusedFeatures(values=fused, strategy="wstx1",
                         provenance={"J": wst_config.J, "Q": wst_config.Q,
                                     "M": wst_config.M,
                                     "map_kind": feature_map.kind})


def wstx2_features(feature_map, wst_config, projections):
    """Cascaded fusion: 2D scattering of the map, channel projection to
    144, then a spatial flatten to a (T' * C_path) x 144 sequence.

    T' = floor(frames / 2^J) and the flatten runs time-major: row
    t * C_path + c holds path c at time t.
    """
    if min(feature_map.values.shape) < 2 ** wst_config.J:
        raise SizeError(
            f"feature map {feature_map.values.shape} smaller than 2^{wst_config.J}")
    out = scatter_2d(feature_map.values, wst_config)
    c_path, t_prime, d_scat = out.tensor.shape
    w, b = projections["map2d"]
    if d_scat != w.shape[0]:
        raise ContractError(
            f"scattering width {d_scat} != projection rows {w.shape[0]}")
    projected = out.tensor @ w + b  # [C, T', 144]
    seq = projected.transpose(1, 0, 2).reshape(t_prime * c_path, PROJECTION_WIDTH)
    return FusedFeatures(values=seq, strategy="wstx2",
                         provenance={"J": wst_config.J, "L": wst_config.L,
                                     "M": wst_config.M,
                                     "map_kind": feature_map.kind,
                                     "c_path": c_path, "t_prime": t_prime})
