"""Corpus handling: WAV ingestion, resampling, 4-second chunking, splits,
and the synthetic desk-scale corpus used by the acceptance suite.

The synthetic "real" class is harmonic tones with slow articulation
envelopes plus filtered noise; the "fake" class runs the same generator
and then injects synthesis-style artifacts: abrupt phase resets of the
high harmonics (transient clicks) and narrowband amplitude modulation at
50-200 Hz. Long-term spectra of the two classes match by construction,
so the artifacts live in the temporal fine structure.
"""

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.io import wavfile
from scipy.signal import resample_poly

from .errors import ConfigurationError, DataError, UnsupportedError

log = logging.getLogger(__name__)

TARGET_RATE = 16000
SEGMENT_SECONDS = 4
LABELS = ("real", "fake")
MANIFEST_HEADER = ["path", "label", "split"]


@dataclass(frozen=True)
class AudioSegment:
    """Exactly 4 s of mono audio with its label and provenance."""

    samples: np.ndarray
    sample_rate: int
    label: str
    source_id: str
    chunk_index: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if len(samples) != SEGMENT_SECONDS * self.sample_rate:
            raise DataError(
                f"segment must be exactly {SEGMENT_SECONDS}s "
                f"({SEGMENT_SECONDS * self.sample_rate} samples), got {len(samples)}")
        if self.label not in LABELS:
            raise DataError(f"label must be real|fake, got {self.label!r}")
        samples = np.clip(samples, -1.0, 1.0)  # clipping guard only
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)


@dataclass
class ManifestEntry:
    path: str
    label: str
    split: str


@dataclass
class Manifest:
    entries: list
    seed: int = 0

    def paths(self, split):
        return [e for e in self.entries if e.split == split]

    def counts(self):
        out = {}
        for e in self.entries:
            out[e.split] = out.get(e.split, 0) + 1
        return out

    def save(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(MANIFEST_HEADER)
            for e in self.entries:
                writer.writerow([e.path, e.label, e.split])

    @classmethod
    def load(cls, path):
        entries = []
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if header != MANIFEST_HEADER:
                raise DataError(f"{path}: expected header path,label,split")
            for row in reader:
                p, label, split = row
                if label not in LABELS:
                    raise DataError(f"{path}: bad label {label!r}")
                entries.append(ManifestEntry(p, label, split))
        return cls(entries=entries)


def read_wav(path):
    """Load a RIFF WAV as float64 in [-1, 1]; returns (samples, rate).

    Accepts 16/24-bit PCM and 32-bit float; anything else is rejected.
    Multichannel input is averaged to mono.
    """
    try:
        rate, data = wavfile.read(path)
    except ValueError as exc:
        raise DataError(f"{path}: undecodable WAV ({exc})") from exc
    if data.dtype == np.int16:
        samples = data / 32768.0
    elif data.dtype == np.int32:  # includes 24-bit PCM, scaled by 256
        samples = data / 2147483648.0
    elif data.dtype in (np.float32, np.float64):
        samples = data.astype(np.float64)
    else:
        raise DataError(f"{path}: unsupported sample format {data.dtype}")
    if samples.ndim == 2:
        samples = samples.mean(axis=1)
    return samples.astype(np.float64), int(rate)


def write_wav(path, samples, rate=TARGET_RATE):
    """Write mono float samples as 16-bit PCM."""
    clipped = np.clip(np.asarray(samples, dtype=np.float64), -1.0, 1.0)
    wavfile.write(path, rate, (clipped * 32767.0).astype(np.int16))


def resample(audio, from_rate, to_rate=TARGET_RATE):
    """Band-limited polyphase (windowed-sinc) downsampling.

    Output length is round(n * to/from); equal rates return the input
    bit-exactly. Upsampling is out of scope.
    """
    if from_rate < to_rate:
        raise UnsupportedError(
            f"upsampling {from_rate} -> {to_rate} Hz is not supported")
    x = np.asarray(audio, dtype=np.float64)
    if from_rate == to_rate:
        return x.copy()
    g = math.gcd(int(from_rate), int(to_rate))
    up, down = int(to_rate) // g, int(from_rate) // g
    y = resample_poly(x, up, down)
    target = int(round(len(x) * to_rate / from_rate))
    if len(y) < target:
        y = np.pad(y, (0, target - len(y)))
    return y[:target]


def chunk(audio, sample_rate, label, source_id):
    """Slice into floor(T/4) non-overlapping 4 s segments, remainder dropped."""
    x = np.asarray(audio, dtype=np.float64)
    seg = SEGMENT_SECONDS * sample_rate
    n_segments = len(x) // seg
    if n_segments == 0:
        log.info("source %s shorter than %ds, skipped", source_id, SEGMENT_SECONDS)
        return []
    return [AudioSegment(samples=x[i * seg:(i + 1) * seg],
                         sample_rate=sample_rate, label=label,
                         source_id=source_id, chunk_index=i)
            for i in range(n_segments)]


def split_sources(source_ids, seed, dev_fraction=0.1):
    """Assign train/dev per source at a 9:1 ratio (never splitting a source)."""
    ids = sorted(source_ids)
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x5B17]))
    rng.shuffle(ids)
    n_dev = max(1, round(len(ids) * dev_fraction)) if len(ids) > 1 else 0
    dev = set(ids[:n_dev])
    return {sid: ("dev" if sid in dev else "train") for sid in ids}


# ---------------------------------------------------------------------------
# Synthetic corpus
# ---------------------------------------------------------------------------

# Generator knobs, tuned so the fake-class artifacts barely move long-term
# band powers but reshape the temporal fine structure that scattering sees.
_F0_RANGE = (110.0, 220.0)
_N_HARMONICS = 28
_FORMANT_CENTER = 1900.0
_FORMANT_WIDTH = 600.0
_NOISE_DB = -22.0
_SEVERITY_RANGE = (0.4, 1.0)     # per-source deepfake quality spread
_RESET_RATE_RANGE = (8.0, 14.0)  # abrupt phase resets per second, x severity
_RESET_RAMP_MS = (20.0, 40.0)    # phase transition duration
_RESET_JUMP_RAD = (1.0, 2.0)     # partial phase jumps (shallow dips)
_RESET_MIN_FREQ = 950.0          # low harmonics stay phase-coherent
_AM_SIGMA_RANGE = (0.05, 0.15)   # x severity
_AM_RATE_RANGE = (50.0, 200.0)
_AM_BAND = (900.0, 3400.0)
_NUISANCE_SIGMA_MAX = 0.45


def _envelope(rng, n, rate):
    """Slow articulation envelope in [0.25, 1]: low-passed noise."""
    t = np.arange(n) / rate
    env = np.ones(n)
    for _ in range(3):
        f = rng.uniform(0.7, 3.0)
        env += rng.uniform(0.2, 0.6) * np.sin(2 * np.pi * f * t + rng.uniform(0, 2 * np.pi))
    env -= env.min()
    if env.max() > 0:
        env /= env.max()
    return 0.25 + 0.75 * env


def _taper_band(f, lo, hi, width_frac=0.15):
    """Flat selector over [lo, hi] with raised-cosine edges (no Gibbs)."""
    w_lo = max(lo * width_frac, 10.0)
    w_hi = max(hi * width_frac, 10.0)
    up = np.clip((f - (lo - w_lo)) / w_lo, 0.0, 1.0)
    down = np.clip(((hi + w_hi) - f) / w_hi, 0.0, 1.0)
    return 0.5 * (1 - np.cos(np.pi * up)) * 0.5 * (1 - np.cos(np.pi * down))


def _shaped_noise(rng, n, rate):
    """Full-band 1/sqrt(f)-ish noise, 150 Hz up to just below Nyquist."""
    spec = np.fft.rfft(rng.standard_normal(n))
    f = np.fft.rfftfreq(n, 1.0 / rate)
    shape = _taper_band(f, 150.0, 7700.0) / np.sqrt(np.maximum(f, 150.0))
    y = np.fft.irfft(spec * shape, n)
    return y / (np.std(y) + 1e-12)


def _harmonic_design(f0, tilt):
    """Harmonic amplitudes under a 1/k^tilt law with a formant boost."""
    ks = np.arange(1, _N_HARMONICS + 1)
    freqs = ks * f0
    keep = freqs <= 7200.0
    ks, freqs = ks[keep], freqs[keep]
    amps = ks ** (-tilt) * (1.0 + 2.0 * np.exp(
        -((freqs - _FORMANT_CENTER) ** 2) / (2.0 * _FORMANT_WIDTH ** 2)))
    return ks, freqs, amps


def _instantaneous_phase(rng, n, rate, f0):
    t = np.arange(n) / rate
    vib = 1.0 + 0.008 * np.sin(2 * np.pi * rng.uniform(4.0, 6.0) * t
                               + rng.uniform(0, 2 * np.pi))
    return 2 * np.pi * f0 * np.cumsum(vib) / rate


def _render_harmonics(inst_phase, ks, amps, phases):
    """phases: (K,) constant offsets or (n, K) per-sample tracks."""
    if phases.ndim == 1:
        phases = phases[None, :]
    return (amps[None, :] * np.cos(np.outer(inst_phase, ks)
                                   + phases)).sum(axis=1)


def _phase_tracks(rng, n, n_harmonics, reset_times, ramp_samples, init_phases,
                  affected):
    """Piecewise-linear phase per harmonic: constant between resets, then a
    ramp of `ramp_samples` to fresh random values (a short chirp excursion
    that dips the affected bands' envelopes simultaneously). Harmonics
    outside `affected` keep their initial phase throughout."""
    xp = [0.0]
    draws = [init_phases]
    n_affected = int(affected.sum())
    for t in reset_times:
        xp.extend([float(t), float(min(t + ramp_samples, n - 1))])
        new = draws[-1].copy()
        jump = rng.uniform(*_RESET_JUMP_RAD, n_affected)
        sign = rng.choice((-1.0, 1.0), n_affected)
        new[affected] = new[affected] + sign * jump
        draws.append(new)
    xp.append(float(n - 1))
    fp = np.empty((len(xp), n_harmonics))
    fp[0] = draws[0]
    for i, d in enumerate(draws[1:], start=0):
        fp[2 * i + 1] = draws[i]
        fp[2 * i + 2] = d
    fp[-1] = draws[-1]
    t_axis = np.arange(n, dtype=float)
    tracks = np.empty((n, n_harmonics))
    for k in range(n_harmonics):
        tracks[:, k] = np.interp(t_axis, xp, fp[:, k])
    return tracks


def _synthesize(rng_base, rng_art, n, rate, fake):
    f0 = rng_base.uniform(*_F0_RANGE)
    tilt = rng_base.uniform(0.8, 1.3)
    phases = rng_base.uniform(0, 2 * np.pi, _N_HARMONICS)
    env = _envelope(rng_base, n, rate)
    noise = _shaped_noise(rng_base, n, rate)
    noise_gain = 10.0 ** (_NOISE_DB / 20.0) * rng_base.uniform(0.7, 1.4)
    rumble = _rumble(rng_base, n, rate)
    inst = _instantaneous_phase(rng_base, n, rate, f0)
    ks, freqs, amps = _harmonic_design(f0, tilt)
    # every source, both classes, carries narrowband modulations so that
    # modulation per se does not mark a class: one roaming band plus one
    # always in the formant region
    nuis_lo = rng_base.uniform(150.0, 3000.0)
    nuis_hi = nuis_lo * rng_base.uniform(1.3, 2.2)
    nuis_sigma = rng_base.uniform(0.0, _NUISANCE_SIGMA_MAX)
    nuis_rate_lo = rng_base.uniform(20.0, 120.0)
    nuis_rate_hi = nuis_rate_lo * rng_base.uniform(1.5, 2.5)

    if not fake:
        x = env * _render_harmonics(inst, ks, amps, phases[:len(ks)])
    else:
        # abrupt phase resets at vocoder-frame rate: the high harmonics
        # jump to fresh random phases at Poisson times (the low ones stay
        # coherent, as neural vocoders model them well); every affected
        # band's envelope dips through the transition simultaneously;
        # severity models the quality spread of in-the-wild synthesis
        severity = rng_art.uniform(*_SEVERITY_RANGE)
        reset_rate = severity * rng_art.uniform(*_RESET_RATE_RANGE)
        ramp = int(rng_art.uniform(*_RESET_RAMP_MS) * 1e-3 * rate)
        resets = _poisson_times(rng_art, n, rate, reset_rate)
        tracks = _phase_tracks(rng_art, n, len(ks), resets, ramp,
                               phases[:len(ks)], freqs > _RESET_MIN_FREQ)
        x = env * _render_harmonics(inst, ks, amps, tracks)
        x = _band_modulate(rng_art, x, n, rate, _AM_BAND[0], _AM_BAND[1],
                           severity * rng_art.uniform(*_AM_SIGMA_RANGE),
                           _AM_RATE_RANGE[0], _AM_RATE_RANGE[1])

    x = _band_modulate(rng_base, x, n, rate, nuis_lo, nuis_hi, nuis_sigma,
                       nuis_rate_lo, nuis_rate_hi)
    x = x + noise_gain * env * noise + rumble
    # normalize by the low band, which no artifact touches: the gain then
    # carries no class information (a whole-signal norm would)
    f = np.fft.rfftfreq(n, 1.0 / rate)
    low = np.fft.irfft(np.fft.rfft(x) * _taper_band(f, 50.0, 700.0), n)
    x *= 0.09 / (np.sqrt(np.mean(low ** 2)) + 1e-12)
    return np.clip(x, -0.99, 0.99)


def _rumble(rng, n, rate):
    """Low-frequency nuisance band (50-300 Hz), same law for both classes."""
    spec = np.fft.rfft(rng.standard_normal(n))
    f = np.fft.rfftfreq(n, 1.0 / rate)
    shape = _taper_band(f, 50.0, 300.0)
    y = np.fft.irfft(spec * shape, n)
    y /= np.std(y) + 1e-12
    return rng.uniform(0.05, 0.35) * y


def _poisson_times(rng, n, rate, rate_hz):
    times = []
    t = rng.exponential(1.0 / rate_hz)
    while t * rate < n:
        times.append(int(t * rate))
        t += rng.exponential(1.0 / rate_hz)
    return times


def _band_modulate(rng, x, n, rate, lo_hz, hi_hz, sigma, rate_lo, rate_hi):
    """Multiply the [lo_hz, hi_hz] content by a log-normal modulator whose
    rate lives in [rate_lo, rate_hi]; normalized to leave band power alone."""
    if sigma <= 0.0:
        return x
    f = np.fft.rfftfreq(n, 1.0 / rate)
    spec = np.fft.rfft(x)
    band = _taper_band(f, lo_hz, hi_hz)
    in_band = np.fft.irfft(spec * band, n)
    rest = np.fft.irfft(spec * (1.0 - band), n)
    noise_spec = np.fft.rfft(rng.standard_normal(n))
    sel = _taper_band(f, rate_lo, rate_hi, 0.2)
    b = np.fft.irfft(noise_spec * sel, n)
    b /= np.std(b) + 1e-12
    g = np.exp(sigma * b)
    g /= np.sqrt(np.mean(g ** 2))
    return rest + in_band * g


def synthesize_source(seed, index, label, rate=TARGET_RATE):
    """One deterministic synthetic utterance (4.2-6.0 s)."""
    fake = label == "fake"
    root = np.random.SeedSequence([seed, int(fake), index])
    base_ss, art_ss = root.spawn(2)
    rng_base = np.random.default_rng(base_ss)
    rng_art = np.random.default_rng(art_ss)
    duration = rng_base.uniform(4.2, 6.0)
    n = int(duration * rate)
    return _synthesize(rng_base, rng_art, n, rate, fake)


def make_synthetic_corpus(out_dir, n_per_class, seed, test_per_class=None):
    """Generate the desk-scale corpus: WAV chunks plus a manifest.

    n_per_class sources per class feed the 9:1 train/dev split; an extra
    test_per_class sources per class (default max(10, n_per_class // 2))
    form the test split. Deterministic per seed, byte for byte.
    """
    if n_per_class < 10:
        raise ConfigurationError("n_per_class must be >= 10")
    if test_per_class is None:
        test_per_class = max(10, n_per_class // 2)
    out_dir = Path(out_dir)
    wav_dir = out_dir / "wav"
    wav_dir.mkdir(parents=True, exist_ok=True)

    entries = []
    for label in LABELS:
        ids = [f"{label}_{i:04d}" for i in range(n_per_class)]
        assignment = split_sources(ids, seed + (0 if label == "real" else 1))
        for i in range(n_per_class + test_per_class):
            sid = f"{label}_{i:04d}"
            split = assignment[sid] if i < n_per_class else "test"
            audio = synthesize_source(seed, i, label)
            for segment in chunk(audio, TARGET_RATE, label, sid):
                name = f"{sid}_c{segment.chunk_index}.wav"
                write_wav(wav_dir / name, segment.samples)
                entries.append(ManifestEntry(str(Path("wav") / name), label, split))

    manifest = Manifest(entries=entries, seed=seed)
    manifest.save(out_dir / "manifest.csv")
    return manifest


def load_segment(manifest_dir, entry):
    """Read one manifest row back as an AudioSegment."""
    samples, rate = read_wav(Path(manifest_dir) / entry.path)
    stem = Path(entry.path).stem
    src, _, idx = stem.rpartition("_c")
    return AudioSegment(samples=samples, sample_rate=rate, label=entry.label,
                        source_id=src or stem, chunk_index=int(idx) if idx.isdigit() else 0)
