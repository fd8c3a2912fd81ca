"""Brute-force reference implementations used only by the test suite.

Nothing here shares cascade, threshold-search or gradient code with the
production modules: convolutions are explicit circulant-matrix products,
spectra come from materialized DFT matrices, path enumeration is redone
with nested loops, and metric searches sweep dense threshold grids. The
budgets guard the O(n^2) cost.
"""

from dataclasses import dataclass

import numpy as np

from .errors import BudgetError


@dataclass(frozen=True)
class OracleBudget:
    max_signal_length: int = 1024
    max_image: int = 64
    max_scores: int = 200


BUDGET = OracleBudget()

_DFT_CACHE = {}
_IDX_CACHE = {}


def _dft_matrix(n):
    if n not in _DFT_CACHE:
        k = np.arange(n)
        _DFT_CACHE[n] = np.exp(2j * np.pi * np.outer(k, k) / n) / n
    return _DFT_CACHE[n]


def _time_filter(spectrum):
    """Inverse DFT by explicit matrix product (no FFT)."""
    return _dft_matrix(len(spectrum)) @ np.asarray(spectrum, dtype=complex)


def _circulant_indices(n):
    if n not in _IDX_CACHE:
        _IDX_CACHE[n] = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    return _IDX_CACHE[n]


def _circular_convolve(x, h):
    """y[n] = sum_m x[m] h[(n - m) mod N] via an explicit index matrix."""
    return h[_circulant_indices(len(x))] @ x


def _decimate_filter(h, factor):
    """Level-k version of a time-domain filter: 2^k * h[2^k n]."""
    return factor * h[::factor]


def direct_scatter_1d(signal, config):
    """Time-domain reference for scatter_1d.

    Replicates the exact padding, decimation and unpadding policy of the
    FFT pathway, but computes every convolution as a circulant-matrix
    product on time-domain filters obtained through a materialized
    inverse-DFT matrix.

    Returns (paths, coefficients) where paths is a list of index tuples
    sorted by (order, indices) and coefficients the aligned row matrix.
    """
    x = np.asarray(signal, dtype=np.float64)
    if len(x) > BUDGET.max_signal_length:
        raise BudgetError(
            f"oracle limited to {BUDGET.max_signal_length} samples, got {len(x)}")

    from .filterbank import cached_filterbank_1d, next_power_of_two

    n = len(x)
    n_pad = next_power_of_two(2 * n)
    left = ((n_pad - n) // 2 // 2 ** config.J) * 2 ** config.J
    xp = np.pad(x, (left, n_pad - n - left), mode="reflect")

    bank = cached_filterbank_1d(config.J, config.Q, n_pad)
    hop_level = max(config.J - config.oversampling, 0)
    phi_t = _time_filter(bank.lowpass).real
    psi_t = [_time_filter(w) for w in bank.wavelets]

    def unpad(row, level):
        start = left >> level
        count = -(-n // (1 << level))
        return row[start:start + count]

    rows = {}
    s0 = _circular_convolve(xp, phi_t)[:: 1 << hop_level]
    rows[()] = unpad(s0, hop_level)

    n_filters = config.J * config.Q

    def branch(env, level, prefix, order):
        for j in range((prefix[-1] + 1) if prefix else 0, n_filters):
            k = min(bank.max_subsampling[j], hop_level)
            psi_k = _decimate_filter(psi_t[j], 1 << level)
            u = _circular_convolve(env.astype(complex), psi_k)[:: 1 << (k - level)]
            env_j = np.abs(u)
            phi_k = _decimate_filter(phi_t, 1 << k)
            s = _circular_convolve(env_j, phi_k).real[:: 1 << (hop_level - k)]
            rows[prefix + (j,)] = unpad(s, hop_level)
            if order < config.M:
                branch(env_j, k, prefix + (j,), order + 1)

    branch(xp, 0, (), 1)

    paths = [()]
    for m in range(1, config.M + 1):
        paths.extend(_increasing_tuples(n_filters, m))
    paths.sort(key=lambda p: (len(p), p))
    coeffs = np.vstack([rows[p] for p in paths])
    return paths, coeffs


def _increasing_tuples(n, m):
    """Strictly increasing m-tuples over range(n), by explicit recursion."""
    if m == 0:
        return [()]
    out = []

    def rec(prefix, start):
        if len(prefix) == m:
            out.append(tuple(prefix))
            return
        for j in range(start, n):
            rec(prefix + [j], j + 1)

    rec([], 0)
    return out


def count_paths_by_enumeration(J, L, M):
    """Brute-force 2D path count: triple loops, no formula."""
    count = 1
    for m in range(1, M + 1):
        for scales in _increasing_tuples(J, m):
            count += L ** len(scales)
    return count


# ---------------------------------------------------------------------------
# Metric oracles
# ---------------------------------------------------------------------------

def _check_scores(scores, labels):
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    if len(scores) > BUDGET.max_scores:
        raise BudgetError(
            f"oracle limited to {BUDGET.max_scores} scores, got {len(scores)}")
    return scores, labels


def _rates_at(scores, labels, tau):
    """miss = fake below tau, false alarm = real at/above tau."""
    fake = scores[labels == 1]
    real = scores[labels == 0]
    p_miss = float(np.sum(fake < tau)) / len(fake)
    p_fa = float(np.sum(real >= tau)) / len(real)
    return p_miss, p_fa


def sweep_min_dcf(scores, labels, beta, grid_size=10 ** 5):
    """Dense-grid minimum of beta * P_miss + P_fa.

    The grid always contains the midpoints between consecutive distinct
    scores plus sentinels beyond both extremes, so the sweep attains the
    exact minimum of the piecewise-constant cost.
    """
    scores, labels = _check_scores(scores, labels)
    uniq = np.unique(scores)
    mids = (uniq[:-1] + uniq[1:]) / 2.0
    lo, hi = uniq[0] - 1.0, uniq[-1] + 1.0
    taus = np.concatenate([[lo], np.linspace(lo, hi, grid_size), mids, [hi]])
    best = np.inf
    for tau in taus:
        p_miss, p_fa = _rates_at(scores, labels, tau)
        best = min(best, beta * p_miss + p_fa)
    return best


def roc_points(scores, labels):
    """Distinct (P_fa, P_miss) operating points by explicit counting."""
    scores, labels = _check_scores(scores, labels)
    uniq = np.unique(scores)
    mids = (uniq[:-1] + uniq[1:]) / 2.0
    taus = np.concatenate([[uniq[0] - 1.0], mids, [uniq[-1] + 1.0]])
    pts = sorted({_rates_at(scores, labels, tau)[::-1] for tau in taus})
    return pts  # list of (p_fa, p_miss), p_fa ascending


def sweep_eer(scores, labels, tol=1e-12):
    """EER by bisection on the piecewise-linear interpolated ROC."""
    pts = roc_points(scores, labels)
    # keep the best (lowest) miss rate per false-alarm rate
    best = {}
    for p_fa, p_miss in pts:
        if p_fa not in best or p_miss < best[p_fa]:
            best[p_fa] = p_miss
    xs = sorted(best)
    ys = [best[x] for x in xs]

    def miss_at(fa):
        if fa <= xs[0]:
            return ys[0]
        for i in range(1, len(xs)):
            if fa <= xs[i]:
                t = (fa - xs[i - 1]) / (xs[i] - xs[i - 1])
                return ys[i - 1] + t * (ys[i] - ys[i - 1])
        return ys[-1]

    lo, hi = 0.0, 1.0
    if miss_at(lo) <= lo:
        return lo
    while hi - lo > tol:
        mid = (lo + hi) / 2.0
        if miss_at(mid) > mid:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2.0


def pair_auc(scores, labels):
    """AUC by O(n^2) pair counting, ties worth 1/2."""
    scores, labels = _check_scores(scores, labels)
    fake = scores[labels == 1]
    real = scores[labels == 0]
    total = 0.0
    for f in fake:
        for r in real:
            if f > r:
                total += 1.0
            elif f == r:
                total += 0.5
    return total / (len(fake) * len(real))


def fd_gradient(loss_fn, params, eps=1e-5):
    """Central finite-difference gradient, one coordinate at a time."""
    params = np.asarray(params, dtype=float)
    base = loss_fn(params)
    if not np.isfinite(base):
        raise BudgetError("loss not finite at the evaluation point")
    grad = np.zeros_like(params)
    for i in range(len(params)):
        step = np.zeros_like(params)
        step[i] = eps
        hi = loss_fn(params + step)
        lo = loss_fn(params - step)
        if not (np.isfinite(hi) and np.isfinite(lo)):
            raise BudgetError("loss not finite within eps of the evaluation point")
        grad[i] = (hi - lo) / (2.0 * eps)
    return grad
