"""Experiment runner shared by the sweep and comparison commands.

One experiment = (manifest, front-end configuration, seed): extract
pooled branch features for every segment, train the head on the train
split with dev-EER early stopping, score the test split and report all
metrics with bootstrap intervals. Extraction is cached per (manifest,
feature kind) so sweep cells and front-end comparisons share work, and
is parallel across segments.
"""

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import frontends
from .classifier import TrainConfig, score, train, train_fused
from .dataset import Manifest, read_wav
from .errors import ConfigurationError, DataError, WavescatError
from .metrics import DcfParams, ScoreSet, bootstrap
from .scattering1d import ScatteringConfig1D
from .scattering2d import ScatteringConfig2D

FRONTEND_NAMES = ("mel", "linear", "cq", "wst1d", "wstx1", "wstx2")


@dataclass(frozen=True)
class RunConfig:
    """Validated front-end + training configuration for one experiment."""

    frontend: str
    J: int = 2
    Q: int = 10
    L: int = 10
    M: int = 2
    oversampling: int = 0
    seed: int = 0
    learning_rate: float = 5e-4
    epochs: int = 100
    n_bootstrap: int = 1000

    def __post_init__(self):
        if self.frontend not in FRONTEND_NAMES:
            raise ConfigurationError(
                f"unknown front-end {self.frontend!r}; pick from {FRONTEND_NAMES}")
        if self.frontend in ("wst1d", "wstx1"):
            ScatteringConfig1D(J=self.J, Q=self.Q, M=self.M,
                               oversampling=self.oversampling)
        if self.frontend == "wstx2":
            ScatteringConfig2D(J=self.J, L=self.L, M=self.M)
            if 2 ** self.J > frontends.N_FILTERS:
                raise ConfigurationError(
                    f"wstx2 needs 2^J <= {frontends.N_FILTERS} map channels")

    def wst1d_config(self):
        return ScatteringConfig1D(J=self.J, Q=self.Q, M=self.M,
                                  oversampling=self.oversampling)

    def wst2d_config(self):
        return ScatteringConfig2D(J=self.J, L=self.L, M=self.M)

    def feature_kinds(self):
        """The cacheable extraction units this front-end needs."""
        if self.frontend in ("mel", "linear", "cq"):
            return {"features": (self.frontend,)}
        if self.frontend == "wst1d":
            return {"features": ("scatter", self.J, self.Q, self.M,
                                 self.oversampling)}
        if self.frontend == "wstx1":
            return {"scatter": ("scatter", self.J, self.Q, self.M,
                                self.oversampling),
                    "map": ("mel",)}
        return {"map2d": ("scatter2d", self.J, self.L, self.M)}

    def table_key(self):
        if self.frontend == "wstx2":
            return (self.J, self.L, self.M)
        return (self.J, self.Q, self.M)


def _extract_one(args):
    """Worker: one WAV -> one pooled feature vector for `kind`."""
    wav_path, kind = args
    samples, rate = read_wav(wav_path)
    if kind[0] in ("mel", "linear"):
        return frontends.stft_features(samples, kind[0], rate).values.mean(axis=0)
    if kind[0] == "cq":
        return frontends.cq_features(samples, rate).values.mean(axis=0)
    if kind[0] == "scatter":
        cfg = ScatteringConfig1D(J=kind[1], Q=kind[2], M=kind[3],
                                 oversampling=kind[4])
        return frontends.scatter_gap_vector(samples, cfg, rate)
    if kind[0] == "scatter2d":
        cfg = ScatteringConfig2D(J=kind[1], L=kind[2], M=kind[3])
        fmap = frontends.surrogate_map(samples, rate)
        return frontends.scatter2d_tensor(fmap, cfg).tensor.mean(axis=(1, 2))
    raise ConfigurationError(f"unknown extraction kind {kind!r}")


_FEATURE_CACHE = {}


def clear_feature_cache():
    _FEATURE_CACHE.clear()


def extract_kind(base_dir, entries, kind, jobs=1):
    """Pooled features of one kind for a list of manifest entries, cached."""
    base_dir = Path(base_dir).resolve()
    key = (str(base_dir), tuple(e.path for e in entries), kind)
    if key in _FEATURE_CACHE:
        return _FEATURE_CACHE[key]
    args = [(str(base_dir / e.path), kind) for e in entries]
    if jobs <= 1 or len(args) < 8:
        rows = [_extract_one(a) for a in args]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_extract_one, args, chunksize=8))
    matrix = np.vstack(rows)
    _FEATURE_CACHE[key] = matrix
    return matrix


def default_jobs():
    return max(1, min(4, os.cpu_count() or 1))


@dataclass
class ExperimentResult:
    config: RunConfig
    report: object
    head: object
    n_train: int
    n_dev: int
    n_test: int

    def row(self):
        r = self.report
        return {
            "minDCF": r.min_dcf, "minDCF_2sig": r.intervals["min_dcf"],
            "EER": 100.0 * r.eer, "EER_2sig": 100.0 * r.intervals["eer"],
            "F1": 100.0 * r.f1, "F1_2sig": 100.0 * r.intervals["f1"],
            "AUC": 100.0 * r.auc, "AUC_2sig": 100.0 * r.intervals["auc"],
        }


def run_experiment(manifest, base_dir, config, jobs=1, dcf=DcfParams()):
    """Train and evaluate one front-end configuration on a prepared corpus."""
    splits = {name: manifest.paths(name) for name in ("train", "dev", "test")}
    for name, entries in splits.items():
        if not entries:
            raise DataError(f"manifest has no {name} split")
    kinds = config.feature_kinds()
    branches = {}
    for split, entries in splits.items():
        branches[split] = {
            name: extract_kind(base_dir, entries, kind, jobs)
            for name, kind in kinds.items()}
    labels = {split: [e.label for e in entries]
              for split, entries in splits.items()}

    tcfg = TrainConfig(learning_rate=config.learning_rate,
                       epochs=config.epochs, seed=config.seed)
    fused = config.frontend in ("wstx1", "wstx2")
    if fused:
        head = train_fused(branches["train"], labels["train"], tcfg,
                           branches["dev"], labels["dev"])
        scores = np.array([
            score(head, {name: branches["test"][name][i] for name in kinds})
            for i in range(len(splits["test"]))])
    else:
        head = train(branches["train"]["features"], labels["train"], tcfg,
                     branches["dev"]["features"], labels["dev"])
        scores = np.array([score(head, v) for v in branches["test"]["features"]])

    test_set = ScoreSet(scores, np.array(labels["test"]))
    report = bootstrap(test_set, dcf, n=config.n_bootstrap, seed=config.seed)
    return ExperimentResult(config=config, report=report, head=head,
                            n_train=len(splits["train"]),
                            n_dev=len(splits["dev"]),
                            n_test=len(splits["test"]))


# ---------------------------------------------------------------------------
# Grids and tables
# ---------------------------------------------------------------------------

def parse_grid(text):
    """Parse "J=2,4;Q=1,8;M=1,2" into an ordered dict of int lists."""
    grid = {}
    for part in filter(None, (p.strip() for p in text.split(";"))):
        if "=" not in part:
            raise ConfigurationError(f"bad grid component {part!r}")
        key, _, values = part.partition("=")
        key = key.strip()
        if key not in ("J", "Q", "L", "M"):
            raise ConfigurationError(f"unknown grid parameter {key!r}")
        try:
            grid[key] = [int(v) for v in values.split(",") if v.strip()]
        except ValueError:
            raise ConfigurationError(f"non-integer value in grid {part!r}") from None
        if not grid[key]:
            raise ConfigurationError(f"empty grid component {part!r}")
    if not grid:
        raise ConfigurationError("empty grid")
    return grid


def grid_cells(grid):
    """Cartesian product in deterministic order."""
    keys = list(grid)
    cells = [{}]
    for key in keys:
        cells = [dict(c, **{key: v}) for c in cells for v in grid[key]]
    return cells


SWEEP_COLUMNS = ["J", "QL", "M", "minDCF", "minDCF_2sig", "EER", "EER_2sig",
                 "F1", "F1_2sig", "AUC", "AUC_2sig"]
COMPARE_COLUMNS = ["frontend"] + SWEEP_COLUMNS[3:]


def run_sweep(manifest, base_dir, frontend, grid, seed=0, jobs=1,
              max_cells=64, base_config=None):
    """Evaluate every grid cell with a shared seed.

    Returns (results sorted by minDCF, skipped list of (cell, reason)).
    Duplicate cells are deduplicated with a warning entry.
    """
    base = base_config or RunConfig(frontend=frontend, seed=seed)
    cells = grid_cells(grid)
    if len(cells) > max_cells:
        raise ConfigurationError(
            f"grid has {len(cells)} cells, over the budget of {max_cells}")
    seen = set()
    todo, skipped = [], []
    for cell in cells:
        key = tuple(sorted(cell.items()))
        if key in seen:
            skipped.append((cell, "duplicate cell"))
            continue
        seen.add(key)
        try:
            cfg = replace(base, frontend=frontend, seed=seed, **cell)
        except WavescatError as exc:
            skipped.append((cell, str(exc)))
            continue
        todo.append(cfg)
    results = []
    for cfg in todo:
        results.append(run_experiment(manifest, base_dir, cfg, jobs))
    results.sort(key=lambda r: (r.report.min_dcf, r.config.table_key()))
    return results, skipped


def run_compare(manifest, base_dir, names, seed=0, jobs=1, base_config=None):
    """One row per front-end, shared classifier settings and seed."""
    for name in names:
        if name not in FRONTEND_NAMES:
            raise ConfigurationError(f"unknown front-end {name!r}")
    results = []
    for name in names:
        base = base_config or RunConfig(frontend=name, seed=seed)
        cfg = replace(base, frontend=name, seed=seed)
        results.append(run_experiment(manifest, base_dir, cfg, jobs))
    return results


def format_float(x):
    return f"{x:.6f}"


def sweep_table(results):
    rows = [SWEEP_COLUMNS]
    for res in results:
        j, ql, m = res.config.table_key()
        row = res.row()
        rows.append([str(j), str(ql), str(m)]
                    + [format_float(row[c]) for c in SWEEP_COLUMNS[3:]])
    return rows


def compare_table(results):
    rows = [COMPARE_COLUMNS]
    for res in results:
        row = res.row()
        rows.append([res.config.frontend]
                    + [format_float(row[c]) for c in COMPARE_COLUMNS[1:]])
    return rows
