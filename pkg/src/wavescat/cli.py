"""Command-line interface: corpus preparation, parameter sweeps,
front-end comparison and heatmap export.

Exit codes: 0 success, 1 runtime failure, 2 usage/configuration error.
Every command is deterministic given its inputs and --seed, and refuses
to overwrite existing outputs unless --force is passed.
"""

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import frontends
from .dataset import (Manifest, ManifestEntry, chunk, make_synthetic_corpus,
                      read_wav, resample, split_sources, write_wav,
                      TARGET_RATE)
from .errors import ConfigurationError, DataError, WavescatError
from .experiments import (RunConfig, compare_table, default_jobs, grid_cells,
                          parse_grid, run_compare, run_sweep, sweep_table)
from .scattering1d import ScatteringConfig1D, scatter_1d

log = logging.getLogger("wavescat")

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2


def _load_toml_defaults(path):
    import tomllib
    with open(path, "rb") as fh:
        doc = tomllib.load(fh)
    if not isinstance(doc, dict):
        raise ConfigurationError(f"{path}: expected a TOML table")
    return doc


def _guard_overwrite(paths, force):
    for p in paths:
        if p is not None and Path(p).exists() and not force:
            raise ConfigurationError(
                f"{p} exists; pass --force to overwrite")


def _write_csv(path, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerows(rows)


def _write_reports(path, results):
    doc = [{"config": {"frontend": r.config.frontend,
                       "J": r.config.J, "Q": r.config.Q, "L": r.config.L,
                       "M": r.config.M, "seed": r.config.seed},
            "report": r.report.to_dict()} for r in results]
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# prepare
# ---------------------------------------------------------------------------

def cmd_prepare(args):
    out_dir = Path(args.out_dir)
    manifest_path = out_dir / "manifest.csv"
    _guard_overwrite([manifest_path], args.force)

    if args.synthetic:
        out_dir.mkdir(parents=True, exist_ok=True)
        manifest = make_synthetic_corpus(out_dir, args.synthetic, args.seed)
        print(f"wrote {len(manifest.entries)} segments to {out_dir}")
        return EXIT_OK

    in_dir = Path(args.in_dir) if args.in_dir else None
    if in_dir is None or not in_dir.is_dir():
        print("error: no usable audio (need a readable input dir or --synthetic)",
              file=sys.stderr)
        return EXIT_USAGE

    wav_dir = out_dir / "wav"
    wav_dir.mkdir(parents=True, exist_ok=True)
    sources = sorted(in_dir.rglob("*.wav"))
    skipped = []
    by_source = {}
    for path in sources:
        label = "fake" if "fake" in path.stem.lower() else "real"
        try:
            samples, rate = read_wav(path)
            if rate != TARGET_RATE:
                samples = resample(samples, rate, TARGET_RATE)
            segments = chunk(samples, TARGET_RATE, label, path.stem)
        except WavescatError as exc:
            skipped.append((str(path), str(exc)))
            continue
        if segments:
            by_source[path.stem] = (label, segments)

    if not by_source:
        for path, reason in skipped:
            print(f"skipped {path}: {reason}", file=sys.stderr)
        print("error: no usable audio", file=sys.stderr)
        return EXIT_USAGE

    assignment = split_sources(list(by_source), args.seed)
    entries = []
    for sid, (label, segments) in sorted(by_source.items()):
        for seg in segments:
            name = f"{sid}_c{seg.chunk_index}.wav"
            write_wav(wav_dir / name, seg.samples)
            entries.append(ManifestEntry(str(Path("wav") / name), label,
                                         assignment[sid]))
    Manifest(entries=entries, seed=args.seed).save(manifest_path)
    for path, reason in skipped:
        print(f"skipped {path}: {reason}", file=sys.stderr)
    print(f"wrote {len(entries)} segments to {out_dir}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# sweep / compare
# ---------------------------------------------------------------------------

def _base_config(args, frontend):
    kwargs = dict(frontend=frontend, seed=args.seed)
    for name in ("J", "Q", "L", "M"):
        value = getattr(args, name, None)
        if value is not None:
            kwargs[name] = value
    if getattr(args, "learning_rate", None) is not None:
        kwargs["learning_rate"] = args.learning_rate
    if getattr(args, "epochs", None) is not None:
        kwargs["epochs"] = args.epochs
    if getattr(args, "n_bootstrap", None) is not None:
        kwargs["n_bootstrap"] = args.n_bootstrap
    return RunConfig(**kwargs)


def cmd_sweep(args):
    out = Path(args.out)
    _guard_overwrite([out, Path(str(out) + ".reports.json")], args.force)
    manifest_dir = Path(args.manifest).parent
    manifest = Manifest.load(args.manifest)
    grid = parse_grid(args.grid)
    base = _base_config(args, args.frontend)
    results, skipped = run_sweep(manifest, manifest_dir, args.frontend, grid,
                                 seed=args.seed, jobs=args.jobs,
                                 max_cells=args.max_cells, base_config=base)
    _write_csv(out, sweep_table(results))
    _write_reports(str(out) + ".reports.json", results)
    for cell, reason in skipped:
        log.warning("skipped grid cell %s: %s", cell, reason)
    if skipped:
        with open(str(out) + ".skipped.txt", "w") as fh:
            for cell, reason in skipped:
                fh.write(f"{cell}: {reason}\n")
    print(f"wrote {len(results)} rows to {out}"
          + (f" ({len(skipped)} cells skipped)" if skipped else ""))
    return EXIT_OK


def cmd_compare(args):
    out = Path(args.out)
    _guard_overwrite([out, Path(str(out) + ".reports.json")], args.force)
    manifest_dir = Path(args.manifest).parent
    manifest = Manifest.load(args.manifest)
    names = [n.strip() for n in args.frontends.split(",") if n.strip()]
    results = []
    for name in names:
        base = _base_config(args, name)
        results.extend(run_compare(manifest, manifest_dir, [name],
                                   seed=args.seed, jobs=args.jobs,
                                   base_config=base))
    _write_csv(out, compare_table(results))
    _write_reports(str(out) + ".reports.json", results)
    print(f"wrote {len(results)} rows to {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# render
# ---------------------------------------------------------------------------

def _write_matrix_csv(path, matrix):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in np.asarray(matrix):
            writer.writerow([f"{v:.8e}" for v in row])


def cmd_render(args):
    samples, rate = read_wav(args.wav)
    if rate != frontends.SAMPLE_RATE or len(samples) != frontends.SEGMENT_SAMPLES:
        print("error: render expects a single 4 s 16 kHz segment; "
              "run `wavescat prepare` to chunk the audio first", file=sys.stderr)
        return EXIT_USAGE
    out = Path(args.out)
    if args.frontend in ("mel", "linear", "cq"):
        _guard_overwrite([out], args.force)
        if args.frontend == "cq":
            fmap = frontends.cq_features(samples, rate)
        else:
            fmap = frontends.stft_features(samples, args.frontend, rate)
        # paper orientation: rows = bins, cols = frames
        _write_matrix_csv(out, fmap.values.T)
        print(f"wrote {fmap.num_channels}x{fmap.num_frames} matrix to {out}")
        return EXIT_OK
    if args.frontend == "wst1d":
        cfg = ScatteringConfig1D(J=args.J, Q=args.Q, M=args.M,
                                 oversampling=args.oversampling)
        output = scatter_1d(samples, cfg)
        stem = out.with_suffix("")
        suffix = out.suffix or ".csv"
        paths = [Path(f"{stem}_order{m}{suffix}") for m in range(cfg.M + 1)]
        _guard_overwrite(paths, args.force)
        for m, p in enumerate(paths):
            block = output.rows_of_order(m)
            _write_matrix_csv(p, block)
            print(f"wrote order-{m} block {block.shape[0]}x{block.shape[1]} to {p}")
        return EXIT_OK
    print(f"error: cannot render front-end {args.frontend!r}", file=sys.stderr)
    return EXIT_USAGE


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="wavescat",
        description="Scattering front-ends and evaluation suite for "
                    "speech anti-spoofing experiments.")
    parser.add_argument("--config", help="TOML file with default options")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", help="chunk a corpus or generate a synthetic one")
    p.add_argument("in_dir", nargs="?", help="directory of labeled WAVs")
    p.add_argument("out_dir", help="output directory for segments + manifest")
    p.add_argument("--synthetic", type=int, metavar="N",
                   help="generate N sources per class instead of reading in_dir")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_prepare)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--jobs", type=int, default=default_jobs())
    common.add_argument("--force", action="store_true")
    common.add_argument("--learning-rate", dest="learning_rate", type=float)
    common.add_argument("--epochs", type=int)
    common.add_argument("--n-bootstrap", dest="n_bootstrap", type=int)
    common.add_argument("-J", type=int, dest="J")
    common.add_argument("-Q", type=int, dest="Q")
    common.add_argument("-L", type=int, dest="L")
    common.add_argument("-M", type=int, dest="M")

    p = sub.add_parser("sweep", parents=[common],
                       help="evaluate a parameter grid for one front-end")
    p.add_argument("manifest")
    p.add_argument("--frontend", required=True)
    p.add_argument("--grid", required=True,
                   help='e.g. "J=2,4;Q=1,8,10;M=1,2,3"')
    p.add_argument("--out", required=True)
    p.add_argument("--max-cells", type=int, default=64)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("compare", parents=[common],
                       help="one row per front-end, shared seed")
    p.add_argument("manifest")
    p.add_argument("--frontends", required=True,
                   help="comma list from mel,linear,cq,wst1d,wstx1,wstx2")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("render", help="export one segment's features as CSV")
    p.add_argument("wav")
    p.add_argument("--frontend", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--force", action="store_true")
    p.add_argument("-J", type=int, dest="J", default=2)
    p.add_argument("-Q", type=int, dest="Q", default=10)
    p.add_argument("-M", type=int, dest="M", default=2)
    p.add_argument("--oversampling", type=int, default=0)
    p.set_defaults(func=cmd_render)
    return parser


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args, remaining = parser.parse_known_args(argv)
    if remaining:
        parser.error(f"unrecognized arguments: {' '.join(remaining)}")
    if args.config:
        try:
            defaults = _load_toml_defaults(args.config)
        except (OSError, ConfigurationError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        for key, value in defaults.items():
            attr = key.replace("-", "_")
            if hasattr(args, attr) and getattr(args, attr) in (None, False):
                setattr(args, attr, value)
    try:
        return args.func(args)
    except (ConfigurationError, DataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except WavescatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
