"""Command-line interface for the region-sampling experiment pipeline."""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from . import dataset as ds
from . import pipeline as pl
from .config import load_config
from .harmony import BENCHMARKS, HSParams, optimize
from .partition import build_tree, write_region_table


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="PATH", help="flat key = value config file")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--variant", choices=("enhanced", "basic", "both"))
    parser.add_argument("--hmcr", type=float)
    parser.add_argument("--par", type=float)
    parser.add_argument("--bw", type=float)
    parser.add_argument("--ni", type=int)
    parser.add_argument("--hms", type=int)
    parser.add_argument("--classifier", choices=("linear", "centroid"))
    parser.add_argument("--out", metavar="DIR")
    parser.add_argument("--dataset", metavar="SOURCE",
                        help='"synthetic" or a manifest CSV path')
    parser.add_argument("--classes", type=int)
    parser.add_argument("--per-class", type=int, dest="per_class")
    parser.add_argument("--noise", type=float)


def _config_from_args(args: argparse.Namespace):
    overrides = {
        "seed": args.seed, "variant": args.variant, "hmcr": args.hmcr, "par": args.par,
        "bw": args.bw, "ni": args.ni, "hms": args.hms, "classifier": args.classifier,
        "out_dir": args.out, "dataset": args.dataset, "classes": args.classes,
        "per_class": args.per_class, "noise": args.noise,
    }
    return load_config(args.config, overrides)


def _cmd_synth(args) -> int:
    out = Path(args.out)
    images_dir = out / "images"
    images_dir.mkdir(parents=True, exist_ok=True)
    samples = ds.generate_synthetic(args.classes, args.per_class, args.noise, args.seed)
    rows = []
    for sample in samples:
        rel = f"images/{sample.source_id}.pgm"
        grid = np.where(sample.image.pixels == 1, 0, 255).astype(np.uint8)
        ds.write_pgm(out / rel, grid, comment="ink=0 background=255")
        rows.append((rel, f"class{sample.label:02d}"))
    manifest = out / "manifest.csv"
    with open(manifest, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["image_path", "label"])
        writer.writerows(rows)
    print(f"wrote {len(rows)} samples and {manifest}")
    return 0


def _cmd_bench_hs(args) -> int:
    objective = BENCHMARKS[args.objective]
    params = HSParams(hms=args.hms, hmcr=args.hmcr, par=args.par, bw=args.bw,
                      ni=args.ni, seed=args.seed)
    bounds = [(-10.0, 10.0)] * args.dim
    best, trajectory = optimize(objective, bounds, params)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["improvisation", "best_value"])
        for i, value in enumerate(trajectory, start=1):
            writer.writerow([i, repr(value)])
    print(f"{args.objective} d={args.dim}: best={best.fitness:.6g} after {args.ni} improvisations")
    print(f"trajectory written to {out}")
    return 0


def _cmd_prepare(args) -> int:
    config = _config_from_args(args)
    split_data = pl.phase_prepare(config)
    print(f"prepared {len(split_data.train)}/{len(split_data.validation)}/{len(split_data.test)} "
          f"train/validation/test samples in {config.out_dir}")
    return 0


def _cmd_extract(args) -> int:
    config = _config_from_args(args)
    split_data = pl.load_cache(config)
    store = pl.phase_extract(config, split_data)
    if args.dump_regions:
        tree = build_tree(split_data.train[0].image)
        write_region_table(tree, args.dump_regions)
        print(f"region table for {split_data.train[0].source_id} written to {args.dump_regions}")
    sizes = {name: store.matrices[name].shape for name in pl.SPLIT_NAMES}
    print(f"extracted feature stores: {sizes}")
    return 0


def _cmd_baseline(args) -> int:
    config = _config_from_args(args)
    store = pl.load_store(config)
    baselines = pl.phase_baseline(config, store)
    for name, entry in baselines.items():
        print(f"{name}: validation={entry['validation_accuracy']:.4f} "
              f"test={entry['test_accuracy']:.4f}")
    return 0


def _cmd_search(args) -> int:
    config = _config_from_args(args)
    store = pl.load_store(config)
    results = pl.phase_search(config, store)
    for variant, result in results.items():
        print(f"{variant}: best subset {list(result.best_subset)} "
              f"fitness={result.best_fitness:.4f} evaluations={result.evaluations} "
              f"cache_hits={result.cache_hits}")
        print(pl.render_region_map(result))
    return 0


def _cmd_evaluate(args) -> int:
    config = _config_from_args(args)
    store = pl.load_store(config)
    selections = pl.load_selections(config)
    evaluation = pl.phase_evaluate(config, store, selections)
    for name, entry in evaluation.items():
        print(f"{name}: test_accuracy={entry['test_accuracy']:.4f} "
              f"mean_predict={entry['mean_predict_seconds']:.6f}s "
              f"features={entry['feature_length']}")
    return 0


def _cmd_report(args) -> int:
    config = _config_from_args(args)
    baselines = pl.load_baselines(config)
    selections = pl.load_selections(config)
    evaluation = pl.load_evaluation(config)
    report = pl.build_report(config, baselines, selections, evaluation)
    paths = pl.emit_report(report, config.out_dir)
    for variant in selections:
        print(pl.render_region_map(selections[variant]))
    print("wrote " + ", ".join(str(p) for p in paths))
    return 0


def _cmd_run(args) -> int:
    config = _config_from_args(args)
    report = pl.run_pipeline(config)
    for variant, entry in report.final.items():
        if isinstance(entry, dict):
            print(f"{variant}: |B|={entry['selected_size']} "
                  f"test={entry['test_accuracy']:.4f} "
                  f"reduction={entry['region_reduction_pct']}%")
    print(f"full-layout test accuracy: {report.final['full_test_accuracy']:.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="regionharvest",
        description="Region sampling for glyph recognition: quad-tree zoning, "
                    "longest-run features, harmony-search subset selection.")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, fn, helptext in (
        ("prepare", _cmd_prepare, "load/synthesize, binarize, normalize, split, cache"),
        ("extract", _cmd_extract, "compute the 84-column feature stores"),
        ("baseline", _cmd_baseline, "global-only and full-layout reference accuracies"),
        ("search", _cmd_search, "run the region-subset harmony search"),
        ("evaluate", _cmd_evaluate, "final test accuracies and predict timing"),
        ("report", _cmd_report, "assemble report.json and the CSV tables"),
        ("run", _cmd_run, "all phases in order"),
    ):
        p = sub.add_parser(name, help=helptext)
        _add_common_flags(p)
        if name == "extract":
            p.add_argument("--dump-regions", metavar="PATH",
                           help="also write one sample's region table CSV")
        p.set_defaults(fn=fn)

    p = sub.add_parser("synth", help="write a synthetic PGM corpus plus manifest.csv")
    p.add_argument("--classes", type=int, default=10)
    p.add_argument("--per-class", type=int, default=100, dest="per_class")
    p.add_argument("--noise", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", metavar="DIR", required=True)
    p.set_defaults(fn=_cmd_synth)

    p = sub.add_parser("bench-hs", help="continuous harmony-search benchmark run")
    p.add_argument("--objective", choices=sorted(BENCHMARKS), default="sphere")
    p.add_argument("--dim", type=int, default=5)
    p.add_argument("--hms", type=int, default=30)
    p.add_argument("--hmcr", type=float, default=0.9)
    p.add_argument("--par", type=float, default=0.3)
    p.add_argument("--bw", type=float, default=0.5)
    p.add_argument("--ni", type=int, default=50000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", metavar="CSV", default="hs_trajectory.csv")
    p.set_defaults(fn=_cmd_bench_hs)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (pl.PipelineError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
