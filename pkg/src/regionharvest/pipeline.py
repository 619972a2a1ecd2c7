"""End-to-end experiment pipeline with file-backed phases.

Phase order: prepare -> extract -> baseline -> search -> evaluate -> report.
Every phase persists its artifacts under the configured output directory so
later phases (and CLI invocations) can resume from disk; all output files
embed the config hash and seed, and reruns with an identical config and
seed reproduce identical non-timing content.
"""

from __future__ import annotations

import csv
import json
import logging
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import classifier as clf
from . import dataset as ds
from . import features as feats
from .config import ExperimentConfig, config_hash, config_text
from .partition import LEVEL2_COUNT
from .search import (FitnessContext, SelectionResult, basic_search, canonical,
                     enhanced_search)

logger = logging.getLogger(__name__)

SPLIT_NAMES = ("train", "validation", "test")

CONVENTIONS = {
    "binarize": "ink is the darker Otsu class; binary inputs map 0 -> foreground, 255 -> background",
    "feature_normalization": "per-line longest runs summed per direction, divided by region area",
    "fitness_split": "validation accuracy drives region selection; test is only touched by the final evaluation",
}


class PipelineError(RuntimeError):
    """A phase failed; the message names the phase and the cause."""


@dataclass
class FeatureStore:
    """Full 84-column feature matrices per split."""

    ids: dict[str, list[str]]
    labels: dict[str, np.ndarray]
    matrices: dict[str, np.ndarray]
    class_count: int


def _stamp(config: ExperimentConfig) -> str:
    return f"config_hash={config_hash(config)} seed={config.seed}"


def _write_json(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _sanitize(source_id: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]", "_", source_id)


# --- phases ------------------------------------------------------------------

def phase_prepare(config: ExperimentConfig) -> ds.DatasetSplit:
    """Load or synthesize samples, binarize + normalize, split, write the cache."""
    size = config.image_size
    if config.dataset == "synthetic":
        raw = ds.generate_synthetic(config.classes, config.per_class, config.noise, config.seed)
        samples = []
        dropped = 0
        for s in raw:
            if s.image.foreground_count() == 0:
                dropped += 1
                continue
            samples.append(ds.Sample(image=ds.normalize(s.image, size, size),
                                     label=s.label, source_id=s.source_id))
        if dropped:
            logger.warning("dropped %d synthetic samples with empty foreground", dropped)
    else:
        samples = ds.binarize_all(ds.load_manifest(config.dataset), size, size)

    split_data = ds.split(samples, config.ratios, config.seed)

    out = Path(config.out_dir)
    cache_dir = out / "cache" / "normalized"
    cache_dir.mkdir(parents=True, exist_ok=True)
    index_rows = []
    seq = 0
    for split_name, part in zip(SPLIT_NAMES, (split_data.train, split_data.validation, split_data.test)):
        for sample in part:
            rel = f"cache/normalized/{seq:05d}_{_sanitize(sample.source_id)}.pgm"
            # ink rendered black (0) so cached glyphs view correctly
            ds.write_pgm(out / rel, np.where(sample.image.pixels == 1, 0, 255).astype(np.uint8),
                         comment=f"{_stamp(config)}\nink=0 background=255 source={sample.source_id}")
            index_rows.append((rel, sample.label, split_name))
            seq += 1
    with open(out / "cache" / "index.csv", "w", newline="") as fh:
        fh.write(f"# {_stamp(config)}\n")
        writer = csv.writer(fh)
        writer.writerow(["path", "label", "split"])
        writer.writerows(index_rows)
    (out / "config.effective.cfg").write_text(f"# {_stamp(config)}\n" + config_text(config))
    return split_data


def load_cache(config: ExperimentConfig) -> ds.DatasetSplit:
    out = Path(config.out_dir)
    index_path = out / "cache" / "index.csv"
    if not index_path.exists():
        raise PipelineError(f"phase extract needs the prepared cache; run `prepare` first "
                            f"(missing {index_path})")
    with open(index_path, newline="") as fh:
        rows = list(csv.reader(line for line in fh if not line.startswith("#")))
    parts: dict[str, list[ds.Sample]] = {name: [] for name in SPLIT_NAMES}
    labels = set()
    for rel, label, split_name in rows[1:]:
        grid = ds.read_pgm(out / rel)
        image = ds.binarize(grid)  # cache is strictly {0, 255}: exact round-trip
        parts[split_name].append(ds.Sample(image=image, label=int(label), source_id=Path(rel).stem))
        labels.add(int(label))
    return ds.DatasetSplit(train=parts["train"], validation=parts["validation"],
                           test=parts["test"], class_count=len(labels))


def phase_extract(config: ExperimentConfig, split_data: ds.DatasetSplit) -> FeatureStore:
    """Extract the full 84-column feature matrix for every split and persist CSVs."""
    out = Path(config.out_dir) / "features"
    out.mkdir(parents=True, exist_ok=True)
    ids: dict[str, list[str]] = {}
    labels: dict[str, np.ndarray] = {}
    matrices: dict[str, np.ndarray] = {}
    for split_name, part in zip(SPLIT_NAMES, (split_data.train, split_data.validation, split_data.test)):
        matrix, y = feats.extract_full(part)
        ids[split_name] = [s.source_id for s in part]
        labels[split_name] = y
        matrices[split_name] = matrix
        feats.write_feature_store(out / f"{split_name}.csv", ids[split_name], y, matrix,
                                  header_comment=_stamp(config))
    return FeatureStore(ids=ids, labels=labels, matrices=matrices,
                        class_count=split_data.class_count)


def load_store(config: ExperimentConfig) -> FeatureStore:
    out = Path(config.out_dir) / "features"
    ids, labels, matrices = {}, {}, {}
    for split_name in SPLIT_NAMES:
        path = out / f"{split_name}.csv"
        if not path.exists():
            raise PipelineError(f"phase needs the extracted feature store; run `extract` first "
                                f"(missing {path})")
        ids[split_name], labels[split_name], matrices[split_name] = feats.read_feature_store(path)
    class_count = int(max(labels[name].max() for name in SPLIT_NAMES)) + 1
    return FeatureStore(ids=ids, labels=labels, matrices=matrices, class_count=class_count)


def _fitness_context(config: ExperimentConfig, store: FeatureStore) -> FitnessContext:
    return FitnessContext(
        train_matrix=store.matrices["train"], train_labels=store.labels["train"],
        val_matrix=store.matrices["validation"], val_labels=store.labels["validation"],
        config=config.classifier_config(), seed=config.seed,
    )


def _subset_model(config: ExperimentConfig, store: FeatureStore, subset) -> clf.TrainedModel:
    cols = feats.subset_columns(subset)
    return clf.train(store.matrices["train"][:, cols], store.labels["train"],
                     config.classifier_config(), config.seed)


def _subset_accuracy(config: ExperimentConfig, store: FeatureStore, subset, split_name: str,
                     model: clf.TrainedModel | None = None) -> float:
    cols = feats.subset_columns(subset)
    model = model or _subset_model(config, store, subset)
    return clf.accuracy_of(model, store.matrices[split_name][:, cols], store.labels[split_name])


def phase_baseline(config: ExperimentConfig, store: FeatureStore) -> dict:
    """Global-only (20 features) and full-layout (84 features) reference accuracies."""
    out = Path(config.out_dir)
    (out / "models").mkdir(parents=True, exist_ok=True)
    baselines = {}
    for name, subset in (("global_only", ()), ("full", tuple(range(LEVEL2_COUNT)))):
        model = _subset_model(config, store, subset)
        clf.save_model(model, out / "models" / f"{name}.json")
        baselines[name] = {
            "validation_accuracy": _subset_accuracy(config, store, subset, "validation", model),
            "test_accuracy": _subset_accuracy(config, store, subset, "test", model),
        }
    payload = {"config_hash": config_hash(config), "seed": config.seed, "baselines": baselines}
    _write_json(out / "baseline.json", payload)
    return baselines


def load_baselines(config: ExperimentConfig) -> dict:
    path = Path(config.out_dir) / "baseline.json"
    if not path.exists():
        raise PipelineError(f"phase needs baseline accuracies; run `baseline` first (missing {path})")
    return json.loads(path.read_text())["baselines"]


def phase_search(config: ExperimentConfig, store: FeatureStore) -> dict[str, SelectionResult]:
    """Run the configured search variants, each on a fresh fitness cache."""
    out = Path(config.out_dir)
    results: dict[str, SelectionResult] = {}
    params = config.hs_params()
    for variant in config.variants():
        context = _fitness_context(config, store)
        runner = enhanced_search if variant == "enhanced" else basic_search
        result = runner(context, params)
        results[variant] = result
        payload = {"config_hash": config_hash(config), "seed": config.seed, **result.to_dict()}
        _write_json(out / f"selection_{variant}.json", payload)
    return results


def load_selections(config: ExperimentConfig) -> dict[str, dict]:
    out = Path(config.out_dir)
    selections = {}
    for variant in config.variants():
        path = out / f"selection_{variant}.json"
        if not path.exists():
            raise PipelineError(f"phase needs search results; run `search` first (missing {path})")
        selections[variant] = json.loads(path.read_text())
    return selections


def phase_evaluate(config: ExperimentConfig, store: FeatureStore,
                   selections: dict[str, dict]) -> dict:
    """Final test accuracies and the timed predict comparison, full vs selected."""
    out = Path(config.out_dir)
    (out / "models").mkdir(parents=True, exist_ok=True)
    full_subset = tuple(range(LEVEL2_COUNT))
    full_model = _subset_model(config, store, full_subset)
    full_cols = feats.subset_columns(full_subset)
    evaluation = {
        "full": {
            "feature_length": int(full_cols.size),
            "test_accuracy": _subset_accuracy(config, store, full_subset, "test", full_model),
        }
    }
    timed = [("full", full_model, store.matrices["test"][:, full_cols])]
    for variant, payload in selections.items():
        subset = canonical(payload["best_subset"])
        model = _subset_model(config, store, subset)
        clf.save_model(model, out / "models" / f"selected_{variant}.json")
        cols = feats.subset_columns(subset)
        evaluation[variant] = {
            "selected_regions": list(subset),
            "selected_size": len(subset),
            "feature_length": int(cols.size),
            "validation_fitness": payload["best_fitness"],
            "test_accuracy": _subset_accuracy(config, store, subset, "test", model),
        }
        timed.append((variant, model, store.matrices["test"][:, cols]))
    # one interleaved session so the full-vs-selected comparison is fair
    means = clf.compare_predict_times([(model, X) for _, model, X in timed])
    for (name, _, _), mean in zip(timed, means):
        evaluation[name]["mean_predict_seconds"] = mean
    _write_json(out / "evaluation.json",
                {"config_hash": config_hash(config), "seed": config.seed, "evaluation": evaluation})
    return evaluation


def load_evaluation(config: ExperimentConfig) -> dict:
    path = Path(config.out_dir) / "evaluation.json"
    if not path.exists():
        raise PipelineError(f"phase report needs evaluation results; run `evaluate` first "
                            f"(missing {path})")
    return json.loads(path.read_text())["evaluation"]


# --- reporting ---------------------------------------------------------------

@dataclass
class RunReport:
    config: dict
    config_hash: str
    seed: int
    dataset: str
    conventions: dict
    baselines: dict
    selection: dict
    final: dict
    timing: dict

    def to_dict(self) -> dict:
        return {
            "config": self.config, "config_hash": self.config_hash, "seed": self.seed,
            "dataset": self.dataset, "conventions": self.conventions,
            "baselines": self.baselines, "selection": self.selection,
            "final": self.final, "timing": self.timing,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "RunReport":
        return cls(**{k: payload[k] for k in (
            "config", "config_hash", "seed", "dataset", "conventions",
            "baselines", "selection", "final", "timing")})


def _config_echo(config: ExperimentConfig) -> dict:
    echo = {}
    for line in config_text(config).splitlines():
        key, _, value = line.partition(" = ")
        echo[key] = value
    return echo


def build_report(config: ExperimentConfig, baselines: dict, selections: dict[str, dict],
                 evaluation: dict) -> RunReport:
    final = {"full_test_accuracy": evaluation["full"]["test_accuracy"]}
    timing = {"full_mean_predict_seconds": evaluation["full"]["mean_predict_seconds"],
              "protocol": "mean over >=1000 single-sample predict calls after a 100-call warmup"}
    for variant in selections:
        ev = evaluation[variant]
        size = ev["selected_size"]
        reduction = (LEVEL2_COUNT - size) / LEVEL2_COUNT
        final[variant] = {
            "selected_regions": ev["selected_regions"],
            "selected_size": size,
            "validation_fitness": ev["validation_fitness"],
            "test_accuracy": ev["test_accuracy"],
            "feature_length": ev["feature_length"],
            "region_reduction": reduction,
            "region_reduction_pct": f"{100.0 * reduction:.2f}",
        }
        timing[variant] = {"mean_predict_seconds": ev["mean_predict_seconds"]}
    selection_payload = {}
    for variant, payload in selections.items():
        selection_payload[variant] = {k: v for k, v in payload.items()
                                      if k not in ("config_hash", "seed")}
    return RunReport(
        config=_config_echo(config), config_hash=config_hash(config), seed=config.seed,
        dataset=config.dataset_name(), conventions=dict(CONVENTIONS),
        baselines=baselines, selection=selection_payload, final=final, timing=timing,
    )


def strip_timing(payload):
    """Recursively drop wall-clock fields so reruns can be compared byte-for-byte."""
    if isinstance(payload, dict):
        return {k: strip_timing(v) for k, v in payload.items()
                if k not in ("timing", "wall_clock")
                and not k.endswith("_seconds") and not k.endswith("_time")}
    if isinstance(payload, list):
        return [strip_timing(v) for v in payload]
    return payload


def emit_report(report: RunReport, out_dir: str | Path, formats=("json", "csv")) -> list[Path]:
    """Write report.json and/or the accuracy + timing CSV tables."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if "json" in formats:
        path = out / "report.json"
        _write_json(path, report.to_dict())
        written.append(path)
    if "csv" in formats:
        stamp = f"# config_hash={report.config_hash} seed={report.seed}\n"
        header = ["dataset", "present_work", "basic_hs", "without_sampling"]

        def cell(section, variant, key, fmt):
            entry = section.get(variant)
            return fmt(entry[key]) if entry else ""

        acc_path = out / "accuracy.csv"
        with open(acc_path, "w", newline="") as fh:
            fh.write(stamp)
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerow([
                report.dataset,
                cell(report.final, "enhanced", "test_accuracy", lambda v: f"{100 * v:.4f}"),
                cell(report.final, "basic", "test_accuracy", lambda v: f"{100 * v:.4f}"),
                f"{100 * report.final['full_test_accuracy']:.4f}",
            ])
        written.append(acc_path)

        time_path = out / "timing.csv"
        with open(time_path, "w", newline="") as fh:
            fh.write(stamp)
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerow([
                report.dataset,
                cell(report.timing, "enhanced", "mean_predict_seconds", lambda v: f"{v:.6f}"),
                cell(report.timing, "basic", "mean_predict_seconds", lambda v: f"{v:.6f}"),
                f"{report.timing['full_mean_predict_seconds']:.6f}",
            ])
        written.append(time_path)
    return written


def render_region_map(result: SelectionResult | dict) -> str:
    """4x4 schematic of the level-2 regions with the selected ones bracketed."""
    subset = set(result.best_subset if isinstance(result, SelectionResult)
                 else canonical(result["best_subset"]))
    lines = ["level-2 region map ([n] = selected)"]
    for row in range(4):
        cells = []
        for col in range(4):
            idx = 4 * ((row // 2) * 2 + col // 2) + (row % 2) * 2 + col % 2
            cells.append(f"[{idx:2d}]" if idx in subset else f" {idx:2d} ")
        lines.append(" ".join(cells).rstrip())
    lines.append(f"selected={len(subset)} rejected={LEVEL2_COUNT - len(subset)}")
    return "\n".join(lines)


def run_pipeline(config: ExperimentConfig) -> RunReport:
    """Execute every phase in order; any phase error aborts with its name."""
    state: dict = {}

    def step(name, fn, *args):
        try:
            state[name] = fn(*args)
        except PipelineError:
            raise
        except Exception as exc:
            raise PipelineError(f"phase {name} failed: {exc}") from exc
        return state[name]

    split_data = step("prepare", phase_prepare, config)
    store = step("extract", phase_extract, config, split_data)
    baselines = step("baseline", phase_baseline, config, store)
    results = step("search", phase_search, config, store)
    selections = {variant: result.to_dict() for variant, result in results.items()}
    evaluation = step("evaluate", phase_evaluate, config, store, selections)

    def make_report():
        report = build_report(config, baselines, selections, evaluation)
        paths = emit_report(report, config.out_dir)
        for variant, result in results.items():
            (Path(config.out_dir) / f"region_map_{variant}.txt").write_text(
                render_region_map(result) + "\n")
        logger.info("report written: %s", ", ".join(str(p) for p in paths))
        return report

    return step("report", make_report)
