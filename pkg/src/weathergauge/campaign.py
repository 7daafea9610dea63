"""End-to-end campaign orchestration.

A campaign ingests a dataset, runs one FFC search per (detector, usable
image, operator) triple through the augmented-image cache, and emits a
report bundle: per-image results CSV, per-detector summary JSON,
confidence-curve CSV (exhaustive mode), monotonicity report, exclusion
and failure lists, plus a run manifest echoing the configuration.
Reports are deterministic given (config, dataset, detector behavior);
only the manifest carries a timestamp.
"""

from __future__ import annotations

import csv
import json
import logging
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .augment import ALL_OPERATORS, OperatorKind, derive_seed, strength_grid
from .cache import ImageCache, strength_to_millis
from .detectors import (
    DetectorHandle,
    close_detector,
    detect,
    effective_concurrency,
    handle_from_dict,
    handle_to_dict,
    handshake,
)
from .errors import (
    CacheError,
    ComparisonError,
    ConfigError,
    ContractError,
    DatasetError,
    ImageError,
    ProbeError,
    ProtocolError,
    TransportError,
)
from .geometry import EquivalenceConfig, primary_detection
from .image import file_sha256, pixel_sha256, read_image
from .metrics import (
    ConditionSummary,
    ConfidenceCurve,
    ModelSummary,
    build_model_summary,
    compare,
    confidence_curve,
    summarize_condition,
)
from .search import FfcResult, ffc_binary, ffc_linear, monotonicity_audit

__all__ = [
    "CampaignConfig",
    "ManifestEntry",
    "DatasetManifest",
    "CampaignResult",
    "ingest_dataset",
    "run_campaign",
    "write_reports",
    "report_run_dir",
    "compare_reports",
]

log = logging.getLogger("weathergauge")

_SEARCH_MODES = ("linear", "binary", "exhaustive")
_IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")

RESULTS_CSV = "results.csv"
CURVES_CSV = "curves.csv"
MONOTONICITY_CSV = "monotonicity.csv"
EXCLUDED_CSV = "excluded.csv"
FAILURES_CSV = "failures.csv"
MANIFEST_JSON = "manifest.json"


@dataclass
class CampaignConfig:
    dataset_dir: Path
    detectors: list[DetectorHandle]
    cache_dir: Path
    out_dir: Path
    operators: tuple[OperatorKind, ...] = ALL_OPERATORS
    step: float = 0.025
    delta: float = 0.5
    search_mode: str = "linear"
    campaign_seed: int = 0
    parallelism: int = 0  # 0: one worker per processor core

    def validate(self) -> list[float]:
        """Check the configuration and return the strength grid."""
        grid = strength_grid(self.step)
        for g in grid:
            strength_to_millis(g)  # cache keys need whole millistrengths
        EquivalenceConfig(delta=self.delta)  # range check
        if not self.operators:
            raise ConfigError("operator set is empty")
        if len(set(self.operators)) != len(self.operators):
            raise ConfigError("duplicate operator in config")
        if self.search_mode not in _SEARCH_MODES:
            raise ConfigError(f"search_mode must be one of {_SEARCH_MODES}")
        if not self.detectors:
            raise ConfigError("no detectors configured")
        ids = [d.detector_id for d in self.detectors]
        if len(set(ids)) != len(ids):
            raise ConfigError("duplicate detector_id in config")
        if not 0 <= self.campaign_seed < 2**64:
            raise ConfigError("campaign_seed outside u64 range")
        if self.parallelism < 0:
            raise ConfigError("parallelism must be >= 0")
        return grid

    @property
    def workers(self) -> int:
        return self.parallelism or os.cpu_count() or 1

    @classmethod
    def from_json(cls, path: str | Path) -> "CampaignConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        for required in ("dataset_dir", "detectors", "cache_dir", "out_dir"):
            if required not in raw:
                raise ConfigError(f"config is missing {required!r}")
        ops = tuple(OperatorKind(o) for o in raw.get("operators", [o.value for o in ALL_OPERATORS]))
        return cls(
            dataset_dir=Path(raw["dataset_dir"]),
            detectors=[handle_from_dict(d) for d in raw["detectors"]],
            cache_dir=Path(raw["cache_dir"]),
            out_dir=Path(raw["out_dir"]),
            operators=ops,
            step=float(raw.get("step", 0.025)),
            delta=float(raw.get("delta", 0.5)),
            search_mode=raw.get("search_mode", "linear"),
            campaign_seed=int(raw.get("campaign_seed", 0)),
            parallelism=int(raw.get("parallelism", 0)),
        )

    def to_dict(self) -> dict:
        return {
            "dataset_dir": str(self.dataset_dir),
            "detectors": [handle_to_dict(d) for d in self.detectors],
            "cache_dir": str(self.cache_dir),
            "out_dir": str(self.out_dir),
            "operators": [o.value for o in self.operators],
            "step": self.step,
            "delta": self.delta,
            "search_mode": self.search_mode,
            "campaign_seed": self.campaign_seed,
            "parallelism": self.parallelism,
        }


@dataclass(frozen=True)
class ManifestEntry:
    image_id: str
    path: str
    sha256: str  # file content hash
    width: int
    height: int
    pixel_sha256: str
    clean_detection_present: dict[str, bool]
    clean_confidence: dict[str, float | None]


@dataclass(frozen=True)
class DatasetManifest:
    entries: tuple[ManifestEntry, ...]

    def usable_for(self, detector_id: str) -> list[ManifestEntry]:
        return [e for e in self.entries if e.clean_detection_present.get(detector_id)]


def ingest_dataset(dataset_dir: str | Path, detectors: list[DetectorHandle]) -> DatasetManifest:
    """Hash and measure every readable image; probe each detector once clean.

    Images the detector yields no primary detection for are flagged so
    the campaign can exclude them from that detector's AFFC.
    """
    dataset_dir = Path(dataset_dir)
    if not dataset_dir.is_dir():
        raise DatasetError(f"dataset dir {dataset_dir} does not exist")
    paths = sorted(
        p for p in dataset_dir.iterdir() if p.suffix.lower() in _IMAGE_SUFFIXES
    )
    entries: list[ManifestEntry] = []
    for path in paths:
        try:
            arr = read_image(path)
        except ImageError as exc:
            log.warning("skipping unreadable image %s: %s", path, exc)
            continue
        present: dict[str, bool] = {}
        confidence: dict[str, float | None] = {}
        for det in detectors:
            image_path = str(path.resolve()) if det.transport != "builtin" else None
            r0 = detect(det, arr, probe=None, image_path=image_path)
            d0 = primary_detection(r0)
            present[det.detector_id] = d0 is not None
            confidence[det.detector_id] = None if d0 is None else d0.confidence
        entries.append(
            ManifestEntry(
                image_id=path.name,
                path=str(path.resolve()),
                sha256=file_sha256(path),
                width=arr.shape[1],
                height=arr.shape[0],
                pixel_sha256=pixel_sha256(arr),
                clean_detection_present=present,
                clean_confidence=confidence,
            )
        )
    if not entries:
        raise DatasetError(f"no readable images in {dataset_dir}")
    return DatasetManifest(entries=tuple(entries))


@dataclass(frozen=True)
class TripleFailure:
    detector_id: str
    image_id: str
    operator: OperatorKind
    error: str


@dataclass
class CampaignResult:
    out_dir: Path
    manifest: DatasetManifest
    records: dict[tuple[str, str, OperatorKind], FfcResult]
    summaries: dict[str, ModelSummary]
    curves: list[ConfidenceCurve]
    monotonicity: list[tuple[str, str, OperatorKind, int]]
    failures: list[TripleFailure]
    excluded: list[tuple[str, str]]
    exit_code: int = 0


def run_campaign(config: CampaignConfig) -> CampaignResult:
    grid = config.validate()
    eq_cfg = EquivalenceConfig(delta=config.delta)
    cache = ImageCache(config.cache_dir)
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    for det in config.detectors:
        handshake(det)
    try:
        manifest = ingest_dataset(config.dataset_dir, config.detectors)
        images = {e.image_id: read_image(e.path) for e in manifest.entries}

        excluded: list[tuple[str, str]] = []
        tasks: list[tuple[DetectorHandle, ManifestEntry, OperatorKind]] = []
        for det in config.detectors:
            for entry in manifest.entries:
                if not entry.clean_detection_present.get(det.detector_id):
                    excluded.append((det.detector_id, entry.image_id))
                    continue
                for op in config.operators:
                    tasks.append((det, entry, op))

        records: dict[tuple[str, str, OperatorKind], FfcResult] = {}
        monotonicity: list[tuple[str, str, OperatorKind, int]] = []
        failures: list[TripleFailure] = []
        results_lock = threading.Lock()
        gates = {
            det.detector_id: threading.Semaphore(effective_concurrency(det))
            for det in config.detectors
        }

        def run_triple(det: DetectorHandle, entry: ManifestEntry, op: OperatorKind):
            seed = derive_seed(config.campaign_seed, entry.image_id, op)
            image = images[entry.image_id]
            kwargs = dict(image_id=entry.image_id, cache=cache)
            with gates[det.detector_id]:
                try:
                    if config.search_mode == "exhaustive":
                        audit = monotonicity_audit(det, image, op, grid, eq_cfg, seed, **kwargs)
                        with results_lock:
                            records[(det.detector_id, entry.image_id, op)] = audit.result
                            monotonicity.append(
                                (det.detector_id, entry.image_id, op, audit.violations)
                            )
                    elif config.search_mode == "binary":
                        rec = ffc_binary(det, image, op, grid, eq_cfg, seed, **kwargs)
                        with results_lock:
                            records[(det.detector_id, entry.image_id, op)] = rec
                    else:
                        rec = ffc_linear(det, image, op, grid, eq_cfg, seed, **kwargs)
                        with results_lock:
                            records[(det.detector_id, entry.image_id, op)] = rec
                except CacheError:
                    raise  # cache I/O failure is fatal
                except (ProbeError, TransportError, ProtocolError, ContractError) as exc:
                    log.warning(
                        "triple (%s, %s, %s) failed: %s",
                        det.detector_id, entry.image_id, op.value, exc,
                    )
                    with results_lock:
                        failures.append(
                            TripleFailure(det.detector_id, entry.image_id, op, str(exc))
                        )

        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            futures = [pool.submit(run_triple, det, entry, op) for det, entry, op in tasks]
            for f in futures:
                f.result()  # re-raise fatal errors (cache I/O)

        summaries: dict[str, ModelSummary] = {}
        curves: list[ConfidenceCurve] = []
        for det in config.detectors:
            per_condition: list[ConditionSummary] = []
            for op in config.operators:
                op_results = [
                    records[(det.detector_id, e.image_id, op)]
                    for e in manifest.usable_for(det.detector_id)
                    if (det.detector_id, e.image_id, op) in records
                ]
                if not op_results:
                    log.warning(
                        "no results for detector %s under %s", det.detector_id, op.value
                    )
                    continue
                per_condition.append(summarize_condition(op, op_results))
                if config.search_mode == "exhaustive":
                    curves.append(
                        confidence_curve(
                            op_results, grid, operator=op, model_id=det.detector_id
                        )
                    )
            if per_condition:
                summaries[det.detector_id] = build_model_summary(
                    det.detector_id, per_condition
                )
            else:
                log.warning(
                    "detector %s has no usable images; omitting its summary",
                    det.detector_id,
                )

        result = CampaignResult(
            out_dir=out_dir,
            manifest=manifest,
            records=records,
            summaries=summaries,
            curves=curves,
            monotonicity=sorted(
                monotonicity, key=lambda m: (m[0], m[1], m[2].value)
            ),
            failures=sorted(
                failures, key=lambda f: (f.detector_id, f.image_id, f.operator.value)
            ),
            excluded=sorted(excluded),
            exit_code=1 if failures else 0,
        )
        write_reports(result, config, grid)
        return result
    finally:
        for det in config.detectors:
            close_detector(det)


def _fmt(value: float) -> str:
    return f"{value:.3f}"


def write_reports(result: CampaignResult, config: CampaignConfig, grid: list[float]) -> None:
    out = result.out_dir
    out.mkdir(parents=True, exist_ok=True)

    with open(out / RESULTS_CSV, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(
            ["image_id", "detector_id", "operator", "ffc", "censored", "probes", "clean_confidence"]
        )
        entry_by_id = {e.image_id: e for e in result.manifest.entries}
        for (det_id, image_id, op) in sorted(
            result.records, key=lambda k: (k[0], k[1], k[2].value)
        ):
            rec = result.records[(det_id, image_id, op)]
            clean = entry_by_id[image_id].clean_confidence.get(det_id)
            w.writerow(
                [
                    image_id,
                    det_id,
                    op.value,
                    _fmt(rec.ffc),
                    "true" if rec.censored else "false",
                    rec.probes,
                    "" if clean is None else _fmt(clean),
                ]
            )

    for det_id in sorted(result.summaries):
        summary = result.summaries[det_id]
        payload = {
            "model_id": summary.model_id,
            "per_condition": [
                {
                    "operator": c.operator.value,
                    "affc": round(c.affc, 3),
                    "std_dev": round(c.std_dev, 3),
                    "n": c.n,
                    "censored_count": c.censored_count,
                }
                for c in summary.per_condition
            ],
            "overall_affc": round(summary.overall_affc, 3),
        }
        (out / f"summary_{det_id}.json").write_text(json.dumps(payload, indent=2) + "\n")

    if config.search_mode == "exhaustive":
        with open(out / CURVES_CSV, "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["detector_id", "operator", "strength", "mean_confidence", "n"])
            for curve in sorted(result.curves, key=lambda c: (c.model_id, c.operator.value)):
                for p in curve.points:
                    w.writerow(
                        [curve.model_id, curve.operator.value, _fmt(p.strength), _fmt(p.mean_confidence), p.n]
                    )
        with open(out / MONOTONICITY_CSV, "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["detector_id", "image_id", "operator", "violations"])
            for det_id, image_id, op, violations in result.monotonicity:
                w.writerow([det_id, image_id, op.value, violations])

    with open(out / EXCLUDED_CSV, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["detector_id", "image_id"])
        for det_id, image_id in result.excluded:
            w.writerow([det_id, image_id])

    if result.failures:
        with open(out / FAILURES_CSV, "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["detector_id", "image_id", "operator", "error"])
            for fail in result.failures:
                w.writerow([fail.detector_id, fail.image_id, fail.operator.value, fail.error])

    manifest_payload = {
        "tool": "weathergauge",
        "version": __version__,
        "created": datetime.now(timezone.utc).isoformat(),
        "config": config.to_dict(),
        "grid_points": len(grid),
        "dataset": [
            {
                "image_id": e.image_id,
                "path": e.path,
                "sha256": e.sha256,
                "width": e.width,
                "height": e.height,
                "pixel_sha256": e.pixel_sha256,
                "clean_detection_present": e.clean_detection_present,
                "clean_confidence": e.clean_confidence,
            }
            for e in result.manifest.entries
        ],
        "counts": {
            "results": len(result.records),
            "failures": len(result.failures),
            "excluded": len(result.excluded),
        },
    }
    (out / MANIFEST_JSON).write_text(json.dumps(manifest_payload, indent=2) + "\n")


def _load_summary(path: Path) -> ModelSummary:
    raw = json.loads(path.read_text())
    conditions = [
        ConditionSummary(
            operator=OperatorKind(c["operator"]),
            affc=float(c["affc"]),
            std_dev=float(c["std_dev"]),
            n=int(c["n"]),
            censored_count=int(c["censored_count"]),
        )
        for c in raw["per_condition"]
    ]
    return build_model_summary(raw["model_id"], conditions)


def report_run_dir(run_dir: str | Path) -> dict[str, ModelSummary]:
    """Re-derive per-detector summaries from a completed run's results CSV."""
    run_dir = Path(run_dir)
    results_path = run_dir / RESULTS_CSV
    if not results_path.exists():
        raise ConfigError(f"{run_dir} has no {RESULTS_CSV}; not a run directory?")
    by_detector: dict[str, dict[OperatorKind, list[FfcResult]]] = {}
    with open(results_path, newline="") as f:
        for row in csv.DictReader(f):
            op = OperatorKind(row["operator"])
            rec = FfcResult(
                image_id=row["image_id"],
                operator=op,
                ffc=float(row["ffc"]),
                censored=row["censored"] == "true",
                probes=int(row["probes"]),
                trace=(),
            )
            by_detector.setdefault(row["detector_id"], {}).setdefault(op, []).append(rec)
    summaries = {}
    for det_id, per_op in sorted(by_detector.items()):
        conditions = [summarize_condition(op, recs) for op, recs in sorted(
            per_op.items(), key=lambda kv: kv[0].value
        )]
        summaries[det_id] = build_model_summary(det_id, conditions)
    return summaries


def _comparable_manifest(run_dir: Path) -> dict:
    path = run_dir / MANIFEST_JSON
    if not path.exists():
        raise ComparisonError(f"{run_dir} has no {MANIFEST_JSON}")
    cfg = json.loads(path.read_text())["config"]
    return {
        "step": cfg["step"],
        "delta": cfg["delta"],
        "operators": sorted(cfg["operators"]),
    }


def compare_reports(a_dir: str | Path, b_dir: str | Path) -> dict:
    """Per-condition and overall AFFC deltas between two report bundles.

    Bundles must share grid step, delta and operator set. Single-detector
    bundles are compared directly; multi-detector bundles are matched by
    detector_id.
    """
    a_dir, b_dir = Path(a_dir), Path(b_dir)
    ca, cb = _comparable_manifest(a_dir), _comparable_manifest(b_dir)
    if ca != cb:
        raise ComparisonError(f"bundles are not comparable: {ca} vs {cb}")

    a_summaries = {p.stem[len("summary_"):]: _load_summary(p) for p in sorted(a_dir.glob("summary_*.json"))}
    b_summaries = {p.stem[len("summary_"):]: _load_summary(p) for p in sorted(b_dir.glob("summary_*.json"))}
    if not a_summaries or not b_summaries:
        raise ComparisonError("both bundles need at least one detector summary")

    if len(a_summaries) == 1 and len(b_summaries) == 1:
        pairs = [(next(iter(a_summaries.values())), next(iter(b_summaries.values())))]
    else:
        if set(a_summaries) != set(b_summaries):
            raise ComparisonError(
                f"detector sets differ: {sorted(a_summaries)} vs {sorted(b_summaries)}"
            )
        pairs = [(a_summaries[k], b_summaries[k]) for k in sorted(a_summaries)]

    comparisons = []
    for sa, sb in pairs:
        delta = compare(sa, sb)
        comparisons.append(
            {
                "model_a": delta.model_a,
                "model_b": delta.model_b,
                "per_condition": {
                    op.value: round(d, 3)
                    for op, d in sorted(delta.per_condition.items(), key=lambda kv: kv[0].value)
                },
                "overall_delta": round(delta.overall_delta, 3),
            }
        )
    return {"a": str(a_dir), "b": str(b_dir), "comparisons": comparisons}
