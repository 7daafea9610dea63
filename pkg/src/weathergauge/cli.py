"""Command line interface.

Verbs:
  augment           apply one operator to one image
  audit-smoothness  adjacent-step delta audit for one operator
  ingest            hash a dataset and probe clean detections
  run               execute a full campaign from a JSON config
  report            re-derive summaries from a completed run directory
  compare           diff two report bundles

Exit status: 0 success, 1 partial failures, 2 fatal.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .augment import ALL_OPERATORS, OperatorKind, apply, smoothness_audit, strength_grid
from .campaign import (
    CampaignConfig,
    compare_reports,
    ingest_dataset,
    report_run_dir,
    run_campaign,
)
from .errors import WeathergaugeError
from .image import read_image, write_png

log = logging.getLogger("weathergauge")

_OP_CHOICES = [o.value for o in ALL_OPERATORS]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="weathergauge",
        description="Measure object-detector robustness under synthetic adverse conditions.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("augment", help="apply one operator to one image")
    p.add_argument("--op", required=True, choices=_OP_CHOICES)
    p.add_argument("--strength", required=True, type=float, help="interference strength in [0, 1]")
    p.add_argument("--seed", required=True, type=int, help="64-bit augmentation seed")
    p.add_argument("--in", dest="src", required=True, help="input PNG/JPEG")
    p.add_argument("--out", dest="dst", required=True, help="output PNG path")

    p = sub.add_parser("audit-smoothness", help="adjacent-step delta audit")
    p.add_argument("--op", required=True, choices=_OP_CHOICES)
    p.add_argument("--in", dest="src", required=True, help="input PNG/JPEG")
    p.add_argument("--step", type=float, default=0.025)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", dest="dst", help="write CSV here instead of stdout")

    p = sub.add_parser("ingest", help="hash a dataset and probe clean detections")
    p.add_argument("--config", required=True, help="campaign config JSON")
    p.add_argument("--out", dest="dst", help="write the manifest JSON here instead of stdout")

    p = sub.add_parser("run", help="execute a campaign")
    p.add_argument("--config", required=True, help="campaign config JSON")

    p = sub.add_parser("report", help="re-derive summaries from a run directory")
    p.add_argument("--run", dest="run_dir", required=True)

    p = sub.add_parser("compare", help="diff two report bundles (a minus b)")
    p.add_argument("--a", dest="a_dir", required=True)
    p.add_argument("--b", dest="b_dir", required=True)
    p.add_argument("--out", dest="dst", help="write the comparison JSON here instead of stdout")
    return parser


def _cmd_augment(args) -> int:
    if not args.dst.lower().endswith(".png"):
        raise WeathergaugeError("output must be a .png path (the lossless cache format)")
    image = read_image(args.src)
    out = apply(OperatorKind(args.op), image, args.strength, args.seed)
    Path(args.dst).parent.mkdir(parents=True, exist_ok=True)
    write_png(args.dst, out)
    log.info("wrote %s", args.dst)
    return 0


def _cmd_audit_smoothness(args) -> int:
    image = read_image(args.src)
    grid = strength_grid(args.step)
    deltas = smoothness_audit(OperatorKind(args.op), image, grid, args.seed)
    lines = ["strength,mean_abs_delta"]
    lines += [f"{s:.3f},{d:.6f}" for s, d in deltas]
    text = "\n".join(lines) + "\n"
    if args.dst:
        Path(args.dst).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_ingest(args) -> int:
    config = CampaignConfig.from_json(args.config)
    manifest = ingest_dataset(config.dataset_dir, config.detectors)
    payload = [
        {
            "image_id": e.image_id,
            "path": e.path,
            "sha256": e.sha256,
            "width": e.width,
            "height": e.height,
            "clean_detection_present": e.clean_detection_present,
        }
        for e in manifest.entries
    ]
    text = json.dumps(payload, indent=2) + "\n"
    if args.dst:
        Path(args.dst).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _summary_table(summaries) -> str:
    lines = []
    for det_id, summary in sorted(summaries.items()):
        lines.append(f"detector {det_id}  overall_affc={summary.overall_affc:.3f}")
        for c in summary.per_condition:
            lines.append(
                f"  {c.operator.value:<10} affc={c.affc:.3f} std_dev={c.std_dev:.3f} "
                f"n={c.n} censored={c.censored_count}"
            )
    return "\n".join(lines) + "\n"


def _cmd_run(args) -> int:
    config = CampaignConfig.from_json(args.config)
    result = run_campaign(config)
    sys.stdout.write(_summary_table(result.summaries))
    if result.failures:
        log.warning("%d triples failed; see %s", len(result.failures), result.out_dir)
    log.info("reports written to %s", result.out_dir)
    return result.exit_code


def _cmd_report(args) -> int:
    summaries = report_run_dir(args.run_dir)
    sys.stdout.write(_summary_table(summaries))
    return 0


def _cmd_compare(args) -> int:
    comparison = compare_reports(args.a_dir, args.b_dir)
    text = json.dumps(comparison, indent=2) + "\n"
    if args.dst:
        Path(args.dst).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


_COMMANDS = {
    "augment": _cmd_augment,
    "audit-smoothness": _cmd_audit_smoothness,
    "ingest": _cmd_ingest,
    "run": _cmd_run,
    "report": _cmd_report,
    "compare": _cmd_compare,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return _COMMANDS[args.command](args)
    except WeathergaugeError as exc:
        log.error("%s", exc)
        return 2
    except OSError as exc:
        log.error("%s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
