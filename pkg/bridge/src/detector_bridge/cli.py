from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import BridgeConfig
from .serve import serve


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(
        prog="bridge",
        description="Serve a TorchScript detection model over the harness wire protocol.",
    )
    ap.add_argument("--model", required=True, help="path to a TorchScript model file")
    ap.add_argument("--cutoff", type=float, default=0.25, help="confidence cutoff (default 0.25)")
    ap.add_argument("--device", default="cpu", help="inference device token (default cpu)")
    ap.add_argument("--classes", help="optional text file with one class name per line")
    args = ap.parse_args(argv)

    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(levelname)s: %(message)s")

    names: tuple[str, ...] = ()
    if args.classes:
        names = tuple(
            line.strip() for line in Path(args.classes).read_text().splitlines() if line.strip()
        )
    try:
        config = BridgeConfig(
            model_path=args.model,
            confidence_cutoff=args.cutoff,
            class_names=names,
            device=args.device,
        )
    except (FileNotFoundError, ValueError) as exc:
        logging.getLogger("detector_bridge").error("%s", exc)
        return 2
    return serve(config)


if __name__ == "__main__":
    sys.exit(main())
