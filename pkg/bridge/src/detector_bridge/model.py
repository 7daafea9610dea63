from __future__ import annotations

import numpy as np
import torch

from .config import BridgeConfig


class DetectionModel:
    """TorchScript detection model behind a uniform inference call.

    The module contract: forward(image: float32 [3, H, W] in [0, 1]) ->
    (boxes [N, 4] xyxy absolute pixels, labels [N] int64, scores [N]).
    Corner boxes are converted to the harness's top-left x, y, w, h here
    so the harness sees one canonical geometry.
    """

    def __init__(self, config: BridgeConfig):
        self.config = config
        self.module = torch.jit.load(str(config.model_path), map_location=config.device)
        self.module.eval()

    @property
    def name(self) -> str:
        return f"bridge:{self.config.model_path.stem}"

    def infer(self, image: np.ndarray) -> list[dict]:
        """Detections for one RGB uint8 (h, w, 3) image, wire-schema dicts."""
        if image.ndim != 3 or image.shape[2] != 3:
            raise ValueError(f"expected an (h, w, 3) image, got shape {image.shape}")
        tensor = (
            torch.from_numpy(np.ascontiguousarray(image))
            .permute(2, 0, 1)
            .to(dtype=torch.float32, device=self.config.device)
            .div_(255.0)
        )
        with torch.no_grad():
            boxes, labels, scores = self.module(tensor)
        boxes = boxes.detach().cpu().numpy().reshape(-1, 4)
        labels = labels.detach().cpu().numpy().reshape(-1)
        scores = scores.detach().cpu().numpy().reshape(-1)

        items = []
        for (x1, y1, x2, y2), label, score in zip(boxes, labels, scores):
            w, h = float(x2 - x1), float(y2 - y1)
            conf = float(min(max(score, 0.0), 1.0))
            if w <= 0.0 or h <= 0.0 or conf < self.config.confidence_cutoff:
                continue
            items.append(
                {
                    "class": self.config.label_for(int(label)),
                    "bbox": [float(x1), float(y1), w, h],
                    "confidence": conf,
                }
            )
        return items
