from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path


@dataclass(frozen=True)
class BridgeConfig:
    """Bridge settings.

    model_path points at a TorchScript module whose forward takes a
    float32 CHW RGB tensor in [0, 1] and returns (boxes, labels, scores)
    with boxes as absolute-pixel xyxy corners. confidence_cutoff drops
    low-scoring detections before they reach the wire.
    """

    model_path: Path
    confidence_cutoff: float = 0.25
    class_names: tuple[str, ...] = field(default_factory=tuple)
    device: str = "cpu"

    def __post_init__(self):
        object.__setattr__(self, "model_path", Path(self.model_path))
        if not self.model_path.is_file():
            raise FileNotFoundError(f"model file not found: {self.model_path}")
        if not 0.0 <= self.confidence_cutoff <= 1.0:
            raise ValueError(f"confidence_cutoff outside [0, 1]: {self.confidence_cutoff}")

    def label_for(self, class_id: int) -> str:
        if 0 <= class_id < len(self.class_names):
            return self.class_names[class_id]
        return f"class_{class_id}"
