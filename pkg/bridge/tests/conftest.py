from typing import Tuple

import pytest
import torch
from torch import Tensor


class ToyDetector(torch.nn.Module):
    """Deterministic two-box detector driven by the image mean."""

    def forward(self, image: Tensor) -> Tuple[Tensor, Tensor, Tensor]:
        h = float(image.shape[1])
        w = float(image.shape[2])
        mean = image.mean()
        boxes = torch.tensor(
            [
                [0.25 * w, 0.25 * h, 0.75 * w, 0.75 * h],
                [0.0, 0.0, 0.5 * w, 0.5 * h],
            ]
        )
        labels = torch.tensor([1, 2])
        scores = torch.stack(
            [
                torch.clamp(mean + 0.2, 0.0, 1.0),
                torch.clamp(mean * 0.5, 0.0, 1.0),
            ]
        )
        return boxes, labels, scores


@pytest.fixture(scope="session")
def toy_model_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("models") / "toy_detector.pt"
    torch.jit.script(ToyDetector()).save(str(path))
    return path
