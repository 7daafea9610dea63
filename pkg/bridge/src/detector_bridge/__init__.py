"""Reference external detector for the robustness harness.

Loads a serialized (TorchScript) object-detection model and serves the
harness wire protocol over stdin/stdout: line-delimited JSON, one
synchronous detect request at a time. Parallelism comes from running
several bridge processes.
"""

from .config import BridgeConfig
from .model import DetectionModel
from .serve import serve

__version__ = "0.1.0"

__all__ = ["BridgeConfig", "DetectionModel", "serve", "__version__"]
