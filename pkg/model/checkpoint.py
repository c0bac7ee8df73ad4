"""JSON checkpoints of named model tensors.

Layout: `{"format_version": 1, "metadata": {...}, "tensors": [{"name", "shape", "data"}]}`
with `data` the row-major flattened values.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any

import numpy as np

from errors import ShapeError
from model.sdge import SdgeModel

logger = logging.getLogger(__name__)

CHECKPOINT_FORMAT_VERSION = 1


def save_checkpoint(model: SdgeModel, path: Path, metadata: dict[str, Any] | None = None) -> None:
    """Write every named parameter of `model` to `path`."""
    payload = {
        "format_version": CHECKPOINT_FORMAT_VERSION,
        "metadata": metadata or {},
        "fusion_weights": list(model.fusion.weights),
        "tensors": [
            {"name": name, "shape": list(parameter.shape), "data": parameter.value.ravel().tolist()}
            for name, parameter in model.named_parameters().items()
        ],
    }
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload), encoding="utf-8")
    logger.info("Checkpoint saved: path=%s tensors=%d", path, len(payload["tensors"]))


def load_checkpoint(model: SdgeModel, path: Path) -> dict[str, Any]:
    """Restore parameters into an identically configured model and return the metadata."""
    payload = json.loads(path.read_text(encoding="utf-8"))
    version = payload.get("format_version")
    if version != CHECKPOINT_FORMAT_VERSION:
        raise ShapeError(f"Checkpoint error: path={path} format_version={version} reason=unsupported_version")

    named = model.named_parameters()
    stored = {tensor["name"]: tensor for tensor in payload["tensors"]}
    missing = sorted(set(named) - set(stored))
    unexpected = sorted(set(stored) - set(named))
    if missing or unexpected:
        raise ShapeError(
            f"Checkpoint error: path={path} missing={','.join(missing[:5])} "
            f"unexpected={','.join(unexpected[:5])} reason=name_mismatch"
        )

    for name, parameter in named.items():
        shape = tuple(stored[name]["shape"])
        if shape != parameter.shape:
            raise ShapeError(f"Checkpoint error: tensor={name} stored={shape} expected={parameter.shape}")
        parameter.value[...] = np.asarray(stored[name]["data"], dtype=np.float64).reshape(shape)
    model.set_fusion_weights(payload["fusion_weights"])
    logger.info("Checkpoint loaded: path=%s tensors=%d", path, len(named))
    return dict(payload.get("metadata", {}))
