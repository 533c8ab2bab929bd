"""Parameter checkpoints as .npz archives carrying their layer dims."""

from __future__ import annotations

from pathlib import Path
from typing import Tuple

import numpy as np

from neural.mlp import MlpSpec, param_count


def save_params(path: str | Path, spec: MlpSpec, params: np.ndarray) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with target.open("wb") as handle:
        np.savez(
            handle,
            layer_dims=np.asarray(spec.layer_dims, dtype=np.int64),
            params=np.asarray(params, dtype=np.float64),
        )
    return target


def load_params(path: str | Path, spec: MlpSpec | None = None) -> Tuple[Tuple[int, ...], np.ndarray]:
    with np.load(Path(path)) as archive:
        dims = tuple(int(d) for d in archive["layer_dims"])
        params = archive["params"].astype(np.float64)
    if spec is not None:
        if dims != spec.layer_dims:
            raise ValueError(f"checkpoint dims {dims} do not match spec {spec.layer_dims}")
        if params.size != param_count(spec):
            raise ValueError("checkpoint parameter count does not match spec")
    return dims, params
