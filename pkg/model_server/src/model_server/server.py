"""HTTP imputation service backed by a trained checkpoint.

The wire contract matches what the audit tooling speaks:

- ``POST /impute`` with ``{"values": [...], "masks": [...]}`` where
  values holds numbers with null at hidden points and each mask is
  ``{"start": int, "width": int}``. The reply is ``{"imputed": [...]}``
  with observed points echoed unchanged and masked points filled by
  the model. A request with no masks comes straight back.
- ``GET /health`` reports ``{"kind": architecture, "length": T}``.
- Malformed requests get 400, unknown paths 404.

Models are fixed-length, so values must have exactly the trained
length; anything else is malformed.
"""

from __future__ import annotations

import json
import math
import threading
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import List, Optional

import torch

from .config import TrainJobSpec
from .errors import CheckpointError
from .models import build_model


@dataclass
class LoadedModel:
    spec: TrainJobSpec
    length: int
    mean: float
    std: float
    module: torch.nn.Module

    def impute(self, values: List[Optional[float]],
               missing: List[bool]) -> List[float]:
        """Fill missing points; observed points pass through exactly."""
        if not any(missing):
            return [float(v) for v in values]
        x = torch.zeros(1, self.length)
        m = torch.ones(1, self.length)
        for i, value in enumerate(values):
            if missing[i]:
                m[0, i] = 0.0
            else:
                x[0, i] = (value - self.mean) / self.std
        with torch.no_grad():
            estimate = self.module(x, m)[0]
        out: List[float] = []
        for i, value in enumerate(values):
            if missing[i]:
                out.append(float(estimate[i]) * self.std + self.mean)
            else:
                out.append(float(value))
        return out


def load_checkpoint(path) -> LoadedModel:
    path = Path(path)
    try:
        payload = torch.load(path, map_location="cpu", weights_only=True)
    except OSError as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") \
            from exc
    except Exception as exc:
        raise CheckpointError(f"cannot load checkpoint {path}: {exc}") \
            from exc
    for key in ("spec", "length", "mean", "std", "state_dict"):
        if key not in payload:
            raise CheckpointError(f"checkpoint {path} is missing {key!r}")
    spec = TrainJobSpec(**payload["spec"])
    module = build_model(spec, payload["length"])
    module.load_state_dict(payload["state_dict"])
    module.eval()
    return LoadedModel(spec=spec, length=payload["length"],
                       mean=payload["mean"], std=payload["std"],
                       module=module)


class _BadRequest(Exception):
    pass


def _parse_request(body: bytes, length: int):
    """Validate one /impute body; returns (values, missing flags)."""
    try:
        payload = json.loads(body)
    except ValueError:
        raise _BadRequest("body is not valid JSON")
    if not isinstance(payload, dict):
        raise _BadRequest("body must be a JSON object")
    values = payload.get("values")
    masks = payload.get("masks")
    if not isinstance(values, list) or not values:
        raise _BadRequest("values must be a non-empty list")
    if len(values) != length:
        raise _BadRequest(f"expected {length} values, got {len(values)}")
    for value in values:
        if value is None:
            continue
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise _BadRequest("values must be numbers or null")
        if not math.isfinite(float(value)):
            raise _BadRequest("values must be finite")
    if not isinstance(masks, list):
        raise _BadRequest("masks must be a list")
    missing = [False] * len(values)
    for mask in masks:
        if not isinstance(mask, dict):
            raise _BadRequest("each mask must be an object")
        start = mask.get("start")
        width = mask.get("width")
        for name, field in (("start", start), ("width", width)):
            if isinstance(field, bool) or not isinstance(field, int):
                raise _BadRequest(f"mask {name} must be an integer")
        if start < 0 or width < 1 or start + width > len(values):
            raise _BadRequest("mask out of range")
        for i in range(start, start + width):
            if missing[i]:
                raise _BadRequest("masks overlap")
            missing[i] = True
    for i, value in enumerate(values):
        if value is None and not missing[i]:
            raise _BadRequest(f"null at unmasked position {i}")
    return values, missing


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"

    def _reply(self, status: int, payload: dict):
        body = json.dumps(payload).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self):
        model = self.server.model
        if self.path != "/health":
            self._reply(404, {"error": "not found"})
            return
        self._reply(200, {"kind": model.spec.architecture,
                          "length": model.length})

    def do_POST(self):
        model = self.server.model
        if self.path != "/impute":
            self._reply(404, {"error": "not found"})
            return
        size = int(self.headers.get("Content-Length") or 0)
        body = self.rfile.read(size)
        try:
            values, missing = _parse_request(body, model.length)
        except _BadRequest as exc:
            self._reply(400, {"error": str(exc)})
            return
        with self.server.inference_lock:
            imputed = model.impute(values, missing)
        if not all(math.isfinite(v) for v in imputed):
            self._reply(500, {"error": "model produced non-finite values"})
            return
        self._reply(200, {"imputed": imputed})

    def log_message(self, format, *args):
        pass


class _Server(ThreadingHTTPServer):
    daemon_threads = True
    # the default backlog of 5 drops connections under concurrent load
    request_queue_size = 64


class ModelService:
    """A running server; close() releases the port."""

    def __init__(self, model: LoadedModel, host: str, port: int):
        self._server = _Server((host, port), _Handler)
        self._server.model = model
        self._server.inference_lock = threading.Lock()
        self._thread = threading.Thread(
            target=self._server.serve_forever, daemon=True)
        self._thread.start()

    @property
    def url(self) -> str:
        host, port = self._server.server_address[:2]
        return f"http://{host}:{port}"

    @property
    def kind(self) -> str:
        return self._server.model.spec.architecture

    def close(self):
        self._server.shutdown()
        self._server.server_close()
        self._thread.join()


def serve_checkpoint(checkpoint, host: str = "127.0.0.1",
                     port: int = 0) -> ModelService:
    """Load a checkpoint and start serving it; returns the service."""
    return ModelService(load_checkpoint(checkpoint), host, port)
