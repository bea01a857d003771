"""Black-box imputer contract: built-ins, remote client, and mock server.

Built-ins are deterministic surrogates for trained models: a memorizing
imputer that replays its nearest training series (an overfit target), a
linear interpolator and a seasonal-mean imputer (generalizing references).
The remote kind speaks the wire protocol; serve_imputer exposes any
in-process handle over the same protocol so client and server can be
tested against each other.

Wire protocol. POST /impute with
{"values": [number|null, ...], "masks": [{"start": int, "width": int}, ...]}
returns {"imputed": [number, ...]} of the same length; null marks missing
points and must coincide exactly with the mask spans. GET /health returns
{"kind": string, "length": int|null}. Malformed requests get 400 with an
error body.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from math import isfinite
from typing import Optional, Sequence

import httpx
import numpy as np

from .dataset import MaskedSeries, MaskSpec, TimeSeriesRecord
from .errors import (
    ConfigError,
    MaskError,
    ModelOutputError,
    StartupError,
    TransportError,
)

KINDS = ("memorizing", "interpolating", "seasonal_mean", "remote")

DEFAULT_TIMEOUT_MS = 30_000
TIMEOUT_ENV_VAR = "IMPUTEAUDIT_TIMEOUT_MS"


@dataclass(frozen=True)
class ImputerHandle:
    """Immutable reference to an imputation model.

    kind "remote" requires endpoint; "memorizing" requires a non-empty
    training_store. period configures seasonal_mean (slots per cycle);
    timeout_ms overrides the wire timeout for remote handles.
    """

    kind: str
    endpoint: Optional[str] = None
    training_store: Optional[tuple] = None
    period: Optional[int] = None
    timeout_ms: Optional[int] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown imputer kind {self.kind!r}")
        if self.kind == "remote" and not self.endpoint:
            raise ConfigError("remote imputer needs an endpoint")
        if self.training_store is not None:
            object.__setattr__(self, "training_store", tuple(self.training_store))
        if self.kind == "memorizing" and not self.training_store:
            raise ConfigError("memorizing imputer needs a non-empty training store")
        if self.period is not None and self.period < 1:
            raise ConfigError("period must be >= 1")
        if self.timeout_ms is not None and self.timeout_ms <= 0:
            raise ConfigError("timeout_ms must be positive")


def memorizing(store: Sequence[TimeSeriesRecord]) -> ImputerHandle:
    return ImputerHandle(kind="memorizing", training_store=tuple(store))


def interpolating() -> ImputerHandle:
    return ImputerHandle(kind="interpolating")


def seasonal_mean(period: int = 48) -> ImputerHandle:
    return ImputerHandle(kind="seasonal_mean", period=period)


def remote(endpoint: str, timeout_ms: Optional[int] = None) -> ImputerHandle:
    return ImputerHandle(kind="remote", endpoint=endpoint, timeout_ms=timeout_ms)


# ---------------------------------------------------------------------------
# built-in imputers
# ---------------------------------------------------------------------------

# store arrays cached by tuple identity; handles are immutable so the
# tuple object doubles as the cache key
_STORE_CACHE: dict = {}


def _store_arrays(store: tuple):
    hit = _STORE_CACHE.get(id(store))
    if hit is not None and hit[0] is store:
        return hit[1]
    by_length: dict = {}
    for rec in store:
        by_length.setdefault(len(rec), []).append(rec)
    grouped = {}
    for length, recs in by_length.items():
        recs = sorted(recs, key=lambda r: r.id)
        grouped[length] = (recs, np.asarray([r.values for r in recs]))
    _STORE_CACHE[id(store)] = (store, grouped)
    return grouped


def memorizing_match(store: Sequence[TimeSeriesRecord],
                     masked: MaskedSeries) -> TimeSeriesRecord:
    """Store record with minimal MAE against the observed entries.

    Only records of the query's length are comparable. Ties (including
    the fully-masked case, where every candidate has MAE 0) go to the
    lexicographically smallest id.
    """
    store = tuple(store)
    if not store:
        raise ConfigError("memorizing_match needs a non-empty store")
    grouped = _store_arrays(store)
    group = grouped.get(len(masked))
    if group is None:
        raise ConfigError(
            f"no store record has length {len(masked)} to match against"
        )
    recs, matrix = group
    obs_idx = np.asarray(masked.observed_indices(), dtype=np.intp)
    if obs_idx.size == 0:
        return recs[0]
    obs_vals = np.asarray([masked.observed[i] for i in obs_idx])
    maes = np.mean(np.abs(matrix[:, obs_idx] - obs_vals), axis=1)
    # rows are sorted by id, so the first minimum is the tie-break winner
    return recs[int(np.argmin(maes))]


def _impute_memorizing(handle: ImputerHandle, masked: MaskedSeries) -> tuple:
    match = memorizing_match(handle.training_store, masked)
    return tuple(
        match.values[i] if v is None else v
        for i, v in enumerate(masked.observed)
    )


def _impute_interpolating(masked: MaskedSeries) -> tuple:
    """Linear fill between the nearest observed neighbors.

    Boundary gaps extend the nearest observed value; each filled value is
    clamped into the closed interval of its bracketing observations. A
    fully masked series fills with zeros.
    """
    obs_idx = masked.observed_indices()
    if not obs_idx:
        return tuple(0.0 for _ in masked.observed)
    xp = np.asarray(obs_idx, dtype=np.float64)
    fp = np.asarray([masked.observed[i] for i in obs_idx])
    out = list(masked.observed)
    for i in masked.masked_indices():
        pos = int(np.searchsorted(xp, i))
        if pos == 0:
            out[i] = float(fp[0])
        elif pos == len(xp):
            out[i] = float(fp[-1])
        else:
            x0, x1 = xp[pos - 1], xp[pos]
            f0, f1 = fp[pos - 1], fp[pos]
            value = f0 + (f1 - f0) * ((i - x0) / (x1 - x0))
            lo, hi = (f0, f1) if f0 <= f1 else (f1, f0)
            out[i] = float(min(max(value, lo), hi))
    return tuple(out)


def _impute_seasonal_mean(handle: ImputerHandle, masked: MaskedSeries) -> tuple:
    """Fill each gap with the mean of observed values at the same phase."""
    period = handle.period if handle.period is not None else 48
    obs_idx = masked.observed_indices()
    if not obs_idx:
        return tuple(0.0 for _ in masked.observed)
    values = np.asarray([masked.observed[i] for i in obs_idx])
    phases = np.asarray(obs_idx) % period
    overall = float(values.mean())
    phase_means = {}
    for ph in np.unique(phases):
        phase_means[int(ph)] = float(values[phases == ph].mean())
    out = list(masked.observed)
    for i in masked.masked_indices():
        out[i] = phase_means.get(i % period, overall)
    return tuple(out)


# ---------------------------------------------------------------------------
# remote client
# ---------------------------------------------------------------------------

_CLIENT_LOCK = threading.Lock()
_CLIENTS: dict = {}


def _resolve_timeout_ms(handle: ImputerHandle) -> int:
    if handle.timeout_ms is not None:
        return handle.timeout_ms
    env = os.environ.get(TIMEOUT_ENV_VAR)
    if env:
        try:
            ms = int(env)
        except ValueError as exc:
            raise ConfigError(f"{TIMEOUT_ENV_VAR}={env!r} is not an integer") from exc
        if ms <= 0:
            raise ConfigError(f"{TIMEOUT_ENV_VAR} must be positive")
        return ms
    return DEFAULT_TIMEOUT_MS


def _client_for(endpoint: str, timeout_ms: int) -> httpx.Client:
    key = (endpoint, timeout_ms)
    with _CLIENT_LOCK:
        client = _CLIENTS.get(key)
        if client is None:
            client = httpx.Client(
                base_url=endpoint,
                timeout=timeout_ms / 1000.0,
                limits=httpx.Limits(max_connections=32, max_keepalive_connections=32),
            )
            _CLIENTS[key] = client
        return client


def close_clients() -> None:
    """Close pooled HTTP clients (test hygiene; safe to call anytime)."""
    with _CLIENT_LOCK:
        for client in _CLIENTS.values():
            client.close()
        _CLIENTS.clear()


def _impute_remote(handle: ImputerHandle, masked: MaskedSeries) -> tuple:
    body = {
        "values": list(masked.observed),
        "masks": [{"start": m.start, "width": m.width} for m in masked.masks],
    }
    client = _client_for(handle.endpoint, _resolve_timeout_ms(handle))
    try:
        response = client.post("/impute", json=body)
    except httpx.HTTPError as exc:
        raise TransportError(f"imputation request failed: {exc}") from exc
    if response.status_code != 200:
        raise TransportError(
            f"imputation endpoint returned {response.status_code}: "
            f"{response.text[:200]}"
        )
    try:
        payload = response.json()
    except ValueError as exc:
        raise TransportError("imputation response is not JSON") from exc
    imputed = payload.get("imputed") if isinstance(payload, dict) else None
    if not isinstance(imputed, list) or len(imputed) != len(masked):
        raise ModelOutputError(
            f"expected {len(masked)} imputed values, got "
            f"{len(imputed) if isinstance(imputed, list) else type(imputed).__name__}"
        )
    out = []
    for i, given in enumerate(masked.observed):
        if given is not None:
            # clamp to the observed value so losses reflect only the
            # model's reconstruction of masked content
            out.append(given)
            continue
        v = imputed[i]
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not isfinite(v):
            raise ModelOutputError(f"non-finite or non-numeric value at slot {i}: {v!r}")
        out.append(float(v))
    return tuple(out)


def impute(handle: ImputerHandle, masked: MaskedSeries) -> tuple:
    """Fill the masked slots of a series via the given model.

    The result agrees with the observed entries outside masks
    bit-identically (remote responses are overwritten there) and holds a
    finite real at every masked slot.
    """
    if handle.kind == "memorizing":
        return _impute_memorizing(handle, masked)
    if handle.kind == "interpolating":
        return _impute_interpolating(masked)
    if handle.kind == "seasonal_mean":
        return _impute_seasonal_mean(handle, masked)
    return _impute_remote(handle, masked)


# ---------------------------------------------------------------------------
# mock server
# ---------------------------------------------------------------------------


def _validate_request(payload) -> MaskedSeries:
    """Turn a request body into a MaskedSeries or raise ValueError."""
    if not isinstance(payload, dict):
        raise ValueError("body must be a JSON object")
    values = payload.get("values")
    masks = payload.get("masks")
    if not isinstance(values, list) or not values:
        raise ValueError("values must be a non-empty list")
    if not isinstance(masks, list):
        raise ValueError("masks must be a list")
    for v in values:
        if v is None:
            continue
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not isfinite(v):
            raise ValueError(f"values entries must be finite numbers or null, got {v!r}")
    specs = []
    for m in masks:
        if not isinstance(m, dict):
            raise ValueError("each mask must be an object")
        start = m.get("start")
        width = m.get("width")
        if not isinstance(start, int) or isinstance(start, bool):
            raise ValueError("mask start must be an integer")
        if not isinstance(width, int) or isinstance(width, bool):
            raise ValueError("mask width must be an integer")
        try:
            specs.append(MaskSpec(start=start, width=width))
        except MaskError as exc:
            raise ValueError(str(exc)) from exc
    try:
        return MaskedSeries(observed=tuple(values), masks=tuple(specs), source_id="wire")
    except MaskError as exc:
        # covers overlap, out-of-range, and null/mask disagreement
        raise ValueError(str(exc)) from exc


class _ImputeHandler(BaseHTTPRequestHandler):
    server_version = "imputeaudit"
    protocol_version = "HTTP/1.1"

    def _send_json(self, code: int, payload) -> None:
        body = json.dumps(payload).encode("utf-8")
        self.send_response(code)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, fmt, *args):
        pass

    def do_GET(self):
        if self.path != "/health":
            self._send_json(404, {"error": "unknown path"})
            return
        self._send_json(200, {
            "kind": self.server.handle.kind,
            "length": self.server.series_length,
        })

    def do_POST(self):
        if self.path != "/impute":
            self._send_json(404, {"error": "unknown path"})
            return
        try:
            length = int(self.headers.get("Content-Length", 0))
            payload = json.loads(self.rfile.read(length))
        except (ValueError, TypeError):
            self._send_json(400, {"error": "body is not valid JSON"})
            return
        try:
            masked = _validate_request(payload)
        except ValueError as exc:
            self._send_json(400, {"error": str(exc)})
            return
        try:
            filled = impute(self.server.handle, masked)
        except ConfigError as exc:
            self._send_json(400, {"error": str(exc)})
            return
        except Exception as exc:  # noqa: BLE001 - surface as a 500, not a hang
            self._send_json(500, {"error": f"imputation failed: {exc}"})
            return
        self._send_json(200, {"imputed": list(filled)})


class _Server(ThreadingHTTPServer):
    daemon_threads = True
    # the default backlog of 5 drops connections under concurrent load
    request_queue_size = 64


class ImputerService:
    """A running mock server; use as a context manager or call close()."""

    def __init__(self, handle: ImputerHandle, host: str, port: int,
                 series_length: Optional[int]):
        try:
            self._server = _Server((host, port), _ImputeHandler)
        except OSError as exc:
            raise StartupError(f"cannot bind {host}:{port}: {exc}") from exc
        self._server.handle = handle
        self._server.series_length = series_length
        self.host, self.port = self._server.server_address[:2]
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()

    @property
    def url(self) -> str:
        return f"http://{self.host}:{self.port}"

    def close(self) -> None:
        self._server.shutdown()
        self._server.server_close()
        self._thread.join(timeout=5)

    def __enter__(self) -> "ImputerService":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()


def serve_imputer(handle: ImputerHandle, bind_address: str = "127.0.0.1:0",
                  series_length: Optional[int] = None) -> ImputerService:
    """Expose an in-process imputer over the wire protocol.

    bind_address is host:port; port 0 picks a free ephemeral port (read it
    back from the returned service). series_length feeds /health when the
    handle has no training store to infer it from.
    """
    host, sep, port_text = bind_address.rpartition(":")
    if not sep or not host:
        raise StartupError(f"bind address must be host:port, got {bind_address!r}")
    try:
        port = int(port_text)
    except ValueError as exc:
        raise StartupError(f"bad port in {bind_address!r}") from exc
    if series_length is None and handle.training_store:
        lengths = {len(r) for r in handle.training_store}
        if len(lengths) == 1:
            series_length = lengths.pop()
    return ImputerService(handle, host, port, series_length)
