"""Wire-protocol conformance checks for imputation servers.

Two entry points. check_protocol probes a live endpoint for contract
compliance: a sane /health body, well-formed and finite /impute replies
on random masked queries, 400 on malformed requests, and identical
replies under concurrent repetition of one query. check_round_trip goes
further for in-process handles: it serves the handle through the mock
server and requires the remote path to reproduce local imputation
bit-exactly.

Both return a ProtocolReport listing every violation, so a failing
server can be diagnosed from a single run. The checks only use the
public wire contract, which makes them reusable against any third-party
implementation of the protocol.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import isfinite
from typing import List, Optional, Tuple

import httpx

from .dataset import MaskSpec, MaskedSeries, TimeSeriesRecord, apply_mask, \
    series_rng
from .errors import ConfigError, ImputeAuditError
from .imputers import ImputerHandle, _resolve_timeout_ms, impute, remote, \
    serve_imputer

MIN_CASE_LENGTH = 16
DEFAULT_CASE_LENGTH = 96


@dataclass(frozen=True)
class ProtocolReport:
    """Outcome of a conformance run against one endpoint."""

    endpoint: str
    n_cases: int
    failures: Tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.failures

    def summary(self) -> str:
        state = "pass" if self.ok else f"{len(self.failures)} failure(s)"
        return f"{self.endpoint}: {self.n_cases} cases, {state}"


def random_cases(length: int = DEFAULT_CASE_LENGTH, n_cases: int = 100,
                 seed: int = 0) -> List[MaskedSeries]:
    """Valid random queries: varied scales, 1 to 3 disjoint masks each."""
    if length < MIN_CASE_LENGTH:
        raise ConfigError(
            f"case length must be at least {MIN_CASE_LENGTH}, got {length}")
    if n_cases < 1:
        raise ConfigError("n_cases must be positive")
    cases = []
    for i in range(n_cases):
        rng = series_rng(seed, f"conformance:{i}")
        scale = float(rng.uniform(0.5, 20.0))
        values = tuple(float(v) for v in scale * rng.normal(0.0, 1.0, length))
        record = TimeSeriesRecord(id=f"case{i:03d}", values=values,
                                  origin="test")
        masks = []
        cursor = int(rng.integers(0, 5))
        for _ in range(int(rng.integers(1, 4))):
            width = int(rng.integers(1, 9))
            # keep the final point observed so every case has context
            # on both sides available to the server
            if cursor + width > length - 1:
                break
            masks.append(MaskSpec(start=cursor, width=width))
            cursor += width + int(rng.integers(1, 7))
        cases.append(apply_mask(record, masks))
    return cases


def _request_body(case: MaskedSeries) -> dict:
    return {
        "values": [None if v is None else v for v in case.observed],
        "masks": [{"start": m.start, "width": m.width} for m in case.masks],
    }


def _check_reply(reply: httpx.Response, case: MaskedSeries,
                 label: str, failures: List[str]) -> Optional[list]:
    if reply.status_code != 200:
        failures.append(f"{label}: expected 200, got {reply.status_code}")
        return None
    try:
        payload = reply.json()
    except ValueError:
        failures.append(f"{label}: response body is not JSON")
        return None
    imputed = payload.get("imputed") if isinstance(payload, dict) else None
    if not isinstance(imputed, list):
        failures.append(f"{label}: response lacks an 'imputed' list")
        return None
    if len(imputed) != len(case):
        failures.append(f"{label}: imputed length {len(imputed)} "
                        f"!= series length {len(case)}")
        return None
    for t, v in enumerate(imputed):
        if isinstance(v, bool) or not isinstance(v, (int, float)) \
                or not isfinite(v):
            failures.append(f"{label}: imputed[{t}] is not a finite "
                            f"number: {v!r}")
            return None
    return imputed


_MALFORMED_PROBES = (
    ("non-JSON body", b"this is not json"),
    ("missing masks", json.dumps({"values": [1.0, 2.0, 3.0]}).encode()),
    ("null outside any mask",
     json.dumps({"values": [1.0, None, 3.0], "masks": []}).encode()),
    ("overlapping masks",
     json.dumps({"values": [None, None, None, 4.0],
                 "masks": [{"start": 0, "width": 2},
                           {"start": 1, "width": 2}]}).encode()),
)


def check_protocol(endpoint: str, *, n_cases: int = 100, seed: int = 0,
                   length: Optional[int] = None,
                   timeout_ms: Optional[int] = None,
                   concurrency: int = 16,
                   require_echo: bool = True) -> ProtocolReport:
    """Probe a live endpoint for wire-contract compliance.

    length defaults to the value advertised by /health when present.
    Model quality is out of scope: replies only need the right shape,
    finite values, and stability under concurrent repetition. A server
    is expected to echo observed values untouched, so the two transports
    stay indistinguishable to callers; pass require_echo=False to audit
    a server that reconstructs observed slots as well.
    """
    failures: List[str] = []
    timeout = _resolve_timeout_ms(remote(endpoint, timeout_ms)) / 1000.0
    with httpx.Client(base_url=endpoint, timeout=timeout) as client:
        try:
            health = client.get("/health")
        except httpx.HTTPError as exc:
            return ProtocolReport(endpoint=endpoint, n_cases=0,
                                  failures=(f"/health unreachable: {exc}",))
        if health.status_code != 200:
            failures.append(f"/health: expected 200, got "
                            f"{health.status_code}")
            body = {}
        else:
            try:
                body = health.json()
            except ValueError:
                failures.append("/health: response body is not JSON")
                body = {}
        if not isinstance(body, dict) or not isinstance(body.get("kind"),
                                                        str):
            failures.append("/health: missing string field 'kind'")
        advertised = body.get("length") if isinstance(body, dict) else None
        if advertised is not None and (isinstance(advertised, bool)
                                       or not isinstance(advertised, int)
                                       or advertised < 2):
            failures.append(f"/health: bad length {advertised!r}")
            advertised = None
        case_length = length if length is not None else (
            advertised if advertised is not None
            and advertised >= MIN_CASE_LENGTH else DEFAULT_CASE_LENGTH)

        cases = random_cases(case_length, n_cases, seed)
        for i, case in enumerate(cases):
            try:
                reply = client.post("/impute", json=_request_body(case))
            except httpx.HTTPError as exc:
                failures.append(f"case {i}: transport error: {exc}")
                continue
            imputed = _check_reply(reply, case, f"case {i}", failures)
            if imputed is None or not require_echo:
                continue
            for t in case.observed_indices():
                if imputed[t] != case.observed[t]:
                    failures.append(
                        f"case {i}: observed value at {t} not echoed: "
                        f"sent {case.observed[t]!r}, got {imputed[t]!r}")
                    break

        for name, raw in _MALFORMED_PROBES:
            try:
                reply = client.post(
                    "/impute", content=raw,
                    headers={"Content-Type": "application/json"})
            except httpx.HTTPError as exc:
                failures.append(f"malformed probe ({name}): transport "
                                f"error: {exc}")
                continue
            if reply.status_code != 400:
                failures.append(f"malformed probe ({name}): expected 400, "
                                f"got {reply.status_code}")

        if concurrency > 1 and cases:
            probe = _request_body(cases[0])

            def _one(_):
                return client.post("/impute", json=probe).content

            with ThreadPoolExecutor(max_workers=concurrency) as pool:
                replies = list(pool.map(_one, range(concurrency)))
            if len(set(replies)) != 1:
                failures.append(
                    f"concurrent repetition: {len(set(replies))} distinct "
                    f"replies to one query across {concurrency} requests")
    return ProtocolReport(endpoint=endpoint, n_cases=n_cases,
                          failures=tuple(failures))


def check_round_trip(handle: ImputerHandle, *, n_cases: int = 100,
                     seed: int = 0,
                     length: int = DEFAULT_CASE_LENGTH) -> ProtocolReport:
    """Serve a handle through the mock server and require the remote
    path to reproduce in-process imputation bit-exactly."""
    cases = random_cases(length, n_cases, seed)
    failures: List[str] = []
    with serve_imputer(handle, series_length=length) as service:
        client = remote(service.url)
        for i, case in enumerate(cases):
            try:
                local = impute(handle, case)
                over_wire = impute(client, case)
            except ImputeAuditError as exc:
                failures.append(f"case {i}: imputation failed: {exc}")
                continue
            if over_wire != local:
                diffs = sum(1 for a, b in zip(local, over_wire) if a != b)
                failures.append(f"case {i}: {diffs} position(s) differ "
                                f"between local and remote imputation")
        return ProtocolReport(endpoint=service.url, n_cases=n_cases,
                              failures=tuple(failures))


def serve_and_check(handle: ImputerHandle, *, n_cases: int = 100,
                    seed: int = 0,
                    length: int = DEFAULT_CASE_LENGTH) -> ProtocolReport:
    """check_protocol against a temporarily served in-process handle."""
    with serve_imputer(handle, series_length=length) as service:
        return check_protocol(service.url, n_cases=n_cases, seed=seed,
                              length=length)
