"""Tests for the wire-protocol conformance checks.

The positive half runs the checks against the package's own mock server,
which must pass by construction. The negative half stands up deliberately
broken servers and requires each violation class to be caught and named.
"""

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from imputeaudit import (
    check_protocol,
    check_round_trip,
    interpolating,
    memorizing,
    random_cases,
    seasonal_mean,
    serve_and_check,
)
from imputeaudit.dataset import TimeSeriesRecord, series_rng
from imputeaudit.errors import ConfigError
from imputeaudit.imputers import _validate_request


class TestRandomCases:
    def test_shape_and_masks(self):
        cases = random_cases(length=96, n_cases=50, seed=0)
        assert len(cases) == 50
        for case in cases:
            assert len(case) == 96
            assert 1 <= len(case.masks) <= 3
            stops = [(m.start, m.stop) for m in case.masks]
            for (s1, e1), (s2, e2) in zip(stops, stops[1:]):
                assert e1 <= s2
            assert case.observed[-1] is not None

    def test_deterministic(self):
        assert random_cases(seed=5) == random_cases(seed=5)
        assert random_cases(seed=5) != random_cases(seed=6)

    def test_validation(self):
        with pytest.raises(ConfigError):
            random_cases(length=8)
        with pytest.raises(ConfigError):
            random_cases(n_cases=0)


class TestRoundTrip:
    def test_interpolating(self):
        report = check_round_trip(interpolating(), n_cases=100, seed=0)
        assert report.ok, report.failures
        assert report.n_cases == 100
        assert "pass" in report.summary()

    def test_seasonal_mean(self):
        report = check_round_trip(seasonal_mean(period=24), n_cases=40)
        assert report.ok, report.failures

    def test_memorizing(self):
        rng = series_rng(0, "conformance-store")
        store = [TimeSeriesRecord(id=f"s{i}",
                                  values=tuple(float(v) for v in
                                               rng.normal(0.0, 3.0, 96)),
                                  origin="private") for i in range(3)]
        report = check_round_trip(memorizing(store), n_cases=40, length=96)
        assert report.ok, report.failures


class TestMockServerConformance:
    def test_mock_passes_protocol_check(self):
        report = serve_and_check(interpolating(), n_cases=30, seed=1)
        assert report.ok, report.failures
        assert report.n_cases == 30


class _RogueHandler(BaseHTTPRequestHandler):
    """Configurable misbehaving server for negative tests."""

    def _send(self, code, payload):
        body = json.dumps(payload).encode()
        self.send_response(code)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, fmt, *args):
        pass

    def do_GET(self):
        if self.server.behavior == "health500":
            self._send(500, {"error": "down"})
        else:
            self._send(200, {"kind": "rogue", "length": None})

    def do_POST(self):
        length = int(self.headers.get("Content-Length", 0))
        try:
            payload = json.loads(self.rfile.read(length))
            masked = _validate_request(payload)
        except ValueError as exc:
            self._send(400, {"error": str(exc)})
            return
        behavior = self.server.behavior
        t = len(masked)
        if behavior == "short":
            self._send(200, {"imputed": [0.0]})
        elif behavior == "nan":
            self._send(200, {"imputed": [float("nan")] * t})
        elif behavior == "counter":
            with self.server.lock:
                self.server.counter += 1
                value = float(self.server.counter)
            self._send(200, {"imputed": [value] * t})
        else:
            self._send(200, {"imputed": [0.0] * t})


class _RogueServer(ThreadingHTTPServer):
    daemon_threads = True


@pytest.fixture
def rogue():
    servers = []

    def start(behavior):
        server = _RogueServer(("127.0.0.1", 0), _RogueHandler)
        server.behavior = behavior
        server.lock = threading.Lock()
        server.counter = 0
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        servers.append((server, thread))
        host, port = server.server_address[:2]
        return f"http://{host}:{port}"

    yield start
    for server, thread in servers:
        server.shutdown()
        server.server_close()
        thread.join(timeout=5)


class TestProtocolViolations:
    def test_health_failure(self, rogue):
        report = check_protocol(rogue("health500"), n_cases=1)
        assert not report.ok
        assert any("/health" in f for f in report.failures)

    def test_wrong_length_reply(self, rogue):
        report = check_protocol(rogue("short"), n_cases=2)
        assert any("length" in f for f in report.failures)

    def test_nonfinite_reply(self, rogue):
        report = check_protocol(rogue("nan"), n_cases=2)
        assert any("finite" in f for f in report.failures)

    def test_echo_violation_is_optional(self, rogue):
        url = rogue("zeros")
        strict = check_protocol(url, n_cases=2)
        assert any("not echoed" in f for f in strict.failures)
        relaxed = check_protocol(url, n_cases=2, require_echo=False)
        assert relaxed.ok, relaxed.failures

    def test_unstable_concurrent_replies(self, rogue):
        report = check_protocol(rogue("counter"), n_cases=1,
                                require_echo=False)
        assert any("concurrent" in f for f in report.failures)

    def test_unreachable_endpoint(self):
        report = check_protocol("http://127.0.0.1:9", n_cases=1,
                                timeout_ms=2000)
        assert not report.ok
        assert "unreachable" in report.failures[0]
