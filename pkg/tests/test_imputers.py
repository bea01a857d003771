import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from imputeaudit.dataset import MaskSpec, TimeSeriesRecord, apply_mask
from imputeaudit.errors import (
    ConfigError,
    ModelOutputError,
    StartupError,
    TransportError,
)
from imputeaudit.imputers import (
    ImputerHandle,
    close_clients,
    impute,
    interpolating,
    memorizing,
    memorizing_match,
    remote,
    seasonal_mean,
    serve_imputer,
)
from imputeaudit.signal_math import dtw_distance


@pytest.fixture(autouse=True, scope="module")
def _cleanup_clients():
    yield
    close_clients()


def rec(values, id="a", origin="unknown"):
    return TimeSeriesRecord(id=id, values=tuple(values), origin=origin)


class RogueServer:
    """Minimal server returning a fixed canned response for /impute."""

    def __init__(self, status=200, body=b"{}", delay=0.0):
        outer = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, fmt, *args):
                pass

            def do_POST(self):
                length = int(self.headers.get("Content-Length", 0))
                self.rfile.read(length)
                if outer.delay:
                    time.sleep(outer.delay)
                self.send_response(outer.status)
                self.send_header("Content-Length", str(len(outer.body)))
                self.end_headers()
                self.wfile.write(outer.body)

        self.status = status
        self.body = body
        self.delay = delay
        self._server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self._server.daemon_threads = True
        self.port = self._server.server_address[1]
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()

    @property
    def url(self):
        return f"http://127.0.0.1:{self.port}"

    def close(self):
        self._server.shutdown()
        self._server.server_close()


class TestHandleValidation:
    def test_unknown_kind(self):
        with pytest.raises(ConfigError):
            ImputerHandle(kind="oracle")

    def test_remote_needs_endpoint(self):
        with pytest.raises(ConfigError):
            ImputerHandle(kind="remote")

    def test_memorizing_needs_store(self):
        with pytest.raises(ConfigError):
            ImputerHandle(kind="memorizing")
        with pytest.raises(ConfigError):
            ImputerHandle(kind="memorizing", training_store=())

    def test_bad_period(self):
        with pytest.raises(ConfigError):
            ImputerHandle(kind="seasonal_mean", period=0)


class TestInterpolating:
    def test_linear_fill_example(self):
        masked = apply_mask(rec([0.0, 9.0, 9.0, 3.0]), [MaskSpec(1, 2)])
        assert impute(interpolating(), masked) == (0.0, 1.0, 2.0, 3.0)

    def test_boundary_gaps_extend_nearest(self):
        masked = apply_mask(rec([7.0, 7.0, 2.0, 5.0, 5.0]),
                            [MaskSpec(0, 2), MaskSpec(3, 2)])
        assert impute(interpolating(), masked) == (2.0, 2.0, 2.0, 2.0, 2.0)

    def test_fully_masked_fills_zero(self):
        masked = apply_mask(rec([4.0, 4.0, 4.0]), [MaskSpec(0, 3)])
        assert impute(interpolating(), masked) == (0.0, 0.0, 0.0)

    def test_observed_entries_bit_identical(self):
        values = tuple(np.random.default_rng(0).normal(size=20))
        masked = apply_mask(rec(values), [MaskSpec(5, 4)])
        out = impute(interpolating(), masked)
        for i, v in enumerate(values):
            if i not in range(5, 9):
                assert out[i] == v

    @given(data=st.data())
    @settings(max_examples=60, deadline=None)
    def test_fill_within_endpoint_bounds(self, data):
        t = data.draw(st.integers(4, 24))
        values = data.draw(st.lists(st.floats(-1e6, 1e6), min_size=t, max_size=t))
        start = data.draw(st.integers(1, t - 3))
        width = data.draw(st.integers(1, t - start - 1))
        masked = apply_mask(rec(values), [MaskSpec(start, width)])
        out = impute(interpolating(), masked)
        lo = min(values[start - 1], values[start + width])
        hi = max(values[start - 1], values[start + width])
        for i in range(start, start + width):
            assert lo <= out[i] <= hi


class TestMemorizing:
    def test_self_match(self):
        store = (rec([1.0, 2.0, 3.0], id="m1"), rec([9.0, 9.0, 9.0], id="m2"))
        masked = apply_mask(store[0], [MaskSpec(1, 1)])
        assert memorizing_match(store, masked) is store[0]

    def test_nearest_by_mae(self):
        store = (rec([0.0, 0.0, 0.0], id="zeros"), rec([9.0, 9.0, 9.0], id="nines"))
        masked = apply_mask(rec([8.0, 0.0, 8.0]), [MaskSpec(1, 1)])
        assert memorizing_match(store, masked).id == "nines"

    def test_tie_breaks_to_smaller_id(self):
        store = (rec([2.0, 0.0], id="b"), rec([0.0, 2.0], id="a"))
        masked = apply_mask(rec([1.0, 1.0]), [MaskSpec(1, 1)])
        # both candidates are at MAE 1 on the single observed slot
        assert memorizing_match(store, masked).id == "a"

    def test_fully_masked_returns_smallest_id(self):
        store = (rec([5.0, 5.0], id="z"), rec([1.0, 1.0], id="a"))
        masked = apply_mask(rec([0.0, 0.0]), [MaskSpec(0, 2)])
        assert memorizing_match(store, masked).id == "a"

    def test_no_matching_length(self):
        store = (rec([1.0, 2.0, 3.0], id="m"),)
        masked = apply_mask(rec([1.0, 2.0]), [MaskSpec(0, 1)])
        with pytest.raises(ConfigError):
            memorizing_match(store, masked)

    def test_empty_store(self):
        masked = apply_mask(rec([1.0, 2.0]), [MaskSpec(0, 1)])
        with pytest.raises(ConfigError):
            memorizing_match((), masked)

    def test_member_replay_is_exact(self):
        rng = np.random.default_rng(3)
        store = tuple(
            rec(rng.normal(size=30), id=f"m{i}") for i in range(5)
        )
        member = store[2]
        masked = apply_mask(member, [MaskSpec(10, 8)])
        out = impute(memorizing(store), masked)
        assert out == member.values
        assert dtw_distance(out, member.values) == 0.0

    def test_nonmember_fill_comes_from_best_match(self):
        store = (rec([0.0, 0.0, 0.0, 0.0], id="low"), rec([9.0, 9.0, 9.0, 9.0], id="high"))
        query = rec([8.5, 1.0, 8.5, 8.5])
        masked = apply_mask(query, [MaskSpec(1, 1)])
        out = impute(memorizing(store), masked)
        assert out == (8.5, 9.0, 8.5, 8.5)


class TestSeasonalMean:
    def test_two_periodic_example(self):
        masked = apply_mask(rec([5.0, 1.0, 5.0, 1.0, 5.0, 0.0]), [MaskSpec(5, 1)])
        out = impute(seasonal_mean(period=2), masked)
        assert out[5] == 1.0

    def test_unseen_phase_falls_back_to_overall_mean(self):
        masked = apply_mask(rec([2.0, 4.0, 6.0, 9.0]), [MaskSpec(3, 1)])
        out = impute(seasonal_mean(period=4), masked)
        assert out[3] == pytest.approx(4.0)

    def test_default_period(self):
        assert seasonal_mean().period == 48

    def test_fully_masked_fills_zero(self):
        masked = apply_mask(rec([1.0, 1.0]), [MaskSpec(0, 2)])
        assert impute(seasonal_mean(period=2), masked) == (0.0, 0.0)


class TestMockServerRoundTrip:
    def test_remote_equals_in_process(self):
        rng = np.random.default_rng(17)
        store = tuple(rec(rng.normal(size=24), id=f"m{i}") for i in range(4))
        handle = memorizing(store)
        with serve_imputer(handle) as service:
            rh = remote(service.url)
            for case in range(10):
                crng = np.random.default_rng(100 + case)
                record = rec(crng.normal(size=24), id=f"q{case}")
                start = int(crng.integers(0, 17))
                masked = apply_mask(record, [MaskSpec(start, 8)])
                assert impute(rh, masked) == impute(handle, masked)

    def test_health_endpoint(self):
        import httpx

        store = (rec([1.0] * 12, id="m"),)
        with serve_imputer(memorizing(store)) as service:
            payload = httpx.get(f"{service.url}/health").json()
            assert payload == {"kind": "memorizing", "length": 12}
        with serve_imputer(interpolating(), series_length=96) as service:
            payload = httpx.get(f"{service.url}/health").json()
            assert payload == {"kind": "interpolating", "length": 96}

    def test_all_observed_echoes_input(self):
        import httpx

        with serve_imputer(interpolating()) as service:
            body = {"values": [1.5, 2.5, 3.5], "masks": []}
            out = httpx.post(f"{service.url}/impute", json=body).json()
            assert out == {"imputed": [1.5, 2.5, 3.5]}

    def test_malformed_requests_get_400(self):
        import httpx

        with serve_imputer(interpolating()) as service:
            url = f"{service.url}/impute"
            # null without a covering mask
            r = httpx.post(url, json={"values": [1.0, None, 3.0], "masks": []})
            assert r.status_code == 400
            # mask without a null
            r = httpx.post(url, json={"values": [1.0, 2.0, 3.0],
                                      "masks": [{"start": 1, "width": 1}]})
            assert r.status_code == 400
            # overlapping masks
            r = httpx.post(url, json={"values": [1.0, None, None, 4.0],
                                      "masks": [{"start": 1, "width": 2},
                                                {"start": 2, "width": 1}]})
            assert r.status_code == 400
            # mask out of range
            r = httpx.post(url, json={"values": [1.0, None], "masks": [{"start": 1, "width": 5}]})
            assert r.status_code == 400
            # non-numeric value
            r = httpx.post(url, json={"values": [1.0, "x"], "masks": []})
            assert r.status_code == 400
            # body not JSON
            r = httpx.post(url, content=b"not json",
                           headers={"Content-Type": "application/json"})
            assert r.status_code == 400
            # wrong shape
            r = httpx.post(url, json=[1, 2, 3])
            assert r.status_code == 400

    def test_unknown_path_404(self):
        import httpx

        with serve_imputer(interpolating()) as service:
            assert httpx.get(f"{service.url}/nope").status_code == 404
            assert httpx.post(f"{service.url}/nope", json={}).status_code == 404

    def test_concurrent_requests_match_serial(self):
        rng = np.random.default_rng(23)
        store = tuple(rec(rng.normal(size=20), id=f"m{i}") for i in range(3))
        handle = memorizing(store)
        cases = []
        for i in range(24):
            crng = np.random.default_rng(700 + i)
            record = rec(crng.normal(size=20), id=f"q{i}")
            cases.append(apply_mask(record, [MaskSpec(int(crng.integers(0, 13)), 6)]))
        serial = [impute(handle, m) for m in cases]
        with serve_imputer(handle) as service:
            rh = remote(service.url)
            results = [None] * len(cases)

            def work(k):
                results[k] = impute(rh, cases[k])

            threads = [threading.Thread(target=work, args=(k,)) for k in range(len(cases))]
            for t in threads:
                t.start()
            for t in threads:
                t.join()
        assert results == serial

    def test_bad_bind_address(self):
        with pytest.raises(StartupError):
            serve_imputer(interpolating(), bind_address="no-port")

    def test_port_conflict_raises_startup_error(self):
        with serve_imputer(interpolating()) as service:
            with pytest.raises(StartupError):
                serve_imputer(interpolating(), bind_address=f"127.0.0.1:{service.port}")


class TestRemoteClientErrors:
    def make_masked(self):
        return apply_mask(rec([1.0, 2.0, 3.0, 4.0]), [MaskSpec(1, 2)])

    def test_connection_refused(self):
        rh = remote("http://127.0.0.1:9", timeout_ms=500)
        with pytest.raises(TransportError):
            impute(rh, self.make_masked())

    def test_timeout(self):
        server = RogueServer(body=b'{"imputed": [1.0, 2.0, 3.0, 4.0]}', delay=1.0)
        try:
            rh = remote(server.url, timeout_ms=100)
            with pytest.raises(TransportError):
                impute(rh, self.make_masked())
        finally:
            server.close()

    def test_http_error_status(self):
        server = RogueServer(status=500, body=b'{"error":"boom"}')
        try:
            with pytest.raises(TransportError):
                impute(remote(server.url), self.make_masked())
        finally:
            server.close()

    def test_non_json_response(self):
        server = RogueServer(body=b"definitely not json")
        try:
            with pytest.raises(TransportError):
                impute(remote(server.url), self.make_masked())
        finally:
            server.close()

    def test_wrong_length_response(self):
        server = RogueServer(body=b'{"imputed": [1.0, 2.0]}')
        try:
            with pytest.raises(ModelOutputError):
                impute(remote(server.url), self.make_masked())
        finally:
            server.close()

    def test_nan_in_response(self):
        server = RogueServer(body=b'{"imputed": [1.0, NaN, 3.0, 4.0]}')
        try:
            with pytest.raises(ModelOutputError):
                impute(remote(server.url), self.make_masked())
        finally:
            server.close()

    def test_null_at_masked_slot_rejected(self):
        server = RogueServer(body=b'{"imputed": [1.0, null, 3.0, 4.0]}')
        try:
            with pytest.raises(ModelOutputError):
                impute(remote(server.url), self.make_masked())
        finally:
            server.close()

    def test_observed_slots_clamped(self):
        # a sloppy server rewrites observed entries; the client restores them
        server = RogueServer(body=b'{"imputed": [99.0, 8.0, 9.0, 99.0]}')
        try:
            out = impute(remote(server.url), self.make_masked())
            assert out == (1.0, 8.0, 9.0, 4.0)
        finally:
            server.close()
