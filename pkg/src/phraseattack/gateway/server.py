"""Serve a MockBackends instance over the wire protocol (stdlib HTTP).

Used by the ``mock-serve`` CLI subcommand and by integration tests that
need real sockets.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from ..errors import UnknownLabel
from .mocks import MockBackends


def _make_handler(backends: MockBackends):
    class Handler(BaseHTTPRequestHandler):
        # Quiet by default; stderr noise breaks byte-identical test capture.
        def log_message(self, fmt, *args):
            pass

        def _send(self, status: int, payload: dict) -> None:
            body = json.dumps(payload, sort_keys=True).encode()
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def do_GET(self) -> None:
            if self.path == "/v1/health":
                self._send(200, {"status": "ok"})
            else:
                self._send(404, {"code": "not_found", "message": self.path})

        def do_POST(self) -> None:
            length = int(self.headers.get("Content-Length", "0"))
            try:
                payload = json.loads(self.rfile.read(length) or b"{}")
                response = backends.handle(self.path, payload)
            except UnknownLabel as exc:
                self._send(422, {"code": "unknown_label", "message": str(exc)})
                return
            except (KeyError, TypeError, ValueError) as exc:
                self._send(400, {"code": "bad_request", "message": str(exc)})
                return
            except Exception as exc:  # pragma: no cover - defensive
                self._send(500, {"code": "internal", "message": str(exc)})
                return
            self._send(200, response)

    return Handler


class MockServer:
    """A ThreadingHTTPServer around MockBackends, startable in-process."""

    def __init__(self, backends: MockBackends, host: str = "127.0.0.1", port: int = 0):
        self._server = ThreadingHTTPServer((host, port), _make_handler(backends))
        self._thread: threading.Thread | None = None

    @property
    def url(self) -> str:
        host, port = self._server.server_address[:2]
        return f"http://{host}:{port}"

    def start(self) -> "MockServer":
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        self._server.shutdown()
        self._server.server_close()
        if self._thread:
            self._thread.join(timeout=5)

    def serve_forever(self) -> None:
        self._server.serve_forever()
