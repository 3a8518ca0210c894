"""Minimal threaded HTTP plumbing shared by the evaluator and the recommenders.

A Router maps (method, path pattern) to handler callables; AppServer runs a
router on a ThreadingHTTPServer. Response bodies may be byte strings or
iterators of byte chunks; iterators are sent with chunked transfer encoding
so large payloads (training sets) stream without being materialized.
"""

from __future__ import annotations

import json
import logging
import re
import threading
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Callable, Iterator
from urllib.parse import parse_qs, urlsplit

logger = logging.getLogger(__name__)


class BadRequest(Exception):
    """Raised by handlers to produce a 400 response with a detail message."""


@dataclass
class HttpRequest:
    method: str
    path: str
    query: dict[str, str]
    headers: dict[str, str]
    body: bytes

    def json(self):
        try:
            return json.loads(self.body.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise BadRequest(f"request body is not valid JSON: {exc}") from exc


@dataclass
class HttpResponse:
    status: int = 200
    body: bytes | Iterator[bytes] | None = None
    content_type: str = "application/json"
    headers: dict[str, str] = field(default_factory=dict)


def json_response(payload, status: int = 200) -> HttpResponse:
    return HttpResponse(
        status=status,
        body=json.dumps(payload).encode("utf-8"),
        content_type="application/json",
    )


Handler = Callable[..., HttpResponse]


class Router:
    """Dispatch requests to handlers registered with `{name}` path patterns."""

    def __init__(self) -> None:
        self._routes: list[tuple[str, re.Pattern[str], Handler]] = []
        self.fallback: Handler | None = None

    def add(self, method: str, pattern: str, handler: Handler) -> None:
        regex = re.sub(r"\{(\w+)\}", r"(?P<\1>[^/]+)", pattern)
        self._routes.append((method.upper(), re.compile(f"^{regex}$"), handler))

    def dispatch(self, request: HttpRequest) -> HttpResponse:
        for method, regex, handler in self._routes:
            if method != request.method:
                continue
            match = regex.match(request.path)
            if match:
                try:
                    return handler(request, **match.groupdict())
                except BadRequest as exc:
                    return json_response({"detail": str(exc)}, status=400)
                except Exception:
                    logger.exception(
                        "handler error for %s %s", request.method, request.path
                    )
                    return json_response({"detail": "internal server error"}, status=500)
        if self.fallback is not None:
            try:
                return self.fallback(request)
            except Exception:
                logger.exception("fallback handler error for %s", request.path)
                return json_response({"detail": "internal server error"}, status=500)
        return json_response({"detail": f"no such resource: {request.path}"}, status=404)


class _RequestHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    router: Router  # set on the subclass built in AppServer

    def log_message(self, fmt, *args):  # silence default stderr chatter
        logger.debug("%s %s", self.address_string(), fmt % args)

    def _read_body(self) -> bytes:
        length = int(self.headers.get("Content-Length") or 0)
        return self.rfile.read(length) if length else b""

    def _handle(self) -> None:
        parts = urlsplit(self.path)
        query = {k: v[0] for k, v in parse_qs(parts.query).items()}
        request = HttpRequest(
            method=self.command,
            path=parts.path,
            query=query,
            headers=dict(self.headers.items()),
            body=self._read_body(),
        )
        response = self.router.dispatch(request)
        try:
            self._write(response)
        except (BrokenPipeError, ConnectionResetError):
            logger.debug("client dropped connection during %s %s", self.command, self.path)

    def _write(self, response: HttpResponse) -> None:
        self.send_response(response.status)
        for name, value in response.headers.items():
            self.send_header(name, value)
        body = response.body
        if body is None:
            if response.status != 204:
                self.send_header("Content-Length", "0")
            self.end_headers()
            return
        if isinstance(body, bytes):
            self.send_header("Content-Type", response.content_type)
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)
            return
        # Iterator body: stream with chunked framing, constant memory.
        self.send_header("Content-Type", response.content_type)
        self.send_header("Transfer-Encoding", "chunked")
        self.end_headers()
        for chunk in body:
            if not chunk:
                continue
            self.wfile.write(f"{len(chunk):x}\r\n".encode("ascii"))
            self.wfile.write(chunk)
            self.wfile.write(b"\r\n")
        self.wfile.write(b"0\r\n\r\n")

    do_GET = _handle
    do_POST = _handle
    do_DELETE = _handle
    do_PUT = _handle


class AppServer:
    """A router running on a background ThreadingHTTPServer."""

    def __init__(self, router: Router, host: str = "127.0.0.1", port: int = 0):
        handler_cls = type("BoundHandler", (_RequestHandler,), {"router": router})
        self._server = ThreadingHTTPServer((host, port), handler_cls)
        self._server.daemon_threads = True
        self._thread: threading.Thread | None = None
        self.host = host

    @property
    def port(self) -> int:
        return self._server.server_address[1]

    @property
    def base_uri(self) -> str:
        host = "127.0.0.1" if self.host in ("0.0.0.0", "::") else self.host
        return f"http://{host}:{self.port}"

    def start(self) -> "AppServer":
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()
        return self

    def serve_forever(self) -> None:
        self._server.serve_forever()

    def stop(self) -> None:
        self._server.shutdown()
        self._server.server_close()
        if self._thread:
            self._thread.join(timeout=5)
            self._thread = None
