"""Localhost HTTP session hosting the human glyph-labeling loop.

One session serves one image's detected boxes. Each accepted label is
appended to the MRD/HRD store immediately, in submission order, so an
interrupted session keeps everything confirmed so far.
"""

from __future__ import annotations

import base64
import io
import json
import threading
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from PIL import Image

from .glyphseg import GlyphMatrix
from .misprint import ALPHABET, TrainingSet, add_sample
from .raster import GrayImage

FALLBACK_PAGE = (
    "<!DOCTYPE html><html><body><h1>printqc labeling session</h1>"
    "<p>The labeler UI bundle was not found; the JSON API is active "
    "under /session/*.</p></body></html>"
)


@dataclass(frozen=True)
class SessionItem:
    box_id: int  # 1-based CharBox id
    crop: GrayImage  # gray pixels shown to the labeler
    glyph: GlyphMatrix  # normalized matrix stored on acceptance


def _crop_base64(crop: GrayImage) -> str:
    buf = io.BytesIO()
    Image.fromarray(crop, mode="L").save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


class LabelingSession:
    """Serialized label/skip state over a fixed list of boxes."""

    def __init__(self, items: list[SessionItem], store: TrainingSet):
        if not items:
            raise ValueError("session needs at least one box")
        self._items = {item.box_id: item for item in items}
        self._order = [item.box_id for item in items]
        self._labeled: dict[int, str] = {}
        self._skipped: set[int] = set()
        self._lock = threading.Lock()
        self.store = store

    @property
    def done(self) -> bool:
        with self._lock:
            return len(self._labeled) + len(self._skipped) == len(self._order)

    def next_payload(self) -> dict | None:
        with self._lock:
            pending = [
                i for i in self._order if i not in self._labeled and i not in self._skipped
            ]
            if not pending:
                return None
            box_id = pending[0]
            return {
                "id": box_id,
                "total": len(self._order),
                "remaining": len(pending),
                "png_base64": _crop_base64(self._items[box_id].crop),
            }

    def label(self, box_id: int, char: str) -> tuple[int, dict]:
        with self._lock:
            if box_id not in self._items:
                return 404, {"error": "UnknownBox"}
            if box_id in self._labeled or box_id in self._skipped:
                return 409, {"error": "AlreadyLabeled"}
            if len(char) != 1 or char not in ALPHABET:
                return 400, {"error": "InvalidLabel"}
            self.store = add_sample(self.store, self._items[box_id].glyph, char)
            self._labeled[box_id] = char
            return 200, {"accepted": True}

    def skip(self, box_id: int) -> tuple[int, dict]:
        with self._lock:
            if box_id not in self._items:
                return 404, {"error": "UnknownBox"}
            if box_id in self._labeled or box_id in self._skipped:
                return 409, {"error": "AlreadyLabeled"}
            self._skipped.add(box_id)
            return 200, {"skipped": True}

    def progress(self) -> dict:
        with self._lock:
            labeled = len(self._labeled)
            skipped = len(self._skipped)
            return {
                "labeled": labeled,
                "skipped": skipped,
                "remaining": len(self._order) - labeled - skipped,
            }

    def counts(self) -> tuple[int, int]:
        with self._lock:
            return len(self._labeled), len(self._skipped)


class _SessionHandler(BaseHTTPRequestHandler):
    session: LabelingSession  # set by make_session_server
    ui_dir: Path | None

    def log_message(self, fmt, *args):  # keep the CLI quiet
        pass

    def _send_json(self, status: int, payload: dict) -> None:
        body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_asset(self, name: str, content_type: str) -> None:
        if self.ui_dir is not None and (self.ui_dir / name).is_file():
            body = (self.ui_dir / name).read_bytes()
        elif name == "index.html":
            body = FALLBACK_PAGE.encode("utf-8")
        else:
            self.send_error(404)
            return
        self.send_response(200)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self):
        if self.path == "/session/next":
            payload = self.session.next_payload()
            if payload is None:
                self.send_response(204)
                self.end_headers()
            else:
                self._send_json(200, payload)
        elif self.path == "/session/progress":
            self._send_json(200, self.session.progress())
        elif self.path in ("/", "/index.html"):
            self._send_asset("index.html", "text/html; charset=utf-8")
        elif self.path.endswith(".js") and "/" not in self.path[1:]:
            self._send_asset(self.path[1:], "application/javascript")
        else:
            self.send_error(404)

    def do_POST(self):
        length = int(self.headers.get("Content-Length") or 0)
        try:
            body = json.loads(self.rfile.read(length) or b"{}")
            box_id = int(body["id"])
        except (json.JSONDecodeError, KeyError, TypeError, ValueError):
            self._send_json(400, {"error": "BadRequest"})
            return
        if self.path == "/session/label":
            char = body.get("char")
            if not isinstance(char, str):
                self._send_json(400, {"error": "InvalidLabel"})
                return
            status, payload = self.session.label(box_id, char)
        elif self.path == "/session/skip":
            status, payload = self.session.skip(box_id)
        else:
            self.send_error(404)
            return
        self._send_json(status, payload)


def make_session_server(
    session: LabelingSession, port: int, ui_dir: Path | None = None
) -> ThreadingHTTPServer:
    """Bind the session API on localhost; raises OSError if the port is taken."""
    handler = type("Handler", (_SessionHandler,), {"session": session, "ui_dir": ui_dir})
    server = ThreadingHTTPServer(("127.0.0.1", port), handler)
    server.timeout = 0.2
    return server


def serve_until_done(
    server: ThreadingHTTPServer, session: LabelingSession, grace: float = 1.0
) -> None:
    """Handle requests until every box is labeled or skipped.

    After completion the server lingers for ``grace`` seconds of idle time
    so the client can still fetch the 204 / final progress and render its
    completion view.
    """
    while not session.done:
        server.handle_request()
    idle = False

    def handle_timeout() -> None:
        nonlocal idle
        idle = True

    server.handle_timeout = handle_timeout  # type: ignore[method-assign]
    server.timeout = grace
    while True:
        idle = False
        server.handle_request()
        if idle:
            break
    server.server_close()
