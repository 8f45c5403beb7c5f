"""Secondary acceptance: scripted labeling session against the real UI bundle.

The browser-level keypress/rendering behavior is covered by the vitest
suite under frontend/test; this exercises the HTTP contract end to end
with the session server hosting the built single-page asset.
"""

from __future__ import annotations

import json
import socket
import threading
import time
import urllib.request
from pathlib import Path

import pytest

from printqc import cli, misprint

UI_DIST = Path(__file__).resolve().parent.parent / "frontend" / "dist"
LINES = ("ADFGHKMNOPQR", "SUWZ1235689")


def free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def api(port: int, path: str, payload: dict | None = None):
    url = f"http://127.0.0.1:{port}{path}"
    if payload is None:
        req = urllib.request.Request(url)
    else:
        req = urllib.request.Request(
            url, data=json.dumps(payload).encode(), headers={"Content-Type": "application/json"}
        )
    with urllib.request.urlopen(req) as resp:
        body = resp.read()
        return resp.status, json.loads(body) if body else None


@pytest.mark.skipif(not (UI_DIST / "index.html").exists(), reason="frontend bundle not built")
def test_labeling_session_with_ui_bundle(tmp_path):
    spec = {"lines": list(LINES), "seed": 7}
    (tmp_path / "spec.json").write_text(json.dumps(spec))
    assert cli.main(["synth", str(tmp_path / "spec.json"), "--out", str(tmp_path)]) == 0
    truth = json.loads((tmp_path / "truth.json").read_text())
    assert len(truth) == 23

    store = tmp_path / "store"
    port = free_port()
    result: dict = {}

    def run():
        result["rc"] = cli.main(
            [
                "train",
                str(tmp_path / "label.png"),
                "--store",
                str(store),
                "--port",
                str(port),
                "--ui",
                str(UI_DIST),
            ]
        )

    thread = threading.Thread(target=run, daemon=True)
    thread.start()

    for _ in range(100):  # wait for the port to come up
        try:
            status, _ = api(port, "/session/progress")
            break
        except OSError:
            time.sleep(0.05)

    # the session server hands out the built single-page client
    with urllib.request.urlopen(f"http://127.0.0.1:{port}/") as resp:
        page = resp.read().decode()
    assert "printqc labeler" in page and "main.js" in page
    with urllib.request.urlopen(f"http://127.0.0.1:{port}/main.js") as resp:
        assert b"LabelerApp" in resp.read()

    submitted: list[str] = []
    skipped = 0
    while True:
        status, doc = api(port, "/session/next")
        if status != 200 or doc is None:
            break
        box_id = doc["id"]
        assert doc["png_base64"]
        if skipped < 2:
            api(port, "/session/skip", {"id": box_id})
            skipped += 1
        else:
            char = truth[box_id - 1]["char"]
            status, ack = api(port, "/session/label", {"id": box_id, "char": char})
            assert status == 200 and ack == {"accepted": True}
            submitted.append(char)

    thread.join(timeout=10)
    assert result.get("rc") == 0

    ts = misprint.load_training_set(store)
    assert len(ts) == 21
    assert skipped == 2
    hrd_lines = (store / misprint.HRD_FILENAME).read_text(encoding="utf-8").splitlines()
    assert hrd_lines == submitted
    print("ACCEPTANCE labeling session via HTTP API + UI bundle: PASS")
