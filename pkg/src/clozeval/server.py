"""HTTP serve mode for the judge ranking task.

Serves the static judge UI bundle plus a small JSON API, and persists each
judge's submissions as one session file in the data directory. Shared state
(test, candidate lists) is immutable; writes go through a lock and an atomic
write-then-rename, so concurrent judges are safe.
"""

from __future__ import annotations

import json
import logging
import os
import re
import tempfile
import threading
from datetime import datetime, timezone
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Sequence
from urllib.parse import parse_qs, urlparse

from .cloze import ClozeTest, ResponseSheet
from .errors import PipelineError
from .ranking import RankingTable, collect_candidates, filter_gaps
from .validation import JudgeSession

log = logging.getLogger(__name__)

_JUDGE_ID_RE = re.compile(r"^[A-Za-z0-9._-]{1,64}$")

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "application/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".map": "application/json; charset=utf-8",
    ".json": "application/json; charset=utf-8",
    ".svg": "image/svg+xml",
    ".png": "image/png",
    ".ico": "image/x-icon",
}

_FALLBACK_PAGE = """<!doctype html>
<html><head><meta charset="utf-8"><title>cloze judge API</title></head>
<body><h1>Judge ranking API is running</h1>
<p>No UI bundle is configured. Point --static-dir at a built bundle, or use
the JSON API directly: GET /api/tasks?judge=ID, POST /api/rankings.</p>
</body></html>
"""


def build_tasks(
    test: ClozeTest, sheets: Sequence[ResponseSheet], min_alternatives: int = 10
) -> list[dict]:
    """Task list served to judges: one entry per gap surviving the filter."""
    selected = filter_gaps(test, sheets, min_alternatives)
    if not selected:
        raise PipelineError(
            f"no gaps have more than {min_alternatives} distinct answers; nothing to judge"
        )
    tasks = []
    for gap_id in selected:
        gap = test.gap(gap_id)
        tasks.append(
            {
                "gap_id": gap_id,
                "context": gap.context,
                "candidates": collect_candidates(test, sheets, gap_id),
            }
        )
    return tasks


class JudgeStore:
    """File-backed persistence: one JSON session file per judge."""

    def __init__(self, data_dir: str | Path, expected_gap_ids: Sequence[int]):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        probe = self.data_dir / ".write-probe"
        try:
            probe.write_text("", encoding="utf-8")
            probe.unlink()
        except OSError as exc:
            raise PipelineError(f"data dir {self.data_dir} is not writable: {exc}") from exc
        self.expected_gap_ids = list(expected_gap_ids)
        self._lock = threading.Lock()

    def _session_path(self, judge_id: str) -> Path:
        return self.data_dir / f"session_{judge_id}.json"

    def load_session(self, judge_id: str) -> JudgeSession | None:
        path = self._session_path(judge_id)
        if not path.exists():
            return None
        data = json.loads(path.read_text(encoding="utf-8"))
        return JudgeSession.from_dict(data, source=str(path))

    def submitted_gaps(self, judge_id: str) -> set[int]:
        session = self.load_session(judge_id)
        return set(session.rankings) if session else set()

    def save_submission(
        self, judge_id: str, gap_id: int, ordered_candidates: Sequence[str]
    ) -> JudgeSession:
        """Record one ranking; resubmission overwrites with a fresh timestamp."""
        entries = tuple(
            (candidate, float(position))
            for position, candidate in enumerate(ordered_candidates, start=1)
        )
        table = RankingTable(gap_id=gap_id, ranker_id=judge_id, entries=entries)
        table.validate()
        with self._lock:
            session = self.load_session(judge_id)
            rankings = dict(session.rankings) if session else {}
            submitted_at = dict(session.submitted_at) if session else {}
            rankings[gap_id] = table
            submitted_at[gap_id] = datetime.now(timezone.utc).isoformat()
            updated = JudgeSession(
                session_id=f"session_{judge_id}",
                judge_id=judge_id,
                rankings=rankings,
                submitted_at=submitted_at,
                complete=set(self.expected_gap_ids) <= set(rankings),
            )
            payload = json.dumps(updated.to_dict(), ensure_ascii=False, indent=2, sort_keys=True)
            fd, tmp_name = tempfile.mkstemp(
                dir=self.data_dir, prefix=".session_", suffix=".tmp"
            )
            try:
                with os.fdopen(fd, "w", encoding="utf-8") as fh:
                    fh.write(payload + "\n")
                os.replace(tmp_name, self._session_path(judge_id))
            except BaseException:
                if os.path.exists(tmp_name):
                    os.unlink(tmp_name)
                raise
        return updated


class _JudgeApiHandler(BaseHTTPRequestHandler):
    server: "JudgeServer"

    def log_message(self, fmt: str, *args) -> None:  # route through logging, not stderr
        log.debug("%s %s", self.address_string(), fmt % args)

    def _send_json(self, status: int, payload: dict | list) -> None:
        body = json.dumps(payload, ensure_ascii=False).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_error_json(self, status: int, message: str) -> None:
        self._send_json(status, {"error": message})

    def do_GET(self) -> None:
        parsed = urlparse(self.path)
        if parsed.path == "/api/health":
            self._send_json(200, {"status": "ok", "gaps": len(self.server.tasks)})
            return
        if parsed.path == "/api/tasks":
            query = parse_qs(parsed.query)
            judge_id = query.get("judge", [""])[0]
            submitted: set[int] = set()
            if judge_id:
                if not _JUDGE_ID_RE.match(judge_id):
                    self._send_error_json(400, f"invalid judge id {judge_id!r}")
                    return
                submitted = self.server.store.submitted_gaps(judge_id)
            payload = [
                {**task, "submitted": task["gap_id"] in submitted}
                for task in self.server.tasks
            ]
            self._send_json(200, payload)
            return
        self._serve_static(parsed.path)

    def do_POST(self) -> None:
        parsed = urlparse(self.path)
        if parsed.path != "/api/rankings":
            self._send_error_json(404, f"unknown endpoint {parsed.path}")
            return
        try:
            length = int(self.headers.get("Content-Length", "0"))
            raw = self.rfile.read(length)
            body = json.loads(raw.decode("utf-8"))
        except (ValueError, UnicodeDecodeError) as exc:
            self._send_error_json(400, f"invalid JSON body: {exc}")
            return
        if not isinstance(body, dict):
            self._send_error_json(400, "body must be a JSON object")
            return
        missing_keys = [k for k in ("judge_id", "gap_id", "ordered_candidates") if k not in body]
        if missing_keys:
            self._send_error_json(400, f"missing keys: {', '.join(missing_keys)}")
            return
        judge_id = body["judge_id"]
        if not isinstance(judge_id, str) or not _JUDGE_ID_RE.match(judge_id):
            self._send_error_json(400, f"invalid judge id {judge_id!r}")
            return
        try:
            gap_id = int(body["gap_id"])
        except (TypeError, ValueError):
            self._send_error_json(400, f"gap_id must be an integer, got {body['gap_id']!r}")
            return
        served = self.server.candidates_by_gap.get(gap_id)
        if served is None:
            self._send_error_json(400, f"unknown gap_id {gap_id}")
            return
        ordered = body["ordered_candidates"]
        if not isinstance(ordered, list) or not all(isinstance(c, str) for c in ordered):
            self._send_error_json(400, "ordered_candidates must be a list of strings")
            return
        if len(set(ordered)) != len(ordered):
            dupes = sorted({c for c in ordered if ordered.count(c) > 1})
            self._send_error_json(400, f"duplicate candidates: {', '.join(dupes)}")
            return
        missing = sorted(set(served) - set(ordered))
        if missing:
            self._send_error_json(400, f"missing candidate: {', '.join(missing)}")
            return
        extra = sorted(set(ordered) - set(served))
        if extra:
            self._send_error_json(400, f"unknown candidate: {', '.join(extra)}")
            return
        session = self.server.store.save_submission(judge_id, gap_id, ordered)
        self._send_json(
            200,
            {
                "status": "ok",
                "gap_id": gap_id,
                "submitted": len(session.rankings),
                "complete": session.complete,
            },
        )

    def _serve_static(self, path: str) -> None:
        static_dir = self.server.static_dir
        if static_dir is None:
            if path in ("/", "/index.html"):
                body = _FALLBACK_PAGE.encode("utf-8")
                self.send_response(200)
                self.send_header("Content-Type", "text/html; charset=utf-8")
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)
            else:
                self._send_error_json(404, f"no static bundle configured; unknown path {path}")
            return
        rel = path.lstrip("/") or "index.html"
        target = (static_dir / rel).resolve()
        if not str(target).startswith(str(static_dir.resolve())) or not target.is_file():
            self._send_error_json(404, f"not found: {path}")
            return
        body = target.read_bytes()
        self.send_response(200)
        self.send_header(
            "Content-Type", _CONTENT_TYPES.get(target.suffix, "application/octet-stream")
        )
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)


class JudgeServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(
        self,
        test: ClozeTest,
        sheets: Sequence[ResponseSheet],
        host: str,
        port: int,
        data_dir: str | Path,
        min_alternatives: int = 10,
        static_dir: str | Path | None = None,
    ):
        self.tasks = build_tasks(test, sheets, min_alternatives)
        self.candidates_by_gap = {t["gap_id"]: list(t["candidates"]) for t in self.tasks}
        self.store = JudgeStore(data_dir, expected_gap_ids=list(self.candidates_by_gap))
        self.static_dir = Path(static_dir) if static_dir is not None else None
        if self.static_dir is not None and not self.static_dir.is_dir():
            raise PipelineError(f"static dir not found: {self.static_dir}")
        try:
            super().__init__((host, port), _JudgeApiHandler)
        except OSError as exc:
            raise PipelineError(f"cannot bind {host}:{port}: {exc}") from exc


def create_server(
    test: ClozeTest,
    sheets: Sequence[ResponseSheet],
    port: int,
    data_dir: str | Path,
    host: str = "127.0.0.1",
    min_alternatives: int = 10,
    static_dir: str | Path | None = None,
) -> JudgeServer:
    return JudgeServer(
        test,
        sheets,
        host=host,
        port=port,
        data_dir=data_dir,
        min_alternatives=min_alternatives,
        static_dir=static_dir,
    )
