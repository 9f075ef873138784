import json
import os
import threading

import pytest
import requests

from clozeval import (
    PipelineError,
    create_server,
    load_judge_sessions,
    run_validation,
)

from conftest import FIXTURES


@pytest.fixture()
def server(fixture_test, fixture_sheets, tmp_path):
    srv = create_server(fixture_test, fixture_sheets, port=0, data_dir=tmp_path / "data")
    thread = threading.Thread(target=srv.serve_forever, daemon=True)
    thread.start()
    base = f"http://127.0.0.1:{srv.server_address[1]}"
    try:
        yield srv, base, tmp_path / "data"
    finally:
        srv.shutdown()
        srv.server_close()
        thread.join(timeout=5)


class TestApi:
    def test_health(self, server):
        _, base, _ = server
        resp = requests.get(f"{base}/api/health", timeout=5)
        assert resp.status_code == 200
        assert resp.json()["status"] == "ok"
        assert resp.json()["gaps"] == 19

    def test_tasks_schema(self, server):
        _, base, _ = server
        resp = requests.get(f"{base}/api/tasks", params={"judge": "J1"}, timeout=5)
        assert resp.status_code == 200
        tasks = resp.json()
        assert len(tasks) == 19
        for task in tasks:
            assert set(task) == {"gap_id", "context", "candidates", "submitted"}
            assert "_____" in task["context"]
            assert len(task["candidates"]) > 10
            assert task["submitted"] is False

    def test_submit_roundtrip_and_completion_tracking(self, server):
        srv, base, data_dir = server
        tasks = requests.get(f"{base}/api/tasks", params={"judge": "J9"}, timeout=5).json()
        task = tasks[0]
        ordered = sorted(task["candidates"])
        resp = requests.post(
            f"{base}/api/rankings",
            json={"judge_id": "J9", "gap_id": task["gap_id"], "ordered_candidates": ordered},
            timeout=5,
        )
        assert resp.status_code == 200
        body = resp.json()
        assert body["status"] == "ok" and body["complete"] is False

        session_file = data_dir / "session_J9.json"
        assert session_file.exists()
        data = json.loads(session_file.read_text(encoding="utf-8"))
        ranked = data["rankings"][str(task["gap_id"])]
        assert [e["candidate"] for e in ranked["entries"]] == ordered
        assert [e["rank"] for e in ranked["entries"]] == [float(i + 1) for i in range(len(ordered))]

        tasks = requests.get(f"{base}/api/tasks", params={"judge": "J9"}, timeout=5).json()
        state = {t["gap_id"]: t["submitted"] for t in tasks}
        assert state[task["gap_id"]] is True
        assert sum(state.values()) == 1

    def test_resubmission_overwrites(self, server):
        _, base, data_dir = server
        tasks = requests.get(f"{base}/api/tasks", timeout=5).json()
        task = tasks[0]
        first = sorted(task["candidates"])
        second = list(reversed(first))
        for ordered in (first, second):
            resp = requests.post(
                f"{base}/api/rankings",
                json={
                    "judge_id": "J2",
                    "gap_id": task["gap_id"],
                    "ordered_candidates": ordered,
                },
                timeout=5,
            )
            assert resp.status_code == 200
        data = json.loads((data_dir / "session_J2.json").read_text(encoding="utf-8"))
        entries = data["rankings"][str(task["gap_id"])]["entries"]
        assert [e["candidate"] for e in entries] == second

    def test_missing_candidate_is_400_naming_it(self, server):
        _, base, _ = server
        task = requests.get(f"{base}/api/tasks", timeout=5).json()[0]
        ordered = sorted(task["candidates"])[1:]  # drop one
        dropped = sorted(task["candidates"])[0]
        resp = requests.post(
            f"{base}/api/rankings",
            json={"judge_id": "J3", "gap_id": task["gap_id"], "ordered_candidates": ordered},
            timeout=5,
        )
        assert resp.status_code == 400
        assert "missing candidate" in resp.json()["error"]
        assert dropped in resp.json()["error"]

    def test_extra_candidate_is_400(self, server):
        _, base, _ = server
        task = requests.get(f"{base}/api/tasks", timeout=5).json()[0]
        ordered = sorted(task["candidates"]) + ["intruso"]
        resp = requests.post(
            f"{base}/api/rankings",
            json={"judge_id": "J3", "gap_id": task["gap_id"], "ordered_candidates": ordered},
            timeout=5,
        )
        assert resp.status_code == 400
        assert "intruso" in resp.json()["error"]

    def test_duplicate_candidate_is_400(self, server):
        _, base, _ = server
        task = requests.get(f"{base}/api/tasks", timeout=5).json()[0]
        ordered = sorted(task["candidates"])
        ordered[1] = ordered[0]
        resp = requests.post(
            f"{base}/api/rankings",
            json={"judge_id": "J3", "gap_id": task["gap_id"], "ordered_candidates": ordered},
            timeout=5,
        )
        assert resp.status_code == 400
        assert "duplicate" in resp.json()["error"]

    def test_unknown_gap_is_400(self, server):
        _, base, _ = server
        resp = requests.post(
            f"{base}/api/rankings",
            json={"judge_id": "J3", "gap_id": 2, "ordered_candidates": ["a"]},
            timeout=5,
        )
        assert resp.status_code == 400
        assert "unknown gap_id" in resp.json()["error"]

    def test_malformed_json_is_400(self, server):
        _, base, _ = server
        resp = requests.post(
            f"{base}/api/rankings",
            data="{nope",
            headers={"Content-Type": "application/json"},
            timeout=5,
        )
        assert resp.status_code == 400

    def test_bad_judge_id_is_400(self, server):
        _, base, _ = server
        task = requests.get(f"{base}/api/tasks", timeout=5).json()[0]
        resp = requests.post(
            f"{base}/api/rankings",
            json={
                "judge_id": "../etc/passwd",
                "gap_id": task["gap_id"],
                "ordered_candidates": sorted(task["candidates"]),
            },
            timeout=5,
        )
        assert resp.status_code == 400

    def test_fallback_page_without_bundle(self, server):
        _, base, _ = server
        resp = requests.get(base + "/", timeout=5)
        assert resp.status_code == 200
        assert "Judge ranking API" in resp.text

    def test_persisted_files_feed_validation(
        self, server, fixture_test, fixture_sheets, fixture_models
    ):
        _, base, data_dir = server
        tasks = requests.get(f"{base}/api/tasks", timeout=5).json()
        # Two judges submit complete sessions straight through the HTTP API.
        for judge in ("JA", "JB"):
            for task in tasks:
                resp = requests.post(
                    f"{base}/api/rankings",
                    json={
                        "judge_id": judge,
                        "gap_id": task["gap_id"],
                        "ordered_candidates": sorted(task["candidates"]),
                    },
                    timeout=5,
                )
                assert resp.status_code == 200
        sessions = load_judge_sessions(data_dir)
        assert sorted(s.judge_id for s in sessions) == ["JA", "JB"]
        assert all(s.complete for s in sessions)
        report = run_validation(fixture_test, fixture_sheets, sessions, fixture_models)
        assert report.gap_selection == [g["gap_id"] for g in tasks]


class TestServerConstruction:
    def test_port_in_use(self, fixture_test, fixture_sheets, tmp_path):
        srv = create_server(fixture_test, fixture_sheets, port=0, data_dir=tmp_path / "d1")
        try:
            port = srv.server_address[1]
            with pytest.raises(PipelineError, match="cannot bind"):
                create_server(fixture_test, fixture_sheets, port=port, data_dir=tmp_path / "d2")
        finally:
            srv.server_close()

    @pytest.mark.skipif(os.geteuid() == 0, reason="root ignores permission bits")
    def test_unwritable_data_dir(self, fixture_test, fixture_sheets, tmp_path):
        blocked = tmp_path / "blocked"
        blocked.mkdir()
        blocked.chmod(0o500)
        try:
            with pytest.raises(PipelineError, match="not writable"):
                create_server(fixture_test, fixture_sheets, port=0, data_dir=blocked)
        finally:
            blocked.chmod(0o700)

    def test_missing_static_dir(self, fixture_test, fixture_sheets, tmp_path):
        with pytest.raises(PipelineError, match="static dir"):
            create_server(
                fixture_test,
                fixture_sheets,
                port=0,
                data_dir=tmp_path / "d",
                static_dir=tmp_path / "nope",
            )

    def test_static_bundle_served(self, fixture_test, fixture_sheets, tmp_path):
        static = tmp_path / "dist"
        static.mkdir()
        (static / "index.html").write_text("<html>ui</html>", encoding="utf-8")
        (static / "app.js").write_text("console.log(1)", encoding="utf-8")
        srv = create_server(
            fixture_test, fixture_sheets, port=0, data_dir=tmp_path / "d", static_dir=static
        )
        thread = threading.Thread(target=srv.serve_forever, daemon=True)
        thread.start()
        base = f"http://127.0.0.1:{srv.server_address[1]}"
        try:
            assert requests.get(base + "/", timeout=5).text == "<html>ui</html>"
            assert "console" in requests.get(base + "/app.js", timeout=5).text
            assert requests.get(base + "/../secret", timeout=5).status_code == 404
        finally:
            srv.shutdown()
            srv.server_close()
            thread.join(timeout=5)
