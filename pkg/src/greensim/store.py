"""Embedded persistence for scenarios and runs.

One SQLite file plus a sibling results/ directory of per-run JSON
documents. Scenario ids are content hashes, so resubmitting the same
document yields the same id. All access is serialized through one lock;
run status moves forward only (queued → running → done | failed).
"""

from __future__ import annotations

import hashlib
import json
import sqlite3
import threading
import uuid
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

_SCHEMA = """
CREATE TABLE IF NOT EXISTS scenarios (
    scenario_id TEXT PRIMARY KEY,
    body        TEXT NOT NULL,
    created     TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS runs (
    run_id      TEXT PRIMARY KEY,
    scenario_id TEXT NOT NULL REFERENCES scenarios(scenario_id),
    controller  TEXT NOT NULL,
    flags       TEXT NOT NULL,
    status      TEXT NOT NULL,
    progress    REAL NOT NULL DEFAULT 0.0,
    error       TEXT,
    created     TEXT NOT NULL,
    finished    TEXT
);
"""

_TRANSITIONS = {
    "queued": {"running", "failed"},
    "running": {"done", "failed"},
    "done": set(),
    "failed": set(),
}

STATUSES = tuple(_TRANSITIONS)


class TransitionError(RuntimeError):
    """Attempted a backward or unknown run-status transition."""


def scenario_hash(doc: dict) -> str:
    canon = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return "s-" + hashlib.sha256(canon.encode()).hexdigest()[:16]


def _now() -> str:
    return datetime.now(timezone.utc).isoformat().replace("+00:00", "Z")


@dataclass(frozen=True)
class RunRow:
    run_id: str
    scenario_id: str
    controller: str
    flags: dict
    status: str
    progress: float
    error: str | None
    created: str
    finished: str | None


class RunStore:
    """Scenario + run persistence under one directory."""

    def __init__(self, root: Path | str):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.results_dir = self.root / "results"
        self.results_dir.mkdir(exist_ok=True)
        self._lock = threading.Lock()
        self._db = sqlite3.connect(self.root / "store.sqlite",
                                   check_same_thread=False)
        with self._lock:
            self._db.executescript(_SCHEMA)
            self._db.commit()

    def close(self) -> None:
        with self._lock:
            self._db.close()

    # -- scenarios ---------------------------------------------------------

    def put_scenario(self, doc: dict) -> str:
        sid = scenario_hash(doc)
        with self._lock:
            self._db.execute(
                "INSERT OR IGNORE INTO scenarios (scenario_id, body, created)"
                " VALUES (?, ?, ?)",
                (sid, json.dumps(doc, sort_keys=True), _now()))
            self._db.commit()
        return sid

    def get_scenario(self, scenario_id: str) -> dict | None:
        with self._lock:
            row = self._db.execute(
                "SELECT body FROM scenarios WHERE scenario_id = ?",
                (scenario_id,)).fetchone()
        return json.loads(row[0]) if row else None

    def list_scenarios(self) -> list[str]:
        with self._lock:
            rows = self._db.execute(
                "SELECT scenario_id FROM scenarios ORDER BY created").fetchall()
        return [r[0] for r in rows]

    # -- runs ----------------------------------------------------------------

    def create_run(self, scenario_id: str, controller: str,
                   flags: dict | None = None) -> str:
        run_id = "r-" + uuid.uuid4().hex[:12]
        with self._lock:
            self._db.execute(
                "INSERT INTO runs (run_id, scenario_id, controller, flags,"
                " status, progress, created) VALUES (?, ?, ?, ?, ?, 0.0, ?)",
                (run_id, scenario_id, controller,
                 json.dumps(flags or {}, sort_keys=True), "queued", _now()))
            self._db.commit()
        return run_id

    def get_run(self, run_id: str) -> RunRow | None:
        with self._lock:
            row = self._db.execute(
                "SELECT run_id, scenario_id, controller, flags, status,"
                " progress, error, created, finished FROM runs"
                " WHERE run_id = ?", (run_id,)).fetchone()
        if row is None:
            return None
        return RunRow(run_id=row[0], scenario_id=row[1], controller=row[2],
                      flags=json.loads(row[3]), status=row[4],
                      progress=row[5], error=row[6], created=row[7],
                      finished=row[8])

    def list_runs(self) -> list[RunRow]:
        with self._lock:
            ids = [r[0] for r in self._db.execute(
                "SELECT run_id FROM runs ORDER BY created").fetchall()]
        return [self.get_run(i) for i in ids]

    def set_status(self, run_id: str, status: str,
                   error: str | None = None) -> None:
        if status not in _TRANSITIONS:
            raise TransitionError(f"unknown status {status!r}")
        with self._lock:
            row = self._db.execute(
                "SELECT status FROM runs WHERE run_id = ?",
                (run_id,)).fetchone()
            if row is None:
                raise KeyError(run_id)
            if status not in _TRANSITIONS[row[0]]:
                raise TransitionError(f"{row[0]} -> {status} not allowed")
            finished = _now() if status in ("done", "failed") else None
            self._db.execute(
                "UPDATE runs SET status = ?, error = ?, finished = ?,"
                " progress = CASE WHEN ? = 'done' THEN 1.0 ELSE progress END"
                " WHERE run_id = ?",
                (status, error, finished, status, run_id))
            self._db.commit()

    def set_progress(self, run_id: str, fraction: float) -> None:
        # monotone: never move backwards even if callbacks race
        with self._lock:
            self._db.execute(
                "UPDATE runs SET progress = MAX(progress, ?) WHERE run_id = ?",
                (min(1.0, max(0.0, fraction)), run_id))
            self._db.commit()

    # -- results -------------------------------------------------------------

    def result_path(self, run_id: str) -> Path:
        return self.results_dir / f"{run_id}.json"

    def save_result(self, run_id: str, doc: dict) -> None:
        path = self.result_path(run_id)
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(doc))
        tmp.replace(path)

    def load_result(self, run_id: str) -> dict:
        return json.loads(self.result_path(run_id).read_text())
