import sqlite3

from src.db import Database
from tests.test_report import _report


def test_save_and_query(tmp_path):
    db = Database(str(tmp_path / "runs.db"))
    run_id = db.save_run(_report(), {"mu0": 0.1})
    other = db.save_run(_report())
    assert other == run_id + 1

    runs = db.get_runs()
    assert [r["id"] for r in runs] == [other, run_id]
    assert runs[0]["problem"] == "TP1"
    assert runs[0]["status"] == "ApproxKKT"
    assert (runs[0]["nf"], runs[0]["ng"], runs[0]["iters"]) == (20, 19, 7)
    assert db.get_runs(problem="tp1", limit=1)[0]["id"] == other
    assert db.get_runs(problem="HS10") == []

    rows = db.get_iterations(run_id)
    assert [r["l"] for r in rows] == [0, 1, 2]
    assert rows[0]["k"] is None and rows[2]["mu"] is None
    assert rows[1]["tau"] == 0.6

    stored = db.get_report(run_id)
    assert stored["final"]["x"] == [2.0, 3.0, 0.0]
    assert db.get_report(999) is None
    db.close()


def test_adds_missing_column(tmp_path):
    path = str(tmp_path / "old.db")
    conn = sqlite3.connect(path)
    conn.execute("""
        CREATE TABLE runs (
            id INTEGER PRIMARY KEY AUTOINCREMENT,
            ts TEXT, problem TEXT, status TEXT, f REAL, infeasibility REAL,
            nf INTEGER, ng INTEGER, iters INTEGER, config_json TEXT, report_json TEXT
        )
    """)
    conn.commit()
    conn.close()

    db = Database(path)
    cols = [row[1] for row in db.conn.execute("PRAGMA table_info(runs)").fetchall()]
    assert "message" in cols
    run_id = db.save_run(_report())
    assert db.get_runs()[0]["id"] == run_id
    db.close()
