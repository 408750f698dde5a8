"""
Database: runs, iterations.
Safe migrations: CREATE TABLE IF NOT EXISTS, ADD COLUMN when missing.
"""
import json
import sqlite3
from datetime import datetime
from typing import Any, Dict, List, Optional

from src.models import SolveReport


class Database:
    def __init__(self, db_path: str):
        self.db_path = db_path
        self.conn = sqlite3.connect(db_path, check_same_thread=False)
        self.conn.row_factory = sqlite3.Row
        self._init_schema()
        self._migrate()

    def _init_schema(self):
        c = self.conn.cursor()
        c.execute("""
            CREATE TABLE IF NOT EXISTS runs (
                id INTEGER PRIMARY KEY AUTOINCREMENT,
                ts TEXT, problem TEXT, status TEXT, f REAL, infeasibility REAL,
                nf INTEGER, ng INTEGER, iters INTEGER, config_json TEXT, report_json TEXT
            )
        """)
        c.execute("""
            CREATE TABLE IF NOT EXISTS iterations (
                run_id INTEGER, l INTEGER, f REAL, v REAL, r_inf REAL, g_inf REAL,
                mu REAL, tau REAL, k INTEGER,
                PRIMARY KEY (run_id, l)
            )
        """)
        self.conn.commit()

    def _migrate(self):
        """Add message column to runs if missing (existing DBs)."""
        c = self.conn.cursor()
        c.execute("PRAGMA table_info(runs)")
        cols = [row[1] for row in c.fetchall()]
        if "message" not in cols:
            c.execute("ALTER TABLE runs ADD COLUMN message TEXT")
            self.conn.commit()

    def save_run(self, report: SolveReport, config: Optional[Dict[str, Any]] = None) -> int:
        c = self.conn.cursor()
        ts = datetime.now().isoformat()
        c.execute("""
            INSERT INTO runs (ts, problem, status, f, infeasibility, nf, ng, iters,
                              config_json, report_json, message)
            VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?)
        """, (ts, report.problem, report.status.value, float(report.f), float(report.infeasibility),
              report.nf, report.ng, report.iters, json.dumps(config or {}),
              json.dumps(report.to_dict(), allow_nan=False), report.message))
        run_id = c.lastrowid
        c.executemany("""
            INSERT INTO iterations (run_id, l, f, v, r_inf, g_inf, mu, tau, k)
            VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?)
        """, [(run_id, r.l, r.f, r.v, r.r_inf, r.g_inf, r.mu, r.tau, r.k) for r in report.records])
        self.conn.commit()
        return run_id

    # ---------- Query helpers for the history command ----------
    def get_runs(self, problem: Optional[str] = None, limit: int = 20) -> List[Dict[str, Any]]:
        c = self.conn.cursor()
        if problem:
            c.execute("""
                SELECT id, ts, problem, status, f, infeasibility, nf, ng, iters, message FROM runs
                WHERE problem = ? ORDER BY id DESC LIMIT ?
            """, (problem.upper(), limit))
        else:
            c.execute("""
                SELECT id, ts, problem, status, f, infeasibility, nf, ng, iters, message FROM runs
                ORDER BY id DESC LIMIT ?
            """, (limit,))
        return [dict(r) for r in c.fetchall()]

    def get_iterations(self, run_id: int) -> List[Dict[str, Any]]:
        c = self.conn.cursor()
        c.execute("""
            SELECT l, f, v, r_inf, g_inf, mu, tau, k FROM iterations
            WHERE run_id = ? ORDER BY l
        """, (run_id,))
        return [dict(r) for r in c.fetchall()]

    def get_report(self, run_id: int) -> Optional[Dict]:
        c = self.conn.cursor()
        c.execute("SELECT report_json FROM runs WHERE id = ?", (run_id,))
        row = c.fetchone()
        if not row:
            return None
        try:
            return json.loads(row["report_json"])
        except Exception:
            return None

    def close(self):
        self.conn.close()
