#!/usr/bin/env python3
"""
iprelax - Demo Script
Runs the three hard test problems and a few catalog problems, printing the outer-iteration tables.
"""

import os
os.environ.setdefault("IPR_RECORD_RUNS", "false")  # keep the demo out of the run history

from iprelax import (
    Database,
    SolverConfig,
    lookup_problem,
    load_model,
    outer_solve,
    render,
)
from src.settings import MODELS_DIR, reference_for
from src.relaxation import eval_zy
from src.models import BarrierParams


def show_relaxation():
    print("\n" + "="*60)
    print("DEMO: Relaxation transform z, y")
    print("="*60 + "\n")

    cases = [
        ("t*s = mu, both positive", 1.0, 0.1, BarrierParams(0.1, 1.0)),
        ("t = s", 0.7, 0.7, BarrierParams(0.25, 1.0)),
        ("negative slack", -1.0, 1.0, BarrierParams(0.1, 2.0)),
    ]
    for name, t, s, bp in cases:
        z, y = eval_zy([t], [s], bp)
        print(f"{name}: t={t:g} s={s:g} mu={bp.mu:g} tau={bp.tau:g}")
        print(f"  z={z[0]:.8f}  y={y[0]:.8f}  z*y={z[0]*y[0]:.3e}\n")


def show_problem(name: str):
    print("\n" + "="*60)
    print(f"DEMO: {name}")
    print("="*60 + "\n")

    report = outer_solve(lookup_problem(name), SolverConfig(monitor=True))
    print(render(report, "table"))
    ref = reference_for(name)
    if ref:
        print(f"\nreference: status {ref.get('status', '-')}, f {ref['f']}, {ref['iter']} QP solves")
    return report


def show_text_model():
    print("\n" + "="*60)
    print("DEMO: Text model (models/tp2.mod)")
    print("="*60 + "\n")

    problem = load_model(MODELS_DIR / "tp2.mod")
    report = outer_solve(problem)
    print(f"{problem.name}: {report.status.value}  x={report.x}  f={report.f:.4f}")


def show_history():
    print("\n" + "="*60)
    print("DEMO: Run history (in memory)")
    print("="*60 + "\n")

    db = Database(":memory:")
    for name in ("HS14", "HS22", "CB2"):
        db.save_run(outer_solve(lookup_problem(name)))
    for run in db.get_runs():
        print(f"#{run['id']} {run['problem']:<5} {run['status']:<20} f={run['f']:.4f} iters={run['iters']}")
    db.close()


def main():
    print("\n" + "="*60)
    print("🧪 iprelax - Demo")
    print("="*60)

    show_relaxation()
    for name in ("TP1", "TP2", "TP3"):
        show_problem(name)
    show_text_model()
    show_history()

    print("\n" + "="*60)
    print("✅ Demo completed")
    print("="*60 + "\n")


if __name__ == "__main__":
    main()
