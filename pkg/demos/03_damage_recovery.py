"""
Optimizing, damaging and recovering
===================================

Runs the full protocol in a scratch directory. An intact fin is optimized
until CMA-ES converges. Then five damaged fins resume from the snapshot ten
generations before convergence and re-optimize. Takes about half a minute.
"""

import sys
import tempfile
from pathlib import Path

import numpy as np

from flapfin import harness

root = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp(prefix="flapfin-"))
cfg = harness.default_config("intact", "thrust", f_target=0.5, seed=1)
exp = harness.damage_experiment(cfg, root)

print(f"intact run: {exp.intact.termination} at generation {exp.intact.log.final.generation}")
print(f"branched at generation {exp.branch_generation}")


def median_f(record):
    return float(np.median([c.f for c in record.candidates]))


history = harness.load_history(root, "intact")
before = median_f(history[exp.branch_generation])
for b in exp.branches:
    recs = b.log.records
    spike = max(median_f(r) for r in recs[:3]) / before
    final = median_f(recs[-1]) / before
    o = harness.load_optimum(root, b.run_id)
    print(f"{b.run_id}: {b.termination}, thrust {o.fitness.F_used:.3f} N, "
          f"spike x{spike:.2f}, final x{final:.2f} of the pre-damage median")

summary = harness.report(root, ["intact"] + [b.run_id for b in exp.branches], root / "report")
print("report tables in", root / "report")
for row in harness.classification_rows(root, [b.run_id for b in exp.branches]):
    print(" ", row["run"], "amplitude", row["amplitude_change"], "frequency", row["frequency_change"])
