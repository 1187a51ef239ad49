# A small Monte Carlo run from a shipped config, then Studentized errors.
#
#   python demos/03_monte_carlo.py [config] [trials]
import io
import json
import sys
from pathlib import Path

import numpy as np

from globalrv import harness

here = Path(__file__).resolve().parent
name = sys.argv[1] if len(sys.argv) > 1 else "jumps_lambda5.json"
trials = int(sys.argv[2]) if len(sys.argv) > 2 else 100

doc = json.loads((here / "configs" / name).read_text())
doc["trials"] = trials
cfg = harness.config_from_dict(doc)
result = harness.run_experiment(cfg, jobs=2)

buf = io.StringIO()
harness.write_summary_csv(result, buf)
print(buf.getvalue())

z = result.studentized("wgrv.lgrv.mov")
theo, emp = harness.qq_data(z)
print("Studentized wgrv.lgrv.mov: mean %.3f sd %.3f" % (z.mean(), z.std(ddof=1)))
for p in (0.1, 0.25, 0.5, 0.75, 0.9):
    i = int(p * len(z))
    print(f"  normal {theo[i]:6.3f}   sample {emp[i]:6.3f}")
