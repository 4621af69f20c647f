"""
Driving runs from the command line
==================================

Every computation can be described by a TOML file and launched with
``pmelab {green,meanvalue,solve,verify}``.  This script writes a small
configuration, runs it through the same entry point and reads the CSV
output back.
"""
import json
import pathlib
import tempfile

import numpy as np

from pmelab.cli import main

work = pathlib.Path(tempfile.mkdtemp(prefix="pmelab_demo_"))
(work / "run.toml").write_text("""
[manifold]
kind = "hyperbolic"
N = 3

[problem]
m = 2
atom = 1.0
R = [4.0, 8.0]
eps = 0.05

[solver]
t_end = 0.5
cells = 400
t_first = 0.01
snapshots_per_decade = 4
""")

code = main(["solve", "--config", str(work / "run.toml"), "--out", str(work / "out")])
print("exit code", code)
summary = json.loads((work / "out" / "summary.json").read_text())
print("final mass", summary["mass_final"], "| peak", summary["linf_final"])
print("nested balls monotone:", summary["cauchy_report"]["passed"])

diag = np.loadtxt(work / "out" / "diagnostics.csv", delimiter=",", skiprows=1)
print("diagnostic rows:", diag.shape[0], "| last time", diag[-1, 0])

# A broken file is rejected with every problem listed at once.
(work / "bad.toml").write_text("[problem]\nm = 0.5\nspeed = 3\n")
print("\nexit code for a bad file:", main(["solve", "--config", str(work / "bad.toml")]))
