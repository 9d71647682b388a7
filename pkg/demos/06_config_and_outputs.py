"""
Configuration files and reproducible outputs
============================================

Experiments are described by small key = value files. The command line
(`opinion-oc` or `python -m opinion_oc`) resolves them against the
reference defaults and writes CSV files plus a manifest with checksums.
"""

import json
import tempfile
from pathlib import Path

from opinion_oc.cli import main
from opinion_oc.config import parse_config

text = """
# a quick, coarse centring run
[mesh]
L = 40
T = 4.0
[cost]
cost = centring_both
beta = 0.1
[sweep]
max_iter = 30
"""
cfg = parse_config(text).validate()
print({k: v for k, v in cfg.resolved().items() if v["source"] == "user"})

with tempfile.TemporaryDirectory() as tmp:
    cfg_path = Path(tmp) / "run.cfg"
    cfg_path.write_text(text)
    out = Path(tmp) / "out"
    code = main(["optimize", "--config", str(cfg_path), "--out", str(out)])
    print("exit code", code)
    print(sorted(p.name for p in out.iterdir()))
    print((out / "cost_history.csv").read_text().splitlines()[:4])
    manifest = json.loads((out / "manifest.json").read_text())
    print("beta", manifest["config"]["beta"], "| sha256 of control.csv", manifest["files"]["control.csv"][:16], "...")

    # A config error exits with code 2 and names the offending line.
    bad = Path(tmp) / "bad.cfg"
    bad.write_text("[model]\ntau_LL = 0.2\nfoo = 1\n")
    print("exit code", main(["forward", "--config", str(bad)]))
