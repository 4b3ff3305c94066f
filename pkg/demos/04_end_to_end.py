# %% [markdown]
# Sender, channel and receiver chained together.
#
# Galactose switches on the sender's MF(alpha)1 expression. Secreted
# alpha-factor diffuses 20 um to the receiver, where it drives FUS1.
# The harness handles units (nM/min per cell to M*m^3/s to nM) and writes
# every trajectory plus a manifest.

# %%
import json
from pathlib import Path

from yeastmc.config import load_config
from yeastmc.experiment import run_experiment
from yeastmc.outputs import emit_outputs

root = Path(__file__).resolve().parents[1]
cfg = load_config(root / "configs" / "e2e_galactose_step.yaml")
res = run_experiment(cfg)
files = emit_outputs(res, "out_e2e_demo")

for c in res.checks:
    print(f"{'PASS' if c.passed else 'FAIL'} {c.name}: {c.value}")

# %%
alpha = res.trajectories["channel"].column("alpha_nM")
fc = res.trajectories["fold_change"]
print(f"alpha at receiver: max {alpha.max():.0f} nM")
print(f"Fus1 fold change: max {fc.column('Fus1').max():.1f} at "
      f"{fc.times[fc.column('Fus1').argmax()]:.0f} min")

man = json.loads(Path("out_e2e_demo/manifest.json").read_text())
print("config sha256:", man["config_sha256"][:16], "...", len(man["files"]), "files")
