# %% [markdown]
# Receiver response to synthetic alpha-factor pulses.
#
# A 1-min 10 uM pulse gives a fast FUS1 transcription spike and a slower
# Fus1 protein peak near one hour. With three pulses two hours apart the
# Bar1-producing strain re-induces each time; without Bar1 the pheromone
# lingers, receptors desensitize and each response is weaker.

# %%
import numpy as np
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

from yeastmc import receiver as rx
from yeastmc.core import Concentration, Trajectory
from yeastmc.events import detect_events, per_pulse_peaks
from yeastmc.protocols import single_pulse_protocol, three_pulse_protocol

grid = np.arange(0.0, 363.01, 0.5)
amp = Concentration(10.0, "µM")

# %%
p = rx.load_rx_params(preset="bar1_delta")
y0 = rx.basal_state(p)
tr = rx.simulate(p, single_pulse_protocol(amp), 363.0, y0=y0, t_eval=grid)
for s in ("Fus1_mRNA", "Fus1"):
    fc = rx.fold_change(tr, s, y0[rx.INDEX[s]])
    print(f"{s:10s} peak {fc.max():6.1f}-fold at {grid[fc.argmax()]:5.1f} min")

# %%
fig, axes = plt.subplots(2, 1, sharex=True, figsize=(7, 5))
for ax, strain in zip(axes, ("bar1_plus", "bar1_delta")):
    p = rx.load_rx_params(preset=strain)
    y0 = rx.basal_state(p)
    tr = rx.simulate(p, three_pulse_protocol(amp), 363.0, y0=y0, t_eval=grid)
    fc = Trajectory(("Fus1",), grid, rx.fold_change(tr, "Fus1", y0[rx.INDEX["Fus1"]]))
    ev = detect_events(fc, "Fus1")
    peaks = per_pulse_peaks(fc, "Fus1", [0, 121, 242])
    print(f"{strain}: {ev.event_count} events ({ev.rate_per_hour:.2f}/h), pulse peaks "
          + ", ".join(f"{v:.1f}" for v in peaks))
    for a in (0, 121, 242):
        ax.axvspan(a, a + 1, color="tab:green", alpha=0.3)
    ax.plot(grid, fc.column("Fus1"))
    ax.set_ylabel(f"{strain}\nFus1 fold change")
axes[-1].set_xlabel("time (min)")
fig.tight_layout()
fig.savefig("receiver_pulses.png", dpi=120)
