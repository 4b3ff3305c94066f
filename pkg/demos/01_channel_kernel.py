# %% [markdown]
# Diffusion channel: impulse response, peak time and mass bookkeeping.
#
# Alpha-factor released at a point spreads as a Gaussian cloud and decays
# at rate k_alpha. The receiver sees a delayed, smeared pulse whose peak
# moves out roughly as r^2 / (6 D).

# %%
import numpy as np
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

from yeastmc import channel as ch

p = ch.ChannelParams(D_alpha=1e-10, k_alpha=1e-3)   # m^2/s, 1/s
alpha0 = ch.mol_to_Mm3(1e-18)                       # 1 amol in M*m^3

# %%
# Peak time grows quadratically with distance
for r in (5e-6, 1e-5, 2e-5, 5e-5):
    print(f"r = {r * 1e6:5.1f} um  peak at {ch.peak_time(r, p):8.3f} s "
          f"(closed form {ch.peak_time_closed_form(r, p):8.3f} s)")

# %%
# Mass in the cloud only falls by degradation
for t in (0.1, 1.0, 10.0):
    print(f"t = {t:5.1f} s  mass / alpha0 = {ch.mass_integral(t, p, alpha0) / alpha0:.12f}"
          f"  exp(-kt) = {np.exp(-p.k_alpha * t):.12f}")

# The literal exponent r^2/(4 pi D t) inflates the mass by pi^1.5
lit = ch.ChannelParams(D_alpha=1e-10, k_alpha=1e-3, literal_exponent=True)
print("literal kernel mass ratio:", ch.mass_integral(1.0, lit) / np.exp(-1e-3), "vs pi^1.5 =", np.pi ** 1.5)

# %%
# A constant source switched on at t = 0: quadrature against the erfc form
e = ch.EmissionSchedule(np.array([0.0, 1e4]), np.array([1e-20, 1e-20]))
t = np.geomspace(0.5, 3000, 40)
num = ch.response_from_emission(e, 2e-5, t, p)
exact = ch.constant_emission_response(1e-20, 2e-5, t, p)
print("max relative deviation:", np.max(np.abs(num / exact - 1)))

# %%
t = np.linspace(0.01, 20, 800)
fig, ax = plt.subplots(figsize=(6, 3.5))
for r in (1e-5, 2e-5, 4e-5):
    ax.plot(t, ch.impulse_response(r, t, p, alpha0) * 1e9, label=f"{r * 1e6:.0f} um")
ax.set_xlabel("time (s)")
ax.set_ylabel("alpha-factor (nM)")
ax.legend()
fig.tight_layout()
fig.savefig("channel_kernel.png", dpi=120)
