"""Conservation laws of the truncated dyadic models.

Energy is conserved by every inviscid variant under the zero closure. Cross
helicity is conserved by the backward-coupling model (sys1) but not by the
forward-cascade model (sys2) that carries the blow-up mechanism.
"""
import numpy as np

from dyadic_mhd import ModelSpec, ShellState, StepControls, cross_helicity, energy, integrate_adaptive


def geometric(n, amp_a, amp_b, ratio_a, ratio_b):
    j = np.arange(1, n + 1, dtype=float)
    return ShellState(0.0, amp_a * ratio_a ** j, amp_b * ratio_b ** j)


def drift(values):
    values = np.asarray(values)
    return float(np.max(np.abs(values - values[0])) / abs(values[0]))


print("1. Energy on a 20-shell inviscid sys2 truncation, t in [0, 1]")
for d_i in (0.0, 1.0):
    model = ModelSpec("sys2", 2.0, 3.5, d_i=d_i, n_shells=20)
    traj = integrate_adaptive(model, geometric(20, 1, 1, 0.5, 0.5),
                              StepControls(t_end=1.0, dt_init=1e-12, dt_min=1e-300))
    print(f"   d_i={d_i:.0f}: {traj.terminal.kind.value}, {traj.stats['accepted']} steps, "
          f"relative energy drift {drift([energy(s) for s in traj.samples]):.1e}")

print("\n2. Cross helicity sum a_j b_j on 6 shells with mixed data")
for variant in ("sys1", "sys2"):
    model = ModelSpec(variant, 2.0, 3.5, n_shells=6)
    traj = integrate_adaptive(model, geometric(6, 0.1, 0.05, 0.25, 0.3), StepControls(t_end=1.0))
    print(f"   {variant}: relative Hc drift {drift([cross_helicity(s) for s in traj.samples]):.1e}")
print("   sys1 keeps Hc to rounding; sys2 moves it at the 10% level.")

print("\n3. With viscosity the energy only decreases")
model = ModelSpec("sys2", 2.0, 3.5, nu=1.0, mu=1.0, n_shells=8)
traj = integrate_adaptive(model, geometric(8, 1, 0.5, 0.5, 0.5), StepControls(t_end=1.0, diag_interval=0.1))
e = [energy(s) for s in traj.samples]
print("   E(t) =", " ".join(f"{x:.3g}" for x in e))
print("   monotone:", bool(np.all(np.diff(e) <= 0)))
