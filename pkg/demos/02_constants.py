"""Constructive Lyapunov coefficients and the inequalities behind them.

The selector picks c1..c4 for the MHD functional (or c1..c3 for the Hall
functional) so that every parameter condition holds, then derives the
Riccati constant K and the size threshold M0. The randomized suites check
the Hoelder-type lemma and the Young chains on seeded nonnegative states.
"""
from dyadic_mhd import select_coefficients
from dyadic_mhd.analysis import run_suite, verify_parameter_conditions
from dyadic_mhd.functionals import derive_constant_c0

lam, theta, gamma = 2.0, 3.5, 0.25
print(f"lambda={lam}, theta={theta}, gamma={gamma}")
print(f"c0 (cubic sum vs H^(gamma+1) norm) = {derive_constant_c0(lam, gamma, theta):.9f}\n")

for variant in ("mhd", "hall"):
    c = select_coefficients(variant, lam, gamma, theta, nu=0.01, mu=0.01)
    print(f"{variant.upper()}: c1={c.c1:.9g} c2={c.c2:.9g} c3={c.c3:.9g} c4={c.c4:.9g}")
    print(f"     K={c.K:.4g}  M1={c.M1:.4g}  M0={c.M0:.4g}")
    rep = verify_parameter_conditions(c, lam, gamma, theta)
    print("     " + rep.to_text().replace("\n", "\n     ").rstrip())

print("\nThe MHD c3 sits at its closed-form ceiling (lambda^(2g)-1)/(lambda^theta+lambda^(-2g)).")
print("Printed worked values in the literature round this to 0.0344578; the formula gives 0.0344580.\n")

print("Randomized suites, 2000 seeded states each:")
for suite in ("triple", "young"):
    rep = run_suite(suite, lam, theta, gamma, seed=42, count=2000)
    worst = max(rep.entries, key=lambda e: e.scaled_residual if e.applicable else -1)
    print(f"   {suite}: ok={rep.ok}, {len(rep.entries)} entries, "
          f"tightest {worst.condition_id} (relative slack {worst.scaled_residual:.2e})")
