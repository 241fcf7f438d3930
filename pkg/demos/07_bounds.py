# Concentration bounds and an empirical check of the symmetrized deviation inequality.
from supnorm_adapt import risk_lab as rl
from supnorm_adapt.bounds import BoundInputs, bound_evaluators, c1, c2
from supnorm_adapt.densities import triangular

b = BoundInputs(n=10_000, sigma2=0.05, Esup=40.0)
for t in (0.0, 20.0, 60.0, 120.0):
    ev = bound_evaluators(b, t)
    print(f"t={t:>5}: " + "  ".join(f"{k}={v.value:.3g}{'' if v.preconditions_ok else '*'}"
                                   for k, v in sorted(ev.items())))
print("(* marks bounds whose range conditions fail)")
print("c1, c2 at lambda=1e6:", c1(1e6), c2(1e6))

rep = rl.empirical_violation_rate(triangular(), 512, 3, 1000, 9)
for t, f, bd, m in zip(rep.t, rep.frequency, rep.bound, rep.margin):
    print(f"t={t:7.2f}  frequency {f:.4f}  bound {bd:.4f}  margin {m:+.4f}")
print("symmetrization sandwich holds:", rep.sandwich_ok)
