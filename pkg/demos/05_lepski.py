# Choosing the resolution level from the data.
from supnorm_adapt import risk_lab as rl
from supnorm_adapt.densities import cusp
from supnorm_adapt.lepski import SelectorVariant, build_grid, select
from supnorm_adapt.spline_kernel import projection_kernel

d = cusp(0.5)
n = 2 ** 13
s = rl.draw_sample(d, n, 5, 0)
print("grid for n =", n, ":", build_grid(n, 1))

for kind in ("bar_eps", "bar", "tilde_eps", "route"):
    out = select(s, projection_kernel(1), SelectorVariant(kind, m_draws=50), seed=5)
    print(f"{kind:>9}: j_hat={out.trace.j_hat} fallback={out.trace.fallback} "
          f"risk={rl.sup_error(out.estimate.density, d):.4f}")

# the trace lists every comparison made before a level was accepted
out = select(s, projection_kernel(2), SelectorVariant("bar_eps"), seed=5, threshold_scale=0.1)
for t in out.trace.tests:
    print(f"  j={t.j} l={t.l} stat={t.statistic:.4f} thr={t.threshold:.4f} {'ok' if t.passed else 'reject'}")
print("selected", out.trace.j_hat)
