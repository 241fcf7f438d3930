# Rademacher suprema R(n, j), pair suprema T(n, j, l) and their sign averages.
import numpy as np

from supnorm_adapt.estimator import Sample
from supnorm_adapt.rademacher import cond_expect_sup, draw_signs, pair_sup, rademacher_sup
from supnorm_adapt.spline_kernel import projection_kernel

rng = np.random.default_rng(2)
s = Sample(rng.normal(size=2000))
k = projection_kernel(2)
draw = draw_signs(s.n, 7)

for j in (2, 3, 4, 5):
    print(f"R(n,{j}) = {rademacher_sup(s, draw, j, k):.4f}")
T = pair_sup(s, draw, 2, 5, k)
print(f"T(n,2,5) = {T:.4f} <= R(n,2) + R(n,5) = "
      f"{rademacher_sup(s, draw, 2, k) + rademacher_sup(s, draw, 5, k):.4f}")

# small samples: the sign average can be enumerated exactly
tiny = Sample(rng.uniform(0, 1, 10))
exact = cond_expect_sup(tiny, 1, 0, 2, kernel=projection_kernel(1), exact=True)
for m in (100, 10_000, 100_000):
    mc = cond_expect_sup(tiny, m, 3, 2, kernel=projection_kernel(1))
    print(f"m={m:>6}: {mc.mean:.5f} +/- {mc.stderr:.5f}   exact {exact.mean:.5f}")
