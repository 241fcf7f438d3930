# Oracle levels, bias bounds and a short rate experiment.
import math

from supnorm_adapt import risk_lab as rl
from supnorm_adapt.densities import triangular
from supnorm_adapt.lepski import SelectorVariant, build_grid
from supnorm_adapt.spline_kernel import projection_kernel

d = triangular()
k = projection_kernel(1)
n = 2 ** 13

print("j*  =", rl.oracle_jstar(d, k, n).level)
sharp = rl.oracle_jsharp(d, k, n, 60, 1)
print("j#  =", sharp.level)
print("j^H =", rl.oracle_jH(d, k, n, 60, 1).level)
print("(n / log n)^(1/3) =", round((n / math.log(n)) ** (1 / 3), 2))

for l in build_grid(n, 1).levels:
    row = sharp.table[l]
    print(f"l={l}: bias {row['bias']:.4f}  E(l) {row['E']:.4f} +/- {row['E_stderr']:.4f}"
          f"  W {rl.local_holder_W(l, d):.3f}")

fit = rl.rate_regression(d, k, SelectorVariant("bar_eps"), [2 ** e for e in range(10, 15)], 20, 1)
print(f"slope {fit.slope:.3f} +/- {fit.half_width:.3f} (target -1/3)")
