# Spline projection kernels: B-splines, Gram sequence, inverse Gram, majorant.
import numpy as np

from supnorm_adapt.spline_kernel import (
    bspline_eval,
    gram_sequence,
    inverse_gram,
    kernel_eval,
    kernel_row,
    projection_kernel,
)
from supnorm_adapt.piecewise import integral, moment

x = np.linspace(0, 4, 9)
print("cubic B-spline on 0..4:", np.round(bspline_eval(4, x), 4))

for r in (1, 2, 3, 4):
    print(f"r={r} gram a(k) =", np.round(np.asarray(gram_sequence(r).a, dtype=float), 6))

# inverse Gram coefficients decay geometrically; for the hat function g(k) = sqrt(3) (sqrt(3)-2)^k
inv = inverse_gram(2)
print("g(0..4) for r=2:", np.round(inv.g[:5], 8), " lambda =", round(inv.lam, 6), " K =", inv.K_trunc)
for r in (3, 4):
    inv = inverse_gram(r)
    print(f"r={r}: c={inv.c:.4f} lambda={inv.lam:.5f} K_trunc={inv.K_trunc}")

for r in (1, 2, 3, 4):
    k = projection_kernel(r)
    print(f"r={r}: ||Phi||_1={k.phi_l1:.2f} ||Phi||_2={k.phi_l2:.2f} B(phi)={k.op_norm_bound:.2f}")

# the kernel is symmetric and reproduces polynomials of degree < r
k = projection_kernel(3)
print("kappa(0.2, 1.7) =", kernel_eval(k, 0.2, 1.7), "=", kernel_eval(k, 1.7, 0.2))
row = kernel_row(k, 0, 0.37)
print("mass", integral(row), " first moment", moment(row, 1), " second", moment(row, 2), 0.37 ** 2)

# dilation: a level-5 row lives on cells of width 1/32 and still integrates to one
row = kernel_row(k, 5, 0.37)
print("level-5 row: cells", row.k_min, "..", row.k_max, " mass", integral(row))
