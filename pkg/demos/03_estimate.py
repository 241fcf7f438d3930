# Projection density estimates, their CDFs and the distance to the empirical CDF.
import numpy as np

from supnorm_adapt.densities import raised_cosine
from supnorm_adapt.estimator import Sample, cdf_estimate, estimate_density, sup_distance_to_ecdf
from supnorm_adapt.piecewise import evaluate, integral
from supnorm_adapt.risk_lab import sup_error
from supnorm_adapt.spline_kernel import projection_kernel

rng = np.random.default_rng(1)
d = raised_cosine()
s = Sample(d.sample(rng, 5000))

for r in (1, 2, 4):
    for j in (2, 4, 6):
        est = estimate_density(s, j, projection_kernel(r))
        c = cdf_estimate(est)
        print(f"r={r} j={j}: mass {integral(est.density):.12f}  sup|p_n - p0| {sup_error(est.density, d):.4f}"
              f"  sup|F_S - F_n| {sup_distance_to_ecdf(c, s):.5f}")

est = estimate_density(s, 4, projection_kernel(4))
x = np.linspace(-1, 1, 5)
print("cubic estimate at", x, "->", np.round(evaluate(est.density, x), 3))
print("true density      ->", np.round(d.pdf(x), 3))
