# Exact sup norms of dyadic piecewise polynomials.
import numpy as np

from supnorm_adapt.piecewise import (
    DyadicPiecewisePoly,
    antiderivative,
    combine,
    evaluate,
    refine_to_level,
    sup_norm,
)

rng = np.random.default_rng(0)

# a random cubic on four level-3 cells (coefficients in the local variable u)
p = DyadicPiecewisePoly(3, [0, 1, 2, 5], rng.normal(size=(4, 4)))
value, where = sup_norm(p, return_argmax=True)
print("exact sup", value, "at", where)

y = np.linspace(0, 6 / 8, 2_000_001)
print("grid sup ", np.abs(evaluate(p, y)).max())

# refinement changes the representation, not the function
q = refine_to_level(p, 7)
print("cells after refining to level 7:", q.cells.size, " sup", sup_norm(q))

# differences of functions on different levels are refined automatically
hat = DyadicPiecewisePoly(0, [0, 1], [[0.0, 1.0], [1.0, -1.0]])
print("sup |p - hat| =", sup_norm(combine([(1.0, p), (-1.0, hat)])))

F = antiderivative(hat)
print("hat antiderivative at 0.5, 1, 2:", F(np.array([0.5, 1.0, 2.0])))
