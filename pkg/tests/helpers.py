"""Independent reference computations used by the tests.

These deliberately avoid the library's own code paths: the l1 projection is
re-derived by brute force over candidate supports, and prox values by 1-D
numeric minimization.
"""

import numpy as np
from scipy.optimize import minimize_scalar


def l1_projection_enumeration(x, radius):
    """Brute-force l1-ball projection for small n.

    Enumerates every candidate support, solves the equality-constrained
    least squares on it in closed form, and keeps the feasible candidate
    with the smallest objective.  Exponential in n; exact.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    if np.abs(x).sum() <= radius:
        return x.copy()
    best, best_obj = None, np.inf
    for mask in range(1, 2 ** n):
        support = [j for j in range(n) if (mask >> j) & 1]
        if any(x[j] == 0.0 for j in support):
            continue
        signs = np.sign(x[support])
        theta = (np.abs(x[support]).sum() - radius) / len(support)
        if theta < 0:
            continue
        u = np.zeros(n)
        u[support] = x[support] - signs * theta
        if np.any(u[support] * signs < 0):
            continue
        obj = float(np.sum((u - x) ** 2))
        if obj < best_obj:
            best, best_obj = u, obj
    return best


def prox_1d(value_fn, gamma, x):
    """argmin_u gamma * g(u) + (u - x)^2 / 2 by bracketed scalar minimization."""
    res = minimize_scalar(
        lambda u: gamma * value_fn(u) + 0.5 * (u - x) ** 2,
        bounds=(-abs(x) - 10.0, abs(x) + 10.0),
        method="bounded",
        options={"xatol": 1e-12},
    )
    return float(res.x)
