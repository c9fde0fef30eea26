"""Continuous cutter operators: projections, subgradient projectors, resolvents.

Every operator T here satisfies <x - T(x), q - T(x)> <= 0 for all x and all q
in Fix(T), so each non-fixed point is separated from the fixed-point set by
the hyperplane through T(x) orthogonal to T(x) - x.
"""

import math

import numpy as np

from .core import (
    DimensionMismatch,
    InvalidCutter,
    ZeroGradientAtPositiveValue,
    as_vector,
)

# f values at or below this are treated as feasible, guarding the subgradient
# step against division by a vanishing gradient at the boundary
LEVEL_ZERO_TOL = 1e-14

_GRAD_ZERO_TOL = 1e-14


def _check_point(x, dim, name="x"):
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise DimensionMismatch(f"{name} must be 1-D")
    if dim is not None and arr.size != dim:
        raise DimensionMismatch(f"{name} has dimension {arr.size}, expected {dim}")
    return arr


# ---------------------------------------------------------------------------
# level-set / cost functions (value + gradient in closed form)

class AffineFunction:
    """f(x) = <a, x> - b; zero-sublevel set is the halfspace <a, x> <= b."""

    form = "affine"

    def __init__(self, a, b):
        self.a = as_vector(a, name="a")
        self.b = float(b)
        if float(np.dot(self.a, self.a)) == 0.0:
            raise InvalidCutter("affine function needs a nonzero slope")

    @property
    def dim(self):
        return self.a.size

    def value(self, x):
        return float(np.dot(self.a, _check_point(x, self.dim))) - self.b

    def grad(self, x):
        _check_point(x, self.dim)
        return np.array(self.a)


class QuadraticFunction:
    """f(x) = x^T Q x + <c, x> + d with Q symmetric positive semidefinite."""

    form = "quadratic"

    def __init__(self, Q, c, d):
        Q = np.array(Q, dtype=float)
        self.c = as_vector(c, name="c")
        self.d = float(d)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1] or Q.shape[0] != self.c.size:
            raise InvalidCutter("Q must be square and match the dimension of c")
        if not np.allclose(Q, Q.T, rtol=0.0, atol=1e-12):
            raise InvalidCutter("Q must be symmetric")
        if np.linalg.eigvalsh(Q).min() < -1e-10:
            raise InvalidCutter("Q must be positive semidefinite")
        Q.flags.writeable = False
        self.Q = Q

    @property
    def dim(self):
        return self.c.size

    def value(self, x):
        x = _check_point(x, self.dim)
        return float(x @ self.Q @ x + np.dot(self.c, x)) + self.d

    def grad(self, x):
        x = _check_point(x, self.dim)
        return 2.0 * (self.Q @ x) + self.c


class BallQuadratic:
    """f(x) = ||x - center||^2 - radius^2; zero-sublevel set is B[center, radius]."""

    form = "norm_squared_minus"

    def __init__(self, center, radius):
        self.center = as_vector(center, name="center")
        self.radius = float(radius)
        if self.radius < 0:
            raise InvalidCutter("radius must be nonnegative")

    @property
    def dim(self):
        return self.center.size

    def value(self, x):
        diff = _check_point(x, self.dim) - self.center
        return float(np.dot(diff, diff)) - self.radius ** 2

    def grad(self, x):
        return 2.0 * (_check_point(x, self.dim) - self.center)


# ---------------------------------------------------------------------------
# proxable functions (closed-form proximal maps, for resolvents)

class AbsSum:
    """l1 norm; prox is soft thresholding, minimizer set is {0}."""

    form = "abs_sum"
    dim = None

    def value(self, x):
        return float(np.sum(np.abs(np.asarray(x, dtype=float))))

    def grad(self, x):
        # sign subgradient, 0 on zero coordinates (minimal-norm element)
        return np.sign(np.asarray(x, dtype=float))

    def prox(self, x, gamma):
        x = np.asarray(x, dtype=float)
        return np.sign(x) * np.maximum(np.abs(x) - gamma, 0.0)


class SquaredNorm:
    """g(x) = ||x||^2; prox_{gamma g}(x) = x / (1 + 2 gamma)."""

    form = "squared_norm"
    dim = None

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return float(np.dot(x, x))

    def grad(self, x):
        return 2.0 * np.asarray(x, dtype=float)

    def prox(self, x, gamma):
        return np.asarray(x, dtype=float) / (1.0 + 2.0 * gamma)


class SetIndicator:
    """Indicator of a projection-kind set; prox is the projection itself."""

    form = "indicator"

    def __init__(self, set_cutter):
        if not getattr(set_cutter, "is_projection", False):
            raise InvalidCutter("indicator needs a projection-kind set")
        self.set_cutter = set_cutter

    @property
    def dim(self):
        return self.set_cutter.dim

    def prox(self, x, gamma):
        return self.set_cutter.apply(x)


# ---------------------------------------------------------------------------
# cutter base

class Cutter:
    """Common surface: apply, residual, fixed-point distance, separator check."""

    kind = "abstract"
    is_projection = False

    @property
    def dim(self):
        """Ambient dimension, or None when the operator works in any R^n."""
        return None

    def apply(self, x):
        raise NotImplementedError

    def residual(self, x):
        """||T(x) - x||; zero exactly on the fixed-point set."""
        x = _check_point(x, self.dim)
        return float(np.linalg.norm(self.apply(x) - x))

    def fixed_point_distance(self, x):
        """d(x, Fix(T)) when a closed form exists, else None."""
        return None

    def check_separator(self, x, q):
        """<x - T(x), q - T(x)>; nonpositive whenever q is a fixed point."""
        x = _check_point(x, self.dim)
        q = _check_point(q, self.dim, name="q")
        if x.size != q.size:
            raise DimensionMismatch("x and q must share a dimension")
        tx = self.apply(x)
        return float(np.dot(x - tx, q - tx))


class Halfspace(Cutter):
    """Orthogonal projection onto {x : <a, x> <= b}."""

    kind = "halfspace"
    is_projection = True

    def __init__(self, a, b):
        self.a = as_vector(a, name="a")
        self.b = float(b)
        self._aa = float(np.dot(self.a, self.a))
        if self._aa == 0.0:
            raise InvalidCutter("halfspace normal must be nonzero")

    @property
    def dim(self):
        return self.a.size

    def apply(self, x):
        x = _check_point(x, self.dim)
        excess = float(np.dot(self.a, x)) - self.b
        if excess <= 0.0:
            return x
        return x - (excess / self._aa) * self.a

    def fixed_point_distance(self, x):
        x = _check_point(x, self.dim)
        excess = float(np.dot(self.a, x)) - self.b
        return max(0.0, excess) / math.sqrt(self._aa)


class Hyperplane(Cutter):
    """Orthogonal projection onto {x : <a, x> = b}."""

    kind = "hyperplane"
    is_projection = True

    def __init__(self, a, b):
        self.a = as_vector(a, name="a")
        self.b = float(b)
        self._aa = float(np.dot(self.a, self.a))
        if self._aa == 0.0:
            raise InvalidCutter("hyperplane normal must be nonzero")

    @property
    def dim(self):
        return self.a.size

    def apply(self, x):
        x = _check_point(x, self.dim)
        offset = float(np.dot(self.a, x)) - self.b
        return x - (offset / self._aa) * self.a

    def fixed_point_distance(self, x):
        x = _check_point(x, self.dim)
        return abs(float(np.dot(self.a, x)) - self.b) / math.sqrt(self._aa)


class Ball(Cutter):
    """Orthogonal projection onto B[center, radius]."""

    kind = "ball"
    is_projection = True

    def __init__(self, center, radius):
        self.center = as_vector(center, name="center")
        self.radius = float(radius)
        if self.radius <= 0:
            raise InvalidCutter("ball radius must be positive")

    @property
    def dim(self):
        return self.center.size

    def apply(self, x):
        x = _check_point(x, self.dim)
        diff = x - self.center
        dist = float(np.linalg.norm(diff))
        if dist <= self.radius:
            return x
        return self.center + (self.radius / dist) * diff

    def fixed_point_distance(self, x):
        x = _check_point(x, self.dim)
        return max(0.0, float(np.linalg.norm(x - self.center)) - self.radius)


class Box(Cutter):
    """Orthogonal projection onto the axis-aligned box [lo, hi]."""

    kind = "box"
    is_projection = True

    def __init__(self, lo, hi):
        self.lo = as_vector(lo, name="lo")
        self.hi = as_vector(hi, name="hi")
        if self.lo.size != self.hi.size:
            raise DimensionMismatch("lo and hi must share a dimension")
        if np.any(self.lo > self.hi):
            raise InvalidCutter("box needs lo <= hi coordinatewise")

    @property
    def dim(self):
        return self.lo.size

    def apply(self, x):
        x = _check_point(x, self.dim)
        return np.clip(x, self.lo, self.hi)

    def fixed_point_distance(self, x):
        x = _check_point(x, self.dim)
        return float(np.linalg.norm(x - np.clip(x, self.lo, self.hi)))


def project_l1_ball(x, radius):
    """Project onto {u : ||u||_1 <= radius} by sort and threshold.

    Reduces to projecting |x| onto the simplex of size ``radius`` and
    restoring signs; O(n log n).
    """
    x = np.asarray(x, dtype=float)
    if radius <= 0:
        raise InvalidCutter("l1 ball radius must be positive")
    mag = np.abs(x)
    if float(mag.sum()) <= radius:
        return x
    u = np.sort(mag)[::-1]
    cumulative = np.cumsum(u)
    counts = np.arange(1, x.size + 1)
    positive = u - (cumulative - radius) / counts > 0
    rho = int(np.nonzero(positive)[0][-1])
    theta = (cumulative[rho] - radius) / (rho + 1.0)
    return np.sign(x) * np.maximum(mag - theta, 0.0)


class L1Ball(Cutter):
    """Orthogonal projection onto {x : ||x||_1 <= radius} (any dimension)."""

    kind = "l1_ball"
    is_projection = True

    def __init__(self, radius):
        self.radius = float(radius)
        if self.radius <= 0:
            raise InvalidCutter("l1 ball radius must be positive")

    def apply(self, x):
        return project_l1_ball(_check_point(x, None), self.radius)

    def fixed_point_distance(self, x):
        x = _check_point(x, None)
        return float(np.linalg.norm(x - self.apply(x)))


class SubgradientProjection(Cutter):
    """Subgradient projector of a differentiable convex f with nonempty {f <= 0}.

    T(x) = x - f(x)/||grad f(x)||^2 * grad f(x) when f(x) > 0, identity
    otherwise; the fixed-point set is exactly {x : f(x) <= 0}.
    """

    kind = "subgradient_projection"

    def __init__(self, f):
        if not (hasattr(f, "value") and hasattr(f, "grad")):
            raise InvalidCutter("subgradient projection needs a function with value and grad")
        self.f = f

    @property
    def dim(self):
        return self.f.dim

    def apply(self, x):
        x = _check_point(x, self.dim)
        fx = self.f.value(x)
        if fx <= LEVEL_ZERO_TOL:
            return x
        g = self.f.grad(x)
        gg = float(np.dot(g, g))
        if math.sqrt(gg) <= _GRAD_ZERO_TOL:
            raise ZeroGradientAtPositiveValue(
                f"gradient vanished at f(x) = {fx}; the zero-sublevel set is empty there"
            )
        return x - (fx / gg) * g

    def level_value(self, x):
        """f(x); the fixed-point set is its zero-sublevel set."""
        return self.f.value(_check_point(x, self.dim))

    def fixed_point_distance(self, x):
        x = _check_point(x, self.dim)
        if isinstance(self.f, BallQuadratic):
            return max(0.0, float(np.linalg.norm(x - self.f.center)) - self.f.radius)
        if isinstance(self.f, AffineFunction):
            return max(0.0, self.f.value(x)) / float(np.linalg.norm(self.f.a))
        return None


class Resolvent(Cutter):
    """(Id + gamma A)^{-1} for A the subdifferential of a proxable g.

    Evaluates as prox_{gamma g}; the fixed-point set is argmin g.
    """

    kind = "resolvent"

    def __init__(self, g, gamma):
        if not hasattr(g, "prox"):
            raise InvalidCutter("resolvent needs a function with a prox method")
        self.g = g
        self.gamma = float(gamma)
        if self.gamma <= 0:
            raise InvalidCutter("gamma must be positive")

    @property
    def dim(self):
        return getattr(self.g, "dim", None)

    def apply(self, x):
        return self.g.prox(_check_point(x, self.dim), self.gamma)
