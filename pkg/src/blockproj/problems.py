"""Problem files (JSON) and reproducible instance generators.

The file format is plain JSON: ``dimension``, ``cutters`` (array of operator
encodings), ``x0``, ``sigma`` (positive number or the string "infinity"),
optional ``witness`` and ``cost``.  Numbers round-trip exactly: floats are
emitted via Python's shortest-repr encoder, which preserves all 64 bits.
"""

import json

import numpy as np

from .core import (
    INFINITE_SIGMA,
    DimensionMismatch,
    ParseError,
    UnknownCutterKind,
    sigma_is_finite,
)
from .cutters import (
    AbsSum,
    AffineFunction,
    Ball,
    BallQuadratic,
    Box,
    Halfspace,
    Hyperplane,
    L1Ball,
    QuadraticFunction,
    Resolvent,
    SetIndicator,
    SquaredNorm,
    SubgradientProjection,
)
from .solver import Problem, sigma_from_ball, sigma_from_l1


# ---------------------------------------------------------------------------
# JSON helpers

def _get(obj, key, path, required=True):
    if not isinstance(obj, dict):
        raise ParseError(f"{path}: expected an object")
    if key not in obj:
        if required:
            raise ParseError(f"{path}.{key}: missing required field")
        return None
    return obj[key]

def _floats(value, path):
    if not isinstance(value, list) or not value:
        raise ParseError(f"{path}: expected a nonempty array of numbers")
    try:
        return [float(v) for v in value]
    except (TypeError, ValueError):
        raise ParseError(f"{path}: expected numbers")

def _float(value, path):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"{path}: expected a number")
    return float(value)


# ---------------------------------------------------------------------------
# function codecs

def function_to_json(fn):
    if isinstance(fn, AffineFunction):
        return {"form": "affine", "a": [float(v) for v in fn.a], "b": fn.b}
    if isinstance(fn, QuadraticFunction):
        return {
            "form": "quadratic",
            "Q": [[float(v) for v in row] for row in fn.Q],
            "c": [float(v) for v in fn.c],
            "d": fn.d,
        }
    if isinstance(fn, BallQuadratic):
        return {
            "form": "norm_squared_minus",
            "center": [float(v) for v in fn.center],
            "radius": fn.radius,
        }
    if isinstance(fn, AbsSum):
        return {"form": "abs_sum"}
    if isinstance(fn, SquaredNorm):
        return {"form": "squared_norm"}
    if isinstance(fn, SetIndicator):
        return {"form": "indicator", "set": cutter_to_json(fn.set_cutter)}
    raise UnknownCutterKind(f"cannot encode function {fn!r}")


def function_from_json(obj, path="cost"):
    form = _get(obj, "form", path)
    if form == "affine":
        return AffineFunction(_floats(_get(obj, "a", path), f"{path}.a"),
                              _float(_get(obj, "b", path), f"{path}.b"))
    if form == "quadratic":
        q = _get(obj, "Q", path)
        if not isinstance(q, list):
            raise ParseError(f"{path}.Q: expected a matrix")
        return QuadraticFunction(q, _floats(_get(obj, "c", path), f"{path}.c"),
                                 _float(_get(obj, "d", path), f"{path}.d"))
    if form == "norm_squared_minus":
        return BallQuadratic(_floats(_get(obj, "center", path), f"{path}.center"),
                             _float(_get(obj, "radius", path), f"{path}.radius"))
    if form == "abs_sum":
        return AbsSum()
    if form == "squared_norm":
        return SquaredNorm()
    if form == "indicator":
        return SetIndicator(cutter_from_json(_get(obj, "set", path), f"{path}.set"))
    raise UnknownCutterKind(f"{path}.form: unknown function form {form!r}")


# ---------------------------------------------------------------------------
# cutter codecs

def cutter_to_json(cutter):
    if isinstance(cutter, Halfspace):
        return {"type": "halfspace", "a": [float(v) for v in cutter.a], "b": cutter.b}
    if isinstance(cutter, Hyperplane):
        return {"type": "hyperplane", "a": [float(v) for v in cutter.a], "b": cutter.b}
    if isinstance(cutter, Ball):
        return {"type": "ball", "center": [float(v) for v in cutter.center],
                "radius": cutter.radius}
    if isinstance(cutter, Box):
        return {"type": "box", "lo": [float(v) for v in cutter.lo],
                "hi": [float(v) for v in cutter.hi]}
    if isinstance(cutter, L1Ball):
        return {"type": "l1_ball", "radius": cutter.radius}
    if isinstance(cutter, SubgradientProjection):
        return {"type": "subgradient_projection", "f": function_to_json(cutter.f)}
    if isinstance(cutter, Resolvent):
        return {"type": "resolvent", "g": function_to_json(cutter.g), "gamma": cutter.gamma}
    raise UnknownCutterKind(f"cannot encode cutter {cutter!r}")


def cutter_from_json(obj, path="cutter"):
    kind = _get(obj, "type", path)
    if kind == "halfspace":
        return Halfspace(_floats(_get(obj, "a", path), f"{path}.a"),
                         _float(_get(obj, "b", path), f"{path}.b"))
    if kind == "hyperplane":
        return Hyperplane(_floats(_get(obj, "a", path), f"{path}.a"),
                          _float(_get(obj, "b", path), f"{path}.b"))
    if kind == "ball":
        return Ball(_floats(_get(obj, "center", path), f"{path}.center"),
                    _float(_get(obj, "radius", path), f"{path}.radius"))
    if kind == "box":
        return Box(_floats(_get(obj, "lo", path), f"{path}.lo"),
                   _floats(_get(obj, "hi", path), f"{path}.hi"))
    if kind == "l1_ball":
        return L1Ball(_float(_get(obj, "radius", path), f"{path}.radius"))
    if kind == "subgradient_projection":
        return SubgradientProjection(function_from_json(_get(obj, "f", path), f"{path}.f"))
    if kind == "resolvent":
        return Resolvent(function_from_json(_get(obj, "g", path), f"{path}.g"),
                         _float(_get(obj, "gamma", path), f"{path}.gamma"))
    raise UnknownCutterKind(f"{path}.type: unknown cutter kind {kind!r}")


# ---------------------------------------------------------------------------
# problem codecs

def problem_to_json(problem):
    doc = {
        "dimension": problem.dimension,
        "cutters": [cutter_to_json(c) for c in problem.cutters],
        "x0": [float(v) for v in problem.x0],
        "sigma": problem.sigma if sigma_is_finite(problem.sigma) else "infinity",
    }
    if problem.witness is not None:
        doc["witness"] = [float(v) for v in problem.witness]
    if problem.cost is not None:
        doc["cost"] = function_to_json(problem.cost)
    return doc


def problem_from_json(obj, path="problem"):
    dimension = _get(obj, "dimension", path)
    if isinstance(dimension, bool) or not isinstance(dimension, int) or dimension < 1:
        raise ParseError(f"{path}.dimension: expected a positive integer")
    raw_cutters = _get(obj, "cutters", path)
    if not isinstance(raw_cutters, list) or not raw_cutters:
        raise ParseError(f"{path}.cutters: expected a nonempty array")
    cutters = [cutter_from_json(c, f"{path}.cutters[{i}]") for i, c in enumerate(raw_cutters)]
    x0 = _floats(_get(obj, "x0", path), f"{path}.x0")
    raw_sigma = _get(obj, "sigma", path)
    if raw_sigma == "infinity":
        sigma = INFINITE_SIGMA
    else:
        sigma = _float(raw_sigma, f"{path}.sigma")
    witness = _get(obj, "witness", path, required=False)
    if witness is not None:
        witness = _floats(witness, f"{path}.witness")
    cost = _get(obj, "cost", path, required=False)
    if cost is not None:
        cost = function_from_json(cost, f"{path}.cost")
    for i, c in enumerate(cutters):
        if c.dim is not None and c.dim != dimension:
            raise DimensionMismatch(
                f"{path}.cutters[{i}]: dimension {c.dim} does not match {path}.dimension {dimension}"
            )
    if len(x0) != dimension:
        raise DimensionMismatch(f"{path}.x0: dimension {len(x0)} does not match {dimension}")
    if witness is not None and len(witness) != dimension:
        raise DimensionMismatch(f"{path}.witness: dimension {len(witness)} does not match {dimension}")
    return Problem(dimension, cutters, x0, sigma, witness=witness, cost=cost)


def load_problem(path):
    """Read and fully validate a problem file; diagnostics carry field paths."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read problem file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON in {path}: {exc}") from exc
    return problem_from_json(obj)


def save_problem(problem, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(problem_to_json(problem), fh, indent=2)
        fh.write("\n")


# ---------------------------------------------------------------------------
# generators

def _unit(rng, n):
    v = rng.standard_normal(n)
    nrm = float(np.linalg.norm(v))
    while nrm == 0.0:
        v = rng.standard_normal(n)
        nrm = float(np.linalg.norm(v))
    return v / nrm


def _uniform_ball(rng, n, radius):
    return _unit(rng, n) * radius * rng.uniform() ** (1.0 / n)


def gen_linear_feasibility(seed, m, n, radius, margin=1.0):
    """Random halfspaces with a strictly interior witness.

    Each halfspace {x : <a_i, x> <= b_i} has a unit normal and slack
    b_i - <a_i, q*> drawn in [0.01, 1], so the witness q* is interior by at
    least 0.01 and usable for monotonicity audits; x0 is drawn outside a
    fair share of the halfspaces.
    """
    if m < 1 or n < 1:
        raise ValueError("need m >= 1 and n >= 1")
    rng = np.random.default_rng(seed)
    q = _uniform_ball(rng, n, float(radius))
    cutters = []
    for _ in range(m):
        a = _unit(rng, n)
        cutters.append(Halfspace(a, float(np.dot(a, q)) + rng.uniform(0.01, 1.0)))
    while True:
        x0 = q + rng.uniform(radius + 2.0, 2.0 * radius + 4.0) * _unit(rng, n)
        violated = sum(1 for c in cutters if c.residual(x0) > 1e-9)
        if violated >= max(1, m // 4):
            break
    # witness-based bound: d(x0, Q) <= ||x0 - q|| since q lies in Q; the unit
    # slack keeps the estimate conservative
    sigma = sigma_from_ball(q, 1.0, x0, margin)
    return Problem(n, cutters, x0, sigma, witness=q)


def gen_disc_intersection(seed, m, n=2, overlap=0.5, margin=1.0):
    """Overlapping discs sharing an interior witness (bounded solution set)."""
    if m < 2:
        raise ValueError("need m >= 2 discs")
    if overlap <= 0:
        raise ValueError("overlap must be positive")
    rng = np.random.default_rng(seed)
    q = rng.uniform(-3.0, 3.0, int(n))
    cutters = []
    for _ in range(m):
        delta = rng.uniform(0.0, float(overlap)) * _unit(rng, n)
        center = q + delta
        radius = float(np.linalg.norm(delta)) + 0.25 + rng.uniform(0.0, 0.75)
        cutters.append(Ball(center, radius))
    top = max(c.radius for c in cutters)
    x0 = q + (top + rng.uniform(1.0, 3.0)) * _unit(rng, n)
    # the whole solution set sits inside the first disc
    sigma = sigma_from_ball(cutters[0].center, cutters[0].radius, x0, margin)
    return Problem(int(n), cutters, x0, sigma, witness=q)


def gen_l1_constrained(seed, s, n, epsilon, margin=1.0):
    """Consistent linear system plus an l1-ball constraint, with an l1 cost.

    The planted solution has l1 norm at most 0.9 epsilon, so it is strictly
    feasible for the ball; row right-hand sides reuse the exact dot products
    so the witness residuals are identically zero.
    """
    if s < 1 or n < 1:
        raise ValueError("need s >= 1 and n >= 1")
    epsilon = float(epsilon)
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n)
    xstar = v * (0.9 * epsilon * rng.uniform(0.3, 1.0) / float(np.sum(np.abs(v))))
    rows = rng.standard_normal((s, n))
    cutters = [Hyperplane(rows[i], float(np.dot(rows[i], xstar))) for i in range(s)]
    cutters.append(L1Ball(epsilon))
    x0 = rng.standard_normal(n)
    x0 *= epsilon / float(np.linalg.norm(x0))
    sigma = sigma_from_l1(x0, epsilon, margin)
    return Problem(n, cutters, x0, sigma, witness=xstar, cost=AbsSum())
