"""Randomized property suites for the solver's monotonicity and convergence
guarantees.

Each trial is reproducible from its seed state; suites aggregate pass/fail
counts, the worst violation seen, and coverage accounting over operator
kinds and control regimes.  Monotonicity trials use projection-kind
operators because those admit exact fixed-point samples; the other kinds are
exercised by the separator/quasi-nonexpansivity sweep, which can construct
certified fixed points for every implemented kind.
"""

from dataclasses import dataclass

import numpy as np

from .core import INFINITE_SIGMA, LambdaSchedule, RunStatus, SolverConfig
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
from .perturbation import RandomDirectionPolicy, ZeroPolicy, budget, theta_budget
from .problems import gen_linear_feasibility
from .solver import (
    MaxIterations,
    Problem,
    ResidualBelow,
    fejer_audit,
    run,
    sigma_from_ball,
)
from .weights import (
    BlockClassicalCyclic,
    BlockGeneralized,
    SequentialAlmostCyclic,
    SequentialCyclic,
    SequentialRepetitive,
    SimultaneousDrifting,
    SimultaneousUniform,
)

INEQUALITY_TOL = 1e-10  # absolute slack for desk-scale inequality checks


@dataclass(frozen=True)
class TrialOutcome:
    inputs_digest: str
    lhs: float
    rhs: float
    violation: float
    passed: bool


# ---------------------------------------------------------------------------
# random instances and fixed-point samples

def _unit(rng, n):
    v = rng.standard_normal(n)
    nrm = float(np.linalg.norm(v))
    while nrm == 0.0:
        v = rng.standard_normal(n)
        nrm = float(np.linalg.norm(v))
    return v / nrm


PROJECTION_KINDS = ("halfspace", "hyperplane", "ball", "box", "l1_ball")

ALL_KINDS = PROJECTION_KINDS + (
    "subgradient_affine",
    "subgradient_ball",
    "subgradient_quadratic",
    "resolvent_abs_sum",
    "resolvent_squared_norm",
    "resolvent_indicator",
)


def draw_cutter(rng, label, ndim):
    """One random operator of the named kind in R^ndim."""
    if label == "halfspace":
        return Halfspace(_unit(rng, ndim), rng.uniform(-3, 3))
    if label == "hyperplane":
        return Hyperplane(_unit(rng, ndim), rng.uniform(-3, 3))
    if label == "ball":
        return Ball(rng.uniform(-3, 3, ndim), rng.uniform(0.5, 3.0))
    if label == "box":
        lo = rng.uniform(-3, 0, ndim)
        return Box(lo, lo + rng.uniform(0.1, 3.0, ndim))
    if label == "l1_ball":
        return L1Ball(rng.uniform(0.5, 3.0))
    if label == "subgradient_affine":
        return SubgradientProjection(AffineFunction(_unit(rng, ndim), rng.uniform(-3, 3)))
    if label == "subgradient_ball":
        return SubgradientProjection(
            BallQuadratic(rng.uniform(-3, 3, ndim), rng.uniform(0.5, 3.0))
        )
    if label == "subgradient_quadratic":
        m = rng.standard_normal((ndim, ndim))
        q_mat = m.T @ m + 0.2 * np.eye(ndim)
        anchor = rng.uniform(-2, 2, ndim)
        depth = rng.uniform(0.1, 2.0)
        # f(x) = (x - anchor)^T Q (x - anchor) - depth, in expanded form
        c = -2.0 * (q_mat @ anchor)
        d = float(anchor @ q_mat @ anchor) - depth
        return SubgradientProjection(QuadraticFunction(q_mat, c, d))
    if label == "resolvent_abs_sum":
        return Resolvent(AbsSum(), rng.uniform(0.2, 2.0))
    if label == "resolvent_squared_norm":
        return Resolvent(SquaredNorm(), rng.uniform(0.2, 2.0))
    if label == "resolvent_indicator":
        return Resolvent(
            SetIndicator(Ball(rng.uniform(-3, 3, ndim), rng.uniform(0.5, 3.0))),
            rng.uniform(0.2, 2.0),
        )
    raise ValueError(f"unknown kind label {label!r}")


def sample_fixed_point(cutter, rng, ndim=None):
    """A certified point of Fix(T) for any implemented kind."""
    if isinstance(cutter, Halfspace):
        z = cutter.apply(rng.uniform(-4, 4, cutter.dim))
        return z - rng.uniform(0, 2) * cutter.a / float(np.linalg.norm(cutter.a))
    if isinstance(cutter, Hyperplane):
        return cutter.apply(rng.uniform(-4, 4, cutter.dim))
    if isinstance(cutter, Ball):
        return cutter.center + rng.uniform(0, cutter.radius) * _unit(rng, cutter.dim)
    if isinstance(cutter, Box):
        return rng.uniform(cutter.lo, cutter.hi)
    if isinstance(cutter, L1Ball):
        z = rng.standard_normal(ndim)
        return z * (cutter.radius * rng.uniform() / float(np.sum(np.abs(z))))
    if isinstance(cutter, SubgradientProjection):
        f = cutter.f
        if isinstance(f, BallQuadratic):
            return f.center + rng.uniform(0, f.radius) * _unit(rng, f.dim)
        if isinstance(f, AffineFunction):
            z = rng.uniform(-4, 4, f.dim)
            z = z - (max(0.0, f.value(z)) / float(np.dot(f.a, f.a))) * f.a
            return z - rng.uniform(0, 2) * f.a / float(np.linalg.norm(f.a))
        if isinstance(f, QuadraticFunction):
            anchor = np.linalg.solve(2.0 * f.Q, -f.c)
            depth = -f.value(anchor)
            if depth < 0:
                raise ValueError("quadratic sublevel set is empty at its minimizer")
            direction = _unit(rng, f.dim)
            curvature = float(direction @ f.Q @ direction)
            reach = np.sqrt(depth / curvature) if curvature > 0 else 2.0
            return anchor + rng.uniform(0.0, reach) * direction
    if isinstance(cutter, Resolvent):
        if isinstance(cutter.g, (AbsSum, SquaredNorm)):
            return np.zeros(ndim)
        if isinstance(cutter.g, SetIndicator):
            return sample_fixed_point(cutter.g.set_cutter, rng, ndim)
    raise ValueError(f"no fixed-point sampler for {cutter!r}")


def _sample_exterior_point(cutter, rng, ndim, min_residual=1e-6):
    for _ in range(1000):
        x = rng.uniform(-6, 6, ndim)
        if cutter.residual(x) > min_residual:
            return x
    raise RuntimeError(f"could not draw a point outside Fix for {cutter!r}")


# ---------------------------------------------------------------------------
# trials

def perturbed_fejer_trial(rng_state):
    """Relaxed step plus a boundary-sized perturbation never moves away
    from a fixed point (checked at the exact budget boundary)."""
    rng = np.random.default_rng(rng_state)
    ndim = int(rng.integers(1, 7))
    label = PROJECTION_KINDS[int(rng.integers(len(PROJECTION_KINDS)))]
    cutter = draw_cutter(rng, label, ndim)
    x = rng.uniform(-6, 6, ndim)
    q = sample_fixed_point(cutter, rng, ndim)
    lam = rng.uniform(0.0, 2.0)
    tx = cutter.apply(x)
    residual = float(np.linalg.norm(tx - x))
    anchor = float(np.linalg.norm(x - q))
    radius = theta_budget(1.0, lam, residual, anchor)
    e = radius * _unit(rng, ndim) if radius > 0 else np.zeros(ndim)
    y = x + lam * (tx - x) + e
    lhs = float(np.linalg.norm(y - q))
    rhs = anchor
    violation = max(0.0, lhs - rhs - INEQUALITY_TOL)
    digest = f"perturbed_fejer[{rng_state!r}] kind={label} n={ndim} lam={lam:.6f}"
    return TrialOutcome(digest, lhs, rhs, violation, violation == 0.0)


def strict_fejer_trial(rng_state):
    """With x not fixed, lam away from the endpoints and the perturbation
    strictly inside the budget, the distance decrease is strict."""
    rng = np.random.default_rng(rng_state)
    ndim = int(rng.integers(1, 7))
    label = PROJECTION_KINDS[int(rng.integers(len(PROJECTION_KINDS)))]
    cutter = draw_cutter(rng, label, ndim)
    # residual floor keeps the guaranteed decrease above float resolution
    x = _sample_exterior_point(cutter, rng, ndim, min_residual=1e-3)
    q = sample_fixed_point(cutter, rng, ndim)
    lam = rng.uniform(0.05, 1.95)
    tx = cutter.apply(x)
    residual = float(np.linalg.norm(tx - x))
    anchor = float(np.linalg.norm(x - q))
    radius = 0.99 * theta_budget(1.0, lam, residual, anchor)
    e = radius * _unit(rng, ndim) if radius > 0 else np.zeros(ndim)
    y = x + lam * (tx - x) + e
    lhs = float(np.linalg.norm(y - q))
    rhs = anchor
    violation = max(0.0, lhs - rhs)
    digest = f"strict_fejer[{rng_state!r}] kind={label} n={ndim} lam={lam:.6f}"
    return TrialOutcome(digest, lhs, rhs, violation, lhs < rhs)


def cutter_trial(rng_state):
    """Separator inequality, quasi-nonexpansivity, and idempotence of the
    projection kinds, for one random operator/point/fixed-point triple."""
    rng = np.random.default_rng(rng_state)
    ndim = int(rng.integers(1, 7))
    label = ALL_KINDS[int(rng.integers(len(ALL_KINDS)))]
    cutter = draw_cutter(rng, label, ndim)
    x = rng.uniform(-6, 6, ndim)
    q = sample_fixed_point(cutter, rng, ndim)
    separator = cutter.check_separator(x, q)
    violation = max(0.0, separator - INEQUALITY_TOL)
    tx = cutter.apply(x)
    quasi = float(np.linalg.norm(tx - q)) - float(np.linalg.norm(x - q))
    violation = max(violation, quasi - INEQUALITY_TOL)
    if cutter.is_projection:
        idem = float(np.linalg.norm(cutter.apply(tx) - tx))
        violation = max(violation, idem - INEQUALITY_TOL)
    digest = f"cutter[{rng_state!r}] kind={label} n={ndim}"
    return TrialOutcome(digest, separator, 0.0, max(0.0, violation), violation <= 0.0)


def budget_trial(rng_state):
    """Budget algebra: the quadratic bound, the anchor identity, exact
    vanishing at the degenerate parameters (including infinite sigma), and
    homogeneity in theta."""
    rng = np.random.default_rng(rng_state)
    pick = rng.uniform()
    if pick < 0.1:
        lam = float(rng.choice([0.0, 2.0]))
    else:
        lam = rng.uniform(0.0, 2.0)
    residual = 0.0 if rng.uniform() < 0.1 else rng.uniform(1e-6, 5.0)
    infinite = rng.uniform() < 0.1
    sigma = INFINITE_SIGMA if infinite else rng.uniform(0.1, 10.0)
    t = budget(lam, residual, sigma)
    violation = 0.0
    quad = 0.0
    if not infinite:
        alpha1 = lam * residual + 2.0 * sigma
        alpha2 = lam * (2.0 - lam) * residual ** 2
        quad = t * t + 2.0 * alpha1 * t - alpha2
        violation = max(violation, quad - INEQUALITY_TOL)
        mirror = theta_budget(0.5, lam, residual, 2.0 * sigma)
        violation = max(violation, abs(t - mirror) - 1e-12)
        theta = rng.uniform(0.0, 2.0)
        h1 = theta_budget(2.0 * theta, lam, residual, 2.0 * sigma)
        h2 = 2.0 * theta_budget(theta, lam, residual, 2.0 * sigma)
        violation = max(violation, abs(h1 - h2) - 1e-15 * max(1.0, abs(h2)))
    degenerate = lam == 0.0 or lam == 2.0 or residual == 0.0 or infinite
    if degenerate != (t == 0.0):
        violation = max(violation, abs(t) if t != 0.0 else 1.0)
    digest = (
        f"budget[{rng_state!r}] lam={lam:.6f} r={residual:.6f}"
        f" sigma={'inf' if infinite else f'{sigma:.6f}'}"
    )
    return TrialOutcome(digest, quad, 0.0, max(0.0, violation), violation <= 0.0)


# ---------------------------------------------------------------------------
# solver-level trials

_EXTRA_REGIMES = ("almost_cyclic", "repetitive", "drifting", "block_classical")


def _extra_schedule(name, m, seed):
    if name == "almost_cyclic":
        return SequentialAlmostCyclic(m, m + 3, order_seed=seed)
    if name == "repetitive":
        # fixed repetitive control: two sweeps interleaved
        table = list(range(m)) + list(range(m - 1, -1, -1))
        return SequentialRepetitive(m, table)
    if name == "drifting":
        return SimultaneousDrifting(m)
    if name == "block_classical":
        cut = max(1, m // 2)
        return BlockClassicalCyclic(m, [list(range(cut)), list(range(cut, m))])
    raise ValueError(f"unknown extra regime {name!r}")


def convergence_trial(instance_seed, extra_regime=None):
    """Solve one random linear-feasibility instance under the four reference
    configurations (and optionally one extra control regime).

    Checks, per run: the residual target is reached before the iteration
    cap, every iterate stays within 2 sigma of the start, and distances to
    the witness never increase.  Returns one outcome per configuration.
    """
    problem = gen_linear_feasibility(instance_seed, 20, 10, 5)
    m = problem.m
    sigma = problem.sigma
    configs = [
        ("cyclic+zero", SequentialCyclic(m), ZeroPolicy(), 1e-6, 50_000),
        ("simultaneous+zero", SimultaneousUniform(m), ZeroPolicy(), 1e-6, 50_000),
        ("cyclic+random", SequentialCyclic(m), RandomDirectionPolicy(0.99), 1e-4, 200_000),
        ("simultaneous+random", SimultaneousUniform(m), RandomDirectionPolicy(0.99), 1e-4, 200_000),
    ]
    if extra_regime is not None:
        configs.append(
            (f"{extra_regime}+zero", _extra_schedule(extra_regime, m, instance_seed),
             ZeroPolicy(), 1e-6, 50_000)
        )
    outcomes = []
    for name, schedule, policy, tol, cap in configs:
        config = SolverConfig(
            tau1=0.5,
            tau2=0.5,
            lambda_schedule=LambdaSchedule(1.0),
            max_iterations=cap,
            residual_tolerance=tol,
            seed=instance_seed,
        )
        result = run(problem, config, schedule, policy)
        lhs = result.trace[-1].max_residual
        violation = max(0.0, lhs - tol)
        bound = 2.0 * sigma + 1e-8
        drift = max(rec.distance_from_start for rec in result.trace)
        violation = max(violation, drift - bound)
        audit = fejer_audit(result.trace, problem.witness)
        violation = max(violation, audit - INEQUALITY_TOL)
        converged = result.status is RunStatus.RESIDUAL_CONVERGED
        note = "" if converged else " INCONCLUSIVE(cap reached)"
        digest = (
            f"convergence[seed={instance_seed}] {name} iters={result.iterations_used}"
            f" audit={audit:.3e}{note}"
        )
        outcomes.append(TrialOutcome(digest, lhs, tol, max(0.0, violation),
                                     converged and violation <= 0.0))
    return outcomes


def qhat_instance(instance_seed):
    """Three cutters in the plane whose first two fixed-point sets strictly
    contain the full intersection: a slab and a disc inside it."""
    rng = np.random.default_rng(instance_seed)
    shift = rng.uniform(-0.2, 0.2)
    center = np.array([0.0, 3.0 + shift])
    disc = Ball(center, 1.5)
    cutters = (Halfspace([1.0, 0.0], 1.0), Halfspace([-1.0, 0.0], 1.0), disc)
    # start below the disc and outside the slab, so the slab genuinely acts
    # while the vanishing disc weights leave the limit well outside the disc
    x0 = np.array([3.0 + rng.uniform(0.0, 1.0), -4.0])
    sigma = sigma_from_ball(center, 1.5, x0, 1.0)
    return Problem(2, cutters, x0, sigma, witness=center)


def summable_last_index_schedule(m):
    """All indices every iteration, but the last one with weight 2^-(k+1)
    (a summable series); the rest share the remainder uniformly."""

    def weights_fn(k, block):
        tail = 2.0 ** (-(k + 1))
        w = np.full(len(block), (1.0 - tail) / (len(block) - 1))
        w[-1] = tail
        return w

    return BlockGeneralized(m, lambda k: tuple(range(m)), weights_fn)


def qhat_trial(instance_seed):
    """Summable weights exempt their index from the limit's feasibility;
    all-divergent weights on the same instance land in the full
    intersection.  Returns both outcomes; the first digest records the
    (unasserted) distance to the exempted set."""
    problem = qhat_instance(instance_seed)
    config = SolverConfig(lambda_schedule=LambdaSchedule(1.0), max_iterations=4000,
                          seed=instance_seed)
    summable = run(problem, config, summable_last_index_schedule(3), ZeroPolicy(),
                   stopping=[MaxIterations(4000)])
    limit = summable.final_point
    d = [c.fixed_point_distance(limit) for c in problem.cutters]
    lhs = max(d[0], d[1])
    violation = max(0.0, lhs - 1e-5)
    digest = (
        f"qhat[seed={instance_seed}] summable d(limit,Q1)={d[0]:.3e}"
        f" d(limit,Q2)={d[1]:.3e} d(limit,Q3)={d[2]:.3e} (Q3 not asserted)"
    )
    first = TrialOutcome(digest, lhs, 1e-5, violation, violation == 0.0)

    divergent = run(problem, config, SimultaneousUniform(3), ZeroPolicy(),
                    stopping=[ResidualBelow(1e-8)])
    limit2 = divergent.final_point
    d2 = [c.fixed_point_distance(limit2) for c in problem.cutters]
    lhs2 = max(d2)
    violation2 = max(0.0, lhs2 - 1e-5)
    digest2 = f"qhat[seed={instance_seed}] divergent max_d={lhs2:.3e}"
    second = TrialOutcome(digest2, lhs2, 1e-5, violation2, violation2 == 0.0)
    return [first, second]


# ---------------------------------------------------------------------------
# suites

@dataclass(frozen=True)
class SuiteReport:
    suite: str
    trials: int
    passes: int
    failures: int
    worst_violation: float
    coverage: dict
    failed_digests: tuple

    @property
    def all_passed(self):
        return self.failures == 0


def _kind_of(digest):
    for token in digest.split():
        if token.startswith("kind="):
            return token[5:]
    return None


def _summarize(suite, outcomes, coverage):
    failures = [o for o in outcomes if not o.passed]
    worst = max((o.violation for o in outcomes), default=0.0)
    return SuiteReport(
        suite=suite,
        trials=len(outcomes),
        passes=len(outcomes) - len(failures),
        failures=len(failures),
        worst_violation=worst,
        coverage=dict(coverage),
        failed_digests=tuple(o.inputs_digest for o in failures[:20]),
    )


def _count(coverage, key):
    coverage[key] = coverage.get(key, 0) + 1


def run_fejer_suite(trials, seed):
    """Boundary-budget monotonicity and strict-decrease sweeps."""
    outcomes, coverage = [], {}
    for t in range(trials):
        out = perturbed_fejer_trial([seed, t])
        _count(coverage, _kind_of(out.inputs_digest))
        outcomes.append(out)
        out = strict_fejer_trial([seed, trials + t])
        _count(coverage, _kind_of(out.inputs_digest))
        outcomes.append(out)
    return _summarize("fejer", outcomes, coverage)


def run_cutter_suite(trials, seed):
    outcomes, coverage = [], {}
    for t in range(trials):
        out = cutter_trial([seed, t])
        _count(coverage, _kind_of(out.inputs_digest))
        outcomes.append(out)
    return _summarize("cutter", outcomes, coverage)


def run_budget_suite(trials, seed):
    outcomes = []
    for t in range(trials):
        outcomes.append(budget_trial([seed, t]))
    return _summarize("budget", outcomes, {"budget": trials})


def run_convergence_suite(trials, seed):
    """One linear-feasibility instance per trial; rotates one extra control
    regime through the trials on top of the four reference configurations."""
    outcomes, coverage = [], {}
    for t in range(trials):
        extra = _EXTRA_REGIMES[t % len(_EXTRA_REGIMES)]
        for out in convergence_trial(seed + t, extra_regime=extra):
            outcomes.append(out)
        _count(coverage, "regime:sequential_cyclic")
        _count(coverage, "regime:simultaneous_uniform")
        _count(coverage, f"regime:{_extra_schedule(extra, 2, 0).regime}")
    return _summarize("convergence", outcomes, coverage)


def run_qhat_suite(trials, seed):
    outcomes, coverage = [], {}
    for t in range(trials):
        for out in qhat_trial(seed + t):
            outcomes.append(out)
        _count(coverage, "regime:block_generalized")
        _count(coverage, "regime:simultaneous_uniform")
    return _summarize("qhat", outcomes, coverage)


SUITES = {
    "fejer": run_fejer_suite,
    "cutter": run_cutter_suite,
    "budget": run_budget_suite,
    "convergence": run_convergence_suite,
    "qhat": run_qhat_suite,
}
