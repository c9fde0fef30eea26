"""Weight schedules over the operator index set: one vector w_k per iteration.

The support pattern of w_k encodes the control regime: sequential (one
positive weight), simultaneous (all positive) or block-iterative (positive
exactly on a selected subset).  All indices are 0-based here; file formats
use 1-based indices (see cli).
"""

import numpy as np

from .core import InvalidSchedule

_SUM_TOL = 1e-12


class WeightSchedule:
    """Base class: deterministic map from iteration index k to a weight vector."""

    regime = "abstract"

    def __init__(self, m):
        m = int(m)
        if m < 1:
            raise InvalidSchedule("need at least one operator")
        self.m = m

    def weights_at(self, k):
        """Weight vector at iteration k: nonnegative entries summing to 1."""
        k = int(k)
        if k < 0:
            raise InvalidSchedule("iteration index must be nonnegative")
        w = np.asarray(self._weights(k), dtype=float)
        if w.shape != (self.m,):
            raise InvalidSchedule(f"schedule produced shape {w.shape}, expected ({self.m},)")
        if np.any(w < 0) or np.any(w > 1) or abs(float(w.sum()) - 1.0) > _SUM_TOL:
            raise InvalidSchedule(f"invalid weight vector at k={k}: {w}")
        return w

    def divergence_profile(self, horizon):
        """Partial sums sum_{k<horizon} w_k(i) per index.

        Indices whose partial sums keep growing with the horizon are the
        empirically-divergent ones; the limit point is only guaranteed to be
        feasible for those.
        """
        horizon = int(horizon)
        if horizon < 1:
            raise InvalidSchedule("horizon must be >= 1")
        total = np.zeros(self.m)
        for k in range(horizon):
            total += self.weights_at(k)
        return total

    def _weights(self, k):
        raise NotImplementedError


class SequentialCyclic(WeightSchedule):
    """Weight 1 on index k mod m: the classical cyclic control."""

    regime = "sequential_cyclic"

    def _weights(self, k):
        w = np.zeros(self.m)
        w[k % self.m] = 1.0
        return w


class SequentialAlmostCyclic(WeightSchedule):
    """Every index appears at least once in each window of ``period_bound``.

    Window order is a seeded shuffle: a permutation of all indices padded
    with random repeats, reshuffled per window, derived from
    (order_seed, window) only.
    """

    regime = "sequential_almost_cyclic"

    def __init__(self, m, period_bound, order_seed=0):
        super().__init__(m)
        self.period_bound = int(period_bound)
        self.order_seed = int(order_seed)
        if self.period_bound < self.m:
            raise InvalidSchedule("period_bound must be >= number of operators")

    def _window_order(self, window):
        rng = np.random.default_rng([self.order_seed, window])
        order = np.concatenate(
            [rng.permutation(self.m), rng.integers(0, self.m, self.period_bound - self.m)]
        )
        rng.shuffle(order)
        return order

    def _weights(self, k):
        window, offset = divmod(k, self.period_bound)
        w = np.zeros(self.m)
        w[self._window_order(window)[offset]] = 1.0
        return w


class SequentialRepetitive(WeightSchedule):
    """Weight 1 on control(k); the caller asserts the control is repetitive.

    ``control`` is a callable k -> index or a finite sequence that is cycled.
    """

    regime = "sequential_repetitive"

    def __init__(self, m, control):
        super().__init__(m)
        if callable(control):
            self.control = control
            self.control_table = None
        else:
            table = tuple(int(i) for i in control)
            if not table:
                raise InvalidSchedule("control table must be nonempty")
            self.control_table = table
            self.control = lambda k: table[k % len(table)]

    def _weights(self, k):
        i = int(self.control(k))
        if not 0 <= i < self.m:
            raise InvalidSchedule(f"control returned index {i} outside 0..{self.m - 1}")
        w = np.zeros(self.m)
        w[i] = 1.0
        return w


class SimultaneousUniform(WeightSchedule):
    """All operators every iteration, equal weights 1/m."""

    regime = "simultaneous_uniform"

    def _weights(self, k):
        return np.full(self.m, 1.0 / self.m)


class SimultaneousDrifting(WeightSchedule):
    """Weights 1/(mk+m) everywhere except a drifting index i_k.

    The exceptional index receives (mk+1)/(mk+m), so the vector sums to 1
    exactly while every index keeps w_k(i) >= 1/(mk+m), a divergent series:
    the limit is feasible for every operator regardless of how i_k drifts.
    """

    regime = "simultaneous_drifting"

    def __init__(self, m, selector=None):
        super().__init__(m)
        if selector is None:
            self.selector = lambda k: k % m
            self.selector_table = None
        elif callable(selector):
            self.selector = selector
            self.selector_table = None
        else:
            table = tuple(int(i) for i in selector)
            if not table:
                raise InvalidSchedule("selector table must be nonempty")
            self.selector_table = table
            self.selector = lambda k: table[k % len(table)]

    def _weights(self, k):
        i = int(self.selector(k))
        if not 0 <= i < self.m:
            raise InvalidSchedule(f"selector returned index {i} outside 0..{self.m - 1}")
        base = 1.0 / (self.m * k + self.m)
        w = np.full(self.m, base)
        w[i] = (self.m * k + 1.0) / (self.m * k + self.m)
        return w


class BlockClassicalCyclic(WeightSchedule):
    """Partition the index set into blocks and cycle through them.

    ``partition`` is a list of disjoint nonempty index lists covering
    0..m-1.  ``intra`` is "uniform" (weight 1/|block| inside the visited
    block) or an explicit list of per-block weight lists, each summing to 1.
    """

    regime = "block_classical"

    def __init__(self, m, partition, intra="uniform"):
        super().__init__(m)
        blocks = [tuple(int(i) for i in block) for block in partition]
        if not blocks or any(not block for block in blocks):
            raise InvalidSchedule("partition blocks must be nonempty")
        flat = [i for block in blocks for i in block]
        if sorted(flat) != list(range(self.m)):
            raise InvalidSchedule("partition must be disjoint and cover every index exactly once")
        self.partition = blocks
        if intra == "uniform":
            self.intra = None
        else:
            weights = [tuple(float(v) for v in ws) for ws in intra]
            if len(weights) != len(blocks) or any(
                len(ws) != len(block) for ws, block in zip(weights, blocks)
            ):
                raise InvalidSchedule("intra-block weights must match the partition shape")
            for ws in weights:
                if any(v < 0 for v in ws) or abs(sum(ws) - 1.0) > _SUM_TOL:
                    raise InvalidSchedule("each block's weights must be nonnegative and sum to 1")
            self.intra = weights

    def _weights(self, k):
        j = k % len(self.partition)
        block = self.partition[j]
        w = np.zeros(self.m)
        if self.intra is None:
            w[list(block)] = 1.0 / len(block)
        else:
            w[list(block)] = self.intra[j]
        return w


class BlockGeneralized(WeightSchedule):
    """Arbitrary block selection: w_k vanishes outside selection(k).

    ``selection`` maps k to a nonempty iterable of indices; ``weights_fn``
    maps (k, block) to the weights inside the block (uniform when None).
    """

    regime = "block_generalized"

    def __init__(self, m, selection, weights_fn=None):
        super().__init__(m)
        if callable(selection):
            self.selection = selection
            self.selection_table = None
        else:
            table = [tuple(int(i) for i in block) for block in selection]
            if not table:
                raise InvalidSchedule("selection table must be nonempty")
            self.selection_table = table
            self.selection = lambda k: table[k % len(table)]
        self.weights_fn = weights_fn

    def _weights(self, k):
        block = tuple(int(i) for i in self.selection(k))
        if not block:
            raise InvalidSchedule(f"selection at k={k} is empty")
        if any(not 0 <= i < self.m for i in block) or len(set(block)) != len(block):
            raise InvalidSchedule(f"selection at k={k} is not a valid index subset: {block}")
        w = np.zeros(self.m)
        if self.weights_fn is None:
            w[list(block)] = 1.0 / len(block)
        else:
            inside = np.asarray(self.weights_fn(k, block), dtype=float)
            if inside.shape != (len(block),):
                raise InvalidSchedule("intra-block weights rule returned a wrong-shaped vector")
            w[list(block)] = inside
        return w
