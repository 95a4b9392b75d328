"""Small shared helpers: budgets, seed derivation, sequence enumeration, pooling."""

from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .errors import BudgetExceeded

DEFAULT_BUDGET = 10**8

# trials are cut into fixed blocks so results do not depend on the worker count
TRIAL_BLOCK = 4096


def check_budget(what, size, budget):
    if budget is None:
        budget = DEFAULT_BUDGET
    if size > budget:
        raise BudgetExceeded(what, int(size), int(budget))


def derive_seed(*keys):
    """Counter-style derivation of an integer seed from a tuple of nonnegative ints."""
    ss = np.random.SeedSequence([int(k) for k in keys])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def block_rng(seed, block):
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(block)]))


def trial_blocks(trials):
    """Split ``trials`` into (block_index, size) pairs of at most TRIAL_BLOCK."""
    out = []
    start, b = 0, 0
    while start < trials:
        size = min(TRIAL_BLOCK, trials - start)
        out.append((b, size))
        start += size
        b += 1
    return out


def all_sequences(alphabet_size, n):
    """Every length-n sequence over range(alphabet_size), lexicographic, as an int array."""
    if n == 0:
        return np.zeros((1, 0), dtype=np.int64)
    grids = np.indices((alphabet_size,) * n).reshape(n, -1).T
    return np.ascontiguousarray(grids, dtype=np.int64)


def parallel_map(fn, items, jobs=1):
    """Ordered map; uses a process pool when ``jobs > 1``."""
    items = list(items)
    if jobs is None or jobs <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items))
