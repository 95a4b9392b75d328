"""Information densities, mutual informations and information spectra.

All quantities are in nats.  Block densities of a memoryless channel are
sums of per-letter densities, so spectra are sampled letter-wise and the
exact finite-n spectrum is obtained by enumerating letter-count types.
"""

from dataclasses import asdict, dataclass
from enum import Enum
from itertools import combinations
import csv
import json
import math

import numpy as np
from scipy.special import gammaln

from ._util import block_rng, check_budget, derive_seed, parallel_map, trial_blocks
from .channel import induced_joint, safe_log
from .errors import AxisMismatch, EpsilonOutOfRange, ZeroConditional, ZeroMarginal

BOOTSTRAP_RESAMPLES = 200


class Kind(str, Enum):
    """Which normalized density a spectrum describes."""

    X1_Y_GIVEN_X2 = "x1;y|x2"
    X2_Y_GIVEN_X1 = "x2;y|x1"
    X1X2_Y = "x1x2;y"
    X1_Z = "x1;z"
    X2_Z = "x2;z"
    X1X2_Z = "x1x2;z"

    @property
    def legitimate(self):
        return self in (Kind.X1_Y_GIVEN_X2, Kind.X2_Y_GIVEN_X1, Kind.X1X2_Y)


def _two_axes(joint):
    if len(joint.names) != 2:
        raise AxisMismatch(f"expected a joint over two axes, got {joint.names}")
    return joint.probs


def _three_axes(joint):
    if len(joint.names) != 3:
        raise AxisMismatch(f"expected a joint over three axes, got {joint.names}")
    return joint.probs


def info_density(joint, a, b):
    """log p(a, b) - log p(a) - log p(b)."""
    p = _two_axes(joint)
    pa = p.sum(axis=1)[a]
    pb = p.sum(axis=0)[b]
    if pa <= 0 or pb <= 0:
        raise ZeroMarginal(f"marginal of ({a}, {b}) is zero: p(a)={pa}, p(b)={pb}")
    pab = p[a, b]
    if pab == 0:
        return -math.inf
    return math.log(pab) - math.log(pa) - math.log(pb)


def cond_info_density(joint, a, b, c):
    """log p(a, b | c) - log p(a | c) - log p(b | c), with C the third axis."""
    p = _three_axes(joint)
    pc = p.sum(axis=(0, 1))[c]
    pac = p.sum(axis=1)[a, c]
    pbc = p.sum(axis=0)[b, c]
    if pc <= 0 or pac <= 0 or pbc <= 0:
        raise ZeroConditional(f"conditional at ({a}, {b} | {c}) has zero mass")
    pabc = p[a, b, c]
    if pabc == 0:
        return -math.inf
    return math.log(pabc) + math.log(pc) - math.log(pac) - math.log(pbc)


def mutual_information(joint):
    p = _two_axes(joint)
    pa = p.sum(axis=1, keepdims=True)
    pb = p.sum(axis=0, keepdims=True)
    mask = p > 0
    ratio = p[mask] / (pa * pb)[mask]
    return float(np.sum(p[mask] * np.log(ratio)))


def cond_mutual_information(joint):
    """I(A; B | C) for a joint over (A, B, C)."""
    p = _three_axes(joint)
    pc = p.sum(axis=(0, 1), keepdims=True)
    pac = p.sum(axis=1, keepdims=True)
    pbc = p.sum(axis=0, keepdims=True)
    mask = p > 0
    ratio = (p * pc)[mask] / (pac * pbc)[mask]
    return float(np.sum(p[mask] * np.log(ratio)))


# grouping of the induced (x1, x2, y, z) joint behind each kind
_KIND_GROUPS = {
    Kind.X1_Y_GIVEN_X2: (("x1",), ("y",), ("x2",)),
    Kind.X2_Y_GIVEN_X1: (("x2",), ("y",), ("x1",)),
    Kind.X1X2_Y: (("x1", "x2"), ("y",)),
    Kind.X1_Z: (("x1",), ("z",)),
    Kind.X2_Z: (("x2",), ("z",)),
    Kind.X1X2_Z: (("x1", "x2"), ("z",)),
}


def kind_joint(joint, kind):
    """The 2- or 3-axis joint on which ``kind``'s density is defined."""
    return joint.group(*_KIND_GROUPS[Kind(kind)])


def information(ch, p1, p2, kind):
    """Single-letter (conditional) mutual information for ``kind``."""
    j = kind_joint(induced_joint(ch, p1, p2), kind)
    if len(j.names) == 3:
        return cond_mutual_information(j)
    return mutual_information(j)


def all_informations(ch, p1, p2):
    return {k: information(ch, p1, p2, k) for k in Kind}


def letter_density_table(ch, p1, p2, kind):
    """Per-letter density for every atom (x1, x2, y, z), plus the atom weights.

    Inputs are independent, so p(x1 | x2) = p1(x1) and the conditional density
    i(X1; Y | X2) reduces to log W(y | x1, x2) / p(y | x2).  Atoms of zero
    weight carry -inf.
    """
    kind = Kind(kind)
    a, b = p1.probs, p2.probs
    joint = induced_joint(ch, p1, p2).probs
    if kind.legitimate:
        w = ch.main
        if kind is Kind.X1_Y_GIVEN_X2:
            ref = np.einsum("i,ijy->jy", a, w)[None, :, :]
        elif kind is Kind.X2_Y_GIVEN_X1:
            ref = np.einsum("j,ijy->iy", b, w)[:, None, :]
        else:
            ref = np.einsum("i,j,ijy->y", a, b, w)[None, None, :]
        with np.errstate(invalid="ignore"):
            table = (safe_log(w) - safe_log(np.broadcast_to(ref, w.shape)))[..., None]
        table = np.broadcast_to(table, joint.shape)
    else:
        w = ch.eve
        pz = np.einsum("i,j,ijz->z", a, b, w)
        if kind is Kind.X1_Z:
            num = np.einsum("j,ijz->iz", b, w)[:, None, :]
        elif kind is Kind.X2_Z:
            num = np.einsum("i,ijz->jz", a, w)[None, :, :]
        else:
            num = w
        num = np.broadcast_to(num, w.shape)
        with np.errstate(invalid="ignore"):
            table = (safe_log(num) - safe_log(pz)[None, None, :])[:, :, None, :]
        table = np.broadcast_to(table, joint.shape)
    table = np.where(joint > 0, table, -np.inf)
    return np.ascontiguousarray(table), joint


@dataclass(frozen=True, eq=False)
class SpectrumSample:
    n: int
    values: np.ndarray
    kind: Kind
    seed: int

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size < 1:
            raise ValueError("a spectrum sample needs at least one value")
        if np.any(v == np.inf) or np.any(np.isnan(v)):
            raise ValueError("spectrum values must be finite or -inf")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "kind", Kind(self.kind))

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["trial_index", "value_nats"])
            for i, v in enumerate(self.values):
                w.writerow([i, repr(float(v))])


def _sample_block(args):
    table, weights, n, seed, block, size = args
    rng = block_rng(seed, block)
    idx = rng.choice(weights.size, size=(size, n), p=weights)
    return table[idx].sum(axis=1) / n


def sample_spectrum(bc, p1, p2, kind, trials, seed, jobs=1):
    """Monte-Carlo information spectrum of the block channel.

    Trials are grouped in fixed blocks, each with its own substream of
    ``seed``; the result is identical for any ``jobs``.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    table, joint = letter_density_table(bc.base, p1, p2, kind)
    table, weights = table.ravel(), joint.ravel()
    keep = weights > 0
    table, weights = table[keep], weights[keep] / weights[keep].sum()
    tasks = [(table, weights, bc.n, seed, b, size) for b, size in trial_blocks(trials)]
    values = np.concatenate(parallel_map(_sample_block, tasks, jobs))
    return SpectrumSample(bc.n, values, Kind(kind), int(seed))


def _compositions(n, k):
    """All k-part compositions of n as an (count, k) int array."""
    if k == 1:
        return np.array([[n]], dtype=np.int64)
    bars = np.array(list(combinations(range(n + k - 1), k - 1)), dtype=np.int64)
    edges = np.hstack([np.full((bars.shape[0], 1), -1), bars, np.full((bars.shape[0], 1), n + k - 1)])
    return np.diff(edges, axis=1) - 1


def exact_spectrum(bc, p1, p2, kind, budget=None):
    """Exact distribution of (1/n) i over the block joint.

    Returns ``(values, probs)`` sorted by value.  Per-letter atoms sharing a
    density value are merged, then every letter-count type is enumerated with
    its multinomial probability.
    """
    table, joint = letter_density_table(bc.base, p1, p2, kind)
    table, weights = table.ravel(), joint.ravel()
    keep = weights > 0
    table, weights = table[keep], weights[keep]
    levels, inverse = np.unique(np.round(table, 12), return_inverse=True)
    reps = np.array([table[inverse == i][0] for i in range(levels.size)])
    w = np.bincount(inverse, weights=weights, minlength=levels.size)
    k, n = levels.size, bc.n
    check_budget("exact spectrum types", math.comb(n + k - 1, k - 1) * k, budget)
    comp = _compositions(n, k)
    logp = gammaln(n + 1) - gammaln(comp + 1).sum(axis=1) + comp @ np.log(w)
    vals = comp @ reps / n
    order = np.argsort(vals, kind="stable")
    probs = np.exp(logp[order])
    return vals[order], probs / probs.sum()


def exact_tail(values, probs, threshold, side="above"):
    if side == "above":
        return float(probs[values > threshold].sum())
    if side == "below":
        return float(probs[values < threshold].sum())
    if side == "at_most":
        return float(probs[values <= threshold].sum())
    raise ValueError(f"unknown side {side!r}")


def tail_probability(s, threshold, side="above"):
    """Fraction of spectrum values strictly above (or below) ``threshold``.

    ``side="at_most"`` counts values less than or equal to the threshold.
    Returns ``(probability, binomial standard error)``.
    """
    v = s.values
    if side == "above":
        hits = v > threshold
    elif side == "below":
        hits = v < threshold
    elif side == "at_most":
        hits = v <= threshold
    else:
        raise ValueError(f"unknown side {side!r}")
    p = float(hits.mean())
    return p, math.sqrt(p * (1 - p) / v.size)


@dataclass(frozen=True)
class RateEstimate:
    point: float
    epsilon: float
    n: int
    direction: str
    std_error: float
    kind: str = ""

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


def _quantile(v, q):
    # order-statistic quantile; -inf sorts below every finite value
    return np.quantile(v, q, method="inverted_cdf", axis=-1)


def estimate_rate(s, direction, epsilon, resamples=BOOTSTRAP_RESAMPLES):
    """Finite-n surrogate for the inf- or sup-information rate.

    ``direction="sup"`` uses the empirical (1 - epsilon)-quantile,
    ``direction="inf"`` the epsilon-quantile.  The standard error is the
    bootstrap spread of the same order statistic.
    """
    if not (0 < epsilon < 0.5):
        raise EpsilonOutOfRange(f"epsilon must lie in (0, 0.5), got {epsilon!r}")
    if direction not in ("inf", "sup"):
        raise ValueError(f"direction must be 'inf' or 'sup', got {direction!r}")
    q = epsilon if direction == "inf" else 1 - epsilon
    v = s.values
    point = float(_quantile(v, q))
    rng = np.random.default_rng(derive_seed(s.seed, 0xB007, s.n))
    boots = np.array([_quantile(v[rng.integers(0, v.size, size=v.size)], q) for _ in range(resamples)])
    if resamples < 2 or np.all(boots == boots[0]):
        se = 0.0
    elif np.all(np.isfinite(boots)):
        se = float(np.std(boots, ddof=1))
    else:
        se = math.inf
    return RateEstimate(point, float(epsilon), s.n, direction, se, s.kind.value)
