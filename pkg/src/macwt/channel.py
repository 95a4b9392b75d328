"""Finite-alphabet two-user wiretap channels and the distributions they induce.

A channel is a single-letter kernel ``p(y, z | x1, x2)`` stored as a dense
tensor indexed ``[x1, x2, y, z]``.  Block channels are the memoryless
n-fold products of that kernel.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import (
    AlphabetMismatch,
    AxisMismatch,
    LengthMismatch,
    ProbabilityOutOfRange,
    RowSumViolation,
    ShapeMismatch,
    SymbolOutOfRange,
)

INPUT_TOL = 1e-9
INTERNAL_TOL = 1e-12


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


def safe_log(p):
    """Elementwise natural log with log(0) = -inf and no warnings."""
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore"):
        return np.log(p)


@dataclass(frozen=True)
class Alphabet:
    size: int

    def __post_init__(self):
        if int(self.size) != self.size or self.size < 1:
            raise ValueError(f"alphabet size must be a positive integer, got {self.size!r}")


@dataclass(frozen=True, eq=False)
class MacWiretapChannel:
    """Transition tensor ``transition[x1, x2, y, z] = p(y, z | x1, x2)``."""

    transition: np.ndarray

    def __post_init__(self):
        t = _frozen(self.transition)
        if t.ndim != 4:
            raise ShapeMismatch(f"transition must be 4-dimensional, got shape {t.shape}")
        object.__setattr__(self, "transition", t)
        # cached marginal kernels
        object.__setattr__(self, "main", _frozen(t.sum(axis=3)))
        object.__setattr__(self, "eve", _frozen(t.sum(axis=2)))

    @property
    def x1(self):
        return Alphabet(self.transition.shape[0])

    @property
    def x2(self):
        return Alphabet(self.transition.shape[1])

    @property
    def y(self):
        return Alphabet(self.transition.shape[2])

    @property
    def z(self):
        return Alphabet(self.transition.shape[3])

    @property
    def sizes(self):
        return tuple(int(s) for s in self.transition.shape)

    def swap_users(self):
        """Same channel with the roles of the two transmitters exchanged."""
        return MacWiretapChannel(np.transpose(self.transition, (1, 0, 2, 3)))

    def __eq__(self, other):
        if not isinstance(other, MacWiretapChannel):
            return NotImplemented
        return self.sizes == other.sizes and np.array_equal(self.transition, other.transition)

    def __hash__(self):
        return hash((self.sizes, self.transition.tobytes()))

    def to_dict(self):
        return {
            "sizes": {"x1": self.sizes[0], "x2": self.sizes[1], "y": self.sizes[2], "z": self.sizes[3]},
            "transition": [float(v) for v in self.transition.ravel()],
        }


@dataclass(frozen=True, eq=False)
class InputDistribution:
    probs: np.ndarray

    def __post_init__(self):
        p = _frozen(self.probs)
        if p.ndim != 1 or p.size < 1:
            raise ShapeMismatch("input distribution must be a non-empty vector")
        if np.any(p < 0) or np.any(p > 1):
            raise ProbabilityOutOfRange(f"input probabilities must lie in [0, 1]: {p.tolist()}")
        total = p.sum()
        if abs(total - 1.0) > INPUT_TOL:
            raise ProbabilityOutOfRange(f"input probabilities sum to {total!r}")
        if total != 1.0:
            p = _frozen(p / total)
        object.__setattr__(self, "probs", p)

    @property
    def alphabet(self):
        return Alphabet(self.probs.size)

    @classmethod
    def uniform(cls, k):
        return cls(np.full(k, 1.0 / k))

    @classmethod
    def point_mass(cls, k, symbol):
        p = np.zeros(k)
        p[symbol] = 1.0
        return cls(p)

    def __eq__(self, other):
        if not isinstance(other, InputDistribution):
            return NotImplemented
        return np.array_equal(self.probs, other.probs)

    def __hash__(self):
        return hash(self.probs.tobytes())


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """Dense joint pmf with named axes.

    ``names`` label the axes of ``probs`` in order; a grouped axis such as
    ``"x1x2"`` is produced by :meth:`group`.
    """

    names: tuple
    probs: np.ndarray = field(repr=False)

    def __post_init__(self):
        p = _frozen(self.probs)
        names = tuple(self.names)
        if p.ndim != len(names):
            raise ShapeMismatch(f"{len(names)} axis names for a {p.ndim}-d tensor")
        if len(set(names)) != len(names):
            raise AxisMismatch(f"duplicate axis names {names}")
        if np.any(p < 0):
            raise ProbabilityOutOfRange("joint distribution has negative mass")
        total = p.sum()
        if abs(total - 1.0) > INTERNAL_TOL * max(1, p.size):
            raise ProbabilityOutOfRange(f"joint distribution has total mass {total!r}")
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "probs", p)

    @property
    def axes(self):
        return tuple(Alphabet(s) for s in self.probs.shape)

    def axis(self, name):
        try:
            return self.names.index(name)
        except ValueError:
            raise AxisMismatch(f"no axis {name!r} in {self.names}") from None

    def marginal(self, *names):
        """Marginal over ``names``, with axes in the requested order."""
        keep = [self.axis(nm) for nm in names]
        drop = tuple(i for i in range(len(self.names)) if i not in keep)
        p = self.probs.sum(axis=drop) if drop else self.probs
        remaining = [i for i in range(len(self.names)) if i in keep]
        order = [remaining.index(k) for k in keep]
        return JointDistribution(tuple(names), np.transpose(p, order))

    def group(self, *groups):
        """Merge axes: each group (a tuple of names) becomes one axis, row-major.

        ``joint.group(("x1", "x2"), ("y",))`` gives a 2-axis joint over the
        pair (X1 X2) and Y.
        """
        flat = [nm for g in groups for nm in g]
        m = self.marginal(*flat)
        shape, names = [], []
        pos = 0
        for g in groups:
            size = int(np.prod(m.probs.shape[pos:pos + len(g)]))
            shape.append(size)
            names.append("".join(g))
            pos += len(g)
        return JointDistribution(tuple(names), m.probs.reshape(shape))

    def __getitem__(self, symbols):
        return float(self.probs[symbols])


def make_channel(x1_size, x2_size, y_size, z_size, entries):
    """Validate a transition tensor and wrap it as a channel.

    Slices over (y, z) must sum to one within 1e-9; they are renormalized
    exactly.  Larger deviations raise :class:`RowSumViolation` naming the worst
    (x1, x2) pair.
    """
    shape = (x1_size, x2_size, y_size, z_size)
    for s in shape:
        Alphabet(s)
    t = np.asarray(entries, dtype=float)
    if t.size != math.prod(shape):
        raise ShapeMismatch(f"expected {math.prod(shape)} entries for shape {shape}, got {t.size}")
    if t.shape != shape:
        if t.ndim == 1:
            t = t.reshape(shape)
        else:
            raise ShapeMismatch(f"expected shape {shape}, got {t.shape}")
    if not np.all(np.isfinite(t)) or np.any(t < 0) or np.any(t > 1):
        raise ProbabilityOutOfRange("transition entries must lie in [0, 1]")
    sums = t.sum(axis=(2, 3))
    dev = np.abs(sums - 1.0)
    worst = np.unravel_index(np.argmax(dev), dev.shape)
    if dev[worst] > INPUT_TOL:
        raise RowSumViolation(tuple(int(i) for i in worst), float(sums[worst]))
    # rows already exact up to rounding are left bit-for-bit intact
    sums = np.where(dev > INTERNAL_TOL, sums, 1.0)
    t = t / sums[:, :, None, None]
    return MacWiretapChannel(t)


def _redraw_kernel(k, p):
    """Keep the symbol with prob 1-p, else redraw uniformly over k symbols."""
    return (1 - p) * np.eye(k) + p / k


def builder_adder_bsc(p_main, p_eve):
    """Binary adder MAC followed by two random re-draw stages.

    ``S = x1 + x2`` in {0, 1, 2}.  Y equals S with probability 1 - p_main
    and is otherwise drawn uniformly from {0, 1, 2}.  Z is obtained from Y
    by the same re-draw with probability p_eve, so (X1, X2) -> Y -> Z is
    physically degraded.
    """
    for nm, p in (("p_main", p_main), ("p_eve", p_eve)):
        if not (0.0 <= p <= 1.0):
            raise ProbabilityOutOfRange(f"{nm} must lie in [0, 1], got {p!r}")
    q_main = _redraw_kernel(3, p_main)
    q_eve = _redraw_kernel(3, p_eve)
    t = np.zeros((2, 2, 3, 3))
    for x1 in range(2):
        for x2 in range(2):
            t[x1, x2] = q_main[x1 + x2][:, None] * q_eve
    return make_channel(2, 2, 3, 3, t)


def adder_bsc_degrading_kernel(p_eve):
    """The q(z | y) kernel that turns Y into Z in :func:`builder_adder_bsc`."""
    return _redraw_kernel(3, p_eve)


BUILDERS = {"adder_bsc": builder_adder_bsc}


def induced_joint(ch, p1, p2):
    """Joint pmf of (X1, X2, Y, Z) under independent inputs."""
    if p1.probs.size != ch.sizes[0] or p2.probs.size != ch.sizes[1]:
        raise AlphabetMismatch(
            f"input sizes ({p1.probs.size}, {p2.probs.size}) do not match channel {ch.sizes[:2]}"
        )
    probs = p1.probs[:, None, None, None] * p2.probs[None, :, None, None] * ch.transition
    return JointDistribution(("x1", "x2", "y", "z"), probs)


@dataclass(frozen=True)
class BlockChannel:
    """Memoryless n-fold extension of a single-letter channel."""

    base: MacWiretapChannel
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"block length must be a positive integer, got {self.n!r}")

    def _check(self, vecs, sizes):
        out = []
        for v, k in zip(vecs, sizes):
            v = np.asarray(v, dtype=np.int64)
            if v.shape[-1] != self.n:
                raise LengthMismatch(f"expected length {self.n}, got {v.shape[-1]}")
            if np.any(v < 0) or np.any(v >= k):
                raise SymbolOutOfRange(f"symbol outside 0..{k - 1}")
            out.append(v)
        return out

    def log_probability(self, x1_vec, x2_vec, y_vec, z_vec):
        x1, x2, y, z = self._check((x1_vec, x2_vec, y_vec, z_vec), self.base.sizes)
        return float(safe_log(self.base.transition[x1, x2, y, z]).sum())

    def log_main(self, x1_vec, x2_vec, y_vec):
        x1, x2, y = self._check((x1_vec, x2_vec, y_vec), self.base.sizes[:3])
        return float(safe_log(self.base.main[x1, x2, y]).sum())

    def log_eve(self, x1_vec, x2_vec, z_vec):
        s = self.base.sizes
        x1, x2, z = self._check((x1_vec, x2_vec, z_vec), (s[0], s[1], s[3]))
        return float(safe_log(self.base.eve[x1, x2, z]).sum())


def block_probability(bc, x1_vec, x2_vec, y_vec, z_vec):
    """p(y^n, z^n | x1^n, x2^n) as a product of per-letter entries."""
    x1, x2, y, z = bc._check((x1_vec, x2_vec, y_vec, z_vec), bc.base.sizes)
    factors = bc.base.transition[x1, x2, y, z]
    if np.any(factors == 0):
        return 0.0
    return float(np.prod(factors))


def channel_from_dict(spec):
    """Build a channel from a parsed description (inline tensor or builder)."""
    if "builder" in spec:
        b = spec["builder"]
        if isinstance(b, str):
            name, params = b, {k: v for k, v in spec.items() if k != "builder"}
        else:
            b = dict(b)
            name = b.pop("name")
            params = b
        if name not in BUILDERS:
            raise KeyError(f"unknown channel builder {name!r}; known: {sorted(BUILDERS)}")
        return BUILDERS[name](**params)
    sizes = spec["sizes"]
    if isinstance(sizes, dict):
        sizes = [sizes["x1"], sizes["x2"], sizes["y"], sizes["z"]]
    return make_channel(*sizes, spec["transition"])


def load_channel(path):
    import yaml

    with open(path) as fh:
        return channel_from_dict(yaml.safe_load(fh))
