"""Random wiretap codebooks, stochastic encoding and the threshold decoder.

Codeword indices are 1-based (private, auxiliary) pairs at the API surface
and flattened to ``(private - 1) * M_aux + (auxiliary - 1)`` internally.
"""

from dataclasses import dataclass
from enum import Enum
import math

import numpy as np

from ._util import DEFAULT_BUDGET, all_sequences, block_rng, check_budget, parallel_map, trial_blocks
from .channel import InputDistribution, safe_log
from .errors import AlphabetMismatch, IndexOutOfRange, LengthMismatch, Overflow

# snapping tolerance when e^{n(R - 2 gamma)} lands on an integer up to rounding
_CEIL_SNAP = 1e-9


@dataclass(frozen=True)
class MessageIndex:
    private: int
    auxiliary: int


@dataclass(frozen=True)
class RateTuple:
    """Private and auxiliary rates (nats/symbol) and the decoder slack gamma."""

    R1: float
    R2: float
    R1_aux: float
    R2_aux: float
    gamma: float

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma!r}")
        for nm in ("R1", "R2", "R1_aux", "R2_aux"):
            if getattr(self, nm) < 0:
                raise ValueError(f"{nm} must be nonnegative")


@dataclass(frozen=True, eq=False)
class WiretapCodebook:
    user: int
    n: int
    M: int
    M_aux: int
    words: np.ndarray
    source: InputDistribution
    seed: int

    def __post_init__(self):
        w = np.array(self.words, dtype=np.int64)
        if w.shape != (self.M, self.M_aux, self.n):
            raise ValueError(f"codebook words have shape {w.shape}, expected {(self.M, self.M_aux, self.n)}")
        if np.any(w < 0) or np.any(w >= self.source.probs.size):
            raise ValueError("codeword symbols outside the source alphabet")
        w.setflags(write=False)
        object.__setattr__(self, "words", w)

    @property
    def size(self):
        return self.M * self.M_aux

    @property
    def flat(self):
        """Codewords as a (M * M_aux, n) array in (private, auxiliary) row-major order."""
        return self.words.reshape(self.size, self.n)

    def index_of(self, flat):
        return MessageIndex(flat // self.M_aux + 1, flat % self.M_aux + 1)

    def __eq__(self, other):
        if not isinstance(other, WiretapCodebook):
            return NotImplemented
        return (
            (self.user, self.n, self.M, self.M_aux, self.seed) == (other.user, other.n, other.M, other.M_aux, other.seed)
            and self.source == other.source
            and np.array_equal(self.words, other.words)
        )

    def to_text(self):
        """Header lines followed by one space-separated codeword per line."""
        head = [
            f"user {self.user}",
            f"n {self.n}",
            f"M {self.M}",
            f"M_aux {self.M_aux}",
            f"seed {self.seed}",
            "source " + " ".join(repr(float(p)) for p in self.source.probs),
        ]
        body = [" ".join(str(int(s)) for s in row) for row in self.flat]
        return "\n".join(head + body) + "\n"

    @classmethod
    def from_text(cls, text):
        lines = [ln for ln in text.splitlines() if ln.strip()]
        fields = {}
        for ln in lines[:6]:
            key, _, rest = ln.partition(" ")
            fields[key] = rest
        n, M, M_aux = int(fields["n"]), int(fields["M"]), int(fields["M_aux"])
        rows = [[int(s) for s in ln.split()] for ln in lines[6:]]
        words = np.array(rows, dtype=np.int64).reshape(M, M_aux, n)
        source = InputDistribution([float(p) for p in fields["source"].split()])
        return cls(int(fields["user"]), n, M, M_aux, words, source, int(fields["seed"]))


def generate_codebook(source, n, M, M_aux, seed, user=1):
    """Draw M * M_aux codewords i.i.d. letter-by-letter from ``source``."""
    if n < 1 or M < 1 or M_aux < 1:
        raise ValueError("n, M and M_aux must all be at least 1")
    rng = np.random.default_rng(seed)
    words = rng.choice(source.probs.size, size=(M, M_aux, n), p=source.probs)
    return WiretapCodebook(user, n, M, M_aux, words, source, int(seed))


def _count(rate, gamma, n, budget):
    c = math.exp(n * (rate - 2 * gamma))
    r = round(c)
    if r >= 1 and abs(c - r) <= _CEIL_SNAP * r:
        c = r
    count = max(1, math.ceil(c))
    if count > budget:
        raise Overflow(f"count for rate {rate}", count, budget)
    return count


def counts_from_rates(rt, n, budget=DEFAULT_BUDGET):
    """(M1, M2, M1_aux, M2_aux) with each count max(1, ceil(e^{n(rate - 2 gamma)}))."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return tuple(_count(r, rt.gamma, n, budget) for r in (rt.R1, rt.R2, rt.R1_aux, rt.R2_aux))


def encode(cb, m):
    if not (1 <= m.private <= cb.M and 1 <= m.auxiliary <= cb.M_aux):
        raise IndexOutOfRange(f"message {m} outside codebook range ({cb.M}, {cb.M_aux})")
    return cb.words[m.private - 1, m.auxiliary - 1].copy()


class DecodeFailure(str, Enum):
    NO_CANDIDATE = "NoCandidate"
    NOT_UNIQUE = "NotUnique"


@dataclass(frozen=True)
class DecodeOutcome:
    m1: MessageIndex = None
    m2: MessageIndex = None
    failure: DecodeFailure = None

    @property
    def ok(self):
        return self.failure is None


class _Decoder:
    """Vectorized threshold tests for one codebook pair."""

    def __init__(self, cb1, cb2, bc, p1, p2, gamma):
        ch = bc.base
        if cb1.n != bc.n or cb2.n != bc.n:
            raise LengthMismatch("codebook block length differs from the channel's")
        if p1.probs.size != ch.sizes[0] or p2.probs.size != ch.sizes[1]:
            raise AlphabetMismatch("input distributions do not match the channel")
        w = ch.main
        self.n = bc.n
        self.log_w = safe_log(w)
        # random-coding reference densities, per letter
        self.log_y_x2 = safe_log(np.einsum("i,ijy->jy", p1.probs, w))
        self.log_y_x1 = safe_log(np.einsum("j,ijy->iy", p2.probs, w))
        self.log_y = safe_log(np.einsum("i,j,ijy->y", p1.probs, p2.probs, w))
        self.c1 = cb1.flat
        self.c2 = cb2.flat
        self.cb1, self.cb2 = cb1, cb2
        n = bc.n
        self.t1 = math.log(cb1.M * cb1.M_aux) / n + gamma
        self.t2 = math.log(cb2.M * cb2.M_aux) / n + gamma
        self.t12 = (math.log(cb1.M * cb2.M) + math.log(cb1.M_aux * cb2.M_aux)) / n + gamma

    def scores(self, ys):
        """Log-likelihoods and admissibility for a batch of outputs.

        ``ys`` has shape (B, n); returns ``(log_w, admissible)`` of shape
        (B, K1, K2).
        """
        c1, c2, n = self.c1, self.c2, self.n
        ys = np.asarray(ys, dtype=np.int64)
        lw = self.log_w[c1[None, :, None, :], c2[None, None, :, :], ys[:, None, None, :]].sum(axis=-1)
        ly_x2 = self.log_y_x2[c2[None, :, :], ys[:, None, :]].sum(axis=-1)[:, None, :]
        ly_x1 = self.log_y_x1[c1[None, :, :], ys[:, None, :]].sum(axis=-1)[:, :, None]
        ly = self.log_y[ys].sum(axis=-1)[:, None, None]
        with np.errstate(invalid="ignore"):
            finite = np.isfinite(lw)
            ok = finite & ((lw - ly_x2) / n > self.t1)
            ok &= (lw - ly_x1) / n > self.t2
            ok &= (lw - ly) / n > self.t12
        return lw, ok


def threshold_decode(y_vec, cb1, cb2, bc, p1, p2, rt):
    """Return the unique codeword pair whose tuple passes all three threshold tests."""
    y = np.asarray(y_vec, dtype=np.int64)
    if y.shape != (bc.n,):
        raise LengthMismatch(f"expected an output of length {bc.n}, got shape {y.shape}")
    dec = _Decoder(cb1, cb2, bc, p1, p2, rt.gamma)
    _, ok = dec.scores(y[None, :])
    hits = np.argwhere(ok[0])
    if len(hits) == 0:
        return DecodeOutcome(failure=DecodeFailure.NO_CANDIDATE)
    if len(hits) > 1:
        return DecodeOutcome(failure=DecodeFailure.NOT_UNIQUE)
    k1, k2 = hits[0]
    return DecodeOutcome(cb1.index_of(int(k1)), cb2.index_of(int(k2)))


def _batch_size(k1, k2, n):
    return max(1, int(2_000_000 // max(1, k1 * k2 * n)))


def _exact_chunk(args):
    dec, ys = args
    lw, ok = dec.scores(ys)
    b = ok.shape[0]
    flat_ok = ok.reshape(b, -1)
    unique = flat_ok.sum(axis=1) == 1
    if not np.any(unique):
        return 0.0
    pick = np.argmax(flat_ok[unique], axis=1)
    return float(np.exp(lw.reshape(b, -1)[unique, pick]).sum())


def error_probability_exact(cb1, cb2, bc, p1, p2, rt, budget=DEFAULT_BUDGET, jobs=1):
    """Exact P_e over uniform full messages (private and auxiliary) and channel noise.

    For each output sequence the decoder either returns a unique tuple or fails,
    so P(correct) = sum over y of W(y | decoded tuple) / (K1 K2) over outputs
    with a unique admissible tuple.
    """
    ch = bc.base
    k1, k2 = cb1.size, cb2.size
    ny = ch.sizes[2]
    check_budget("exact error probability", ny**bc.n * cb1.M * cb1.M_aux * cb2.M * cb2.M_aux, budget)
    dec = _Decoder(cb1, cb2, bc, p1, p2, rt.gamma)
    ys = all_sequences(ny, bc.n)
    step = _batch_size(k1, k2, bc.n)
    chunks = [(dec, ys[i:i + step]) for i in range(0, len(ys), step)]
    correct = sum(parallel_map(_exact_chunk, chunks, jobs))
    return float(min(1.0, max(0.0, 1.0 - correct / (k1 * k2))))


def sample_outputs(kernel, x1, x2, rng):
    """Draw outputs letter-wise from kernel[x1, x2, :] for integer arrays x1, x2."""
    cdf = np.cumsum(kernel[x1, x2], axis=-1)
    u = rng.random(x1.shape)
    out = (u[..., None] >= cdf).sum(axis=-1)
    return np.minimum(out, kernel.shape[-1] - 1)


def _mc_chunk(args):
    dec, kernel, seed, block, size = args
    rng = block_rng(seed, block)
    k1 = rng.integers(0, dec.c1.shape[0], size=size)
    k2 = rng.integers(0, dec.c2.shape[0], size=size)
    ys = sample_outputs(kernel, dec.c1[k1], dec.c2[k2], rng)
    errors = 0
    step = _batch_size(dec.c1.shape[0], dec.c2.shape[0], dec.n)
    for i in range(0, size, step):
        _, ok = dec.scores(ys[i:i + step])
        b = ok.shape[0]
        flat = ok.reshape(b, -1)
        sent = k1[i:i + step] * dec.c2.shape[0] + k2[i:i + step]
        right = (flat.sum(axis=1) == 1) & flat[np.arange(b), sent]
        errors += int(b - right.sum())
    return errors


def error_probability_mc(cb1, cb2, bc, p1, p2, rt, trials, seed, jobs=1):
    """Monte-Carlo P_e with its binomial standard error."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    dec = _Decoder(cb1, cb2, bc, p1, p2, rt.gamma)
    tasks = [(dec, bc.base.main, seed, b, size) for b, size in trial_blocks(trials)]
    errors = sum(parallel_map(_mc_chunk, tasks, jobs))
    p = errors / trials
    return p, math.sqrt(p * (1 - p) / trials)
