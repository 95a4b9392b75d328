"""Leakage to the eavesdropper measured by variational distance.

Distributions over eavesdropper block outputs are dense vectors indexed by
z-sequences in lexicographic order (see ``_util.all_sequences``).
"""

from dataclasses import asdict, dataclass, field
import json
import math

import numpy as np
from scipy.special import logsumexp

from ._util import DEFAULT_BUDGET, all_sequences, block_rng, check_budget, derive_seed, trial_blocks
from .channel import JointDistribution, safe_log
from .coding import generate_codebook, sample_outputs
from .errors import AxisMismatch, NonpositiveMu

DEFAULT_MU_GRID = (0.1, 0.25, 0.5, 1.0)
DEFAULT_SEED_COUNT = 50


def _as_pmf(P):
    if isinstance(P, JointDistribution):
        return P.names, P.probs
    return None, np.asarray(P, dtype=float)


def _pair(P, Q):
    names_p, p = _as_pmf(P)
    names_q, q = _as_pmf(Q)
    if p.shape != q.shape or (names_p is not None and names_q is not None and names_p != names_q):
        raise AxisMismatch(f"cannot compare distributions with axes {names_p or p.shape} and {names_q or q.shape}")
    return p, q


def variational_distance(P, Q):
    """L1 distance sum |P - Q|, equal to twice the largest event discrepancy."""
    p, q = _pair(P, Q)
    return float(np.abs(p - q).sum())


def lemma4_bound(P, Q, mu):
    """2 mu + 2 P{log P/Q > mu}; atoms with Q = 0 < P count as infinite ratio."""
    if not mu > 0:
        raise NonpositiveMu(f"mu must be positive, got {mu!r}")
    p, q = _pair(P, Q)
    with np.errstate(divide="ignore", invalid="ignore"):
        llr = np.where(p > 0, safe_log(p) - safe_log(q), -np.inf)
    return 2 * mu + 2 * float(p[llr > mu].sum())


def iid_output(bc, p1, p2):
    """Block eavesdropper output when both inputs are i.i.d. from p1, p2."""
    pz = np.einsum("i,j,ijz->z", p1.probs, p2.probs, bc.base.eve)
    zs = all_sequences(pz.size, bc.n)
    return np.prod(pz[zs], axis=1)


def _eve_table(eve, c1, c2, zs):
    """Block kernel p(z^n | x1^n, x2^n) for all codeword pairs: shape (K1, K2, |Z|^n)."""
    out = np.ones((c1.shape[0], c2.shape[0], zs.shape[0]))
    for t in range(zs.shape[1]):
        out *= eve[c1[:, t][:, None, None], c2[:, t][None, :, None], zs[:, t][None, None, :]]
    return out


def _check_eve_budget(cb1, cb2, bc, budget, what):
    nz = bc.base.sizes[3]
    check_budget(what, cb1.M * cb2.M * cb1.M_aux * cb2.M_aux * nz**bc.n * bc.n, budget)


def induced_eaves_conditional(cb1, cb2, bc, m1_priv, m2_priv, budget=DEFAULT_BUDGET):
    """Uniform mixture over auxiliary pairs of the block eavesdropper kernel.

    Returns a vector over all z-sequences for private messages (m1_priv, m2_priv), 1-based.
    """
    nz = bc.base.sizes[3]
    check_budget("induced eavesdropper distribution", cb1.M_aux * cb2.M_aux * nz**bc.n * bc.n, budget)
    zs = all_sequences(nz, bc.n)
    t = _eve_table(bc.base.eve, cb1.words[m1_priv - 1], cb2.words[m2_priv - 1], zs)
    return t.mean(axis=(0, 1))


@dataclass
class LeakageReport:
    """``leakage`` is V(p_{M1 M2 Z}, p_{M1 M2} p_Z) with p_Z the code-induced output.

    ``resolvability_bound`` is 2 E_{M1 M2}[V(p_{Z|m1 m2}, p_Z^iid)], where
    p_Z^iid is the random-coding output; ``output_gap`` is V(p_Z, p_Z^iid).
    """

    leakage: float
    resolvability_bound: float
    method: str
    n: int
    counts: tuple
    output_gap: float = None
    mean_v_iid: float = None
    trials: int = None
    seed: int = None
    std_error: float = None
    leakage_std_error: float = None

    def to_dict(self):
        d = asdict(self)
        d["counts"] = list(self.counts)
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


def leakage_exact(cb1, cb2, bc, budget=DEFAULT_BUDGET):
    _check_eve_budget(cb1, cb2, bc, budget, "exact leakage")
    nz = bc.base.sizes[3]
    zs = all_sequences(nz, bc.n)
    eve = bc.base.eve
    cond = np.empty((cb1.M, cb2.M, zs.shape[0]))
    for i in range(cb1.M):
        for k in range(cb2.M):
            cond[i, k] = _eve_table(eve, cb1.words[i], cb2.words[k], zs).mean(axis=(0, 1))
    p_code = cond.mean(axis=(0, 1))
    p_iid = iid_output(bc, cb1.source, cb2.source)
    leak = float(np.abs(cond - p_code).sum(axis=-1).mean())
    v_iid = np.abs(cond - p_iid).sum(axis=-1)
    return LeakageReport(
        leakage=leak,
        resolvability_bound=2 * float(v_iid.mean()),
        method="exact",
        n=bc.n,
        counts=(cb1.M, cb2.M, cb1.M_aux, cb2.M_aux),
        output_gap=variational_distance(p_code, p_iid),
        mean_v_iid=float(v_iid.mean()),
    )


def _log_kernel(log_eve, c1, c2, z):
    """log p(z^n | x1, x2) for codeword stacks c1 (..., K1, n), c2 (..., K2, n) and z (..., n)."""
    return log_eve[c1[..., :, None, :], c2[..., None, :, :], z[..., None, None, :]].sum(axis=-1)


def leakage_mc(cb1, cb2, bc, trials, seed, budget=DEFAULT_BUDGET):
    """Sampled leakage and resolvability bound.

    Both use V(P, Q) = 2 E_{z~Q}[(1 - P(z)/Q(z))^+] with P evaluated exactly at
    each sampled z, so the per-sample terms are bounded and the estimates are
    unbiased.  For the bound Q is p_Z^iid and P the mixture of a uniformly drawn
    private pair; for the leakage Q is the code-induced output and the inner
    average over private pairs is exact.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    check_budget("per-point mixture evaluation", cb1.size * cb2.size * bc.n, budget)
    eve = bc.base.eve
    log_eve = safe_log(eve)
    pz = np.einsum("i,j,ijz->z", cb1.source.probs, cb2.source.probs, eve)
    log_pz = safe_log(pz)
    zcdf = np.cumsum(pz)
    m_all = cb1.M * cb2.M
    bound_terms, leak_terms = [], []
    step = max(1, 2_000_000 // (cb1.size * cb2.size * bc.n))
    for block, size in trial_blocks(trials):
        rng = block_rng(seed, block)
        # resolvability bound: z ~ iid output, private pair uniform
        i = rng.integers(0, cb1.M, size=size)
        k = rng.integers(0, cb2.M, size=size)
        z = np.minimum((rng.random((size, bc.n))[..., None] >= zcdf).sum(axis=-1), pz.size - 1)
        # leakage: z ~ code-induced output
        f1 = rng.integers(0, cb1.size, size=size)
        f2 = rng.integers(0, cb2.size, size=size)
        z2 = sample_outputs(eve, cb1.flat[f1], cb2.flat[f2], rng)
        for s0 in range(0, size, step):
            sl = slice(s0, s0 + step)
            b = len(z[sl])
            lk = _log_kernel(log_eve, cb1.words[i[sl]], cb2.words[k[sl]], z[sl])
            log_mix = logsumexp(lk.reshape(b, -1), axis=1) - math.log(cb1.M_aux * cb2.M_aux)
            ratio = np.exp(log_mix - log_pz[z[sl]].sum(axis=1))
            bound_terms.append(4 * np.clip(1 - ratio, 0, None))

            lk_all = _log_kernel(log_eve, cb1.flat[None, :, :], cb2.flat[None, :, :], z2[sl])
            lk_all = lk_all.reshape(b, cb1.M, cb1.M_aux, cb2.M, cb2.M_aux)
            log_cond = logsumexp(lk_all, axis=(2, 4)) - math.log(cb1.M_aux * cb2.M_aux)
            log_code = logsumexp(log_cond.reshape(b, -1), axis=1) - math.log(m_all)
            r = np.exp(log_cond.reshape(b, -1) - log_code[:, None])
            leak_terms.append(2 * np.clip(1 - r, 0, None).mean(axis=1))
    b = np.concatenate(bound_terms)
    lt = np.concatenate(leak_terms)
    return LeakageReport(
        leakage=float(lt.mean()),
        resolvability_bound=float(b.mean()),
        method="monte_carlo",
        n=bc.n,
        counts=(cb1.M, cb2.M, cb1.M_aux, cb2.M_aux),
        trials=int(trials),
        seed=int(seed),
        std_error=float(b.std(ddof=1) / math.sqrt(b.size)) if b.size > 1 else 0.0,
        leakage_std_error=float(lt.std(ddof=1) / math.sqrt(lt.size)) if lt.size > 1 else 0.0,
    )


def tau_of(mu):
    return (math.exp(mu) - 1) / 4


@dataclass
class ResolvabilityDiagnostic:
    """Ensemble-averaged J_mu with its four-term split.

    ``per_seed`` holds one record per codebook draw with the same fields plus
    the exact V(p_{Z|11}, p_Z^iid) of that draw.
    """

    mu: float
    tau: float
    j_mu: float
    j_terms: tuple
    lemma4_bound: float
    n: int
    aux_counts: tuple
    per_seed: list = field(default_factory=list)

    def to_dict(self):
        d = asdict(self)
        d["j_terms"] = list(self.j_terms)
        d["aux_counts"] = list(self.aux_counts)
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


def _j_terms_one(table, p_iid, mu):
    """Exact J_mu, J1..J4 and V for one sub-codebook pair.

    ``table[j, l, z]`` is the block kernel at auxiliary pair (j, l).
    """
    k1, k2, _ = table.shape
    scale = k1 * k2
    tau = tau_of(mu)
    pos = p_iid > 0
    ratio = np.zeros_like(table)
    ratio[:, :, pos] = table[:, :, pos] / p_iid[pos]
    mix = table.mean(axis=(0, 1))
    with np.errstate(divide="ignore"):
        llr = np.where(mix > 0, safe_log(mix) - safe_log(p_iid), -np.inf)
    j_mu = float(mix[llr > mu].sum())

    r = ratio / scale
    a = r
    b = r.sum(axis=0, keepdims=True) - r  # j != j0, l = l0
    c = r.sum(axis=1, keepdims=True) - r  # j = j0, l != l0
    d = r.sum(axis=(0, 1), keepdims=True) - r  # (j, l) != (j0, l0)
    weight = table / scale
    terms = (
        float(weight[a > tau].sum()),
        float(weight[b > tau].sum()),
        float(weight[c > tau].sum()),
        float(weight[d > 1 + tau].sum()),
    )
    return j_mu, terms, float(np.abs(mix - p_iid).sum())


def j_mu_exact(source1, source2, bc, M1_aux, M2_aux, mu, seeds, budget=DEFAULT_BUDGET):
    """J_mu and J1..J4 averaged over random sub-codebooks, one draw per seed.

    For each seed the sub-codebooks {x1(1, j)} and {x2(1, l)} are drawn and the
    inner sums over z-sequences are exact.  J1 flags the single-pair spike
    against tau, J2 / J3 the row / column remainders against tau and J4 the
    remainder over all other pairs against 1 + tau, with tau = (e^mu - 1) / 4.
    """
    if not mu > 0:
        raise NonpositiveMu(f"mu must be positive, got {mu!r}")
    nz = bc.base.sizes[3]
    check_budget("J_mu inner enumeration", M1_aux * M2_aux * nz**bc.n * bc.n, budget)
    zs = all_sequences(nz, bc.n)
    p_iid = iid_output(bc, source1, source2)
    records = []
    for s in seeds:
        cb1 = generate_codebook(source1, bc.n, 1, M1_aux, derive_seed(s, 1), user=1)
        cb2 = generate_codebook(source2, bc.n, 1, M2_aux, derive_seed(s, 2), user=2)
        table = _eve_table(bc.base.eve, cb1.flat, cb2.flat, zs)
        j_mu, terms, v = _j_terms_one(table, p_iid, mu)
        records.append({"seed": int(s), "j_mu": j_mu, "j_terms": list(terms), "v": v,
                        "lemma4_bound": 2 * mu + 2 * j_mu})
    j_mu = float(np.mean([r["j_mu"] for r in records]))
    terms = tuple(float(np.mean([r["j_terms"][i] for r in records])) for i in range(4))
    return ResolvabilityDiagnostic(
        mu=float(mu),
        tau=tau_of(mu),
        j_mu=j_mu,
        j_terms=terms,
        lemma4_bound=2 * mu + 2 * j_mu,
        n=bc.n,
        aux_counts=(int(M1_aux), int(M2_aux)),
        per_seed=records,
    )
