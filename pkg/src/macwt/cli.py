"""Batch experiment runner.

Usage::

    macwt run CONFIG [--out DIR] [--budget N] [--jobs N] [--timings]
    macwt sweep CONFIG [--out DIR] [--budget N] [--jobs N] [--timings]
    macwt validate CONFIG

A config is one YAML (or JSON) document.  Every random stream is derived
from the config ``seed`` and the coordinates of the grid point it serves
(block length, auxiliary counts, ensemble index, user), so outputs depend
only on the config and the package version.
"""

import argparse
from dataclasses import dataclass, field, replace
import csv
import hashlib
import io
import itertools
import json
import logging
import os
import sys
import tempfile
import time

import yaml

from . import __version__
from ._util import DEFAULT_BUDGET, derive_seed, parallel_map
from .channel import BlockChannel, InputDistribution, channel_from_dict
from .coding import RateTuple, counts_from_rates, error_probability_exact, error_probability_mc, generate_codebook
from .errors import ConfigParseError, MacWiretapError
from .leakage import DEFAULT_MU_GRID, j_mu_exact, leakage_exact, leakage_mc
from .regions import SpectralQuantities, feinstein_bound, lemma_region, theorem_region
from .spectrum import Kind, estimate_rate, information, sample_spectrum

log = logging.getLogger("macwt")

EXPERIMENTS = ("spectrum", "reliability", "leakage", "resolvability", "region", "feinstein")
SWEEP_AXES = ("n", "aux_counts", "mu", "p_main", "p_eve", "gamma")

# stream tags for seed derivation
_TAG = {name: i + 1 for i, name in enumerate(EXPERIMENTS)}

COLUMN_DOCS = {
    "n": "block length",
    "kind": "information density kind, e.g. 'x1x2;y'",
    "trial_index": "0-based Monte-Carlo trial index",
    "value_nats": "normalized block density (1/n) i in nats",
    "direction": "'inf' (epsilon-quantile) or 'sup' ((1-epsilon)-quantile)",
    "epsilon": "tail level of the quantile surrogate",
    "point": "rate estimate in nats/symbol",
    "std_error": "standard error of the estimate (0 for exact methods)",
    "mutual_information": "single-letter mutual information in nats",
    "seed_index": "0-based index within the codebook ensemble",
    "codebook_seed1": "generation seed of user 1's codebook",
    "codebook_seed2": "generation seed of user 2's codebook",
    "M1": "user 1 private message count",
    "M2": "user 2 private message count",
    "M1_aux": "user 1 auxiliary message count",
    "M2_aux": "user 2 auxiliary message count",
    "method": "'exact' or 'monte_carlo'",
    "pe": "decoding error probability including auxiliary messages",
    "mean_pe": "ensemble mean of pe",
    "mean_leakage": "ensemble mean of leakage",
    "leakage_std_error": "standard error of mean_leakage over the ensemble",
    "mean_bound": "ensemble mean of resolvability_bound",
    "bound_std_error": "standard error of mean_bound over the ensemble",
    "pe_std_error": "standard error of mean_pe over the ensemble",
    "seeds": "ensemble size",
    "gamma": "decoder slack in nats/symbol",
    "tail_1": "P{(1/n) i(X1;Y|X2) <= (1/n) log(M1 M1_aux) + gamma}",
    "tail_2": "P{(1/n) i(X2;Y|X1) <= (1/n) log(M2 M2_aux) + gamma}",
    "tail_12": "P{(1/n) i(X1X2;Y) <= (1/n)(log M1 M2 + log M1_aux M2_aux) + gamma}",
    "slack": "5 exp(-n gamma)",
    "total": "sum of the three tails and the slack (uncapped)",
    "vacuous": "1 when total >= 1",
    "leakage": "V(p_{M1 M2 Z}, p_{M1 M2} p_Z) with the code-induced p_Z",
    "resolvability_bound": "2 E_{M1 M2}[V(p_{Z|m1 m2}, p_Z^iid)]",
    "output_gap": "V(code-induced p_Z, p_Z^iid)",
    "mu": "log-ratio level mu > 0 for the threshold bound",
    "tau": "(exp(mu) - 1) / 4",
    "j_mu": "P{log p_{Z|11}/p_Z^iid > mu} under p_{Z|11}",
    "j1": "single-pair term against tau",
    "j2": "row remainder (other j, same l) against tau",
    "j3": "column remainder (same j, other l) against tau",
    "j4": "all other pairs against 1 + tau",
    "lemma4_bound": "2 mu + 2 j_mu",
    "v_exact": "exact V(p_{Z|11}, p_Z^iid) for the same draw",
    "region": "'theorem' (closed form) or 'lemmas' (eliminated constraint system)",
    "vertex_index": "counter-clockwise vertex index",
    "R1": "user 1 secret rate (nats/symbol)",
    "R2": "user 2 secret rate (nats/symbol)",
    "R1_exact": "R1 as an exact rational",
    "R2_exact": "R2 as an exact rational",
    "p_main": "adder_bsc main-channel re-draw probability",
    "p_eve": "adder_bsc eavesdropper re-draw probability",
}


@dataclass
class ExperimentConfig:
    experiment: str
    seed: int
    channel: dict
    p1: list = None
    p2: list = None
    n: list = field(default_factory=lambda: [4])
    rates: dict = None
    counts: list = None
    gamma: float = 0.01
    aux_counts: list = None
    private_counts: list = field(default_factory=lambda: [2, 2])
    mu: list = field(default_factory=lambda: list(DEFAULT_MU_GRID))
    kinds: list = None
    epsilon: float = 0.05
    trials: int = 10_000
    seed_count: int = 1
    method: str = "exact"
    output: str = None
    budget: int = DEFAULT_BUDGET
    sweep: dict = None

    def build_channel(self):
        return channel_from_dict(self.channel)

    def inputs(self, ch):
        p1 = InputDistribution(self.p1) if self.p1 is not None else InputDistribution.uniform(ch.sizes[0])
        p2 = InputDistribution(self.p2) if self.p2 is not None else InputDistribution.uniform(ch.sizes[1])
        return p1, p2

    def canonical(self):
        d = {k: v for k, v in self.__dict__.items()}
        return json.dumps(d, sort_keys=True, default=str)


_KNOWN = set(ExperimentConfig.__dataclass_fields__) | {"inputs"}


def _key_lines(text):
    try:
        node = yaml.compose(text)
    except yaml.YAMLError:
        return {}
    if not isinstance(node, yaml.MappingNode):
        return {}
    return {k.value: k.start_mark.line + 1 for k, _ in node.value}


def parse_config(text):
    """Parse and validate a config document; errors carry line and field."""
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigParseError(f"malformed document: {getattr(exc, 'problem', exc)}",
                               line=mark.line + 1 if mark else None) from None
    if not isinstance(raw, dict):
        raise ConfigParseError("config must be a key-value mapping")
    lines = _key_lines(text)

    def fail(key, msg):
        raise ConfigParseError(msg, field=key, line=lines.get(key))

    for key in raw:
        if key not in _KNOWN:
            fail(key, "unknown field")
    for key in ("experiment", "seed", "channel"):
        if key not in raw:
            raise ConfigParseError("missing required field", field=key)
    if raw["experiment"] not in EXPERIMENTS:
        fail("experiment", f"must be one of {EXPERIMENTS}")
    if not isinstance(raw["seed"], int) or isinstance(raw["seed"], bool) or raw["seed"] < 0:
        fail("seed", "must be a nonnegative integer")
    kw = dict(raw)
    inputs = kw.pop("inputs", None) or {}
    kw.setdefault("p1", inputs.get("p1"))
    kw.setdefault("p2", inputs.get("p2"))
    if "n" in kw and isinstance(kw["n"], int):
        kw["n"] = [kw["n"]]
    if "mu" in kw and isinstance(kw["mu"], (int, float)):
        kw["mu"] = [kw["mu"]]
    cfg = ExperimentConfig(**kw)

    try:
        ch = cfg.build_channel()
        cfg.inputs(ch)
    except (MacWiretapError, KeyError, TypeError, ValueError) as exc:
        key = "channel" if not isinstance(exc, MacWiretapError) or "input" not in str(exc) else "p1"
        fail(key, f"invalid channel or inputs: {exc}")
    if not cfg.n or any(not isinstance(v, int) or v < 1 for v in cfg.n):
        fail("n", "must be a list of positive integers")
    if not cfg.gamma > 0:
        fail("gamma", "must be positive")
    if not isinstance(cfg.trials, int) or cfg.trials < 1:
        fail("trials", "must be a positive integer")
    if not isinstance(cfg.seed_count, int) or cfg.seed_count < 1:
        fail("seed_count", "must be a positive integer")
    if cfg.method not in ("exact", "monte_carlo", "auto"):
        fail("method", "must be 'exact', 'monte_carlo' or 'auto'")
    if any(not m > 0 for m in cfg.mu):
        fail("mu", "every mu must be positive")
    if cfg.kinds is not None:
        try:
            cfg.kinds = [Kind(k).value for k in cfg.kinds]
        except ValueError as exc:
            fail("kinds", str(exc))
    if not (0 < cfg.epsilon < 0.5):
        fail("epsilon", "must lie in (0, 0.5)")
    exp = cfg.experiment
    if exp in ("reliability", "feinstein") and cfg.rates is None and cfg.counts is None:
        fail("experiment", f"{exp} needs 'rates' or 'counts'")
    if cfg.rates is not None:
        try:
            RateTuple(gamma=cfg.gamma, **cfg.rates)
        except (TypeError, ValueError) as exc:
            fail("rates", str(exc))
    if cfg.counts is not None:
        if any(len(c) != 4 or any(not isinstance(v, int) or v < 1 for v in c) for c in cfg.counts):
            fail("counts", "each entry must be [M1, M2, M1_aux, M2_aux] of positive integers")
    if exp in ("leakage", "resolvability"):
        if not cfg.aux_counts and cfg.rates is None:
            fail("experiment", f"{exp} needs 'aux_counts' or 'rates'")
        if cfg.aux_counts and any(len(a) != 2 or any(not isinstance(v, int) or v < 1 for v in a) for a in cfg.aux_counts):
            fail("aux_counts", "each entry must be [M1_aux, M2_aux] of positive integers")
    if len(cfg.private_counts) != 2 or any(v < 1 for v in cfg.private_counts):
        fail("private_counts", "must be [M1, M2] of positive integers")
    if cfg.sweep is not None:
        if not isinstance(cfg.sweep, dict) or not cfg.sweep:
            fail("sweep", "must map axis names to finite lists")
        for axis, grid in cfg.sweep.items():
            if axis not in SWEEP_AXES:
                fail("sweep", f"unknown sweep axis {axis!r}; allowed {SWEEP_AXES}")
            if not isinstance(grid, list) or not grid:
                fail("sweep", f"axis {axis!r} needs a non-empty list")
    return cfg


def load_config(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigParseError(f"cannot read config: {exc}") from None
    return parse_config(text)


# --------------------------------------------------------------------------
# experiments: each returns (tables, documents); tables map name -> (columns, rows)


def _counts_list(cfg, n):
    if cfg.counts is not None:
        return [tuple(c) for c in cfg.counts]
    rt = RateTuple(gamma=cfg.gamma, **cfg.rates)
    return [counts_from_rates(rt, n, budget=cfg.budget)]


def _spectrum_task(args):
    cfg, n, kind = args
    ch = cfg.build_channel()
    p1, p2 = cfg.inputs(ch)
    bc = BlockChannel(ch, n)
    kind = Kind(kind)
    s = sample_spectrum(bc, p1, p2, kind, cfg.trials, derive_seed(cfg.seed, _TAG["spectrum"], n, list(Kind).index(kind)))
    rows = [[n, kind.value, i, repr(float(v))] for i, v in enumerate(s.values)]
    mi = information(ch, p1, p2, kind)
    rates = []
    for direction in ("inf", "sup"):
        est = estimate_rate(s, direction, cfg.epsilon)
        rates.append([n, kind.value, direction, est.epsilon, repr(est.point), repr(est.std_error), repr(mi)])
    return rows, rates


def exp_spectrum(cfg, jobs):
    kinds = cfg.kinds or [k.value for k in Kind]
    tasks = [(cfg, n, k) for n in cfg.n for k in kinds]
    out = parallel_map(_spectrum_task, tasks, jobs)
    rows = [r for o in out for r in o[0]]
    rates = [r for o in out for r in o[1]]
    return {
        "spectrum": (["n", "kind", "trial_index", "value_nats"], rows),
        "rates": (["n", "kind", "direction", "epsilon", "point", "std_error", "mutual_information"], rates),
    }, {}


def _codebooks(cfg, ch, p1, p2, n, counts, s, extra=()):
    m1, m2, a1, a2 = counts
    s1 = derive_seed(cfg.seed, n, *extra, s, 1)
    s2 = derive_seed(cfg.seed, n, *extra, s, 2)
    return (generate_codebook(p1, n, m1, a1, s1, user=1), generate_codebook(p2, n, m2, a2, s2, user=2))


def _reliability_task(args):
    cfg, n, counts, s = args
    ch = cfg.build_channel()
    p1, p2 = cfg.inputs(ch)
    bc = BlockChannel(ch, n)
    cb1, cb2 = _codebooks(cfg, ch, p1, p2, n, counts, s, (_TAG["reliability"], *counts))
    rt = RateTuple(0, 0, 0, 0, cfg.gamma)
    if cfg.method == "monte_carlo":
        pe, se = error_probability_mc(cb1, cb2, bc, p1, p2, rt, cfg.trials,
                                      derive_seed(cfg.seed, _TAG["reliability"], n, *counts, s, 0))
        method = "monte_carlo"
    else:
        pe, se, method = error_probability_exact(cb1, cb2, bc, p1, p2, rt, budget=cfg.budget), 0.0, "exact"
    return [n, s, cb1.seed, cb2.seed, *counts, method, repr(pe), repr(se)]


def _summary(rows, key_len, value_idx):
    groups = {}
    for r in rows:
        groups.setdefault(tuple(r[:key_len]), []).append(float(r[value_idx]))
    out = []
    for key, vals in groups.items():
        m = sum(vals) / len(vals)
        var = sum((v - m) ** 2 for v in vals) / (len(vals) - 1) if len(vals) > 1 else 0.0
        out.append([*key, len(vals), repr(m), repr((var / len(vals)) ** 0.5)])
    return out


def exp_reliability(cfg, jobs):
    tasks = [(cfg, n, c, s) for n in cfg.n for c in _counts_list(cfg, n) for s in range(cfg.seed_count)]
    rows = parallel_map(_reliability_task, tasks, jobs)
    cols = ["n", "seed_index", "codebook_seed1", "codebook_seed2", "M1", "M2", "M1_aux", "M2_aux",
            "method", "pe", "std_error"]
    reordered = [[r[0], *r[4:8], r[1]] + [r[-2]] for r in rows]
    summary = _summary(reordered, 5, 6)
    return {
        "reliability": (cols, rows),
        "reliability_summary": (["n", "M1", "M2", "M1_aux", "M2_aux", "seeds", "mean_pe", "pe_std_error"], summary),
    }, {}


def _feinstein_task(args):
    cfg, n, counts = args
    ch = cfg.build_channel()
    p1, p2 = cfg.inputs(ch)
    ev = feinstein_bound(BlockChannel(ch, n), p1, p2, counts, cfg.gamma, method=cfg.method,
                         trials=cfg.trials, seed=derive_seed(cfg.seed, _TAG["feinstein"], n, *counts),
                         budget=cfg.budget)
    return ev


def exp_feinstein(cfg, jobs):
    tasks = [(cfg, n, c) for n in cfg.n for c in _counts_list(cfg, n)]
    evs = parallel_map(_feinstein_task, tasks, jobs)
    rows = [[e.n, *e.counts, repr(e.gamma), *(repr(t) for t in e.tails), repr(e.slack), repr(e.total),
             e.method, int(e.vacuous)] for e in evs]
    cols = ["n", "M1", "M2", "M1_aux", "M2_aux", "gamma", "tail_1", "tail_2", "tail_12", "slack", "total",
            "method", "vacuous"]
    return {"feinstein": (cols, rows)}, {"feinstein": [e.to_dict() for e in evs]}


def _leak_counts(cfg, n):
    """(M1, M2, M1_aux, M2_aux) per grid point: explicit aux counts, else from rates."""
    if cfg.aux_counts:
        return [(cfg.private_counts[0], cfg.private_counts[1], a[0], a[1]) for a in cfg.aux_counts]
    return [counts_from_rates(RateTuple(gamma=cfg.gamma, **cfg.rates), n, budget=cfg.budget)]


def _leakage_task(args):
    cfg, n, counts, s = args
    ch = cfg.build_channel()
    p1, p2 = cfg.inputs(ch)
    bc = BlockChannel(ch, n)
    aux = counts[2:]
    cb1, cb2 = _codebooks(cfg, ch, p1, p2, n, counts, s, (_TAG["leakage"], *counts))
    if cfg.method == "monte_carlo":
        rep = leakage_mc(cb1, cb2, bc, cfg.trials, derive_seed(cfg.seed, _TAG["leakage"], n, *counts, s, 0),
                         budget=cfg.budget)
    else:
        rep = leakage_exact(cb1, cb2, bc, budget=cfg.budget)
    gap = rep.output_gap if rep.output_gap is not None else float("nan")
    return [n, aux[0], aux[1], s, counts[0], counts[1], rep.method, repr(rep.leakage),
            repr(rep.resolvability_bound), repr(gap), repr(rep.std_error or 0.0)]


def exp_leakage(cfg, jobs):
    tasks = [(cfg, n, c, s) for n in cfg.n for c in _leak_counts(cfg, n) for s in range(cfg.seed_count)]
    rows = parallel_map(_leakage_task, tasks, jobs)
    cols = ["n", "M1_aux", "M2_aux", "seed_index", "M1", "M2", "method", "leakage", "resolvability_bound",
            "output_gap", "std_error"]
    leak = _summary([[r[0], r[1], r[2], r[7]] for r in rows], 3, 3)
    bound = _summary([[r[0], r[1], r[2], r[8]] for r in rows], 3, 3)
    summary = [a + b[-2:] for a, b in zip(leak, bound)]
    return {
        "leakage": (cols, rows),
        "leakage_summary": (["n", "M1_aux", "M2_aux", "seeds", "mean_leakage", "leakage_std_error",
                             "mean_bound", "bound_std_error"], summary),
    }, {}


def _resolvability_task(args):
    cfg, n, aux, mu = args
    ch = cfg.build_channel()
    p1, p2 = cfg.inputs(ch)
    seeds = [derive_seed(cfg.seed, _TAG["resolvability"], n, aux[0], aux[1], s) for s in range(cfg.seed_count)]
    return j_mu_exact(p1, p2, BlockChannel(ch, n), aux[0], aux[1], mu, seeds, budget=cfg.budget)


def exp_resolvability(cfg, jobs):
    tasks = [(cfg, n, tuple(c[2:]), mu) for n in cfg.n for c in _leak_counts(cfg, n) for mu in cfg.mu]
    diags = parallel_map(_resolvability_task, tasks, jobs)
    rows = []
    for (_, n, aux, mu), d in zip(tasks, diags):
        for s, rec in enumerate(d.per_seed):
            rows.append([n, aux[0], aux[1], repr(float(mu)), s, repr(d.tau), repr(rec["j_mu"]),
                         *(repr(t) for t in rec["j_terms"]), repr(rec["lemma4_bound"]), repr(rec["v"])])
    cols = ["n", "M1_aux", "M2_aux", "mu", "seed_index", "tau", "j_mu", "j1", "j2", "j3", "j4",
            "lemma4_bound", "v_exact"]
    return {"resolvability": (cols, rows)}, {"resolvability": [d.to_dict() for d in diags]}


def exp_region(cfg, jobs):
    ch = cfg.build_channel()
    p1, p2 = cfg.inputs(ch)
    q = SpectralQuantities.from_channel(ch, p1, p2)
    regions = {"theorem": theorem_region(q, cfg.gamma), "lemmas": lemma_region(q, cfg.gamma)}
    rows = []
    for name, reg in regions.items():
        for i, (x, y) in enumerate(reg.vertices):
            rows.append([name, i, repr(float(x)), repr(float(y)), str(x), str(y)])
    return (
        {"region_vertices": (["region", "vertex_index", "R1", "R2", "R1_exact", "R2_exact"], rows)},
        {"region": {k: v.to_dict() for k, v in regions.items()}},
    )


_RUNNERS = {
    "spectrum": exp_spectrum,
    "reliability": exp_reliability,
    "feinstein": exp_feinstein,
    "leakage": exp_leakage,
    "resolvability": exp_resolvability,
    "region": exp_region,
}


# --------------------------------------------------------------------------
# output


def _atomic_write(path, data):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_rows(fh, rows):
    w = csv.writer(fh, lineterminator="\n")
    for r in rows:
        w.writerow(r)


def _csv_bytes(columns, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    write_rows(buf, rows)
    return buf.getvalue().encode()


def _schema_bytes(name, columns):
    doc = {"table": name, "columns": [{"name": c, "description": COLUMN_DOCS.get(c, "")} for c in columns]}
    return (json.dumps(doc, indent=2, sort_keys=True) + "\n").encode()


@dataclass
class RunManifest:
    """Run summary.  Timings vary between runs, so the manifest file omits them."""

    config_hash: str
    version: str
    experiment: str
    outputs: list
    timings: dict

    def to_dict(self, timings=True):
        d = dict(self.__dict__)
        if not timings:
            del d["timings"]
        return d


def _emit(cfg, tables, docs, out_dir, prefix):
    """Render every output to bytes first, then move each into place atomically."""
    files = []
    for name, (cols, rows) in tables.items():
        files.append((f"{prefix}_{name}.csv", _csv_bytes(cols, rows)))
        files.append((f"{prefix}_{name}.schema.json", _schema_bytes(name, cols)))
    for name, doc in docs.items():
        files.append((f"{prefix}_{name}.json", _json_bytes(doc)))
    outputs = []
    for fname, data in files:
        _atomic_write(os.path.join(out_dir, fname), data)
        outputs.append({"file": fname, "sha256": hashlib.sha256(data).hexdigest()})
    return outputs


def _json_bytes(doc):
    return (json.dumps(doc, indent=2, sort_keys=True) + "\n").encode()


def _finish(cfg, tables, docs, out_dir, prefix, timings, write_timings=False):
    outputs = _emit(cfg, tables, docs, out_dir, prefix)
    manifest = RunManifest(
        config_hash=hashlib.sha256(cfg.canonical().encode()).hexdigest(),
        version=__version__,
        experiment=cfg.experiment,
        outputs=outputs,
        timings=timings,
    )
    _atomic_write(os.path.join(out_dir, f"{prefix}_manifest.json"), _json_bytes(manifest.to_dict(timings=False)))
    if write_timings:
        _atomic_write(os.path.join(out_dir, f"{prefix}_timings.json"), _json_bytes(timings))
    return manifest


def _apply_overrides(cfg, budget=None):
    if budget is not None:
        cfg = replace(cfg, budget=budget)
    return cfg


def run(config_path, out_dir=".", budget=None, jobs=1, write_timings=False):
    cfg = _apply_overrides(load_config(config_path), budget)
    prefix = cfg.output or cfg.experiment
    t0 = time.perf_counter()
    tables, docs = _RUNNERS[cfg.experiment](cfg, jobs)
    timings = {cfg.experiment: round(time.perf_counter() - t0, 6)}
    return _finish(cfg, tables, docs, out_dir, prefix, timings, write_timings)


def _point_config(cfg, point):
    kw = {}
    channel = dict(cfg.channel)
    for axis, value in point.items():
        if axis == "n":
            kw["n"] = [value]
        elif axis == "aux_counts":
            kw["aux_counts"] = [list(value)]
        elif axis == "mu":
            kw["mu"] = [value]
        elif axis == "gamma":
            kw["gamma"] = value
        elif isinstance(channel.get("builder"), dict):
            channel["builder"] = {**channel["builder"], axis: value}
        else:
            channel[axis] = value
    return replace(cfg, channel=channel, sweep=None, **kw)


def _sweep_value(axis, v):
    if axis == "aux_counts":
        return [v[0], v[1]]
    return [v]


def sweep(config_path, out_dir=".", budget=None, jobs=1, write_timings=False):
    """Cartesian grid over the ``sweep`` axes; rows gain leading sweep columns."""
    cfg = _apply_overrides(load_config(config_path), budget)
    if not cfg.sweep:
        raise ConfigParseError("sweep needs a non-empty 'sweep' mapping", field="sweep")
    axes = list(cfg.sweep)
    prefix = (cfg.output or cfg.experiment) + "_sweep"
    merged, docs, timings = {}, {}, {}
    for idx, values in enumerate(itertools.product(*(cfg.sweep[a] for a in axes))):
        point = dict(zip(axes, values))
        pcfg = _point_config(cfg, point)
        t0 = time.perf_counter()
        tables, pdocs = _RUNNERS[cfg.experiment](pcfg, jobs)
        timings[f"point_{idx}"] = round(time.perf_counter() - t0, 6)
        lead_cols = [c for a in axes for c in (["sweep_M1_aux", "sweep_M2_aux"] if a == "aux_counts" else [f"sweep_{a}"])]
        lead = [x for a in axes for x in _sweep_value(a, point[a])]
        for name, (cols, rows) in tables.items():
            entry = merged.setdefault(name, (lead_cols + cols, []))
            entry[1].extend(lead + list(r) for r in rows)
        for name, doc in pdocs.items():
            docs.setdefault(name, []).append({"point": point, "result": doc})
    for a in axes:
        for c in (["sweep_M1_aux", "sweep_M2_aux"] if a == "aux_counts" else [f"sweep_{a}"]):
            COLUMN_DOCS.setdefault(c, f"sweep coordinate ({a})")
    return _finish(cfg, merged, docs, out_dir, prefix, timings, write_timings)


def validate(config_path):
    return load_config(config_path)


def main(argv=None):
    parser = argparse.ArgumentParser(prog="macwt", description="MAC wiretap coding experiments")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("run", "sweep", "validate"):
        p = sub.add_parser(name)
        p.add_argument("config")
        if name != "validate":
            p.add_argument("--out", default=".", help="output directory")
            p.add_argument("--budget", type=int, default=None, help="enumeration budget override")
            p.add_argument("--jobs", type=int, default=1, help="worker processes")
            p.add_argument("--timings", action="store_true", help="also write <prefix>_timings.json")
    args = parser.parse_args(argv)
    level = os.environ.get("MACWT_LOG", "DEBUG" if args.verbose else "WARNING")
    logging.basicConfig(level=level, format="%(levelname)s %(message)s")
    try:
        if args.command == "validate":
            cfg = validate(args.config)
            print(f"ok: {cfg.experiment} experiment, seed {cfg.seed}")
            return 0
        fn = run if args.command == "run" else sweep
        m = fn(args.config, out_dir=args.out, budget=args.budget, jobs=args.jobs, write_timings=args.timings)
    except ConfigParseError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except MacWiretapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 1
    elapsed = sum(m.timings.values())
    print(f"{m.experiment}: config {m.config_hash[:12]}, version {m.version}, {elapsed:.2f}s")
    for o in m.outputs:
        print(f"  {o['file']}  {o['sha256'][:12]}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
