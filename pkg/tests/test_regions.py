import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from macwt import (
    BlockChannel,
    InputDistribution,
    MacWiretapChannel,
    RateConstraintSystem,
    SpectralQuantities,
    assemble_constraints,
    builder_adder_bsc,
    feinstein_bound,
    fourier_motzkin,
    theorem_region,
)
from macwt.errors import BudgetExceeded, EmptySystem
from macwt.regions import Inequality, RegionPolytope, lemma_region, rational
from macwt.spectrum import Kind, information

from oracles import (
    grid,
    integer_rows,
    projection_oracle,
    random_channel_tensor,
    random_integer_system,
    random_pmf,
    region_on_grid,
)


def test_rational():
    assert rational(0.1) == Fraction(1, 10)
    assert rational(1 / 3) == Fraction("0.333333333333")
    assert rational(Fraction(2, 7)) == Fraction(2, 7)
    assert rational(3) == 3


def test_inequality_format_and_holds():
    q = Inequality((1, -2, 0), "<=", Fraction(1, 2))
    assert q.format(("a", "b", "c")) == "a - 2*b <= 1/2"
    assert q.holds((0.5, 0, 9))
    assert not q.holds((1, 0, 0))
    with pytest.raises(ValueError):
        Inequality((1,), "<", 0)
    with pytest.raises(ValueError):
        RateConstraintSystem(("a", "b"), [Inequality((1,), "<=", 0)])


def test_fm_unbounded_variable_vanishes():
    sys = RateConstraintSystem(("x", "y"), [
        Inequality((1, 0), "<=", 3),
        Inequality((1, 0), ">=", 0),
        Inequality((0, 1), ">=", 0),
    ])
    out = fourier_motzkin(sys, ["y"])
    assert out.variables == ("x",)
    assert sorted(out.describe()) == ["x <= 3", "x >= 0"]


def test_fm_single_pairing():
    a, b = Fraction(7, 10), Fraction(1, 5)
    sys = RateConstraintSystem(("R", "Rp"), [
        Inequality((0, 1), ">=", b),
        Inequality((1, 1), "<=", a),
        Inequality((1, 0), ">=", 0),
    ])
    out = fourier_motzkin(sys, ["Rp"])
    rows = {(q.coeffs, q.relation, q.bound) for q in out.inequalities}
    assert rows == {((1,), "<=", a - b), ((1,), ">=", 0)}


def test_fm_empty_input():
    with pytest.raises(EmptySystem):
        fourier_motzkin(RateConstraintSystem(("x",), []), ["x"])


def test_fm_infeasible_projection_has_no_points():
    sys = RateConstraintSystem(("x", "y"), [
        Inequality((0, 1), ">=", 2),
        Inequality((1, 1), "<=", 1),
        Inequality((1, 0), ">=", 0),
    ])
    out = fourier_motzkin(sys, ["y"])
    assert not any(out.satisfied((Fraction(k, 10),)) for k in range(-20, 20))


def random_system(rng):
    rows = [Inequality(c, "<=", b) for c, b in random_integer_system(rng)]
    return RateConstraintSystem(("x1", "x2", "x3", "x4"), rows)


def fm_matches_oracle(system, lo, hi, count=200):
    proj = fourier_motzkin(system, [system.variables[2], system.variables[3]])
    xs, D = grid(lo, hi, count)
    oracle = projection_oracle(integer_rows(system.rows()), xs, xs, D)
    mine = region_on_grid(integer_rows(proj.rows()), xs, xs, D)
    return int(np.sum(oracle != mine)), int(oracle.sum())


@pytest.mark.parametrize("seed", range(8))
def test_fm_random_systems_against_grid_oracle(seed):
    rng = np.random.default_rng(seed)
    bad, _ = fm_matches_oracle(random_system(rng), -5, 15, count=60)
    assert bad == 0


ADDER_Q = SpectralQuantities.from_channel(builder_adder_bsc(0.05, 0.2), InputDistribution.uniform(2),
                                          InputDistribution.uniform(2))


def test_fm_lemma_system_against_grid_oracle():
    g = 0.01
    bad, feasible = fm_matches_oracle(assemble_constraints(ADDER_Q, g), Fraction(-1, 20), Fraction(1, 4), count=60)
    assert bad == 0 and feasible > 0


def test_assemble_constants_match_informations():
    ch = builder_adder_bsc(0.05, 0.2)
    u = InputDistribution.uniform(2)
    g = 0.01
    sys = assemble_constraints(SpectralQuantities.from_channel(ch, u, u), g)
    assert len(sys.inequalities) == 10
    mi = [information(ch, u, u, k) for k in
          (Kind.X1_Y_GIVEN_X2, Kind.X2_Y_GIVEN_X1, Kind.X1X2_Y, Kind.X1_Z, Kind.X2_Z, Kind.X1X2_Z)]
    consts = [float(q.bound) + (2 * g if q.relation == "<=" else -2 * g) for q in sys.inequalities[:6]]
    assert np.allclose(consts, mi, atol=1e-10, rtol=0)


def test_all_zero_quantities():
    zero = (0, 0, 0, 0, 0, 0)
    origin = RegionPolytope.from_system(fourier_motzkin(assemble_constraints(zero, 0), ["R1_aux", "R2_aux"]), 0)
    assert origin.vertices == [(0, 0)]
    assert theorem_region(zero, 0).vertices == [(0, 0)]
    # any positive slack leaves nothing
    assert lemma_region(zero, 0.01).empty
    assert theorem_region(zero, 0.01).empty


def test_eavesdropper_too_strong():
    q = (0.3, 0.3, 0.5, 0.4, 0.4, 0.6)
    assert theorem_region(q, 0.01).empty
    assert lemma_region(q, 0.01).empty


def pentagon(a1, a2, a12):
    return {(Fraction(0), Fraction(0)), (a1, Fraction(0)), (a1, a12 - a1), (a12 - a2, a2), (Fraction(0), a2)}


def test_theorem_region_pentagon():
    a1, a2, a12 = Fraction(1, 2), Fraction(2, 5), Fraction(7, 10)
    g = Fraction(1, 100)
    reg = theorem_region((a1, a2, a12, 0, 0, 0), g)
    assert set(reg.vertices) == pentagon(a1 - 4 * g, a2 - 4 * g, a12 - 4 * g)
    for v in reg.vertices:
        assert reg.contains(v)


def test_no_eavesdropper_limit():
    # with nothing to hide the lemma region tends to the MAC pentagon as gamma -> 0
    a1, a2, a12 = Fraction(1, 2), Fraction(2, 5), Fraction(7, 10)
    for g in (Fraction(1, 10**3), Fraction(1, 10**6), Fraction(1, 10**9)):
        reg = lemma_region((a1, a2, a12, 0, 0, 0), g)
        target = sorted(pentagon(a1, a2, a12))
        got = sorted(reg.vertices)
        assert len(got) == 5
        assert max(abs(x - tx) + abs(y - ty) for (x, y), (tx, ty) in zip(got, target)) <= 12 * g


def theorem_rows(q, g):
    a1, a2, a12, b1, b2, b12 = q.rationals()
    g = rational(g)
    return {((1, 0), a1 - b1 - 4 * g), ((0, 1), a2 - b2 - 4 * g), ((1, 1), a12 - b12 - 4 * g)}


def test_fm_reproduces_theorem_rows():
    g = 0.01
    proj = fourier_motzkin(assemble_constraints(ADDER_Q, g), ["R1_aux", "R2_aux"])
    rows = {(q.coeffs, q.bound) for q in proj.inequalities if q.relation == "<="}
    assert theorem_rows(ADDER_Q, g) <= rows


def test_adder_regions_coincide():
    g = 0.01
    t, f = theorem_region(ADDER_Q, g), lemma_region(ADDER_Q, g)
    assert set(t.vertices) == set(f.vertices)
    assert len(t.vertices) == 3


def corrected_region(q, g):
    """Closed form of the eliminated lemma system.

    Besides the three displayed rows, elimination yields two more sum-rate
    rows; every other row it produces is implied by these five.
    """
    a1, a2, a12, b1, b2, b12 = q.rationals()
    g = rational(g)
    rows = [
        Inequality((1, 0), "<=", a1 - b1 - 4 * g),
        Inequality((0, 1), "<=", a2 - b2 - 4 * g),
        Inequality((1, 1), "<=", min(a12 - b12 - 4 * g, a1 + a2 - b12 - 6 * g, a12 - b1 - b2 - 6 * g)),
        Inequality((1, 0), ">=", 0),
        Inequality((0, 1), ">=", 0),
    ]
    return RegionPolytope.from_system(RateConstraintSystem(("R1", "R2"), rows), g)


def channel_quantities(seed):
    rng = np.random.default_rng(seed)
    sizes = (int(rng.integers(2, 4)), int(rng.integers(2, 4)), int(rng.integers(2, 5)), int(rng.integers(2, 5)))
    ch = MacWiretapChannel(random_channel_tensor(rng, sizes, sparsity=0.5 * rng.random()))
    p1 = InputDistribution(random_pmf(rng, sizes[0], 0.2))
    p2 = InputDistribution(random_pmf(rng, sizes[1], 0.2))
    return SpectralQuantities.from_channel(ch, p1, p2), float(rng.uniform(0.001, 0.03))


def gaps(q):
    # with independent inputs these are I(X1;X2|Y) and I(X1;X2|Z)
    return q.A1 + q.A2 - q.A12, q.B12 - q.B1 - q.B2


def test_fm_equals_corrected_closed_form_on_channels():
    equal = 0
    for seed in range(100):
        q, g = channel_quantities(seed)
        fm = lemma_region(q, g)
        assert set(fm.vertices) == set(corrected_region(q, g).vertices), seed
        th = theorem_region(q, g)
        assert all(th.contains(v) for v in fm.vertices)
        gy, gz = gaps(q)
        if gy >= 2 * g and gz >= 2 * g:
            assert set(fm.vertices) == set(th.vertices), seed
            equal += 1
    assert equal > 0


def random_tuple_with_gaps(rng, g):
    b1, b2 = rng.uniform(0, 0.3, size=2)
    b12 = b1 + b2 + 2 * g + rng.uniform(0, 0.2)
    a1 = b1 + rng.uniform(-0.05, 0.6)
    a2 = b2 + rng.uniform(-0.05, 0.6)
    a12 = rng.uniform(max(a1, a2), a1 + a2 - 2 * g) if a1 + a2 - 2 * g > max(a1, a2) else max(a1, a2)
    return SpectralQuantities(a1, a2, a12, b1, b2, b12)


def test_theorem_equals_fm_when_gaps_cover_slack():
    rng = np.random.default_rng(2024)
    nonempty = 0
    for _ in range(100):
        g = float(rng.uniform(0.001, 0.03))
        q = random_tuple_with_gaps(rng, g)
        gy, gz = (rational(x) for x in gaps(q))
        if gy < 2 * rational(g) or gz < 2 * rational(g):
            continue  # rationalization can shave a hair off a boundary draw
        t, f = theorem_region(q, g), lemma_region(q, g)
        assert set(t.vertices) == set(f.vertices)
        nonempty += not t.empty
    assert nonempty >= 50


def test_regions_differ_when_eavesdropper_gap_is_small():
    # B12 = B1 + B2: the lemma system costs an extra 2 gamma on the sum rate
    q = SpectralQuantities(0.6, 0.6, 0.9, 0.1, 0.1, 0.2)
    g = Fraction(1, 100)
    t, f = theorem_region(q, g), lemma_region(q, g)
    assert set(t.vertices) != set(f.vertices)
    tsum = max(x + y for x, y in t.vertices)
    fsum = max(x + y for x, y in f.vertices)
    assert tsum - fsum == 2 * g


def vertex_subset(inner, outer):
    return all(outer.contains(v) for v in inner.vertices)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), which=st.integers(0, 5), bump=st.floats(0.001, 0.2))
def test_monotonicity(seed, which, bump):
    q, g = channel_quantities(seed % 10_000)
    vals = [q.A1, q.A2, q.A12, q.B1, q.B2, q.B12]
    more = list(vals)
    more[which] += bump
    for region in (theorem_region, lemma_region):
        base, moved = region(vals, g), region(more, g)
        if which < 3:
            assert vertex_subset(base, moved)
        else:
            assert vertex_subset(moved, base)


def test_region_serialization():
    reg = theorem_region(ADDER_Q, 0.01)
    d = json.loads(reg.to_json())
    assert d["gamma"] == "1/100"
    assert len(d["vertices"]) == len(reg.vertices)
    assert d["quantities"]["A1"] == ADDER_Q.A1
    for x, y in reg.vertices:
        assert all(q.holds((x, y)) for q in reg.inequalities)


# ---------------------------------------------------------------------------
# Feinstein-type bound


def test_feinstein_vacuous_regime(adder, uniform2):
    ev = feinstein_bound(BlockChannel(adder, 4), uniform2, uniform2, (1, 1, 1, 1), 50.0)
    assert ev.tails == pytest.approx((1.0, 1.0, 1.0))
    assert ev.vacuous
    assert ev.total == pytest.approx(3 + 5 * math.exp(-200))


def test_feinstein_constant_spectrum(pair_channel):
    # every density is constant: log 2 for each user alone, log 4 for the pair
    n, g = 40, 0.1
    u = InputDistribution.uniform(2)
    counts = (64, 64, 32, 32)  # far below e^{n (log 2 - 2 gamma)}
    ev = feinstein_bound(BlockChannel(pair_channel, n), u, u, counts, g, method="exact")
    assert ev.tails == (0.0, 0.0, 0.0)
    assert ev.total == pytest.approx(5 * math.exp(-n * g))
    assert not ev.vacuous


def test_feinstein_exact_vs_mc(adder, uniform2):
    bc = BlockChannel(adder, 6)
    counts, g = (2, 2, 2, 1), 0.05
    ex = feinstein_bound(bc, uniform2, uniform2, counts, g, method="exact")
    mc = feinstein_bound(bc, uniform2, uniform2, counts, g, method="monte_carlo", trials=100_000, seed=4)
    assert ex.method == "exact" and mc.method == "monte_carlo"
    for a, b, se in zip(ex.tails, mc.tails, mc.tail_std_errors):
        assert abs(a - b) <= 3 * se + 1e-12
    assert all(0.0 <= t <= 1.0 for t in ex.tails)
    assert ex.total == pytest.approx(sum(ex.tails) + ex.slack)


def test_feinstein_budget(adder, uniform2):
    bc = BlockChannel(adder, 40)
    with pytest.raises(BudgetExceeded):
        feinstein_bound(bc, uniform2, uniform2, (2, 2, 1, 1), 0.05, method="exact", budget=100)
    ev = feinstein_bound(bc, uniform2, uniform2, (2, 2, 1, 1), 0.05, method="auto", budget=100, trials=2000)
    assert ev.method == "monte_carlo"
    assert all(se >= 0 for se in ev.tail_std_errors)
    assert json.loads(ev.to_json())["method"] == "monte_carlo"
