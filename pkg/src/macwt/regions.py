"""Feinstein-type error bound, rate constraint systems and the secrecy rate region.

Constraint systems hold exact rationals.  Floating inputs are rationalized at
12 significant digits before any arithmetic, so slack terms such as
``-4 gamma`` come out exactly from the elimination.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
import json
import math

from ._util import DEFAULT_BUDGET
from .errors import BudgetExceeded, EmptySystem
from .spectrum import Kind, all_informations, exact_spectrum, exact_tail, sample_spectrum, tail_probability

RATE_VARIABLES = ("R1", "R2", "R1_aux", "R2_aux")
SIG_DIGITS = 12


def rational(x):
    """Exact rational for ``x``; floats are cut to 12 significant digits."""
    if isinstance(x, (Fraction, int)):
        return Fraction(x)
    return Fraction(f"{float(x):.{SIG_DIGITS}g}")


@dataclass(frozen=True)
class Inequality:
    """``coeffs . v  <relation>  bound`` with relation '<=' or '>='."""

    coeffs: tuple
    relation: str
    bound: Fraction

    def __post_init__(self):
        if self.relation not in ("<=", ">="):
            raise ValueError(f"relation must be '<=' or '>=', got {self.relation!r}")
        object.__setattr__(self, "coeffs", tuple(rational(c) for c in self.coeffs))
        object.__setattr__(self, "bound", rational(self.bound))

    def as_le(self):
        if self.relation == "<=":
            return self.coeffs, self.bound
        return tuple(-c for c in self.coeffs), -self.bound

    def holds(self, point):
        lhs = sum(c * rational(v) for c, v in zip(self.coeffs, point))
        return lhs <= self.bound if self.relation == "<=" else lhs >= self.bound

    def format(self, names):
        terms = []
        for c, nm in zip(self.coeffs, names):
            if c == 0:
                continue
            s = nm if abs(c) == 1 else f"{abs(c)}*{nm}"
            terms.append(("- " if c < 0 else "+ ") + s)
        lhs = " ".join(terms).lstrip("+ ") or "0"
        if lhs.startswith("- "):
            lhs = "-" + lhs[2:]
        return f"{lhs} {self.relation} {self.bound}"


def _canonical(coeffs, bound):
    """Scale a <= row so its first nonzero coefficient has magnitude one."""
    lead = next((c for c in coeffs if c != 0), None)
    if lead is None:
        return coeffs, bound
    s = abs(lead)
    return tuple(c / s for c in coeffs), bound / s


def _pretty(coeffs, bound):
    if any(c != 0 for c in coeffs) and all(c <= 0 for c in coeffs):
        return Inequality(tuple(-c for c in coeffs), ">=", -bound)
    return Inequality(coeffs, "<=", bound)


def _prune(rows):
    """Pairwise dominance: per direction keep the tightest bound; drop 0 <= b >= 0."""
    best = {}
    infeasible = None
    for coeffs, bound in rows:
        coeffs, bound = _canonical(coeffs, bound)
        if all(c == 0 for c in coeffs):
            if bound < 0 and (infeasible is None or bound < infeasible[1]):
                infeasible = (coeffs, bound)
            continue
        if coeffs not in best or bound < best[coeffs]:
            best[coeffs] = bound
    out = list(best.items())
    if infeasible is not None:
        out.append(infeasible)
    return out


@dataclass
class RateConstraintSystem:
    variables: tuple
    inequalities: list = field(default_factory=list)

    def __post_init__(self):
        self.variables = tuple(self.variables)
        for q in self.inequalities:
            if len(q.coeffs) != len(self.variables):
                raise ValueError(f"inequality {q} does not match variables {self.variables}")

    def satisfied(self, point):
        return all(q.holds(point) for q in self.inequalities)

    def rows(self):
        return [q.as_le() for q in self.inequalities]

    def describe(self):
        return [q.format(self.variables) for q in self.inequalities]

    def to_dict(self):
        return {
            "variables": list(self.variables),
            "inequalities": [
                {"coeffs": [str(c) for c in q.coeffs], "relation": q.relation, "bound": str(q.bound),
                 "bound_float": float(q.bound), "text": q.format(self.variables)}
                for q in self.inequalities
            ],
        }


def fourier_motzkin(system, eliminate):
    """Project ``system`` onto the variables not listed in ``eliminate``.

    Each elimination pairs every lower bound of the variable with every upper
    bound; rows not involving it pass through.  Redundancy is removed by
    pairwise dominance only.
    """
    if not system.inequalities:
        raise EmptySystem("no inequalities to eliminate from")
    variables = list(system.variables)
    rows = _prune(system.rows())
    for name in eliminate:
        k = variables.index(name)
        pos = [r for r in rows if r[0][k] > 0]
        neg = [r for r in rows if r[0][k] < 0]
        new = [r for r in rows if r[0][k] == 0]
        for cp, bp in pos:
            for cn, bn in neg:
                sp, sn = 1 / cp[k], 1 / -cn[k]
                coeffs = tuple(sp * a + sn * b for a, b in zip(cp, cn))
                new.append((coeffs, sp * bp + sn * bn))
        rows = [(c[:k] + c[k + 1:], b) for c, b in _prune(new)]
        del variables[k]
    rows = sorted(rows, key=lambda r: (tuple(-c for c in r[0]), r[1]))
    return RateConstraintSystem(tuple(variables), [_pretty(c, b) for c, b in rows])


@dataclass(frozen=True)
class SpectralQuantities:
    """The six rate quantities entering the region (nats/symbol).

    A-side: inf-rates toward Y; B-side: sup-rates toward Z.  ``source``
    records how they were obtained ("mutual_information" or "quantile"),
    ``epsilon`` the tail level for quantile surrogates.
    """

    A1: float
    A2: float
    A12: float
    B1: float
    B2: float
    B12: float
    source: str = "mutual_information"
    epsilon: float = None

    @classmethod
    def from_channel(cls, ch, p1, p2):
        mi = all_informations(ch, p1, p2)
        return cls(mi[Kind.X1_Y_GIVEN_X2], mi[Kind.X2_Y_GIVEN_X1], mi[Kind.X1X2_Y],
                   mi[Kind.X1_Z], mi[Kind.X2_Z], mi[Kind.X1X2_Z])

    def rationals(self):
        return tuple(rational(getattr(self, k)) for k in ("A1", "A2", "A12", "B1", "B2", "B12"))

    def to_dict(self):
        return {k: getattr(self, k) for k in ("A1", "A2", "A12", "B1", "B2", "B12", "source", "epsilon")}


def _quantities(q):
    if isinstance(q, SpectralQuantities):
        return q
    if isinstance(q, dict):
        return SpectralQuantities(**q)
    return SpectralQuantities(*q)


def assemble_constraints(quantities, gamma):
    """Reliability and secrecy constraints over (R1, R2, R1_aux, R2_aux).

    Reliability: R1 + R1_aux <= A1 - 2g, R2 + R2_aux <= A2 - 2g,
    R1 + R2 + R1_aux + R2_aux <= A12 - 2g.  Secrecy: R1_aux >= B1 + 2g,
    R2_aux >= B2 + 2g, R1_aux + R2_aux >= B12 + 2g.  All rates nonnegative.
    """
    a1, a2, a12, b1, b2, b12 = _quantities(quantities).rationals()
    g = rational(gamma)
    rows = [
        Inequality((1, 0, 1, 0), "<=", a1 - 2 * g),
        Inequality((0, 1, 0, 1), "<=", a2 - 2 * g),
        Inequality((1, 1, 1, 1), "<=", a12 - 2 * g),
        Inequality((0, 0, 1, 0), ">=", b1 + 2 * g),
        Inequality((0, 0, 0, 1), ">=", b2 + 2 * g),
        Inequality((0, 0, 1, 1), ">=", b12 + 2 * g),
    ]
    for i in range(4):
        e = [0, 0, 0, 0]
        e[i] = 1
        rows.append(Inequality(tuple(e), ">=", 0))
    return RateConstraintSystem(RATE_VARIABLES, rows)


def _polygon_vertices(rows):
    """Vertices of {v in Q^2 : c . v <= b for all rows}, counter-clockwise."""
    pts = set()
    for (c1, b1), (c2, b2) in combinations(rows, 2):
        det = c1[0] * c2[1] - c1[1] * c2[0]
        if det == 0:
            continue
        x = (b1 * c2[1] - b2 * c1[1]) / det
        y = (c1[0] * b2 - c2[0] * b1) / det
        if all(c[0] * x + c[1] * y <= b for c, b in rows):
            pts.add((x, y))
    if len(pts) <= 2:
        return sorted(pts)
    cx = sum(p[0] for p in pts) / len(pts)
    cy = sum(p[1] for p in pts) / len(pts)
    return sorted(pts, key=lambda p: math.atan2(float(p[1] - cy), float(p[0] - cx)))


@dataclass
class RegionPolytope:
    variables: tuple
    inequalities: list
    vertices: list
    gamma: Fraction
    quantities: dict = None

    @property
    def empty(self):
        return not self.vertices

    def contains(self, point):
        return all(q.holds(point) for q in self.inequalities)

    @classmethod
    def from_system(cls, system, gamma, quantities=None):
        if len(system.variables) != 2:
            raise ValueError("a region polytope lives in two variables")
        verts = _polygon_vertices(system.rows())
        return cls(system.variables, list(system.inequalities), verts, rational(gamma), quantities)

    def to_dict(self):
        sys = RateConstraintSystem(self.variables, self.inequalities).to_dict()
        return {
            "variables": list(self.variables),
            "gamma": str(self.gamma),
            "inequalities": sys["inequalities"],
            "vertices": [[str(x), str(y)] for x, y in self.vertices],
            "vertices_float": [[float(x), float(y)] for x, y in self.vertices],
            "empty": self.empty,
            "quantities": self.quantities,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def theorem_region(quantities, gamma):
    """{R1 <= A1-B1-4g, R2 <= A2-B2-4g, R1+R2 <= A12-B12-4g, R1, R2 >= 0}."""
    q = _quantities(quantities)
    a1, a2, a12, b1, b2, b12 = q.rationals()
    g = rational(gamma)
    rows = [
        Inequality((1, 0), "<=", a1 - b1 - 4 * g),
        Inequality((0, 1), "<=", a2 - b2 - 4 * g),
        Inequality((1, 1), "<=", a12 - b12 - 4 * g),
        Inequality((1, 0), ">=", 0),
        Inequality((0, 1), ">=", 0),
    ]
    return RegionPolytope.from_system(RateConstraintSystem(("R1", "R2"), rows), g, q.to_dict())


def lemma_region(quantities, gamma):
    """Region obtained by eliminating the auxiliary rates from the lemma constraints."""
    q = _quantities(quantities)
    proj = fourier_motzkin(assemble_constraints(q, gamma), ["R1_aux", "R2_aux"])
    return RegionPolytope.from_system(proj, gamma, q.to_dict())


@dataclass
class BoundEvaluation:
    n: int
    counts: tuple
    gamma: float
    tails: tuple
    slack: float
    total: float
    method: str = "exact"
    tail_std_errors: tuple = (0.0, 0.0, 0.0)

    @property
    def vacuous(self):
        return self.total >= 1

    def to_dict(self):
        return {
            "n": self.n,
            "counts": list(self.counts),
            "gamma": self.gamma,
            "tails": list(self.tails),
            "tail_std_errors": list(self.tail_std_errors),
            "slack": self.slack,
            "total": self.total,
            "method": self.method,
            "vacuous": self.vacuous,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


def feinstein_thresholds(counts, n, gamma):
    m1, m2, a1, a2 = counts
    return (
        math.log(m1 * a1) / n + gamma,
        math.log(m2 * a2) / n + gamma,
        (math.log(m1 * m2) + math.log(a1 * a2)) / n + gamma,
    )


_TAIL_KINDS = (Kind.X1_Y_GIVEN_X2, Kind.X2_Y_GIVEN_X1, Kind.X1X2_Y)


def feinstein_bound(bc, p1, p2, counts, gamma, method="auto", trials=100_000, seed=0, budget=DEFAULT_BUDGET):
    """Tail probabilities of the three legitimate densities plus 5 e^{-n gamma}.

    ``method="exact"`` enumerates the finite-n spectra; ``"monte_carlo"``
    samples them; ``"auto"`` tries exact and falls back to sampling when the
    enumeration exceeds ``budget`` (the returned ``method`` says which).
    The total is not capped at one.
    """
    n = bc.n
    ths = feinstein_thresholds(counts, n, gamma)
    use = method
    tails, ses = [], []
    if method in ("exact", "auto"):
        try:
            for kind, th in zip(_TAIL_KINDS, ths):
                vals, probs = exact_spectrum(bc, p1, p2, kind, budget=budget)
                tails.append(exact_tail(vals, probs, th, "at_most"))
                ses.append(0.0)
            use = "exact"
        except BudgetExceeded:
            if method == "exact":
                raise
            use = "monte_carlo"
            tails, ses = [], []
    if use == "monte_carlo":
        for i, (kind, th) in enumerate(zip(_TAIL_KINDS, ths)):
            s = sample_spectrum(bc, p1, p2, kind, trials, seed + i)
            p, se = tail_probability(s, th, "at_most")
            tails.append(p)
            ses.append(se)
    elif use != "exact":
        raise ValueError(f"unknown method {method!r}")
    slack = 5 * math.exp(-n * gamma)
    return BoundEvaluation(n, tuple(counts), float(gamma), tuple(tails), slack,
                           float(sum(tails) + slack), use, tuple(ses))
