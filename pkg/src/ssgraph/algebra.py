"""The dense symbolic *-algebra spanned by monomials s_mu u_g s_nu*.

Elements are finite formal sums over canonical monomial keys; no
operator norm exists here, so equality means equality of coefficient
maps.  Multiplication expands through minimal common extensions, so
the defining relation u_g s_mu = s_{g.mu} u_{g|mu} falls out of
``multiply`` rather than being applied as a rewrite rule.  Coefficients are either
complex floats or exact Gaussian rationals; the exact mode is what the
golden identities are tested in.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import IncompleteTriples, NotPeriodic, PreconditionViolated
from .kgraph import Path, join_degrees, zero_degree
from .periodicity import cycline_triples, is_cycline

COEFF_TOL = 1e-12


@dataclass(frozen=True, slots=True)
class ExactComplex:
    """A Gaussian rational, kept exact through ring operations."""

    re: Fraction
    im: Fraction

    def __add__(self, other: "ExactComplex") -> "ExactComplex":
        return ExactComplex(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "ExactComplex") -> "ExactComplex":
        return ExactComplex(self.re - other.re, self.im - other.im)

    def __neg__(self) -> "ExactComplex":
        return ExactComplex(-self.re, -self.im)

    def __mul__(self, other: "ExactComplex") -> "ExactComplex":
        return ExactComplex(self.re * other.re - self.im * other.im,
                            self.re * other.im + self.im * other.re)

    def conjugate(self) -> "ExactComplex":
        return ExactComplex(self.re, -self.im)

    def __bool__(self) -> bool:
        return bool(self.re) or bool(self.im)

    def to_complex(self) -> complex:
        return complex(self.re) + 1j * complex(self.im)


EXACT_ZERO = ExactComplex(Fraction(0), Fraction(0))
EXACT_ONE = ExactComplex(Fraction(1), Fraction(0))


def exact_number(re, im=0) -> ExactComplex:
    return ExactComplex(Fraction(re), Fraction(im))


@dataclass(frozen=True, slots=True)
class Monomial:
    """The formal product s_mu u_g s_nu*; requires s(mu) = g.s(nu)."""

    mu: Path
    g: "GroupElement"
    nu: Path


@dataclass
class AlgebraElement:
    """A finite sum of monomials with nonzero coefficients.

    ``exact`` selects Gaussian-rational coefficients; float elements
    compare with tolerance, exact ones on the nose.
    """

    system: "ActionSystem"
    terms: dict
    exact: bool

    def coefficient(self, key: Monomial):
        return self.terms.get(key, EXACT_ZERO if self.exact else 0j)

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        return add(self, other)

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        return add(self, scale(other, -1))

    def __mul__(self, other: "AlgebraElement") -> "AlgebraElement":
        return multiply(self, other)


def _canonical_monomial(system, mu: Path, g, nu: Path) -> Monomial:
    if system.act_vertex(g, nu.source) != mu.source:
        raise PreconditionViolated(
            "source of mu must be the g-image of the source of nu")
    from .action import GroupElement
    return Monomial(mu, GroupElement(system._canonical_key(g.key)), nu)


def _as_coeff(value, exact: bool):
    if isinstance(value, ExactComplex):
        return value if exact else value.to_complex()
    if exact:
        if isinstance(value, complex):
            return ExactComplex(Fraction(value.real), Fraction(value.imag))
        return ExactComplex(Fraction(value), Fraction(0))
    return complex(value)


def element(system, triples, exact: bool = False) -> AlgebraElement:
    """Build an element from ``(mu, g, nu, coefficient)`` entries."""
    terms: dict = {}
    for mu, g, nu, coeff in triples:
        key = _canonical_monomial(system, mu, g, nu)
        value = terms.get(key)
        coeff = _as_coeff(coeff, exact)
        terms[key] = coeff if value is None else value + coeff
    return AlgebraElement(system, _drop_zeros(terms), exact)


def _drop_zeros(terms: dict) -> dict:
    return {key: val for key, val in terms.items() if val}


def zero_element(system, exact: bool = False) -> AlgebraElement:
    return AlgebraElement(system, {}, exact)


def monomial(system, mu: Path, g, nu: Path, coeff=1,
             exact: bool = False) -> AlgebraElement:
    return element(system, [(mu, g, nu, coeff)], exact)


def vertex_projection(system, v: int, exact: bool = False) -> AlgebraElement:
    p = system.graph.vertex_path(v)
    return monomial(system, p, system.identity, p, 1, exact)


def edge_monomial(system, e, exact: bool = False) -> AlgebraElement:
    """The partial isometry s_e as the monomial (e, 1, s(e))."""
    graph = system.graph
    return monomial(system, graph.path([e]), system.identity,
                    graph.vertex_path(e.source), 1, exact)


def generator_unitary(system, g, exact: bool = False) -> AlgebraElement:
    """u_g as the sum over vertices of (g.v, g, v)."""
    graph = system.graph
    entries = []
    for v in range(graph.num_vertices):
        image = graph.vertex_path(system.act_vertex(g, v))
        entries.append((image, g, graph.vertex_path(v), 1))
    return element(system, entries, exact)


def identity_element(system, exact: bool = False) -> AlgebraElement:
    return generator_unitary(system, system.identity, exact)


def diagonal_identity(system, degree, exact: bool = False) -> AlgebraElement:
    """The identity refined along degree: sum of (lam, 1, lam) over
    all paths lam of the given degree.  Multiplying by it rewrites an
    element through the exhaustive-decomposition relation."""
    entries = [(lam, system.identity, lam, 1)
               for lam in system.graph.paths_of_degree(tuple(degree))]
    return element(system, entries, exact)


def add(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    exact = a.exact and b.exact
    terms: dict = {}
    for part in (a, b):
        for key, val in part.terms.items():
            val = _as_coeff(val, exact)
            hit = terms.get(key)
            terms[key] = val if hit is None else hit + val
    return AlgebraElement(a.system, _drop_zeros(terms), exact)


def scale(a: AlgebraElement, factor) -> AlgebraElement:
    factor = _as_coeff(factor, a.exact)
    terms = {key: val * factor for key, val in a.terms.items()}
    return AlgebraElement(a.system, _drop_zeros(terms), a.exact)


def multiply(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    """Bilinear extension of the minimal-common-extension product."""
    if a.system is not b.system:
        raise PreconditionViolated("elements live over different systems")
    system = a.system
    exact = a.exact and b.exact
    terms: dict = {}
    for left, cl in a.terms.items():
        for right, cr in b.terms.items():
            coeff = _as_coeff(cl, exact) * _as_coeff(cr, exact)
            for key in _monomial_product(system, left, right):
                hit = terms.get(key)
                terms[key] = coeff if hit is None else hit + coeff
    return AlgebraElement(system, _drop_zeros(terms), exact)


def _monomial_product(system, left: Monomial, right: Monomial):
    graph = system.graph
    g, h = left.g, right.g
    h_inv = system.inverse(h)
    out = []
    for lam, omega in graph.lambda_min(left.nu, right.mu):
        mu = graph.compose(left.mu, system.act_path(g, lam))
        pulled = system.act_path(h_inv, omega)
        mid = system.multiply(system.restrict_path(g, lam),
                              system.restrict_path(h, pulled))
        nu = graph.compose(right.nu, pulled)
        out.append(_canonical_monomial(system, mu, mid, nu))
    return out


def adjoint(a: AlgebraElement) -> AlgebraElement:
    system = a.system
    terms: dict = {}
    for key, val in a.terms.items():
        flipped = _canonical_monomial(system, key.nu,
                                      system.inverse(key.g), key.mu)
        conj = val.conjugate()
        hit = terms.get(flipped)
        terms[flipped] = conj if hit is None else hit + conj
    return AlgebraElement(system, _drop_zeros(terms), a.exact)


def max_deviation(a: AlgebraElement, b: AlgebraElement) -> float:
    """Largest raw coefficient difference between two elements."""
    keys = set(a.terms) | set(b.terms)
    worst = 0.0
    for key in keys:
        ca = _as_coeff(a.coefficient(key), False)
        cb = _as_coeff(b.coefficient(key), False)
        worst = max(worst, abs(ca - cb))
    return worst


def _terms_match(a: AlgebraElement, b: AlgebraElement, tol: float) -> bool:
    if a.exact and b.exact:
        return a.terms == b.terms
    return max_deviation(a, b) <= tol


def refine(a: AlgebraElement, degree) -> AlgebraElement:
    """Rewrite through the exhaustive decomposition at the given
    degree: every monomial's right leg is extended to degree-v-join."""
    return multiply(a, diagonal_identity(a.system, degree, a.exact))


def elements_equal(a: AlgebraElement, b: AlgebraElement,
                   tol: float = COEFF_TOL) -> bool:
    """Equality at the dense-span level.

    Formal sums that differ as coefficient maps can still represent
    the same element through the exhaustive decomposition (the sum of
    s_e s_e* over a vertex's edges is that vertex's projection), so a
    raw mismatch is retried after refining both sides to the join of
    all right-leg degrees.
    """
    if _terms_match(a, b, tol):
        return True
    target = zero_degree(a.system.graph.k)
    for part in (a, b):
        for key in part.terms:
            target = join_degrees(target, key.nu.degree)
    return _terms_match(refine(a, target), refine(b, target), tol)


def periodicity_unitary(system, m, n, elements=None, ball_radius: int = 3,
                        exact: bool = True) -> AlgebraElement:
    """V_{m,n}: the sum of all cycline monomials at degrees (m, n).

    Every degree-m path must head exactly one triple; a partial fiber
    means the group ball was too small to witness periodicity."""
    m = tuple(m)
    n = tuple(n)
    if elements is None:
        elements = system.restriction_closure(system.word_ball(ball_radius))
    triples = list(dict.fromkeys(cycline_triples(system, m, n, elements)))
    if not triples:
        raise NotPeriodic(f"no cycline triples at degrees {m}, {n}")
    heads = [mu for mu, _, _ in triples]
    fiber = system.graph.paths_of_degree(m)
    if len(heads) != len(set(heads)) or len(heads) != len(fiber):
        raise IncompleteTriples(
            f"{len(heads)} triples for a fiber of {len(fiber)} paths")
    return element(system, [(mu, g, nu, 1) for mu, g, nu in triples], exact)


def expectation(system, a: AlgebraElement) -> AlgebraElement:
    """Keep exactly the cycline monomials; the conditional expectation
    onto the self-similar cycline subalgebra."""
    terms = {
        key: val for key, val in a.terms.items()
        if is_cycline(system, key.mu, key.g, key.nu).verdict
    }
    return AlgebraElement(system, dict(terms), a.exact)


def is_central_on_generators(system, a: AlgebraElement,
                             tol: float = COEFF_TOL) -> bool:
    """Whether ``a`` commutes with every edge monomial, vertex
    projection, and generator unitary."""
    graph = system.graph
    probes = []
    for row in graph.edges:
        for e in row:
            probes.append(edge_monomial(system, e, a.exact))
    for v in range(graph.num_vertices):
        probes.append(vertex_projection(system, v, a.exact))
    for gen in system.generators:
        probes.append(generator_unitary(
            system, system.generator_element(gen.name), a.exact))
    return all(elements_equal(multiply(a, x), multiply(x, a), tol)
               for x in probes)


# -- serialization -------------------------------------------------------

def _path_to_json(p: Path):
    return {"range": p.range_vertex,
            "edges": [[e.color + 1, e.id] for e in p.edges]}


def _path_from_json(graph, obj) -> Path:
    edges = [graph.edge(color - 1, eid) for color, eid in obj["edges"]]
    return graph.path(edges, range_vertex=obj["range"])


def _element_key_to_json(key):
    return key if isinstance(key, int) else list(key)


def element_to_json(a: AlgebraElement) -> list:
    out = []
    for key, val in a.terms.items():
        coeff = _as_coeff(val, False)
        out.append({
            "mu": _path_to_json(key.mu),
            "g": _element_key_to_json(key.g.key),
            "nu": _path_to_json(key.nu),
            "re": coeff.real,
            "im": coeff.imag,
        })
    out.sort(key=lambda row: (row["mu"]["range"], row["mu"]["edges"],
                              row["nu"]["range"], row["nu"]["edges"],
                              str(row["g"])))
    return out


def element_from_json(system, rows, exact: bool = False) -> AlgebraElement:
    entries = []
    for row in rows:
        mu = _path_from_json(system.graph, row["mu"])
        nu = _path_from_json(system.graph, row["nu"])
        raw = row["g"]
        g = system.element(raw) if isinstance(raw, int) \
            else system.element_from_word(tuple(raw))
        entries.append((mu, g, nu, complex(row["re"], row.get("im", 0.0))))
    return element(system, entries, exact)
