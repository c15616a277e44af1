"""Equilibrium states at inverse temperature 1 for the gauge dynamics.

A state is parametrized by Perron data, a periodicity lattice, and a
trace on the lattice group: Haar (vanishing off 0), a character given
by a point of the torus, or a convex mixture of characters.  On a
cycline monomial the state evaluates to rho**(-d(mu)) x(s(mu))
tau(d(mu)-d(nu)); every other monomial evaluates to 0.  The dynamics
is fixed to r = ln rho per color, the only inverse-temperature-1
choice admitting equilibrium states.
"""
from __future__ import annotations

import cmath
import itertools
import random
from dataclasses import dataclass

from . import algebra
from .errors import NotInLattice, SimplexEmpty
from .intlattice import lattice_coordinates
from .kgraph import sub_degrees
from .periodicity import PeriodicityLattice, is_cycline, periodicity_group
from .perron import (PerronData, check_g_invariance, pf_state_value,
                     spectral_data)


@dataclass(frozen=True)
class TraceSpec:
    """A tracial state of the lattice group's C*-algebra.

    ``theta`` lists one torus coordinate per lattice basis vector;
    ``weights`` pairs mixture weights with such coordinate tuples.
    """

    kind: str
    theta: tuple[float, ...] | None = None
    weights: tuple[tuple[float, tuple[float, ...]], ...] | None = None


def haar_trace() -> TraceSpec:
    return TraceSpec("haar")


def character_trace(theta) -> TraceSpec:
    return TraceSpec("character", theta=tuple(float(t) for t in theta))


def mixture_trace(weights) -> TraceSpec:
    rows = tuple((float(w), tuple(float(t) for t in theta))
                 for w, theta in weights)
    total = sum(w for w, _ in rows)
    if any(w < 0 for w, _ in rows) or abs(total - 1.0) > 1e-9:
        raise ValueError("mixture weights must be a convex combination")
    return TraceSpec("mixture", weights=rows)


def trace_value(trace: TraceSpec, lattice: PeriodicityLattice, z) -> complex:
    """tau(z) for z in the lattice; coordinates are solved exactly
    against the Hermite basis."""
    coords = lattice_coordinates(lattice.basis, tuple(z))
    if coords is None:
        raise NotInLattice(
            f"degree difference {tuple(z)} is outside the computed lattice")
    if trace.kind == "haar":
        return 1.0 + 0j if not any(coords) else 0j
    if trace.kind == "character":
        phase = sum(t * c for t, c in zip(trace.theta, coords))
        return cmath.exp(2j * cmath.pi * phase)
    acc = 0j
    for weight, theta in trace.weights:
        phase = sum(t * c for t, c in zip(theta, coords))
        acc += weight * cmath.exp(2j * cmath.pi * phase)
    return acc


@dataclass
class KmsState:
    """An equilibrium state, defined when the eigenvector is constant
    on generator vertex orbits; otherwise the simplex is empty."""

    system: "ActionSystem"
    data: PerronData
    lattice: PeriodicityLattice
    trace: TraceSpec
    exists: bool


def make_kms_state(system, trace: TraceSpec | None = None,
                   data: PerronData | None = None,
                   lattice: PeriodicityLattice | None = None,
                   box_radius: int = 4, ball_radius: int = 3,
                   tol: float = 1e-9) -> KmsState:
    if data is None:
        data = spectral_data(system.graph)
    exists = check_g_invariance(data, system, tol)
    if lattice is None:
        lattice = periodicity_group(system, box_radius, ball_radius,
                                    perron_data=data, tol=tol)
    if trace is None:
        trace = haar_trace()
    if trace.kind == "character" and len(trace.theta) != lattice.rank:
        raise ValueError(
            f"character needs {lattice.rank} coordinates, got {len(trace.theta)}")
    if trace.kind == "mixture":
        for _, theta in trace.weights:
            if len(theta) != lattice.rank:
                raise ValueError(
                    f"mixture characters need {lattice.rank} coordinates")
    return KmsState(system, data, lattice, trace, exists)


def _require(state: KmsState) -> None:
    if not state.exists:
        raise SimplexEmpty(
            "the eigenvector is not constant on generator vertex orbits")


def evaluate(state: KmsState, a: "algebra.AlgebraElement") -> complex:
    """The state applied to an element; linear over monomials."""
    _require(state)
    total = 0j
    for key, coeff in a.terms.items():
        value = _evaluate_monomial(state, key)
        if value:
            total += algebra._as_coeff(coeff, False) * value
    return total


def _evaluate_monomial(state: KmsState, key) -> complex:
    if not is_cycline(state.system, key.mu, key.g, key.nu).verdict:
        return 0j
    z = sub_degrees(key.mu.degree, key.nu.degree)
    weight = pf_state_value(state.data, key.mu)
    return weight * trace_value(state.trace, state.lattice, z)


def gauge_scale(state: KmsState, a: "algebra.AlgebraElement"):
    """The analytic continuation of the dynamics at inverse temperature
    1: each monomial picks up rho**-(d(mu)-d(nu))."""
    entries = []
    for key, coeff in a.terms.items():
        factor = 1.0 / state.data.rho_power(
            sub_degrees(key.mu.degree, key.nu.degree))
        entries.append((key.mu, key.g, key.nu,
                        algebra._as_coeff(coeff, False) * factor))
    return algebra.element(state.system, entries)


@dataclass
class KmsReport:
    ok: bool
    max_deviation: float
    checked: int
    tol: float


def _monomials_up_to(system, bound, elements):
    """All monomials (mu, g, nu) with both degrees at most ``bound``."""
    graph = system.graph
    degrees = [tuple(d) for d in itertools.product(
        *(range(b + 1) for b in bound))]
    paths = [p for d in degrees for p in graph.paths_of_degree(d)]
    out = []
    for g in elements:
        for nu in paths:
            target = system.act_vertex(g, nu.source)
            for mu in paths:
                if mu.source == target:
                    out.append(algebra.monomial(system, mu, g, nu))
    return out


def verify_kms(state: KmsState, sample_count: int = 500,
               tol: float = 1e-9, seed: int = 20_08) -> KmsReport:
    """Check phi(xy) = phi(y * scale(x)) over all monomial pairs with
    degrees at most (1,...,1) plus random pairs up to (2,...,2)."""
    _require(state)
    system = state.system
    graph = system.graph
    elements = system.restriction_closure(
        [system.identity]
        + [system.generator_element(g.name) for g in system.generators])
    ones = tuple(1 for _ in range(graph.k))
    twos = tuple(2 for _ in range(graph.k))
    small = _monomials_up_to(system, ones, elements)
    big = _monomials_up_to(system, twos, elements)
    rng = random.Random(seed)
    pairs = itertools.chain(
        itertools.product(small, small),
        ((rng.choice(big), rng.choice(big)) for _ in range(sample_count)))
    worst = 0.0
    checked = 0
    for x, y in pairs:
        lhs = evaluate(state, algebra.multiply(x, y))
        rhs = evaluate(state, algebra.multiply(y, gauge_scale(state, x)))
        worst = max(worst, abs(lhs - rhs))
        checked += 1
    return KmsReport(worst < tol, worst, checked, tol)


@dataclass
class DiagonalReport:
    ok: bool
    max_deviation: float
    checked: int


def restrict_to_diagonal(state: KmsState, tol: float = 1e-9) -> DiagonalReport:
    """The state restricted to diagonal monomials must agree with the
    Perron-Frobenius values, and vertex values must be constant on
    generator orbits."""
    _require(state)
    system = state.system
    graph = system.graph
    worst = 0.0
    checked = 0
    twos = tuple(2 for _ in range(graph.k))
    for degree in itertools.product(*(range(b + 1) for b in twos)):
        for mu in graph.paths_of_degree(tuple(degree)):
            got = evaluate(state, algebra.monomial(
                system, mu, system.identity, mu))
            worst = max(worst, abs(got - pf_state_value(state.data, mu)))
            checked += 1
    for gen in system.generators:
        g = system.generator_element(gen.name)
        for v in range(graph.num_vertices):
            moved = evaluate(state, algebra.vertex_projection(
                system, system.act_vertex(g, v)))
            still = evaluate(state, algebra.vertex_projection(system, v))
            worst = max(worst, abs(moved - still))
            checked += 1
    return DiagonalReport(worst < tol, worst, checked)


@dataclass
class SimplexSummary:
    exists: bool
    rank: int | None
    verdict: str
    box_radius: int
    ball_radius: int
    basis: tuple | None


def simplex_summary(system, box_radius: int = 4, ball_radius: int = 3,
                    tol: float = 1e-9) -> SimplexSummary:
    """Classify the equilibrium-state simplex: empty when the
    invariance assumption fails, unique at lattice rank 0, otherwise
    the measures on a torus of the lattice rank."""
    data = spectral_data(system.graph)
    if not check_g_invariance(data, system, tol):
        return SimplexSummary(False, None, "empty", box_radius, ball_radius,
                              None)
    lattice = periodicity_group(system, box_radius, ball_radius,
                                perron_data=data, tol=tol)
    if lattice.rank == 0:
        verdict = "unique KMS state"
    else:
        verdict = (f"simplex of tracial states of C*(Z^{lattice.rank}): "
                   f"probability measures on the {lattice.rank}-torus")
    return SimplexSummary(True, lattice.rank, verdict, box_radius,
                          ball_radius, lattice.basis)
