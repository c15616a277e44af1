"""Common Perron-Frobenius data of the coordinate matrices.

The coordinate matrices of a strongly connected finite rank-k graph
commute and share a unique positive l1-normalized eigenvector; the
per-color spectral radii form the vector rho.  Power iteration runs on
I + product of the coordinate matrices, which is primitive whenever the
graph is strongly connected, so periodic skeletons converge too.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import NoConvergence, NotStronglyConnected
from .kgraph import KGraph

INTEGER_TOL = 1e-9


@dataclass
class PerronData:
    """Spectral data: per-color radii, the common eigenvector, the
    residuals achieved, and an exact integer certificate when available."""

    rho: tuple[float, ...]
    x: np.ndarray
    residuals: tuple[float, ...]
    iterations: int
    rho_int: tuple[int, ...] | None

    def rho_power(self, degree) -> float:
        out = 1.0
        for base, exp in zip(self.rho, degree):
            out *= base ** exp
        return out


def spectral_data(graph: KGraph, tol: float = 1e-12,
                  max_iter: int = 100_000) -> PerronData:
    """Power iteration for the common eigenvector and the radii vector."""
    if not graph.strongly_connected():
        raise NotStronglyConnected("spectral data needs a strongly connected graph")
    mats = [graph.coordinate_matrix(color) for color in range(graph.k)]
    product = np.eye(graph.num_vertices)
    for mat in mats:
        product = product @ mat
    shifted = product + np.eye(graph.num_vertices)
    x = np.full(graph.num_vertices, 1.0 / graph.num_vertices)
    iterations = 0
    residuals = None
    for iterations in range(1, max_iter + 1):
        x = shifted @ x
        x /= x.sum()
        rho = tuple(float((mat @ x).sum()) for mat in mats)
        residuals = tuple(
            float(np.abs(mat @ x - r * x).sum()) for mat, r in zip(mats, rho))
        if max(residuals) < tol:
            break
    else:
        raise NoConvergence(
            f"residual {max(residuals):.3e} after {max_iter} iterations")
    rho = tuple(float((mat @ x).sum()) for mat in mats)
    return PerronData(rho, x, residuals, iterations, _integer_certificate(mats, rho, x))


def _integer_certificate(mats, rho, x):
    """Round rho to integers and certify by an exact rational
    eigenvector check; None unless every color certifies."""
    ints = []
    for r in rho:
        r_int = round(r)
        if abs(r - r_int) >= INTEGER_TOL:
            return None
        ints.append(int(r_int))
    rational = [Fraction(v).limit_denominator(10 ** 9) for v in x / x.max()]
    for mat, r_int in zip(mats, ints):
        for row in range(len(rational)):
            acc = sum(Fraction(int(mat[row, col])) * rational[col]
                      for col in range(len(rational)))
            if acc != r_int * rational[row]:
                return None
    return tuple(ints)


def pf_state_value(data: PerronData, mu) -> float:
    """The diagonal state value rho**(-d(mu)) * x(s(mu))."""
    return float(data.x[mu.source]) / data.rho_power(mu.degree)


def check_g_invariance(data: PerronData, system, tol: float = 1e-9) -> bool:
    """Whether the eigenvector is constant on generator vertex orbits;
    equilibrium states exist exactly when it is."""
    for gen in system.generators:
        g = system.generator_element(gen.name)
        for v in range(system.graph.num_vertices):
            if abs(float(data.x[system.act_vertex(g, v)] - data.x[v])) >= tol:
                return False
    return True


def rho_kernel_lattice(data: PerronData, box_radius: int,
                       tol: float = 1e-9):
    """Hermite basis for the box vectors with ``rho ** z == 1``; exact
    integer arithmetic once every radius is integer-certified."""
    import itertools

    from .intlattice import hnf_basis

    k = len(data.rho)
    members = []
    for z in itertools.product(range(-box_radius, box_radius + 1), repeat=k):
        if all(v == 0 for v in z):
            continue
        if rho_power_is_one(data, z, tol):
            members.append(z)
    return hnf_basis(members, k)


def rho_power_is_one(data: PerronData, z, tol: float = 1e-9) -> bool:
    if data.rho_int is not None:
        value = Fraction(1)
        for base, exp in zip(data.rho_int, z):
            value *= Fraction(base) ** exp
        return value == 1
    log_sum = sum(exp * np.log(base) for base, exp in zip(data.rho, z))
    return abs(log_sum) < tol
