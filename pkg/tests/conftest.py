"""Shared random-instance generators for the property suites.

Instances are integer-ish (coefficients in [-5, 5]) and anchored at an
integer point so feasibility, strict feasibility, and boundedness are
guaranteed by construction.
"""

import numpy as np
import pytest

from robustmolp.model import (Polytope, Singleton, UncertainMOLP,
                              reduce_constraints, validate_problem)
from robustmolp.numerics import LinearProgram, solve_lp

_INF = float("inf")


def random_feasible_rows(rng, n=None, p=None, min_slack=0):
    """Nominal rows {a.x >= b} guaranteed feasible at an integer anchor."""
    n = n if n is not None else int(rng.integers(1, 4))
    p = p if p is not None else int(rng.integers(1, 6))
    x0 = rng.integers(-3, 4, n).astype(float)
    rows = []
    for _ in range(p):
        a = rng.integers(-5, 6, n).astype(float)
        if not a.any():
            a[int(rng.integers(0, n))] = float(rng.choice([-1, 1]))
        slack = float(rng.integers(min_slack, min_slack + 3))
        rows.append((a, float(a @ x0 - slack)))
    return rows, x0


def random_polyhedral_problem(rng, m_max=3, n_max=4, p_max=4, box=6.0):
    """All-singleton/polytope instance with u >= 0 and a bounding box."""
    m = int(rng.integers(1, m_max + 1))
    n = int(rng.integers(1, n_max + 1))
    x0 = rng.integers(-2, 3, n).astype(float)
    cons = []
    for _ in range(int(rng.integers(1, p_max + 1))):
        if rng.integers(0, 2) == 0:
            a = rng.integers(-5, 6, n).astype(float)
            if not a.any():
                a[0] = 1.0
            cons.append(Singleton(a, float(a @ x0 - rng.integers(0, 3))))
        else:
            verts = []
            for _ in range(int(rng.integers(1, 4))):
                a = rng.integers(-5, 6, n).astype(float)
                if not a.any():
                    a[0] = 1.0
                b = float(a @ x0 - rng.integers(0, 3))
                verts.append(np.concatenate([a, [b]]))
            cons.append(Polytope(tuple(verts)))
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        cons.append(Singleton(e.copy(), -box))
        cons.append(Singleton(-e, -box))
    C = rng.integers(-5, 6, (m, n)).astype(float)
    u = rng.integers(0, 4, m).astype(float)
    v = rng.integers(-5, 6, n).astype(float)
    return UncertainMOLP(m, n, C, u, v, tuple(cons))


def vertex_candidate(rng, problem):
    """A vertex of the reduced feasible set (basic optimum of a random LP)."""
    X = reduce_constraints(validate_problem(problem))
    n = problem.n
    c = rng.integers(-5, 6, n).astype(float)
    lp = LinearProgram.build(c, [(r.a, r.b, ">=") for r in X.rows],
                             np.full(n, -_INF))
    sol = solve_lp(lp)
    assert sol.optimal, "bounding box should keep the LP bounded"
    return sol.x


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
