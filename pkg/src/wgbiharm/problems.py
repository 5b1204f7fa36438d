"""Manufactured solutions on the unit square with closed-form data.

Each problem stores the solution, its gradient and second derivatives, and
the right-hand side (the biharmonic of u), all as vectorized callables.  The
boundary data are derived from these: the Dirichlet trace is u itself, and
the normal/tangential derivative fields receive the edge geometry at call
time, which keeps the sign conventions tied to the edge they are used on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PI = np.pi


@dataclass(frozen=True)
class ManufacturedProblem:
    name: str
    u: callable
    ux: callable
    uy: callable
    uxx: callable
    uxy: callable
    uyy: callable
    f: callable

    @property
    def grad(self):
        return (self.ux, self.uy)

    @property
    def hess(self):
        return (self.uxx, self.uxy, self.uyy)

    def boundary_fields(self):
        """(xi, nu, tangential): trace plus the two derivative data fields.

        nu and tangential have signature f(x, y, normal, tangent) and return
        grad(u) dotted with the supplied direction.
        """

        def nu(x, y, normal, tangent):
            return self.ux(x, y) * normal[0] + self.uy(x, y) * normal[1]

        def tangential(x, y, normal, tangent):
            return self.ux(x, y) * tangent[0] + self.uy(x, y) * tangent[1]

        return self.u, nu, tangential


def _const(c):
    def field(x, y):
        return np.full_like(np.asarray(x, dtype=float), c)

    return field


def _poly2() -> ManufacturedProblem:
    return ManufacturedProblem(
        name="poly2",
        u=lambda x, y: x**2 + x * y + y**2,
        ux=lambda x, y: 2.0 * x + y,
        uy=lambda x, y: x + 2.0 * y,
        uxx=_const(2.0),
        uxy=_const(1.0),
        uyy=_const(2.0),
        f=_const(0.0),
    )


def _poly4() -> ManufacturedProblem:
    return ManufacturedProblem(
        name="poly4",
        u=lambda x, y: x**4 + y**4,
        ux=lambda x, y: 4.0 * x**3,
        uy=lambda x, y: 4.0 * y**3,
        uxx=lambda x, y: 12.0 * x**2 + 0.0 * y,
        uxy=_const(0.0),
        uyy=lambda x, y: 12.0 * y**2 + 0.0 * x,
        f=_const(48.0),
    )


def _sinsin() -> ManufacturedProblem:
    return ManufacturedProblem(
        name="sinsin",
        u=lambda x, y: np.sin(PI * x) * np.sin(PI * y),
        ux=lambda x, y: PI * np.cos(PI * x) * np.sin(PI * y),
        uy=lambda x, y: PI * np.sin(PI * x) * np.cos(PI * y),
        uxx=lambda x, y: -PI**2 * np.sin(PI * x) * np.sin(PI * y),
        uxy=lambda x, y: PI**2 * np.cos(PI * x) * np.cos(PI * y),
        uyy=lambda x, y: -PI**2 * np.sin(PI * x) * np.sin(PI * y),
        f=lambda x, y: 4.0 * PI**4 * np.sin(PI * x) * np.sin(PI * y),
    )


def _clamped() -> ManufacturedProblem:
    # u = g(x) g(y) with g(s) = s^2 (1-s)^2; both the trace and the normal
    # derivative vanish on the whole boundary of the unit square.
    def g(s):
        return s**2 * (1.0 - s) ** 2

    def g1(s):
        return 2.0 * s - 6.0 * s**2 + 4.0 * s**3

    def g2(s):
        return 2.0 - 12.0 * s + 12.0 * s**2

    return ManufacturedProblem(
        name="clamped",
        u=lambda x, y: g(x) * g(y),
        ux=lambda x, y: g1(x) * g(y),
        uy=lambda x, y: g(x) * g1(y),
        uxx=lambda x, y: g2(x) * g(y),
        uxy=lambda x, y: g1(x) * g1(y),
        uyy=lambda x, y: g(x) * g2(y),
        f=lambda x, y: 24.0 * g(y) + 2.0 * g2(x) * g2(y) + 24.0 * g(x),
    )


def registry() -> dict[str, ManufacturedProblem]:
    problems = [_poly2(), _poly4(), _sinsin(), _clamped()]
    return {p.name: p for p in problems}


def get_problem(name: str) -> ManufacturedProblem:
    problems = registry()
    if name not in problems:
        raise KeyError(f"unknown problem {name!r}; available: {sorted(problems)}")
    return problems[name]
