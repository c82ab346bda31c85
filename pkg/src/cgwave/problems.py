"""Built-in manufactured problems on the unit square with final time T.

Forcing terms and their time derivatives are derived analytically and
hard-coded; a wrong dt_f would silently degrade the temporal order, so no
finite-difference fallback exists anywhere in the solver.
"""

from __future__ import annotations

import numpy as np

from .slabsolver import WaveProblem

__all__ = ["make_problem", "PROBLEM_NAMES"]

PROBLEM_NAMES = ("exsol1", "exsol2", "standing-wave", "zero")


def _exsol1(T: float) -> WaveProblem:
    # u = sin(4 pi t) sin(2 pi x) sin(2 pi y)
    w = lambda x, y: np.sin(2 * np.pi * x) * np.sin(2 * np.pi * y)
    wx = lambda x, y: 2 * np.pi * np.cos(2 * np.pi * x) * np.sin(2 * np.pi * y)
    wy = lambda x, y: 2 * np.pi * np.sin(2 * np.pi * x) * np.cos(2 * np.pi * y)
    s = lambda t: np.sin(4 * np.pi * t)
    ds = lambda t: 4 * np.pi * np.cos(4 * np.pi * t)
    return WaveProblem(
        u0=lambda x, y: 0.0 * x,
        u1=lambda x, y: 4 * np.pi * w(x, y),
        grad_u0=lambda x, y: (0.0 * x, 0.0 * y),
        grad_u1=lambda x, y: (4 * np.pi * wx(x, y), 4 * np.pi * wy(x, y)),
        f=lambda x, y, t: -8 * np.pi**2 * s(t) * w(x, y),
        dt_f=lambda x, y, t: -8 * np.pi**2 * ds(t) * w(x, y),
        exact_u=lambda x, y, t: s(t) * w(x, y),
        exact_dt_u=lambda x, y, t: ds(t) * w(x, y),
        exact_grad_u=lambda x, y, t: (s(t) * wx(x, y), s(t) * wy(x, y)),
        exact_grad_dt_u=lambda x, y, t: (ds(t) * wx(x, y), ds(t) * wy(x, y)),
        T=T,
    )


def _exsol2(T: float) -> WaveProblem:
    # u = sin(4 pi t) x (1-x) y (1-y); in Q_2, so r >= 2 resolves space exactly
    w = lambda x, y: x * (1 - x) * y * (1 - y)
    wx = lambda x, y: (1 - 2 * x) * y * (1 - y)
    wy = lambda x, y: x * (1 - x) * (1 - 2 * y)
    lap = lambda x, y: -2 * y * (1 - y) - 2 * x * (1 - x)
    s = lambda t: np.sin(4 * np.pi * t)
    ds = lambda t: 4 * np.pi * np.cos(4 * np.pi * t)
    return WaveProblem(
        u0=lambda x, y: 0.0 * x,
        u1=lambda x, y: 4 * np.pi * w(x, y),
        grad_u0=lambda x, y: (0.0 * x, 0.0 * y),
        grad_u1=lambda x, y: (4 * np.pi * wx(x, y), 4 * np.pi * wy(x, y)),
        f=lambda x, y, t: s(t) * (-16 * np.pi**2 * w(x, y) - lap(x, y)),
        dt_f=lambda x, y, t: ds(t) * (-16 * np.pi**2 * w(x, y) - lap(x, y)),
        exact_u=lambda x, y, t: s(t) * w(x, y),
        exact_dt_u=lambda x, y, t: ds(t) * w(x, y),
        exact_grad_u=lambda x, y, t: (s(t) * wx(x, y), s(t) * wy(x, y)),
        exact_grad_dt_u=lambda x, y, t: (ds(t) * wx(x, y), ds(t) * wy(x, y)),
        T=T,
    )


def _standing_wave(T: float) -> WaveProblem:
    # u = cos(sqrt(2) pi t) sin(pi x) sin(pi y): homogeneous forcing
    c = np.sqrt(2.0) * np.pi
    w = lambda x, y: np.sin(np.pi * x) * np.sin(np.pi * y)
    wx = lambda x, y: np.pi * np.cos(np.pi * x) * np.sin(np.pi * y)
    wy = lambda x, y: np.pi * np.sin(np.pi * x) * np.cos(np.pi * y)
    return WaveProblem(
        u0=w,
        u1=lambda x, y: 0.0 * x,
        grad_u0=lambda x, y: (wx(x, y), wy(x, y)),
        grad_u1=lambda x, y: (0.0 * x, 0.0 * y),
        f=lambda x, y, t: 0.0 * x,
        dt_f=lambda x, y, t: 0.0 * x,
        exact_u=lambda x, y, t: np.cos(c * t) * w(x, y),
        exact_dt_u=lambda x, y, t: -c * np.sin(c * t) * w(x, y),
        exact_grad_u=lambda x, y, t: (np.cos(c * t) * wx(x, y), np.cos(c * t) * wy(x, y)),
        exact_grad_dt_u=lambda x, y, t: (
            -c * np.sin(c * t) * wx(x, y),
            -c * np.sin(c * t) * wy(x, y),
        ),
        T=T,
    )


def _zero(T: float) -> WaveProblem:
    z2 = lambda x, y: 0.0 * x
    z3 = lambda x, y, t: 0.0 * x
    zg2 = lambda x, y: (0.0 * x, 0.0 * y)
    zg3 = lambda x, y, t: (0.0 * x, 0.0 * y)
    return WaveProblem(
        u0=z2, u1=z2, grad_u0=zg2, grad_u1=zg2, f=z3, dt_f=z3,
        exact_u=z3, exact_dt_u=z3, exact_grad_u=zg3, exact_grad_dt_u=zg3, T=T,
    )


_BUILDERS = {
    "exsol1": _exsol1,
    "exsol2": _exsol2,
    "standing-wave": _standing_wave,
    "zero": _zero,
}


def make_problem(name: str, T: float = 1.0) -> WaveProblem:
    try:
        return _BUILDERS[name](T)
    except KeyError:
        raise ValueError(f"unknown problem {name!r}; choose from {PROBLEM_NAMES}") from None
