"""Error norms, energy functional, time sampling grid, and convergence rates.

The sup-in-time columns scan a uniform per-slab sampling grid; the
L2-in-time columns use per-slab Gauss quadrature and are therefore
insensitive to the sampling density.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import polytime
from .slabsolver import DiscreteSolution, WaveProblem

__all__ = ["ErrorReport", "sampling_grid", "error_report", "energy", "eoc"]

REPORT_COLUMNS = ("e0_linf_l2", "e1_linf_l2", "energy_linf",
                  "e0_l2_l2", "e1_l2_l2", "energy_l2")


@dataclass
class ErrorReport:
    """The six error columns of the convergence tables plus level metadata."""

    tau: float
    h: float
    e0_linf_l2: float
    e1_linf_l2: float
    energy_linf: float
    e0_l2_l2: float
    e1_l2_l2: float
    energy_l2: float

    def values(self) -> list[float]:
        return [getattr(self, name) for name in REPORT_COLUMNS]


def sampling_grid(boundaries, samples_per_slab: int) -> np.ndarray:
    """Uniform per-slab sample times plus the final time; 1000 samples per
    slab reproduces the reference tables' evaluation grid."""
    if samples_per_slab < 2:
        raise ValueError("need at least 2 samples per slab")
    boundaries = np.asarray(boundaries, dtype=float)
    pieces = []
    for t0, t1 in zip(boundaries[:-1], boundaries[1:]):
        j = np.arange(samples_per_slab)
        pieces.append(t0 + j * (t1 - t0) / samples_per_slab)
    pieces.append(boundaries[-1:])
    return np.concatenate(pieces)


class _ErrorSampler:
    """Batched spatial error norms of one discrete solution over many times."""

    def __init__(self, space, problem: WaveProblem):
        self.space = space
        self.problem = problem
        q = space.quad_data(space.r + 3)
        self.B, self.Bx, self.By = q["B"], q["Bx"], q["By"]
        self.w2 = q["w2"]
        self.X = q["X"][:, :, None]
        self.Y = q["Y"][:, :, None]

    def _cell_dofs(self, vec_t: np.ndarray) -> np.ndarray:
        # vec_t: (n_dof, nt) -> (ncells, nloc, nt) with boundary zeros
        full = np.zeros((self.space.n_full, vec_t.shape[1]))
        full[self.space.interior_idx] = vec_t
        return full[self.space.dof_map]

    def norms(self, sol, xhat: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(|e0|_L2, |e1|_L2, |grad e0|_L2) at the given reference times."""
        times = sol.slab.to_slab(xhat)
        C = sol.coeff_at(xhat)                       # (2, n_dof, nt)
        tt = times[None, None, :]
        d0 = self._cell_dofs(C[0])
        d1 = self._cell_dofs(C[1])
        e0 = np.einsum("ql,clt->cqt", self.B, d0) - self.problem.exact_u(self.X, self.Y, tt)
        e1 = np.einsum("ql,clt->cqt", self.B, d1) - self.problem.exact_dt_u(self.X, self.Y, tt)
        gx, gy = self.problem.exact_grad_u(self.X, self.Y, tt)
        ex = np.einsum("ql,clt->cqt", self.Bx, d0) - gx
        ey = np.einsum("ql,clt->cqt", self.By, d0) - gy
        l2_0 = np.sqrt(np.einsum("cqt,q->t", e0 * e0, self.w2))
        l2_1 = np.sqrt(np.einsum("cqt,q->t", e1 * e1, self.w2))
        h1_0 = np.sqrt(np.einsum("cqt,q->t", ex * ex + ey * ey, self.w2))
        return l2_0, l2_1, h1_0


def error_report(solution: DiscreteSolution, problem: WaveProblem,
                 samples_per_slab: int = 100, block: int = 256) -> ErrorReport:
    """Six-column report: sup-in-time norms over the sampling grid and
    L2-in-time norms via a (k+2)-point Gauss rule per slab."""
    if not problem.has_exact or problem.exact_grad_u is None:
        raise ValueError("error report needs exact_u, exact_dt_u and exact_grad_u")
    if samples_per_slab < 2:
        raise ValueError("need at least 2 samples per slab")
    space = solution.space
    sampler = _ErrorSampler(space, problem)
    gauss = polytime.build_rule("gauss", solution.k + 3)

    max_e0 = max_e1 = max_en = 0.0
    sq_e0 = sq_e1 = sq_en = 0.0
    xhat_scan = -1.0 + 2.0 * np.arange(samples_per_slab) / samples_per_slab
    for n, sol in enumerate(solution.slabs):
        xs = xhat_scan
        if n == len(solution.slabs) - 1:
            xs = np.concatenate((xs, [1.0]))
        for start in range(0, xs.size, block):
            l2_0, l2_1, h1_0 = sampler.norms(sol, xs[start:start + block])
            max_e0 = max(max_e0, float(l2_0.max()))
            max_e1 = max(max_e1, float(l2_1.max()))
            max_en = max(max_en, float(np.sqrt(l2_1**2 + h1_0**2).max()))
        l2_0, l2_1, h1_0 = sampler.norms(sol, gauss.nodes)
        w = gauss.value_weights * sol.slab.half
        sq_e0 += float(w @ l2_0**2)
        sq_e1 += float(w @ l2_1**2)
        sq_en += float(w @ (l2_1**2 + h1_0**2))

    mesh = getattr(space, "mesh", None)
    return ErrorReport(
        tau=float(solution.boundaries[1] - solution.boundaries[0]),
        h=mesh.h if mesh is not None else float("nan"),
        e0_linf_l2=max_e0,
        e1_linf_l2=max_e1,
        energy_linf=max_en,
        e0_l2_l2=np.sqrt(sq_e0),
        e1_l2_l2=np.sqrt(sq_e1),
        energy_l2=np.sqrt(sq_en),
    )


def energy(solution: DiscreteSolution, t: float) -> float:
    """Discrete energy |u1|^2 + |grad u0|^2 at time t, conserved at the time
    nodes when the forcing vanishes."""
    if t < -1e-12 or t > solution.T + 1e-12:
        raise ValueError(f"time {t} outside [0, {solution.T}]")
    ops = solution.space.operators
    x0, x1 = solution.evaluate(t, 0)
    return float(x1 @ (ops.M @ x1) + x0 @ (ops.K @ x0))


def eoc(errors, refinement_factor: float = 2.0) -> np.ndarray:
    """Experimental orders of convergence of consecutive error pairs."""
    e = np.asarray(errors, dtype=float)
    if e.size < 2:
        raise ValueError("need at least two error values")
    if np.any(e <= 0.0):
        raise ValueError("EOC needs strictly positive error values")
    return np.log(e[:-1] / e[1:]) / np.log(refinement_factor)
