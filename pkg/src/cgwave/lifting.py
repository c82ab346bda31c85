"""Post-processing lift from C1 to C2 solutions.

Each slab gains a scalar kernel polynomial of one degree higher that
vanishes on all Hermite interpolation data of the slab, scaled by the jump
of second time derivatives at the slab's left endpoint. The result coincides
with the directly computed C2 scheme of one degree higher.
"""

from __future__ import annotations

import numpy as np

from . import polytime
from .slabsolver import DiscreteSolution, SlabSolution, WaveProblem

__all__ = ["lift"]


def lift(solution: DiscreteSolution, problem: WaveProblem) -> DiscreteSolution:
    """Lift a C1 solution of degree k to the C2 solution of degree k+1.

    The first correction compares the discrete second derivative at t=0
    against the value the C2 scheme's initial identity prescribes (one mass
    solve); afterwards each correction is the second-derivative jump against
    the already lifted previous slab, so the sweep is sequential.
    """
    if solution.scheme != "cgp_c1":
        raise ValueError(f"lift expects a cgp_c1 solution, got {solution.scheme!r}")
    k = solution.k
    if k < 4:
        raise ValueError(f"lift needs k >= 4 so the lifted degree is at least 5, got k={k}")

    space = solution.space
    ops = space.operators
    theta = polytime.theta_kernel(k)
    theta_dd_right = float(theta.deriv(2)(1.0))
    lifted_basis = solution.slabs[0].basis.extended(theta, scale_pow=2)

    first = solution.slabs[0]
    t0 = first.slab.t_left
    dU0 = first.eval(t0, 1)
    # second derivative the C2 scheme prescribes at t=0, in weak form
    target0 = dU0[1]
    target1 = ops.mass_factor.solve(space.load(problem.dt_f, t0) - ops.K @ dU0[0])
    d2U0 = first.eval(t0, 2)
    correction = np.stack((d2U0[0] - target0, d2U0[1] - target1))

    lifted = []
    for n, base in enumerate(solution.slabs):
        coeffs = np.concatenate((base.coeffs, -correction[:, None, :]), axis=1)
        lifted.append(SlabSolution(base.slab, lifted_basis, coeffs, k + 1))
        if n + 1 < len(solution.slabs):
            t_r = base.slab.t_right
            d2_tilde = base.eval(t_r, 2) - correction * theta_dd_right
            correction = solution.slabs[n + 1].eval(t_r, 2) - d2_tilde
    return DiscreteSolution(lifted, solution.boundaries, space, "cgp_c2", k + 1)
