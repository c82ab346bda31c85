"""Slab-by-slab time marching for the wave equation in first-order form.

Three schemes share one assembly path, differing in how many endpoint
derivative orders are collocated (m), the quadrature rule, and the size of
the variational test space:

    cgp     m=0: continuity only, (k+1)-point Gauss-Lobatto, tests P_{k-1}
    cgp_c1  m=1: first-derivative collocation, short Hermite rule, tests P_{k-3}
    cgp_c2  m=2: second-derivative collocation, long Hermite rule, tests P_{k-5}

Each slab solves one block system whose blocks are scalar combinations of
the shared mass/stiffness matrices. Collocation rows are imposed in weak
(mass-matrix) form so no inverse mass ever appears, and the block matrix is
slab-independent for a uniform step, so it is factorized once per run.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import legendre as npleg

from . import polytime
from .polytime import PolyCoeffs, SlabMap
from .sparsela import BlockSystem, SingularMatrixError

__all__ = [
    "WaveProblem",
    "TimeBasis",
    "SlabSolution",
    "DiscreteSolution",
    "SlabStepper",
    "SolverError",
    "SCHEME_MIN_K",
    "initial_state",
    "advance_slab",
    "run",
    "evaluate",
    "collocation_residuals",
    "interface_jumps",
    "evolution_residual",
    "gl_form_residual",
]

SCHEME_ORDERS = {"cgp": 0, "cgp_c1": 1, "cgp_c2": 2}
SCHEME_MIN_K = {"cgp": 1, "cgp_c1": 3, "cgp_c2": 5}


class SolverError(RuntimeError):
    """A slab solve failed; carries the (1-based) slab index."""

    def __init__(self, slab_index: int, message: str):
        super().__init__(f"slab {slab_index}: {message}")
        self.slab_index = slab_index


@dataclass
class WaveProblem:
    """Data of one wave problem: initial values, forcing, and (optionally)
    the exact solution used for error measurement.

    dt_f is required: the Hermite-type quadrature evaluates the forcing's
    time derivative at the slab endpoints.
    """

    u0: object
    u1: object
    f: object
    dt_f: object
    T: float = 1.0
    grad_u0: object = None
    grad_u1: object = None
    exact_u: object = None
    exact_dt_u: object = None
    exact_grad_u: object = None
    exact_grad_dt_u: object = None

    @property
    def has_exact(self) -> bool:
        return self.exact_u is not None and self.exact_dt_u is not None

    def check_manufactured(self, n_samples: int = 20, tol: float = 1e-8, seed: int = 0) -> float:
        """Verify f = dtt u - Lap u at random space-time samples using 5-point
        finite-difference stencils on the supplied derivative callables.

        The tolerance is relative to the forcing scale. Returns the largest
        scaled residual found.
        """
        if self.exact_dt_u is None or self.exact_grad_u is None:
            raise ValueError("manufactured check needs exact_dt_u and exact_grad_u")
        rng = np.random.default_rng(seed)
        x = rng.uniform(0.05, 0.95, n_samples)
        y = rng.uniform(0.05, 0.95, n_samples)
        t = rng.uniform(0.0, self.T, n_samples)
        h = 1e-3

        def d5(fn, u, *args):
            return (
                -fn(u + 2 * h, *args) + 8 * fn(u + h, *args)
                - 8 * fn(u - h, *args) + fn(u - 2 * h, *args)
            ) / (12 * h)

        dtt = d5(lambda tt: np.asarray(self.exact_dt_u(x, y, tt)), t)
        lap = d5(lambda xx: np.asarray(self.exact_grad_u(xx, y, t)[0]), x)
        lap = lap + d5(lambda yy: np.asarray(self.exact_grad_u(x, yy, t)[1]), y)
        fv = np.broadcast_to(np.asarray(self.f(x, y, t), dtype=float), x.shape)
        scale = 1.0 + np.max(np.abs(fv))
        worst = float(np.max(np.abs(dtt - lap - fv)) / scale)
        if worst > tol:
            raise ValueError(f"forcing inconsistent with exact solution: residual {worst:.3e}")
        return worst


class TimeBasis:
    """Nodal basis of P_k on [-1, 1] dual to endpoint values and derivatives
    up to order m plus point values at symmetric interior nodes.

    Basis function j carries a tau-scaling power equal to its derivative
    order, so slab coefficients are plain endpoint values/derivatives.
    """

    def __init__(self, k: int, m: int):
        if k < 2 * m + 1:
            raise ValueError(f"degree {k} too small for {m} endpoint derivative orders")
        self.k = k
        self.m = m
        n_int = k - 1 - 2 * m
        if m == 0:
            interior = polytime.jacobi_roots(1, 1, n_int)  # Gauss-Lobatto lattice
        else:
            interior = polytime.jacobi_roots(2, 2, n_int)
        fns = [(-1.0, d) for d in range(m + 1)]
        fns += [(float(x), 0) for x in interior]
        fns += [(1.0, d) for d in range(m + 1)]
        self.interior_nodes = interior
        self.functionals = fns
        self.funcs: list[PolyCoeffs] = polytime.cardinal_basis(fns, k)
        self.scale_pows = np.array([d for (_, d) in fns])
        self._deriv_cache: dict[tuple[int, int], PolyCoeffs] = {}

    @property
    def n_funcs(self) -> int:
        return len(self.funcs)

    def idx_left(self, d: int) -> int:
        return d

    def idx_right(self, d: int) -> int:
        return self.n_funcs - (self.m + 1) + d

    def idx_interior(self, s: int) -> int:
        return self.m + 1 + s

    def _dfunc(self, j: int, order: int) -> PolyCoeffs:
        key = (j, order)
        if key not in self._deriv_cache:
            self._deriv_cache[key] = self.funcs[j].deriv(order)
        return self._deriv_cache[key]

    def eval_matrix(self, xhat, order: int = 0) -> np.ndarray:
        """Values of the order-th reference derivative of every basis
        function at the given reference points; shape (n_funcs, n_points)."""
        x = np.atleast_1d(np.asarray(xhat, dtype=float))
        return np.array([self._dfunc(j, order)(x) for j in range(self.n_funcs)])

    def extended(self, extra: PolyCoeffs, scale_pow: int) -> "TimeBasis":
        """Copy with one appended function (used by the lifting step)."""
        out = TimeBasis.__new__(TimeBasis)
        out.k = max(self.k, extra.degree)
        out.m = self.m
        out.interior_nodes = self.interior_nodes
        out.functionals = self.functionals + [None]
        out.funcs = self.funcs + [extra]
        out.scale_pows = np.append(self.scale_pows, scale_pow)
        out._deriv_cache = {}
        return out


@dataclass
class SlabSolution:
    """Polynomial-in-time solution on one slab: a coefficient tensor over
    (component, time basis function, interior spatial DOF)."""

    slab: SlabMap
    basis: TimeBasis
    coeffs: np.ndarray  # (2, n_funcs, n_dof)
    k: int

    def coeff_at(self, xhat, order: int = 0) -> np.ndarray:
        """Both components' DOF vectors at reference points; shape
        (2, n_dof, n_points). Derivatives are in slab time."""
        x = np.atleast_1d(np.asarray(xhat, dtype=float))
        half = self.slab.half
        psi = self.basis.eval_matrix(x, order)
        psi = psi * half ** self.basis.scale_pows[:, None] / half**order
        return np.einsum("cbn,bt->cnt", self.coeffs, psi)

    def eval(self, t: float, order: int = 0) -> np.ndarray:
        """Both components at one time; shape (2, n_dof)."""
        return self.coeff_at(self.slab.to_reference(t), order)[:, :, 0]

    def end_state(self) -> tuple[np.ndarray, np.ndarray]:
        vals = self.coeff_at(1.0)[:, :, 0]
        return vals[0], vals[1]


@dataclass
class DiscreteSolution:
    """Ordered slab solutions tiling (0, T], plus the space they live on."""

    slabs: list[SlabSolution]
    boundaries: np.ndarray
    space: object
    scheme: str
    k: int

    @property
    def T(self) -> float:
        return float(self.boundaries[-1])

    def slab_index(self, t: float) -> int:
        """Slab owning t with the right-sided convention at interfaces:
        interface points belong to the later slab, except t = T."""
        if t < self.boundaries[0] - 1e-12 or t > self.boundaries[-1] + 1e-12:
            raise ValueError(f"time {t} outside [0, {self.T}]")
        idx = int(np.searchsorted(self.boundaries, t, side="right")) - 1
        return min(max(idx, 0), len(self.slabs) - 1)

    def evaluate(self, t: float, order: int = 0) -> np.ndarray:
        return self.slabs[self.slab_index(t)].eval(t, order)


def _legendre_values(n: int, x) -> np.ndarray:
    """P_i(x) for i < n; shape (n, len(x))."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty((n, x.size))
    for i in range(n):
        e = np.zeros(i + 1)
        e[i] = 1.0
        out[i] = npleg.legval(x, e)
    return out


def _legendre_deriv_at(n: int, x: float) -> np.ndarray:
    out = np.empty(n)
    for i in range(n):
        e = np.zeros(i + 1)
        e[i] = 1.0
        d = npleg.legder(e) if i > 0 else np.zeros(1)
        out[i] = npleg.legval(x, d)
    return out


def _legendre_inner(p: PolyCoeffs, i: int) -> float:
    """Exact integral of P_i times a modal polynomial over [-1, 1]."""
    c = p.coef
    return 2.0 * float(c[i]) / (2 * i + 1) if i < c.size else 0.0


class SlabStepper:
    """Precomputed machinery to advance one scheme across uniform slabs.

    The block matrix couples only scalar multiples of the shared M and K and
    does not depend on the slab position, so its LU factorization is reused
    for every step.
    """

    def __init__(self, space, problem: WaveProblem, scheme: str, k: int, tau: float,
                 solver_tol: float = 1e-11):
        if scheme not in SCHEME_ORDERS:
            raise ValueError(f"unknown scheme {scheme!r}")
        if k < SCHEME_MIN_K[scheme]:
            raise ValueError(f"{scheme} requires k >= {SCHEME_MIN_K[scheme]}, got {k}")
        self.space = space
        self.problem = problem
        self.scheme = scheme
        self.k = k
        self.tau = tau
        self.solver_tol = solver_tol
        m = SCHEME_ORDERS[scheme]
        self.m = m
        self.basis = TimeBasis(k, m)
        self.rule = self._scheme_rule(scheme, k)
        self.n_tests = k - 2 * m
        self._load_cache: dict[tuple[int, float], np.ndarray] = {}
        self._setup_structure()
        self._setup_matrix()

    @staticmethod
    def _scheme_rule(scheme: str, k: int) -> polytime.QuadRule:
        if scheme == "cgp":
            return polytime._gauss_lobatto_rule(k + 1)
        if scheme == "cgp_c1":
            return polytime.build_rule("hermite_short", k)
        return polytime.build_rule("hermite_long", k)

    # -- unknown bookkeeping -------------------------------------------------

    def _setup_structure(self):
        """Reduce the 2(k+1) coefficient blocks to the actual unknowns.

        Continuity fixes both left values; the left collocation identity of
        component 0 fixes its left derivative to the handed-over component-1
        value. Higher component-0 endpoint derivatives coincide with a lower
        derivative of component 1 (the spatial projection acts as identity on
        the discrete space), so they share that unknown's slot.
        """
        b, m = self.basis, self.m
        nb = b.n_funcs
        ref = {}
        slot = 0
        slots1 = {}
        for j in range(nb):
            if j == b.idx_left(0):
                ref[(1, j)] = ("known", 1)
            else:
                slots1[j] = slot
                ref[(1, j)] = ("slot", slot)
                slot += 1
        left_alias = {b.idx_left(d): b.idx_left(d - 1) for d in range(2, m + 1)}
        right_alias = {b.idx_right(d): b.idx_right(d - 1) for d in range(1, m + 1)}
        for j in range(nb):
            if j == b.idx_left(0):
                ref[(0, j)] = ("known", 0)
            elif m >= 1 and j == b.idx_left(1):
                ref[(0, j)] = ("known", 1)
            elif j in left_alias:
                ref[(0, j)] = ("slot", slots1[left_alias[j]])
            elif j in right_alias:
                ref[(0, j)] = ("slot", slots1[right_alias[j]])
            else:
                ref[(0, j)] = ("slot", slot)
                slot += 1
        self._ref = ref
        self.n_slots = slot
        self.n_rows = 2 * m + 2 * self.n_tests
        assert self.n_rows == self.n_slots

    def _resolve(self, c: int, j: int):
        return self._ref[(c, j)]

    # -- matrix assembly -----------------------------------------------------

    def _setup_matrix(self):
        b, m, q = self.basis, self.m, self.n_tests
        nb = b.n_funcs
        half = self.tau / 2.0
        ops = self.space.operators
        n_dof = ops.M.shape[0]
        self.n_dof = n_dof

        # exact reference couplings: quadrature is exact on these products
        DER = np.empty((q, nb))
        VAL = np.empty((q, nb))
        for j in range(nb):
            dfj = b.funcs[j].deriv()
            for i in range(q):
                DER[i, j] = _legendre_inner(dfj, i)
                VAL[i, j] = _legendre_inner(b.funcs[j], i)
        scale = half ** b.scale_pows
        self.A = DER * scale[None, :]
        self.B = VAL * scale[None, :] * half

        sys = BlockSystem(ops.M, ops.K, self.n_slots)
        # per-row multipliers of M u0, M u1, K u0, K u1 entering the rhs
        self.RM = np.zeros((2, self.n_rows))
        self.RK = np.zeros((2, self.n_rows))

        def add(row, c, j, m_coef=0.0, k_coef=0.0):
            kind, which = self._resolve(c, j)
            if kind == "slot":
                sys.add(row, which, m_coef, k_coef)
            else:
                self.RM[which, row] -= m_coef
                self.RK[which, row] -= k_coef

        row = 0
        self.colloc_rows = []  # (row, endpoint sign, derivative order of f)
        for side, sgn in (("L", -1.0), ("R", 1.0)):
            for d in range(1, m + 1):
                jx = b.idx_left(d) if side == "L" else b.idx_right(d)
                jprev = b.idx_left(d - 1) if side == "L" else b.idx_right(d - 1)
                add(row, 1, jx, m_coef=1.0)
                add(row, 0, jprev, k_coef=1.0)
                self.colloc_rows.append((row, sgn, d - 1))
                row += 1
        self.var0_rows = list(range(row, row + q))
        for i in range(q):
            for j in range(nb):
                add(row, 0, j, m_coef=self.A[i, j])
                add(row, 1, j, m_coef=-self.B[i, j])
            row += 1
        self.var1_rows = list(range(row, row + q))
        for i in range(q):
            for j in range(nb):
                add(row, 1, j, m_coef=self.A[i, j])
                add(row, 0, j, k_coef=self.B[i, j])
            row += 1

        self.system = sys
        self.matrix = sys.expand()
        self.factor = sys.factorize()

        # rhs quadrature tables for the forcing term
        P = _legendre_values(q, self.rule.nodes)
        self.rhs_value_w = P * self.rule.value_weights[None, :] * half  # (q, n_nodes)
        if self.rule.has_derivatives:
            PL = _legendre_values(q, np.array([-1.0]))[:, 0]
            PR = _legendre_values(q, np.array([1.0]))[:, 0]
            dPL = _legendre_deriv_at(q, -1.0)
            dPR = _legendre_deriv_at(q, 1.0)
            wL, wR = self.rule.deriv_weight_left, self.rule.deriv_weight_right
            self.rhs_dtf_w = (half**2 * wL * PL, half**2 * wR * PR)
            self.rhs_f_end_w = (half * wL * dPL, half * wR * dPR)

    # -- per-slab work ---------------------------------------------------------

    def _load(self, order: int, t: float) -> np.ndarray:
        key = (order, float(t))
        if key not in self._load_cache:
            fn = self.problem.f if order == 0 else self.problem.dt_f
            self._load_cache[key] = self.space.load(fn, t)
        return self._load_cache[key]

    def advance(self, state, slab: SlabMap, slab_index: int = 1) -> SlabSolution:
        u0p, u1p = (np.asarray(v, dtype=float) for v in state)
        ops = self.space.operators
        Mu = (ops.M @ u0p, ops.M @ u1p)
        Ku = (ops.K @ u0p, ops.K @ u1p)

        rhs = np.zeros((self.n_rows, self.n_dof))
        for which in (0, 1):
            rhs += np.outer(self.RM[which], Mu[which]) + np.outer(self.RK[which], Ku[which])

        node_times = slab.to_slab(self.rule.nodes)
        f_nodes = np.array([self._load(0, t) for t in node_times])
        for row, sgn, order in self.colloc_rows:
            rhs[row] += self._load(order, slab.t_right if sgn > 0 else slab.t_left)
        rhs[self.var1_rows] += self.rhs_value_w @ f_nodes
        if self.rule.has_derivatives:
            dtf_l = self._load(1, slab.t_left)
            dtf_r = self._load(1, slab.t_right)
            cdL, cdR = self.rhs_dtf_w
            cfL, cfR = self.rhs_f_end_w
            rhs[self.var1_rows] += (
                np.outer(cdL, dtf_l) + np.outer(cdR, dtf_r)
                + np.outer(cfL, f_nodes[0]) + np.outer(cfR, f_nodes[-1])
            )

        try:
            z = self.factor.solve(rhs.reshape(-1)).reshape(self.n_rows, self.n_dof)
        except Exception as err:
            raise SolverError(slab_index, str(err)) from err
        norm_b = np.linalg.norm(rhs)
        if norm_b > 0.0:
            rel = np.linalg.norm(self.matrix @ z.reshape(-1) - rhs.reshape(-1)) / norm_b
            if not np.isfinite(rel) or rel > self.solver_tol:
                raise SolverError(slab_index, f"relative residual {rel:.3e} exceeds {self.solver_tol:.1e}")

        coeffs = np.empty((2, self.basis.n_funcs, self.n_dof))
        known = (u0p, u1p)
        for c in (1, 0):
            for j in range(self.basis.n_funcs):
                kind, which = self._resolve(c, j)
                coeffs[c, j] = known[which] if kind == "known" else z[which]
        return SlabSolution(slab, self.basis, coeffs, self.k)


def initial_state(problem: WaveProblem, space) -> tuple[np.ndarray, np.ndarray]:
    """Elliptic projections of the initial data onto the discrete space."""
    from .spacefem import project

    g0, g1 = problem.grad_u0, problem.grad_u1
    if g0 is None and problem.exact_grad_u is not None:
        g0 = lambda x, y: problem.exact_grad_u(x, y, 0.0)
    if g1 is None and problem.exact_grad_dt_u is not None:
        g1 = lambda x, y: problem.exact_grad_dt_u(x, y, 0.0)
    if g0 is None or g1 is None:
        raise ValueError("initial projection needs gradients of u0 and u1")
    x0 = project(space, "elliptic", problem.u0, g0)
    x1 = project(space, "elliptic", problem.u1, g1)
    return x0, x1


def advance_slab(scheme: str, state, slab: SlabMap, problem: WaveProblem, space,
                 k: int, solver_tol: float = 1e-11) -> SlabSolution:
    """Solve one slab from scratch (builds and discards the stepper)."""
    stepper = SlabStepper(space, problem, scheme, k, slab.tau, solver_tol)
    return stepper.advance(state, slab)


def run(problem: WaveProblem, space, scheme: str, k: int, tau0: float,
        n_refine_time: int = 0, solver_tol: float = 1e-11) -> DiscreteSolution:
    """March the scheme over uniform slabs covering (0, T]."""
    tau = tau0 / 2**n_refine_time
    n_slabs = int(round(problem.T / tau))
    if abs(n_slabs * tau - problem.T) > 1e-9 * problem.T or n_slabs < 1:
        raise ValueError(f"final time {problem.T} is not a multiple of tau {tau}")
    boundaries = np.linspace(0.0, problem.T, n_slabs + 1)
    stepper = SlabStepper(space, problem, scheme, k, tau, solver_tol)
    state = initial_state(problem, space)
    slabs = []
    for n in range(n_slabs):
        slab = SlabMap(float(boundaries[n]), float(boundaries[n + 1]))
        sol = stepper.advance(state, slab, slab_index=n + 1)
        slabs.append(sol)
        state = sol.end_state()
    return DiscreteSolution(slabs, boundaries, space, scheme, k)


def evaluate(solution: DiscreteSolution, t: float, order: int = 0) -> np.ndarray:
    """Value / first / second time derivative of both components at t."""
    if order not in (0, 1, 2):
        raise ValueError("order must be 0, 1 or 2")
    return solution.evaluate(t, order)


# -- structural diagnostics ----------------------------------------------------


def _relative(res: float, scale: float) -> float:
    return res / max(scale, 1e-300)


def collocation_residuals(solution: DiscreteSolution, problem: WaveProblem) -> float:
    """Largest relative residual of the weak endpoint collocation identities
    over all slabs (first derivatives; second as well for C2 solutions)."""
    ops = solution.space.operators
    m = SCHEME_ORDERS[solution.scheme]
    worst = 0.0
    for sol in solution.slabs:
        for t in (sol.slab.t_left, sol.slab.t_right):
            U = sol.eval(t, 0)
            dU = sol.eval(t, 1)
            load = solution.space.load(problem.f, t)
            r0 = ops.M @ dU[0] - ops.M @ U[1]
            r1 = ops.M @ dU[1] + ops.K @ U[0] - load
            scale = max(np.linalg.norm(ops.M @ dU[1]), np.linalg.norm(ops.K @ U[0]),
                        np.linalg.norm(load), np.linalg.norm(ops.M @ U[1]), 1e-300)
            worst = max(worst, _relative(np.linalg.norm(r0), scale),
                        _relative(np.linalg.norm(r1), scale))
            if m >= 2:
                d2U = sol.eval(t, 2)
                dload = solution.space.load(problem.dt_f, t)
                r0 = ops.M @ d2U[0] - ops.M @ dU[1]
                r1 = ops.M @ d2U[1] + ops.K @ dU[0] - dload
                scale = max(np.linalg.norm(ops.M @ d2U[1]), np.linalg.norm(ops.K @ dU[0]),
                            np.linalg.norm(dload), 1e-300)
                worst = max(worst, _relative(np.linalg.norm(r0), scale),
                            _relative(np.linalg.norm(r1), scale))
    return worst


def interface_jumps(solution: DiscreteSolution) -> dict[int, float]:
    """Relative one-sided limit mismatches at interior interfaces, keyed by
    derivative order 0..2."""
    out = {0: 0.0, 1: 0.0, 2: 0.0}
    for left, right in zip(solution.slabs[:-1], solution.slabs[1:]):
        t = left.slab.t_right
        for order in (0, 1, 2):
            a = left.eval(t, order)
            b = right.eval(t, order)
            scale = max(np.linalg.norm(a), np.linalg.norm(b), 1e-300)
            out[order] = max(out[order], np.linalg.norm(a - b) / scale)
    return out


def _hermite_load_interpolant(space, problem, slab: SlabMap, k: int):
    """Load-vector form of the time-Hermite interpolant of the forcing:
    returns a callable giving <I_H f(t), phi> at reference points."""
    nodes = np.concatenate(([-1.0], polytime.jacobi_roots(2, 2, k - 3), [1.0]))
    cards = polytime.cardinal_basis(polytime._hermite_functionals(nodes), k)
    loads = [space.load(problem.f, t) for t in slab.to_slab(nodes)]
    dloads = [space.load(problem.dt_f, slab.t_left), space.load(problem.dt_f, slab.t_right)]

    def at(xhat: float) -> np.ndarray:
        out = sum(c(xhat) * v for c, v in zip(cards[: len(nodes)], loads))
        out = out + slab.half * cards[len(nodes)](xhat) * dloads[0]
        out = out + slab.half * cards[len(nodes) + 1](xhat) * dloads[1]
        return out

    return at


def evolution_residual(solution: DiscreteSolution, problem: WaveProblem,
                       points_per_slab: int = 7, seed: int = 1234) -> float:
    """Pointwise evolution identity for C1 solutions on the whole interval:
    the time derivative plus the Gauss-Lobatto interpolant of the spatial
    operator matches the doubly interpolated forcing, in weak form."""
    ops = solution.space.operators
    k = solution.k
    gl = polytime._gauss_lobatto_rule(k).nodes
    rng = np.random.default_rng(seed)
    worst = 0.0
    for sol in solution.slabs:
        slab = sol.slab
        Ugl = sol.coeff_at(gl)                     # (2, n_dof, k)
        f_interp = _hermite_load_interpolant(solution.space, problem, slab, k)
        load_gl = np.array([f_interp(x) for x in gl])
        gl_cards = polytime.cardinal_basis([(float(x), 0) for x in gl], k - 1)
        for xhat in rng.uniform(-1.0, 1.0, points_per_slab):
            card_vals = np.array([c(xhat) for c in gl_cards])
            dU = sol.coeff_at(xhat, 1)[:, :, 0]
            u0_gl = Ugl[0] @ card_vals
            u1_gl = Ugl[1] @ card_vals
            load = card_vals @ load_gl
            r0 = ops.M @ dU[0] - ops.M @ u1_gl
            r1 = ops.M @ dU[1] + ops.K @ u0_gl - load
            scale = max(np.linalg.norm(ops.M @ dU[1]), np.linalg.norm(ops.K @ u0_gl),
                        np.linalg.norm(load), np.linalg.norm(ops.M @ u1_gl), 1e-300)
            worst = max(worst, _relative(np.linalg.norm(r0), scale),
                        _relative(np.linalg.norm(r1), scale))
    return worst


def gl_form_residual(solution: DiscreteSolution, problem: WaveProblem) -> float:
    """Variational identity under the k-point Gauss-Lobatto rule with the
    Hermite-interpolated forcing, tested against P_{k-2}; holds for C1
    solutions although the assembly path never uses this form."""
    ops = solution.space.operators
    k = solution.k
    rule = polytime.build_rule("gauss_lobatto", k)
    q = k - 1
    P = _legendre_values(q, rule.nodes)
    worst = 0.0
    for sol in solution.slabs:
        slab = sol.slab
        half = slab.half
        U = sol.coeff_at(rule.nodes)               # (2, n_dof, k)
        dU = sol.coeff_at(rule.nodes, 1)
        f_interp = _hermite_load_interpolant(solution.space, problem, slab, k)
        load = np.array([f_interp(x) for x in rule.nodes])          # (k, n_dof)
        w = rule.value_weights
        for i in range(q):
            pw = w * P[i] * half
            r0 = ops.M @ (dU[0] @ pw) - ops.M @ (U[1] @ pw)
            r1 = ops.M @ (dU[1] @ pw) + ops.K @ (U[0] @ pw) - pw @ load
            scale = max(np.linalg.norm(ops.M @ (dU[1] @ pw)), np.linalg.norm(ops.K @ (U[0] @ pw)),
                        np.linalg.norm(pw @ load), np.linalg.norm(ops.M @ (U[1] @ pw)), 1e-300)
            worst = max(worst, _relative(np.linalg.norm(r0), scale),
                        _relative(np.linalg.norm(r1), scale))
    return worst
