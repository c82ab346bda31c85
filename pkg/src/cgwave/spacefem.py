"""Continuous Q_r finite elements on structured quadrilateral meshes of the
unit square, with homogeneous Dirichlet conditions.

Covers mesh/space construction, mass and stiffness assembly, L2 and elliptic
projections, load vectors, and spatial error norms. Degrees of freedom sit on
the tensor Gauss-Lobatto lattice so facet continuity is free and conditioning
stays sane up to r = 6.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from . import polytime, sparsela

__all__ = ["Mesh", "FeSpace", "Operators", "build_space", "assemble",
           "load_vector", "project", "spatial_error"]

_FAMILIES = ("table1", "table2a")


class Mesh:
    """Uniform grid of congruent square cells on (0,1)^2."""

    def __init__(self, family: str, level: int, cells_per_side: int):
        self.family = family
        self.level = level
        self.cells_per_side = cells_per_side
        self.cell_size = 1.0 / cells_per_side
        # cell diagonal, the mesh size reported in the convergence tables
        self.h = np.sqrt(2.0) / cells_per_side


def build_space(family: str, level: int, r: int) -> "FeSpace":
    """Space for one refinement family: 'table1' starts from a 2x2 grid and
    refines by 2 per level; 'table2a' keeps the fixed 4x4 grid."""
    if family not in _FAMILIES:
        raise ValueError(f"unknown mesh family {family!r}")
    if level < 0:
        raise ValueError("level must be non-negative")
    if not 1 <= r <= 6:
        raise ValueError("polynomial degree r must be in 1..6")
    cells = 2 ** (level + 1) if family == "table1" else 4
    return FeSpace(Mesh(family, level, cells), r)


class FeSpace:
    """Q_r space on a uniform mesh with an interior-DOF Dirichlet mask."""

    def __init__(self, mesh: Mesh, r: int):
        self.mesh = mesh
        self.r = r
        n = mesh.cells_per_side
        self.nodes_1d = polytime._gauss_lobatto_rule(r + 1).nodes
        self.n_lattice_1d = n * r + 1

        # global lattice coordinates, one shared value per facet point
        coords = np.empty(self.n_lattice_1d)
        for c in range(n):
            coords[c * r : (c + 1) * r + 1] = (c + (self.nodes_1d + 1.0) / 2.0) / n
        self.coords_1d = coords

        # cell-local (a,b) -> global lattice index, x-major on both levels
        nloc_1d = r + 1
        cell_ids = np.arange(n)
        gx = (cell_ids[:, None] * r + np.arange(nloc_1d)[None, :])  # (n, r+1)
        dof_map = np.empty((n * n, nloc_1d * nloc_1d), dtype=np.int64)
        for cx in range(n):
            for cy in range(n):
                gxx = gx[cx][:, None]
                gyy = gx[cy][None, :]
                dof_map[cx * n + cy] = (gxx * self.n_lattice_1d + gyy).reshape(-1)
        self.dof_map = dof_map

        lat = self.n_lattice_1d
        gx_all, gy_all = np.divmod(np.arange(lat * lat), lat)
        boundary = (gx_all == 0) | (gx_all == lat - 1) | (gy_all == 0) | (gy_all == lat - 1)
        self.interior = ~boundary
        self.interior_idx = np.nonzero(self.interior)[0]
        self.n_dof = int(self.interior.sum())
        self.n_full = lat * lat
        self.dof_x = self.coords_1d[gx_all]
        self.dof_y = self.coords_1d[gy_all]

        self._basis_1d = polytime.cardinal_basis([(float(x), 0) for x in self.nodes_1d])
        self._quad_cache: dict[int, dict] = {}
        self._operators: Operators | None = None

    @property
    def operators(self) -> "Operators":
        if self._operators is None:
            self._operators = assemble(self)
        return self._operators

    def quad_data(self, n_q: int) -> dict:
        """Per-cell tensor-Gauss data shared by all (congruent) cells:
        mapped points, scaled weights, and basis value/gradient tables."""
        if n_q in self._quad_cache:
            return self._quad_cache[n_q]
        rule = polytime.build_rule("gauss", n_q + 1)
        g, w = rule.nodes, rule.value_weights
        L = np.array([b(g) for b in self._basis_1d]).T          # (n_q, r+1)
        dL = np.array([b.deriv()(g) for b in self._basis_1d]).T
        a = self.mesh.cell_size
        B = np.kron(L, L)                                        # (n_q^2, nloc)
        Bx = np.kron(dL, L) * (2.0 / a)
        By = np.kron(L, dL) * (2.0 / a)
        w2 = np.kron(w, w) * (a / 2.0) ** 2

        n = self.mesh.cells_per_side
        cx, cy = np.divmod(np.arange(n * n), n)
        px = cx[:, None] * a + (g[None, :] + 1.0) * (a / 2.0)    # (ncells, n_q)
        py = cy[:, None] * a + (g[None, :] + 1.0) * (a / 2.0)
        X = np.repeat(px, n_q, axis=1)                           # x-major q index
        Y = np.tile(py, (1, n_q))
        data = {"B": B, "Bx": Bx, "By": By, "w2": w2, "X": X, "Y": Y}
        self._quad_cache[n_q] = data
        return data

    def scatter(self, interior_dofs: np.ndarray) -> np.ndarray:
        """Extend an interior DOF vector by zeros on the Dirichlet boundary."""
        full = np.zeros(self.n_full)
        full[self.interior_idx] = interior_dofs
        return full

    def load(self, fn, t: float) -> np.ndarray:
        return load_vector(self, fn, t)


class Operators:
    """Assembled mass/stiffness matrices over interior DOFs, with lazy LU
    factorizations; the pre-elimination matrices stay available for checks."""

    def __init__(self, M_full, K_full, interior_idx):
        self.M_full = M_full
        self.K_full = K_full
        ix = interior_idx
        self.M = sparsela.as_csr(M_full[ix][:, ix])
        self.K = sparsela.as_csr(K_full[ix][:, ix])
        self._mass_factor = None
        self._stiff_factor = None

    @property
    def mass_factor(self) -> sparsela.Factorization:
        if self._mass_factor is None:
            self._mass_factor = sparsela.factorize(self.M)
        return self._mass_factor

    @property
    def stiff_factor(self) -> sparsela.Factorization:
        if self._stiff_factor is None:
            self._stiff_factor = sparsela.factorize(self.K)
        return self._stiff_factor


def assemble(space: FeSpace) -> Operators:
    """Mass and stiffness matrices via per-cell (r+1)-point tensor Gauss
    quadrature, exact for these integrands on affine cells."""
    r = space.r
    rule = polytime.build_rule("gauss", r + 2)
    g, w = rule.nodes, rule.value_weights
    L = np.array([b(g) for b in space._basis_1d]).T
    dL = np.array([b.deriv()(g) for b in space._basis_1d]).T
    M1 = (L * w[:, None]).T @ L                       # 1d reference mass
    S1 = (dL * w[:, None]).T @ dL                     # 1d reference stiffness
    a = space.mesh.cell_size
    M_loc = (a / 2.0) ** 2 * np.kron(M1, M1)
    K_loc = np.kron(S1, M1) + np.kron(M1, S1)         # cell-size independent in 2d

    ncells, nloc = space.dof_map.shape
    rows = np.repeat(space.dof_map, nloc, axis=1).ravel()
    cols = np.tile(space.dof_map, (1, nloc)).ravel()
    M_full = sp.coo_matrix(
        (np.tile(M_loc.ravel(), ncells), (rows, cols)),
        shape=(space.n_full, space.n_full),
    ).tocsr()
    K_full = sp.coo_matrix(
        (np.tile(K_loc.ravel(), ncells), (rows, cols)),
        shape=(space.n_full, space.n_full),
    ).tocsr()
    return Operators(M_full, K_full, space.interior_idx)


def _eval_field(fn, X, Y, t=None) -> np.ndarray:
    vals = fn(X, Y) if t is None else fn(X, Y, t)
    return np.broadcast_to(np.asarray(vals, dtype=float), X.shape)


def load_vector(space: FeSpace, f, t: float) -> np.ndarray:
    """Interior load vector of a space-time callable at fixed t, integrated
    with (r+2)-point tensor Gauss per cell."""
    q = space.quad_data(space.r + 2)
    vals = _eval_field(f, q["X"], q["Y"], t) * q["w2"][None, :]
    loc = vals @ q["B"]
    full = np.zeros(space.n_full)
    np.add.at(full, space.dof_map, loc)
    return full[space.interior_idx]


def project(space: FeSpace, kind: str, g, grad_g=None) -> np.ndarray:
    """L2 projection (mass solve) or elliptic projection (stiffness solve
    against the gradient load) of a spatial callable."""
    ops = space.operators
    q = space.quad_data(space.r + 2)
    if kind == "l2":
        vals = _eval_field(g, q["X"], q["Y"]) * q["w2"][None, :]
        loc = vals @ q["B"]
        full = np.zeros(space.n_full)
        np.add.at(full, space.dof_map, loc)
        return ops.mass_factor.solve(full[space.interior_idx])
    if kind == "elliptic":
        if grad_g is None:
            raise ValueError("elliptic projection needs the gradient callable")
        gx, gy = grad_g(q["X"], q["Y"])
        gx = np.broadcast_to(np.asarray(gx, dtype=float), q["X"].shape) * q["w2"][None, :]
        gy = np.broadcast_to(np.asarray(gy, dtype=float), q["X"].shape) * q["w2"][None, :]
        loc = gx @ q["Bx"] + gy @ q["By"]
        full = np.zeros(space.n_full)
        np.add.at(full, space.dof_map, loc)
        return ops.stiff_factor.solve(full[space.interior_idx])
    raise ValueError(f"unknown projection kind {kind!r}")


def spatial_error(space: FeSpace, dofs, exact, grad_exact, t: float):
    """L2 and H1-seminorm errors of an interior DOF vector against an exact
    field at time t, via (r+3)-point tensor Gauss per cell."""
    q = space.quad_data(space.r + 3)
    full = space.scatter(np.asarray(dofs, dtype=float))
    cell_dofs = full[space.dof_map]                 # (ncells, nloc)
    uh = cell_dofs @ q["B"].T
    e = uh - _eval_field(exact, q["X"], q["Y"], t)
    l2_sq = float(np.sum((e * e) @ q["w2"]))
    h1_sq = 0.0
    if grad_exact is not None:
        gxe, gye = grad_exact(q["X"], q["Y"], t)
        ex = cell_dofs @ q["Bx"].T - np.broadcast_to(np.asarray(gxe, dtype=float), q["X"].shape)
        ey = cell_dofs @ q["By"].T - np.broadcast_to(np.asarray(gye, dtype=float), q["X"].shape)
        h1_sq = float(np.sum((ex * ex) @ q["w2"]) + np.sum((ey * ey) @ q["w2"]))
    return np.sqrt(l2_sq), np.sqrt(h1_sq)
