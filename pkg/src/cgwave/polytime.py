"""Polynomial tools on the reference interval [-1, 1].

Provides orthogonal-polynomial root finding, the four quadrature rules used
by the time discretization (Gauss, Gauss-Lobatto, and two Hermite-type rules
carrying endpoint-derivative weights), nodal/Hermite interpolation, and the
kernel polynomial used by the smoothness-lifting post-processing step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import legendre as npleg
from scipy.linalg import eigh_tridiagonal
from scipy.special import eval_jacobi

__all__ = [
    "PolyCoeffs",
    "QuadRule",
    "SlabMap",
    "jacobi_roots",
    "build_rule",
    "apply_rule",
    "interpolate",
    "cardinal_basis",
    "theta_kernel",
    "RULE_MIN_K",
]

# minimum admissible k per rule kind
RULE_MIN_K = {"gauss": 3, "gauss_lobatto": 3, "hermite_short": 3, "hermite_long": 5}

_EXACTNESS_TOL = 1e-12


@dataclass(frozen=True)
class PolyCoeffs:
    """Polynomial on [-1, 1] in the Legendre modal basis.

    Exact integration over [-1, 1] is twice the constant-mode coefficient,
    and conditioning beats raw monomials for the degrees used here.
    """

    coef: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coef, dtype=float))
        if c.ndim != 1 or c.size == 0:
            raise ValueError("coefficient array must be a non-empty 1-d sequence")
        # drop exactly-zero trailing modes so degree bookkeeping stays sharp
        c = npleg.legtrim(c, tol=0.0)
        object.__setattr__(self, "coef", c)

    @property
    def degree(self) -> int:
        return self.coef.size - 1

    def __call__(self, x):
        return npleg.legval(np.asarray(x, dtype=float), self.coef)

    def deriv(self, m: int = 1) -> "PolyCoeffs":
        if m < 0:
            raise ValueError("derivative order must be non-negative")
        if m == 0:
            return self
        if m > self.degree:
            return PolyCoeffs(np.zeros(1))
        return PolyCoeffs(npleg.legder(self.coef, m))

    def integral(self) -> float:
        """Exact integral over [-1, 1]."""
        return 2.0 * float(self.coef[0])


@dataclass(frozen=True)
class SlabMap:
    """Affine map of [-1, 1] onto one time slab [t_left, t_right]."""

    t_left: float
    t_right: float

    def __post_init__(self):
        if not self.t_left < self.t_right:
            raise ValueError(f"empty slab [{self.t_left}, {self.t_right}]")

    @property
    def tau(self) -> float:
        return self.t_right - self.t_left

    @property
    def half(self) -> float:
        return 0.5 * (self.t_right - self.t_left)

    def to_slab(self, xhat):
        return self.t_left + (np.asarray(xhat) + 1.0) * self.half

    def to_reference(self, t):
        return (np.asarray(t) - self.t_left) / self.half - 1.0


@dataclass(frozen=True)
class QuadRule:
    """Quadrature rule on [-1, 1], optionally with endpoint-derivative weights.

    The derivative weights are zero for the plain Gauss and Gauss-Lobatto
    kinds; the hermite kinds carry one weight per endpoint that multiplies
    the integrand's first derivative there.
    """

    kind: str
    nodes: np.ndarray
    value_weights: np.ndarray
    deriv_weight_left: float
    deriv_weight_right: float
    exactness_degree: int

    @property
    def has_derivatives(self) -> bool:
        return self.kind.startswith("hermite")


def jacobi_roots(alpha: int, beta: int, degree: int) -> np.ndarray:
    """Ascending roots of the Jacobi polynomial with weight (1-t)^a (1+t)^b.

    Eigenvalues of the symmetric tridiagonal recurrence matrix, polished by
    one Newton step per root; symmetrized exactly when alpha == beta.
    """
    if degree < 0:
        raise ValueError("degree must be non-negative")
    if degree == 0:
        return np.zeros(0)
    a, b = float(alpha), float(beta)
    n = np.arange(degree, dtype=float)
    diag = np.empty(degree)
    diag[0] = (b - a) / (a + b + 2.0)
    if degree > 1:
        nn = n[1:]
        diag[1:] = (b * b - a * a) / ((2 * nn + a + b) * (2 * nn + a + b + 2.0))
        nn = n[1:]
        off2 = (
            4.0 * nn * (nn + a) * (nn + b) * (nn + a + b)
            / ((2 * nn + a + b) ** 2 * (2 * nn + a + b + 1.0) * (2 * nn + a + b - 1.0))
        )
        off = np.sqrt(off2)
    else:
        off = np.zeros(0)
    roots, _ = eigh_tridiagonal(diag, off, select="a")

    p = eval_jacobi(degree, a, b, roots)
    dp = 0.5 * (degree + a + b + 1.0) * eval_jacobi(degree - 1, a + 1.0, b + 1.0, roots)
    roots = roots - p / dp
    if alpha == beta:
        roots = 0.5 * (roots - roots[::-1])
    return np.sort(roots)


def _lobatto_nodes(npts: int) -> np.ndarray:
    """npts Gauss-Lobatto points: both endpoints plus Jacobi(1,1) roots."""
    if npts < 2:
        raise ValueError("Gauss-Lobatto needs at least 2 points")
    return np.concatenate(([-1.0], jacobi_roots(1, 1, npts - 2), [1.0]))


def _functional_matrix(functionals, degree: int) -> np.ndarray:
    """Rows apply (node, deriv_order) functionals to the Legendre basis."""
    rows = np.empty((len(functionals), degree + 1))
    for i, (x, m) in enumerate(functionals):
        for j in range(degree + 1):
            e = np.zeros(j + 1)
            e[j] = 1.0
            c = npleg.legder(e, m) if m > 0 else e
            rows[i, j] = npleg.legval(x, c) if c.size else 0.0
    return rows


def cardinal_basis(functionals, degree: int | None = None) -> list[PolyCoeffs]:
    """Cardinal polynomials dual to a list of (node, deriv_order) functionals.

    Functional i applied to cardinal j gives the Kronecker delta; the default
    degree makes the system square (len(functionals) - 1).
    """
    if degree is None:
        degree = len(functionals) - 1
    if len(functionals) != degree + 1:
        raise ValueError("need exactly degree+1 functionals for a cardinal basis")
    G = _functional_matrix(functionals, degree)
    C = np.linalg.solve(G, np.eye(degree + 1))
    return [PolyCoeffs(C[:, j]) for j in range(degree + 1)]


def _hermite_functionals(value_nodes) -> list[tuple[float, int]]:
    """Point values at all nodes plus first derivatives at both endpoints."""
    fns = [(float(x), 0) for x in value_nodes]
    fns += [(-1.0, 1), (1.0, 1)]
    return fns


def _certify_exactness(nodes, weights, w_left, w_right, cap: int) -> int:
    """Highest monomial degree integrated to 1e-12 absolute on [-1, 1]."""
    best = -1
    for m in range(cap + 1):
        exact = 2.0 / (m + 1) if m % 2 == 0 else 0.0
        approx = float(weights @ nodes**m)
        if m >= 1:
            approx += w_left * m * (-1.0) ** (m - 1) + w_right * m
        if abs(approx - exact) > _EXACTNESS_TOL:
            break
        best = m
    return best


def build_rule(kind: str, k: int) -> QuadRule:
    """Construct one of the four rules for polynomial degree parameter k.

    Weights come from exactly integrating the cardinal interpolation basis
    (Hermite cardinals for the hermite kinds), so the rule is exact on its
    interpolation space by construction; the exactness degree stored on the
    rule is certified afterwards by a monomial sweep.
    """
    if kind not in RULE_MIN_K:
        raise ValueError(f"unknown rule kind {kind!r}")
    if k < RULE_MIN_K[kind]:
        raise ValueError(f"{kind} requires k >= {RULE_MIN_K[kind]}, got {k}")

    if kind == "gauss":
        nodes = jacobi_roots(0, 0, k - 1)
    elif kind == "gauss_lobatto":
        nodes = _lobatto_nodes(k)
    elif kind == "hermite_short":
        nodes = np.concatenate(([-1.0], jacobi_roots(2, 2, k - 3), [1.0]))
    else:  # hermite_long
        nodes = np.concatenate(([-1.0], jacobi_roots(2, 2, k - 2), [1.0]))

    if kind.startswith("hermite"):
        cards = cardinal_basis(_hermite_functionals(nodes))
        weights = np.array([c.integral() for c in cards[: len(nodes)]])
        w_left = cards[len(nodes)].integral()
        w_right = cards[len(nodes) + 1].integral()
    else:
        cards = cardinal_basis([(float(x), 0) for x in nodes])
        weights = np.array([c.integral() for c in cards])
        w_left = w_right = 0.0

    exactness = _certify_exactness(nodes, weights, w_left, w_right, cap=2 * k + 2)

    if not np.all(np.diff(nodes) > 0):
        raise AssertionError("quadrature nodes are not strictly increasing")
    if abs(weights.sum() - 2.0) > 1e-12 or abs(w_left + w_right) > 1e-12:
        raise AssertionError("weight synthesis lost exactness on constants/linears")
    return QuadRule(kind, nodes, weights, w_left, w_right, exactness)


def _gauss_lobatto_rule(npts: int) -> QuadRule:
    """Internal npts-point Gauss-Lobatto rule, valid for any npts >= 2.

    Used where fewer points than build_rule's public minimum are needed
    (degree-1 spatial lattices, low-order baseline time stepping).
    """
    if npts >= 3:
        return build_rule("gauss_lobatto", npts)
    nodes = np.array([-1.0, 1.0])
    weights = np.array([1.0, 1.0])
    return QuadRule("gauss_lobatto", nodes, weights, 0.0, 0.0, 1)


def apply_rule(rule: QuadRule, slab: SlabMap, values_at_nodes, end_derivatives=None) -> float:
    """Apply a reference rule on a slab; value weights scale with tau/2 and
    endpoint-derivative weights with (tau/2)^2."""
    vals = np.asarray(values_at_nodes, dtype=float)
    if vals.shape[0] != rule.nodes.size:
        raise ValueError(f"expected {rule.nodes.size} node values, got {vals.shape[0]}")
    if rule.has_derivatives:
        if end_derivatives is None:
            raise ValueError(f"{rule.kind} needs end derivatives of the integrand")
        d_left, d_right = end_derivatives
    elif end_derivatives is not None:
        raise ValueError(f"{rule.kind} takes no end derivatives")
    out = rule.value_weights @ vals * slab.half
    if rule.has_derivatives:
        out += slab.half**2 * (rule.deriv_weight_left * d_left + rule.deriv_weight_right * d_right)
    return float(out)


def interpolate(kind: str, k: int, values_at_nodes, end_derivatives=None) -> PolyCoeffs:
    """Interpolation operators tied to the rule node families.

    hermite: k-1 values plus endpoint derivatives -> degree k;
    gauss: k-1 values -> degree k-2; gauss_lobatto: k values -> degree k-1.
    """
    vals = np.asarray(values_at_nodes, dtype=float)
    if kind == "hermite":
        nodes = np.concatenate(([-1.0], jacobi_roots(2, 2, k - 3), [1.0]))
        if vals.size != nodes.size:
            raise ValueError(f"hermite expects {nodes.size} values, got {vals.size}")
        if end_derivatives is None:
            raise ValueError("hermite interpolation needs endpoint derivatives")
        fns = _hermite_functionals(nodes)
        data = np.concatenate((vals, np.asarray(end_derivatives, dtype=float)))
        degree = k
    elif kind in ("gauss", "gauss_lobatto"):
        if end_derivatives is not None:
            raise ValueError(f"{kind} interpolation takes no derivatives")
        nodes = jacobi_roots(0, 0, k - 1) if kind == "gauss" else _lobatto_nodes(k)
        if vals.size != nodes.size:
            raise ValueError(f"{kind} expects {nodes.size} values, got {vals.size}")
        fns = [(float(x), 0) for x in nodes]
        data = vals
        degree = nodes.size - 1
    else:
        raise ValueError(f"unknown interpolation kind {kind!r}")
    G = _functional_matrix(fns, degree)
    return PolyCoeffs(np.linalg.solve(G, data))


def theta_kernel(k: int) -> PolyCoeffs:
    """Degree k+1 polynomial annihilated by the Hermite interpolation data,
    normalized so its second derivative at -1 equals one.

    Mapping to a slab and scaling by (tau/2)^2 keeps that normalization in
    slab time.
    """
    if k < 3:
        raise ValueError("theta kernel needs k >= 3")
    nodes = np.concatenate(([-1.0], jacobi_roots(2, 2, k - 3), [1.0]))
    fns = _hermite_functionals(nodes) + [(-1.0, 2)]
    G = _functional_matrix(fns, k + 1)
    rhs = np.zeros(k + 2)
    rhs[-1] = 1.0
    return PolyCoeffs(np.linalg.solve(G, rhs))
