"""Sparse linear algebra: CSR storage, direct LU factorization, and the
block-system container used by the per-slab solves.

Storage and factorization are backed by scipy.sparse (CSR) and SuperLU;
this module owns the contracts the rest of the solver relies on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

__all__ = [
    "SparseMatrix",
    "SingularMatrixError",
    "Factorization",
    "factorize",
    "solve",
    "BlockSystem",
    "solve_block",
]

# CSR with sorted, duplicate-free indices is the canonical storage format
SparseMatrix = sp.csr_matrix


class SingularMatrixError(RuntimeError):
    """Factorization hit a zero pivot; carries the pivot position if known."""

    def __init__(self, message: str, pivot: int | None = None):
        super().__init__(message)
        self.pivot = pivot


def as_csr(matrix) -> sp.csr_matrix:
    """Canonical CSR form: sorted column indices, duplicates summed."""
    A = sp.csr_matrix(matrix)
    A.sum_duplicates()
    A.sort_indices()
    return A


@dataclass(frozen=True)
class Factorization:
    """Immutable handle around a sparse LU decomposition."""

    lu: spla.SuperLU
    shape: tuple[int, int]

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        b = np.asarray(rhs, dtype=float)
        if b.shape[0] != self.shape[0]:
            raise ValueError(f"rhs length {b.shape[0]} != {self.shape[0]}")
        return self.lu.solve(b)


def factorize(matrix) -> Factorization:
    """Direct sparse LU with pivoting."""
    A = sp.csc_matrix(matrix)
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"matrix must be square, got {A.shape}")
    try:
        lu = spla.splu(A)
    except RuntimeError as err:  # SuperLU reports 'Factor is exactly singular'
        pivot = _parse_pivot(str(err))
        raise SingularMatrixError(f"singular matrix: {err}", pivot=pivot) from err
    return Factorization(lu, A.shape)


def _parse_pivot(message: str) -> int | None:
    for token in message.replace("=", " ").split():
        if token.isdigit():
            return int(token)
    return None


def solve(factorization: Factorization, rhs: np.ndarray) -> np.ndarray:
    return factorization.solve(rhs)


class BlockSystem:
    """Square grid of blocks, each a scalar combination alpha*M + beta*K of
    the two shared space operators, with a block right-hand side.

    Blocks never copy M or K; the grid stores only the scalar pairs. The
    expansion to one sparse matrix happens at solve/factorization time.
    """

    def __init__(self, M, K, n_blocks: int):
        self.M = as_csr(M)
        self.K = as_csr(K)
        if self.M.shape != self.K.shape:
            raise ValueError("M and K must share their shape")
        self.block_size = self.M.shape[0]
        self.n_blocks = n_blocks
        self.m_coef = np.zeros((n_blocks, n_blocks))
        self.k_coef = np.zeros((n_blocks, n_blocks))

    def add(self, row: int, col: int, alpha_m: float = 0.0, beta_k: float = 0.0):
        self.m_coef[row, col] += alpha_m
        self.k_coef[row, col] += beta_k

    def expand(self) -> sp.csr_matrix:
        """Assemble the full sparse operator from the scalar coefficient grids."""
        blocks = []
        for i in range(self.n_blocks):
            row = []
            for j in range(self.n_blocks):
                am, bk = self.m_coef[i, j], self.k_coef[i, j]
                if am == 0.0 and bk == 0.0:
                    row.append(None)
                elif bk == 0.0:
                    row.append(am * self.M)
                elif am == 0.0:
                    row.append(bk * self.K)
                else:
                    row.append(am * self.M + bk * self.K)
            blocks.append(row)
        return as_csr(sp.bmat(blocks, format="csr"))

    def factorize(self) -> Factorization:
        return factorize(self.expand())

    def solve(self, rhs_blocks, factorization: Factorization | None = None) -> np.ndarray:
        """Solve against a (n_blocks, block_size) right-hand side; returns the
        unknowns in the same block layout."""
        rhs = np.asarray(rhs_blocks, dtype=float)
        if rhs.shape != (self.n_blocks, self.block_size):
            raise ValueError(
                f"rhs blocks shaped {rhs.shape}, expected {(self.n_blocks, self.block_size)}"
            )
        fac = factorization if factorization is not None else self.factorize()
        x = fac.solve(rhs.reshape(-1))
        return x.reshape(self.n_blocks, self.block_size)


def solve_block(system: BlockSystem, rhs_blocks) -> np.ndarray:
    """One-shot block solve; factorizes, solves, and checks the residual."""
    fac = system.factorize()
    x = system.solve(rhs_blocks, fac)
    A = system.expand()
    b = np.asarray(rhs_blocks, dtype=float).reshape(-1)
    norm_b = np.linalg.norm(b)
    if norm_b > 0:
        rel = np.linalg.norm(A @ x.reshape(-1) - b) / norm_b
        if rel > 1e-11:
            raise SingularMatrixError(f"block solve residual {rel:.3e} exceeds 1e-11")
    return x
