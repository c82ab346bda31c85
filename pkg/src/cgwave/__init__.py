"""Space-time finite element solver for the second-order wave equation.

Couples continuous Q_r elements on the unit square with Galerkin-collocation
time stepping that produces globally C^1 or C^2 discrete solutions, plus the
post-processing lift connecting the two families and a manufactured-solution
convergence harness.
"""

__version__ = "0.1.0"
