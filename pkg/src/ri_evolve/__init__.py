"""Rate-independent evolutions with non-convex energies: scalar schemes,
finite-difference PDE solvers and discrete property checks."""

__version__ = "0.1.0"
