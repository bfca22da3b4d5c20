"""Torsion functions, principal Dirichlet eigenvalues, and heat semigroup
bounds on Euclidean domains, with numerical verification of the explicit
constants that relate them."""

__version__ = "0.1.0"
