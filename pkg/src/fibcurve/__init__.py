"""Construction of elliptic curves of Fibonacci prime order over prime fields.

The package is organized around the construction pipeline: Fibonacci
arithmetic, modular square roots and Cornacchia, binary quadratic forms,
Hilbert class polynomials (analytic and CRT), curve arithmetic over
Z/pZ, Schoof-based verification, and an ECPP primality stack.  The
pipeline emits self-contained JSON certificates; a FastAPI service and a
thin CLI expose the same operations.
"""

__version__ = "0.1.0"
