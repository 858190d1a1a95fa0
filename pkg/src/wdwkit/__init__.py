"""Desk-scale toolkit for canonical quantization on fiber bundles.

Modules: exact Clifford and Grassmann algebras, DeWitt and fiber geometry,
the four Hamiltonians, lattice Green operators, truncated Fock quantum
fields with CCR and Weyl relations, and local-net axiom checks.
"""

__version__ = "0.1.0"

from . import ccr, clifford, geometry, grassmann, hamiltonian, hyperbolic, localnets  # noqa: E402

__all__ = ["ccr", "clifford", "geometry", "grassmann", "hamiltonian", "hyperbolic", "localnets", "__version__"]
