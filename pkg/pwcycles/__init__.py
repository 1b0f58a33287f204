"""
pwcycles: crossing limit cycles of piecewise polynomial vector fields.

Modules:
    poly                 uni- and bivariate polynomials, root isolation
    field                piecewise fields, fold certificates, sliding segments
    hamiltonian_family   the recursive Hamiltonian family H_k and its counts
    return_maps          algebraic and numeric half-returns, displacement
    melnikov             first-order Melnikov functions and the oracle check
    bifurcation          pseudo-Hopf searches and the degree lift
    certify              cycle certification, sweeps and hypothesis checks
    contours             level curves as polylines
    tolerances           the immutable tolerance set of a run
"""

__version__ = '1.0.0'
