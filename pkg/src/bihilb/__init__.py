"""Bi-Poisson structures on Hilbert schemes of points, linear hyper-Poisson
bivectors, four-dimensional hyperkahler models and the Nahm moduli flow."""

__version__ = "0.1.0"
