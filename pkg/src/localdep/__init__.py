"""
localdep - local dependence functions

Computes bivariate, trivariate and n-variate local dependence functions
for Gaussian models in closed form and for arbitrary joint densities via
a quadrature oracle, with grid maps, a reference-point solver and a CLI.
"""

__version__ = "0.1.0"
