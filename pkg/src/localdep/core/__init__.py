"""
Core numerical components.

This package contains:
- Gaussian closed-form backend
- Quadrature oracle for arbitrary densities
- Local dependence functions and the h surrogate
- Grid sweeps and the reference-point solver
- CSV/SVG export and metrics collection
"""
