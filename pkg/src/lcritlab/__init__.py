"""Numerical laboratory for L-function value distributions near the critical line.

Subpackages cover the arithmetic substrate (primes, Bernoulli numbers,
Dirichlet characters), pluggable L-function coefficient data, deterministic
evaluation of log L(sigma + it) with a continuous argument branch, random
Euler-product sampling, empirical measures with box-discrepancy estimation,
Beurling-Selberg smoothing kernels, and the Hermite/Gaussian machinery for
central-limit comparisons.
"""

__version__ = "0.1.0"
