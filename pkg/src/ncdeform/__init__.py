"""Exact and numeric tools for deformed Heisenberg algebras.

Modules:

- ``weyl``, ``series``, ``scalar``: normal-ordered Weyl algebra and exact
  truncated power series over Gaussian rationals.
- ``realization``: coordinate realizations and identity suites.
- ``momentum_flow``: plane-wave flow, the map ``K`` and its inverse.
- ``coalgebra_star``: deformed momentum addition and star products.
- ``cli``, ``config``, ``parser``: command line driver and expression language.
"""

from .params import DeformationParams

__all__ = ["DeformationParams"]
__version__ = "0.1.0"
