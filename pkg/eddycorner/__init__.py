"""
Corner singularities of the two-dimensional eddy-current operator.

The package builds primal and dual singular functions of
``-Laplace + 4 i zeta^2 1_{S-}`` near the vertex of a conducting sector of
opening ``omega`` and extracts singular coefficients from fields sampled on
small circles around that vertex.
"""

__version__ = '0.3.0'

from .app_factory import create_app  # noqa: E402

__all__ = ['__version__', 'create_app']
