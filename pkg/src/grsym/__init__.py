"""Exact symbolic differential geometry for general relativity.

Submodules:

- ``grsym.expr``: canonical rational expressions, parser, linear solver
- ``grsym.manifold``: frames, tensors, metrics
- ``grsym.curvature``: connections and curvature, matter-field checks
- ``grsym.newman_penrose``: Weyl scalars, Petrov type, adapted tetrads
- ``grsym.spinor``: two-component spinors and the Weyl spinor
- ``grsym.invariants``: Killing-type equations, invariant fields, flows
- ``grsym.liealg``: Lie algebra structure of isometry groups
- ``grsym.cli``: script DSL and command line
"""

from .expr import (ExprError, UnsupportedError, cos, exp, func, log, parameter, parse, sin, sqrt)
from .manifold import (GeometryError, Metric, Tensor, dgsetup, dual_basis, sym_product,
                       tensor_product, wedge)

__version__ = "0.1.0"

__all__ = [
    "ExprError", "UnsupportedError", "GeometryError", "Metric", "Tensor",
    "cos", "exp", "func", "log", "parameter", "parse", "sin", "sqrt",
    "dgsetup", "dual_basis", "sym_product", "tensor_product", "wedge",
]
