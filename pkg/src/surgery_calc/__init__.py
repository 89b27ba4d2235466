"""Exact computations for rational blow-down constructions of small exotic 4-manifolds.

Modules: ``arith`` (continued fractions, Smith form), ``plumbing`` (linear
plumbings), ``lattice`` (ambient classes and embedded configurations),
``swcalc`` (Seiberg-Witten functions), ``rbd`` (descent through a rational
blow-down), ``ledger`` (characteristic numbers) and ``dsl`` (scripts, reports
and the command line).
"""
from .arith import cfrac_expand, lens_label, smith_cokernel, smith_normal_form
from .plumbing import LinearPlumbing, boundary, from_pq, intersection_matrix
from .ledger import InvariantLedger, freedman_type

__version__ = "0.1.0"

__all__ = [
    "cfrac_expand", "lens_label", "smith_cokernel", "smith_normal_form",
    "LinearPlumbing", "boundary", "from_pq", "intersection_matrix",
    "InvariantLedger", "freedman_type", "__version__",
]
