"""Exact computations in rank-2 Kac-Moody groups over finite fields.

Modules: ``roots`` (Cartan matrices, root data, real roots), ``lie``
(truncated Kac-Moody algebras and the epsilon signs), ``ffield`` (finite
fields, the torus and its center), ``unipotent`` (U = U_1 * U_2),
``tree`` (the action on the building tree and the affine matrix oracle),
``lattice`` (covolumes and torsion screening) and ``cli``.
"""

__version__ = "0.1.0"
