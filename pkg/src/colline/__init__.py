"""colline: exact-rational verification laboratory for linear and affine
structure of vector maps.

Maps over ℚ^m are represented exactly (DSL expressions or built-in
constructors), every geometric hypothesis is checked by exact falsification
with self-validating witnesses, and the classifier combines symbolic
detection, probe suites, and line-constellation certificates into a verdict:
exactly linear/affine, empirically linear/affine, refuted with a witness, or
inconclusive.
"""

__version__ = "0.1.0"
