"""Scalar field theory on finite graphs.

Subpackages cover the graph data model (:mod:`graphqft.graphs`), the dense
symmetric kernel (:mod:`graphqft.linalg`), Gaussian data and closed forms
(:mod:`graphqft.gaussian`, :mod:`graphqft.closedforms`), gluing theorems
(:mod:`graphqft.gluing`), path and hesitant-path sums (:mod:`graphqft.paths`,
:mod:`graphqft.series`), the Feynman-diagram layer (:mod:`graphqft.feynman`),
the nonperturbative quadrature oracle (:mod:`graphqft.nonpert`), continuum
sweeps (:mod:`graphqft.continuum`) and the command line front end
(:mod:`graphqft.cli`).
"""

__version__ = "0.1.0"
