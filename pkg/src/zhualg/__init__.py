"""Exact-arithmetic Zhu algebras, bimodules, and filtered-algebra checks.

Everything in this package computes over the rationals with no rounding.
The main layers, bottom up:

- ``rational``  -- scalar backend (gmpy2 ``mpq`` when available, else
  ``fractions.Fraction``; override with ``ZHUALG_RATIONAL_BACKEND``).
- ``exactlin``  -- sparse rational vectors, row reduction, subspaces.
- ``voa``       -- PBW bases and mode actions for the Heisenberg,
  Virasoro, and universal affine families and their highest-weight modules.
- ``zhu``       -- truncations of O(V), A(V), its level filtration, the
  associated graded ring, and the C2 quotient.
- ``bimod``     -- the bimodule A(M), its filtration and graded module,
  strong-generation checks and constructive rewriting.
- ``filtgen``   -- a generic toolkit for finite filtered algebras and
  modules: gr, ideal transfer, generator lifting, filtered tensor
  products, the graded swap map and its filtered lift.
- ``cli``       -- the ``zhualg`` command (dims / verify / tensor / rewrite).
"""

__version__ = "0.1.0"
