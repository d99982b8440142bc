"""Rational scalar backend.

All coefficients in this package are exact rationals.  Two interchangeable
backends are supported:

- ``gmpy2.mpq`` (default when gmpy2 is importable): much faster on the
  row-reduction hot paths;
- ``fractions.Fraction``: pure stdlib fallback.

Select explicitly with the environment variable
``ZHUALG_RATIONAL_BACKEND=gmpy2|fraction`` (anything else, or unset, means
"gmpy2 if available").  Both backends hash and print identically for equal
values, so results are bit-identical either way.
"""

from __future__ import annotations

import os

_requested = os.environ.get("ZHUALG_RATIONAL_BACKEND", "auto").lower()

if _requested == "fraction":
    from fractions import Fraction as Rat

    BACKEND = "fraction"
elif _requested in ("auto", "gmpy2"):
    try:
        from gmpy2 import mpq as Rat  # type: ignore[no-redef]

        BACKEND = "gmpy2"
    except ImportError:
        if _requested == "gmpy2":
            raise
        from fractions import Fraction as Rat  # type: ignore[no-redef]

        BACKEND = "fraction"
else:
    raise ValueError(
        f"ZHUALG_RATIONAL_BACKEND={_requested!r}: expected 'gmpy2', 'fraction' or 'auto'"
    )

ZERO = Rat(0)
ONE = Rat(1)


def rat(value) -> "Rat":
    """Coerce ints, strings like ``'3'`` or ``'-5/7'``, or rationals to Rat."""
    if isinstance(value, str):
        value = value.strip()
        if "/" in value:
            num, den = value.split("/")
            return Rat(int(num), int(den))
        return Rat(int(value))
    return Rat(value)


def rat_str(q) -> str:
    """Canonical string form, ``p/q`` or ``p``; identical across backends."""
    return str(q)


def binomial(top: int, k: int):
    """Generalized binomial coefficient C(top, k) for any integer top, k >= 0.

    Always an integer; returned as a plain int.
    """
    if k < 0:
        return 0
    num = 1
    for t in range(k):
        num *= top - t
    den = 1
    for t in range(2, k + 1):
        den *= t
    q, r = divmod(num, den)
    assert r == 0
    return q
