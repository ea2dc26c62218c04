"""Minimality check of assembled provenance against the brute-force polynomial."""
from typing import Collection, Optional, Sequence

from .models import ProvPolynomial, ProvToken, literals_of


def check_minimal(
    tokens: Sequence[ProvToken],
    polynomial: ProvPolynomial,
    processed: Optional[Collection[int]] = None,
) -> bool:
    """True iff the tokens equal one monomial, restricted to the processed rows when given."""
    literals = literals_of(tokens)
    if len(literals) != len(tokens):
        return False
    allowed = set(processed) if processed is not None else None
    for monomial in polynomial.monomials:
        restricted = monomial if allowed is None else frozenset(l for l in monomial if l[0] in allowed)
        if restricted == literals:
            return True
    return False
